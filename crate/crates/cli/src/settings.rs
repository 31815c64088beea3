use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{CliError, CliResult};

/// Keys that steer execution but never change results; they are not echoed.
pub const EXECUTION_KEYS: &[&str] = &["config", "out-dir", "threads", "name"];

/// Effective run configuration: command-line flags over config-file values
/// over defaults. Every value read is recorded for the output metadata.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    flags: BTreeMap<String, String>,
    file: BTreeMap<String, String>,
    effective: BTreeMap<String, String>,
}

/// Flat `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value, got {line:?}", no + 1)))?;
        let k = k.trim().to_string();
        if k.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", no + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn new(flags: BTreeMap<String, String>) -> CliResult<Self> {
        let file = match flags.get("config") {
            Some(path) => {
                let text = std::fs::read_to_string(Path::new(path))
                    .map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { flags, file, effective: BTreeMap::new() })
    }

    fn raw(&self, key: &str) -> Option<&String> {
        self.flags.get(key).or_else(|| self.file.get(key))
    }

    fn record(&mut self, key: &str, value: String) {
        if !EXECUTION_KEYS.contains(&key) {
            self.effective.insert(key.to_string(), value);
        }
    }

    pub fn effective(&self) -> &BTreeMap<String, String> {
        &self.effective
    }

    /// Config-file keys no command read, usually typos.
    pub fn unread_file_keys(&self) -> Vec<&str> {
        self.file
            .keys()
            .filter(|k| !self.effective.contains_key(*k) && !EXECUTION_KEYS.contains(&k.as_str()))
            .map(String::as_str)
            .collect()
    }

    pub fn opt_str(&mut self, key: &str) -> Option<String> {
        let v = self.raw(key).cloned();
        if let Some(v) = &v {
            self.record(key, v.clone());
        }
        v
    }

    pub fn str(&mut self, key: &str, default: &str) -> String {
        let v = self.raw(key).cloned().unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    pub fn require_str(&mut self, key: &str) -> CliResult<String> {
        self.opt_str(key).ok_or_else(|| CliError::Config(format!("missing required setting `{key}`")))
    }

    pub fn opt<T: FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.opt_str(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| CliError::Config(format!("`{key}`: cannot parse {v:?}"))),
        }
    }

    pub fn get<T: FromStr + ToString>(&mut self, key: &str, default: T) -> CliResult<T> {
        match self.opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> CliResult<T> {
        self.opt(key)?.ok_or_else(|| CliError::Config(format!("missing required setting `{key}`")))
    }

    /// Comma-separated list, or `a..b` / `a..b:step` for integer ranges.
    pub fn list_f64(&mut self, key: &str, default: &str) -> CliResult<Vec<f64>> {
        let v = self.str(key, default);
        parse_list(&v).map_err(|e| CliError::Config(format!("`{key}`: {e}")))
    }

    pub fn pair(&mut self, key: &str, default: &str) -> CliResult<(f64, f64)> {
        let v = self.list_f64(key, default)?;
        match v[..] {
            [a, b] => Ok((a, b)),
            _ => Err(CliError::Config(format!("`{key}` needs exactly two numbers"))),
        }
    }

    pub fn complex_list(&mut self, key: &str, default: &str) -> CliResult<Vec<Complex64>> {
        let v = self.str(key, default);
        v.split(',').map(|s| parse_complex(s.trim()).map_err(|e| CliError::Config(format!("`{key}`: {e}")))).collect()
    }
}

pub fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    let v = v.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, rest)) = v.split_once("..") {
        let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let (a, b, step): (i64, i64, i64) = (
            a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?,
            b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?,
            step.trim().parse().map_err(|_| format!("bad range step {step:?}"))?,
        );
        if step <= 0 || b < a {
            return Err(format!("empty range {v:?}"));
        }
        return Ok((a..=b).step_by(step as usize).map(|x| x as f64).collect());
    }
    v.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number {s:?}"))).collect()
}

/// `re` or `re:im`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(':').unwrap_or((s, "0"));
    Ok(Complex64::new(
        re.trim().parse().map_err(|_| format!("bad real part {re:?}"))?,
        im.trim().parse().map_err(|_| format!("bad imaginary part {im:?}"))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let mut flags = BTreeMap::new();
        flags.insert("rho".to_string(), "0.3".to_string());
        let mut s = Settings { flags, file: parse_config("rho = 0.1\nalpha=2 # comment\n").unwrap(), ..Default::default() };
        assert_eq!(s.get("rho", 0.5).unwrap(), 0.3);
        assert_eq!(s.get("alpha", 1.0).unwrap(), 2.0);
        assert_eq!(s.get("beta", 7.0).unwrap(), 7.0);
        assert_eq!(s.effective().get("beta").unwrap(), "7");
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("5..8").unwrap(), vec![5.0, 6.0, 7.0, 8.0]);
        assert_eq!(parse_list("10..40:10").unwrap(), vec![10.0, 20.0, 30.0, 40.0]);
        assert_eq!(parse_list("0.5, 1").unwrap(), vec![0.5, 1.0]);
        assert!(parse_list("a,b").is_err());
        assert_eq!(parse_complex("0.5:-1").unwrap(), Complex64::new(0.5, -1.0));
    }

    #[test]
    fn malformed_config_is_rejected() {
        assert!(parse_config("just words").is_err());
        assert!(parse_config("=3").is_err());
    }
}
