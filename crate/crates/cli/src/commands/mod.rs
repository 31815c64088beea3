//! One function per sub-command. Each reads its settings, computes, and
//! returns an [`Outcome`]; `main` owns parsing and output.

use serde_json::{json, Value};

use crate::error::CliResult;
use crate::output::Csv;
use crate::settings::Settings;

mod dpp;
mod limits;
mod renewal;
mod sampling;

/// Everything a command needs besides its own settings.
pub struct Ctx {
    pub settings: Settings,
    pub seed: u64,
    pub threads: usize,
}

/// A pass/fail check on one number: `value <= limit` or `value >= limit`.
#[derive(Debug, Clone)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub at_most: bool,
}

impl Gate {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, at_most: true }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, at_most: false }
    }

    pub fn passed(&self) -> bool {
        if self.at_most {
            self.value <= self.limit
        } else {
            self.value >= self.limit
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "value": self.value,
            "limit": self.limit,
            "kind": if self.at_most { "at_most" } else { "at_least" },
            "passed": self.passed(),
        })
    }
}

pub struct Outcome {
    pub summary: String,
    pub results: Value,
    pub csv: Csv,
    pub gates: Vec<Gate>,
    /// set when a refinement ladder stopped at its cap; outputs are still written
    pub non_converged: Option<String>,
}

impl Outcome {
    pub fn new(summary: String, results: Value, csv: Csv) -> Self {
        Self { summary, results, csv, gates: Vec::new(), non_converged: None }
    }

    pub fn gate(mut self, g: Gate) -> Self {
        self.gates.push(g);
        self
    }
}

pub struct CommandDef {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [(&'static str, &'static str)],
    /// whether the kernel keys apply
    pub kernel: bool,
    pub run: fn(&mut Ctx) -> CliResult<Outcome>,
}

pub const COMMANDS: &[CommandDef] = &[
    dpp::KERNEL_EVAL,
    dpp::CORRELATION,
    dpp::VALIDITY,
    dpp::GAP,
    dpp::GENFUN,
    dpp::JANOSSY,
    sampling::SAMPLE,
    renewal::RENEWAL_CHECK,
    renewal::RENEWAL_INVERT,
    limits::SPECTRAL,
    limits::VARIANCE_SCAN,
    limits::COVARIANCE_DECAY,
    limits::CLT_COUNTS,
    limits::CLT_SPACINGS,
    sampling::LPP_COMPARE,
    sampling::PLANCHEREL_COMPARE,
    dpp::ORACLE,
];

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub(crate) fn band_csv(tables: &[(&str, &detfield::asymptotics::BandTable)]) -> Csv {
    let mut csv = Csv::new(&["table", "label", "predicted", "empirical", "sigma", "inside"]);
    for (name, t) in tables {
        for r in &t.rows {
            csv.push(vec![
                name.to_string(),
                r.label.clone(),
                crate::output::num(r.predicted),
                crate::output::num(r.empirical),
                crate::output::num(r.sigma),
                r.inside.to_string(),
            ]);
        }
    }
    csv
}

pub(crate) fn band_json(t: &detfield::asymptotics::BandTable) -> Value {
    json!({
        "trials": t.trials,
        "rows": t.rows.len(),
        "excursions": t.excursions,
        "expected_excursions": t.expected_excursions(),
        "worst_sigmas": t.rows.iter().map(|r| if r.sigma > 0.0 { (r.empirical - r.predicted).abs() / r.sigma } else { 0.0 }).fold(0.0, f64::max),
    })
}
