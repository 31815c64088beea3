//! `detfield`: batch front end for determinantal point process numerics.

mod commands;
mod error;
mod kernel;
mod output;
mod settings;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, Command};
use serde_json::json;

use commands::{CommandDef, Ctx, Outcome, COMMANDS};
use error::{CliError, CliResult, EXIT_GATE_FAILED};
use output::{output_path, write_atomic};
use settings::Settings;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "DETFIELD_OUT_DIR";

const COMMON_KEYS: &[(&str, &str)] = &[
    ("config", "file of key = value lines; flags override it"),
    ("seed", "master seed of every random stream (default 0)"),
    ("out-dir", "directory for <name>.json and <name>.csv (default $DETFIELD_OUT_DIR, else .)"),
    ("threads", "worker threads; results do not depend on it"),
    ("name", "stem of the output files (default: the command name)"),
];

fn key_arg(id: &'static str, help: &'static str) -> Arg {
    Arg::new(id).long(id).value_name("VALUE").allow_hyphen_values(true).help(help)
}

fn cli() -> Command {
    let mut app = Command::new("detfield")
        .about("Determinantal point process numerics: kernels, Fredholm determinants, exact samplers, renewal checks and limit theorems")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for def in COMMANDS {
        let mut cmd = Command::new(def.name).about(def.about);
        let mut seen = Vec::new();
        let kernel_keys: &[(&str, &str)] = if def.kernel { kernel::KERNEL_KEYS } else { &[] };
        for &(id, help) in COMMON_KEYS.iter().chain(kernel_keys).chain(def.keys) {
            if !seen.contains(&id) {
                seen.push(id);
                cmd = cmd.arg(key_arg(id, help));
            }
        }
        app = app.subcommand(cmd);
    }
    app
}

/// Values given on the command line; defaults and config values are resolved later.
fn flags(m: &ArgMatches) -> BTreeMap<String, String> {
    m.ids()
        .filter(|id| m.value_source(id.as_str()) == Some(ValueSource::CommandLine))
        .filter_map(|id| m.get_one::<String>(id.as_str()).map(|v| (id.to_string(), v.clone())))
        .collect()
}

struct Run {
    name: String,
    out_dir: PathBuf,
    seed: u64,
    settings: Settings,
    outcome: Outcome,
}

fn run(def: &CommandDef, m: &ArgMatches) -> CliResult<Run> {
    let mut settings = Settings::new(flags(m))?;
    let seed: u64 = settings.get("seed", 0)?;
    let default_threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let threads: usize = settings.get("threads", default_threads)?;
    if threads == 0 {
        return Err(CliError::Config("`threads` must be at least 1".into()));
    }
    let out_dir = settings
        .opt_str("out-dir")
        .or_else(|| std::env::var(OUT_DIR_ENV).ok().filter(|v| !v.is_empty()))
        .unwrap_or_else(|| ".".into());
    let name = settings.str("name", def.name);
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(CliError::Config(format!("`name` {name:?} must be a plain file stem")));
    }
    let mut ctx = Ctx { settings, seed, threads };
    let outcome = (def.run)(&mut ctx)?;
    Ok(Run { name, out_dir: PathBuf::from(out_dir), seed, settings: ctx.settings, outcome })
}

fn finish(def: &CommandDef, r: Run) -> CliResult<i32> {
    for k in r.settings.unread_file_keys() {
        eprintln!("warning: config key `{k}` is not used by {}", def.name);
    }
    let failed: Vec<&str> = r.outcome.gates.iter().filter(|g| !g.passed()).map(|g| g.name.as_str()).collect();
    let (status, code) = if r.outcome.non_converged.is_some() {
        ("non_converged", CliError::NonConvergence(String::new()).exit_code())
    } else if !failed.is_empty() {
        ("gate_failed", EXIT_GATE_FAILED)
    } else {
        ("ok", 0)
    };
    let doc = json!({
        "command": def.name,
        "seed": r.seed,
        "config": r.settings.effective(),
        "results": r.outcome.results,
        "gates": r.outcome.gates.iter().map(|g| g.to_json()).collect::<Vec<_>>(),
        "status": status,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(&output_path(&r.out_dir, &r.name, "json"), &text)?;
    write_atomic(&output_path(&r.out_dir, &r.name, "csv"), &r.outcome.csv.render())?;
    let mut line = format!("{}: {} [{status}]", def.name, r.outcome.summary);
    if !failed.is_empty() {
        line.push_str(&format!(" failed gates: {}", failed.join(", ")));
    }
    if let Some(why) = &r.outcome.non_converged {
        line.push_str(&format!(" ({why})"));
    }
    emit(&format!("{line}\n{text}"));
    Ok(code)
}

/// Writes to stdout; a closed pipe is not an error worth a panic.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let Some((name, sub)) = matches.subcommand() else {
        unreachable!("a sub-command is required")
    };
    let def = COMMANDS.iter().find(|d| d.name == name).expect("registered sub-command");
    let code = match run(def, sub).and_then(|r| finish(def, r)) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {e}");
            let doc = json!({"command": def.name, "status": "error", "exit_code": code, "error": e.to_string()});
            emit(&format!("{}: {e} [error]\n{}\n", def.name, serde_json::to_string_pretty(&doc).unwrap_or_default()));
            code
        }
    };
    ExitCode::from(code as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_command_builds_and_has_unique_keys() {
        cli().debug_assert();
        assert_eq!(COMMANDS.len(), 17);
    }

    #[test]
    fn only_command_line_values_become_flags() {
        let m = cli().try_get_matches_from(["detfield", "gap", "--kernel", "sine", "--window", "0,1"]).unwrap();
        let (_, sub) = m.subcommand().unwrap();
        let f = flags(sub);
        assert_eq!(f.len(), 2);
        assert_eq!(f["kernel"], "sine");
    }
}
