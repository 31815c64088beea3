use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn detfield(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detfield"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("DETFIELD_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Path, name: &str) -> Value {
    serde_json::from_slice(&std::fs::read(out.join(format!("{name}.json"))).expect("json written")).expect("valid json")
}

fn csv(out: &Path, name: &str) -> String {
    std::fs::read_to_string(out.join(format!("{name}.csv"))).expect("csv written")
}

#[test]
fn gap_of_sine_kernel_with_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let o = detfield(dir.path(), &["gap", "--kernel", "sine", "--window", "0,1", "--order", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let j = json(dir.path(), "gap");
    // E(0; s = 1) of the sine process
    assert!((j["results"]["value"].as_f64().unwrap() - 0.170_217_421_379_18).abs() < 1e-12);
    assert_eq!(j["results"]["ladder"][0]["order"], 64);
    assert_eq!(j["status"], "ok");
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().next().unwrap().starts_with("gap: gap probability"));
    let block: Value = serde_json::from_str(stdout.split_once('\n').unwrap().1).unwrap();
    assert_eq!(block, j);
}

#[test]
fn cue_samples_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sample", "--kernel", "cue", "--n", "10", "--replicas", "3", "--seed", "7"];
    assert!(detfield(a.path(), &args).status.success());
    assert!(detfield(b.path(), &args).status.success());
    let rows: Vec<String> = csv(a.path(), "sample").lines().map(String::from).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        let cells: Vec<f64> = row.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 10);
        assert!(cells.iter().all(|t| (0.0..std::f64::consts::TAU).contains(t)));
    }
    assert_eq!(csv(a.path(), "sample"), csv(b.path(), "sample"));
    assert_eq!(json(a.path(), "sample"), json(b.path(), "sample"));
}

#[test]
fn constraint_violation_names_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let o = detfield(dir.path(), &["renewal-check", "--kernel", "macchi", "--rho", "0.6", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("2*rho*alpha = 1.2 exceeds 1"));
    assert!(!dir.path().join("renewal-check.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| detfield(dir.path(), args).status.code();
    assert_eq!(code(&["gap", "--kernel", "no-such-family"]), Some(2));
    assert_eq!(code(&["gap", "--kernel", "hermite"]), Some(2));
    assert_eq!(code(&["gap", "--kernel", "sine", "--order", "many"]), Some(2));
    assert_eq!(code(&["gap", "--kernel", "bessel", "--alpha", "-3"]), Some(3));
    assert_eq!(code(&["gap", "--kernel", "airy", "--window", "-2,5", "--order", "4", "--cap", "8"]), Some(4));
    assert_eq!(code(&["kernel-eval", "--kernel", "hermite", "--n", "20", "--check", "sine-limit", "--tol", "1e-6"]), Some(5));
    assert_eq!(code(&["not-a-command"]), Some(2));
    // non-convergence still leaves its ladder behind
    detfield(dir.path(), &["gap", "--kernel", "airy", "--window", "-2,5", "--order", "4", "--cap", "8", "--name", "nc"]);
    assert_eq!(json(dir.path(), "nc")["status"], "non_converged");
}

#[test]
fn config_file_precedence_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# gap run\nkernel = sine\nwindow = 0,2\norder = 8\nthreads = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_detfield"))
        .args(["gap", "--config", cfg.to_str().unwrap(), "--window", "0,1", "--seed", "3"])
        .env("DETFIELD_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(dir.path(), "gap");
    let c = &j["config"];
    assert_eq!(c["window"], "0,1");
    assert_eq!(c["order"], "8");
    assert_eq!(c["kernel"], "sine");
    assert_eq!(c["tol"], "0.000000001");
    assert_eq!(c["seed"], "3");
    assert_eq!(j["seed"], 3);
    for hidden in ["config", "threads", "out-dir", "name"] {
        assert!(c.get(hidden).is_none(), "{hidden} echoed");
    }
}

#[test]
fn malformed_config_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kernel sine\n").unwrap();
    let o = detfield(dir.path(), &["gap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn variance_scan_shape() {
    let dir = tempfile::tempdir().unwrap();
    assert!(detfield(dir.path(), &["variance-scan", "--kernel", "sine"]).status.success());
    let text = csv(dir.path(), "variance-scan");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "L,var,var_over_2L");
    assert_eq!(lines.len(), 6);
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn clt_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = detfield(dir.path(), &["clt-counts", "--model", "bernoulli", "--sites", "50", "--replicas", "200", "--seed", "9"]);
    assert!(o.status.success());
    let r = &json(dir.path(), "clt-counts")["results"];
    for key in ["mean", "var", "ks", "replicas", "seed"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["seed"], 9);
    assert_eq!(r["mean"], 25.0);
}

#[test]
fn empty_result_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert!(detfield(dir.path(), &["sample", "--kernel", "cue", "--n", "4", "--replicas", "0"]).status.success());
    assert_eq!(csv(dir.path(), "sample"), "replica\n");
}

#[test]
fn help_names_the_formulas() {
    for (cmd, needle) in [
        ("gap", "det(I - K_B)"),
        ("correlation", "det[K(x_i, x_j)]"),
        ("janossy", "L = K (I - K)^-1"),
        ("renewal-invert", "u = f + u * f"),
        ("variance-scan", "Tr K_B - ||K_B||^2"),
    ] {
        let o = Command::new(env!("CARGO_BIN_EXE_detfield")).args([cmd, "--help"]).output().unwrap();
        assert!(o.status.success());
        assert!(String::from_utf8(o.stdout).unwrap().contains(needle), "{cmd}");
    }
}

/// One cheap invocation of every sub-command.
const SWEEP: [&[&str]; 17] = [
    &["kernel-eval", "--kernel", "airy", "--x", "-1,0.5"],
    &["correlation", "--kernel", "ginibre", "--points", "0:0,0.5:0.2,-0.3:0.1"],
    &["validity", "--kernel", "bessel", "--alpha", "1.5", "--window", "0,3", "--order", "16"],
    &["gap", "--kernel", "meixner", "--m", "4", "--n", "3", "--q", "0.4", "--window", "5,60"],
    &["genfun", "--kernel", "random", "--sites", "5", "--blocks", "0,0,1,1,1", "--z", "0.5,2:1"],
    &["janossy", "--kernel", "discrete-bessel", "--theta", "2", "--window", "0,8", "--points", "0.5,2.5"],
    &["sample", "--kernel", "macchi", "--rho", "0.4", "--alpha", "1", "--replicas", "3"],
    &["renewal-check", "--kernel", "macchi", "--rho", "0.3", "--alpha", "1", "--spacings", "500", "--triples", "5"],
    &["renewal-invert", "--mode", "discrete", "--terms", "40"],
    &["spectral", "--kernel", "macchi", "--rho", "0.2", "--alpha", "2", "--points", "11"],
    &["variance-scan", "--kernel", "macchi", "--rho", "0.4", "--alpha", "1", "--l", "5,10", "--linear-tol", "0.2"],
    &["covariance-decay", "--kernel", "macchi", "--rho", "0.2", "--alpha", "2", "--count", "5", "--decay-tol", "1"],
    &["clt-counts", "--model", "hermite", "--n", "8", "--replicas", "50", "--ks-max", "1"],
    &["clt-spacings", "--model", "poisson", "--sizes", "5,10", "--replicas", "50", "--ks-max", "1", "--linear-tol", "1"],
    &["lpp-compare", "--m", "3", "--n", "2", "--t", "0..6", "--replicas", "500", "--max-excursions", "7"],
    &["plancherel-compare", "--theta", "2", "--max-half", "3", "--replicas", "300", "--conditional-n", "2", "--max-excursions", "8"],
    &["oracle", "--kernels", "2", "--sites", "4", "--janossy-sites", "3", "--cluster-max", "3", "--draws", "200", "--max-excursions", "16"],
];

#[test]
fn every_command_records_its_seed_and_reruns_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for args in SWEEP {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--seed", "42"]);
        let o = detfield(a.path(), &full);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
        full.extend(["--threads", "2"]);
        assert!(detfield(b.path(), &full).status.success());
        let j = json(a.path(), args[0]);
        assert_eq!(j["seed"], 42, "{}", args[0]);
        assert_eq!(j["config"]["seed"], "42");
        assert_eq!(j["command"], args[0]);
        for ext in ["json", "csv"] {
            let name = format!("{}.{ext}", args[0]);
            assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap(), "{name}");
        }
    }
    // only the finished files remain
    let entries = std::fs::read_dir(a.path()).unwrap().count();
    assert_eq!(entries, 2 * SWEEP.len());
}
