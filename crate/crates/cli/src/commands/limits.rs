use serde_json::json;

use detfield::asymptotics::{
    clt_counts, clt_spacings, count_variance, covariance_decay, bounded_variance_moments, bounded_variance_limit,
    spectral_density, spectral_measure, CountModel, SpacingModel,
};
use detfield::renewal::macchi_interval_density;
use detfield::{DiscreteKernel, KernelSpec};

use super::{slope, CommandDef, Ctx, Gate, Outcome};
use crate::error::{CliError, CliResult};
use crate::kernel::kernel_spec;
use crate::output::{num, Csv};

/// Slack on the bounds `0 <= density <= K(0)`.
const BOUND_SLACK: f64 = 1e-12;

fn spectral(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let lambda_max: f64 = ctx.settings.get("lambda-max", 12.0)?;
    let points: usize = ctx.settings.get("points", 601)?;
    let tol: f64 = ctx.settings.get("tol", 1e-8)?;
    let t = spectral_measure(&spec, lambda_max, points)?;
    let mut csv = Csv::new(&["lambda", "density", "kernel_hat"]);
    let mut violations = 0usize;
    for ((l, d), h) in t.lambda.iter().zip(&t.density).zip(&t.kernel_hat) {
        csv.push_nums(&[*l, *d, *h]);
        if *d < -BOUND_SLACK || *d > t.k0 + BOUND_SLACK {
            violations += 1;
        }
    }
    let mut results = json!({
        "family": spec.name(),
        "k0": t.k0,
        "points": points,
        "lambda_max": lambda_max,
        "density_at_zero": spectral_density(&spec, 0.0)?,
        "bound_violations": violations,
        "min_density": t.density.iter().copied().fold(f64::INFINITY, f64::min),
        "max_density": t.density.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    let mut out = Outcome::new(String::new(), serde_json::Value::Null, csv);
    out.gates.push(Gate::at_most("bound_violations", violations as f64, 0.0));
    let mut summary = format!("{}: spectral density on {points} points, {violations} bound violations", spec.name());
    if matches!(spec, KernelSpec::Sine) {
        // |lambda| / 2 pi capped at 1
        let worst = t
            .lambda
            .iter()
            .zip(&t.density)
            .map(|(l, d)| (d - (l.abs() / std::f64::consts::TAU).min(1.0)).abs())
            .fold(0.0, f64::max);
        results["piecewise_max_error"] = json!(worst);
        out.gates.push(Gate::at_most("piecewise_max_error", worst, tol));
        summary.push_str(&format!(", piecewise error {}", num(worst)));
    }
    out.summary = summary;
    out.results = results;
    Ok(out)
}

fn variance_scan(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    if matches!(spec, KernelSpec::BoundedVariance) {
        return bounded_variance_scan(ctx);
    }
    let s = &mut ctx.settings;
    let ls = s.list_f64("l", "10,20,40,80,160")?;
    let route_tol: f64 = s.get("route-tol", 1e-6)?;
    let slope_tol: f64 = s.get("slope-tol", 0.15)?;
    let linear_tol: f64 = s.get("linear-tol", 0.02)?;
    if ls.is_empty() {
        return Err(CliError::Config("`l` lists no half-widths".into()));
    }
    let mut csv = Csv::new(&["L", "var", "var_over_2L"]);
    let mut rows = Vec::new();
    let mut route_worst = 0.0f64;
    let mut vars = Vec::new();
    for &l in &ls {
        let v = count_variance(&spec, l)?;
        route_worst = route_worst.max((v.variance - v.double_integral).abs());
        csv.push_nums(&[l, v.variance, v.variance / (2.0 * l)]);
        rows.push(json!({
            "L": l,
            "mean": v.mean,
            "var": v.variance,
            "var_double_integral": v.double_integral,
            "var_over_2L": v.variance / (2.0 * l),
            "nodes": v.nodes,
            "order": v.order,
        }));
        vars.push(v.variance);
    }
    let logs: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    let log_slope = if ls.len() > 1 { slope(&logs, &vars) } else { f64::NAN };
    let d0 = spectral_density(&spec, 0.0)?;
    let last = *ls.last().expect("non-empty");
    let ratio = vars.last().expect("non-empty") / (2.0 * last);
    let mut results = json!({
        "family": spec.name(),
        "rows": rows,
        "route_max_difference": route_worst,
        "slope_vs_log_L": log_slope,
        "density_at_zero": d0,
        "var_over_2L_last": ratio,
    });
    let mut out = Outcome::new(String::new(), serde_json::Value::Null, csv);
    out.gates.push(Gate::at_most("route_max_difference", route_worst, route_tol));
    let summary;
    if d0 > 1e-12 {
        // Var / 2L tends to the spectral density at the origin
        let rel = (ratio / d0 - 1.0).abs();
        results["linear_relative_error"] = json!(rel);
        out.gates.push(Gate::at_most("linear_relative_error", rel, linear_tol));
        summary = format!("{}: Var/2L = {} at L = {last}, limit {}", spec.name(), num(ratio), num(d0));
    } else if matches!(spec, KernelSpec::Sine) {
        let target = 1.0 / std::f64::consts::PI.powi(2);
        let rel = (log_slope / target - 1.0).abs();
        results["log_slope_target"] = json!(target);
        results["log_slope_relative_error"] = json!(rel);
        out.gates.push(Gate::at_most("log_slope_relative_error", rel, slope_tol));
        summary = format!("{}: slope of Var against log L = {} (1/pi^2 = {})", spec.name(), num(log_slope), num(target));
    } else {
        summary = format!("{}: slope of Var against log L = {}", spec.name(), num(log_slope));
    }
    out.summary = summary;
    out.results = results;
    Ok(out)
}

/// `Var #[-n, n]` of the bounded-variance kernel against its series bound.
fn bounded_variance_scan(ctx: &mut Ctx) -> CliResult<Outcome> {
    let n_max: usize = ctx.settings.get("n-max", 50)?;
    let bound = bounded_variance_limit();
    let mut csv = Csv::new(&["L", "var", "var_over_2L", "mean", "bound"]);
    let mut above = 0usize;
    let mut last_mean = 0.0;
    for n in 1..=n_max {
        let (mean, var) = bounded_variance_moments(n);
        if var >= bound {
            above += 1;
        }
        last_mean = mean;
        csv.push_nums(&[n as f64, var, var / (2.0 * n as f64), mean, bound]);
    }
    let results = json!({
        "family": "bounded-variance",
        "n_max": n_max,
        "bound": bound,
        "rows_at_or_above_bound": above,
        "mean_at_n_max": last_mean,
    });
    let summary = format!("bounded-variance: Var below {} for all n <= {n_max} ({above} exceptions), mean {}", num(bound), num(last_mean));
    Ok(Outcome::new(summary, results, csv)
        .gate(Gate::at_most("rows_at_or_above_bound", above as f64, 0.0))
        .gate(Gate::at_least("mean_at_n_max", last_mean, n_max as f64)))
}

fn covariance(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let s = &mut ctx.settings;
    let size: f64 = s.get("size", 2.0)?;
    let step: f64 = s.get("step", 0.5)?;
    let count: usize = s.get("count", 30)?;
    let decay_tol: f64 = s.get("decay-tol", 1e-6)?;
    let seps: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
    let cov = covariance_decay(&spec, size, &seps)?;
    let mut csv = Csv::new(&["separation", "covariance"]);
    for (t, c) in seps.iter().zip(&cov) {
        csv.push_nums(&[*t, *c]);
    }
    let increases = cov.windows(2).filter(|w| w[1].abs() > w[0].abs()).count();
    let tail = cov.last().map_or(0.0, |c| c.abs());
    let results = json!({
        "family": spec.name(),
        "window": size,
        "separations": seps.len(),
        "non_decreasing_steps": increases,
        "tail": tail,
    });
    let summary = format!("{}: |Cov| at separation {} is {}, {increases} increases", spec.name(), num(seps.last().copied().unwrap_or(0.0)), num(tail));
    Ok(Outcome::new(summary, results, csv)
        .gate(Gate::at_most("non_decreasing_steps", increases as f64, 0.0))
        .gate(Gate::at_most("tail", tail, decay_tol)))
}

fn count_model(ctx: &mut Ctx) -> CliResult<CountModel> {
    let s = &mut ctx.settings;
    let model = s.str("model", "cue");
    Ok(match model.as_str() {
        "cue" => {
            let n: usize = s.get("n", 50)?;
            let arc: f64 = s.get("arc", std::f64::consts::PI)?;
            CountModel::Projection { spec: KernelSpec::CueN { n }, window: (0.0, arc) }
        }
        "hermite" => {
            let n: usize = s.get("n", 50)?;
            let (a, b) = s.pair("window", "-2,2")?;
            CountModel::Projection { spec: KernelSpec::HermiteN { n }, window: (a, b) }
        }
        "bernoulli" => {
            let sites: usize = s.get("sites", 400)?;
            let p: f64 = s.get("p", 0.5)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Constraint(format!("p = {p} must lie in [0, 1]")));
            }
            CountModel::Discrete { kernel: DiscreteKernel::diagonal(&vec![p; sites]) }
        }
        "bounded-variance" => CountModel::BoundedVariance { n: s.get("n", 20)? },
        "macchi" => {
            let rho: f64 = s.get("rho", 0.4)?;
            let alpha: f64 = s.get("alpha", 1.0)?;
            let length: f64 = s.get("length", 50.0)?;
            CountModel::Renewal { spec: macchi_interval_density(rho, alpha)?, window: (0.0, length) }
        }
        other => return Err(CliError::Config(format!("unknown model {other:?}; use cue, hermite, bernoulli, bounded-variance or macchi"))),
    })
}

fn clt_counts_cmd(ctx: &mut Ctx) -> CliResult<Outcome> {
    let model = count_model(ctx)?;
    let replicas: usize = ctx.settings.get("replicas", 10_000)?;
    let ks_max: f64 = ctx.settings.get("ks-max", 0.05)?;
    let r = clt_counts(&model, replicas, ctx.seed, ctx.threads)?;
    let mut csv = Csv::new(&["model", "mean", "var", "sample_mean", "sample_var", "ks", "replicas"]);
    csv.push(vec![r.model.clone(), num(r.mean), num(r.var), num(r.sample_mean), num(r.sample_var), num(r.ks), r.replicas.to_string()]);
    let results = json!({
        "model": r.model,
        "mean": r.mean,
        "var": r.var,
        "sample_mean": r.sample_mean,
        "sample_var": r.sample_var,
        "ks": r.ks,
        "replicas": r.replicas,
        "seed": r.seed,
        "variance_at_least_one": r.clt_regime,
        "variance_growth": r.growth,
        "variance_diverges": r.variance_diverges,
        "violates_variance_growth": !r.variance_diverges,
    });
    let mut out = Outcome::new(String::new(), results, csv);
    if r.variance_diverges {
        out.gates.push(Gate::at_most("ks", r.ks, ks_max));
        out.summary = format!("{}: KS {} over {} replicas", r.model, num(r.ks), r.replicas);
    } else {
        out.summary = format!("{}: variance stays bounded, normal limit not expected (KS {})", r.model, num(r.ks));
    }
    Ok(out)
}

fn clt_spacings_cmd(ctx: &mut Ctx) -> CliResult<Outcome> {
    let s = &mut ctx.settings;
    let name = s.str("model", "poisson");
    let (model, default_sizes) = match name.as_str() {
        "poisson" => (SpacingModel::Poisson { rho: s.get("rho", 1.0)? }, "25,50,100"),
        "cue" => (SpacingModel::Cue, "64,128,256"),
        other => return Err(CliError::Config(format!("unknown model {other:?}; use poisson or cue"))),
    };
    let b = s.pair("b", "0,1")?;
    let sizes = s.list_f64("sizes", default_sizes)?;
    let replicas: usize = s.get("replicas", 2000)?;
    let linear_tol: f64 = s.get("linear-tol", 0.1)?;
    let ks_max: f64 = s.get("ks-max", 0.05)?;
    let r = clt_spacings(&model, b, &sizes, replicas, ctx.seed, ctx.threads)?;
    let mut csv = Csv::new(&["size", "mean", "var", "var_over_size"]);
    for row in &r.rows {
        csv.push_nums(&[row.size, row.mean, row.var, row.var_over_size]);
    }
    let results = json!({
        "model": name,
        "b": [b.0, b.1],
        "rows": serde_json::to_value(&r.rows).map_err(|e| CliError::Io(e.to_string()))?,
        "slope": r.slope,
        "ratio_spread": r.ratio_spread,
        "ks": r.ks,
        "replicas": r.replicas,
        "seed": r.seed,
    });
    let summary = format!("{name} spacings: Var/size spread {}, KS {} at size {}", num(r.ratio_spread), num(r.ks), num(*sizes.last().expect("sizes")));
    Ok(Outcome::new(summary, results, csv)
        .gate(Gate::at_most("ratio_spread", r.ratio_spread, linear_tol))
        .gate(Gate::at_most("ks", r.ks, ks_max)))
}

pub const SPECTRAL: CommandDef = CommandDef {
    name: "spectral",
    about: "Spectral density of the count variance, d mu / d lambda = K(0) - (1/2pi) int Khat(y) Khat(y - lambda) dy, \
            with Khat(lambda) = int K(x) exp(-i lambda x) dx, for translation-invariant kernels; checks \
            0 <= d mu / d lambda <= K(0) and, for the sine kernel, min(|lambda| / 2pi, 1).",
    keys: &[
        ("lambda-max", "grid covers [-lambda-max, lambda-max]"),
        ("points", "grid points"),
        ("tol", "tolerance against the sine closed form"),
    ],
    kernel: true,
    run: spectral,
};

pub const VARIANCE_SCAN: CommandDef = CommandDef {
    name: "variance-scan",
    about: "Var #[-L, L] = Tr K_B - ||K_B||^2 on a converged Nystrom ladder, cross-checked against \
            2L K(0) - int_{-2L}^{2L} (2L - |t|) |K(t)|^2 dt. Reports the slope of Var against log L \
            (sine kernel: 1/pi^2) or Var/2L against its limit d mu/d lambda at 0. For kernel=bounded-variance, \
            Var #[-n, n] for n <= n-max against sum_k (1 - 1/(k^2+1)) / (k^2+1).",
    keys: &[
        ("l", "half-widths L (list or a..b:step)"),
        ("route-tol", "agreement of the two variance routes"),
        ("slope-tol", "relative tolerance on the log slope"),
        ("linear-tol", "relative tolerance on Var/2L"),
        ("n-max", "bounded-variance: largest n"),
    ],
    kernel: true,
    run: variance_scan,
};

pub const COVARIANCE_DECAY: CommandDef = CommandDef {
    name: "covariance-decay",
    about: "Cov(#[0, w], #[t, t + w]) = K(0) (w - t)_+ - int |K(s)|^2 (w - |s - t|)_+ ds for a translation-invariant \
            kernel, at separations t = 0, step, 2 step, ...; checks that |Cov| decreases to 0.",
    keys: &[
        ("size", "window length w"),
        ("step", "separation step"),
        ("count", "number of separations"),
        ("decay-tol", "bound on |Cov| at the largest separation"),
    ],
    kernel: true,
    run: covariance,
};

pub const CLT_COUNTS: CommandDef = CommandDef {
    name: "clt-counts",
    about: "Central limit theorem for counts: (#B - E#B) / sqrt(Var #B) against N(0, 1) by a lattice-corrected KS \
            distance, with exact moments. The variance along the growth family (sizes x1, x2, x4, x8) decides \
            whether Var -> infinity holds; a bounded-variance model is flagged instead of tested.",
    keys: &[
        ("model", "cue, hermite, bernoulli, bounded-variance or macchi"),
        ("n", "cue/hermite: particles; bounded-variance: window [-n, n]"),
        ("arc", "cue: arc [0, arc]"),
        ("window", "hermite: counting interval a,b"),
        ("sites", "bernoulli: independent sites"),
        ("p", "bernoulli: occupation probability"),
        ("rho", "macchi: intensity"),
        ("alpha", "macchi: length scale"),
        ("length", "macchi: counting interval [0, length]"),
        ("replicas", "samples"),
        ("ks-max", "largest KS distance accepted"),
    ],
    kernel: false,
    run: clt_counts_cmd,
};

pub const CLT_SPACINGS: CommandDef = CommandDef {
    name: "clt-spacings",
    about: "Central limit theorem for spacings: #{x_i in [-L, L] : no other point in x_i + B}, B = (b0, b1], \
            for a Poisson process or for CUE(n) on a circle of length n. Checks Var linear in the size and \
            KS to N(0, 1) at the largest size.",
    keys: &[
        ("model", "poisson or cue"),
        ("rho", "poisson: intensity"),
        ("b", "interval B as b0,b1"),
        ("sizes", "poisson: half-widths L; cue: n"),
        ("replicas", "samples per size"),
        ("linear-tol", "largest relative spread of Var/size"),
        ("ks-max", "largest KS distance accepted"),
    ],
    kernel: false,
    run: clt_spacings_cmd,
};
