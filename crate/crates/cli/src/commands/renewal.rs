use rand::Rng;
use serde_json::json;

use detfield::asymptotics::{ks_critical, ks_one_sample};
use detfield::renewal::{
    check_iid_spacing_conditions, convolution_residual, lattice_characteristic, macchi_interval_density, macchi_pdf,
    renewal_correlations, renewal_density_series, solve_convolution, ConvolutionMode, IntervalLaw, Tabulated,
};
use detfield::samplers::{run_replicas, RenewalSampler};
use detfield::{correlation_det, KernelSpec, Point, RngStream};
use num_complex::Complex64;

use super::{CommandDef, Ctx, Gate, Outcome};
use crate::error::{CliError, CliResult};
use crate::kernel::kernel_spec;
use crate::output::{num, Csv};

/// Stream for the random test triples, apart from the replica streams.
const TRIPLE_STREAM: u64 = u64::MAX - 1;
/// Spacings are drawn in this many equal chunks, one stream each.
const SPACING_CHUNKS: usize = 10;

/// CDF of `Exp(a) + Exp(b)` with `a, b = (1 -+ sqrt(1 - 2 rho alpha)) / alpha`.
fn hypoexponential_cdf(rho: f64, alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = (1.0 - 2.0 * rho * alpha).sqrt();
    let (a, b) = ((1.0 - s) / alpha, (1.0 + s) / alpha);
    if (b - a).abs() < 1e-12 {
        // Erlang(2, a)
        return 1.0 - (1.0 + a * x) * (-a * x).exp();
    }
    1.0 - (b * (-a * x).exp() - a * (-b * x).exp()) / (b - a)
}

fn renewal_check(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let s = &mut ctx.settings;
    let count: usize = s.get("triples", 100)?;
    let (lo, hi) = s.pair("range", "-5,5")?;
    let spacings: usize = s.get("spacings", 100_000)?;
    let level: f64 = s.get("ks-level", 0.01)?;
    let corr_tol: f64 = s.get("corr-tol", 1e-6)?;
    let mut rng = RngStream::new(ctx.seed, TRIPLE_STREAM).rng();
    let triples: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            let mut t = [rng.random_range(lo..hi), rng.random_range(lo..hi), rng.random_range(lo..hi)];
            t.sort_by(f64::total_cmp);
            (t[0], t[1], t[2])
        })
        .collect();
    let iid = check_iid_spacing_conditions(&spec, &triples)?;
    let mut results = json!({
        "family": spec.name(),
        "iid_spacings": iid.passes,
        "product_condition_violation": iid.cond_a_max_violation,
        "difference_condition_violation": iid.cond_b_max_violation,
        "triples": count,
    });
    let mut csv = Csv::new(&["x1", "x2", "x3", "determinant", "renewal", "difference"]);
    let KernelSpec::Macchi { rho, alpha, .. } = spec else {
        for &(a, b, c) in &triples {
            let d = correlation_det(&spec, &[Point::Line(a), Point::Line(b), Point::Line(c)])?;
            csv.push(vec![num(a), num(b), num(c), num(d), String::new(), String::new()]);
        }
        let verdict = if iid.passes { "has" } else { "does not have" };
        return Ok(Outcome::new(format!("{} {verdict} i.i.d. spacings", spec.name()), results, csv));
    };

    // three-point correlations rho f(x2 - x1) f(x3 - x2) rebuilt from u = f + u * f
    let renewal = macchi_interval_density(rho, alpha)?;
    let IntervalLaw::Density(u) = renewal_density_series(&renewal)? else {
        unreachable!("a density law has a density renewal function")
    };
    let mut corr_worst = 0.0f64;
    for &(a, b, c) in &triples {
        let d = correlation_det(&spec, &[Point::Line(a), Point::Line(b), Point::Line(c)])?;
        let r = renewal_correlations(&u, rho, &[a, b, c])?;
        corr_worst = corr_worst.max((d - r).abs());
        csv.push_nums(&[a, b, c, d, r, (d - r).abs()]);
    }

    let sampler = RenewalSampler::new(&renewal)?;
    let per = spacings.div_ceil(SPACING_CHUNKS);
    let mut gaps: Vec<f64> = run_replicas(ctx.seed, SPACING_CHUNKS, ctx.threads, |_, rng| {
        (0..per).map(|_| sampler.spacing(rng)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    gaps.truncate(spacings);
    let ks = ks_one_sample(&gaps, |x| hypoexponential_cdf(rho, alpha, x));
    let critical = ks_critical(gaps.len(), level);
    results["correlation_max_error"] = json!(corr_worst);
    results["spacings"] = json!(gaps.len());
    results["spacing_mean"] = json!(gaps.iter().sum::<f64>() / gaps.len() as f64);
    results["ks"] = json!(ks);
    results["ks_critical"] = json!(critical);
    results["ks_level"] = json!(level);
    let summary = format!(
        "{}: i.i.d. spacings {}, correlation error {}, spacing KS {} (critical {})",
        spec.name(),
        iid.passes,
        num(corr_worst),
        num(ks),
        num(critical)
    );
    Ok(Outcome::new(summary, results, csv)
        .gate(Gate::at_least("iid_spacings", f64::from(u8::from(iid.passes)), 1.0))
        .gate(Gate::at_most("correlation_max_error", corr_worst, corr_tol))
        .gate(Gate::at_most("ks", ks, critical)))
}

/// Power-series coefficients of `num(z) / den(z)` by long division.
fn series_coefficients(numer: &[f64], den: &[f64], count: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    for n in 0..count {
        let mut c = numer.get(n).copied().unwrap_or(0.0);
        for k in 1..den.len().min(n + 1) {
            c -= den[k] * out[n - k];
        }
        out.push(c / den[0]);
    }
    out
}

fn read_table(path: &str) -> CliResult<Tabulated> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let (Some(x), Some(u)) = (cells.first(), cells.get(1)) else {
            return Err(CliError::Config(format!("{path}: expected x,u rows")));
        };
        // a header row is skipped
        match (x.parse::<f64>(), u.parse::<f64>()) {
            (Ok(x), Ok(u)) => {
                xs.push(x);
                us.push(u);
            }
            _ if xs.is_empty() => continue,
            _ => return Err(CliError::Config(format!("{path}: bad row {line:?}"))),
        }
    }
    if xs.len() < 2 || xs[0] != 0.0 {
        return Err(CliError::Config(format!("{path}: need at least two rows starting at x = 0")));
    }
    let step = xs[1] - xs[0];
    if xs.iter().enumerate().any(|(i, x)| (x - step * i as f64).abs() > 1e-9 * step.max(1.0) * (i as f64 + 1.0)) {
        return Err(CliError::Config(format!("{path}: x must be an equally spaced grid")));
    }
    Ok(Tabulated::new(step, us)?)
}

fn renewal_invert(ctx: &mut Ctx) -> CliResult<Outcome> {
    let mode = ctx.settings.str("mode", "continuous");
    match mode.as_str() {
        "continuous" => invert_continuous(ctx),
        "discrete" => invert_discrete(ctx),
        other => Err(CliError::Config(format!("unknown mode {other:?}; use continuous or discrete"))),
    }
}

fn invert_continuous(ctx: &mut Ctx) -> CliResult<Outcome> {
    let s = &mut ctx.settings;
    let tol: f64 = s.get("tol", 1e-5)?;
    let file = s.opt_str("u-file");
    let (u, reference) = match file {
        Some(path) => (read_table(&path)?, None),
        None => {
            let rho: f64 = s.get("rho", 0.4)?;
            let alpha: f64 = s.get("alpha", 1.0)?;
            let step: f64 = s.get("step", 0.005)?;
            let x_max: f64 = s.get("x-max", 30.0)?;
            // checks 2 rho alpha <= 1
            macchi_interval_density(rho, alpha)?;
            let u = Tabulated::from_fn(step, x_max, |x| rho * (1.0 - (-2.0 * x / alpha).exp()))?;
            (u, Some((rho, alpha)))
        }
    };
    let law = solve_convolution(&u, ConvolutionMode::Continuous)?;
    let f = law.density().expect("continuous inversion gives a density");
    let residual = convolution_residual(&u, f);
    let mut csv = Csv::new(&["x", "u", "f", "f_closed_form"]);
    let mut worst = 0.0f64;
    for i in 0..f.len() {
        let x = f.x(i);
        let exact = reference.map(|(rho, alpha)| macchi_pdf(rho, alpha, x));
        if let Some(e) = exact {
            worst = worst.max((f.values[i] - e).abs());
        }
        csv.push(vec![num(x), num(u.values[i]), num(f.values[i]), exact.map(num).unwrap_or_default()]);
    }
    let mut results = json!({
        "mode": "continuous",
        "points": f.len(),
        "step": f.step,
        "mass": f.integral(),
        "residual": residual,
        "interval_law_valid": law.law.validate().is_ok(),
    });
    let mut out;
    if reference.is_some() {
        results["sup_error"] = json!(worst);
        out = Outcome::new(format!("interval density recovered, sup error {}", num(worst)), results, csv);
        out.gates.push(Gate::at_most("sup_error", worst, tol));
    } else {
        out = Outcome::new(format!("interval density recovered, residual {}", num(residual)), results, csv);
    }
    Ok(out)
}

fn invert_discrete(ctx: &mut Ctx) -> CliResult<Outcome> {
    let s = &mut ctx.settings;
    let rho: f64 = s.get("rho", 0.3)?;
    let beta: f64 = s.get("beta", 0.4)?;
    let terms: usize = s.get("terms", 200)?;
    let tol: f64 = s.get("tol", 1e-8)?;
    let grid: usize = s.get("fourier-points", 16)?;
    if !(rho > 0.0 && rho <= 1.0 && beta > 0.0) {
        return Err(CliError::Constraint(format!("need 0 < rho <= 1 and beta > 0, got rho = {rho}, beta = {beta}")));
    }
    let r = (-2.0 * beta).exp();
    let u = Tabulated::new(1.0, (0..terms).map(|n| 1.0 - rho * r.powi(n as i32)).collect())?;
    let law = solve_convolution(&u, ConvolutionMode::Discrete)?.law;
    let IntervalLaw::Lattice(f) = &law else { unreachable!("discrete inversion gives a lattice law") };
    let numer = [1.0 - rho, -(r - rho)];
    let den = [2.0 - rho, -(2.0 * r - rho + 1.0), r];
    let want = series_coefficients(&numer, &den, terms);
    let mut csv = Csv::new(&["n", "u", "f", "f_series"]);
    let mut worst = 0.0f64;
    for (n, (a, b)) in f.iter().zip(&want).enumerate() {
        worst = worst.max((a - b).abs());
        csv.push_nums(&[n as f64, u.values[n], *a, *b]);
    }
    let mut fourier_worst = 0.0f64;
    for j in 0..grid {
        let t = std::f64::consts::TAU * j as f64 / grid as f64;
        let z = Complex64::from_polar(1.0, t);
        let closed = (numer[0] + numer[1] * z) / (den[0] + den[1] * z + den[2] * z * z);
        fourier_worst = fourier_worst.max((lattice_characteristic(f, t) - closed).norm());
    }
    let results = json!({
        "mode": "discrete",
        "rho": rho,
        "beta": beta,
        "terms": terms,
        "series_max_error": worst,
        "fourier_max_error": fourier_worst,
        "mass": f.iter().sum::<f64>(),
        "min_coefficient": f.iter().copied().fold(f64::INFINITY, f64::min),
        "interval_law_valid": law.validate().is_ok(),
    });
    let summary = format!("lattice interval law: series error {}, transform error {}", num(worst), num(fourier_worst));
    Ok(Outcome::new(summary, results, csv)
        .gate(Gate::at_most("series_max_error", worst, tol))
        .gate(Gate::at_most("fourier_max_error", fourier_worst, tol)))
}

pub const RENEWAL_CHECK: CommandDef = CommandDef {
    name: "renewal-check",
    about: "Test whether a kernel gives i.i.d. spacings: K(x1,x2) K(x2,x3) = K(x1,x3) K(x2,x2) and \
            u(x, y) = K(y,y) - |K(x,y)|^2 / K(x,x) depending on y - x only. For the exponential kernel \
            (2 rho alpha <= 1) it also rebuilds rho_3 = rho f(x2-x1) f(x3-x2) from u = f + u * f and compares \
            it with det[K(x_i, x_j)], and tests sampled spacings by KS against Exp(a) + Exp(b), \
            a, b = (1 -+ sqrt(1 - 2 rho alpha)) / alpha.",
    keys: &[
        ("triples", "random ascending triples"),
        ("range", "interval the triples are drawn from"),
        ("spacings", "sampled spacings for the KS test"),
        ("ks-level", "significance level of the KS test"),
        ("corr-tol", "tolerance on the correlation comparison"),
    ],
    kernel: true,
    run: renewal_check,
};

pub const RENEWAL_INVERT: CommandDef = CommandDef {
    name: "renewal-invert",
    about: "Solve u = f + u * f for the interval law f. Continuous mode uses u(x) = rho (1 - exp(-2x/alpha)) \
            (or a tabulated u) and compares with the exponential-kernel interval density; discrete mode uses \
            u(n) = 1 - rho exp(-2 beta n) and compares with the coefficients of \
            ((1-rho) - (r-rho) z) / ((2-rho) - (2r-rho+1) z + r z^2), r = exp(-2 beta), and with that transform on the unit circle.",
    keys: &[
        ("mode", "continuous or discrete"),
        ("rho", "intensity"),
        ("alpha", "continuous: length scale"),
        ("beta", "discrete: decay rate"),
        ("step", "continuous: grid step"),
        ("x-max", "continuous: grid end"),
        ("u-file", "continuous: CSV of x,u rows on an equally spaced grid from 0"),
        ("terms", "discrete: coefficients computed"),
        ("fourier-points", "discrete: points on the unit circle"),
        ("tol", "tolerance against the closed form"),
    ],
    kernel: false,
    run: renewal_invert,
};
