use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use detfield::asymptotics::{cumulant_comparison, discrete_sampler_comparison, hermite_sine_scaling_error};
use detfield::operator::{
    brute_force_oracle, cluster_function, cluster_function_matrix, janossy_at_nodes, janossy_density, mobius_invert,
    refine, ClusterTable, Convergence, MobiusDirection, Rung, REFINE_CAP, REFINE_TOL,
};
use detfield::quadrature::integrate;
use detfield::{
    correlation_det, discretize, eval_kernel, fredholm_genfun, gap_probability, validity_check, DiscreteKernel,
    DiscretizedOperator, DomainKind, KernelSpec, Point, RngStream, Window,
};

use super::{CommandDef, Ctx, Gate, Outcome};
use crate::error::{CliError, CliResult};
use crate::kernel::{explicit, kernel_spec, parse_points, window, KERNEL_STREAM};
use crate::output::{num, Csv};

/// Largest lattice ground set built from a window.
const MAX_LATTICE_SITES: usize = 20_000;

pub fn point_label(p: &Point<f64>) -> String {
    match p {
        Point::Plane(z) => format!("{}:{}", num(z.re), num(z.im)),
        _ => num(p.coord()),
    }
}

/// Sites of a lattice family inside the window, with the piece each belongs to.
fn lattice_sites(domain: DomainKind, w: &Window<f64>) -> CliResult<(Vec<f64>, Vec<usize>)> {
    let pieces = match w {
        Window::Interval(a, b) => vec![(*a, *b)],
        Window::Intervals(v) => v.clone(),
        Window::Rect { .. } => return Err(CliError::Config("lattice families take interval windows".into())),
    };
    let (offset, floor) = match domain {
        DomainKind::HalfIntegerLattice => (0.5, f64::NEG_INFINITY),
        DomainKind::NonNegativeIntegers => (0.0, 0.0),
        _ => (0.0, f64::NEG_INFINITY),
    };
    let mut sites = Vec::new();
    let mut blocks = Vec::new();
    for (j, (a, b)) in pieces.into_iter().enumerate() {
        let mut k = (a.max(floor) - offset).ceil();
        while k + offset <= b {
            sites.push(k + offset);
            blocks.push(j);
            if sites.len() > MAX_LATTICE_SITES {
                return Err(CliError::Constraint(format!("window holds more than {MAX_LATTICE_SITES} lattice sites")));
            }
            k += 1.0;
        }
    }
    Ok((sites, blocks))
}

/// A finite kernel: an explicit matrix, or a lattice family restricted to
/// the sites inside the window. The second value names the window piece of
/// every site.
pub fn finite_kernel(ctx: &mut Ctx, spec: &KernelSpec<f64>) -> CliResult<Option<(DiscreteKernel<f64>, Vec<usize>)>> {
    if let Some(k) = explicit(spec) {
        let blocks = match ctx.settings.opt_str("blocks") {
            Some(b) => crate::settings::parse_list(&b)
                .map_err(CliError::Config)?
                .into_iter()
                .map(|v| v as usize)
                .collect(),
            None => vec![0; k.len()],
        };
        return Ok(Some((k.clone(), blocks)));
    }
    match spec.domain() {
        d @ (DomainKind::HalfIntegerLattice | DomainKind::NonNegativeIntegers | DomainKind::Integers) => {
            let w = window(&mut ctx.settings, "0,10")?;
            let (sites, blocks) = lattice_sites(d, &w)?;
            Ok(Some((detfield::kernels::build_discrete_kernel(spec, &sites)?, blocks)))
        }
        _ => Ok(None),
    }
}

fn exact_operator(ctx: &mut Ctx, spec: &KernelSpec<f64>) -> CliResult<Option<DiscretizedOperator<f64>>> {
    match finite_kernel(ctx, spec)? {
        Some((k, blocks)) => Ok(Some(DiscretizedOperator::from_discrete_blocks(&k, blocks)?)),
        None => Ok(None),
    }
}

struct Ladder {
    start: usize,
    tol: f64,
    cap: usize,
}

fn ladder(ctx: &mut Ctx, default_start: usize) -> CliResult<Ladder> {
    let s = &mut ctx.settings;
    Ok(Ladder { start: s.get("order", default_start)?, tol: s.get("tol", REFINE_TOL)?, cap: s.get("cap", REFINE_CAP)? })
}

fn ladder_json(c: &Convergence<f64>) -> Value {
    json!(c.ladder.iter().map(|r| json!({"order": r.order, "value": r.value})).collect::<Vec<_>>())
}

fn ladder_outcome(name: &str, c: Convergence<f64>, exact: bool, extra: Value) -> Outcome {
    let mut csv = Csv::new(&["order", "value"]);
    for r in &c.ladder {
        csv.push_nums(&[r.order as f64, r.value]);
    }
    let results = json!({
        "value": c.value,
        "order": c.order,
        "converged": c.converged,
        "exact": exact,
        "ladder": ladder_json(&c),
        "details": extra,
    });
    let summary = if c.converged {
        format!("{name} = {} (order {})", num(c.value), c.order)
    } else {
        format!("{name} = {} did not converge by order {}", num(c.value), c.order)
    };
    let mut out = Outcome::new(summary, results, csv);
    if !c.converged {
        out.non_converged = Some(format!("{name}: successive orders still differ at order {}", c.order));
    }
    out
}

/// Runs `f` on the exact operator of a discrete kernel, or on a doubling
/// ladder of Nyström discretisations otherwise.
fn evaluate(
    ctx: &mut Ctx,
    spec: &KernelSpec<f64>,
    default_window: &str,
    f: impl Fn(&DiscretizedOperator<f64>) -> detfield::Result<f64>,
) -> CliResult<(Convergence<f64>, bool)> {
    if let Some(op) = exact_operator(ctx, spec)? {
        let v = f(&op)?;
        return Ok((Convergence { value: v, order: op.len(), ladder: vec![Rung { order: op.len(), value: v }], converged: true }, true));
    }
    let w = window(&mut ctx.settings, default_window)?;
    let l = ladder(ctx, 16)?;
    Ok((refine(spec, &w, l.start, l.tol, l.cap, f)?, false))
}

fn kernel_eval(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let check = ctx.settings.str("check", "none");
    match check.as_str() {
        "none" => {}
        "reproducing" => return reproducing(ctx, &spec),
        "sine-limit" => return sine_limit(ctx, &spec),
        other => return Err(CliError::Config(format!("unknown check {other:?}; use none, reproducing or sine-limit"))),
    }
    let xs_text = ctx.settings.str("x", "0");
    let xs = parse_points(&spec, &xs_text)?;
    let ys = match ctx.settings.opt_str("y") {
        Some(t) => parse_points(&spec, &t)?,
        None => xs.clone(),
    };
    let mut csv = Csv::new(&["x", "y", "re", "im"]);
    let mut values = Vec::new();
    for x in &xs {
        for y in &ys {
            let k = eval_kernel(&spec, x, y)?;
            csv.push(vec![point_label(x), point_label(y), num(k.re), num(k.im)]);
            values.push(json!({"x": point_label(x), "y": point_label(y), "re": k.re, "im": k.im}));
        }
    }
    let summary = format!("evaluated {} on {} pairs", spec.name(), values.len());
    Ok(Outcome::new(summary, json!({"family": spec.name(), "values": values}), csv))
}

/// `int K(x, y) K(y, z) dy = K(x, z)` at random pairs and `int K(y, y) dy = n`.
fn reproducing(ctx: &mut Ctx, spec: &KernelSpec<f64>) -> CliResult<Outcome> {
    let pairs: usize = ctx.settings.get("pairs", 20)?;
    let tol: f64 = ctx.settings.get("tol", 1e-8)?;
    let n = spec.rank().unwrap_or(0);
    // integration range, sampling range, panels
    let (lo, hi, bulk, panels) = match spec {
        KernelSpec::HermiteN { n } => {
            let edge = (2.0 * *n as f64 + 1.0).sqrt();
            let r = edge + 10.0;
            (-r, r, (-edge, edge), (2.0 * r).ceil() as usize)
        }
        KernelSpec::CueN { .. } | KernelSpec::SoEven { .. } | KernelSpec::SoOdd { .. } | KernelSpec::Sp { .. } => {
            let len = spec.circle_length().expect("circle family");
            (0.0, len, (0.0, len), (n / 2).max(4))
        }
        _ => return Err(CliError::Config("the reproducing check supports hermite, cue, so-even, so-odd and sp".into())),
    };
    let k = |x: f64, y: f64| eval_kernel(spec, &Point::Line(x), &Point::Line(y));
    let mut rng = RngStream::new(ctx.seed, 0).rng();
    let mut csv = Csv::new(&["x", "z", "convolution_re", "convolution_im", "kernel_re", "kernel_im", "error"]);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let x = rng.random_range(bulk.0..bulk.1);
        let z = rng.random_range(bulk.0..bulk.1);
        let prod = |y: f64| -> Complex64 { k(x, y).and_then(|a| k(y, z).map(|b| a * b)).unwrap_or(Complex64::new(f64::NAN, 0.0)) };
        let re = integrate(|y| prod(y).re, lo, hi, 32, panels);
        let im = integrate(|y| prod(y).im, lo, hi, 32, panels);
        let want = k(x, z)?;
        let err = (Complex64::new(re, im) - want).norm();
        worst = worst.max(err);
        csv.push_nums(&[x, z, re, im, want.re, want.im, err]);
    }
    let trace = integrate(|y| k(y, y).map(|v| v.re).unwrap_or(f64::NAN), lo, hi, 32, panels);
    let trace_err = (trace - n as f64).abs();
    let results = json!({
        "family": spec.name(),
        "pairs": pairs,
        "max_error": worst,
        "trace": trace,
        "trace_error": trace_err,
        "range": [lo, hi],
    });
    let summary = format!("{}: reproducing error {}, trace {}", spec.name(), num(worst), num(trace));
    Ok(Outcome::new(summary, results, csv)
        .gate(Gate::at_most("reproducing_error", worst, tol))
        .gate(Gate::at_most("trace_error", trace_err, tol)))
}

/// `sup |c K_n(c x, c y) - sin(pi (x - y)) / (pi (x - y))|` with `c = pi / sqrt(2n)`.
fn sine_limit(ctx: &mut Ctx, spec: &KernelSpec<f64>) -> CliResult<Outcome> {
    let KernelSpec::HermiteN { n } = *spec else {
        return Err(CliError::Config("the sine-limit check needs kernel=hermite".into()));
    };
    let half: f64 = ctx.settings.get("half-width", 1.0)?;
    let grid: usize = ctx.settings.get("grid", 41)?;
    let tol: f64 = ctx.settings.get("tol", 0.01)?;
    let err = hermite_sine_scaling_error(n, half, grid)?;
    let mut csv = Csv::new(&["n", "half_width", "grid", "sup_error"]);
    csv.push_nums(&[n as f64, half, grid as f64, err]);
    let results = json!({"n": n, "half_width": half, "grid": grid, "sup_error": err});
    Ok(Outcome::new(format!("hermite n={n}: sup error to sine kernel {}", num(err)), results, csv)
        .gate(Gate::at_most("sup_error", err, tol)))
}

fn correlation(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let text = ctx.settings.require_str("points")?;
    let pts = parse_points(&spec, &text)?;
    let det = correlation_det(&spec, &pts)?;
    let mut results = json!({"family": spec.name(), "points": pts.iter().map(point_label).collect::<Vec<_>>(), "correlation": det});
    let mut csv = Csv::new(&["points", "correlation", "cluster_cyclic", "cluster_partition"]);
    let mut row = vec![pts.len().to_string(), num(det)];
    if !pts.is_empty() && pts.len() <= detfield::operator::MAX_CLUSTER_ORDER {
        let cyclic = cluster_function(&spec, &pts)?;
        let table = ClusterTable::correlations(&spec, &pts)?;
        let partition = mobius_invert(&table, MobiusDirection::CorrelationToCluster)?.full()?;
        results["cluster_cyclic"] = json!(cyclic);
        results["cluster_partition"] = json!(partition);
        results["cluster_difference"] = json!((cyclic - partition).abs());
        row.extend([num(cyclic), num(partition)]);
    } else {
        row.extend([String::new(), String::new()]);
    }
    csv.push(row);
    Ok(Outcome::new(format!("{}-point correlation of {} = {}", pts.len(), spec.name(), num(det)), results, csv))
}

fn validity(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let op = match exact_operator(ctx, &spec)? {
        Some(op) => op,
        None => {
            let w = window(&mut ctx.settings, "0,1")?;
            let order = ctx.settings.get("order", 32)?;
            discretize(&spec, &w, order)?
        }
    };
    let r = validity_check(&op)?;
    let mut csv = Csv::new(&["index", "eigenvalue"]);
    if spec.is_hermitian() {
        for (i, e) in op.eigenvalues().iter().enumerate() {
            csv.push_nums(&[i as f64, *e]);
        }
    }
    let results = json!({
        "family": spec.name(),
        "nodes": op.len(),
        "min_eigenvalue": r.min_eig,
        "max_eigenvalue": r.max_eig,
        "valid": r.is_valid,
        "valid_without_slack": r.is_valid_raw,
    });
    let verdict = if r.is_valid { "valid" } else { "not valid" };
    Ok(Outcome::new(format!("{}: spectrum in [{}, {}], {verdict}", spec.name(), num(r.min_eig), num(r.max_eig)), results, csv))
}

fn gap(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let (c, exact) = evaluate(ctx, &spec, "0,1", |op| Ok(gap_probability(op)))?;
    Ok(ladder_outcome("gap probability", c, exact, json!({"family": spec.name()})))
}

fn genfun(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let z = ctx.settings.complex_list("z", "0")?;
    let mut csv = Csv::new(&["order", "re", "im"]);
    let mut rungs = Vec::new();
    let (value, converged, order, exact) = match exact_operator(ctx, &spec)? {
        Some(op) => {
            let v = fredholm_genfun(&op, &z)?;
            rungs.push((op.len(), v));
            (v, true, op.len(), true)
        }
        None => {
            let w = window(&mut ctx.settings, "0,1")?;
            let l = ladder(ctx, 16)?;
            let mut order = l.start.max(2);
            let mut last: Option<Complex64> = None;
            loop {
                let v = fredholm_genfun(&discretize(&spec, &w, order)?, &z)?;
                rungs.push((order, v));
                if last.is_some_and(|p| (v - p).norm() < l.tol) {
                    break (v, true, order, false);
                }
                last = Some(v);
                if order * 2 > l.cap {
                    break (v, false, order, false);
                }
                order *= 2;
            }
        }
    };
    for (o, v) in &rungs {
        csv.push_nums(&[*o as f64, v.re, v.im]);
    }
    let results = json!({
        "family": spec.name(),
        "z": z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "re": value.re,
        "im": value.im,
        "order": order,
        "converged": converged,
        "exact": exact,
        "ladder": rungs.iter().map(|(o, v)| json!({"order": o, "re": v.re, "im": v.im})).collect::<Vec<_>>(),
    });
    let mut out = Outcome::new(format!("generating function = {} {:+}i (order {order})", num(value.re), num(value.im)), results, csv);
    if !converged {
        out.non_converged = Some(format!("generating function: successive orders still differ at order {order}"));
    }
    Ok(out)
}

fn janossy(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let text = ctx.settings.str("points", "");
    let pts = parse_points(&spec, &text)?;
    let mut extra = json!({"family": spec.name(), "points": pts.iter().map(point_label).collect::<Vec<_>>()});
    if let Some(op) = exact_operator(ctx, &spec)? {
        if op.len() <= detfield::operator::MAX_ORACLE_SITES {
            let n = op.len();
            let total: f64 = (0..1usize << n)
                .map(|mask| janossy_at_nodes(&op, &(0..n).filter(|b| mask >> b & 1 == 1).collect::<Vec<_>>()))
                .sum::<detfield::Result<f64>>()?;
            extra["total_over_subsets"] = json!(total);
        }
        let v = janossy_density(&op, &pts)?;
        let c = Convergence { value: v, order: op.len(), ladder: vec![Rung { order: op.len(), value: v }], converged: true };
        return Ok(ladder_outcome("Janossy density", c, true, extra));
    }
    let (c, exact) = evaluate(ctx, &spec, "0,1", |op| janossy_density(op, &pts))?;
    Ok(ladder_outcome("Janossy density", c, exact, extra))
}

fn sub_masks(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1usize << n).map(move |mask| (0..n).filter(|b| mask >> b & 1 == 1).collect())
}

/// Exhaustive checks on random finite kernels: generating function and
/// Janossy densities against subset enumeration, cyclic cluster functions
/// against partition inversion; optionally the sampler and the cumulants.
fn oracle(ctx: &mut Ctx) -> CliResult<Outcome> {
    let s = &mut ctx.settings;
    let kernels: usize = s.get("kernels", 20)?;
    let sites: usize = s.get("sites", 6)?;
    let janossy_sites: usize = s.get("janossy-sites", 4)?;
    let z = s.complex_list("z", "-1,0,0.35:0.6,1,2.5:-0.4")?;
    let tol: f64 = s.get("tol", 1e-10)?;
    let cluster_max: usize = s.get("cluster-max", 4)?;
    let cluster_tol: f64 = s.get("cluster-tol", 1e-12)?;
    let cluster_scale: f64 = s.get("cluster-scale", 1.7)?;
    let draws: usize = s.get("draws", 0)?;
    let max_excursions: usize = s.get("max-excursions", 2)?;
    let cumulant_draws: usize = s.get("cumulant-draws", 0)?;
    let batches: usize = s.get("batches", 100)?;
    let cumulant_order: usize = s.get("cumulant-order", 4)?;
    let kernel_seed: u64 = s.get("kernel-seed", ctx.seed)?;
    if sites > detfield::operator::MAX_ORACLE_SITES || janossy_sites > detfield::operator::MAX_ORACLE_SITES {
        return Err(CliError::Constraint(format!("the oracle enumerates at most {} sites", detfield::operator::MAX_ORACLE_SITES)));
    }
    if !(1..=detfield::operator::MAX_CLUSTER_ORDER).contains(&cluster_max) {
        return Err(CliError::Constraint(format!("cluster-max must lie in 1..={}", detfield::operator::MAX_CLUSTER_ORDER)));
    }
    let mut rng = RngStream::new(kernel_seed, KERNEL_STREAM).rng();
    let mut csv = Csv::new(&["check", "kernel", "max_error"]);

    // two windows: the first half of the sites and the rest
    let blocks: Vec<usize> = (0..sites).map(|i| usize::from(2 * i >= sites)).collect();
    let mut genfun_worst = 0.0f64;
    for k in 0..kernels {
        let kernel = DiscreteKernel::random(sites, &mut rng);
        let op = DiscretizedOperator::from_discrete_blocks(&kernel, blocks.clone())?;
        let table = brute_force_oracle(&kernel)?.block_counts(&blocks);
        let mut worst = 0.0f64;
        for &z1 in &z {
            for &z2 in &z {
                let got = fredholm_genfun(&op, &[z1, z2])?;
                let want: Complex64 = table.iter().map(|(c, p)| z1.powu(c[0] as u32) * z2.powu(c[1] as u32) * p).sum();
                worst = worst.max((got - want).norm());
            }
        }
        csv.push(vec!["genfun".into(), k.to_string(), num(worst)]);
        genfun_worst = genfun_worst.max(worst);
    }

    let (mut janossy_worst, mut norm_worst) = (0.0f64, 0.0f64);
    for k in 0..kernels {
        let kernel = DiscreteKernel::random(janossy_sites, &mut rng);
        let op = DiscretizedOperator::from_discrete(&kernel);
        let oracle = brute_force_oracle(&kernel)?;
        let mut worst = 0.0f64;
        let mut total = 0.0;
        for (mask, idx) in sub_masks(janossy_sites).enumerate() {
            let pts: Vec<Point<f64>> = idx.iter().map(|&i| Point::Lattice(kernel.labels()[i])).collect();
            let j = janossy_density(&op, &pts)?;
            worst = worst.max((j - oracle.probabilities[mask]).abs());
            total += j;
        }
        csv.push(vec!["janossy".into(), k.to_string(), num(worst)]);
        csv.push(vec!["normalization".into(), k.to_string(), num((total - 1.0).abs())]);
        janossy_worst = janossy_worst.max(worst);
        norm_worst = norm_worst.max((total - 1.0).abs());
    }

    let (mut cyclic_worst, mut round_trip_worst) = (0.0f64, 0.0f64);
    for l in 1..=cluster_max {
        for k in 0..kernels {
            // any Hermitian Gram matrix will do, contraction or not
            let kernel = DiscreteKernel::random(l, &mut rng);
            let mut g = kernel.matrix().clone();
            for i in 0..l {
                for j in 0..l {
                    g[(i, j)] *= cluster_scale;
                }
            }
            let rho = ClusterTable::correlations_of_gram(&g)?;
            let r = mobius_invert(&rho, MobiusDirection::CorrelationToCluster)?;
            let cyclic_err = (r.full()? - cluster_function_matrix(&g)?).abs();
            let back = mobius_invert(&r, MobiusDirection::ClusterToCorrelation)?;
            let mut rt = 0.0f64;
            for mask in 1..(1usize << l) {
                rt = rt.max((back.get(mask)? - rho.get(mask)?).abs());
            }
            csv.push(vec![format!("cluster_cyclic_{l}"), k.to_string(), num(cyclic_err)]);
            csv.push(vec![format!("cluster_round_trip_{l}"), k.to_string(), num(rt)]);
            cyclic_worst = cyclic_worst.max(cyclic_err);
            round_trip_worst = round_trip_worst.max(rt);
        }
    }

    let mut results = json!({
        "kernels": kernels,
        "sites": sites,
        "janossy_sites": janossy_sites,
        "genfun_max_error": genfun_worst,
        "janossy_max_error": janossy_worst,
        "normalization_max_error": norm_worst,
        "cluster_cyclic_max_error": cyclic_worst,
        "cluster_round_trip_max_error": round_trip_worst,
    });
    let mut gates = vec![
        Gate::at_most("genfun_max_error", genfun_worst, tol),
        Gate::at_most("janossy_max_error", janossy_worst, tol),
        Gate::at_most("normalization_max_error", norm_worst, tol),
        Gate::at_most("cluster_cyclic_max_error", cyclic_worst, cluster_tol),
        Gate::at_most("cluster_round_trip_max_error", round_trip_worst, cluster_tol),
    ];
    let mut summary = format!(
        "genfun {}, janossy {}, cluster {} over {kernels} random kernels",
        num(genfun_worst),
        num(janossy_worst),
        num(cyclic_worst.max(round_trip_worst))
    );

    if draws > 0 {
        let kernel = DiscreteKernel::random(sites, &mut rng);
        let t = discrete_sampler_comparison(&kernel, draws, ctx.seed, ctx.threads)?;
        results["sampler"] = super::band_json(&t);
        results["sampler_table"] = serde_json::to_value(&t.rows).map_err(|e| CliError::Io(e.to_string()))?;
        gates.push(Gate::at_most("sampler_excursions", t.excursions as f64, max_excursions as f64));
        summary.push_str(&format!("; sampler {} excursions in {} configurations", t.excursions, t.rows.len()));
    }
    if cumulant_draws > 0 {
        let kernel = DiscreteKernel::random(sites, &mut rng);
        // a stream family apart from the sampler comparison
        let t = cumulant_comparison(&kernel, cumulant_order, cumulant_draws, batches, ctx.seed ^ 0x5555_5555_5555_5555, ctx.threads)?;
        results["cumulants"] = super::band_json(&t);
        results["cumulant_table"] = serde_json::to_value(&t.rows).map_err(|e| CliError::Io(e.to_string()))?;
        gates.push(Gate::at_most("cumulant_excursions", t.excursions as f64, 0.0));
        summary.push_str(&format!("; cumulants {} excursions", t.excursions));
    }
    let mut out = Outcome::new(summary, results, csv);
    out.gates = gates;
    Ok(out)
}

const WINDOW_KEYS: [(&str, &str); 2] = [
    ("window", "interval a,b or union a,b;c,d (lattice families: sites inside it)"),
    ("rect", "planar window x0,x1,y0,y1"),
];

pub const KERNEL_EVAL: CommandDef = CommandDef {
    name: "kernel-eval",
    about: "Evaluate K(x, y) for a catalog kernel. check=reproducing tests int K(x,y) K(y,z) dy = K(x,z) and \
            int K(y,y) dy = n; check=sine-limit measures sup |c K_n(cx, cy) - sin(pi(x-y))/(pi(x-y))|, c = pi/sqrt(2n).",
    keys: &[
        ("x", "first arguments, comma separated (re:im in the plane)"),
        ("y", "second arguments (default: same as x)"),
        ("check", "none, reproducing or sine-limit"),
        ("pairs", "random (x, z) pairs for the reproducing check"),
        ("tol", "tolerance of the check"),
        ("half-width", "sine-limit grid half-width"),
        ("grid", "sine-limit grid points per axis"),
    ],
    kernel: true,
    run: kernel_eval,
};

pub const CORRELATION: CommandDef = CommandDef {
    name: "correlation",
    about: "n-point correlation rho_n = det[K(x_i, x_j)], with the cluster function \
            r_n = (-1)^(n-1) sum over cyclic orders of K(x1,x_s2)...K(x_sn,x1) checked against Moebius inversion over set partitions.",
    keys: &[("points", "comma-separated points (re:im in the plane)")],
    kernel: true,
    run: correlation,
};

pub const VALIDITY: CommandDef = CommandDef {
    name: "validity",
    about: "Check 0 <= K_B <= 1 on the Nystrom matrix of the kernel restricted to a window.",
    keys: &[
        WINDOW_KEYS[0],
        WINDOW_KEYS[1],
        ("order", "Gauss-Legendre nodes per axis"),
        ("blocks", "block label per site of an explicit matrix"),
    ],
    kernel: true,
    run: validity,
};

pub const GAP: CommandDef = CommandDef {
    name: "gap",
    about: "Gap probability P(no point in B) = det(I - K_B), refined by doubling the quadrature order \
            until successive values agree; exit 4 if the ladder reaches its cap first.",
    keys: &[
        WINDOW_KEYS[0],
        WINDOW_KEYS[1],
        ("order", "starting quadrature order"),
        ("tol", "agreement of successive rungs"),
        ("cap", "largest order tried"),
        ("blocks", "block label per site of an explicit matrix"),
    ],
    kernel: true,
    run: gap,
};

pub const GENFUN: CommandDef = CommandDef {
    name: "genfun",
    about: "Generating function E prod_j z_j^#(B_j) = det(I - sum_j (1 - z_j) K 1_{B_j}) over disjoint windows B_j.",
    keys: &[
        ("z", "one complex value per window piece (re or re:im)"),
        WINDOW_KEYS[0],
        WINDOW_KEYS[1],
        ("order", "starting quadrature order"),
        ("tol", "agreement of successive rungs"),
        ("cap", "largest order tried"),
        ("blocks", "block label per site of an explicit matrix"),
    ],
    kernel: true,
    run: genfun,
};

pub const JANOSSY: CommandDef = CommandDef {
    name: "janossy",
    about: "Janossy density det(I - K_B) det[L(x_i, x_j)] with L = K (I - K)^-1 on the window; \
            for finite kernels also the sum over all subsets, which is 1.",
    keys: &[
        ("points", "comma-separated points inside the window"),
        WINDOW_KEYS[0],
        WINDOW_KEYS[1],
        ("order", "starting quadrature order"),
        ("tol", "agreement of successive rungs"),
        ("cap", "largest order tried"),
    ],
    kernel: true,
    run: janossy,
};

pub const ORACLE: CommandDef = CommandDef {
    name: "oracle",
    about: "Exact checks on random finite kernels: the two-window generating function and the Janossy densities \
            against P(exactly S) = sum_{T >= S} (-1)^|T\\S| det K_T; the cyclic cluster expansion against Moebius \
            inversion and its round trip; optionally sampler frequencies in binomial bands and count cumulants \
            C_k from cluster integrals against Monte Carlo.",
    keys: &[
        ("kernels", "random kernels per check"),
        ("sites", "sites of the generating-function and sampler kernels"),
        ("janossy-sites", "sites of the Janossy kernels"),
        ("z", "complex grid used on both windows"),
        ("tol", "tolerance of the exact checks"),
        ("cluster-max", "largest cluster order"),
        ("cluster-tol", "tolerance of the cluster checks"),
        ("cluster-scale", "factor applied to the Gram matrices of the cluster checks"),
        ("draws", "sampler draws (0 skips the check)"),
        ("max-excursions", "sampler rows allowed outside their 3-sigma band"),
        ("cumulant-draws", "draws for the cumulant check (0 skips it)"),
        ("batches", "batches used for the cumulant standard errors"),
        ("cumulant-order", "highest cumulant compared"),
        ("kernel-seed", "seed for the random kernels (defaults to --seed)"),
    ],
    kernel: false,
    run: oracle,
};
