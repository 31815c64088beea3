use serde_json::json;

use detfield::asymptotics::{lpp_comparison, plancherel_comparison, plancherel_conditional, BandTable};
use detfield::renewal::macchi_interval_density;
use detfield::samplers::{run_replicas, DiscreteDppSampler, ProjectionSampler, RenewalSampler};
use detfield::KernelSpec;

use super::dpp::finite_kernel;
use super::{band_csv, band_json, CommandDef, Ctx, Gate, Outcome};
use crate::error::{CliError, CliResult};
use crate::kernel::kernel_spec;
use crate::output::{num, Csv};

/// Seed offset keeping a second comparison off the streams of the first.
const SECOND_TABLE: u64 = 0xA5A5_A5A5_A5A5_A5A5;

fn sample(ctx: &mut Ctx) -> CliResult<Outcome> {
    let spec = kernel_spec(&mut ctx.settings)?;
    let replicas: usize = ctx.settings.get("replicas", 1)?;
    let (kind, samples): (&str, Vec<Vec<f64>>) = if let KernelSpec::Macchi { rho, alpha, .. } = spec {
        // the phase twist cancels in every determinant, so the process is the same renewal process
        let horizon: f64 = ctx.settings.get("horizon", 20.0)?;
        let sampler = RenewalSampler::new(&macchi_interval_density(rho, alpha)?)?;
        let paths = run_replicas(ctx.seed, replicas, ctx.threads, |_, rng| sampler.sample(horizon, rng).points);
        ("renewal", paths)
    } else if let Some((kernel, _)) = finite_kernel(ctx, &spec)? {
        let sampler = DiscreteDppSampler::new(&kernel)?;
        let labels = kernel.labels().to_vec();
        let picks = run_replicas(ctx.seed, replicas, ctx.threads, |_, rng| sampler.sample(rng))
            .into_iter()
            .collect::<detfield::Result<Vec<_>>>()?;
        ("spectral", picks.into_iter().map(|idx| idx.into_iter().map(|i| labels[i]).collect()).collect())
    } else {
        let sampler = ProjectionSampler::new(&spec)?;
        let configs = run_replicas(ctx.seed, replicas, ctx.threads, |_, rng| sampler.sample(rng))
            .into_iter()
            .collect::<detfield::Result<Vec<_>>>()?;
        ("projection", configs.into_iter().map(|c| c.points).collect())
    };
    let width = samples.iter().map(Vec::len).max().unwrap_or(0);
    let mut header = vec!["replica".to_string()];
    header.extend((1..=width).map(|i| format!("x{i}")));
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (r, pts) in samples.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(pts.iter().map(|&x| num(x)));
        row.resize(width + 1, String::new());
        csv.push(row);
    }
    let counts: Vec<usize> = samples.iter().map(Vec::len).collect();
    let min = counts.iter().copied().min().unwrap_or(0);
    let max = counts.iter().copied().max().unwrap_or(0);
    let mean = counts.iter().sum::<usize>() as f64 / replicas.max(1) as f64;
    let results = json!({
        "family": spec.name(),
        "sampler": kind,
        "replicas": replicas,
        "count_min": min,
        "count_max": max,
        "count_mean": mean,
        "rank": spec.rank(),
    });
    let summary = format!("{replicas} samples of {} ({kind}), counts {min}..{max}", spec.name());
    let mut out = Outcome::new(summary, results, csv);
    if let Some(n) = spec.rank() {
        // a projection ensemble has exactly n points
        let off = counts.iter().filter(|&&c| c != n).count();
        out.gates.push(Gate::at_most("samples_without_rank_count", off as f64, 0.0));
    }
    Ok(out)
}

fn table_outcome(summary: String, tables: &[(&str, &BandTable)], max_excursions: usize) -> CliResult<Outcome> {
    let mut results = json!({});
    let mut gates = Vec::new();
    for (name, t) in tables {
        let mut j = band_json(t);
        j["rows_detail"] = serde_json::to_value(&t.rows).map_err(|e| CliError::Io(e.to_string()))?;
        results[*name] = j;
        gates.push(Gate::at_most(&format!("{name}_excursions"), t.excursions as f64, max_excursions as f64));
    }
    let mut out = Outcome::new(summary, results, band_csv(tables));
    out.gates = gates;
    Ok(out)
}

fn lpp_compare(ctx: &mut Ctx) -> CliResult<Outcome> {
    let s = &mut ctx.settings;
    let m: usize = s.get("m", 5)?;
    let n: usize = s.get("n", 5)?;
    let q: f64 = s.get("q", 0.5)?;
    let ts: Vec<u64> = s.list_f64("t", "5..25")?.into_iter().map(|t| t as u64).collect();
    let replicas: usize = s.get("replicas", 100_000)?;
    let max_exc: usize = s.get("max-excursions", 0)?;
    let t = lpp_comparison(m, n, q, &ts, replicas, ctx.seed, ctx.threads)?;
    let summary = format!("G({m},{n}) q={q}: {} of {} thresholds outside 3 sigma over {replicas} runs", t.excursions, t.rows.len());
    table_outcome(summary, &[("cdf", &t)], max_exc)
}

fn plancherel_compare(ctx: &mut Ctx) -> CliResult<Outcome> {
    let s = &mut ctx.settings;
    let theta: f64 = s.get("theta", 9.0)?;
    let max_half: usize = s.get("max-half", 10)?;
    let replicas: usize = s.get("replicas", 100_000)?;
    let cond_n: usize = s.get("conditional-n", 3)?;
    let cond_replicas: usize = s.get("conditional-replicas", replicas)?;
    let max_exc: usize = s.get("max-excursions", 0)?;
    let one_point = plancherel_comparison(theta, max_half, replicas, ctx.seed, ctx.threads)?;
    let mut summary = format!("theta={theta}: one-point function {} of {} sites outside 3 sigma", one_point.excursions, one_point.rows.len());
    if cond_n == 0 {
        return table_outcome(summary, &[("one_point", &one_point)], max_exc);
    }
    let cond = plancherel_conditional(cond_n, cond_replicas, ctx.seed ^ SECOND_TABLE, ctx.threads)?;
    summary.push_str(&format!("; n={cond_n} shapes {} of {} outside", cond.excursions, cond.rows.len()));
    table_outcome(summary, &[("one_point", &one_point), ("conditional", &cond)], max_exc)
}

pub const SAMPLE: CommandDef = CommandDef {
    name: "sample",
    about: "Exact samples: projection ensembles by the sequential chain-rule algorithm (a rank-n projection kernel \
            gives exactly n points), finite kernels by eigenvector selection with P(pick v_k) = lambda_k, \
            and the exponential kernel K = rho exp(-|x-y|/alpha) as a renewal process. One CSV row per replica.",
    keys: &[
        ("replicas", "number of samples"),
        ("horizon", "length of the observed interval [0, horizon] for renewal sampling"),
        ("window", "lattice families: sites inside this window"),
    ],
    kernel: true,
    run: sample,
};

pub const LPP_COMPARE: CommandDef = CommandDef {
    name: "lpp-compare",
    about: "Last passage percolation with geometric weights: simulated P(G(M,N) <= t) against \
            det(I - K_Meixner) on {t+N, t+N+1, ...}, each threshold in a 3-sigma binomial band.",
    keys: &[
        ("m", "rows M"),
        ("n", "columns N"),
        ("q", "geometric parameter, P(w = k) = (1-q) q^k"),
        ("t", "thresholds (list or a..b)"),
        ("replicas", "simulated arrays"),
        ("max-excursions", "thresholds allowed outside their band"),
    ],
    kernel: false,
    run: lpp_compare,
};

pub const PLANCHEREL_COMPARE: CommandDef = CommandDef {
    name: "plancherel-compare",
    about: "Poissonized Plancherel diagrams sampled by RSK: the one-point function of the modified Frobenius \
            coordinates {p_i + 1/2} u {-q_i - 1/2} against the discrete Bessel diagonal K(x, x), and diagrams \
            of fixed size n against (dim lambda)^2 / n! from the hook length formula.",
    keys: &[
        ("theta", "Poisson parameter of the diagram size"),
        ("max-half", "sites x = +-1/2, ..., +-(max-half + 1/2)"),
        ("replicas", "sampled diagrams"),
        ("conditional-n", "diagram size of the conditional table (0 skips it)"),
        ("conditional-replicas", "diagrams for the conditional table"),
        ("max-excursions", "rows allowed outside their band, per table"),
    ],
    kernel: false,
    run: plancherel_compare,
};
