use detfield::linalg::CMatrix;
use detfield::samplers::RngStream;
use detfield::{DiscreteKernel, DomainKind, KernelSpec, Point, Window};

use crate::error::{CliError, CliResult};
use crate::settings::{parse_complex, parse_list, Settings};

/// Stream reserved for drawing random kernels, apart from every replica stream.
pub const KERNEL_STREAM: u64 = u64::MAX;

pub const KERNEL_KEYS: &[(&str, &str)] = &[
    (
        "kernel",
        "family: sine, airy, bessel, hermite, cue, so-even, so-odd, sp, ginibre, ginibre-tau, weak-non-hermitian, \
         laguerre, macchi, discrete-bessel, meixner, bounded-variance, random, random-projector, matrix",
    ),
    ("n", "rank / number of particles"),
    ("m", "second Meixner dimension M (M >= N)"),
    ("alpha", "Bessel/Laguerre order, Macchi length scale, or weak non-Hermiticity strength"),
    ("rho", "Macchi intensity"),
    ("twist", "Macchi phase twist (0 for the plain kernel)"),
    ("q", "Meixner parameter in (0, 1)"),
    ("theta", "discrete Bessel parameter"),
    ("tau", "elliptic Ginibre non-Hermiticity in [0, 1)"),
    ("x-center", "bulk position for the weak non-Hermiticity limit"),
    ("mixed-sign", "allow mixed-sign discrete Bessel pairs (true/false)"),
    ("sites", "ground-set size of random kernels"),
    ("rank", "rank of random projectors"),
    ("kernel-seed", "seed for random kernels (defaults to --seed)"),
    ("matrix", "file with a kernel matrix, one row per line, entries re or re:im"),
];

fn kernel_seed(s: &mut Settings) -> CliResult<u64> {
    let seed: u64 = s.get("seed", 0u64)?;
    s.get("kernel-seed", seed)
}

pub fn kernel_spec(s: &mut Settings) -> CliResult<KernelSpec<f64>> {
    let name = s.require_str("kernel")?;
    let spec = match name.as_str() {
        "sine" => KernelSpec::Sine,
        "airy" => KernelSpec::Airy,
        "bessel" => KernelSpec::Bessel { alpha: s.require("alpha")? },
        "hermite" => KernelSpec::HermiteN { n: s.require("n")? },
        "cue" => KernelSpec::CueN { n: s.require("n")? },
        "so-even" => KernelSpec::SoEven { n: s.require("n")? },
        "so-odd" => KernelSpec::SoOdd { n: s.require("n")? },
        "sp" => KernelSpec::Sp { n: s.require("n")? },
        "ginibre" => KernelSpec::Ginibre,
        "ginibre-tau" => KernelSpec::GinibreTau { tau: s.require("tau")?, n: s.opt("n")? },
        "weak-non-hermitian" => {
            KernelSpec::WeakNonHermitian { alpha: s.require("alpha")?, x_center: s.get("x-center", 0.0)? }
        }
        "laguerre" => KernelSpec::LaguerreN { n: s.require("n")?, alpha: s.get("alpha", 0.0)? },
        "macchi" => KernelSpec::Macchi { rho: s.require("rho")?, alpha: s.require("alpha")?, twist: s.get("twist", 0.0)? },
        "discrete-bessel" => {
            KernelSpec::DiscreteBessel { theta: s.require("theta")?, allow_mixed_sign: s.get("mixed-sign", false)? }
        }
        "meixner" => KernelSpec::MeixnerMN { m: s.require("m")?, n: s.require("n")?, q: s.require("q")? },
        "bounded-variance" => KernelSpec::BoundedVariance,
        "random" => {
            let sites: usize = s.get("sites", 6)?;
            let mut rng = RngStream::new(kernel_seed(s)?, KERNEL_STREAM).rng();
            KernelSpec::ExplicitDiscrete(DiscreteKernel::random(sites, &mut rng))
        }
        "random-projector" => {
            let sites: usize = s.get("sites", 6)?;
            let rank: usize = s.get("rank", 3)?;
            if rank > sites {
                return Err(CliError::Constraint(format!("rank {rank} exceeds {sites} sites")));
            }
            let mut rng = RngStream::new(kernel_seed(s)?, KERNEL_STREAM).rng();
            KernelSpec::ExplicitDiscrete(DiscreteKernel::random_projector(sites, rank, &mut rng))
        }
        "matrix" => KernelSpec::ExplicitDiscrete(read_matrix(&s.require_str("matrix")?)?),
        other => return Err(CliError::Config(format!("unknown kernel family {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn read_matrix(path: &str) -> CliResult<DiscreteKernel<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    let rows: Vec<Vec<num_complex::Complex64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|c| parse_complex(c.trim())).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{path}: matrix is not square")));
    }
    Ok(DiscreteKernel::from_matrix(CMatrix::from_fn(n, n, |i, j| rows[i][j]))?)
}

/// The discrete kernel behind a spec, if it is one.
pub fn explicit(spec: &KernelSpec<f64>) -> Option<&DiscreteKernel<f64>> {
    match spec {
        KernelSpec::ExplicitDiscrete(k) => Some(k),
        _ => None,
    }
}

/// One point per comma-separated entry; planar points as `re:im`.
pub fn parse_points(spec: &KernelSpec<f64>, text: &str) -> CliResult<Vec<Point<f64>>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            match spec.domain() {
                DomainKind::Real2D => parse_complex(t).map(Point::Plane),
                DomainKind::Real1D | DomainKind::Circle => parse_real(t).map(Point::Line),
                _ => parse_real(t).map(Point::Lattice),
            }
            .map_err(CliError::Config)
        })
        .collect()
}

fn parse_real(t: &str) -> Result<f64, String> {
    t.parse().map_err(|_| format!("bad coordinate {t:?}"))
}

/// `a,b` for one interval, `a,b;c,d` for several, `x0,x1,y0,y1` with `rect=`.
pub fn window(s: &mut Settings, default: &str) -> CliResult<Window<f64>> {
    if let Some(r) = s.opt_str("rect") {
        let v = parse_list(&r).map_err(CliError::Config)?;
        return match v[..] {
            [x0, x1, y0, y1] => Ok(Window::Rect { x: (x0, x1), y: (y0, y1) }),
            _ => Err(CliError::Config("`rect` needs x0,x1,y0,y1".into())),
        };
    }
    let text = s.str("window", default);
    let pieces: Vec<(f64, f64)> = text
        .split(';')
        .map(|p| match parse_list(p).map_err(CliError::Config)?[..] {
            [a, b] => Ok((a, b)),
            _ => Err(CliError::Config(format!("window piece {p:?} needs two numbers"))),
        })
        .collect::<CliResult<_>>()?;
    let w = if pieces.len() == 1 { Window::Interval(pieces[0].0, pieces[0].1) } else { Window::Intervals(pieces) };
    w.validate()?;
    Ok(w)
}
