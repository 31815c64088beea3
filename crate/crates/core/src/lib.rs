//! Numerics for determinantal point processes: a kernel catalog, Fredholm
//! determinants of counting statistics, exact samplers, renewal-process
//! equivalence and limit-theorem harnesses.
//!
//! The deterministic core (special functions, quadrature, kernels, operators)
//! is generic over [`scalar::Real`]; the `*64` and `*32` aliases below fix the
//! scalar. Samplers and statistics run in `f64`.

pub mod error;
pub mod linalg;
pub mod point;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod kernels;
pub mod operator;
pub mod renewal;
pub mod samplers;
pub mod asymptotics;

pub use error::{Error, Result};
pub use kernels::{correlation_det, eval_kernel, DiscreteKernel, DomainKind, KernelSpec};
pub use operator::{discretize, fredholm_genfun, gap_probability, validity_check, DiscretizedOperator};
pub use point::Point;
pub use quadrature::{QuadratureScheme, Window};
pub use samplers::{PointConfiguration, RngStream};
pub use scalar::Real;

pub type KernelSpec64 = KernelSpec<f64>;
pub type KernelSpec32 = KernelSpec<f32>;
pub type DiscreteKernel64 = DiscreteKernel<f64>;
pub type DiscreteKernel32 = DiscreteKernel<f32>;
pub type Operator64 = DiscretizedOperator<f64>;
pub type Operator32 = DiscretizedOperator<f32>;
pub type Window64 = Window<f64>;
pub type Window32 = Window<f32>;
pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type Matrix64 = linalg::CMatrix<f64>;
pub type Matrix32 = linalg::CMatrix<f32>;
