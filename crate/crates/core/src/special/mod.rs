//! Special functions consumed by the kernel catalogue.

pub mod airy;
pub mod bessel;
pub mod gamma;
pub mod orthonormal;

pub use airy::{airy_ai, airy_ai_pair, AIRY_WINDOW};
pub use bessel::{bessel_j, bessel_j_real, bessel_j_sequence, MAX_BESSEL_ORDER};
pub use gamma::{gamma, ln_factorial, ln_gamma};
pub use orthonormal::{eval_orthonormal, eval_orthonormal_all, eval_orthonormal_capped, OrthonormalFamily, DEFAULT_MAX_DEGREE};
