//! Spectral models of the dilation and translation operators on L²(ℝ).
//!
//! Functions are represented by coordinates in two orthonormal bases:
//! the translation model (`FCoordVec`, basis `L_i^(n) = T^n L_i^(0)`) and the
//! dilation model (`GCoordVec`, basis `K_{s,j}^(m) = D^m K_{s,j}^(0)`), with
//! `Df(x) = √2 f(2x)` and `Tf(x) = f(x - 1)`. The [`alpha`] module provides the
//! closed-form change of basis between them for the exponential and Haar
//! families, and the [`oracle`] module recomputes any coordinate by direct
//! integration.

// `!(x <= tol)` is used on purpose so that NaN fails a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha;
pub mod bases;
pub mod cli;
pub mod error;
pub mod filters;
pub mod fourier;
pub mod group_action;
pub mod json;
pub mod model;
pub mod oracle;
pub mod wavelet;

pub use bases::{BasisFamily, FunctionSpec};
pub use error::{Error, Result};
pub use model::*;
