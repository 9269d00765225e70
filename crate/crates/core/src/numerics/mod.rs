//! Dense complex linear algebra kernel.
//!
//! Everything here is generic over the real scalar `R` (anything implementing
//! [`Real`], i.e. `f32` or `f64`). The physics modules work with the `f64`
//! aliases exported from the crate root.

mod eig;
mod expm;
mod lu;
mod matrix;

pub use eig::{herm_eig, psd_sqrt, HermEig};
pub use expm::mat_exp;
pub use lu::{determinant, inverse, solve, Lu};
pub use matrix::{Matrix, Vector};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

/// Real scalar type underlying the complex kernel.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Gate tolerance for Hermiticity, unitarity and similar contract checks.
    fn gate_tol() -> Self;
    /// Internal convergence target of the iterative solvers.
    fn solver_tol() -> Self;
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f64 {
    fn gate_tol() -> Self {
        1e-10
    }
    fn solver_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn gate_tol() -> Self {
        1e-4
    }
    fn solver_tol() -> Self {
        1e-6
    }
}

pub(crate) fn cabs<R: Real>(z: Complex<R>) -> R {
    z.norm()
}

pub(crate) fn to_f64<R: Real>(x: R) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
