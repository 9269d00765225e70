//! Hermitian dilation of diagonal non-Hermitian Hamiltonians.
//!
//! A non-Hermitian system Hamiltonian `H_s(t)` is embedded into a Hermitian
//! system-ancilla Hamiltonian `H_sa(t)`. The full state evolves unitarily and
//! the non-unitary system dynamics are recovered by post-selecting on an
//! ancilla pointer state. The crate provides:
//!
//! - [`numerics`]: dense complex linear algebra, generic over the real scalar.
//! - [`hamiltonians`]: the switched and case-study Hamiltonians and the
//!   dilatability check.
//! - [`evolution`]: normalized and raw non-Hermitian evolution, the nonlinear
//!   von Neumann equation and the Lindblad master equation.
//! - [`dilation`]: metric propagation, block assembly (4-, 8- and 2N²-dim),
//!   full-state evolution and projections.
//! - [`observables`]: Bloch vectors, entropy, Fubini-Study distance, speeds.
//! - [`scenarios`]: config-driven runs, CSV output and the invariant suite.

// `!(x >= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dilation;
pub mod error;
pub mod evolution;
pub mod hamiltonians;
pub mod numerics;
pub mod observables;
pub mod scenarios;

pub use error::{Error, Result};

/// Complex scalar used throughout the physics modules.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix over `f64`.
pub type CMatrix = numerics::Matrix<f64>;
/// Dense complex vector over `f64`.
pub type CVector = numerics::Vector<f64>;

/// Small constructors for the Pauli algebra.
pub mod pauli {
    use super::{CMatrix, C64};

    pub fn identity() -> CMatrix {
        CMatrix::identity(2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .expect("2x2")
    }

    pub fn y() -> CMatrix {
        CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ])
        .expect("2x2")
    }

    pub fn z() -> CMatrix {
        CMatrix::from_real_diagonal(&[1.0, -1.0])
    }
}
