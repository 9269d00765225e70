//! System Hamiltonians: the two-level case studies, the switched
//! `H_h + f(t)·H_m` family, the N-level target Hamiltonians and the
//! dilatability check on diagonal spectra.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::{CMatrix, C64};

const HERMITIAN_TOL: f64 = 1e-10;
const DIAGONAL_TOL: f64 = 1e-10;
const DILATABLE_TOL: f64 = 1e-12;

/// A (possibly) time-dependent system Hamiltonian.
pub trait Hamiltonian: Send + Sync {
    fn dim(&self) -> usize;

    fn at(&self, t: f64) -> CMatrix;

    /// `∫_{t0}^{t1} H(s) ds` when it is known in closed form.
    fn integral(&self, _t0: f64, _t1: f64) -> Option<CMatrix> {
        None
    }
}

impl Hamiltonian for CMatrix {
    fn dim(&self) -> usize {
        CMatrix::dim(self)
    }

    fn at(&self, _t: f64) -> CMatrix {
        self.clone()
    }

    fn integral(&self, t0: f64, t1: f64) -> Option<CMatrix> {
        Some(self.scale_real(t1 - t0))
    }
}

impl<T: Hamiltonian + ?Sized> Hamiltonian for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn at(&self, t: f64) -> CMatrix {
        (**self).at(t)
    }
    fn integral(&self, t0: f64, t1: f64) -> Option<CMatrix> {
        (**self).integral(t0, t1)
    }
}

impl<T: Hamiltonian + ?Sized> Hamiltonian for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn at(&self, t: f64) -> CMatrix {
        (**self).at(t)
    }
    fn integral(&self, t0: f64, t1: f64) -> Option<CMatrix> {
        (**self).integral(t0, t1)
    }
}

/// Adapter for closure-defined Hamiltonians.
pub struct FnHamiltonian<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> CMatrix + Send + Sync> FnHamiltonian<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64) -> CMatrix + Send + Sync> Hamiltonian for FnHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn at(&self, t: f64) -> CMatrix {
        (self.f)(t)
    }
}

/// Switching function `f(t) = −i(γ/2)[tanh(γ(t−t_i)) − tanh(γ(t−t_f))]`.
///
/// The result is `−i·g` with `0 ≤ g ≤ γ`; γ sets both the plateau amplitude
/// and the switching rate.
pub fn switch_f(t: f64, gamma: f64, t_i: f64, t_f: f64) -> C64 {
    let g = 0.5 * gamma * ((gamma * (t - t_i)).tanh() - (gamma * (t - t_f)).tanh());
    C64::new(0.0, -g)
}

/// `∫_{t0}^{t1} f(s) ds` in closed form.
pub fn switch_f_integral(t0: f64, t1: f64, gamma: f64, t_i: f64, t_f: f64) -> C64 {
    let prim = |t: f64| 0.5 * (ln_cosh(gamma * (t - t_i)) - ln_cosh(gamma * (t - t_f)));
    C64::new(0.0, -(prim(t1) - prim(t0)))
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// The two-level case studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Case {
    A,
    B,
    C,
    /// Same matrix as `C`; evolved without trace normalization.
    D,
}

/// Which eigenvector a switched two-level Hamiltonian drives toward:
/// `Minus` → |0⟩, `Plus` → |1⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

/// Two-level case Hamiltonian:
/// A → diag(λ₁+iγ, λ₂−iγ), B → diag(λ₁+iγ, λ₂), C and D → diag(λ₁, λ₂−iγ).
pub fn build_case(case: Case, lambda1: f64, lambda2: f64, gamma: f64) -> CMatrix {
    let (d0, d1) = match case {
        Case::A => (C64::new(lambda1, gamma), C64::new(lambda2, -gamma)),
        Case::B => (C64::new(lambda1, gamma), C64::new(lambda2, 0.0)),
        Case::C | Case::D => (C64::new(lambda1, 0.0), C64::new(lambda2, -gamma)),
    };
    CMatrix::from_diagonal(&[d0, d1])
}

/// `H(t) = H_h + f(t)·H_m` with Hermitian `H_h` and `H_m`.
#[derive(Clone, Debug)]
pub struct SwitchedHamiltonian {
    h_h: CMatrix,
    h_m: CMatrix,
    gamma: f64,
    t_i: f64,
    t_f: f64,
}

impl SwitchedHamiltonian {
    pub fn new(h_h: CMatrix, h_m: CMatrix, gamma: f64, t_i: f64, t_f: f64) -> Result<Self> {
        if h_h.dim() != h_m.dim() {
            return Err(Error::Dimension(format!(
                "H_h is {}-dim but H_m is {}-dim",
                h_h.dim(),
                h_m.dim()
            )));
        }
        if !h_h.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                norm: h_h.hermiticity_defect(),
            });
        }
        if !h_m.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                norm: h_m.hermiticity_defect(),
            });
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gamma must be non-negative, got {gamma}"
            )));
        }
        if !(t_i < t_f) || !t_i.is_finite() || !t_f.is_finite() {
            return Err(Error::InvalidInput(format!(
                "need t_i < t_f, got {t_i} and {t_f}"
            )));
        }
        Ok(Self {
            h_h,
            h_m,
            gamma,
            t_i,
            t_f,
        })
    }

    pub fn h_h(&self) -> &CMatrix {
        &self.h_h
    }

    pub fn h_m(&self) -> &CMatrix {
        &self.h_m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_i, self.t_f)
    }

    pub fn switch(&self, t: f64) -> C64 {
        switch_f(t, self.gamma, self.t_i, self.t_f)
    }

    pub fn evaluate(&self, t: f64) -> CMatrix {
        &self.h_h + &self.h_m.scale(self.switch(t))
    }
}

impl Hamiltonian for SwitchedHamiltonian {
    fn dim(&self) -> usize {
        self.h_h.dim()
    }

    fn at(&self, t: f64) -> CMatrix {
        self.evaluate(t)
    }

    fn integral(&self, t0: f64, t1: f64) -> Option<CMatrix> {
        let f = switch_f_integral(t0, t1, self.gamma, self.t_i, self.t_f);
        Some(&self.h_h.scale_real(t1 - t0) + &self.h_m.scale(f))
    }
}

/// `H_h = σ_z`, `H_m = (𝕀 ± σ_z)/2`.
pub fn build_switched_two_level(
    sign: Sign,
    gamma: f64,
    t_i: f64,
    t_f: f64,
) -> Result<SwitchedHamiltonian> {
    let h_m = match sign {
        Sign::Minus => CMatrix::from_real_diagonal(&[0.0, 1.0]),
        Sign::Plus => CMatrix::from_real_diagonal(&[1.0, 0.0]),
    };
    SwitchedHamiltonian::new(crate::pauli::z(), h_m, gamma, t_i, t_f)
}

/// N-level target Hamiltonian `H_i(t) = 𝕀_N + f(t)(𝕀_N − P_i)` with a
/// 1-based target index `i`. The i-th level stays real; every other level
/// picks up the decaying imaginary part of `f`.
pub fn build_target_hamiltonian(
    n: usize,
    i: usize,
    gamma: f64,
    t_i: f64,
    t_f: f64,
) -> Result<SwitchedHamiltonian> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two levels, got {n}"
        )));
    }
    if i == 0 || i > n {
        return Err(Error::Range { index: i, max: n });
    }
    let mut m = vec![1.0; n];
    m[i - 1] = 0.0;
    SwitchedHamiltonian::new(
        CMatrix::identity(n),
        CMatrix::from_real_diagonal(&m),
        gamma,
        t_i,
        t_f,
    )
}

/// Projector `|e_i⟩⟨e_i|` (1-based index).
pub fn level_projector(n: usize, i: usize) -> CMatrix {
    let e = Vector::basis(n, i - 1);
    CMatrix::outer(&e, &e)
}

/// Half the real-eigenvalue gap of a two-level diagonal Hamiltonian,
/// `ω = (λ₁ − λ₂)/2`; coherences rotate as `e^{−2iωt}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaGap(pub f64);

impl OmegaGap {
    pub fn from_levels(lambda1: f64, lambda2: f64) -> Self {
        Self(0.5 * (lambda1 - lambda2))
    }

    pub fn from_matrix(h: &CMatrix) -> Result<Self> {
        let spec = DiagonalSpec::from_matrix(h)?;
        if spec.eigenvalues.len() != 2 {
            return Err(Error::Dimension(
                "omega gap needs a two-level Hamiltonian".into(),
            ));
        }
        Ok(Self::from_levels(
            spec.eigenvalues[0].re,
            spec.eigenvalues[1].re,
        ))
    }
}

/// Spectrum of a diagonal Hamiltonian, `λ_k + iγ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalSpec {
    pub eigenvalues: Vec<C64>,
}

impl DiagonalSpec {
    pub fn new(eigenvalues: Vec<C64>) -> Result<Self> {
        if eigenvalues.len() < 2 {
            return Err(Error::InvalidInput(
                "a diagonal spec needs at least two levels".into(),
            ));
        }
        if eigenvalues
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        Ok(Self { eigenvalues })
    }

    /// Rejects non-diagonal input: diagonalize first.
    pub fn from_matrix(h: &CMatrix) -> Result<Self> {
        if !h.is_diagonal(DIAGONAL_TOL) {
            return Err(Error::UnsupportedForm(format!(
                "Hamiltonian is not diagonal (largest off-diagonal {:.3e}); diagonalize it first",
                h.off_diagonal_max()
            )));
        }
        Self::new(h.diagonal())
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.eigenvalues)
    }

    pub fn is_dilatable(&self) -> bool {
        self.validate().pass
    }

    pub fn validate(&self) -> ValidityReport {
        let imag_parts: Vec<f64> = self.eigenvalues.iter().map(|z| z.im).collect();
        let offending: Vec<usize> = imag_parts
            .iter()
            .enumerate()
            .filter(|(_, &g)| g > DILATABLE_TOL)
            .map(|(k, _)| k)
            .collect();
        ValidityReport {
            pass: offending.is_empty(),
            imag_parts,
            offending,
        }
    }
}

/// Outcome of the dilatability check: every `γ_k` must be non-positive.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ValidityReport {
    pub imag_parts: Vec<f64>,
    /// Indices (0-based) of eigenvalues with positive imaginary part.
    pub offending: Vec<usize>,
    pub pass: bool,
}

pub fn validate_dilatable(h: &CMatrix) -> Result<ValidityReport> {
    Ok(DiagonalSpec::from_matrix(h)?.validate())
}
