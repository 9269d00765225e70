use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolution::StepControl;
use crate::hamiltonians::Hamiltonian;
use crate::numerics::{herm_eig, mat_exp, HermEig};
use crate::{CMatrix, C64};

/// Default initial metric scale, `M(0) = m₀𝕀`.
pub const DEFAULT_M0: f64 = 1.0005;
/// Smallest accepted `m₀`; at `m₀ = 1` the dump state vanishes and `η⁻¹` is undefined.
pub const MIN_M0: f64 = 1.0 + 1e-6;

const CONSTRAINT_TOL: f64 = 1e-8;
const ETA_GAP_MIN: f64 = 1e-14;
const DIAGONAL_TOL: f64 = 1e-10;

/// The unitary factor in `η = U·(M − 𝕀)^{1/2}`. Only the identity is
/// supported, which makes `η` Hermitian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnitaryChoice {
    #[default]
    Identity,
}

/// `M(t)` and `η(t)` of one dilated subspace.
#[derive(Clone, Debug)]
pub struct MetricFrame {
    pub t: f64,
    pub m: CMatrix,
    pub eta: CMatrix,
    pub min_eig: f64,
    eig: HermEig<f64>,
}

impl MetricFrame {
    /// Fails with a constraint violation when `M` has an eigenvalue below 1.
    pub fn from_metric(t: f64, m: CMatrix, choice: UnitaryChoice) -> Result<Self> {
        let UnitaryChoice::Identity = choice;
        let eig = herm_eig(&m.hermitize())?;
        let min_eig = eig.values[0];
        if !(min_eig >= 1.0 - CONSTRAINT_TOL) {
            return Err(Error::ConstraintViolation {
                t,
                eigenvalue: min_eig,
            });
        }
        let eta = eig.map_values(|x| (x - 1.0).max(0.0).sqrt());
        Ok(Self {
            t,
            m,
            eta,
            min_eig,
            eig,
        })
    }

    /// Smallest eigenvalue of `M − 𝕀`.
    pub fn eta_gap(&self) -> f64 {
        self.min_eig - 1.0
    }

    pub fn eta_inverse(&self) -> Result<CMatrix> {
        let gap = self.eta_gap();
        if !(gap >= ETA_GAP_MIN) {
            return Err(Error::NearSingularEta { t: self.t, gap });
        }
        Ok(self.eig.map_values(|x| 1.0 / (x - 1.0).sqrt()))
    }

    pub fn m_inverse(&self) -> CMatrix {
        self.eig.map_values(|x| 1.0 / x)
    }

    /// `max |M − η†η − 𝕀|`.
    pub fn consistency_defect(&self) -> f64 {
        let rebuilt = &self.eta.adjoint().matmul(&self.eta) + &CMatrix::identity(self.m.dim());
        (&self.m - &rebuilt).max_abs()
    }
}

/// Snapshot of the dilation auxiliaries: `M, η` and, for a second dilated
/// subspace, `N, ζ`.
#[derive(Clone, Debug)]
pub struct DilationFrame {
    pub t: f64,
    pub m: CMatrix,
    pub eta: CMatrix,
    pub n: Option<CMatrix>,
    pub zeta: Option<CMatrix>,
    pub min_eig_m: f64,
    pub min_eig_n: Option<f64>,
}

impl DilationFrame {
    pub fn single(f: &MetricFrame) -> Self {
        Self {
            t: f.t,
            m: f.m.clone(),
            eta: f.eta.clone(),
            n: None,
            zeta: None,
            min_eig_m: f.min_eig,
            min_eig_n: None,
        }
    }

    pub fn pair(fm: &MetricFrame, fn_: &MetricFrame) -> Self {
        Self {
            t: fm.t,
            m: fm.m.clone(),
            eta: fm.eta.clone(),
            n: Some(fn_.m.clone()),
            zeta: Some(fn_.eta.clone()),
            min_eig_m: fm.min_eig,
            min_eig_n: Some(fn_.min_eig),
        }
    }

    pub fn constraint_ok(&self) -> bool {
        self.min_eig_m >= 1.0 - CONSTRAINT_TOL
            && self.min_eig_n.is_none_or(|v| v >= 1.0 - CONSTRAINT_TOL)
    }

    /// Largest entry of `M − η†η − 𝕀` (and of the `N, ζ` analogue).
    pub fn consistency_defect(&self) -> f64 {
        let defect = |m: &CMatrix, e: &CMatrix| {
            (m - &(&e.adjoint().matmul(e) + &CMatrix::identity(m.dim()))).max_abs()
        };
        let d = defect(&self.m, &self.eta);
        match (&self.n, &self.zeta) {
            (Some(n), Some(z)) => d.max(defect(n, z)),
            _ => d,
        }
    }
}

/// Closed-form metric for a diagonal source with a known integral and a
/// diagonal `M(0)`: `M_kk(t) = M_kk(0)·exp(−2 Im ∫₀ᵗ H_kk)`.
#[derive(Clone)]
pub struct MetricTrack {
    h: Arc<dyn Hamiltonian>,
    m0: Vec<f64>,
    choice: UnitaryChoice,
}

impl std::fmt::Debug for MetricTrack {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricTrack")
            .field("dim", &self.h.dim())
            .field("m0", &self.m0)
            .finish()
    }
}

impl MetricTrack {
    pub fn new(h: Arc<dyn Hamiltonian>, m0: f64) -> Result<Self> {
        let n = h.dim();
        Self::with_initial(h, vec![m0; n], UnitaryChoice::Identity)
    }

    pub fn with_initial(
        h: Arc<dyn Hamiltonian>,
        m0: Vec<f64>,
        choice: UnitaryChoice,
    ) -> Result<Self> {
        if m0.len() != h.dim() {
            return Err(Error::Dimension(format!(
                "M(0) has {} entries, H is {}-dim",
                m0.len(),
                h.dim()
            )));
        }
        if let Some(&bad) = m0.iter().find(|&&m| !(m >= MIN_M0) || !m.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "m0 = {bad} must be at least 1 + 1e-6"
            )));
        }
        if !supports_closed_form(h.as_ref()) {
            return Err(Error::UnsupportedForm(
                "the dilation pipeline needs a diagonal Hamiltonian with a closed-form integral"
                    .into(),
            ));
        }
        Ok(Self { h, m0, choice })
    }

    pub fn hamiltonian(&self) -> &Arc<dyn Hamiltonian> {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn metric(&self, t: f64) -> Result<CMatrix> {
        closed_form_metric(self.h.as_ref(), &self.m0, t)
    }

    pub fn frame(&self, t: f64) -> Result<MetricFrame> {
        MetricFrame::from_metric(t, self.metric(t)?, self.choice)
    }
}

fn supports_closed_form(h: &dyn Hamiltonian) -> bool {
    h.at(0.0).is_diagonal(DIAGONAL_TOL)
        && h.integral(0.0, 1.0)
            .is_some_and(|m| m.is_diagonal(DIAGONAL_TOL))
}

fn closed_form_metric(h: &dyn Hamiltonian, m0: &[f64], t: f64) -> Result<CMatrix> {
    let integral = h.integral(0.0, t).ok_or_else(|| {
        Error::UnsupportedForm("no closed-form integral for this Hamiltonian".into())
    })?;
    let d: Vec<f64> = integral
        .diagonal()
        .iter()
        .zip(m0)
        .map(|(z, &m)| m * (-2.0 * z.im).exp())
        .collect();
    Ok(CMatrix::from_real_diagonal(&d))
}

/// Metric trajectory on the step grid. Uses the closed form when `H` is
/// diagonal with a known integral and `M(0)` is diagonal, otherwise
/// [`propagate_m_stepped`].
pub fn propagate_m(
    h: &dyn Hamiltonian,
    m0: &CMatrix,
    ctrl: &StepControl,
) -> Result<Vec<DilationFrame>> {
    ctrl.validate()?;
    check_initial_metric(h, m0)?;
    if !(m0.is_diagonal(DIAGONAL_TOL) && supports_closed_form(h)) {
        return propagate_m_stepped(h, m0, ctrl);
    }
    let diag: Vec<f64> = m0.diagonal().iter().map(|z| z.re).collect();
    let (n, dt) = ctrl.grid();
    let mut out = Vec::new();
    for k in 0..=n {
        // every grid point is checked against the constraint, recorded or not
        let t = k as f64 * dt;
        let frame =
            MetricFrame::from_metric(t, closed_form_metric(h, &diag, t)?, UnitaryChoice::Identity)?;
        if ctrl.records(k, n) {
            out.push(DilationFrame::single(&frame));
        }
    }
    Ok(out)
}

/// Stepped metric update `M ← e^{−iH†dt} M e^{iH dt}` with `H` sampled at
/// the step midpoint. Works for non-commuting input.
pub fn propagate_m_stepped(
    h: &dyn Hamiltonian,
    m0: &CMatrix,
    ctrl: &StepControl,
) -> Result<Vec<DilationFrame>> {
    ctrl.validate()?;
    check_initial_metric(h, m0)?;
    let (n, dt) = ctrl.grid();
    let mut m = m0.clone();
    let mut out = vec![DilationFrame::single(&MetricFrame::from_metric(
        0.0,
        m.clone(),
        UnitaryChoice::Identity,
    )?)];
    for k in 0..n {
        let t = k as f64 * dt;
        let ht = h.at(t + 0.5 * dt);
        let right = mat_exp(&ht.scale(C64::new(0.0, dt)))?;
        m = right.adjoint().matmul(&m).matmul(&right).hermitize();
        let frame = MetricFrame::from_metric(t + dt, m.clone(), UnitaryChoice::Identity)?;
        if ctrl.records(k + 1, n) {
            out.push(DilationFrame::single(&frame));
        }
    }
    Ok(out)
}

fn check_initial_metric(h: &dyn Hamiltonian, m0: &CMatrix) -> Result<()> {
    if m0.dim() != h.dim() {
        return Err(Error::Dimension(format!(
            "M(0) is {}-dim, H is {}-dim",
            m0.dim(),
            h.dim()
        )));
    }
    if !m0.is_hermitian(1e-10) {
        return Err(Error::NotHermitian {
            norm: m0.hermiticity_defect(),
        });
    }
    let lowest = herm_eig(m0)?.values[0];
    if !(lowest >= MIN_M0) {
        return Err(Error::InvalidInput(format!(
            "M(0) has eigenvalue {lowest}; need at least 1 + 1e-6"
        )));
    }
    Ok(())
}
