use std::sync::Arc;

use super::metric::MetricTrack;
use crate::error::{Error, Result};
use crate::evolution::{evolve_state_normalized, StepControl};
use crate::hamiltonians::Hamiltonian;
use crate::numerics::mat_exp;
use crate::{CMatrix, CVector, C64};

const ORTHOGONAL_TOL: f64 = 1e-10;
const EXCEED_LEVEL: f64 = 1e-2;

/// Outcome of tracking `|⟨ψ|ηψ⟩|` for a dump state that starts orthogonal.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ImpossibilityReport {
    pub times: Vec<f64>,
    pub overlaps: Vec<f64>,
    pub max_overlap: f64,
    /// First recorded time with overlap above 1e-2.
    pub first_exceed_time: Option<f64>,
    /// Largest relative gap between the required `M(t)` and the metric built
    /// from an `η` that obeys `iη̇ = H†η − ηH`, the law that would keep the
    /// overlap at zero.
    pub max_metric_mismatch: f64,
    pub persists_orthogonal: bool,
}

/// Two-level demonstration that the dump state `η(t)ψ(t)` cannot stay
/// orthogonal to `ψ(t)` in four dimensions.
///
/// `η(t) = U·(M(t) − 𝕀)^{1/2}` with the fixed unitary
/// `U = |ψ⊥⟩⟨ψ₀| + |ψ₀⟩⟨ψ⊥|`, so the overlap vanishes at `t = 0`.
pub fn demonstrate_4dim_impossibility(
    h: Arc<dyn Hamiltonian>,
    psi0: &CVector,
    m0: f64,
    ctrl: &StepControl,
) -> Result<ImpossibilityReport> {
    if h.dim() != 2 || psi0.dim() != 2 {
        return Err(Error::Dimension(
            "the four-dimensional argument needs a two-level system".into(),
        ));
    }
    let psi0 = psi0.normalized()?;
    let perp = CVector::from_vec(vec![-psi0[1].conj(), psi0[0].conj()]);
    let u = &CMatrix::outer(&perp, &psi0) + &CMatrix::outer(&psi0, &perp);

    let track = MetricTrack::new(h.clone(), m0)?;
    let states = evolve_state_normalized(&psi0, h.as_ref(), ctrl)?;

    let (n, dt) = ctrl.grid();
    let mut eta_law = u.matmul(&track.frame(0.0)?.eta);
    let mut mismatch: f64 = 0.0;
    let mut law_at = vec![eta_law.clone()];
    for k in 0..n {
        let ht = h.at((k as f64 + 0.5) * dt);
        let right = mat_exp(&ht.scale(C64::new(0.0, dt)))?;
        eta_law = right.adjoint().matmul(&eta_law).matmul(&right);
        if ctrl.records(k + 1, n) {
            law_at.push(eta_law.clone());
        }
    }

    let mut times = Vec::with_capacity(states.len());
    let mut overlaps = Vec::with_capacity(states.len());
    for (snap, law) in states.iter().zip(&law_at) {
        let frame = track.frame(snap.t)?;
        let eta = u.matmul(&frame.eta);
        overlaps.push(snap.state.inner(&eta.apply(&snap.state)).norm());
        times.push(snap.t);
        let m_law = &law.adjoint().matmul(law) + &CMatrix::identity(2);
        mismatch = mismatch.max((&m_law - &frame.m).max_abs() / frame.m.max_abs());
    }
    let max_overlap = overlaps.iter().cloned().fold(0.0, f64::max);
    let first_exceed_time = times
        .iter()
        .zip(&overlaps)
        .find(|(_, &o)| o > EXCEED_LEVEL)
        .map(|(&t, _)| t);
    Ok(ImpossibilityReport {
        times,
        overlaps,
        max_overlap,
        first_exceed_time,
        max_metric_mismatch: mismatch,
        persists_orthogonal: max_overlap <= ORTHOGONAL_TOL,
    })
}
