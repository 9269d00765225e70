use std::sync::Arc;

use super::blocks::{assemble_8dim, assemble_general, BlockHamiltonian};
use super::metric::{DilationFrame, MetricFrame, MetricTrack};
use super::state::FullState;
use crate::error::{Error, Result};
use crate::evolution::StepControl;
use crate::hamiltonians::Hamiltonian;
use crate::numerics::mat_exp;
use crate::{CMatrix, CVector, C64};

const HERMITIAN_TOL: f64 = 1e-10;
const MAX_NORM_DRIFT: f64 = 1e-6;
const INITIAL_NORM_TOL: f64 = 1e-10;

/// A time-dependent Hermitian system-ancilla Hamiltonian.
pub trait DilatedSource: Send + Sync {
    fn n_sys(&self) -> usize;
    fn n_anc(&self) -> usize;
    fn block_hamiltonian(&self, t: f64) -> Result<BlockHamiltonian>;

    /// Smallest metric eigenvalue of each dilated subspace at `t`.
    fn min_eigs(&self, _t: f64) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    DirectSum,
    Crossed,
}

/// Dilation of one or more diagonal sources with closed-form metrics.
#[derive(Clone, Debug)]
pub struct Dilation {
    tracks: Vec<MetricTrack>,
    layout: Layout,
}

impl Dilation {
    /// `2n`-dimensional dilation of a single `n`-level source.
    pub fn four_dim(h: Arc<dyn Hamiltonian>, m0: f64) -> Result<Self> {
        Ok(Self {
            tracks: vec![MetricTrack::new(h, m0)?],
            layout: Layout::DirectSum,
        })
    }

    /// The crossed eight-dimensional dilation of `(H_−, H_+)` with
    /// `M(0) = N(0) = m₀𝕀`.
    pub fn eight_dim(
        minus: Arc<dyn Hamiltonian>,
        plus: Arc<dyn Hamiltonian>,
        m0: f64,
    ) -> Result<Self> {
        if minus.dim() != plus.dim() {
            return Err(Error::Dimension(
                "H_- and H_+ must share a dimension".into(),
            ));
        }
        Ok(Self {
            tracks: vec![MetricTrack::new(minus, m0)?, MetricTrack::new(plus, m0)?],
            layout: Layout::Crossed,
        })
    }

    /// Direct-sum dilation of `N` sources on `2N` pointers.
    pub fn general(sources: Vec<Arc<dyn Hamiltonian>>, m0: f64) -> Result<Self> {
        if sources.len() < 2 {
            return Err(Error::InvalidInput(
                "the general dilation needs at least two sources".into(),
            ));
        }
        let n = sources[0].dim();
        if sources.iter().any(|h| h.dim() != n) {
            return Err(Error::Dimension(
                "all sources must share a dimension".into(),
            ));
        }
        let tracks = sources
            .into_iter()
            .map(|h| MetricTrack::new(h, m0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tracks,
            layout: Layout::DirectSum,
        })
    }

    pub fn tracks(&self) -> &[MetricTrack] {
        &self.tracks
    }

    /// Pointer index carrying the (unnormalized) state of source `k`.
    pub fn branch_index(&self, k: usize) -> usize {
        2 * k
    }

    pub fn frames(&self, t: f64) -> Result<Vec<MetricFrame>> {
        self.tracks.iter().map(|tr| tr.frame(t)).collect()
    }

    /// `M, η` (and `N, ζ` for two sources) at `t`.
    pub fn dilation_frame(&self, t: f64) -> Result<DilationFrame> {
        let f = self.frames(t)?;
        Ok(match f.as_slice() {
            [m, n, ..] => DilationFrame::pair(m, n),
            [m] => DilationFrame::single(m),
            [] => unreachable!("a dilation has at least one source"),
        })
    }

    /// `Σ_k ψ_k|2k⟩ + η_k(0)ψ_k|2k+1⟩`, normalized.
    pub fn initial_state(&self, psis: &[CVector]) -> Result<FullState> {
        if psis.len() != self.tracks.len() {
            return Err(Error::InvalidInput(format!(
                "{} initial states for {} sources",
                psis.len(),
                self.tracks.len()
            )));
        }
        let frames = self.frames(0.0)?;
        let pairs: Vec<(CVector, &crate::CMatrix)> = psis
            .iter()
            .zip(&frames)
            .map(|(p, f)| p.normalized().map(|p| (p, &f.eta)))
            .collect::<Result<_>>()?;
        FullState::embed_pairs(&pairs)
    }

    pub fn run(&self, psis: &[CVector], ctrl: &StepControl) -> Result<FullRun> {
        evolve_full(&self.initial_state(psis)?, self, ctrl)
    }
}

impl DilatedSource for Dilation {
    fn n_sys(&self) -> usize {
        self.tracks[0].dim()
    }

    fn n_anc(&self) -> usize {
        2 * self.tracks.len()
    }

    fn block_hamiltonian(&self, t: f64) -> Result<BlockHamiltonian> {
        let frames = self.frames(t)?;
        let hs: Vec<_> = self
            .tracks
            .iter()
            .map(|tr| tr.hamiltonian().at(t))
            .collect();
        match self.layout {
            Layout::Crossed => assemble_8dim(&hs[0], &hs[1], &frames[0], &frames[1]),
            Layout::DirectSum => assemble_general(&hs, &frames),
        }
    }

    fn min_eigs(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.frames(t)?.iter().map(|f| f.min_eig).collect())
    }
}

#[derive(Clone, Debug)]
pub struct FullSample {
    pub t: f64,
    pub state: FullState,
    pub min_eigs: Vec<f64>,
}

/// Recorded full-state trajectory with its unitarity and Hermiticity witnesses.
#[derive(Clone, Debug)]
pub struct FullRun {
    pub samples: Vec<FullSample>,
    pub max_hermiticity_defect: f64,
    pub max_norm_drift: f64,
    /// Number of Magnus sub-steps actually taken.
    pub substeps: usize,
}

/// Unitary propagation of the full state on the step grid.
///
/// Each grid step applies a fourth-order Magnus propagator built from the two
/// Gauss points. A step is split in halves, recursively, while the one-step and
/// two-half-step propagators differ by more than 1e-12: `B ∝ η⁻¹` changes on a
/// timescale of order `(m₀ − 1)/γ` right after the coupling appears.
/// Hermiticity of every sampled `H_sa` is asserted; a norm drift above 1e-6
/// rejects the step.
pub fn evolve_full(
    psi0: &FullState,
    src: &dyn DilatedSource,
    ctrl: &StepControl,
) -> Result<FullRun> {
    ctrl.validate()?;
    if psi0.n_sys() != src.n_sys() || psi0.n_anc() != src.n_anc() {
        return Err(Error::Dimension(format!(
            "state is {}x{}, H_sa is {}x{}",
            psi0.n_sys(),
            psi0.n_anc(),
            src.n_sys(),
            src.n_anc()
        )));
    }
    if (psi0.norm() - 1.0).abs() > INITIAL_NORM_TOL {
        return Err(Error::InvalidState(format!(
            "initial full state has norm {}",
            psi0.norm()
        )));
    }
    let (n, dt) = ctrl.grid();
    let mut psi = psi0.vector().clone();
    let mut samples = vec![FullSample {
        t: 0.0,
        state: psi0.clone(),
        min_eigs: src.min_eigs(0.0)?,
    }];
    let mut stepper = Stepper {
        src,
        max_defect: 0.0,
        substeps: 0,
    };
    let mut max_drift: f64 = 0.0;
    for k in 0..n {
        let t = k as f64 * dt;
        let u = stepper.adaptive(t, dt, 0)?;
        psi = u.apply(&psi);
        let drift = (psi.norm() - 1.0).abs();
        if !(drift <= MAX_NORM_DRIFT) {
            return Err(Error::StepRejected {
                t: t + dt,
                drift,
                limit: MAX_NORM_DRIFT,
            });
        }
        max_drift = max_drift.max(drift);
        if ctrl.records(k + 1, n) {
            let tk = (k + 1) as f64 * dt;
            samples.push(FullSample {
                t: tk,
                state: psi0.with_vector(psi.clone()),
                min_eigs: src.min_eigs(tk)?,
            });
        }
    }
    Ok(FullRun {
        samples,
        max_hermiticity_defect: stepper.max_defect,
        max_norm_drift: max_drift,
        substeps: stepper.substeps,
    })
}

const SPLIT_TOL: f64 = 1e-12;
const MAX_SPLIT_DEPTH: u32 = 24;

struct Stepper<'a> {
    src: &'a dyn DilatedSource,
    max_defect: f64,
    substeps: usize,
}

impl Stepper<'_> {
    fn sample(&mut self, t: f64) -> Result<CMatrix> {
        let bh = self.src.block_hamiltonian(t)?;
        let defect = bh.hermiticity_defect();
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::InternalConsistency(format!(
                "H_sa not Hermitian at t = {t} (defect {defect:.3e})"
            )));
        }
        self.max_defect = self.max_defect.max(defect);
        Ok(bh.to_matrix())
    }

    /// `exp(−i dt (H₁+H₂)/2 + (√3/12) dt² [H₁, H₂])` at the Gauss points.
    fn magnus4(&mut self, t: f64, dt: f64) -> Result<CMatrix> {
        let c = 3f64.sqrt() / 6.0;
        let h1 = self.sample(t + (0.5 - c) * dt)?;
        let h2 = self.sample(t + (0.5 + c) * dt)?;
        let mut omega = (&h1 + &h2).scale(C64::new(0.0, -0.5 * dt));
        omega += &h1.commutator(&h2).scale_real(3f64.sqrt() / 12.0 * dt * dt);
        mat_exp(&omega)
    }

    fn adaptive(&mut self, t: f64, dt: f64, depth: u32) -> Result<CMatrix> {
        let full = self.magnus4(t, dt)?;
        let first = self.magnus4(t, 0.5 * dt)?;
        let second = self.magnus4(t + 0.5 * dt, 0.5 * dt)?;
        let halves = second.matmul(&first);
        if (&full - &halves).max_abs() <= SPLIT_TOL || depth >= MAX_SPLIT_DEPTH {
            self.substeps += 2;
            return Ok(halves);
        }
        let first = self.adaptive(t, 0.5 * dt, depth + 1)?;
        let second = self.adaptive(t + 0.5 * dt, 0.5 * dt, depth + 1)?;
        Ok(second.matmul(&first))
    }
}
