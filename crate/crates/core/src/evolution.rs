//! Non-Hermitian evolution of density matrices and pure states, the
//! nonlinear von Neumann equation, the Lindblad master equation and the
//! closed-form two-level solutions.

use crate::error::{Error, Result};
use crate::hamiltonians::{Case, Hamiltonian};
use crate::numerics::{herm_eig, mat_exp};
use crate::{CMatrix, CVector, C64};

const STATE_TOL: f64 = 1e-10;
const DEGENERATE_TRACE: f64 = 1e-14;
const MAX_TRACE_DRIFT: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-10;

/// A density matrix. Raw (unnormalized) states carry `normalized == false`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: CMatrix,
    normalized: bool,
}

impl DensityMatrix {
    /// Validated normalized state: Hermitian, PSD and unit trace (all to 1e-10).
    pub fn new(rho: CMatrix) -> Result<Self> {
        check_state(&rho)?;
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(Self {
            rho,
            normalized: true,
        })
    }

    /// Validated raw state with trace in (0, 1 + 1e-10].
    pub fn new_raw(rho: CMatrix) -> Result<Self> {
        check_state(&rho)?;
        let tr = rho.trace().re;
        if !(tr > 0.0 && tr <= 1.0 + STATE_TOL) {
            return Err(Error::InvalidState(format!(
                "raw trace {tr} outside (0, 1]"
            )));
        }
        Ok(Self {
            rho,
            normalized: false,
        })
    }

    pub(crate) fn unchecked(rho: CMatrix, normalized: bool) -> Self {
        Self { rho, normalized }
    }

    /// `|ψ⟩⟨ψ|` of the normalized input vector.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let psi = psi.normalized()?;
        Ok(Self {
            rho: CMatrix::outer(&psi, &psi),
            normalized: true,
        })
    }

    /// `|ψ⟩ = c₁|0⟩ + c₂|1⟩`; requires `|c₁|² + |c₂|² = 1` to 1e-12.
    pub fn from_amplitudes(c1: C64, c2: C64) -> Result<Self> {
        check_amplitudes(c1, c2)?;
        let psi = CVector::from_vec(vec![c1, c2]);
        Ok(Self {
            rho: CMatrix::outer(&psi, &psi),
            normalized: true,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.rho.matmul(&self.rho).trace().re
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rho[(i, j)]
    }
}

fn check_state(rho: &CMatrix) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::InvalidState("non-finite entries".into()));
    }
    if !rho.is_hermitian(STATE_TOL) {
        return Err(Error::NotHermitian {
            norm: rho.hermiticity_defect(),
        });
    }
    let lowest = herm_eig(&rho.hermitize())?.values[0];
    if lowest < -STATE_TOL {
        return Err(Error::NotPsd { eigenvalue: lowest });
    }
    Ok(())
}

fn check_amplitudes(c1: C64, c2: C64) -> Result<()> {
    let n = c1.norm_sqr() + c2.norm_sqr();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "|c1|² + |c2|² = {n}, expected 1"
        )));
    }
    Ok(())
}

/// Hermitian `H_s` plus jump operators `(L_k, Γ_k)`.
#[derive(Clone, Debug)]
pub struct LindbladSpec {
    h_s: CMatrix,
    jumps: Vec<(CMatrix, f64)>,
}

impl LindbladSpec {
    pub fn new(h_s: CMatrix, jumps: Vec<(CMatrix, f64)>) -> Result<Self> {
        if !h_s.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                norm: h_s.hermiticity_defect(),
            });
        }
        for (l, rate) in &jumps {
            if l.dim() != h_s.dim() {
                return Err(Error::Dimension(format!(
                    "jump operator is {}-dim, H_s is {}-dim",
                    l.dim(),
                    h_s.dim()
                )));
            }
            if !(*rate >= 0.0) || !rate.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "jump rate must be non-negative, got {rate}"
                )));
            }
        }
        Ok(Self { h_s, jumps })
    }

    pub fn h_s(&self) -> &CMatrix {
        &self.h_s
    }

    pub fn jumps(&self) -> &[(CMatrix, f64)] {
        &self.jumps
    }

    fn generator(&self, rho: &CMatrix) -> CMatrix {
        let mut out = self.h_s.commutator(rho).scale(C64::new(0.0, -1.0));
        for (l, rate) in &self.jumps {
            let ld = l.adjoint();
            let sandwich = l.matmul(rho).matmul(&ld);
            let anti = ld.matmul(l).anticommutator(rho).scale_real(0.5);
            out += &(&sandwich - &anti).scale_real(*rate);
        }
        out
    }
}

/// Fixed-step time grid.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepControl {
    pub dt: f64,
    pub t_max: f64,
    pub record_every: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 10.0,
            record_every: 1,
        }
    }
}

impl StepControl {
    pub fn new(dt: f64, t_max: f64, record_every: usize) -> Result<Self> {
        let ctrl = Self {
            dt,
            t_max,
            record_every,
        };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidInput(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps and the step size that lands exactly on `t_max`.
    pub fn grid(&self) -> (usize, f64) {
        let n = ((self.t_max / self.dt).round() as usize).max(1);
        (n, self.t_max / n as f64)
    }

    pub fn records(&self, step: usize, n: usize) -> bool {
        step.is_multiple_of(self.record_every) || step == n
    }
}

/// A recorded state at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub t: f64,
    pub state: T,
}

pub type Trajectory = Vec<Snapshot<DensityMatrix>>;

/// Single-step propagator `exp(−i H(t + dt/2) dt)`.
pub fn midpoint_propagator(h: &dyn Hamiltonian, t: f64, dt: f64) -> Result<CMatrix> {
    mat_exp(&h.at(t + 0.5 * dt).scale(C64::new(0.0, -dt)))
}

fn check_dims(rho0: &DensityMatrix, h: &dyn Hamiltonian) -> Result<()> {
    if rho0.dim() != h.dim() {
        return Err(Error::Dimension(format!(
            "state is {}-dim, Hamiltonian is {}-dim",
            rho0.dim(),
            h.dim()
        )));
    }
    Ok(())
}

/// `ρ(t) = K ρ(0) K† / Tr(K ρ(0) K†)`, with `K` the time-ordered product of
/// midpoint propagators.
pub fn evolve_normalized(
    rho0: &DensityMatrix,
    h: &dyn Hamiltonian,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    ctrl.validate()?;
    check_dims(rho0, h)?;
    if !rho0.is_normalized() {
        return Err(Error::InvalidState(
            "evolve_normalized needs a normalized initial state".into(),
        ));
    }
    let (n, dt) = ctrl.grid();
    let mut rho = rho0.matrix().clone();
    let mut out = vec![Snapshot {
        t: 0.0,
        state: rho0.clone(),
    }];
    for k in 0..n {
        let t = k as f64 * dt;
        let u = midpoint_propagator(h, t, dt)?;
        let next = u.matmul(&rho).matmul(&u.adjoint());
        let tr = next.trace().re;
        if !(tr >= DEGENERATE_TRACE) {
            return Err(Error::DegenerateState {
                t: t + dt,
                denominator: tr,
            });
        }
        rho = next.scale_real(1.0 / tr).hermitize();
        if ctrl.records(k + 1, n) {
            out.push(Snapshot {
                t: (k + 1) as f64 * dt,
                state: DensityMatrix::unchecked(rho.clone(), true),
            });
        }
    }
    Ok(out)
}

/// Same propagation without trace renormalization.
pub fn evolve_raw(
    rho0: &DensityMatrix,
    h: &dyn Hamiltonian,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    ctrl.validate()?;
    check_dims(rho0, h)?;
    let (n, dt) = ctrl.grid();
    let mut rho = rho0.matrix().clone();
    let mut out = vec![Snapshot {
        t: 0.0,
        state: DensityMatrix::unchecked(rho.clone(), false),
    }];
    for k in 0..n {
        let u = midpoint_propagator(h, k as f64 * dt, dt)?;
        rho = u.matmul(&rho).matmul(&u.adjoint()).hermitize();
        if ctrl.records(k + 1, n) {
            out.push(Snapshot {
                t: (k + 1) as f64 * dt,
                state: DensityMatrix::unchecked(rho.clone(), false),
            });
        }
    }
    Ok(out)
}

/// Pure-state counterpart of [`evolve_normalized`]: `ψ ← Uψ / ‖Uψ‖`.
pub fn evolve_state_normalized(
    psi0: &CVector,
    h: &dyn Hamiltonian,
    ctrl: &StepControl,
) -> Result<Vec<Snapshot<CVector>>> {
    ctrl.validate()?;
    if psi0.dim() != h.dim() {
        return Err(Error::Dimension(format!(
            "state is {}-dim, Hamiltonian is {}-dim",
            psi0.dim(),
            h.dim()
        )));
    }
    let (n, dt) = ctrl.grid();
    let mut psi = psi0.normalized()?;
    let mut out = vec![Snapshot {
        t: 0.0,
        state: psi.clone(),
    }];
    for k in 0..n {
        let t = k as f64 * dt;
        let next = midpoint_propagator(h, t, dt)?.apply(&psi);
        let norm = next.norm();
        if !(norm * norm >= DEGENERATE_TRACE) {
            return Err(Error::DegenerateState {
                t: t + dt,
                denominator: norm * norm,
            });
        }
        psi = next.scale(C64::new(1.0 / norm, 0.0));
        if ctrl.records(k + 1, n) {
            out.push(Snapshot {
                t: (k + 1) as f64 * dt,
                state: psi.clone(),
            });
        }
    }
    Ok(out)
}

fn rk4_step(rho: &CMatrix, t: f64, dt: f64, f: &dyn Fn(f64, &CMatrix) -> CMatrix) -> CMatrix {
    let k1 = f(t, rho);
    let k2 = f(t + 0.5 * dt, &(rho + &k1.scale_real(0.5 * dt)));
    let k3 = f(t + 0.5 * dt, &(rho + &k2.scale_real(0.5 * dt)));
    let k4 = f(t + dt, &(rho + &k3.scale_real(dt)));
    let mut incr = &k1 + &k4;
    incr += &(&k2 + &k3).scale_real(2.0);
    rho + &incr.scale_real(dt / 6.0)
}

fn integrate_rk4(
    rho0: &DensityMatrix,
    ctrl: &StepControl,
    f: &dyn Fn(f64, &CMatrix) -> CMatrix,
) -> Result<Trajectory> {
    ctrl.validate()?;
    let (n, dt) = ctrl.grid();
    let tr0 = rho0.trace();
    let mut rho = rho0.matrix().clone();
    let mut out = vec![Snapshot {
        t: 0.0,
        state: rho0.clone(),
    }];
    for k in 0..n {
        let t = k as f64 * dt;
        let next = rk4_step(&rho, t, dt, f);
        let drift = (next.trace().re - tr0).abs();
        if !(drift <= MAX_TRACE_DRIFT) || !next.is_finite() {
            return Err(Error::StepRejected {
                t: t + dt,
                drift,
                limit: MAX_TRACE_DRIFT,
            });
        }
        // RK4 keeps the trace of the nonlinear equation exactly, so positivity
        // is the witness that catches an oversized step there
        let lowest = herm_eig(&next.hermitize())?.values[0];
        if lowest < -MAX_TRACE_DRIFT {
            return Err(Error::StepRejected {
                t: t + dt,
                drift: -lowest,
                limit: MAX_TRACE_DRIFT,
            });
        }
        rho = next;
        if ctrl.records(k + 1, n) {
            out.push(Snapshot {
                t: (k + 1) as f64 * dt,
                state: DensityMatrix::unchecked(rho.clone(), true),
            });
        }
    }
    Ok(out)
}

/// RK4 integration of `ρ̇ = −i[H_h, ρ] − {H_a, ρ} + 2 tr(ρ H_a) ρ` for a
/// constant `H = H_h − i H_a`.
pub fn integrate_nonlinear_vn(
    rho0: &DensityMatrix,
    h_h: &CMatrix,
    h_a: &CMatrix,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    for m in [h_h, h_a] {
        if !m.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                norm: m.hermiticity_defect(),
            });
        }
        if m.dim() != rho0.dim() {
            return Err(Error::Dimension(format!(
                "operator is {}-dim, state is {}-dim",
                m.dim(),
                rho0.dim()
            )));
        }
    }
    integrate_rk4(rho0, ctrl, &|_, rho| nonlinear_vn_rhs(h_h, h_a, rho))
}

/// Same equation for a time-dependent source, split into its Hermitian and
/// anti-Hermitian parts at every stage.
pub fn integrate_nonlinear_vn_source(
    rho0: &DensityMatrix,
    h: &dyn Hamiltonian,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    check_dims(rho0, h)?;
    integrate_rk4(rho0, ctrl, &|t, rho| {
        let ht = h.at(t);
        nonlinear_vn_rhs(&ht.hermitian_part(), &(-&ht.antihermitian_part()), rho)
    })
}

fn nonlinear_vn_rhs(h_h: &CMatrix, h_a: &CMatrix, rho: &CMatrix) -> CMatrix {
    let comm = h_h.commutator(rho).scale(C64::new(0.0, -1.0));
    let anti = h_a.anticommutator(rho);
    let feedback = rho.matmul(h_a).trace().re * 2.0;
    &(&comm - &anti) + &rho.scale_real(feedback)
}

/// RK4 integration of the Lindblad master equation.
pub fn integrate_lindblad(
    rho0: &DensityMatrix,
    spec: &LindbladSpec,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    if spec.h_s().dim() != rho0.dim() {
        return Err(Error::Dimension(format!(
            "state is {}-dim, H_s is {}-dim",
            rho0.dim(),
            spec.h_s().dim()
        )));
    }
    integrate_rk4(rho0, ctrl, &|_, rho| spec.generator(rho))
}

/// Closed-form two-level solutions for `ψ(0) = c₁|0⟩ + c₂|1⟩`.
///
/// Case A is the normalized evolution under diag(λ₁+iγ, λ₂−iγ); B and C are
/// Case A with γ → γ/2; D is the raw evolution under the Case C matrix.
pub fn closed_form_case(
    case: Case,
    c1: C64,
    c2: C64,
    lambda1: f64,
    lambda2: f64,
    gamma: f64,
    t: f64,
) -> Result<DensityMatrix> {
    check_amplitudes(c1, c2)?;
    let (p1, p2) = (c1.norm_sqr(), c2.norm_sqr());
    let coherence = c1 * c2.conj() * C64::from_polar(1.0, -(lambda1 - lambda2) * t);
    let rho = match case {
        Case::A | Case::B | Case::C => {
            let g = if case == Case::A { gamma } else { 0.5 * gamma };
            // numerator and denominator rescaled so neither exponential overflows
            let x = 2.0 * g * t;
            let (up, down, off_scale) = if x >= 0.0 {
                (p1, p2 * (-2.0 * x).exp(), (-x).exp())
            } else {
                (p1 * (2.0 * x).exp(), p2, x.exp())
            };
            let denom = up + down;
            let off = coherence * (off_scale / denom);
            CMatrix::from_rows(&[
                vec![C64::new(up / denom, 0.0), off],
                vec![off.conj(), C64::new(down / denom, 0.0)],
            ])?
        }
        Case::D => {
            let off = coherence * (-gamma * t).exp();
            CMatrix::from_rows(&[
                vec![C64::new(p1, 0.0), off],
                vec![off.conj(), C64::new(p2 * (-2.0 * gamma * t).exp(), 0.0)],
            ])?
        }
    };
    Ok(DensityMatrix::unchecked(rho, case != Case::D))
}

/// Sum of the two raw evolutions with `−iγ` on the lower and on the upper
/// diagonal entry (H_h = σ_z), before normalization. Its trace is
/// `1 + e^{−2γt}`.
pub fn incoherent_sum_raw(c1: C64, c2: C64, gamma: f64, t: f64) -> Result<CMatrix> {
    let lower = closed_form_case(Case::D, c1, c2, 1.0, -1.0, gamma, t)?;
    // upper placement: relabel the levels, evolve, and swap back
    let swapped = closed_form_case(Case::D, c2, c1, -1.0, 1.0, gamma, t)?;
    let s = swapped.matrix();
    let upper = CMatrix::from_rows(&[vec![s[(1, 1)], s[(1, 0)]], vec![s[(0, 1)], s[(0, 0)]]])?;
    Ok(lower.matrix() + &upper)
}

/// The incoherent sum renormalized to unit trace. Its diagonal stays at
/// `(|c₁|², |c₂|²)` and the coherence decays as `1/cosh(γt)`.
pub fn incoherent_sum_demo(c1: C64, c2: C64, gamma: f64, t: f64) -> Result<DensityMatrix> {
    let raw = incoherent_sum_raw(c1, c2, gamma, t)?;
    let tr = raw.trace().re;
    Ok(DensityMatrix::unchecked(raw.scale_real(1.0 / tr), true))
}
