//! Bloch vectors, entropy, Fubini-Study distance and speeds, partial traces
//! and eigenstate populations.

use crate::error::{Error, Result};
use crate::evolution::{DensityMatrix, Snapshot};
use crate::numerics::herm_eig;
use crate::{pauli, CMatrix, CVector, C64};

const ENTROPY_CUTOFF: f64 = 1e-14;
const PURITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Unset components, used for non-qubit rows.
    pub fn nan() -> Self {
        Self {
            x: f64::NAN,
            y: f64::NAN,
            z: f64::NAN,
        }
    }
}

/// `(Tr ρσ_x, Tr ρσ_y, Tr ρσ_z)` of a 2×2 density matrix.
pub fn bloch(rho: &CMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::Dimension(format!(
            "Bloch vector needs a 2x2 state, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    let comp = |s: CMatrix| rho.matmul(&s).trace().re;
    Ok(BlochVector {
        x: comp(pauli::x()),
        y: comp(pauli::y()),
        z: comp(pauli::z()),
    })
}

pub fn bloch_of_state(psi: &CVector) -> Result<BlochVector> {
    bloch(DensityMatrix::from_pure(psi)?.matrix())
}

/// Von Neumann entropy with the natural logarithm.
pub fn entropy(rho: &CMatrix) -> Result<f64> {
    let eig = herm_eig(&rho.hermitize())?;
    let s: f64 = eig
        .values
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.ln())
        .sum();
    Ok(s.max(0.0))
}

pub fn purity(rho: &CMatrix) -> f64 {
    rho.matmul(rho).trace().re
}

/// `δ = cos⁻¹ √|Tr ρ₁ρ₂|`, defined for pure states. Mixed input still
/// returns the formula value; see [`is_effectively_pure`].
pub fn fs_distance(rho1: &CMatrix, rho2: &CMatrix) -> f64 {
    let overlap = rho1.matmul(rho2).trace().norm();
    overlap.sqrt().clamp(0.0, 1.0).acos()
}

pub fn fs_distance_states(psi1: &CVector, psi2: &CVector) -> f64 {
    let o = psi1.inner(psi2).norm() / (psi1.norm() * psi2.norm());
    o.clamp(0.0, 1.0).acos()
}

pub fn is_effectively_pure(rho: &CMatrix) -> bool {
    purity(rho) > 1.0 - PURITY_TOL
}

/// `δ(ρ_k, ρ_{k+1}) / Δt` for each consecutive pair.
pub fn step_speeds(traj: &[Snapshot<DensityMatrix>]) -> Result<Vec<f64>> {
    if traj.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least two states, got {}",
            traj.len()
        )));
    }
    traj.windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            if !(dt > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "non-increasing times {} → {}",
                    w[0].t, w[1].t
                )));
            }
            Ok(fs_distance(w[0].state.matrix(), w[1].state.matrix()) / dt)
        })
        .collect()
}

/// Mean of the step speeds. With a target, only steps that start farther
/// than `cutoff` from it are averaged.
pub fn mean_speed(
    traj: &[Snapshot<DensityMatrix>],
    target: Option<&CMatrix>,
    cutoff: f64,
) -> Result<f64> {
    let speeds = step_speeds(traj)?;
    let kept: Vec<f64> = match target {
        None => speeds,
        Some(tgt) => speeds
            .into_iter()
            .zip(traj)
            .filter(|(_, s)| fs_distance(s.state.matrix(), tgt) > cutoff)
            .map(|(v, _)| v)
            .collect(),
    };
    if kept.is_empty() {
        return Err(Error::InsufficientData(
            "no steps before the convergence cutoff".into(),
        ));
    }
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// `min_φ ‖a − e^{iφ} b‖` for vectors of equal dimension.
pub fn phase_aligned_distance(a: &CVector, b: &CVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "{}-dim vs {}-dim",
            a.dim(),
            b.dim()
        )));
    }
    let o = b.inner(a);
    let phase = if o.norm() > 0.0 {
        o / o.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    Ok((a - &b.scale(phase)).norm())
}

fn check_factorization(len: usize, n_sys: usize, n_anc: usize) -> Result<()> {
    if n_sys == 0 || n_anc == 0 || n_sys * n_anc != len {
        return Err(Error::Dimension(format!(
            "{len} entries do not factor as {n_sys} x {n_anc}"
        )));
    }
    Ok(())
}

/// `Tr_a |Ψ⟩⟨Ψ|` with the full index laid out as `s·n_anc + a`.
pub fn partial_trace_ancilla(psi: &CVector, n_sys: usize, n_anc: usize) -> Result<CMatrix> {
    check_factorization(psi.dim(), n_sys, n_anc)?;
    let v = psi.as_slice();
    Ok(CMatrix::from_fn(n_sys, |i, j| {
        (0..n_anc)
            .map(|a| v[i * n_anc + a] * v[j * n_anc + a].conj())
            .sum()
    }))
}

/// `Tr_s |Ψ⟩⟨Ψ|`.
pub fn partial_trace_system(psi: &CVector, n_sys: usize, n_anc: usize) -> Result<CMatrix> {
    check_factorization(psi.dim(), n_sys, n_anc)?;
    let v = psi.as_slice();
    Ok(CMatrix::from_fn(n_anc, |a, b| {
        (0..n_sys)
            .map(|s| v[s * n_anc + a] * v[s * n_anc + b].conj())
            .sum()
    }))
}

/// Ancilla partial trace of a full density matrix.
pub fn partial_trace_ancilla_dm(rho: &CMatrix, n_sys: usize, n_anc: usize) -> Result<CMatrix> {
    check_factorization(rho.dim(), n_sys, n_anc)?;
    Ok(CMatrix::from_fn(n_sys, |i, j| {
        (0..n_anc)
            .map(|a| rho[(i * n_anc + a, j * n_anc + a)])
            .sum()
    }))
}

/// `|⟨e_k|ψ⟩|²` for the columns `e_k` of `basis`.
pub fn eigenstate_probs(psi: &CVector, basis: &CMatrix) -> Result<Vec<f64>> {
    if basis.dim() != psi.dim() {
        return Err(Error::Dimension(format!(
            "basis is {}-dim, state is {}-dim",
            basis.dim(),
            psi.dim()
        )));
    }
    let n = psi.dim();
    Ok((0..n)
        .map(|k| {
            (0..n)
                .map(|i| basis[(i, k)].conj() * psi[i])
                .sum::<C64>()
                .norm_sqr()
        })
        .collect())
}

/// One row of a recorded trajectory.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub bloch: Vec<BlochVector>,
    pub entropy: f64,
    pub probs: Vec<f64>,
    pub norm: f64,
    pub min_eig_m: f64,
    pub min_eig_n: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, LN_2};

    fn ket(a: f64, b: f64) -> CVector {
        CVector::from_real(&[a, b])
    }

    fn proj(v: &CVector) -> CMatrix {
        CMatrix::outer(v, v)
    }

    #[test]
    fn bloch_examples() {
        let b = bloch(&proj(&ket(1.0, 0.0))).unwrap();
        assert_eq!((b.x, b.y, b.z), (0.0, 0.0, 1.0));
        let b = bloch(&proj(&ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2))).unwrap();
        assert!((b.x - 1.0).abs() < 1e-15 && b.y.abs() < 1e-15 && b.z.abs() < 1e-15);
        let b = bloch(&CMatrix::from_real_diagonal(&[0.5, 0.5])).unwrap();
        assert_eq!(b.length(), 0.0);
        assert!(matches!(
            bloch(&CMatrix::identity(3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        assert!(entropy(&proj(&ket(0.6, 0.8))).unwrap() < 1e-10);
        assert!((entropy(&CMatrix::from_real_diagonal(&[0.5, 0.5])).unwrap() - LN_2).abs() < 1e-10);
        let s = entropy(&CMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0])).unwrap();
        let expected = -(2.0f64 / 3.0) * (2.0f64 / 3.0).ln() - (1.0f64 / 3.0) * (1.0f64 / 3.0).ln();
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 0.6365).abs() < 1e-4);
    }

    #[test]
    fn fs_distance_examples() {
        let zero = proj(&ket(1.0, 0.0));
        let one = proj(&ket(0.0, 1.0));
        let plus = proj(&ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2));
        assert_eq!(fs_distance(&zero, &zero), 0.0);
        assert!((fs_distance(&zero, &one) - FRAC_PI_2).abs() < 1e-15);
        assert!((fs_distance(&zero, &plus) - FRAC_PI_4).abs() < 1e-12);
        assert!(!is_effectively_pure(&CMatrix::from_real_diagonal(&[
            0.5, 0.5
        ])));
    }

    #[test]
    fn mean_speed_examples() {
        let rho = DensityMatrix::from_pure(&ket(0.6, 0.8)).unwrap();
        let still: Vec<_> = (0..5)
            .map(|k| Snapshot {
                t: k as f64 * 0.1,
                state: rho.clone(),
            })
            .collect();
        assert_eq!(mean_speed(&still, None, 1e-3).unwrap(), 0.0);
        assert!(matches!(
            mean_speed(&still[..1], None, 1e-3),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn great_circle_speed_is_constant() {
        use crate::evolution::{evolve_normalized, StepControl};
        let rho0 = DensityMatrix::from_pure(&ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).unwrap();
        let traj = evolve_normalized(&rho0, &pauli::z(), &StepControl::new(1e-3, 1.0, 1).unwrap())
            .unwrap();
        let v = step_speeds(&traj).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(var.sqrt() / mean < 1e-3);
        // half the Bloch angular velocity of 2
        assert!((mean - 1.0).abs() < 1e-3);
    }

    #[test]
    fn partial_trace_examples() {
        let psi = ket(0.6, 0.8);
        let anc = ket(0.0, 1.0);
        let r = partial_trace_ancilla(&psi.kron(&anc), 2, 2).unwrap();
        assert!((&r - &proj(&psi)).max_abs() < 1e-15);

        let bell = CVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        let r = partial_trace_ancilla(&bell, 2, 2).unwrap();
        assert!((&r - &CMatrix::from_real_diagonal(&[0.5, 0.5])).max_abs() < 1e-15);
        assert!(matches!(
            partial_trace_ancilla(&bell, 3, 2),
            Err(Error::Dimension(_))
        ));

        let full = proj(&bell);
        assert!((&partial_trace_ancilla_dm(&full, 2, 2).unwrap() - &r).max_abs() < 1e-15);
    }

    #[test]
    fn eigenstate_prob_examples() {
        let p =
            eigenstate_probs(&ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2), &CMatrix::identity(2)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert_eq!(
            eigenstate_probs(&ket(1.0, 0.0), &CMatrix::identity(2)).unwrap(),
            vec![1.0, 0.0]
        );
    }

    fn random_state(parts: &[f64]) -> CVector {
        let n = parts.len() / 2;
        CVector::from_vec(
            (0..n)
                .map(|k| C64::new(parts[2 * k], parts[2 * k + 1]))
                .collect(),
        )
        .normalized()
        .unwrap_or_else(|_| CVector::basis(n, 0))
    }

    proptest! {
        #[test]
        fn schmidt_symmetry(parts in prop::collection::vec(-1.0f64..1.0, 16)) {
            let psi = random_state(&parts);
            let sa = entropy(&partial_trace_ancilla(&psi, 2, 4).unwrap()).unwrap();
            let ss = entropy(&partial_trace_system(&psi, 2, 4).unwrap()).unwrap();
            prop_assert!((sa - ss).abs() < 1e-8);
            prop_assert!((0.0..=LN_2 + 1e-10).contains(&sa));
        }

        #[test]
        fn triangle_inequality(a in prop::collection::vec(-1.0f64..1.0, 4),
                               b in prop::collection::vec(-1.0f64..1.0, 4),
                               c in prop::collection::vec(-1.0f64..1.0, 4)) {
            let (ra, rb, rc) = (proj(&random_state(&a)), proj(&random_state(&b)), proj(&random_state(&c)));
            let ab = fs_distance(&ra, &rb);
            let bc = fs_distance(&rb, &rc);
            let ac = fs_distance(&ra, &rc);
            prop_assert!(ac <= ab + bc + 1e-8);
            prop_assert!((ab - fs_distance(&rb, &ra)).abs() < 1e-12);
        }

        #[test]
        fn probs_sum_to_one(parts in prop::collection::vec(-1.0f64..1.0, 6)) {
            let psi = random_state(&parts);
            let basis = herm_eig(&CMatrix::from_fn(3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64))).unwrap().vectors;
            let p = eigenstate_probs(&psi, &basis).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn pure_bloch_vectors_are_unit(parts in prop::collection::vec(-1.0f64..1.0, 4)) {
            let b = bloch_of_state(&random_state(&parts)).unwrap();
            prop_assert!((b.length() - 1.0).abs() < 1e-8);
        }
    }
}
