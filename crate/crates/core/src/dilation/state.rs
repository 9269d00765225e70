use crate::error::{Error, Result};
use crate::observables::partial_trace_ancilla;
use crate::{CMatrix, CVector, C64};

const EMPTY_BRANCH: f64 = 1e-12;

/// System-ancilla pure state, stored in the ancilla pointer basis with the
/// full index `s·n_anc + a`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    psi: CVector,
    n_sys: usize,
    n_anc: usize,
}

impl FullState {
    pub fn new(psi: CVector, n_sys: usize, n_anc: usize) -> Result<Self> {
        if n_sys == 0 || n_anc == 0 || psi.dim() != n_sys * n_anc {
            return Err(Error::Dimension(format!(
                "{} amplitudes do not factor as {n_sys} x {n_anc}",
                psi.dim()
            )));
        }
        Ok(Self { psi, n_sys, n_anc })
    }

    /// Places `branches[a]` on pointer `a`. No normalization.
    pub fn from_branches(branches: &[CVector]) -> Result<Self> {
        let n_anc = branches.len();
        let n_sys = branches.first().map(|b| b.dim()).unwrap_or(0);
        if n_anc == 0 || branches.iter().any(|b| b.dim() != n_sys) {
            return Err(Error::Dimension(
                "branches must be non-empty and share a dimension".into(),
            ));
        }
        let mut v = vec![C64::new(0.0, 0.0); n_sys * n_anc];
        for (a, b) in branches.iter().enumerate() {
            for s in 0..n_sys {
                v[s * n_anc + a] = b[s];
            }
        }
        Self::new(CVector::from_vec(v), n_sys, n_anc)
    }

    /// `Σ_k ψ_k|2k⟩ + η_k ψ_k|2k+1⟩`, normalized as a whole.
    pub fn embed_pairs(pairs: &[(CVector, &CMatrix)]) -> Result<Self> {
        let mut branches = Vec::with_capacity(2 * pairs.len());
        for (psi, eta) in pairs {
            if eta.dim() != psi.dim() {
                return Err(Error::Dimension(format!(
                    "η is {}-dim, ψ is {}-dim",
                    eta.dim(),
                    psi.dim()
                )));
            }
            branches.push(psi.clone());
            branches.push(eta.apply(psi));
        }
        let raw = Self::from_branches(&branches)?;
        Ok(Self {
            psi: raw.psi.normalized()?,
            ..raw
        })
    }

    pub fn vector(&self) -> &CVector {
        &self.psi
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn n_anc(&self) -> usize {
        self.n_anc
    }

    pub fn norm(&self) -> f64 {
        self.psi.norm()
    }

    pub(crate) fn with_vector(&self, psi: CVector) -> Self {
        Self {
            psi,
            n_sys: self.n_sys,
            n_anc: self.n_anc,
        }
    }

    /// Pointer-basis labels: σ_y eigenstates for two and four pointers,
    /// pair/branch names otherwise.
    pub fn labels(&self) -> Vec<String> {
        match self.n_anc {
            2 => vec!["|-y>".into(), "|+y>".into()],
            4 => vec![
                "|-y,-y>".into(),
                "|+y,-y>".into(),
                "|-y,+y>".into(),
                "|+y,+y>".into(),
            ],
            n => (0..n)
                .map(|a| format!("pair{}:{}", a / 2, if a % 2 == 0 { "psi" } else { "dump" }))
                .collect(),
        }
    }

    /// Unnormalized system vector on pointer `a`.
    pub fn branch(&self, a: usize) -> Result<CVector> {
        if a >= self.n_anc {
            return Err(Error::Range {
                index: a,
                max: self.n_anc - 1,
            });
        }
        Ok(CVector::from_vec(
            (0..self.n_sys)
                .map(|s| self.psi[s * self.n_anc + a])
                .collect(),
        ))
    }

    /// Reduced system state `Tr_a |Ψ⟩⟨Ψ| / ‖Ψ‖²`.
    pub fn reduced_system(&self) -> Result<CMatrix> {
        let n2 = self.psi.norm().powi(2);
        Ok(partial_trace_ancilla(&self.psi, self.n_sys, self.n_anc)?.scale_real(1.0 / n2))
    }

    /// The same state with the ancilla expanded in the computational basis,
    /// using `|−⟩_y = (i, 1)/√2` and `|+⟩_y = (1, i)/√2`; for four pointers,
    /// pointer `k` is `|bit0(k)⟩_y ⊗ |bit1(k)⟩_y`.
    pub fn to_computational(&self) -> Result<CVector> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = [
            [C64::new(0.0, h), C64::new(h, 0.0)],
            [C64::new(h, 0.0), C64::new(0.0, h)],
        ];
        let change = match self.n_anc {
            2 => CMatrix::from_fn(2, |c, a| v[c][a]),
            4 => CMatrix::from_fn(4, |c, k| v[c / 2][k & 1] * v[c % 2][k >> 1]),
            n => {
                return Err(Error::UnsupportedForm(format!(
                    "no computational ancilla basis for {n} pointers"
                )))
            }
        };
        let full = CMatrix::identity(self.n_sys).kron(&change);
        Ok(full.apply(&self.psi))
    }
}

/// Normalized system vector paired with pointer `anc_index` (0-based).
pub fn project_postselect(state: &FullState, anc_index: usize) -> Result<CVector> {
    let b = state.branch(anc_index)?;
    let norm = b.norm();
    if !(norm > EMPTY_BRANCH) {
        return Err(Error::EmptyBranch { norm });
    }
    Ok(b.scale(C64::new(1.0 / norm, 0.0)))
}

/// Keeps the pointers in `indices`, zeroes the rest and renormalizes.
pub fn project_measurement(state: &FullState, indices: &[usize]) -> Result<FullState> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= state.n_anc) {
        return Err(Error::Range {
            index: bad,
            max: state.n_anc - 1,
        });
    }
    let mut v = state.psi.clone();
    for (idx, z) in v.as_mut_slice().iter_mut().enumerate() {
        if !indices.contains(&(idx % state.n_anc)) {
            *z = C64::new(0.0, 0.0);
        }
    }
    let norm = v.norm();
    if !(norm > EMPTY_BRANCH) {
        return Err(Error::EmptyBranch { norm });
    }
    Ok(state.with_vector(v.scale(C64::new(1.0 / norm, 0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli;

    fn ket(a: f64, b: f64) -> CVector {
        CVector::from_real(&[a, b])
    }

    #[test]
    fn product_state_postselects_exactly() {
        let psi = ket(0.6, 0.8);
        let s = FullState::from_branches(&[psi.clone(), CVector::zeros(2)]).unwrap();
        assert_eq!(project_postselect(&s, 0).unwrap(), psi);
        assert!(matches!(
            project_postselect(&s, 1),
            Err(Error::EmptyBranch { .. })
        ));
        assert!(matches!(
            project_postselect(&s, 2),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn embedding_normalizes_with_the_metric() {
        let psi = ket(0.6, 0.8);
        let eta = CMatrix::from_real_diagonal(&[0.5, 2.0]);
        let s = FullState::embed_pairs(&[(psi.clone(), &eta)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        // ‖Ψ‖² before normalization is ⟨ψ|M|ψ⟩
        let m = &eta.matmul(&eta) + &CMatrix::identity(2);
        let expected = m.apply(&psi).inner(&psi).re.sqrt();
        let b0 = s.branch(0).unwrap();
        assert!((b0[0].re - 0.6 / expected).abs() < 1e-15);
    }

    #[test]
    fn measurement_projection_onto_all_pointers_is_identity() {
        let v = CVector::from_vec((0..8).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect())
            .normalized()
            .unwrap();
        let s = FullState::new(v, 2, 4).unwrap();
        let p = project_measurement(&s, &[0, 1, 2, 3]).unwrap();
        assert!((p.vector() - s.vector()).max_abs() < 1e-12);
        let q = project_measurement(&s, &[0, 2]).unwrap();
        assert_eq!(q.branch(1).unwrap().max_abs(), 0.0);
        assert!((q.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn computational_change_of_basis_is_unitary() {
        let v = CVector::from_vec((0..8).map(|k| C64::new(k as f64, 2.0 - k as f64)).collect())
            .normalized()
            .unwrap();
        let s = FullState::new(v, 2, 4).unwrap();
        assert!((s.to_computational().unwrap().norm() - 1.0).abs() < 1e-14);
        // pointer |−⟩_y alone is the σ_y eigenvector with eigenvalue −1
        let one = FullState::from_branches(&[ket(1.0, 0.0), CVector::zeros(2)]).unwrap();
        let comp = one.to_computational().unwrap();
        let anc = CVector::from_vec(vec![comp[0], comp[1]]);
        let sy = pauli::y().apply(&anc);
        assert!((&sy + &anc).max_abs() < 1e-15);
        assert!(FullState::new(CVector::zeros(12), 2, 6)
            .unwrap()
            .to_computational()
            .is_err());
    }

    #[test]
    fn labels_follow_pointer_order() {
        let s = FullState::new(CVector::zeros(8), 2, 4).unwrap();
        assert_eq!(s.labels()[1], "|+y,-y>");
        let s = FullState::new(CVector::zeros(18), 3, 6).unwrap();
        assert_eq!(s.labels()[3], "pair1:dump");
    }
}
