use super::metric::MetricFrame;
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

const HERMITIAN_TOL: f64 = 1e-10;
const COMMUTE_TOL: f64 = 1e-8;

/// `H_sa = Σ_{ij} H^{(ij)} ⊗ |i⟩⟨j|` over `n_anc` ancilla pointer states.
///
/// The assembled matrix uses the full index `s·n_anc + a`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockHamiltonian {
    n_sys: usize,
    n_anc: usize,
    blocks: Vec<CMatrix>,
}

impl BlockHamiltonian {
    pub fn zeros(n_sys: usize, n_anc: usize) -> Self {
        Self {
            n_sys,
            n_anc,
            blocks: vec![CMatrix::zeros(n_sys); n_anc * n_anc],
        }
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn n_anc(&self) -> usize {
        self.n_anc
    }

    pub fn dim(&self) -> usize {
        self.n_sys * self.n_anc
    }

    pub fn block(&self, i: usize, j: usize) -> &CMatrix {
        &self.blocks[i * self.n_anc + j]
    }

    pub fn set(&mut self, i: usize, j: usize, b: CMatrix) -> Result<()> {
        if i >= self.n_anc || j >= self.n_anc {
            return Err(Error::Range {
                index: i.max(j),
                max: self.n_anc - 1,
            });
        }
        if b.dim() != self.n_sys {
            return Err(Error::Dimension(format!(
                "block is {}-dim, expected {}",
                b.dim(),
                self.n_sys
            )));
        }
        self.blocks[i * self.n_anc + j] = b;
        Ok(())
    }

    /// `max_{ij} ‖H^{(ij)†} − H^{(ji)}‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_anc {
            for j in i..self.n_anc {
                worst = worst.max((&self.block(i, j).adjoint() - self.block(j, i)).max_abs());
            }
        }
        worst
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let d = self.hermiticity_defect();
        if !(d <= HERMITIAN_TOL) {
            return Err(Error::InternalConsistency(format!(
                "assembled H_sa is not Hermitian (defect {d:.3e})"
            )));
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> CMatrix {
        let (ns, na) = (self.n_sys, self.n_anc);
        CMatrix::from_fn(ns * na, |r, c| self.block(r % na, c % na)[(r / na, c / na)])
    }

    pub fn from_matrix(m: &CMatrix, n_sys: usize, n_anc: usize) -> Result<Self> {
        if m.dim() != n_sys * n_anc {
            return Err(Error::Dimension(format!(
                "{}-dim matrix does not factor as {n_sys} x {n_anc}",
                m.dim()
            )));
        }
        let mut out = Self::zeros(n_sys, n_anc);
        for i in 0..n_anc {
            for j in 0..n_anc {
                out.blocks[i * n_anc + j] =
                    CMatrix::from_fn(n_sys, |s, t| m[(s * n_anc + i, t * n_anc + j)]);
            }
        }
        Ok(out)
    }
}

fn check_commuting(h: &CMatrix, frame: &MetricFrame) -> Result<()> {
    let scale = h.max_abs().max(1.0) * frame.m.max_abs().max(1.0);
    let worst = h
        .commutator(&frame.m)
        .max_abs()
        .max(h.commutator(&frame.eta).max_abs() / frame.m.max_abs().sqrt().max(1.0));
    if worst > COMMUTE_TOL * scale {
        return Err(Error::UnsupportedForm(format!(
            "H, M and η do not commute (defect {worst:.3e}); only the commuting regime is supported"
        )));
    }
    Ok(())
}

/// `A = (H† + H)/2`, `B = ((H† − H)/2i)·η⁻¹` in the commuting regime.
pub fn compute_ab(h: &CMatrix, frame: &MetricFrame) -> Result<(CMatrix, CMatrix)> {
    if h.dim() != frame.m.dim() {
        return Err(Error::Dimension(format!(
            "H is {}-dim, M is {}-dim",
            h.dim(),
            frame.m.dim()
        )));
    }
    check_commuting(h, frame)?;
    let a = h.hermitian_part();
    let b = (-&h.antihermitian_part())
        .matmul(&frame.eta_inverse()?)
        .hermitize();
    Ok((a, b))
}

/// The general expressions
/// `A = {H + (iη̇ + ηH)η}M⁻¹` and `B = i[Hη − ηH − iη̇]M⁻¹`
/// for a Hermitian `η` with time derivative `eta_dot`.
pub fn compute_ab_general(
    h: &CMatrix,
    frame: &MetricFrame,
    eta_dot: &CMatrix,
) -> Result<(CMatrix, CMatrix)> {
    if h.dim() != frame.m.dim() || eta_dot.dim() != h.dim() {
        return Err(Error::Dimension(
            "H, M and dη/dt must share a dimension".into(),
        ));
    }
    let i = C64::new(0.0, 1.0);
    let eta = &frame.eta;
    let m_inv = frame.m_inverse();
    let inner = &eta_dot.scale(i) + &eta.matmul(h);
    let a = (h + &inner.matmul(eta)).matmul(&m_inv);
    let b = (&(&h.matmul(eta) - &eta.matmul(h)) - &eta_dot.scale(i))
        .matmul(&m_inv)
        .scale(i);
    Ok((a, b))
}

fn check_ab(a: &CMatrix, b: &CMatrix) -> Result<()> {
    for m in [a, b] {
        if !m.is_hermitian(HERMITIAN_TOL * m.max_abs().max(1.0)) {
            return Err(Error::NotHermitian {
                norm: m.hermiticity_defect(),
            });
        }
    }
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "A is {}-dim, B is {}-dim",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Pointer-basis blocks `(0,0) = (1,1) = A`, `(0,1) = −iB`, `(1,0) = iB`.
///
/// With pointer states `|−⟩_y = (i, 1)/√2` and `|+⟩_y = (1, i)/√2` this is
/// `A ⊗ 𝕀 + B ⊗ σ_z` in the computational ancilla basis.
pub fn assemble_4dim(a: &CMatrix, b: &CMatrix) -> Result<BlockHamiltonian> {
    check_ab(a, b)?;
    let mut out = BlockHamiltonian::zeros(a.dim(), 2);
    set_pair(&mut out, 0, a, b);
    Ok(out)
}

fn set_pair(out: &mut BlockHamiltonian, base: usize, a: &CMatrix, b: &CMatrix) {
    let n = out.n_anc;
    let i = C64::new(0.0, 1.0);
    out.blocks[base * n + base] = a.clone();
    out.blocks[(base + 1) * n + base + 1] = a.clone();
    out.blocks[base * n + base + 1] = b.scale(-i);
    out.blocks[(base + 1) * n + base] = b.scale(i);
}

/// Eight-dimensional dilation of the pair `(H_−, H_+)` with ancilla states
/// `|0⟩..|3⟩ = |−−⟩, |+−⟩, |−+⟩, |++⟩`. Pointers 0 and 1 carry `ψ` and `ηψ`,
/// pointers 2 and 3 carry `χ` and `ζχ`; the cross blocks cancel every
/// coupling between the two pairs.
pub fn assemble_8dim(
    h_minus: &CMatrix,
    h_plus: &CMatrix,
    frame_m: &MetricFrame,
    frame_n: &MetricFrame,
) -> Result<BlockHamiltonian> {
    if h_minus.dim() != h_plus.dim() {
        return Err(Error::Dimension(
            "H_- and H_+ must share a dimension".into(),
        ));
    }
    let (am, bm) = compute_ab(h_minus, frame_m)?;
    let (ap, bp) = compute_ab(h_plus, frame_n)?;
    let eta = &frame_m.eta;
    let i = C64::new(0.0, 1.0);
    let n = h_minus.dim();
    let mut out = BlockHamiltonian::zeros(n, 4);
    set_pair(&mut out, 0, &am, &bm);
    set_pair(&mut out, 2, &ap, &bp);
    let hp_dag = h_plus.adjoint();
    let cross = [
        (1, 3, bp.scale(-i)),
        (3, 1, bp.scale(i)),
        (1, 2, &ap - h_plus),
        (2, 1, &ap - &hp_dag),
        (0, 2, eta.matmul(&(h_plus - &ap))),
        (2, 0, (&hp_dag - &ap).matmul(eta)),
        (3, 0, bp.matmul(eta).scale(-i)),
        (0, 3, eta.matmul(&bp).scale(i)),
    ];
    for (r, c, b) in cross {
        out.set(r, c, b)?;
    }
    out.check_hermitian()?;
    Ok(out)
}

/// Direct-sum dilation of `N` sources: pointer pair `(2k, 2k+1)` carries the
/// four-dimensional blocks of source `k`; all other blocks vanish.
pub fn assemble_general(hs: &[CMatrix], frames: &[MetricFrame]) -> Result<BlockHamiltonian> {
    if hs.is_empty() || hs.len() != frames.len() {
        return Err(Error::InvalidInput(format!(
            "{} sources but {} frames",
            hs.len(),
            frames.len()
        )));
    }
    let n = hs[0].dim();
    let mut out = BlockHamiltonian::zeros(n, 2 * hs.len());
    for (k, (h, f)) in hs.iter().zip(frames).enumerate() {
        if h.dim() != n {
            return Err(Error::Dimension(
                "all sources must share a dimension".into(),
            ));
        }
        let (a, b) = compute_ab(h, f)?;
        set_pair(&mut out, 2 * k, &a, &b);
    }
    out.check_hermitian()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::metric::UnitaryChoice;
    use super::*;
    use crate::numerics::herm_eig;
    use crate::{pauli, CVector};

    fn frame(m: &[f64]) -> MetricFrame {
        MetricFrame::from_metric(0.0, CMatrix::from_real_diagonal(m), UnitaryChoice::Identity)
            .unwrap()
    }

    #[test]
    fn hermitian_source_gives_zero_b() {
        let (a, b) = compute_ab(&pauli::z(), &frame(&[1.5, 1.5])).unwrap();
        assert_eq!(a, pauli::z());
        assert_eq!(b.max_abs(), 0.0);
    }

    #[test]
    fn case_c_type_entries() {
        let gamma = 0.7;
        let m = [1.0005, 1.0005 * 3.0];
        let h = CMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, -gamma)]);
        let (a, b) = compute_ab(&h, &frame(&m)).unwrap();
        assert_eq!(a, pauli::z());
        assert!(b.is_diagonal(0.0) && b.is_hermitian(0.0));
        assert_eq!(b[(0, 0)], C64::new(0.0, 0.0));
        assert!((b[(1, 1)].re - gamma / (m[1] - 1.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn general_formulas_agree_in_commuting_regime() {
        // M = m₀ diag(1, e^{2γt}) at t = 0.4, with η̇ from the chain rule
        let (m0, gamma, t) = (1.0005f64, 1.1f64, 0.4f64);
        let m1 = m0 * (2.0 * gamma * t).exp();
        let f = frame(&[m0, m1]);
        let eta_dot = CMatrix::from_real_diagonal(&[0.0, gamma * m1 / (m1 - 1.0).sqrt()]);
        let h = CMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, -gamma)]);
        let (a, b) = compute_ab(&h, &f).unwrap();
        let (ag, bg) = compute_ab_general(&h, &f, &eta_dot).unwrap();
        assert!((&a - &ag).max_abs() < 1e-12);
        assert!((&b - &bg).max_abs() < 1e-12);
    }

    #[test]
    fn non_commuting_input_is_rejected() {
        let f = frame(&[1.2, 2.0]);
        assert!(matches!(
            compute_ab(&pauli::x(), &f),
            Err(Error::UnsupportedForm(_))
        ));
    }

    #[test]
    fn four_dim_is_sigma_z_form_in_computational_basis() {
        let a = pauli::z();
        let b = CMatrix::from_real_diagonal(&[0.0, -0.3]);
        let hsa = assemble_4dim(&a, &b).unwrap();
        // V columns are |−⟩_y, |+⟩_y
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CMatrix::from_rows(&[
            vec![C64::new(0.0, s), C64::new(s, 0.0)],
            vec![C64::new(s, 0.0), C64::new(0.0, s)],
        ])
        .unwrap();
        let big_v = CMatrix::identity(2).kron(&v);
        let comp = big_v.matmul(&hsa.to_matrix()).matmul(&big_v.adjoint());
        let expected = &a.kron(&CMatrix::identity(2)) + &b.kron(&pauli::z());
        assert!((&comp - &expected).max_abs() < 1e-15);
        assert!(herm_eig(&hsa.to_matrix()).is_ok());
    }

    #[test]
    fn four_dim_rejects_non_hermitian_parts() {
        let b = CMatrix::from_diagonal(&[C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        assert!(matches!(
            assemble_4dim(&pauli::z(), &b),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn block_layout_round_trips() {
        let m = CMatrix::from_fn(6, |i, j| C64::new(i as f64, j as f64));
        let b = BlockHamiltonian::from_matrix(&m, 3, 2).unwrap();
        assert_eq!(b.to_matrix(), m);
        // block (0,1) row s, column s' is entry (2s, 2s'+1)
        assert_eq!(b.block(0, 1)[(2, 1)], m[(4, 3)]);
    }

    #[test]
    fn eight_dim_blocks_satisfy_the_pair_relations() {
        let fm = frame(&[1.0005, 2.3]);
        let fnn = frame(&[1.7, 1.0005]);
        let hm = CMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, -0.9)]);
        let hp = CMatrix::from_diagonal(&[C64::new(1.0, -0.9), C64::new(-1.0, 0.0)]);
        let h = assemble_8dim(&hm, &hp, &fm, &fnn).unwrap();
        assert!(h.hermiticity_defect() < 1e-12);
        assert_eq!(h.block(0, 0), h.block(1, 1));
        assert_eq!(h.block(2, 2), h.block(3, 3));
        assert_eq!(h.block(0, 1), &-h.block(1, 0));
        assert_eq!(h.block(2, 3), &-h.block(3, 2));
        assert_eq!(h.block(1, 3), h.block(2, 3));
        assert_eq!(h.block(1, 3), &-h.block(3, 1));
        assert_eq!(h.block(1, 2), &(h.block(3, 3) - &hp));
        assert_eq!(h.block(0, 2), &fm.eta.matmul(&(&hp - h.block(3, 3))));
        assert_eq!(h.block(3, 0), &h.block(2, 3).matmul(&fm.eta));
    }

    #[test]
    fn eight_dim_generator_decouples_the_pairs() {
        // Ψ = ψ|0⟩ + ηψ|1⟩ + χ|2⟩ + ζχ|3⟩: the ψ and χ components of H_sa Ψ
        // must be H_−ψ and H_+χ.
        let fm = frame(&[1.0005, 2.3]);
        let fnn = frame(&[1.7, 1.0005]);
        let hm = CMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, -0.9)]);
        let hp = CMatrix::from_diagonal(&[C64::new(1.0, -0.9), C64::new(-1.0, 0.0)]);
        let h = assemble_8dim(&hm, &hp, &fm, &fnn).unwrap();
        let psi = CVector::from_vec(vec![C64::new(0.3, 0.1), C64::new(-0.5, 0.7)]);
        let chi = CVector::from_vec(vec![C64::new(0.2, -0.4), C64::new(0.6, 0.2)]);
        let branches = [
            psi.clone(),
            fm.eta.apply(&psi),
            chi.clone(),
            fnn.eta.apply(&chi),
        ];
        let apply_row = |r: usize| {
            (0..4).fold(CVector::zeros(2), |acc, c| {
                &acc + &h.block(r, c).apply(&branches[c])
            })
        };
        assert!((&apply_row(0) - &hm.apply(&psi)).max_abs() < 1e-12);
        assert!((&apply_row(2) - &hp.apply(&chi)).max_abs() < 1e-12);
    }

    #[test]
    fn general_assembly_pairs() {
        let f = [
            frame(&[1.2, 1.5, 1.9]),
            frame(&[1.1, 1.1, 4.0]),
            frame(&[2.0, 1.3, 1.3]),
        ];
        let hs: Vec<CMatrix> = (0..3)
            .map(|k| {
                CMatrix::from_fn(3, |i, j| {
                    if i == j {
                        C64::new(1.0, if i == k { 0.0 } else { -0.4 })
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        let h = assemble_general(&hs, &f).unwrap();
        assert_eq!(h.dim(), 18);
        for k in 0..3 {
            assert_eq!(h.block(2 * k, 2 * k), h.block(2 * k + 1, 2 * k + 1));
            assert_eq!(h.block(2 * k, 2 * k + 1), &-h.block(2 * k + 1, 2 * k));
        }
        assert_eq!(h.block(0, 2).max_abs(), 0.0);
        assert!(h.to_matrix().is_hermitian(1e-10));
    }
}
