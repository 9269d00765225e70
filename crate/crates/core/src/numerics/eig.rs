use num_complex::Complex;
use num_traits::{One, Zero};

use super::{cabs, to_f64, Matrix, Real};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone)]
pub struct HermEig<R> {
    /// Eigenvalues in ascending order.
    pub values: Vec<R>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: Matrix<R>,
}

impl<R: Real> std::fmt::Debug for HermEig<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HermEig")
            .field("values", &self.values)
            .field("vectors", &self.vectors)
            .finish()
    }
}

impl<R: Real> HermEig<R> {
    /// Rebuilds `V·diag(g(λ))·V†`.
    pub fn map_values(&self, g: impl Fn(R) -> R) -> Matrix<R> {
        let n = self.values.len();
        let mut out = Matrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = g(lam);
            if w == R::zero() {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn column(&self, k: usize) -> super::Vector<R> {
        super::Vector::from_vec(
            (0..self.values.len())
                .map(|i| self.vectors[(i, k)])
                .collect(),
        )
    }
}

/// Hermitian eigensolver using cyclic complex Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops below the solver
/// tolerance (relative to the matrix norm). Each eigenvector is phase-fixed
/// so that its first non-negligible component is real and positive.
pub fn herm_eig<R: Real>(h: &Matrix<R>) -> Result<HermEig<R>> {
    if !h.is_finite() {
        return Err(Error::InvalidInput(
            "herm_eig of a non-finite matrix".into(),
        ));
    }
    let defect = h.hermiticity_defect();
    if defect > R::gate_tol() * R::one().max(h.max_abs()) {
        return Err(Error::NotHermitian {
            norm: to_f64(defect),
        });
    }
    let n = h.dim();
    let mut a = h.hermitize();
    let mut v = Matrix::<R>::identity(n);
    let scale = R::one().max(a.frobenius_norm());
    let target = R::solver_tol() * scale;

    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) < target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = a[(p, q)];
                let r = cabs(z);
                if r <= R::min_positive_value() {
                    continue;
                }
                let phase = z / r; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (r + r);
                let t = theta.signum() / (theta.abs() + (theta * theta + R::one()).sqrt());
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;
                // G = [[c, s·e^{iφ}], [−s·e^{−iφ}, c]] on the (p, q) plane; A ← G†AG
                let sp = phase * s;
                let spc = phase.conj() * s;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * spc;
                    a[(k, q)] = akp * sp + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * sp;
                    a[(q, k)] = apk * spc + aqk * c;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, R::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, R::zero());
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * spc;
                    v[(k, q)] = vkp * sp + vkq * c;
                }
            }
        }
    }
    if off_norm(&a) >= target * R::lit(1e3) {
        return Err(Error::InternalConsistency(
            "Jacobi sweeps did not converge".into(),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<R> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = Matrix::zeros(n);
    let eps = R::lit(1e3) * R::epsilon();
    for (col, &k) in order.iter().enumerate() {
        let lead = (0..n)
            .map(|i| v[(i, k)])
            .find(|z| cabs(*z) > eps)
            .unwrap_or_else(Complex::one);
        let fix = lead.conj() / cabs(lead);
        for i in 0..n {
            vectors[(i, col)] = v[(i, k)] * fix;
        }
    }
    Ok(HermEig { values, vectors })
}

fn off_norm<R: Real>(a: &Matrix<R>) -> R {
    let n = a.dim();
    let mut s = R::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[−1e-12, 0)` are clamped to zero; anything more negative
/// is rejected.
pub fn psd_sqrt<R: Real>(m: &Matrix<R>) -> Result<Matrix<R>> {
    let eig = herm_eig(m)?;
    let floor = -R::solver_tol();
    if let Some(&lo) = eig.values.first() {
        if lo < floor {
            return Err(Error::NotPsd {
                eigenvalue: to_f64(lo),
            });
        }
    }
    Ok(eig.map_values(|x| x.max(R::zero()).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
        let b = Matrix::from_fn(n, |_, _| {
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        b.hermitian_part()
    }

    fn residual(h: &Matrix<f64>, e: &HermEig<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..h.dim() {
            let v = e.column(k);
            let hv = h.apply(&v);
            let lv = v.scale(C::new(e.values[k], 0.0));
            worst = worst.max((&hv - &lv).max_abs());
        }
        worst
    }

    /// det(H − λI) of a 3×3 Hermitian matrix, expanded by cofactors.
    fn char_poly_3(h: &Matrix<f64>, lam: f64) -> f64 {
        let m = |i: usize, j: usize| if i == j { h[(i, j)] - lam } else { h[(i, j)] };
        let d = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        d.re
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn pauli_spectra() {
        let sz = Matrix::<f64>::from_real_diagonal(&[1.0, -1.0]);
        let e = herm_eig(&sz).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);

        let sx = Matrix::from_rows(&[
            vec![C::new(0.0, 0.0), C::new(1.0, 0.0)],
            vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
        ])
        .unwrap();
        let e = herm_eig(&sx).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // phase-fixed: first component real positive
        assert!((e.vectors[(0, 0)] - C::new(r, 0.0)).norm() < 1e-14);
        assert!((e.vectors[(1, 0)] - C::new(-r, 0.0)).norm() < 1e-14);
        assert!((e.vectors[(0, 1)] - C::new(r, 0.0)).norm() < 1e-14);
        assert!((e.vectors[(1, 1)] - C::new(r, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn three_by_three_matches_characteristic_polynomial_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 3);
            let bound = 1.0
                + (0..3)
                    .map(|i| (0..3).map(|j| h[(i, j)].norm()).sum::<f64>())
                    .fold(0.0, f64::max);
            // bracket sign changes on a fine grid, then bisect
            let grid = 4000;
            let mut roots = Vec::new();
            let mut prev = -bound;
            for k in 1..=grid {
                let x = -bound + 2.0 * bound * k as f64 / grid as f64;
                if (char_poly_3(&h, prev) < 0.0) != (char_poly_3(&h, x) < 0.0) {
                    roots.push(bisect(|l| char_poly_3(&h, l), prev, x));
                }
                prev = x;
            }
            assert_eq!(roots.len(), 3, "expected three simple roots");
            let e = herm_eig(&h).unwrap();
            for (got, want) in e.values.iter().zip(&roots) {
                assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn residual_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 4, 8, 18] {
            let h = random_hermitian(&mut rng, n);
            let e = herm_eig(&h).unwrap();
            assert!(residual(&h, &e) <= 1e-10);
            let gram = e.vectors.adjoint().matmul(&e.vectors);
            assert!((&gram - &Matrix::identity(n)).max_abs() <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Matrix::from_rows(&[
            vec![C::new(0.0, 0.0), C::new(1.0, 0.0)],
            vec![C::new(0.0, 0.0), C::new(0.0, 0.0)],
        ])
        .unwrap();
        match herm_eig(&a) {
            Err(Error::NotHermitian { norm }) => assert!((norm - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sqrt_examples() {
        let i = Matrix::<f64>::identity(3);
        assert!((&psd_sqrt(&i).unwrap() - &i).max_abs() < 1e-15);
        let d = Matrix::<f64>::from_real_diagonal(&[4.0, 9.0]);
        assert!(
            (&psd_sqrt(&d).unwrap() - &Matrix::from_real_diagonal(&[2.0, 3.0])).max_abs() < 1e-14
        );
    }

    #[test]
    fn sqrt_of_gram_matrix_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let b = Matrix::from_fn(4, |_, _| {
                C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let m = b.adjoint().matmul(&b);
            let s = psd_sqrt(&m).unwrap();
            assert!(s.is_hermitian(1e-12));
            assert!((&s.matmul(&s) - &m).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn sqrt_rejects_negative_eigenvalue() {
        let m = Matrix::<f64>::from_real_diagonal(&[1.0, -1e-6]);
        match psd_sqrt(&m) {
            Err(Error::NotPsd { eigenvalue }) => assert!((eigenvalue + 1e-6).abs() < 1e-18),
            other => panic!("unexpected {other:?}"),
        }
        // tiny negative round-off is clamped
        let m = Matrix::<f64>::from_real_diagonal(&[1.0, -1e-13]);
        assert_eq!(psd_sqrt(&m).unwrap()[(1, 1)], C::new(0.0, 0.0));
    }
}
