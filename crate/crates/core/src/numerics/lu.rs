use num_complex::Complex;
use num_traits::Zero;

use super::{cabs, to_f64, Matrix, Real};
use crate::error::{Error, Result};

/// Condition-number ceiling for [`inverse`].
const MAX_CONDITION: f64 = 1e12;

/// LU factorization with partial pivoting, `P·A = L·U`.
pub struct Lu<R> {
    lu: Matrix<R>,
    perm: Vec<usize>,
    sign: R,
    singular: bool,
}

impl<R: Real> Lu<R> {
    pub fn new(a: &Matrix<R>) -> Self {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = R::one();
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, cabs(lu[(i, k)])))
                    .fold(
                        (k, R::zero()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pmax == R::zero() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Self {
            lu,
            perm,
            sign,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> Complex<R> {
        if self.singular {
            return Complex::zero();
        }
        let n = self.lu.dim();
        (0..n).fold(Complex::new(self.sign, R::zero()), |acc, i| {
            acc * self.lu[(i, i)]
        })
    }

    /// Solves `A·X = B` column by column.
    pub fn solve(&self, b: &Matrix<R>) -> Result<Matrix<R>> {
        if self.singular {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        let n = self.lu.dim();
        let mut x = Matrix::zeros(n);
        for col in 0..n {
            let mut y: Vec<Complex<R>> = (0..n).map(|i| b[(self.perm[i], col)]).collect();
            for i in 0..n {
                for k in 0..i {
                    let l = self.lu[(i, k)];
                    let yk = y[k];
                    y[i] -= l * yk;
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let u = self.lu[(i, k)];
                    let yk = y[k];
                    y[i] -= u * yk;
                }
                y[i] /= self.lu[(i, i)];
            }
            for i in 0..n {
                x[(i, col)] = y[i];
            }
        }
        Ok(x)
    }
}

pub fn solve<R: Real>(a: &Matrix<R>, b: &Matrix<R>) -> Result<Matrix<R>> {
    Lu::new(a).solve(b)
}

pub fn determinant<R: Real>(a: &Matrix<R>) -> Complex<R> {
    Lu::new(a).determinant()
}

/// Matrix inverse. Fails when the 1-norm condition estimate reaches 1e12.
pub fn inverse<R: Real>(a: &Matrix<R>) -> Result<Matrix<R>> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("inverse of a non-finite matrix".into()));
    }
    let lu = Lu::new(a);
    if lu.is_singular() {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    let inv = lu.solve(&Matrix::identity(a.dim()))?;
    let condition = to_f64(a.norm_one()) * to_f64(inv.norm_one());
    if !condition.is_finite() || condition >= MAX_CONDITION {
        return Err(Error::Singular { condition });
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_of_identity() {
        let i = Matrix::<f64>::identity(3);
        assert!((&inverse(&i).unwrap() - &i).max_abs() == 0.0);
    }

    #[test]
    fn inverse_of_diagonal() {
        let a = Matrix::<f64>::from_real_diagonal(&[2.0, 4.0]);
        let inv = inverse(&a).unwrap();
        assert_eq!(inv, Matrix::from_real_diagonal(&[0.5, 0.25]));
    }

    #[test]
    fn multiply_back_random_well_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            // diagonally dominant ⇒ well conditioned
            let a = Matrix::from_fn(4, |i, j| {
                let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if i == j {
                    z + C::new(6.0, 0.0)
                } else {
                    z
                }
            });
            let inv = inverse(&a).unwrap();
            let err = (&a.matmul(&inv) - &Matrix::identity(4)).max_abs();
            assert!(err <= 1e-10, "A·A⁻¹ − I = {err}");
        }
    }

    #[test]
    fn singular_reports_condition() {
        let a = Matrix::from_rows(&[
            vec![C::new(1.0, 0.0), C::new(2.0, 0.0)],
            vec![C::new(2.0, 0.0), C::new(4.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(inverse(&a), Err(Error::Singular { .. })));
        let nearly = Matrix::<f64>::from_real_diagonal(&[1.0, 1e-14]);
        match inverse(&nearly) {
            Err(Error::Singular { condition }) => assert!(condition >= 1e12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn determinant_of_triangular() {
        let a = Matrix::from_rows(&[
            vec![C::new(2.0, 0.0), C::new(5.0, 1.0)],
            vec![C::new(0.0, 0.0), C::new(0.0, 3.0)],
        ])
        .unwrap();
        assert!((determinant(&a) - C::new(0.0, 6.0)).norm() < 1e-15);
    }
}
