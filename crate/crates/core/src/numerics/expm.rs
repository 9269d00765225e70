use num_complex::Complex;

use super::{solve, Matrix, Real};
use crate::error::{Error, Result};

// Degree-13 Padé numerator coefficients (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring around a degree-13 Padé
/// approximant. Diagonal input takes an exact elementwise path.
pub fn mat_exp<R: Real>(a: &Matrix<R>) -> Result<Matrix<R>> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("mat_exp of a non-finite matrix".into()));
    }
    let n = a.dim();
    let norm = a.norm_one();
    if a.off_diagonal_max() <= R::epsilon() * R::one().max(norm) {
        let d: Vec<Complex<R>> = a.diagonal().into_iter().map(|z| z.exp()).collect();
        return Ok(Matrix::from_diagonal(&d));
    }

    let theta = R::lit(THETA13);
    let mut squarings = 0i32;
    if norm > theta {
        squarings = (norm / theta).log2().ceil().to_i32().unwrap_or(0).max(0);
    }
    let scaled = a.scale_real(R::lit(2.0).powi(-squarings));

    let b: Vec<R> = PADE13.iter().map(|&c| R::lit(c)).collect();
    let id = Matrix::identity(n);
    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let lin = |c6: R, c4: R, c2: R, c0: Option<R>| {
        let mut m = &(&a6.scale_real(c6) + &a4.scale_real(c4)) + &a2.scale_real(c2);
        if let Some(c) = c0 {
            m += &id.scale_real(c);
        }
        m
    };

    let u_inner = &a6.matmul(&lin(b[13], b[11], b[9], None)) + &lin(b[7], b[5], b[3], Some(b[1]));
    let u = scaled.matmul(&u_inner);
    let v = &a6.matmul(&lin(b[12], b[10], b[8], None)) + &lin(b[6], b[4], b[2], Some(b[0]));

    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(&q, &p)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use std::f64::consts::PI;

    fn sigma_z() -> Matrix<f64> {
        Matrix::from_real_diagonal(&[1.0, -1.0])
    }

    fn taylor(a: &Matrix<f64>, terms: usize) -> Matrix<f64> {
        let mut sum = Matrix::identity(a.dim());
        let mut term = Matrix::identity(a.dim());
        for k in 1..terms {
            term = term.matmul(a).scale_real(1.0 / k as f64);
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_gives_identity() {
        let e = mat_exp(&Matrix::<f64>::zeros(3)).unwrap();
        assert_eq!(e, Matrix::identity(3));
    }

    #[test]
    fn diagonal_phases() {
        let a = Matrix::from_diagonal(&[C::new(0.0, PI), C::new(0.0, -PI)]);
        let e = mat_exp(&a).unwrap();
        assert!((&e - &Matrix::from_real_diagonal(&[-1.0, -1.0])).max_abs() < 1e-15);
    }

    #[test]
    fn matches_taylor_oracle_on_sigma_z() {
        let a = sigma_z().scale(C::new(0.0, -0.7));
        let oracle = taylor(&a, 30);
        assert!((&mat_exp(&a).unwrap() - &oracle).max_abs() <= 1e-12);
    }

    #[test]
    fn matches_taylor_oracle_on_dense_input() {
        // non-diagonal: exercises the Padé path (and a few squarings)
        let a = Matrix::from_rows(&[
            vec![C::new(0.3, 1.0), C::new(-1.2, 0.4), C::new(0.0, 2.0)],
            vec![C::new(0.7, -0.1), C::new(-0.5, 0.0), C::new(1.1, 0.2)],
            vec![C::new(2.0, 0.0), C::new(0.4, -0.9), C::new(0.1, 0.1)],
        ])
        .unwrap();
        let oracle = taylor(&a.scale_real(1.0 / 64.0), 30);
        let mut oracle_sq = oracle;
        for _ in 0..6 {
            oracle_sq = oracle_sq.matmul(&oracle_sq);
        }
        let e = mat_exp(&a).unwrap();
        let rel = (&e - &oracle_sq).max_abs() / oracle_sq.max_abs();
        assert!(rel <= 1e-12, "relative error {rel}");
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Matrix::<f64>::zeros(2);
        a[(0, 1)] = C::new(f64::NAN, 0.0);
        assert!(matches!(mat_exp(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn single_precision_instance() {
        let a = Matrix::<f32>::from_diagonal(&[num_complex::Complex32::new(0.0, 1.0); 2]);
        let e = mat_exp(&a).unwrap();
        assert!((e[(0, 0)].re - 1f32.cos()).abs() < 1e-6);
    }
}
