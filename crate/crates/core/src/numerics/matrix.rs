use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{cabs, Real};
use crate::error::{Error, Result};

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<R> {
    dim: usize,
    data: Vec<Complex<R>>,
}

/// Dense complex column vector.
#[derive(Clone, PartialEq)]
pub struct Vector<R> {
    data: Vec<Complex<R>>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a
    /// positive perfect square.
    pub fn from_row_major(data: Vec<Complex<R>>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != data.len() {
            return Err(Error::Dimension(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex<R>>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension(
                "rows do not form a non-empty square matrix".into(),
            ));
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex<R>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[R]) -> Self {
        let d: Vec<_> = diag.iter().map(|&x| Complex::new(x, R::zero())).collect();
        Self::from_diagonal(&d)
    }

    /// |v⟩⟨w|
    pub fn outer(v: &Vector<R>, w: &Vector<R>) -> Self {
        assert_eq!(v.dim(), w.dim());
        Self::from_fn(v.dim(), |i, j| v[i] * w[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<R>] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex<R>> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<R> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: R) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &Vector<R>) -> Vector<R> {
        assert_eq!(self.dim, v.dim(), "matvec dimension mismatch");
        let n = self.dim;
        let data = (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v.as_slice())
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect();
        Vector { data }
    }

    /// A·B − B·A
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    /// A·B + B·A
    pub fn anticommutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) + &rhs.matmul(self)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (n, m) = (self.dim, rhs.dim);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * rhs[(i % m, j % m)])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, &z| acc.max(cabs(z)))
    }

    pub fn frobenius_norm(&self) -> R {
        self.data
            .iter()
            .fold(R::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> R {
        (0..self.dim)
            .map(|j| (0..self.dim).fold(R::zero(), |acc, i| acc + cabs(self[(i, j)])))
            .fold(R::zero(), R::max)
    }

    pub fn off_diagonal_max(&self) -> R {
        let mut m = R::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    m = m.max(cabs(self[(i, j)]));
                }
            }
        }
        m
    }

    /// ‖A − A†‖_max
    pub fn hermiticity_defect(&self) -> R {
        let mut m = R::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                m = m.max(cabs(self[(i, j)] - self[(j, i)].conj()));
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: R) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_diagonal(&self, tol: R) -> bool {
        self.off_diagonal_max() <= tol
    }

    /// True when the Hermitian part is PSD, i.e. the smallest eigenvalue is
    /// `≥ −tol`. Non-Hermitian input is never PSD.
    pub fn is_psd(&self, tol: R) -> bool {
        if !self.is_hermitian(R::gate_tol()) {
            return false;
        }
        match super::herm_eig(self) {
            Ok(e) => e.values.first().is_none_or(|&v| v >= -tol),
            Err(_) => false,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// (A + A†)/2
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(R::lit(0.5))
    }

    /// (A − A†)/(2i), so that A = herm + i·antiherm_part.
    pub fn antihermitian_part(&self) -> Self {
        (self - &self.adjoint()).scale(Complex::new(R::zero(), R::lit(-0.5)))
    }

    /// Symmetrizes an almost-Hermitian matrix in place of its round-off.
    pub fn hermitize(&self) -> Self {
        self.hermitian_part()
    }

    /// Extracts the `sub`-dimensional block at block position `(bi, bj)`.
    pub fn block(&self, sub: usize, bi: usize, bj: usize) -> Self {
        Self::from_fn(sub, |i, j| self[(bi * sub + i, bj * sub + j)])
    }
}

impl<R: Real> Index<(usize, usize)> for Matrix<R> {
    type Output = Complex<R>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.dim + j]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for Matrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i * self.dim + j]
    }
}

impl<R: Real> Add for &Matrix<R> {
    type Output = Matrix<R>;
    fn add(self, rhs: Self) -> Matrix<R> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<R: Real> Sub for &Matrix<R> {
    type Output = Matrix<R>;
    fn sub(self, rhs: Self) -> Matrix<R> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl<R: Real> Mul for &Matrix<R> {
    type Output = Matrix<R>;
    fn mul(self, rhs: Self) -> Matrix<R> {
        self.matmul(rhs)
    }
}

impl<R: Real> Neg for &Matrix<R> {
    type Output = Matrix<R>;
    fn neg(self) -> Matrix<R> {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| -z).collect(),
        }
    }
}

impl<R: Real> AddAssign<&Matrix<R>> for Matrix<R> {
    fn add_assign(&mut self, rhs: &Matrix<R>) {
        assert_eq!(self.dim, rhs.dim);
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<R: Real> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<R: Real> Vector<R> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be positive");
        Self {
            data: vec![Complex::zero(); dim],
        }
    }

    pub fn from_vec(data: Vec<Complex<R>>) -> Self {
        assert!(!data.is_empty(), "vector dimension must be positive");
        Self { data }
    }

    pub fn from_real(data: &[R]) -> Self {
        Self::from_vec(data.iter().map(|&x| Complex::new(x, R::zero())).collect())
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = Complex::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex<R>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<R>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<R>> {
        self.data
    }

    /// ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Complex<R> {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .fold(Complex::zero(), |acc, (&a, &b)| acc + a.conj() * b)
    }

    pub fn norm(&self) -> R {
        self.data
            .iter()
            .fold(R::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        Self {
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > R::zero()) || !n.is_finite() {
            return Err(Error::InvalidInput(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(self.scale(Complex::new(R::one() / n, R::zero())))
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let m = rhs.dim();
        Self {
            data: (0..self.dim() * m)
                .map(|i| self.data[i / m] * rhs.data[i % m])
                .collect(),
        }
    }

    pub fn max_abs(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, &z| acc.max(cabs(z)))
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Distance to `other` after removing the relative global phase.
    pub fn phase_aligned_distance(&self, other: &Self) -> R {
        let ov = other.inner(self);
        let phase = if cabs(ov) > R::zero() {
            ov / Complex::new(cabs(ov), R::zero())
        } else {
            Complex::one()
        };
        let aligned = other.scale(phase);
        (self - &aligned).norm()
    }
}

impl<R: Real> Index<usize> for Vector<R> {
    type Output = Complex<R>;
    fn index(&self, i: usize) -> &Complex<R> {
        &self.data[i]
    }
}

impl<R: Real> IndexMut<usize> for Vector<R> {
    fn index_mut(&mut self, i: usize) -> &mut Complex<R> {
        &mut self.data[i]
    }
}

impl<R: Real> Add for &Vector<R> {
    type Output = Vector<R>;
    fn add(self, rhs: Self) -> Vector<R> {
        assert_eq!(self.dim(), rhs.dim());
        Vector {
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<R: Real> Sub for &Vector<R> {
    type Output = Vector<R>;
    fn sub(self, rhs: Self) -> Vector<R> {
        assert_eq!(self.dim(), rhs.dim());
        Vector {
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl<R: Real> fmt::Debug for Vector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector[")?;
        for z in &self.data {
            write!(f, " {:+.6e}{:+.6e}i", z.re, z.im)?;
        }
        write!(f, " ]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn kron_matches_block_layout() {
        let a = Matrix::from_rows(&[
            vec![C::new(1.0, 0.0), C::new(2.0, 0.0)],
            vec![C::new(3.0, 0.0), C::new(4.0, 0.0)],
        ])
        .unwrap();
        let i2 = Matrix::<f64>::identity(2);
        let k = a.kron(&i2);
        assert_eq!(k.dim(), 4);
        assert_eq!(k[(0, 2)], C::new(2.0, 0.0));
        assert_eq!(k[(1, 3)], C::new(2.0, 0.0));
        assert_eq!(k[(0, 1)], C::new(0.0, 0.0));
        assert_eq!(k.block(2, 1, 0), Matrix::identity(2).scale_real(3.0));
    }

    #[test]
    fn parts_reassemble() {
        let m = Matrix::from_rows(&[
            vec![C::new(1.0, 2.0), C::new(0.5, -1.0)],
            vec![C::new(3.0, 0.0), C::new(-2.0, 0.3)],
        ])
        .unwrap();
        let h = m.hermitian_part();
        let k = m.antihermitian_part();
        assert!(h.is_hermitian(1e-15) && k.is_hermitian(1e-15));
        let back = &h + &k.scale(C::i());
        assert!((&back - &m).max_abs() < 1e-15);
    }

    #[test]
    fn rejects_non_square() {
        assert!(Matrix::<f64>::from_row_major(vec![C::new(1.0, 0.0); 3]).is_err());
    }
}
