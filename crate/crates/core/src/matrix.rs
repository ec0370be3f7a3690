//! Small dense row-major matrix used throughout the crate.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex<f64>>;

impl<T> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn swap(&mut self, a: (usize, usize), b: (usize, usize)) {
        let ia = a.0 * self.cols + a.1;
        let ib = b.0 * self.cols + b.1;
        self.data.swap(ia, ib);
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            assert_eq!(r.len(), m, "ragged rows");
            data.extend(r.iter().cloned());
        }
        Matrix {
            rows: n,
            cols: m,
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }
}

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Antidiagonal exchange matrix.
    pub fn exchange(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i + j + 1 == n { T::one() } else { T::zero() })
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + std::ops::Mul<Output = T>,
{
    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Matrix::<T>::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl RealMatrix {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn sub(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn add(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn scale(&self, s: f64) -> RealMatrix {
        self.map(|x| x * s)
    }

    /// ‖A − Aᵀ‖ in the max norm.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    pub fn frobenius_dot(&self, rhs: &RealMatrix) -> f64 {
        self.data.iter().zip(&rhs.data).map(|(a, b)| a * b).sum()
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        self.map(|&x| Complex::new(x, 0.0))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl<T: Real> Matrix<Complex<T>> {
    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn to_c64(&self) -> ComplexMatrix {
        self.map(crate::scalar::to_c64)
    }
}

impl ComplexMatrix {
    /// Real part, provided every imaginary part is at most `tol` in magnitude.
    pub fn to_real(&self, tol: f64) -> Option<RealMatrix> {
        if self.data.iter().any(|z| z.im.abs() > tol) {
            return None;
        }
        Some(self.map(|z| z.re))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_transpose() {
        let a = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = a.matmul(&RealMatrix::identity(2));
        assert_eq!(a, b);
        let c = a.matmul(&a.transpose());
        assert_eq!(c, RealMatrix::from_rows(&[vec![5.0, 11.0], vec![11.0, 25.0]]));
        assert_eq!(a.matvec(&[1.0, -1.0]), vec![-1.0, -1.0]);
        assert_eq!(a.asymmetry(), 1.0);
        assert_eq!(a.trace(), 5.0);
    }

    #[test]
    fn exchange_is_involution() {
        let j = RealMatrix::exchange(5);
        assert_eq!(j.matmul(&j), RealMatrix::identity(5));
        assert_eq!(j[(0, 4)], 1.0);
    }

    #[test]
    fn complex_to_real_respects_tolerance() {
        let z = ComplexMatrix::from_rows(&[vec![Complex::new(1.0, 1e-14), Complex::new(0.0, 0.0)]]);
        assert!(z.to_real(1e-12).is_some());
        assert!(z.to_real(1e-15).is_none());
    }
}
