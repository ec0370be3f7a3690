//! Symmetric eigendecomposition and the functions of SPD matrices built on it.
//!
//! `f64` input goes through nalgebra. Extended-precision input goes through a
//! cyclic Jacobi sweep written here, since nalgebra cannot run on [`Mp`].
//! Neither path touches the general eigensolver in [`crate::oracle`].
//!
//! [`Mp`]: crate::scalar::Mp

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, RealMatrix};
use crate::scalar::Real;

/// Eigenvalues ascending, eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct SymEigen<T = f64> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

fn to_na(a: &RealMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Eigendecomposition of the symmetric part of `a`.
pub fn sym_eigen(a: &RealMatrix) -> SymEigen {
    assert!(a.is_square(), "symmetric eigenproblem needs a square matrix");
    let n = a.nrows();
    let m = to_na(a);
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    SymEigen {
        values: idx.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors: RealMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, idx[j])]),
    }
}

/// Cyclic Jacobi eigendecomposition of the symmetric part of `a` in any
/// [`Real`] type.
pub fn sym_eigen_in<T: Real>(a: &Matrix<T>) -> SymEigen<T> {
    assert!(a.is_square(), "symmetric eigenproblem needs a square matrix");
    let n = a.nrows();
    let half = T::from_f64(0.5);
    let mut m = Matrix::from_fn(n, n, |i, j| (a[(i, j)].clone() + a[(j, i)].clone()) * half.clone());
    let mut v = Matrix::<T>::identity(n);
    let eps = T::epsilon();
    let scale = m.as_slice().iter().fold(T::zero(), |acc, x| acc + x.clone() * x.clone());
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off + m[(p, q)].clone() * m[(p, q)].clone();
            }
        }
        if off <= eps.clone() * eps.clone() * scale.clone() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)].clone();
                if apq.is_zero() {
                    continue;
                }
                let theta = (m[(q, q)].clone() - m[(p, p)].clone()) / (T::from_i64(2) * apq.clone());
                let root = (theta.clone() * theta.clone() + T::one()).sqrt();
                let t = if theta >= T::zero() {
                    T::one() / (theta + root)
                } else {
                    -(T::one() / (-theta + root))
                };
                let c = T::one() / (t.clone() * t.clone() + T::one()).sqrt();
                let s = t.clone() * c.clone();
                for k in 0..n {
                    let mkp = m[(k, p)].clone();
                    let mkq = m[(k, q)].clone();
                    m[(k, p)] = c.clone() * mkp.clone() - s.clone() * mkq.clone();
                    m[(k, q)] = s.clone() * mkp + c.clone() * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)].clone();
                    let mqk = m[(q, k)].clone();
                    m[(p, k)] = c.clone() * mpk.clone() - s.clone() * mqk.clone();
                    m[(q, k)] = s.clone() * mpk + c.clone() * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)].clone();
                    let vkq = v[(k, q)].clone();
                    v[(k, p)] = c.clone() * vkp.clone() - s.clone() * vkq.clone();
                    v[(k, q)] = s.clone() * vkp + c.clone() * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| m[(x, x)].partial_cmp(&m[(y, y)]).expect("finite eigenvalues"));
    SymEigen {
        values: idx.iter().map(|&k| m[(k, k)].clone()).collect(),
        vectors: Matrix::from_fn(n, n, |i, j| v[(i, idx[j])].clone()),
    }
}

pub fn min_eigenvalue(a: &RealMatrix) -> f64 {
    sym_eigen(a).values[0]
}

/// Ratio of extreme eigenvalues; infinite unless `a` is positive definite.
pub fn condition_number(a: &RealMatrix) -> f64 {
    cond_of(&sym_eigen(a).values)
}

fn cond_of<T: Real>(v: &[T]) -> f64 {
    let (lo, hi) = (v[0].clone(), v[v.len() - 1].clone());
    if lo <= T::zero() {
        f64::INFINITY
    } else {
        (hi / lo).to_f64()
    }
}

/// Smallest eigenvalue and condition number, computed in `T`.
pub fn extreme_spectrum_in<T: Real>(a: &Matrix<T>) -> (f64, f64) {
    let v = sym_eigen_in(a).values;
    (v[0].to_f64(), cond_of(&v))
}

/// `(A^{1/2}, A^{-1/2})` for symmetric positive definite `a`. Fails when an
/// eigenvalue is at most `tol`.
pub fn spd_sqrt(a: &RealMatrix, tol: f64) -> Result<(RealMatrix, RealMatrix)> {
    sqrt_from(sym_eigen(a), tol)
}

pub fn spd_sqrt_in<T: Real>(a: &Matrix<T>, tol: f64) -> Result<(Matrix<T>, Matrix<T>)> {
    sqrt_from(sym_eigen_in(a), tol)
}

fn sqrt_from<T: Real>(eig: SymEigen<T>, tol: f64) -> Result<(Matrix<T>, Matrix<T>)> {
    let SymEigen { values, vectors } = eig;
    if values[0] <= T::from_f64(tol) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: values[0].to_f64(),
        });
    }
    let n = values.len();
    let roots: Vec<T> = values.iter().map(Real::sqrt).collect();
    let build = |f: &dyn Fn(&T) -> T| {
        let w: Vec<T> = roots.iter().map(f).collect();
        Matrix::from_fn(n, n, |i, j| {
            (0..n).fold(T::zero(), |acc, k| {
                acc + vectors[(i, k)].clone() * w[k].clone() * vectors[(j, k)].clone()
            })
        })
    };
    Ok((build(&|x| x.clone()), build(&|x| T::one() / x.clone())))
}
