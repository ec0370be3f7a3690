//! Brute-force dense linear algebra used to check the structured code paths.
//!
//! Nothing in here knows about ketkets, metrics or polynomial rings. The
//! eigensolver is a textbook complex Schur decomposition: Householder reduction
//! to Hessenberg form followed by single-shift QR with Givens rotations, then
//! back substitution on the triangular factor for the eigenvectors.
//!
//! Every routine is generic over [`Real`], so the same code runs in `f64` and
//! in 256-bit [`Mp`](crate::scalar::Mp) arithmetic.

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Matrix, RealMatrix};
use crate::model::spectrum_order;
use crate::scalar::{cabs, to_c64, Real};

/// Largest dimension accepted by [`dense_eigen`].
pub const MAX_EIGEN_DIM: usize = 64;
/// Largest dimension accepted by [`char_poly`].
pub const MAX_CHAR_POLY_DIM: usize = 16;

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Eigenvalues ordered as in [`crate::model::EnergyList`].
    pub values: Vec<Complex64>,
    /// Unit right eigenvectors stored as columns, in the order of `values`.
    pub vectors: Option<ComplexMatrix>,
    /// `max_k ‖A x_k − λ_k x_k‖₂ / ‖A‖_F`, computed in the working precision.
    /// Zero when vectors were not requested.
    pub residual: f64,
}

type C<T> = Complex<T>;

fn czero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

fn cscale<T: Real>(z: &C<T>, s: &T) -> C<T> {
    C::new(z.re.clone() * s.clone(), z.im.clone() * s.clone())
}

fn frobenius<T: Real>(a: &Matrix<C<T>>) -> T {
    a.as_slice()
        .iter()
        .fold(T::zero(), |acc, z| acc + z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone())
        .sqrt()
}

fn vec_norm<T: Real>(x: &[C<T>]) -> T {
    x.iter()
        .fold(T::zero(), |acc, z| acc + z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone())
        .sqrt()
}

/// Eigenvalues and optionally eigenvectors of a dense complex matrix.
pub fn dense_eigen(a: &ComplexMatrix, want_vectors: bool) -> Result<EigenResult> {
    dense_eigen_in::<f64>(a, want_vectors)
}

/// Convenience wrapper for real input.
pub fn dense_eigen_real(a: &RealMatrix, want_vectors: bool) -> Result<EigenResult> {
    dense_eigen(&a.to_complex(), want_vectors)
}

/// [`dense_eigen`] carried out in the scalar type `T`; results are rounded to
/// `f64` only at the end.
pub fn dense_eigen_in<T: Real>(a: &Matrix<C<T>>, want_vectors: bool) -> Result<EigenResult> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::Shape(format!("eigenproblem needs a square matrix, got {}x{}", n, a.ncols())));
    }
    if n == 0 || n > MAX_EIGEN_DIM {
        return Err(Error::Dimension {
            n,
            min: 1,
            max: MAX_EIGEN_DIM,
        });
    }
    let norm = frobenius(a);
    let (mut h, mut q) = hessenberg(a);
    schur(&mut h, &mut q, &norm)?;

    let diag: Vec<C<T>> = (0..n).map(|i| h[(i, i)].clone()).collect();
    let approx: Vec<Complex64> = diag.iter().map(to_c64).collect();
    let order = spectrum_order(&approx);
    let values = order.iter().map(|&i| approx[i]).collect();
    if !want_vectors {
        return Ok(EigenResult {
            values,
            vectors: None,
            residual: 0.0,
        });
    }

    let vecs = triangular_eigenvectors(&h, &q, &norm);
    let mut residual = T::zero();
    for (k, x) in vecs.iter().enumerate() {
        let ax = a.matvec(x);
        let r: Vec<C<T>> = ax.iter().zip(x).map(|(y, xi)| y.clone() - diag[k].clone() * xi.clone()).collect();
        residual = residual.max_of(vec_norm(&r));
    }
    if norm > T::zero() {
        residual = residual / norm;
    }
    let vectors = Matrix::from_fn(n, n, |i, j| to_c64(&vecs[order[j]][i]));
    Ok(EigenResult {
        values,
        vectors: Some(vectors),
        residual: residual.to_f64(),
    })
}

/// Householder reduction `A = Q H Q*` with `H` upper Hessenberg.
fn hessenberg<T: Real>(a: &Matrix<C<T>>) -> (Matrix<C<T>>, Matrix<C<T>>) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            C::new(T::one(), T::zero())
        } else {
            czero()
        }
    });
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C<T>> = (k + 1..n).map(|i| h[(i, k)].clone()).collect();
        let xnorm = vec_norm(&x);
        if xnorm.is_zero() {
            continue;
        }
        let x0abs = cabs(&x[0]);
        let phase = if x0abs.is_zero() {
            C::new(T::one(), T::zero())
        } else {
            cscale(&x[0], &(T::one() / x0abs))
        };
        // v = x + phase * |x| e1 avoids cancellation in the first component.
        let mut v = x;
        v[0] = v[0].clone() + cscale(&phase, &xnorm);
        let vnorm = vec_norm(&v);
        let inv = T::one() / vnorm;
        for vi in v.iter_mut() {
            *vi = cscale(vi, &inv);
        }
        let two = T::from_i64(2);
        // H <- (I - 2vv*) H
        for j in 0..n {
            let mut s = czero();
            for (t, vi) in v.iter().enumerate() {
                s = s + vi.conj() * h[(k + 1 + t, j)].clone();
            }
            let s = cscale(&s, &two);
            for (t, vi) in v.iter().enumerate() {
                let val = h[(k + 1 + t, j)].clone() - vi.clone() * s.clone();
                h[(k + 1 + t, j)] = val;
            }
        }
        // H <- H (I - 2vv*), Q <- Q (I - 2vv*)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = czero();
                for (t, vi) in v.iter().enumerate() {
                    s = s + m[(i, k + 1 + t)].clone() * vi.clone();
                }
                let s = cscale(&s, &two);
                for (t, vi) in v.iter().enumerate() {
                    let val = m[(i, k + 1 + t)].clone() - s.clone() * vi.conj();
                    m[(i, k + 1 + t)] = val;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
    }
    (h, q)
}

/// Rotation `[[c, s], [-conj(s), c]]` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens<T: Real>(x: &C<T>, y: &C<T>) -> (T, C<T>) {
    let ax = cabs(x);
    let ay = cabs(y);
    if ay.is_zero() {
        return (T::one(), czero());
    }
    if ax.is_zero() {
        return (T::zero(), C::new(T::one(), T::zero()));
    }
    let r = (ax.clone() * ax.clone() + ay.clone() * ay).sqrt();
    let c = ax.clone() / r.clone();
    let s = cscale(x, &(T::one() / ax)) * y.conj();
    (c, cscale(&s, &(T::one() / r)))
}

/// In-place complex Schur reduction of an upper Hessenberg matrix.
fn schur<T: Real>(h: &mut Matrix<C<T>>, q: &mut Matrix<C<T>>, norm: &T) -> Result<()> {
    let n = h.nrows();
    let eps = T::epsilon();
    let budget = 100 * n;
    let mut sweeps = 0;
    let mut iter = 0;
    let mut hi = n - 1;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = cabs(&h[(l, l)]) + cabs(&h[(l - 1, l - 1)]);
            if s.is_zero() {
                s = norm.clone();
            }
            if cabs(&h[(l, l - 1)]) <= eps.clone() * s {
                h[(l, l - 1)] = czero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        sweeps += 1;
        iter += 1;
        if sweeps > budget {
            let mut worst = T::zero();
            for k in l + 1..=hi {
                worst = worst.max_of(cabs(&h[(k, k - 1)]));
            }
            if norm > &T::zero() {
                worst = worst / norm.clone();
            }
            return Err(Error::ConvergenceFailure {
                best_residual: worst.to_f64(),
            });
        }

        let mu = if iter % 10 == 0 {
            // Exceptional shift to break cycles.
            let bump = cabs(&h[(hi, hi - 1)]) * T::from_f64(0.75);
            h[(hi, hi)].clone() + C::new(bump, T::zero())
        } else {
            wilkinson(
                &h[(hi - 1, hi - 1)],
                &h[(hi - 1, hi)],
                &h[(hi, hi - 1)],
                &h[(hi, hi)],
            )
        };

        for k in l..=hi {
            h[(k, k)] = h[(k, k)].clone() - mu.clone();
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(&h[(k, k)], &h[(k + 1, k)]);
            for j in k..n {
                let a = h[(k, j)].clone();
                let b = h[(k + 1, j)].clone();
                h[(k, j)] = cscale(&a, &c) + s.clone() * b.clone();
                h[(k + 1, j)] = cscale(&b, &c) - s.conj() * a;
            }
            h[(k + 1, k)] = czero();
            rots.push((c, s));
        }
        for (k, (c, s)) in (l..hi).zip(rots) {
            let top = (k + 1).min(hi);
            for i in 0..=top {
                let a = h[(i, k)].clone();
                let b = h[(i, k + 1)].clone();
                h[(i, k)] = cscale(&a, &c) + b.clone() * s.conj();
                h[(i, k + 1)] = cscale(&b, &c) - a * s.clone();
            }
            for i in 0..n {
                let a = q[(i, k)].clone();
                let b = q[(i, k + 1)].clone();
                q[(i, k)] = cscale(&a, &c) + b.clone() * s.conj();
                q[(i, k + 1)] = cscale(&b, &c) - a * s.clone();
            }
        }
        for k in l..=hi {
            h[(k, k)] = h[(k, k)].clone() + mu.clone();
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson<T: Real>(a: &C<T>, b: &C<T>, c: &C<T>, d: &C<T>) -> C<T> {
    let half = T::from_f64(0.5);
    let m = cscale(&(a.clone() - d.clone()), &half);
    let disc = csqrt(&(m.clone() * m.clone() + b.clone() * c.clone()));
    // d + m ± disc; pick the sign giving the root nearer d.
    let p = m.clone() + disc.clone();
    let s = m - disc;
    let (big, _) = if cabs(&p) >= cabs(&s) { (p, s) } else { (s, p) };
    if cabs(&big).is_zero() {
        return d.clone();
    }
    // Nearer root is d - bc / big (product of roots of the shifted quadratic).
    d.clone() - b.clone() * c.clone() / big
}

/// Principal complex square root.
fn csqrt<T: Real>(z: &C<T>) -> C<T> {
    let r = cabs(z);
    if r.is_zero() {
        return czero();
    }
    let half = T::from_f64(0.5);
    let re = ((r.clone() + z.re.clone()) * half.clone()).sqrt();
    let im = ((r - z.re.clone()) * half).sqrt();
    if z.im < T::zero() {
        C::new(re, -im)
    } else {
        C::new(re, im)
    }
}

/// Right eigenvectors from the Schur form `A = Q T Q*`, unit length, phase
/// fixed so that the largest component is real and positive.
fn triangular_eigenvectors<T: Real>(t: &Matrix<C<T>>, q: &Matrix<C<T>>, norm: &T) -> Vec<Vec<C<T>>> {
    let n = t.nrows();
    let small = T::epsilon() * norm.clone().max_of(T::from_f64(f64::MIN_POSITIVE));
    let big = T::from_f64(1e100);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = vec![czero::<T>(); n];
        x[k] = C::new(T::one(), T::zero());
        for i in (0..k).rev() {
            let mut s = czero::<T>();
            for j in i + 1..=k {
                s = s + t[(i, j)].clone() * x[j].clone();
            }
            let mut den = t[(i, i)].clone() - t[(k, k)].clone();
            if cabs(&den) < small {
                den = C::new(small.clone(), T::zero());
            }
            x[i] = -(s / den);
            if cabs(&x[i]) > big {
                let inv = T::one() / cabs(&x[i]);
                for xj in x.iter_mut() {
                    *xj = cscale(xj, &inv);
                }
            }
        }
        let mut v = q.matvec(&x);
        let mut imax = 0;
        let mut amax = T::zero();
        for (i, vi) in v.iter().enumerate() {
            let a = cabs(vi);
            if a > amax {
                amax = a;
                imax = i;
            }
        }
        let nv = vec_norm(&v);
        let phase = cscale(&v[imax].conj(), &(T::one() / (amax * nv)));
        for vi in v.iter_mut() {
            *vi = vi.clone() * phase.clone();
        }
        out.push(v);
    }
    out
}

/// Coefficients of the monic characteristic polynomial `det(tI - A)`,
/// ascending: entry `k` multiplies `t^k` and the last entry is 1.
pub fn char_poly(a: &RealMatrix) -> Result<Vec<f64>> {
    char_poly_in::<f64>(a)
}

/// Faddeev–LeVerrier recursion in the scalar type `T`.
pub fn char_poly_in<T: Real>(a: &Matrix<T>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::Shape(format!("char_poly needs a square matrix, got {}x{}", n, a.ncols())));
    }
    if n == 0 || n > MAX_CHAR_POLY_DIM {
        return Err(Error::Dimension {
            n,
            min: 1,
            max: MAX_CHAR_POLY_DIM,
        });
    }
    let mut coeffs = vec![T::zero(); n + 1];
    coeffs[n] = T::one();
    let mut m = Matrix::<T>::zeros(n, n);
    for k in 1..=n {
        let mut next = a.matmul(&m);
        for i in 0..n {
            next[(i, i)] = next[(i, i)].clone() + coeffs[n + 1 - k].clone();
        }
        m = next;
        let am = a.matmul(&m);
        let tr = (0..n).fold(T::zero(), |acc, i| acc + am[(i, i)].clone());
        coeffs[n - k] = -(tr / T::from_i64(k as i64));
    }
    Ok(coeffs.iter().map(Real::to_f64).collect())
}

/// Max-norm of `A^k`, `k >= 1`, by repeated multiplication.
pub fn matrix_power_norm(a: &RealMatrix, k: usize) -> f64 {
    matrix_power_norm_in::<f64>(a, k)
}

pub fn matrix_power_norm_in<T: Real>(a: &Matrix<T>, k: usize) -> f64 {
    assert!(k >= 1, "matrix power must be at least 1");
    let mut p = a.clone();
    for _ in 1..k {
        p = p.matmul(a);
    }
    p.as_slice()
        .iter()
        .fold(T::zero(), |m, x| m.max_of(x.abs()))
        .to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_chain, build_chain_in, build_qc_limit, ModelParams};
    use crate::scalar::Mp;
    use num_traits::Zero;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn chain_spectrum_at_quarter() {
        let h = build_chain(&ModelParams::new(4, 0.25).unwrap());
        let r = dense_eigen(&h, true).unwrap();
        for (z, e) in r.values.iter().zip([-1.5, -0.5, 0.5, 1.5]) {
            assert!(close(*z, Complex64::new(e, 0.0), 1e-12), "{z}");
        }
        assert!(r.residual < 1e-13);
    }

    #[test]
    fn identity_eigenvalues() {
        let r = dense_eigen_real(&RealMatrix::identity(5), true).unwrap();
        assert!(r.values.iter().all(|z| close(*z, Complex64::new(1.0, 0.0), 1e-14)));
    }

    #[test]
    fn imaginary_spectrum_below_zero() {
        let h = build_chain(&ModelParams::new(3, -0.5).unwrap());
        let r = dense_eigen(&h, true).unwrap();
        let w = 2.0 * 0.5_f64.sqrt();
        let expect = [Complex64::new(0.0, -w), Complex64::new(0.0, 0.0), Complex64::new(0.0, w)];
        for (z, e) in r.values.iter().zip(expect) {
            assert!(close(*z, e, 1e-10), "{z} vs {e}");
        }
        assert!(r.residual < 1e-8);
    }

    #[test]
    fn rotation_matrix_has_imaginary_pair() {
        let a = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let r = dense_eigen_real(&a, false).unwrap();
        assert!(close(r.values[0], Complex64::new(0.0, -1.0), 1e-14));
        assert!(close(r.values[1], Complex64::new(0.0, 1.0), 1e-14));
    }

    #[test]
    fn extended_precision_resolves_nilpotent_matrix() {
        let exact = crate::model::build_qc_limit_in::<Mp>(6).unwrap();
        let exact = exact.map(|x| Complex::new(x.clone(), Mp::zero()));
        let r = dense_eigen_in(&exact, false).unwrap();
        assert!(r.values.iter().all(|z| z.norm() < 1e-10), "{:?}", r.values);
    }

    #[test]
    fn extended_precision_chain_near_ep() {
        let p = ModelParams::new(10, 0.01).unwrap();
        let r = dense_eigen_in(&build_chain_in::<Mp>(&p), true).unwrap();
        for (k, z) in r.values.iter().enumerate() {
            let e = (2.0 * k as f64 - 9.0) * 0.1;
            assert!(close(*z, Complex64::new(e, 0.0), 1e-12), "{z} vs {e}");
        }
        assert!(r.residual < 1e-30);
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(char_poly(&RealMatrix::identity(2)).unwrap(), vec![1.0, -2.0, 1.0]);
        let h = build_chain(&ModelParams::new(2, 0.3).unwrap()).map(|z| z.re);
        let c = char_poly(&h).unwrap();
        assert!((c[0] + 0.3).abs() < 1e-14 && c[1].abs() < 1e-14 && c[2] == 1.0);
        let qc = char_poly(&build_qc_limit(4).unwrap()).unwrap();
        assert!(qc[..4].iter().all(|c| c.abs() < 1e-8), "{qc:?}");
        assert!(char_poly(&RealMatrix::identity(17)).is_err());
    }

    #[test]
    fn power_norm_of_qc_matrix() {
        let qc = build_qc_limit(4).unwrap();
        assert!(matrix_power_norm(&qc, 4) < 1e-8);
        assert!(matrix_power_norm(&qc, 3) > 1e-3);
        assert_eq!(matrix_power_norm(&RealMatrix::identity(3), 7), 1.0);
    }

    #[test]
    fn rejects_oversized_input() {
        let a = ComplexMatrix::zeros(65, 65);
        assert!(matches!(dense_eigen(&a, false), Err(Error::Dimension { .. })));
    }
}
