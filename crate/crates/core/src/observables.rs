//! Real observables compatible with a metric: solutions of `GᵀΘ = ΘG`.

use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;
use crate::matrix::RealMatrix;
use crate::metric::{MetricPoly, PD_TOL};
use crate::oracle::dense_eigen_real;
use crate::tolerance::Tolerances;

/// Frobenius-orthonormal basis of an observable space.
#[derive(Clone, Debug)]
pub struct ObservableBasis {
    pub n: usize,
    pub basis: Vec<RealMatrix>,
}

impl ObservableBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `‖G − P G‖_max / max(1, ‖G‖_max)` with `P` the orthogonal projector
    /// onto the span.
    pub fn projection_residual(&self, g: &RealMatrix) -> f64 {
        let mut r = g.clone();
        for b in &self.basis {
            r = r.sub(&b.scale(g.frobenius_dot(b)));
        }
        r.max_abs() / g.max_abs().max(1.0)
    }
}

/// Appends the `N(N-1)/2` rows of `GᵀΘ − ΘG = 0` (strict upper triangle; the
/// matrix is antisymmetric) in the unknowns `G_kl`, indexed `k N + l`.
fn push_constraints(theta: &RealMatrix, rows: &mut Vec<Vec<f64>>) {
    let n = theta.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let mut row = vec![0.0; n * n];
            for k in 0..n {
                row[k * n + i] += theta[(k, j)];
                row[k * n + j] -= theta[(i, k)];
            }
            rows.push(row);
        }
    }
}

/// Null space by Gauss–Jordan elimination with complete pivoting. Pivots at
/// or below `tol` times the largest entry count as zero.
fn null_space(rows: &[Vec<f64>], ncols: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let m = a.len();
    let scale = a.iter().flatten().fold(0.0_f64, |s, x| s.max(x.abs()));
    let thr = tol * scale.max(f64::MIN_POSITIVE);
    let mut perm: Vec<usize> = (0..ncols).collect();
    let mut rank = 0;
    while rank < m.min(ncols) {
        let (mut pi, mut pj, mut best) = (rank, rank, 0.0);
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (j, x) in row.iter().enumerate().skip(rank) {
                if x.abs() > best {
                    (pi, pj, best) = (i, j, x.abs());
                }
            }
        }
        if best <= thr {
            break;
        }
        a.swap(rank, pi);
        for row in a.iter_mut() {
            row.swap(rank, pj);
        }
        perm.swap(rank, pj);
        let p = a[rank][rank];
        for x in a[rank].iter_mut() {
            *x /= p;
        }
        let pivot_row = a[rank].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == rank || row[rank] == 0.0 {
                continue;
            }
            let f = row[rank];
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
        }
        rank += 1;
    }
    (rank..ncols)
        .map(|free| {
            let mut x = vec![0.0; ncols];
            x[perm[free]] = 1.0;
            for i in 0..rank {
                x[perm[i]] = -a[i][free];
            }
            x
        })
        .collect()
}

/// Modified Gram–Schmidt under the Frobenius product, then a deterministic
/// order (descending diagonal weight) and sign (largest entry positive).
fn orthonormalize(n: usize, vecs: Vec<Vec<f64>>, tol: f64) -> Vec<RealMatrix> {
    let mut out: Vec<RealMatrix> = Vec::with_capacity(vecs.len());
    for v in vecs {
        let mut m = RealMatrix::from_vec(n, n, v);
        for b in &out {
            m = m.sub(&b.scale(m.frobenius_dot(b)));
        }
        let norm = m.frobenius_dot(&m).sqrt();
        if norm > tol {
            out.push(m.scale(1.0 / norm));
        }
    }
    for b in out.iter_mut() {
        let big = b.as_slice().iter().copied().max_by(|x, y| x.abs().total_cmp(&y.abs())).unwrap_or(0.0);
        if big < 0.0 {
            *b = b.scale(-1.0);
        }
    }
    let weight = |b: &RealMatrix| -> f64 { (0..n).map(|i| b[(i, i)] * b[(i, i)]).sum() };
    out.sort_by(|a, b| weight(b).total_cmp(&weight(a)));
    out
}

/// Basis of `{G real : GᵀΘ = ΘG}` for a symmetric positive definite `Θ`.
pub fn solve_at(theta: &RealMatrix) -> Result<ObservableBasis> {
    solve_at_with(theta, &Tolerances::default())
}

pub fn solve_at_with(theta: &RealMatrix, tol: &Tolerances) -> Result<ObservableBasis> {
    let n = theta.nrows();
    if !theta.is_square() {
        return Err(Error::Shape(format!("metric must be square, got {}x{}", n, theta.ncols())));
    }
    let lo = min_eigenvalue(theta);
    if lo <= PD_TOL {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    let mut rows = Vec::new();
    push_constraints(theta, &mut rows);
    let basis = orthonormalize(n, null_space(&rows, n * n, tol.nullspace), tol.nullspace);
    let expected = n * (n + 1) / 2;
    if basis.len() != expected {
        return Err(Error::Invariant(format!(
            "observable space has dimension {}, expected {expected}",
            basis.len()
        )));
    }
    Ok(ObservableBasis { n, basis })
}

/// Sample points `(k+1)/(N+2)`, `k = 0..=N`, used by [`solve_z_independent`].
pub fn z_samples(n: usize) -> Vec<f64> {
    (0..=n).map(|k| (k + 1) as f64 / (n + 2) as f64).collect()
}

/// Observables that satisfy the constraint for every `z`. The constraint
/// coefficients have degree at most `N-1` in `z`, so `N+1` samples suffice.
pub fn solve_z_independent(n: usize, metric: &MetricPoly) -> Result<ObservableBasis> {
    solve_z_independent_with(n, metric, &Tolerances::default())
}

pub fn solve_z_independent_with(n: usize, metric: &MetricPoly, tol: &Tolerances) -> Result<ObservableBasis> {
    if metric.n() != n {
        return Err(Error::Shape(format!("metric is {}x{}, expected {n}x{n}", metric.n(), metric.n())));
    }
    let mut rows = Vec::new();
    for z in z_samples(n) {
        let theta = metric.eval_z(&z);
        let lo = min_eigenvalue(&theta);
        if lo <= PD_TOL {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
        }
        push_constraints(&theta, &mut rows);
    }
    let basis = orthonormalize(n, null_space(&rows, n * n, tol.nullspace), tol.nullspace);
    Ok(ObservableBasis { n, basis })
}

/// True iff every oracle eigenvalue of `g` has imaginary part below `tol`.
/// An eigensolver failure counts as not real.
pub fn reality_check(g: &RealMatrix, tol: f64) -> bool {
    match dense_eigen_real(g, false) {
        Ok(r) => r.values.iter().all(|z| z.im.abs() < tol),
        Err(_) => false,
    }
}

/// Distance of a 3×3 matrix from the family `[[a,d,h],[d,a+h,d],[h,d,a]]`.
pub fn f_pattern_residual(g: &RealMatrix) -> f64 {
    assert_eq!((g.nrows(), g.ncols()), (3, 3), "the F family is 3x3");
    let d = g[(0, 1)];
    [
        g[(0, 0)] - g[(2, 2)],
        g[(1, 1)] - g[(0, 0)] - g[(0, 2)],
        g[(1, 0)] - d,
        g[(1, 2)] - d,
        g[(2, 1)] - d,
        g[(0, 2)] - g[(2, 0)],
    ]
    .iter()
    .fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{metric_at, metric_poly};
    use crate::model::{build_chain_real, ModelParams};

    fn constraint(g: &RealMatrix, t: &RealMatrix) -> f64 {
        g.transpose().matmul(t).sub(&t.matmul(g)).max_abs()
    }

    #[test]
    fn identity_metric_gives_symmetric_matrices() {
        for n in 2..=5 {
            let b = solve_at(&RealMatrix::identity(n)).unwrap();
            assert_eq!(b.dim(), n * (n + 1) / 2);
            assert!(b.basis.iter().all(|m| m.asymmetry() < 1e-12));
        }
    }

    #[test]
    fn single_rule_at_n2() {
        let z = 0.5;
        let t = metric_poly(2).unwrap().eval_z(&z);
        let b = solve_at(&t).unwrap();
        assert_eq!(b.dim(), 3);
        for g in &b.basis {
            let (a, bb, c, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
            assert!((c - bb - z * (a - d)).abs() < 1e-12);
            assert!(constraint(g, &t) < 1e-12);
        }
        for (i, x) in b.basis.iter().enumerate() {
            for (j, y) in b.basis.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((x.frobenius_dot(y) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_is_an_observable() {
        for (n, lambda) in [(3, 0.4), (5, 0.7)] {
            let t = metric_at(n, lambda).unwrap();
            let h = build_chain_real(&ModelParams::new(n, lambda).unwrap()).unwrap();
            assert!(solve_at(&t).unwrap().projection_residual(&h) < 1e-9);
        }
    }

    #[test]
    fn z_independent_spaces() {
        let b2 = solve_z_independent(2, &metric_poly(2).unwrap()).unwrap();
        assert_eq!(b2.dim(), 2);
        for g in &b2.basis {
            assert!((g[(0, 0)] - g[(1, 1)]).abs() < 1e-12 && (g[(0, 1)] - g[(1, 0)]).abs() < 1e-12);
        }
        let b3 = solve_z_independent(3, &metric_poly(3).unwrap()).unwrap();
        assert_eq!(b3.dim(), 3);
        assert!(b3.basis.iter().all(|g| f_pattern_residual(g) < 1e-12));
    }

    #[test]
    fn reality_examples() {
        let f = RealMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 2.0], vec![3.0, 2.0, 1.0]]);
        assert!(reality_check(&f, 1e-9));
        assert!(!reality_check(&RealMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]), 1e-9));
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let t = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(solve_at(&t), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn null_space_of_rank_one_system() {
        let ns = null_space(&[vec![1.0, 1.0, 0.0]], 3, 1e-9);
        assert_eq!(ns.len(), 2);
        assert!(ns.iter().all(|x| (x[0] + x[1]).abs() < 1e-15));
    }
}
