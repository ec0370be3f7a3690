//! Left eigenvectors in closed form and the metric assembled from them.
//!
//! The left eigenvectors ("ketkets") of the chain Hamiltonian are generated by
//! the three-term recurrence of `Hᵀψ = Eψ`, run in homogeneous `(u, v)`
//! arithmetic so that every component stays an exact form of degree `N-1`.
//! Summing their outer products and reducing with `uv = z` gives the metric as
//! a matrix of polynomials in `z = sqrt(1 - lambda)`.
//!
//! The `_in` variants run the same construction in another [`Real`] type. Near
//! the exceptional point the metric is so ill-conditioned that `f64` rounding
//! of its coefficients alone spoils `Ω H Ω⁻¹` at the `1e-9` level.

use crate::error::{Error, Result};
use crate::linalg::spd_sqrt_in;
use crate::matrix::{Matrix, RealMatrix};
use crate::polyring::{homog_const_in, homog_r_in, uv_of_lambda_in, HomogPoly, ZPoly};
use crate::scalar::Real;
use crate::tolerance::Tolerances;

/// Largest dimension for which ketkets are generated.
pub const MAX_KETKET_DIM: usize = 16;
/// Eigenvalues of the metric at or below this are treated as singular.
pub const PD_TOL: f64 = 1e-12;

/// The N left eigenvectors as homogeneous forms of degree `N-1`.
///
/// Row `i` (0-indexed) belongs to the energy `E_{N-1-i}`, so the first row is
/// the top of the spectrum.
#[derive(Clone, Debug)]
pub struct KetketSet<T = f64> {
    n: usize,
    rows: Vec<Vec<HomogPoly<T>>>,
}

impl<T: Real> KetketSet<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<HomogPoly<T>>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[HomogPoly<T>] {
        &self.rows[i]
    }

    /// Index `n` of the energy `(2n+1-N) sqrt(lambda)` carried by row `i`.
    pub fn energy_index(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// Numeric ketkets at explicit `(u, v)`, one per row.
    pub fn eval_uv(&self, u: &T, v: &T) -> Matrix<T> {
        Matrix::from_fn(self.n, self.n, |i, k| self.rows[i][k].eval_uv(u, v))
    }

    pub fn eval(&self, lambda: f64) -> Result<Matrix<T>> {
        let (u, v) = uv_of_lambda_in::<T>(lambda)?;
        Ok(self.eval_uv(&u, &v))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn weight<T: Real>(n: usize, k: usize) -> T {
    T::from_i64((k * (n - k)) as i64).sqrt()
}

/// Ketkets with default tolerances.
pub fn ketkets(n: usize) -> Result<KetketSet> {
    ketkets_with(n, &Tolerances::default())
}

pub fn ketkets_with(n: usize, tol: &Tolerances) -> Result<KetketSet> {
    ketkets_in(n, tol)
}

pub fn ketkets_in<T: Real>(n: usize, tol: &Tolerances) -> Result<KetketSet<T>> {
    if !(2..=MAX_KETKET_DIM).contains(&n) {
        return Err(Error::Dimension {
            n,
            min: 2,
            max: MAX_KETKET_DIM,
        });
    }
    let rows = (1..=n).map(|i| ketket_row(n, i, tol)).collect::<Result<_>>()?;
    Ok(KetketSet { n, rows })
}

/// Row `i` (1-indexed): seed the first component and walk down the chain.
fn ketket_row<T: Real>(n: usize, i: usize, tol: &Tolerances) -> Result<Vec<HomogPoly<T>>> {
    let sign = if (i - 1) % 2 == 0 { T::one() } else { -T::one() };
    let seed = HomogPoly::monomial(n - i, i - 1, sign * T::from_f64(binomial(n - 1, i - 1)).sqrt());
    let energy = homog_r_in::<T>().scale(T::from_i64((2 * (n - i) + 1) as i64 - n as i64));
    let diag = |k: usize| homog_const_in(T::from_i64(2 * k as i64 - 1 - n as i64)).sub(&energy);
    let coupling = |k: usize| HomogPoly::uv().scale(weight::<T>(n, k));

    let mut psi: Vec<HomogPoly<T>> = vec![seed];
    for k in 1..n {
        // c_{k-1} ψ_{k-1} + (d_k - E) ψ_k, then divide by c_k.
        let mut num = diag(k)?.mul(&psi[k - 1])?;
        if k >= 2 {
            num = num.add(&coupling(k - 1).mul(&psi[k - 2])?)?;
        }
        let next = num.div_uv(tol.residue)?.scale(T::one() / weight::<T>(n, k));
        psi.push(next);
    }

    // The last equation has no component left to absorb it and must hold on its own.
    let tail = coupling(n - 1).mul(&psi[n - 2])?;
    let last = diag(n)?.mul(&psi[n - 1])?;
    let closing = tail.add(&last)?;
    let scale = tail.max_abs().max(last.max_abs()).max(1.0);
    let residue = closing.max_abs() / scale;
    if residue > tol.consistency {
        return Err(Error::ConsistencyFailure { residue });
    }
    Ok(psi)
}

/// Coefficient matrices `M(1)..M(N)` of the stacked ketkets,
/// `ψ = sum_j u^(N-j) (-v)^(j-1) M(j)`.
#[derive(Clone, Debug)]
pub struct CoeffMatrices {
    n: usize,
    mats: Vec<RealMatrix>,
}

impl CoeffMatrices {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `M(j)` for `j` in `1..=N`.
    pub fn get(&self, j: usize) -> &RealMatrix {
        &self.mats[j - 1]
    }

    pub fn mats(&self) -> &[RealMatrix] {
        &self.mats
    }

    /// Evaluates the expansion at explicit `(u, v)`.
    pub fn reconstruct_uv(&self, u: f64, v: f64) -> RealMatrix {
        let n = self.n;
        let mut out = RealMatrix::zeros(n, n);
        for (idx, m) in self.mats.iter().enumerate() {
            let w = u.powi((n - 1 - idx) as i32) * (-v).powi(idx as i32);
            out = out.add(&m.scale(w));
        }
        out
    }

    /// Largest entry of any `M(j)` outside the band `|i-k| <= j-1`,
    /// `|i+k-N-1| <= N-j`, `i-k = j-1 (mod 2)`.
    pub fn support_violation(&self) -> f64 {
        let n = self.n as i64;
        let mut worst: f64 = 0.0;
        for (idx, m) in self.mats.iter().enumerate() {
            let j = idx as i64 + 1;
            for i in 1..=n {
                for k in 1..=n {
                    let inside = (i - k).abs() <= j - 1
                        && (i + k - n - 1).abs() <= n - j
                        && (i - k - (j - 1)).rem_euclid(2) == 0;
                    if !inside {
                        worst = worst.max(m[(i as usize - 1, k as usize - 1)].abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn coefficient_matrices(n: usize) -> Result<CoeffMatrices> {
    coefficient_matrices_from(&ketkets(n)?, &Tolerances::default())
}

pub fn coefficient_matrices_from(set: &KetketSet, tol: &Tolerances) -> Result<CoeffMatrices> {
    let n = set.n;
    let mats: Vec<RealMatrix> = (1..=n)
        .map(|j| {
            let sign = if (j - 1) % 2 == 0 { 1.0 } else { -1.0 };
            RealMatrix::from_fn(n, n, |i, k| sign * set.rows[i][k].coeff(j - 1))
        })
        .collect();
    let off_identity = mats[0].sub(&RealMatrix::identity(n)).max_abs();
    if off_identity > tol.residue {
        return Err(Error::PatternFailure(format!(
            "M(1) differs from the identity by {off_identity:e}"
        )));
    }
    let off_exchange = mats[n - 1].sub(&RealMatrix::exchange(n)).max_abs();
    if off_exchange > tol.residue {
        return Err(Error::PatternFailure(format!(
            "M({n}) differs from the exchange matrix by {off_exchange:e}"
        )));
    }
    Ok(CoeffMatrices { n, mats })
}

/// The metric as an N×N matrix of polynomials in `z`.
#[derive(Clone, Debug)]
pub struct MetricPoly<T = f64> {
    n: usize,
    entries: Matrix<ZPoly<T>>,
}

impl<T: Real> MetricPoly<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, a: usize, b: usize) -> &ZPoly<T> {
        &self.entries[(a, b)]
    }

    pub fn max_degree(&self) -> usize {
        self.entries.as_slice().iter().map(ZPoly::degree).max().unwrap_or(0)
    }

    pub fn eval_z(&self, z: &T) -> Matrix<T> {
        self.entries.map(|p| p.eval(z))
    }

    /// Numeric metric at `z = sqrt(1 - lambda)`, `lambda` in `(0, 1]`.
    pub fn eval_lambda(&self, lambda: f64) -> Result<Matrix<T>> {
        check_metric_lambda(lambda)?;
        Ok(self.eval_z(&(T::one() - T::from_f64(lambda)).sqrt()))
    }
}

fn check_metric_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Domain(format!(
            "the metric is defined for lambda in (0, 1], got {lambda}"
        )));
    }
    Ok(())
}

pub fn metric_poly(n: usize) -> Result<MetricPoly> {
    metric_poly_from(&ketkets(n)?, &Tolerances::default())
}

pub fn metric_poly_in<T: Real>(n: usize, tol: &Tolerances) -> Result<MetricPoly<T>> {
    metric_poly_from(&ketkets_in(n, tol)?, tol)
}

/// `Θ = 2^-(N-1) sum_i ψ_i ψ_iᵀ`, reduced entry by entry to `z`.
pub fn metric_poly_from<T: Real>(set: &KetketSet<T>, tol: &Tolerances) -> Result<MetricPoly<T>> {
    let n = set.n;
    let norm = T::one() / T::from_i64(1 << (n - 1));
    let mut entries = Matrix::from_fn(n, n, |_, _| ZPoly::new(Vec::new()));
    for a in 0..n {
        for b in a..n {
            let mut acc = HomogPoly::zero(2 * (n - 1));
            for row in &set.rows {
                acc = acc.add(&row[a].mul(&row[b])?)?;
            }
            let p = acc.scale(norm.clone()).reduce_to_z(tol.residue)?;
            entries[(b, a)] = p.clone();
            entries[(a, b)] = p;
        }
    }
    for a in 0..n {
        let c0 = entries[(a, a)].coeff(0).to_f64();
        if (c0 - 1.0).abs() > tol.consistency {
            return Err(Error::Invariant(format!(
                "metric diagonal entry {a} has constant term {c0}, expected 1"
            )));
        }
    }
    Ok(MetricPoly { n, entries })
}

/// Numeric metric for `lambda` in `(0, 1]`.
pub fn metric_at(n: usize, lambda: f64) -> Result<RealMatrix> {
    metric_at_in(n, lambda)
}

pub fn metric_at_in<T: Real>(n: usize, lambda: f64) -> Result<Matrix<T>> {
    check_metric_lambda(lambda)?;
    metric_poly_in::<T>(n, &Tolerances::default())?.eval_lambda(lambda)
}

/// `sum_mn f_m Θ_mn g_n`.
pub fn inner_product_s(f: &[f64], g: &[f64], theta: &RealMatrix) -> Result<f64> {
    if f.len() != theta.nrows() || g.len() != theta.ncols() {
        return Err(Error::Shape(format!(
            "vectors of length {} and {} against a {}x{} metric",
            f.len(),
            g.len(),
            theta.nrows(),
            theta.ncols()
        )));
    }
    let tg = theta.matvec(g);
    Ok(f.iter().zip(&tg).map(|(a, b)| a * b).sum())
}

/// `‖HᵀΘ − ΘH‖_max`.
pub fn dieudonne_residual<T: Real>(h: &Matrix<T>, theta: &Matrix<T>) -> f64 {
    let lhs = h.transpose().matmul(theta);
    let rhs = theta.matmul(h);
    lhs.as_slice()
        .iter()
        .zip(rhs.as_slice())
        .fold(0.0, |m, (a, b)| m.max((a.clone() - b.clone()).to_f64().abs()))
}

/// `Ω H Ω⁻¹` with `Ω = Θ^{1/2}`.
pub fn dyson_hermitize(h: &RealMatrix, theta: &RealMatrix) -> Result<RealMatrix> {
    dyson_hermitize_in(h, theta, PD_TOL)
}

/// Evaluated as `Ω⁻¹ (Θ H) Ω⁻¹`, which is the same matrix but uses `Θ` itself
/// instead of the rounded `Ω²`. Fails with `NotPositiveDefinite` when an
/// eigenvalue of `Θ` is at most `pd_tol`.
pub fn dyson_hermitize_in<T: Real>(h: &Matrix<T>, theta: &Matrix<T>, pd_tol: f64) -> Result<Matrix<T>> {
    if h.nrows() != theta.nrows() || !h.is_square() || !theta.is_square() {
        return Err(Error::Shape(format!(
            "hamiltonian {}x{} against metric {}x{}",
            h.nrows(),
            h.ncols(),
            theta.nrows(),
            theta.ncols()
        )));
    }
    let (_, omega_inv) = spd_sqrt_in(theta, pd_tol)?;
    Ok(omega_inv.matmul(&theta.matmul(h)).matmul(&omega_inv))
}
