//! Hamiltonian families and their closed-form spectra.
//!
//! The chain model is the tridiagonal matrix with diagonal `2k-1-N` and
//! antisymmetric couplings `±sqrt(k(N-k)) * sqrt(1-lambda)`. It reaches a
//! complete N-fold exceptional point at `lambda = 0`, has the equidistant real
//! spectrum `(2n+1-N) sqrt(lambda)` for `lambda > 0`, and a purely imaginary one
//! for `lambda < 0`.

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Matrix, RealMatrix};
use crate::scalar::{csqrt_real, Real};

/// Default absolute tolerance on imaginary parts when classifying a spectrum as real.
pub const REALITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        check_dim(n)?;
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
        }
        Ok(ModelParams { n, lambda })
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Dimension {
            n,
            min: 2,
            max: usize::MAX,
        });
    }
    Ok(())
}

/// `sqrt(k (N - k))`, the coupling between sites `k` and `k+1` (1-indexed).
pub fn coupling_weight(n: usize, k: usize) -> f64 {
    ((k * (n - k)) as f64).sqrt()
}

/// Chain Hamiltonian in an arbitrary scalar type.
pub fn build_chain_in<T: Real>(params: &ModelParams) -> Matrix<Complex<T>> {
    let n = params.n;
    let w = csqrt_real(T::one() - T::from_f64(params.lambda));
    let zero = Complex::new(T::zero(), T::zero());
    let mut h = Matrix::from_fn(n, n, |_, _| zero.clone());
    for k in 1..=n {
        h[(k - 1, k - 1)] = Complex::new(T::from_i64(2 * k as i64 - 1 - n as i64), T::zero());
    }
    for k in 1..n {
        let c = T::from_i64((k * (n - k)) as i64).sqrt();
        let off = w.clone() * c;
        h[(k, k - 1)] = -off.clone();
        h[(k - 1, k)] = off;
    }
    h
}

pub fn build_chain(params: &ModelParams) -> ComplexMatrix {
    build_chain_in::<f64>(params)
}

/// Real view of the chain Hamiltonian; only defined for `lambda <= 1`.
pub fn build_chain_real(params: &ModelParams) -> Result<RealMatrix> {
    if params.lambda > 1.0 {
        return Err(Error::Domain(format!(
            "couplings are imaginary for lambda = {} > 1",
            params.lambda
        )));
    }
    Ok(build_chain(params).map(|z| z.re))
}

/// Ordered list of energies.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyList {
    pub values: Vec<Complex64>,
    pub real_flag: bool,
}

impl EnergyList {
    /// Sorts `values` and classifies them as real when every imaginary part
    /// is below `tol` in magnitude.
    pub fn new(mut values: Vec<Complex64>, tol: f64) -> Self {
        let order = spectrum_order(&values);
        values = order.into_iter().map(|i| values[i]).collect();
        let real_flag = values.iter().all(|z| z.im.abs() < tol);
        EnergyList { values, real_flag }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Largest pointwise distance to another list of equal length.
    pub fn max_distance(&self, other: &EnergyList) -> f64 {
        assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Permutation that sorts values by real part, then imaginary part.
///
/// Real parts closer than `1e-8 * max(1, max|z|)` count as equal so that
/// purely imaginary spectra with rounding noise in the real parts still come
/// out ordered by imaginary part.
pub fn spectrum_order(values: &[Complex64]) -> Vec<usize> {
    let scale = values.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    let tie = 1e-8 * scale;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]].re - values[idx[end - 1]].re <= tie {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| values[a].im.total_cmp(&values[b].im));
        start = end;
    }
    idx
}

/// Closed-form energies `(2n+1-N) sqrt(lambda)`, principal root.
pub fn analytic_spectrum(params: &ModelParams) -> EnergyList {
    let root = csqrt_real(params.lambda);
    let n = params.n as i64;
    let values = (0..n).map(|k| root * (2 * k + 1 - n) as f64).collect();
    let mut list = EnergyList::new(values, REALITY_TOL);
    list.real_flag = params.lambda >= 0.0;
    list
}

/// Fully degenerate matrix at the catastrophe instant, diagonal `N-1, N-3, …, 1-N`.
pub fn build_qc_limit_in<T: Real>(n: usize) -> Result<Matrix<T>> {
    check_dim(n)?;
    let mut h = Matrix::from_fn(n, n, |_, _| T::zero());
    for k in 1..=n {
        h[(k - 1, k - 1)] = T::from_i64(n as i64 + 1 - 2 * k as i64);
    }
    for k in 1..n {
        let c = T::from_i64((k * (n - k)) as i64).sqrt();
        h[(k, k - 1)] = -c.clone();
        h[(k - 1, k)] = c;
    }
    Ok(h)
}

pub fn build_qc_limit(n: usize) -> Result<RealMatrix> {
    build_qc_limit_in::<f64>(n)
}

/// `D H D` with `D = diag(+1, -1, +1, …)`: flips the sign of every coupling.
pub fn gauge_flip<T: Clone + std::ops::Neg<Output = T>>(h: &Matrix<T>) -> Matrix<T> {
    Matrix::from_fn(h.nrows(), h.ncols(), |i, j| {
        if (i + j) % 2 == 1 {
            -h[(i, j)].clone()
        } else {
            h[(i, j)].clone()
        }
    })
}

/// Quadratic coefficients `[A, B, …]` of the multi-parameter family,
/// innermost coupling first.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiParamCoeffs(pub Vec<f64>);

impl MultiParamCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Self {
        MultiParamCoeffs(coeffs)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiParamHamiltonian<T> {
    pub matrix: Matrix<Complex<T>>,
    /// Set for even N other than 2 and 4, where the assignment of
    /// coefficients to couplings is our own continuation of the pattern.
    pub extrapolated: bool,
}

/// Depth of coupling `k` (1-indexed) counted outward from the central one.
fn coupling_depth(n: usize, k: usize) -> usize {
    k.abs_diff(n / 2)
}

fn multiparam_radicand(n: usize, k: usize, lambda: f64, coeffs: &[f64]) -> f64 {
    let x = coeffs[coupling_depth(n, k)];
    if n == 2 {
        1.0 - x * lambda
    } else {
        1.0 - lambda - x * lambda * lambda
    }
}

fn check_multiparam(n: usize, lambda: f64, coeffs: &MultiParamCoeffs) -> Result<()> {
    check_dim(n)?;
    if n % 2 == 1 {
        return Err(Error::Domain(format!(
            "multi-parameter family is defined for even N only, got {n}"
        )));
    }
    if coeffs.0.len() != n / 2 {
        return Err(Error::Shape(format!(
            "expected {} coefficients for N = {n}, got {}",
            n / 2,
            coeffs.0.len()
        )));
    }
    if !lambda.is_finite() || coeffs.0.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("non-finite multi-parameter input".into()));
    }
    Ok(())
}

/// Multi-parameter chain: coupling `k` carries `sqrt(k(N-k)) sqrt(1 - lambda - X lambda^2)`
/// where `X` is the coefficient at that coupling's depth (`sqrt(1 - A lambda)` at N = 2).
pub fn build_multiparam_in<T: Real>(
    n: usize,
    lambda: f64,
    coeffs: &MultiParamCoeffs,
) -> Result<MultiParamHamiltonian<T>> {
    check_multiparam(n, lambda, coeffs)?;
    let zero = Complex::new(T::zero(), T::zero());
    let mut h = Matrix::from_fn(n, n, |_, _| zero.clone());
    for k in 1..=n {
        h[(k - 1, k - 1)] = Complex::new(T::from_i64(2 * k as i64 - 1 - n as i64), T::zero());
    }
    let lam = T::from_f64(lambda);
    for k in 1..n {
        let x = T::from_f64(coeffs.0[coupling_depth(n, k)]);
        let radicand = if n == 2 {
            T::one() - x * lam.clone()
        } else {
            T::one() - lam.clone() - x * lam.clone() * lam.clone()
        };
        let c = T::from_i64((k * (n - k)) as i64).sqrt();
        let off = csqrt_real(radicand) * c;
        h[(k, k - 1)] = -off.clone();
        h[(k - 1, k)] = off;
    }
    Ok(MultiParamHamiltonian {
        matrix: h,
        extrapolated: n > 4,
    })
}

pub fn build_multiparam(
    n: usize,
    lambda: f64,
    coeffs: &MultiParamCoeffs,
) -> Result<MultiParamHamiltonian<f64>> {
    build_multiparam_in(n, lambda, coeffs)
}

/// Real multi-parameter matrix; fails if any coupling radicand is negative.
pub fn build_multiparam_real(n: usize, lambda: f64, coeffs: &MultiParamCoeffs) -> Result<RealMatrix> {
    check_multiparam(n, lambda, coeffs)?;
    for k in 1..n {
        let r = multiparam_radicand(n, k, lambda, &coeffs.0);
        if r < 0.0 {
            return Err(Error::Domain(format!(
                "coupling {k} has negative radicand {r} at lambda = {lambda}"
            )));
        }
    }
    Ok(build_multiparam(n, lambda, coeffs)?.matrix.map(|z| z.re))
}
