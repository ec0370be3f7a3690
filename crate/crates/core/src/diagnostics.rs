//! Spectral reality scans, collapse indicators near the exceptional point and
//! the layer geometry of the multi-parameter family.
//!
//! Everything that diagonalizes a chain matrix here does so in [`Mp`]: close to
//! `lambda = 0` the eigenvalues are so sensitive that `f64` entries alone shift
//! them by more than the reality tolerance.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::extreme_spectrum_in;
use crate::matrix::ComplexMatrix;
use crate::metric::{metric_poly_in, MetricPoly};
use crate::model::{build_chain_in, build_multiparam_in, EnergyList, ModelParams, MultiParamCoeffs};
use crate::oracle::{dense_eigen_in, matrix_power_norm_in};
use crate::scalar::Mp;
use crate::tolerance::Tolerances;

/// One grid point of a reality scan.
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub lambda: f64,
    pub energies: EnergyList,
    pub all_real: bool,
    /// Largest imaginary part lies within a factor 10 of the reality
    /// tolerance, so the classification is borderline.
    pub near_ep: bool,
    /// Smallest metric eigenvalue, for `lambda` in `(0, 1]` only.
    pub theta_min_eig: Option<f64>,
    pub theta_cond: Option<f64>,
}

fn in_metric_domain(lambda: f64) -> bool {
    lambda > 0.0 && lambda <= 1.0
}

fn chain_energies(n: usize, lambda: f64, tol: f64) -> Result<EnergyList> {
    let h = build_chain_in::<Mp>(&ModelParams::new(n, lambda)?);
    Ok(EnergyList::new(dense_eigen_in(&h, false)?.values, tol))
}

/// Reality scan of the chain model over `lambdas`, in input order.
///
/// Rows fail individually; the outer error only reports an empty grid or a
/// bad dimension.
pub fn spectrum_scan(n: usize, lambdas: &[f64]) -> Result<Vec<Result<ScanRow>>> {
    spectrum_scan_with(n, lambdas, &Tolerances::default())
}

pub fn spectrum_scan_with(n: usize, lambdas: &[f64], tol: &Tolerances) -> Result<Vec<Result<ScanRow>>> {
    if lambdas.is_empty() {
        return Err(Error::Domain("scan grid is empty".into()));
    }
    ModelParams::new(n, 0.0)?;
    let metric = if lambdas.iter().any(|&l| in_metric_domain(l)) {
        Some(metric_poly_in::<Mp>(n, tol)?)
    } else {
        None
    };
    Ok(lambdas
        .par_iter()
        .map(|&lambda| scan_row(n, lambda, metric.as_ref(), tol))
        .collect())
}

fn scan_row(n: usize, lambda: f64, metric: Option<&MetricPoly<Mp>>, tol: &Tolerances) -> Result<ScanRow> {
    let energies = chain_energies(n, lambda, tol.reality)?;
    let im = energies.max_imag();
    let near_ep = im >= tol.reality / 10.0 && im <= tol.reality * 10.0;
    let (theta_min_eig, theta_cond) = match metric {
        Some(m) if in_metric_domain(lambda) => {
            let (lo, cond) = extreme_spectrum_in(&m.eval_lambda(lambda)?);
            (Some(lo), Some(cond))
        }
        _ => (None, None),
    };
    Ok(ScanRow {
        lambda,
        all_real: energies.real_flag,
        energies,
        near_ep,
        theta_min_eig,
        theta_cond,
    })
}

/// Collapse indicators at one `lambda`.
#[derive(Clone, Debug)]
pub struct EpRow {
    pub lambda: f64,
    /// `max E - min E`.
    pub energy_spread: f64,
    /// Largest `|cos|` between distinct unit eigenvectors of `H`.
    pub max_cos_h: f64,
    /// The same for `H†`.
    pub max_cos_hdag: f64,
    pub theta_min_eig: f64,
}

#[derive(Clone, Debug)]
pub struct EpReport {
    pub n: usize,
    pub rows: Vec<EpRow>,
}

fn max_pairwise_cos(v: &ComplexMatrix) -> f64 {
    let n = v.ncols();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let dot: Complex64 = (0..n).map(|i| v[(i, a)].conj() * v[(i, b)]).sum();
            worst = worst.max(dot.norm());
        }
    }
    worst
}

/// Collapse indicators on a strictly decreasing sequence in `(0, 1]`.
///
/// Fails with an invariant error unless, along the sequence, the spread
/// strictly shrinks, both cosines strictly grow and the smallest metric
/// eigenvalue strictly shrinks.
pub fn ep_collapse_report(n: usize, lambdas: &[f64]) -> Result<EpReport> {
    if lambdas.is_empty() {
        return Err(Error::Domain("lambda sequence is empty".into()));
    }
    if let Some(&bad) = lambdas.iter().find(|&&l| !in_metric_domain(l)) {
        return Err(Error::Domain(format!("lambda must lie in (0, 1], got {bad}")));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("lambda sequence must be strictly decreasing".into()));
    }
    let metric = metric_poly_in::<Mp>(n, &Tolerances::default())?;
    let rows = lambdas
        .par_iter()
        .map(|&lambda| ep_row(n, lambda, &metric))
        .collect::<Result<Vec<_>>>()?;
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let ok = b.energy_spread < a.energy_spread
            && b.max_cos_h > a.max_cos_h
            && b.max_cos_hdag > a.max_cos_hdag
            && b.theta_min_eig < a.theta_min_eig;
        if !ok {
            return Err(Error::Invariant(format!(
                "collapse indicators are not monotone between lambda = {} and {}",
                a.lambda, b.lambda
            )));
        }
    }
    Ok(EpReport { n, rows })
}

fn ep_row(n: usize, lambda: f64, metric: &MetricPoly<Mp>) -> Result<EpRow> {
    let h = build_chain_in::<Mp>(&ModelParams::new(n, lambda)?);
    let right = dense_eigen_in(&h, true)?;
    let left = dense_eigen_in(&h.adjoint(), true)?;
    let re: Vec<f64> = right.values.iter().map(|z| z.re).collect();
    let spread = re.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - re.iter().cloned().fold(f64::INFINITY, f64::min);
    let (theta_min_eig, _) = extreme_spectrum_in(&metric.eval_lambda(lambda)?);
    Ok(EpRow {
        lambda,
        energy_spread: spread,
        max_cos_h: max_pairwise_cos(right.vectors.as_ref().expect("vectors requested")),
        max_cos_hdag: max_pairwise_cos(left.vectors.as_ref().expect("vectors requested")),
        theta_min_eig,
    })
}

/// Largest dimension accepted by [`nilpotency_check`].
pub const MAX_NILPOTENCY_DIM: usize = 12;

/// `H(0)^N` vanishes while `H(0)^(N-1)` does not.
pub fn nilpotency_check(n: usize) -> Result<bool> {
    if !(2..=MAX_NILPOTENCY_DIM).contains(&n) {
        return Err(Error::Dimension {
            n,
            min: 2,
            max: MAX_NILPOTENCY_DIM,
        });
    }
    let h = build_chain_in::<Mp>(&ModelParams::new(n, 0.0)?).map(|z| z.re.clone());
    Ok(matrix_power_norm_in(&h, n) < 1e-8 && matrix_power_norm_in(&h, n - 1) > 1e-6)
}

/// A single layer inequality `-mu^2 <= combo · (A, B, …) <= nu^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub n: usize,
    pub combo: Vec<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(-1)^m C(N-2, N/2-1-m)` for the coefficient of depth `m`, halved at `m = 0`.
pub fn layer_coefficients(n: usize) -> Vec<f64> {
    let j = n / 2;
    (0..j)
        .map(|m| {
            let c = binomial(n - 2, j - 1 - m);
            let c = if m == 0 { c / 2.0 } else { c };
            if m % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

impl LayerSpec {
    /// Layer for `n` in `{4, 6, 8}`. Bounds left as `None` make
    /// [`layer_check`] fail with `MissingBounds`.
    pub fn new(n: usize, mu: Option<f64>, nu: Option<f64>) -> Result<Self> {
        if ![4, 6, 8].contains(&n) {
            return Err(Error::Domain(format!("layer inequalities are available for N = 4, 6, 8, got {n}")));
        }
        Ok(LayerSpec {
            n,
            combo: layer_coefficients(n),
            mu,
            nu,
        })
    }

    /// The known bounds where they exist: `mu = 1/2`, `nu = 2/3` at `N = 4`.
    pub fn with_known_bounds(n: usize) -> Result<Self> {
        if n == 4 {
            LayerSpec::new(4, Some(0.5), Some(2.0 / 3.0))
        } else {
            LayerSpec::new(n, None, None)
        }
    }

    /// `[-mu^2, nu^2]`.
    pub fn bounds(&self) -> Result<(f64, f64)> {
        match (self.mu, self.nu) {
            (Some(mu), Some(nu)) => Ok((-mu * mu, nu * nu)),
            _ => Err(Error::MissingBounds { n: self.n }),
        }
    }

    pub fn functional(&self, coeffs: &MultiParamCoeffs) -> Result<f64> {
        if coeffs.0.len() != self.combo.len() {
            return Err(Error::Shape(format!(
                "expected {} coefficients for N = {}, got {}",
                self.combo.len(),
                self.n,
                coeffs.0.len()
            )));
        }
        Ok(self.combo.iter().zip(&coeffs.0).map(|(a, b)| a * b).sum())
    }

    /// Distance of the functional value to the nearer bound.
    pub fn boundary_distance(&self, coeffs: &MultiParamCoeffs) -> Result<f64> {
        let f = self.functional(coeffs)?;
        let (lo, hi) = self.bounds()?;
        Ok((f - lo).abs().min((f - hi).abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerClass {
    Inside,
    Outside,
    Boundary,
}

impl LayerClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            LayerClass::Inside => "inside",
            LayerClass::Outside => "outside",
            LayerClass::Boundary => "boundary",
        }
    }
}

pub fn layer_check(spec: &LayerSpec, coeffs: &MultiParamCoeffs) -> Result<LayerClass> {
    layer_check_with(spec, coeffs, &Tolerances::default())
}

pub fn layer_check_with(spec: &LayerSpec, coeffs: &MultiParamCoeffs, tol: &Tolerances) -> Result<LayerClass> {
    let f = spec.functional(coeffs)?;
    let (lo, hi) = spec.bounds()?;
    Ok(if (f - lo).abs() <= tol.boundary || (f - hi).abs() <= tol.boundary {
        LayerClass::Boundary
    } else if lo < f && f < hi {
        LayerClass::Inside
    } else {
        LayerClass::Outside
    })
}

/// Margin kept from the layer boundary in [`layer_cross_validate`].
pub const LAYER_MARGIN: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct CrossRow {
    pub coeffs: MultiParamCoeffs,
    pub class: LayerClass,
    pub all_real: bool,
    pub max_imag: f64,
    pub agree: bool,
}

#[derive(Clone, Debug)]
pub struct CrossReport {
    pub lambda: f64,
    pub rows: Vec<CrossRow>,
    /// Samples closer than [`LAYER_MARGIN`] to the boundary, left unchecked.
    pub excluded: Vec<MultiParamCoeffs>,
}

impl CrossReport {
    pub fn disagreements(&self) -> usize {
        self.rows.iter().filter(|r| !r.agree).count()
    }
}

/// Compares the N = 4 layer classification with the oracle's reality verdict
/// on the multi-parameter Hamiltonian at a small `lambda`.
pub fn layer_cross_validate(
    n: usize,
    samples: &[MultiParamCoeffs],
    lambda_small: f64,
) -> Result<CrossReport> {
    layer_cross_validate_with(n, samples, lambda_small, &Tolerances::default())
}

pub fn layer_cross_validate_with(
    n: usize,
    samples: &[MultiParamCoeffs],
    lambda_small: f64,
    tol: &Tolerances,
) -> Result<CrossReport> {
    if n != 4 {
        return Err(Error::Domain(format!("cross-validation needs known bounds, available for N = 4 only, got {n}")));
    }
    if !(lambda_small > 0.0 && lambda_small <= 0.01) {
        return Err(Error::Domain(format!("lambda_small must lie in (0, 0.01], got {lambda_small}")));
    }
    let spec = LayerSpec::with_known_bounds(4)?;
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for s in samples {
        // The slack keeps points exactly one margin away (up to rounding) in.
        if spec.boundary_distance(s)? < LAYER_MARGIN - 1e-12 {
            excluded.push(s.clone());
        } else {
            kept.push(s.clone());
        }
    }
    let rows = kept
        .into_par_iter()
        .map(|coeffs| {
            let class = layer_check_with(&spec, &coeffs, tol)?;
            let h = build_multiparam_in::<Mp>(4, lambda_small, &coeffs)?.matrix;
            let values = dense_eigen_in(&h, false)?.values;
            let max_imag = values.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
            let all_real = max_imag < tol.reality;
            let agree = (class == LayerClass::Inside) == all_real;
            Ok(CrossRow {
                coeffs,
                class,
                all_real,
                max_imag,
                agree,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossReport {
        lambda: lambda_small,
        rows,
        excluded,
    })
}

/// Oracle spectrum of the multi-parameter Hamiltonian, computed in `Mp`.
pub fn multiparam_energies(n: usize, lambda: f64, coeffs: &MultiParamCoeffs, tol: f64) -> Result<EnergyList> {
    let h = build_multiparam_in::<Mp>(n, lambda, coeffs)?.matrix;
    Ok(EnergyList::new(dense_eigen_in(&h, false)?.values, tol))
}

/// Oracle spectrum of the chain model, computed in `Mp`.
pub fn chain_spectrum(params: &ModelParams, tol: f64) -> Result<EnergyList> {
    chain_energies(params.n, params.lambda, tol)
}
