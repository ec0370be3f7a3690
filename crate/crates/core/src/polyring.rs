//! Homogeneous polynomials in `(u, v)` and their reduction to polynomials in `z`.
//!
//! With `r = sqrt(lambda)`, `u = sqrt(1 - r)`, `v = sqrt(1 + r)` we have the
//! identities `u^2 + v^2 = 2`, `v^2 - u^2 = 2r` and `uv = z = sqrt(1 - lambda)`.
//! Constants and `r` are therefore lifted to degree-2 forms, which keeps every
//! ketket component homogeneous and lets the eigenvector recurrence run in
//! plain coefficient arithmetic.
//!
//! Coefficients are `f64` by default; any [`Real`] works, which is how the
//! metric is rebuilt in extended precision when it is badly conditioned.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest degree any [`HomogPoly`] may reach: `2 (N - 1)` for `N = 16`.
pub const MAX_DEGREE: usize = 30;
/// Default residue tolerance for [`HomogPoly::div_uv`] and [`HomogPoly::reduce_to_z`].
pub const DEFAULT_TOL: f64 = 1e-10;
const ZPOLY_TRIM: f64 = 1e-12;

/// `sum_m coeffs[m] * u^(d-m) * v^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogPoly<T = f64> {
    coeffs: Vec<T>,
}

fn max_abs_of<T: Real>(v: &[T]) -> f64 {
    v.iter().fold(0.0, |a, c| a.max(c.to_f64().abs()))
}

impl<T: Real> HomogPoly<T> {
    /// Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a homogeneous polynomial needs degree + 1 coefficients");
        HomogPoly { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        HomogPoly {
            coeffs: vec![T::zero(); degree + 1],
        }
    }

    /// `c * u^a * v^b`.
    pub fn monomial(a: usize, b: usize, c: T) -> Self {
        let mut p = HomogPoly::zero(a + b);
        p.coeffs[b] = c;
        p
    }

    pub fn u() -> Self {
        HomogPoly::monomial(1, 0, T::one())
    }

    pub fn v() -> Self {
        HomogPoly::monomial(0, 1, T::one())
    }

    pub fn uv() -> Self {
        HomogPoly::monomial(1, 1, T::one())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `u^(d-m) v^m`.
    pub fn coeff(&self, m: usize) -> T {
        self.coeffs.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs_of(&self.coeffs)
    }

    pub fn scale(&self, s: T) -> Self {
        HomogPoly {
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    pub fn add(&self, other: &HomogPoly<T>) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &HomogPoly<T>) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &HomogPoly<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(HomogPoly {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(a.clone(), b.clone()))
                .collect(),
        })
    }

    pub fn mul(&self, other: &HomogPoly<T>) -> Result<Self> {
        let degree = self.degree() + other.degree();
        if degree > MAX_DEGREE {
            return Err(Error::DegreeCap {
                degree,
                cap: MAX_DEGREE,
            });
        }
        let mut coeffs = vec![T::zero(); degree + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(HomogPoly { coeffs })
    }

    /// Exact division by `uv`. The pure powers `u^d` and `v^d` cannot be
    /// divided and must be negligible (relative to the largest coefficient).
    pub fn div_uv(&self, tol: f64) -> Result<Self> {
        let d = self.degree();
        if d < 2 {
            return Err(Error::Domain(format!(
                "division by uv needs degree >= 2, got {d}"
            )));
        }
        let scale = self.max_abs().max(1.0);
        let residue = self.coeffs[0].to_f64().abs().max(self.coeffs[d].to_f64().abs());
        if residue > tol * scale {
            return Err(Error::DivisionResidue { residue });
        }
        Ok(HomogPoly {
            coeffs: self.coeffs[1..d].to_vec(),
        })
    }

    /// Evaluates at explicit `u`, `v`.
    pub fn eval_uv(&self, u: &T, v: &T) -> T {
        let d = self.degree();
        // Horner in the ratio would divide by u; walk the powers instead.
        let mut upow = vec![T::one(); d + 1];
        let mut vpow = vec![T::one(); d + 1];
        for k in 1..=d {
            upow[k] = upow[k - 1].clone() * u.clone();
            vpow[k] = vpow[k - 1].clone() * v.clone();
        }
        self.coeffs.iter().enumerate().fold(T::zero(), |acc, (m, c)| {
            acc + c.clone() * upow[d - m].clone() * vpow[m].clone()
        })
    }

    /// Rewrites an even-degree form as a polynomial in `z = uv`, using
    /// `u^2 = 1 - r`, `v^2 = 1 + r` and `r^2 = 1 - z^2`. Every odd power of
    /// `r` has to cancel; otherwise the form is not a function of `z` alone.
    pub fn reduce_to_z(&self, tol: f64) -> Result<ZPoly<T>> {
        let d = self.degree();
        if d % 2 != 0 {
            return Err(Error::Domain(format!(
                "only even-degree forms reduce to z, got degree {d}"
            )));
        }
        // self = even(r) + z * odd(r)
        let half = d / 2;
        let mut even = vec![T::zero(); half + 1];
        let mut odd = vec![T::zero(); half + 1];
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (a, b) = (d - m, m);
            let (target, pa, pb) = if a % 2 == 0 {
                (&mut even, a / 2, b / 2)
            } else {
                (&mut odd, (a - 1) / 2, (b - 1) / 2)
            };
            for (k, e) in one_minus_plus_r(pa, pb).iter().enumerate() {
                target[k] = target[k].clone() + c.clone() * T::from_f64(*e);
            }
        }
        let scale = max_abs_of(&even).max(max_abs_of(&odd)).max(1.0);
        let odd_powers = |v: &[T]| v.iter().skip(1).step_by(2).fold(0.0_f64, |m, c| m.max(c.to_f64().abs()));
        let residue = odd_powers(&even).max(odd_powers(&odd));
        if residue > tol * scale {
            return Err(Error::ResidualR { residue });
        }
        // r^(2k) = (1 - z^2)^k
        let mut z = vec![T::zero(); d + 2];
        for k in 0..=half / 2 {
            let pow = one_minus_z2_pow(k);
            for (i, p) in pow.iter().enumerate() {
                let p = T::from_f64(*p);
                z[i] = z[i].clone() + even[2 * k].clone() * p.clone();
                z[i + 1] = z[i + 1].clone() + odd[2 * k].clone() * p;
            }
        }
        Ok(ZPoly::new(z))
    }
}

impl HomogPoly<f64> {
    /// Evaluates at `u = sqrt(1 - sqrt(lambda))`, `v = sqrt(1 + sqrt(lambda))`.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        let (u, v) = uv_of_lambda(lambda)?;
        Ok(self.eval_uv(&u, &v))
    }
}

/// `(u, v)` for a given `lambda` in `[0, 1]`.
pub fn uv_of_lambda(lambda: f64) -> Result<(f64, f64)> {
    uv_of_lambda_in(lambda)
}

pub fn uv_of_lambda_in<T: Real>(lambda: f64) -> Result<(T, T)> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!(
            "u, v are real only for lambda in [0, 1], got {lambda}"
        )));
    }
    let r = T::from_f64(lambda).sqrt();
    let u = (T::one() - r.clone()).max_of(T::zero()).sqrt();
    Ok((u, (T::one() + r).sqrt()))
}

/// Coefficients in `r` of `(1 - r)^p (1 + r)^q`. Small integers, exact in `f64`.
fn one_minus_plus_r(p: usize, q: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..p {
        out = convolve(&out, &[1.0, -1.0]);
    }
    for _ in 0..q {
        out = convolve(&out, &[1.0, 1.0]);
    }
    out
}

/// Coefficients in `z` of `(1 - z^2)^k`.
fn one_minus_z2_pow(k: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        out = convolve(&out, &[1.0, 0.0, -1.0]);
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `(c/2)(u^2 + v^2)`: the constant `c` as a degree-2 form.
pub fn homog_const(c: f64) -> HomogPoly {
    homog_const_in(c)
}

pub fn homog_const_in<T: Real>(c: T) -> HomogPoly<T> {
    let h = c / T::from_i64(2);
    HomogPoly::new(vec![h.clone(), T::zero(), h])
}

/// `(v^2 - u^2)/2`: the variable `r = sqrt(lambda)` as a degree-2 form.
pub fn homog_r() -> HomogPoly {
    homog_r_in()
}

pub fn homog_r_in<T: Real>() -> HomogPoly<T> {
    let h = T::from_f64(0.5);
    HomogPoly::new(vec![-h.clone(), T::zero(), h])
}

/// Polynomial in `z`, coefficient of `z^k` at index `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZPoly<T = f64> {
    coeffs: Vec<T>,
}

impl<T: Real> ZPoly<T> {
    /// Trailing coefficients below `1e-12` are dropped.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.to_f64().abs() < ZPOLY_TRIM) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    /// Largest coefficient difference to `other`.
    pub fn distance(&self, other: &ZPoly<T>) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).fold(0.0, |m, k| {
            m.max((self.coeff(k) - other.coeff(k)).to_f64().abs())
        })
    }

    pub fn to_f64(&self) -> ZPoly<f64> {
        ZPoly {
            coeffs: self.coeffs.iter().map(Real::to_f64).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hp(c: &[f64]) -> HomogPoly {
        HomogPoly::new(c.to_vec())
    }

    #[test]
    fn add_examples() {
        assert_eq!(HomogPoly::u().add(&HomogPoly::u().scale(-1.0)).unwrap(), hp(&[0.0, 0.0]));
        // (u^2 + v^2) + (u^2 - v^2) = 2u^2
        assert_eq!(hp(&[1.0, 0.0, 1.0]).add(&hp(&[1.0, 0.0, -1.0])).unwrap(), hp(&[2.0, 0.0, 0.0]));
        assert_eq!(HomogPoly::uv().add(&HomogPoly::uv()).unwrap(), hp(&[0.0, 2.0, 0.0]));
        assert!(matches!(
            HomogPoly::<f64>::u().add(&HomogPoly::uv()),
            Err(Error::DegreeMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn mul_examples() {
        let u_minus_v = hp(&[1.0, -1.0]);
        let u_plus_v = hp(&[1.0, 1.0]);
        assert_eq!(u_minus_v.mul(&u_plus_v).unwrap(), hp(&[1.0, 0.0, -1.0]));
        assert_eq!(HomogPoly::uv().mul(&HomogPoly::uv()).unwrap(), hp(&[0.0, 0.0, 1.0, 0.0, 0.0]));
        // (u^2 + 2v^2) u = u^3 + 2uv^2
        assert_eq!(hp(&[1.0, 0.0, 2.0]).mul(&HomogPoly::u()).unwrap(), hp(&[1.0, 0.0, 2.0, 0.0]));
    }

    #[test]
    fn mul_respects_degree_cap() {
        let a = HomogPoly::<f64>::zero(20);
        let b = HomogPoly::zero(11);
        assert!(matches!(a.mul(&b), Err(Error::DegreeCap { degree: 31, .. })));
        assert!(a.mul(&HomogPoly::zero(10)).is_ok());
    }

    #[test]
    fn homog_const_examples() {
        assert_eq!(homog_const(2.0), hp(&[1.0, 0.0, 1.0]));
        assert_eq!(homog_const(0.0), HomogPoly::zero(2));
        assert_eq!(homog_const(3.0), hp(&[1.5, 0.0, 1.5]));
    }

    #[test]
    fn homog_r_evaluations() {
        assert_abs_diff_eq!(homog_r().eval(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(homog_r().eval(0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(homog_r().eval(0.25).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn div_uv_examples() {
        // u^2 v / uv = u
        assert_eq!(hp(&[0.0, 1.0, 0.0, 0.0]).div_uv(DEFAULT_TOL).unwrap(), HomogPoly::u());
        // (u^3 v + u v^3) / uv = u^2 + v^2
        assert_eq!(
            hp(&[0.0, 1.0, 0.0, 1.0, 0.0]).div_uv(DEFAULT_TOL).unwrap(),
            hp(&[1.0, 0.0, 1.0])
        );
        assert!(matches!(
            hp(&[1.0, 0.0, 0.0, 0.0]).div_uv(DEFAULT_TOL),
            Err(Error::DivisionResidue { .. })
        ));
        assert!(HomogPoly::<f64>::u().div_uv(DEFAULT_TOL).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_abs_diff_eq!(HomogPoly::uv().eval(0.75).unwrap(), 0.5, epsilon = 1e-15);
        for lambda in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert_abs_diff_eq!(hp(&[1.0, 0.0, 1.0]).eval(lambda).unwrap(), 2.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(hp(&[-1.0, 0.0, 1.0]).eval(0.25).unwrap(), 1.0, epsilon = 1e-15);
        assert!(HomogPoly::u().eval(-0.1).is_err());
        assert!(HomogPoly::u().eval(1.5).is_err());
    }

    #[test]
    fn reduce_examples() {
        // (u^2 + v^2)^2 / 4 = 1
        let s = hp(&[1.0, 0.0, 1.0]);
        let q = s.mul(&s).unwrap().scale(0.25);
        assert!(q.reduce_to_z(DEFAULT_TOL).unwrap().distance(&ZPoly::new(vec![1.0])) < 1e-15);
        // u^2 v^2 = z^2
        let z2 = HomogPoly::monomial(2, 2, 1.0).reduce_to_z(DEFAULT_TOL).unwrap();
        assert!(z2.distance(&ZPoly::new(vec![0.0, 0.0, 1.0])) < 1e-15);
        // -(u^3 v + u v^3)/2 = -z
        let p = hp(&[0.0, -0.5, 0.0, -0.5, 0.0]).reduce_to_z(DEFAULT_TOL).unwrap();
        assert!(p.distance(&ZPoly::new(vec![0.0, -1.0])) < 1e-15);
    }

    #[test]
    fn reduce_rejects_r_dependence() {
        // u^2 = 1 - r
        assert!(matches!(
            HomogPoly::monomial(2, 0, 1.0).reduce_to_z(DEFAULT_TOL),
            Err(Error::ResidualR { .. })
        ));
        assert!(HomogPoly::<f64>::u().reduce_to_z(DEFAULT_TOL).is_err());
    }

    #[test]
    fn zpoly_trims_and_evaluates() {
        let p = ZPoly::new(vec![1.0, -2.0, 3.0, 1e-14]);
        assert_eq!(p.degree(), 2);
        assert_abs_diff_eq!(p.eval(&0.5), 1.0 - 1.0 + 0.75, epsilon = 1e-15);
        assert!(ZPoly::new(vec![0.0, 1e-13]).is_zero());
    }
}
