//! Real scalar abstraction shared by the matrix and oracle code.
//!
//! Everything numeric in the crate runs on `f64`. The oracle and the model
//! builders are additionally generic over [`Real`] so that the same code can be
//! run in 256-bit arithmetic ([`Mp`]). Near the exceptional point the chain
//! matrices are so ill-conditioned that rounding the *entries* to `f64` already
//! moves eigenvalues by far more than the accuracy the cross-checks need.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use astro_float::{BigFloat, RoundingMode, Sign};
use num_complex::Complex;
use num_traits::{Num, One, Zero};

/// Field operations plus the handful of extras the eigensolver needs.
pub trait Real:
    Clone + fmt::Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    /// Unit roundoff of the representation.
    fn epsilon() -> Self;

    fn from_i64(x: i64) -> Self {
        Self::from_f64(x as f64)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

/// Modulus of a complex number.
pub fn cabs<T: Real>(z: &Complex<T>) -> T {
    (z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()).sqrt()
}

/// Principal square root of a real number, returned as a complex value.
pub fn csqrt_real<T: Real>(x: T) -> Complex<T> {
    if x >= T::zero() {
        Complex::new(x.sqrt(), T::zero())
    } else {
        Complex::new(T::zero(), (-x).sqrt())
    }
}

pub fn to_c64<T: Real>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// Working precision of [`Mp`] in bits.
pub const MP_BITS: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// 256-bit binary floating point number.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Mp(BigFloat);

impl Mp {
    fn wrap(x: BigFloat) -> Self {
        debug_assert!(!x.is_nan(), "Mp arithmetic produced NaN");
        Mp(x)
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp({})", self.0)
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Mp {
    type Output = Mp;
    fn add(self, rhs: Mp) -> Mp {
        Mp::wrap(self.0.add(&rhs.0, MP_BITS, RM))
    }
}

impl Sub for Mp {
    type Output = Mp;
    fn sub(self, rhs: Mp) -> Mp {
        Mp::wrap(self.0.sub(&rhs.0, MP_BITS, RM))
    }
}

impl Mul for Mp {
    type Output = Mp;
    fn mul(self, rhs: Mp) -> Mp {
        Mp::wrap(self.0.mul(&rhs.0, MP_BITS, RM))
    }
}

impl Div for Mp {
    type Output = Mp;
    fn div(self, rhs: Mp) -> Mp {
        Mp::wrap(self.0.div(&rhs.0, MP_BITS, RM))
    }
}

impl Rem for Mp {
    type Output = Mp;
    fn rem(self, rhs: Mp) -> Mp {
        Mp::wrap(self.0.rem(&rhs.0))
    }
}

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(-self.0)
    }
}

impl Zero for Mp {
    fn zero() -> Self {
        Mp(BigFloat::from_f64(0.0, MP_BITS))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Mp {
    fn one() -> Self {
        Mp(BigFloat::from_f64(1.0, MP_BITS))
    }
}

impl Num for Mp {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("unsupported radix {radix}"));
        }
        let x: BigFloat = s.parse().map_err(|_| format!("invalid number {s:?}"))?;
        if x.is_nan() {
            return Err(format!("invalid number {s:?}"));
        }
        Ok(Mp(x))
    }
}

impl Real for Mp {
    fn from_f64(x: f64) -> Self {
        Mp(BigFloat::from_f64(x, MP_BITS))
    }

    fn from_i64(x: i64) -> Self {
        Mp(BigFloat::from_i64(x, MP_BITS))
    }

    fn to_f64(&self) -> f64 {
        // Mantissa words are little-endian and normalised to 0.m × 2^e.
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        if self.0.is_zero() || words.is_empty() {
            return 0.0;
        }
        let top = words[words.len() - 1] as f64;
        let next = if words.len() > 1 {
            words[words.len() - 2] as f64
        } else {
            0.0
        };
        let frac = (top + next / 18446744073709551616.0) / 18446744073709551616.0;
        let mag = frac * 2f64.powi(exp);
        match sign {
            Sign::Neg => -mag,
            Sign::Pos => mag,
        }
    }

    fn sqrt(&self) -> Self {
        Mp::wrap(self.0.sqrt(MP_BITS, RM))
    }

    fn abs(&self) -> Self {
        Mp(self.0.abs())
    }

    fn epsilon() -> Self {
        Mp(BigFloat::from_f64(2f64.powi(1 - MP_BITS as i32), MP_BITS))
    }
}
