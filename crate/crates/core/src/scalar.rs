//! Scalar fields a kernel can take values in.
//!
//! Exact modes (`BigRational`, `Complex<BigRational>`) compare with `==`;
//! float modes compare within an absolute tolerance.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::complex::Complex64;
use num::{BigRational, Complex, One, Signed, ToPrimitive, Zero};

/// Absolute tolerance used by float modes for identities that hold exactly
/// in rational mode.
pub const FLOAT_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const EXACT: bool;

    fn conj(&self) -> Self;
    fn to_c64(&self) -> Complex64;
    fn from_rational(r: &BigRational) -> Self;
    fn is_real_nonnegative(&self) -> bool;

    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    fn re_f64(&self) -> f64 {
        self.to_c64().re
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_c64() - other.to_c64()).norm() <= tol
        }
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn conj(&self) -> Self {
        *self
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn is_real_nonnegative(&self) -> bool {
        *self >= -FLOAT_TOL
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn is_real_nonnegative(&self) -> bool {
        self.im.abs() <= FLOAT_TOL && self.re >= -FLOAT_TOL
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn conj(&self) -> Self {
        self.clone()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn is_real_nonnegative(&self) -> bool {
        !self.is_negative()
    }
    fn abs_f64(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
}

impl Scalar for Complex<BigRational> {
    const EXACT: bool = true;

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }
    fn is_real_nonnegative(&self) -> bool {
        self.im.is_zero() && !self.re.is_negative()
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.025` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: num::BigInt = num.trim().parse().ok()?;
        let den: num::BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: num::BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let all = all / num::BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = num::BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(all * num::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

pub fn is_one<S: Scalar>(value: &S) -> bool {
    value.close_to(&S::one(), FLOAT_TOL)
}
