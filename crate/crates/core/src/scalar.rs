//! Coefficient arithmetic shared by the exact and floating-point pipelines.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bseries::ClassSystem;
use crate::linalg;

pub type Rational = BigRational;

/// Ring operations plus embedding of exact rationals. Implemented by the
/// numeric scalars and by [`crate::poly::Poly`] for symbolic derivations.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_rational(r: &Rational) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(num.into(), den.into()))
    }
}

/// A numeric scalar: either an exact rational or an `f64`.
pub trait Scalar: Coeff + std::ops::Div<Output = Self> {
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    /// `true` when `|self| <= tol`; exact scalars ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    fn abs(&self) -> Self;

    /// Squared least-squares residual of `M μ = w` for one conjugacy class.
    fn ep_residual_sq(class: &ClassSystem, w: &[Self]) -> Self;
}

impl Coeff for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn ep_residual_sq(class: &ClassSystem, w: &[Self]) -> Self {
        linalg::projected_norm_sq(&class.left_null, w)
    }
}

impl Coeff for f64 {
    fn from_rational(r: &Rational) -> Self {
        ratio_to_f64(r)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn ep_residual_sq(class: &ClassSystem, w: &[Self]) -> Self {
        linalg::lstsq_residual_sq(&class.matrix, class.rank, w)
    }
}

/// Correctly scaled conversion that survives numerators and denominators
/// beyond the `f64` range.
pub fn ratio_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, an integer, or a decimal literal such as `"1.4142"` or
/// `"3e-2"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
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
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

/// Closest fraction with denominator at most `max_den` (continued fractions).
pub fn best_rational(x: f64, max_den: i64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(Rational::new(BigInt::from(h1), BigInt::from(k1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rational("1/20"), Some(rat(1, 20)));
        assert_eq!(parse_rational("-35816/35721"), Some(rat(-35816, 35721)));
        assert_eq!(parse_rational("1.4142"), Some(rat(14142, 10000)));
        assert_eq!(parse_rational("0.05"), Some(rat(1, 20)));
        assert_eq!(parse_rational("3e-2"), Some(rat(3, 100)));
        assert_eq!(parse_rational("-1.5E1"), Some(int(-15)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn huge_ratios_convert() {
        let big = Rational::new(
            num_traits::pow(BigInt::from(10), 400) * 3,
            num_traits::pow(BigInt::from(10), 400) * 4,
        );
        assert!((ratio_to_f64(&big) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn continued_fraction_recovers_small_denominators() {
        assert_eq!(best_rational(2.0 / 3.0, 1000), Some(rat(2, 3)));
        assert_eq!(best_rational(-5.0 / 48.0, 1000), Some(rat(-5, 48)));
        assert_eq!(best_rational(0.1, 1_000_000), Some(rat(1, 10)));
    }
}
