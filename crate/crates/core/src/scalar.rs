//! Scalar abstraction shared by the exact and floating code paths.
//!
//! Everything that only needs ordered field arithmetic (segment sums, the
//! norm dynamic program, projections, pairings) is written against
//! [`Scalar`]. Certificates use [`Rational`]; the cutting-plane solver runs
//! its separation step in `f64`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational numbers with arbitrary precision.
pub type Rational = BigRational;

/// Ordered field elements usable by the generic algorithms.
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// Nearest `f64`, saturating to infinities.
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Clone
        + PartialOrd
        + Debug
        + Display
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `p`, or a finite decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{whole_digits}{frac}");
        let n =
            BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Always `p/q` form, including integers (`4/1`).
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Rounds toward negative infinity.
pub fn to_f64_down(r: &Rational) -> f64 {
    let f = r.to_f64().unwrap_or(f64::NAN);
    if !f.is_finite() {
        return f;
    }
    match Rational::from_float(f) {
        Some(exact) if &exact > r => f.next_down(),
        _ => f,
    }
}

/// Rounds toward positive infinity.
pub fn to_f64_up(r: &Rational) -> f64 {
    let f = r.to_f64().unwrap_or(f64::NAN);
    if !f.is_finite() {
        return f;
    }
    match Rational::from_float(f) {
        Some(exact) if &exact < r => f.next_up(),
        _ => f,
    }
}

/// Exact binary value of a finite float.
pub fn from_f64(f: f64) -> Rational {
    Rational::from_float(f).unwrap_or_else(Rational::zero)
}

/// Rounds `f` to the nearest multiple of `2^-bits`.
pub fn round_to_grid(f: f64, bits: u32) -> Rational {
    if !f.is_finite() {
        return Rational::zero();
    }
    let scale = 2f64.powi(bits as i32);
    let k = from_f64((f * scale).round());
    k / Rational::from_integer(num_traits::pow(BigInt::from(2), bits as usize))
}

/// A rational `u >= 0` with `u^2 >= r`.
pub fn sqrt_upper(r: &Rational) -> Rational {
    if !r.is_positive() {
        return Rational::zero();
    }
    let guess = r.to_f64().unwrap_or(f64::MAX).sqrt();
    let mut u = from_f64(guess.next_up());
    let bump = Rational::one() + rat(1, 1 << 40);
    while &(u.clone() * u.clone()) < r {
        u = u * bump.clone() + rat(1, 1 << 60);
    }
    u
}

/// A rational `l >= 0` with `l^2 <= r`.
pub fn sqrt_lower(r: &Rational) -> Rational {
    if !r.is_positive() {
        return Rational::zero();
    }
    let guess = r.to_f64().unwrap_or(0.0).sqrt();
    let mut l = from_f64(guess.next_down().max(0.0));
    let shrink = Rational::one() - rat(1, 1 << 40);
    while &(l.clone() * l.clone()) > r {
        l *= shrink.clone();
    }
    l
}

/// Serde adapter writing a list of rationals as `"p/q"` strings.
pub mod ratio_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{format_ratio, parse_rational, Rational};

    pub fn serialize<Z: Serializer>(v: &[Rational], ser: Z) -> Result<Z::Ok, Z::Error> {
        v.iter()
            .map(format_ratio)
            .collect::<Vec<_>>()
            .serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(de)?
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("1.5").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn directed_rounding_brackets_value() {
        for r in [rat(1, 3), rat(-1, 3), rat(2, 7), int(5), rat(-10, 9)] {
            let lo = to_f64_down(&r);
            let hi = to_f64_up(&r);
            assert!(from_f64(lo) <= r && r <= from_f64(hi));
            assert!(hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(1.0));
        }
    }

    #[test]
    fn sqrt_bounds_are_sound() {
        for r in [rat(2, 1), rat(1, 3), rat(9, 4), rat(12345, 7), int(0)] {
            let u = sqrt_upper(&r);
            let l = sqrt_lower(&r);
            assert!(u.clone() * u.clone() >= r);
            assert!(l.clone() * l.clone() <= r);
            assert!((u - l).to_f64().unwrap() < 1e-12 * (1.0 + r.to_f64().unwrap()));
        }
    }

    #[test]
    fn grid_rounding() {
        assert_eq!(round_to_grid(0.5, 10), rat(1, 2));
        let r = round_to_grid(1.0 / 3.0, 20);
        assert!((r.to_f64().unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }
}
