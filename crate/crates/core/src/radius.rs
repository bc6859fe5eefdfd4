//! Exact radii.
//!
//! A [`Radius`] is stored through its square as a reduced rational, so every
//! ball-membership test `|z|² ≤ r²` is an exact integer/rational comparison.
//! Irrational radii such as `√2` are representable as long as their square is
//! rational.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Largest numerator/denominator accepted for `r` itself. Keeps `r²` and the
/// products formed against lattice norms inside `i128`.
const MAX_COMPONENT: i128 = 1 << 60;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Radius {
    r2: Rational,
}

impl Radius {
    pub fn zero() -> Self {
        Radius { r2: Rational::zero() }
    }

    pub fn from_integer(r: i64) -> Result<Self> {
        Self::from_ratio(r as i128, 1)
    }

    /// `r = num / den`.
    pub fn from_ratio(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRadius("zero denominator".into()));
        }
        let r = Rational::new(num, den);
        if r < Rational::zero() {
            return Err(Error::InvalidRadius(format!("negative radius {num}/{den}")));
        }
        if r.numer().abs() > MAX_COMPONENT || r.denom().abs() > MAX_COMPONENT {
            return Err(Error::InvalidRadius(format!("radius {num}/{den} out of range")));
        }
        let r2 = Rational::new(
            r.numer().checked_mul(*r.numer()).ok_or_else(overflow)?,
            r.denom().checked_mul(*r.denom()).ok_or_else(overflow)?,
        );
        Ok(Radius { r2 })
    }

    /// Radius whose square is `r2` (e.g. `from_squared(2, 1)` is `√2`).
    pub fn from_squared(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRadius("zero denominator".into()));
        }
        let r2 = Rational::new(num, den);
        if r2 < Rational::zero() {
            return Err(Error::InvalidRadius("negative squared radius".into()));
        }
        Ok(Radius { r2 })
    }

    /// Exact rational value of a finite, nonnegative float.
    pub fn from_f64(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidRadius(format!("{r} is not a finite nonnegative number")));
        }
        if r == 0.0 {
            return Ok(Self::zero());
        }
        let bits = r.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut mant, mut exp) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let tz = mant.trailing_zeros().min((-exp).max(0) as u32);
        mant >>= tz;
        exp += tz as i32;
        if exp >= 0 {
            if exp > 60 {
                return Err(Error::InvalidRadius(format!("{r} out of range")));
            }
            let num = (mant as i128).checked_shl(exp as u32).ok_or_else(overflow)?;
            Self::from_ratio(num, 1)
        } else {
            if -exp > 60 {
                return Err(Error::InvalidRadius(format!(
                    "{r} has no exact rational with a denominator below 2^60; pass it as p/q"
                )));
            }
            Self::from_ratio(mant as i128, 1i128 << (-exp))
        }
    }

    /// Exact `r²`.
    pub fn squared(&self) -> &Rational {
        &self.r2
    }

    /// `r` itself when it is rational.
    pub fn as_rational(&self) -> Option<Rational> {
        let n = self.r2.numer().sqrt();
        let d = self.r2.denom().sqrt();
        (n * n == *self.r2.numer() && d * d == *self.r2.denom()).then(|| Rational::new(n, d))
    }

    pub fn to_f64(&self) -> f64 {
        self.r2.to_f64().unwrap_or(f64::INFINITY).sqrt()
    }

    /// `floor(r)`, the largest coordinate offset that can occur in the ball.
    pub fn floor(&self) -> i64 {
        let fl = self.r2.numer().div_euclid(*self.r2.denom());
        fl.sqrt() as i64
    }

    /// `|v|² ≤ r²` for an integer squared norm.
    pub fn contains_norm2(&self, n2: i128) -> bool {
        // n2 is an integer, so n2 ≤ num/den ⇔ n2 ≤ floor(num/den).
        n2 <= self.r2.numer().div_euclid(*self.r2.denom())
    }

    /// `q ≤ r²` for a rational squared norm.
    pub fn contains_rational_norm2(&self, q: &Rational) -> bool {
        q.cmp(&self.r2) != Ordering::Greater
    }

    /// `r · k` for a positive rational factor.
    pub fn scaled(&self, num: i128, den: i128) -> Result<Self> {
        if num < 0 || den <= 0 {
            return Err(Error::InvalidRadius("scale factor must be nonnegative".into()));
        }
        let f2 = Rational::new(num * num, den * den);
        let r2 = Rational::new(
            self.r2.numer().checked_mul(*f2.numer()).ok_or_else(overflow)?,
            self.r2.denom().checked_mul(*f2.denom()).ok_or_else(overflow)?,
        );
        Ok(Radius { r2 })
    }
}

fn overflow() -> Error {
    Error::InvalidRadius("radius out of range".into())
}

impl PartialOrd for Radius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Radius {
    fn cmp(&self, other: &Self) -> Ordering {
        self.r2.cmp(&other.r2)
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None if *self.r2.denom() == 1 => write!(f, "sqrt({})", self.r2.numer()),
            None => write!(f, "sqrt({}/{})", self.r2.numer(), self.r2.denom()),
        }
    }
}

fn parse_ratio(s: &str) -> Result<(i128, i128)> {
    let bad = || Error::InvalidRadius(format!("cannot parse {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => Ok((
            n.trim().parse().map_err(|_| bad())?,
            d.trim().parse().map_err(|_| bad())?,
        )),
        None => Ok((s.trim().parse().map_err(|_| bad())?, 1)),
    }
}

impl FromStr for Radius {
    type Err = Error;

    /// Accepts `"5"`, `"5/2"`, `"2.5"` (exact value of the float) and
    /// `"sqrt(2)"` / `"sqrt(9/2)"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
            let (n, d) = parse_ratio(inner)?;
            return Radius::from_squared(n, d);
        }
        if s.contains(['.', 'e', 'E']) {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::InvalidRadius(format!("cannot parse {s:?}")))?;
            return Radius::from_f64(v);
        }
        let (n, d) = parse_ratio(s)?;
        Radius::from_ratio(n, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("5".parse::<Radius>().unwrap(), Radius::from_integer(5).unwrap());
        assert_eq!("5/2".parse::<Radius>().unwrap(), Radius::from_ratio(5, 2).unwrap());
        assert_eq!("2.5".parse::<Radius>().unwrap(), Radius::from_ratio(5, 2).unwrap());
        assert_eq!("sqrt(2)".parse::<Radius>().unwrap().squared(), &Rational::from(2));
        assert!("-1".parse::<Radius>().is_err());
        assert!("x".parse::<Radius>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "7", "5/2", "sqrt(2)", "sqrt(9/2)"] {
            let r: Radius = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
            assert_eq!(r.to_string().parse::<Radius>().unwrap(), r);
        }
    }

    #[test]
    fn float_conversion_is_exact() {
        let r = Radius::from_f64(0.1).unwrap();
        let q = r.as_rational().unwrap();
        assert_eq!(q.numer().to_f64().unwrap() / q.denom().to_f64().unwrap(), 0.1);
        assert_eq!(*q.denom(), 1i128 << 55);
    }

    #[test]
    fn membership_is_exact() {
        let r = Radius::from_squared(2, 1).unwrap();
        assert!(r.contains_norm2(2));
        assert!(!r.contains_norm2(3));
        assert_eq!(r.floor(), 1);
        let r = Radius::from_ratio(5, 2).unwrap();
        assert!(r.contains_norm2(6));
        assert!(!r.contains_norm2(7));
        assert!(r.contains_rational_norm2(&Rational::new(25, 4)));
        assert!(!r.contains_rational_norm2(&Rational::new(26, 4)));
        assert_eq!(r.floor(), 2);
    }

    #[test]
    fn scaling() {
        let r = Radius::from_integer(8).unwrap().scaled(1, 2).unwrap();
        assert_eq!(r, Radius::from_integer(4).unwrap());
    }
}
