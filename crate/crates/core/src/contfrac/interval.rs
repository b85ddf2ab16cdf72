use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A closed interval with exact rational endpoints, used as a guaranteed
/// enclosure of some real quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RationalInterval {
    /// Builds the interval spanned by two endpoints given in either order.
    pub fn spanning(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            RationalInterval { lo: a, hi: b }
        } else {
            RationalInterval { lo: b, hi: a }
        }
    }

    pub fn point(v: BigRational) -> Self {
        RationalInterval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    /// True when `other` lies inside `self` (closed containment).
    pub fn encloses(&self, other: &RationalInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// True when the interval lies strictly inside the open interval `(lo, hi)`.
    pub fn inside_open(&self, lo: &BigRational, hi: &BigRational) -> bool {
        lo < &self.lo && &self.hi < hi
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo.is_positive() || self.hi.is_negative()
    }

    /// Sign of every point of the interval, if it is uniform.
    pub fn sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    /// Interval of absolute values.
    pub fn abs(&self) -> RationalInterval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            RationalInterval::spanning(-self.hi.clone(), -self.lo.clone())
        } else {
            let m = if -self.lo.clone() > self.hi {
                -self.lo.clone()
            } else {
                self.hi.clone()
            };
            RationalInterval {
                lo: BigRational::zero(),
                hi: m,
            }
        }
    }

    pub fn to_f64_bounds(&self) -> (f64, f64) {
        (
            self.lo.to_f64().unwrap_or(f64::NAN),
            self.hi.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    lo: String,
    hi: String,
}

impl Serialize for RationalInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IntervalRepr {
            lo: self.lo.to_string(),
            hi: self.hi.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalInterval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = IntervalRepr::deserialize(d)?;
        let lo: BigRational = repr.lo.parse().map_err(serde::de::Error::custom)?;
        let hi: BigRational = repr.hi.parse().map_err(serde::de::Error::custom)?;
        if lo > hi {
            return Err(serde::de::Error::custom("interval endpoints out of order"));
        }
        Ok(RationalInterval { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn spanning_orders_endpoints() {
        let i = RationalInterval::spanning(r(4, 17), r(1, 4));
        assert_eq!(i.lo(), &r(4, 17));
        assert_eq!(i.hi(), &r(1, 4));
        assert_eq!(i.width(), r(1, 68));
    }

    #[test]
    fn abs_straddling_zero() {
        let i = RationalInterval::spanning(r(-1, 3), r(1, 2));
        let a = i.abs();
        assert_eq!(a.lo(), &r(0, 1));
        assert_eq!(a.hi(), &r(1, 2));
        assert_eq!(i.sign(), None);
        assert_eq!(RationalInterval::spanning(r(-2, 3), r(-1, 3)).sign(), Some(-1));
    }

    #[test]
    fn serde_uses_decimal_strings() {
        let i = RationalInterval::spanning(r(1, 4), r(4, 17));
        let s = serde_json::to_string(&i).unwrap();
        assert_eq!(s, r#"{"lo":"4/17","hi":"1/4"}"#);
        let back: RationalInterval = serde_json::from_str(&s).unwrap();
        assert_eq!(back, i);
    }
}
