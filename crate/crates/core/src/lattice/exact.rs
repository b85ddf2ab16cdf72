//! Exact re-evaluation of floating-point predicates near their boundaries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The exact value of a finite `f64`.
pub(crate) fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(|| panic!("non-finite value {v} in exact path"))
}

pub(crate) fn pow(v: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= v;
    }
    acc
}

pub(crate) fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub(crate) fn sup_abs(v: &[BigRational]) -> BigRational {
    v.iter()
        .map(|x| x.abs())
        .fold(BigRational::zero(), |m, x| if x > m { x } else { m })
}

pub(crate) fn sum_squares(v: &[BigRational]) -> BigRational {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn dot(a: &[f64], v: &[BigRational]) -> BigRational {
    a.iter().zip(v).map(|(x, y)| rational(*x) * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_float_values() {
        assert_eq!(rational(0.5), BigRational::new(1.into(), 2.into()));
        // 0.1 is not 1/10 in binary.
        assert_ne!(rational(0.1), BigRational::new(1.into(), 10.into()));
        assert_eq!(pow(&rational(1.5), 3), BigRational::new(27.into(), 8.into()));
    }
}
