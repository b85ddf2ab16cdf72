//! Siegel transforms `f̂(Λ) = Σ_{v ∈ Λ \ {0}} f(v)`, Haar-random rotations,
//! and Monte Carlo estimates of spherical averages `∫_K f̂(g_t k Λ) dk`.

mod average;
mod function;
mod haar;

use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::lattice::{
    count_region_with, enumerate::visit_box, exact, CountOptions, Lattice, LatticeError,
    DEFAULT_CANDIDATE_BUDGET,
};

pub use average::{spherical_average, spherical_samples, thm3_ratio, write_trace_csv, MCEstimate, Thm3Estimate};
pub use function::TestFunction;
pub use haar::{haar_rotation, orthogonality_residual, sample_rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SiegelError {
    #[error("{0}; try a smaller t")]
    Lattice(#[from] LatticeError),
    #[error("the denominator estimate is zero (increase t or M)")]
    DivisionByZero,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Relative slack below which the annulus test is redone exactly.
const GRAZE: f64 = 1e-9;

/// `f̂(Λ)`, optionally summed over primitive points only.
pub fn siegel_transform(f: &TestFunction, lattice: &Lattice, primitive_only: bool) -> Result<f64, SiegelError> {
    siegel_transform_with(f, lattice, primitive_only, DEFAULT_CANDIDATE_BUDGET)
}

pub fn siegel_transform_with(
    f: &TestFunction,
    lattice: &Lattice,
    primitive_only: bool,
    budget: u64,
) -> Result<f64, SiegelError> {
    if f.dim() != lattice.dim() {
        return Err(LatticeError::DimensionMismatch {
            expected: lattice.dim(),
            got: f.dim(),
        }
        .into());
    }
    let keep = |n: &[i64]| !primitive_only || is_primitive(n);
    match f {
        TestFunction::BoxIndicator { .. } => {
            let mut count = 0u64;
            visit_box(lattice, &f.support_box()?, budget, |n, _| {
                if keep(n) {
                    count += 1;
                }
            })?;
            Ok(count as f64)
        }
        TestFunction::RegionIndicator { region } => {
            let opts = CountOptions {
                witnesses: primitive_only,
                budget,
            };
            let r = count_region_with(lattice, region, opts)?;
            let hits = match r.witnesses {
                Some(w) => w
                    .iter()
                    .filter(|w| keep(&w.coords) && (region.directions.is_none() || w.in_a == Some(true)))
                    .count() as u64,
                None => r.in_a.unwrap_or(r.total),
            };
            Ok(hits as f64)
        }
        TestFunction::RadialIndicator { r_min, r_max, .. } => {
            let mut count = 0u64;
            let (lo2, hi2) = (r_min * r_min, r_max * r_max);
            let (lo_x, hi_x) = (exact::rational(*r_min), exact::rational(*r_max));
            visit_box(lattice, &f.support_box()?, budget, |n, v| {
                if !keep(n) {
                    return;
                }
                let s: f64 = v.iter().map(|x| x * x).sum();
                let inside = if (s - lo2).abs() <= GRAZE * s.max(1.0) || (s - hi2).abs() <= GRAZE * s.max(1.0) {
                    let s = exact::sum_squares(&lattice.exact_point(n));
                    &lo_x * &lo_x <= s && s <= &hi_x * &hi_x
                } else {
                    lo2 <= s && s <= hi2
                };
                if inside {
                    count += 1;
                }
            })?;
            Ok(count as f64)
        }
        TestFunction::ScaledSum { terms } => terms
            .iter()
            .map(|(c, g)| Ok(c * siegel_transform_with(g, lattice, primitive_only, budget)?))
            .sum(),
    }
}

fn is_primitive(n: &[i64]) -> bool {
    n.iter().fold(0i64, |g, x| g.gcd(x)).to_u64() == Some(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{AxisBox, RegionSpec};
    use crate::sphere::DirectionSet;
    use nalgebra::DMatrix;

    #[test]
    fn integer_lattice_boxes() {
        let z2 = Lattice::integer(2);
        let f = TestFunction::box_indicator(&AxisBox::cube(2, 1.5));
        assert_eq!(siegel_transform(&f, &z2, false).unwrap(), 8.0);
        assert_eq!(siegel_transform(&f, &z2, true).unwrap(), 8.0);
        let g = TestFunction::box_indicator(&AxisBox::cube(2, 2.5));
        assert_eq!(siegel_transform(&g, &z2, false).unwrap(), 24.0);
        // (±2, 0), (0, ±2), (±2, ±2) are not primitive.
        assert_eq!(siegel_transform(&g, &z2, true).unwrap(), 16.0);
    }

    #[test]
    fn radial_is_rotation_invariant() {
        let f = TestFunction::radial(2, 0.5, 1.5);
        let z2 = Lattice::integer(2);
        assert_eq!(siegel_transform(&f, &z2, false).unwrap(), 8.0);
        let th: f64 = 0.7;
        let k = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let moved = z2.transformed(&k).unwrap();
        assert_eq!(siegel_transform(&f, &moved, false).unwrap(), 8.0);
        // Annulus boundary exactly on lattice points.
        let unit = TestFunction::radial(2, 1.0, 2.0);
        assert_eq!(siegel_transform(&unit, &z2, false).unwrap(), 12.0);
    }

    #[test]
    fn additivity() {
        let z3 = Lattice::integer(3);
        let a = TestFunction::box_indicator(&AxisBox::cube(3, 1.2));
        let b = TestFunction::radial(3, 0.0, 2.1);
        let sum = TestFunction::scaled_sum(vec![(3.0, a.clone()), (-0.5, b.clone())]);
        let fa = siegel_transform(&a, &z3, false).unwrap();
        let fb = siegel_transform(&b, &z3, false).unwrap();
        assert_eq!(siegel_transform(&sum, &z3, false).unwrap(), 3.0 * fa - 0.5 * fb);
    }

    #[test]
    fn region_with_directions() {
        let z2 = Lattice::integer(2);
        let spec = RegionSpec::r(1, 1.0, 0.1, 1.0);
        let all = TestFunction::region(spec.clone()).unwrap();
        // The only integer height in [0.1, 1] is 1, leaving v_1 in {-1, 0, 1}.
        assert_eq!(siegel_transform(&all, &z2, false).unwrap(), 3.0);
        let neg = TestFunction::region(spec.with_directions(DirectionSet::sign_set(&[-1]).unwrap())).unwrap();
        assert_eq!(siegel_transform(&neg, &z2, false).unwrap(), 1.0);
        assert_eq!(siegel_transform(&neg, &z2, true).unwrap(), 1.0);
    }
}
