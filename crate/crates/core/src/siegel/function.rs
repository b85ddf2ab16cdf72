use serde::{Deserialize, Serialize};

use crate::lattice::{region_volume, AxisBox, LatticeError, RegionKind, RegionSpec};
use crate::sphere::{ball_volume, Norm};

/// An indicator-type test function on `R^{d+1}` with known support and
/// integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// Indicator of a closed box.
    BoxIndicator { lower: Vec<f64>, upper: Vec<f64> },
    /// Indicator of `R_{eps,1}` or `R_{A,eps,1}`.
    RegionIndicator { region: RegionSpec },
    /// Indicator of the Euclidean annulus `r_min <= ‖v‖ <= r_max` in `R^dim`.
    RadialIndicator { dim: usize, r_min: f64, r_max: f64 },
    /// `Σ c_i f_i`.
    ScaledSum { terms: Vec<(f64, TestFunction)> },
}

impl TestFunction {
    pub fn box_indicator(bx: &AxisBox) -> Self {
        TestFunction::BoxIndicator {
            lower: bx.lower.clone(),
            upper: bx.upper.clone(),
        }
    }

    pub fn region(region: RegionSpec) -> Result<Self, LatticeError> {
        if region.kind != RegionKind::R || region.eps <= 0.0 || region.t != 1.0 {
            return Err(LatticeError::InvalidRegion(
                "a region test function needs kind R, eps > 0 and T = 1".into(),
            ));
        }
        region.validate()?;
        Ok(TestFunction::RegionIndicator { region })
    }

    pub fn radial(dim: usize, r_min: f64, r_max: f64) -> Self {
        assert!(0.0 <= r_min && r_min <= r_max, "annulus radii out of order");
        TestFunction::RadialIndicator { dim, r_min, r_max }
    }

    pub fn scaled_sum(terms: Vec<(f64, TestFunction)>) -> Self {
        TestFunction::ScaledSum { terms }
    }

    /// Ambient dimension `d + 1`.
    pub fn dim(&self) -> usize {
        match self {
            TestFunction::BoxIndicator { lower, .. } => lower.len(),
            TestFunction::RegionIndicator { region } => region.d + 1,
            TestFunction::RadialIndicator { dim, .. } => *dim,
            TestFunction::ScaledSum { terms } => terms.first().map_or(0, |(_, f)| f.dim()),
        }
    }

    pub fn support_box(&self) -> Result<AxisBox, LatticeError> {
        match self {
            TestFunction::BoxIndicator { lower, upper } => Ok(AxisBox::new(lower.clone(), upper.clone())),
            TestFunction::RegionIndicator { region } => region.bounding_box(),
            TestFunction::RadialIndicator { dim, r_max, .. } => Ok(AxisBox::cube(*dim, *r_max)),
            TestFunction::ScaledSum { terms } => {
                let mut out: Option<AxisBox> = None;
                for (_, f) in terms {
                    let b = f.support_box()?;
                    out = Some(match out {
                        None => b,
                        Some(o) => AxisBox::new(
                            o.lower.iter().zip(&b.lower).map(|(a, b)| a.min(*b)).collect(),
                            o.upper.iter().zip(&b.upper).map(|(a, b)| a.max(*b)).collect(),
                        ),
                    });
                }
                out.ok_or_else(|| LatticeError::InvalidRegion("empty sum".into()))
            }
        }
    }

    /// `∫ f dv`.
    pub fn integral(&self) -> Result<f64, LatticeError> {
        match self {
            TestFunction::BoxIndicator { lower, upper } => {
                Ok(lower.iter().zip(upper).map(|(l, u)| (u - l).max(0.0)).product())
            }
            TestFunction::RegionIndicator { region } => region_volume(region),
            TestFunction::RadialIndicator { dim, r_min, r_max } => {
                Ok(ball_volume(*dim, *r_max, Norm::Euclidean) - ball_volume(*dim, *r_min, Norm::Euclidean))
            }
            TestFunction::ScaledSum { terms } => terms
                .iter()
                .map(|(c, f)| Ok(c * f.integral()?))
                .sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::DirectionSet;
    use std::f64::consts::PI;

    #[test]
    fn integrals() {
        let b = TestFunction::box_indicator(&AxisBox::new(vec![-1.0, 0.0], vec![1.0, 3.0]));
        assert_eq!(b.integral().unwrap(), 6.0);
        let r = TestFunction::radial(2, 0.5, 1.5);
        assert!((r.integral().unwrap() - 2.0 * PI).abs() < 1e-12);
        let a = DirectionSet::hemisphere(&[1.0, 0.0]).unwrap();
        let reg = TestFunction::region(
            RegionSpec::r(2, 1.0, 0.1, 1.0)
                .with_norm(Norm::Euclidean)
                .with_directions(a),
        )
        .unwrap();
        assert!((reg.integral().unwrap() - 0.5 * PI * 10f64.ln()).abs() < 1e-12);
        let s = TestFunction::scaled_sum(vec![(2.0, b), (-1.0, r)]);
        assert!((s.integral().unwrap() - (12.0 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn region_function_needs_unit_scale() {
        assert!(TestFunction::region(RegionSpec::r(1, 1.0, 0.1, 2.0)).is_err());
        assert!(TestFunction::region(RegionSpec::p(1, 1.0, 1.0)).is_err());
    }
}
