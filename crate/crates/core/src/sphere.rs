//! Direction sets on the unit sphere `S^{d-1}` and direction extraction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

/// Tolerance on the Euclidean norm of a [`UnitVector`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphereError {
    #[error("direction of the zero vector is undefined")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid direction set: {0}")]
    Invalid(String),
    #[error("cannot parse direction set {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// Norm applied to the `v_1` block of a vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Euclidean,
    #[default]
    Sup,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Sup => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }
    }
}

impl FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" | "euclid" | "l2" => Ok(Norm::Euclidean),
            "sup" | "max" | "linf" => Ok(Norm::Sup),
            _ => Err(format!("unknown norm {s:?} (expected euclidean or sup)")),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Euclidean => "euclidean",
            Norm::Sup => "sup",
        })
    }
}

/// A point of `S^{d-1}`. For `d = 1` the coordinate is exactly `±1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps coordinates that already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self, SphereError> {
        let n = Norm::Euclidean.of(&coords);
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(SphereError::Invalid(format!("norm {n} is not 1")));
        }
        Ok(UnitVector(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// `θ(v) = v / ‖v‖`.
pub fn direction(v: &[f64]) -> Result<UnitVector, SphereError> {
    if v.iter().all(|x| *x == 0.0) {
        return Err(SphereError::ZeroVector);
    }
    if v.len() == 1 {
        return Ok(UnitVector(vec![v[0].signum()]));
    }
    let n = Norm::Euclidean.of(v);
    Ok(UnitVector(v.iter().map(|x| x / n).collect()))
}

fn normalized(v: &[f64], what: &str) -> Result<Vec<f64>, SphereError> {
    let n = Norm::Euclidean.of(v);
    if !(n.is_finite() && n > 0.0) {
        return Err(SphereError::Invalid(format!("{what} must be a nonzero vector")));
    }
    if v.len() == 1 {
        return Ok(vec![v[0].signum()]);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// A subset of `S^{d-1}` whose boundary has measure zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DirectionSet {
    /// Subset of `S^0 = {-1, +1}`; only for `d = 1`.
    SignSet { signs: Vec<i8> },
    /// Open cap `{u : center·u > cos(angle)}`.
    Cap { center: Vec<f64>, angle: f64 },
    /// Open hemisphere `{u : axis·u > 0}`.
    Hemisphere { axis: Vec<f64> },
    Complement { of: Box<DirectionSet> },
    /// Union of pairwise disjoint sets.
    DisjointUnion { dim: usize, parts: Vec<DirectionSet> },
}

impl DirectionSet {
    pub fn sign_set(signs: &[i8]) -> Result<Self, SphereError> {
        let mut s: Vec<i8> = signs.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.iter().any(|x| *x != 1 && *x != -1) {
            return Err(SphereError::Invalid("signs must be -1 or +1".into()));
        }
        Ok(DirectionSet::SignSet { signs: s })
    }

    pub fn cap(center: &[f64], angle: f64) -> Result<Self, SphereError> {
        if !(angle > 0.0 && angle < PI) {
            return Err(SphereError::Invalid(format!(
                "cap angle {angle} must lie in (0, pi)"
            )));
        }
        Ok(DirectionSet::Cap {
            center: normalized(center, "cap center")?,
            angle,
        })
    }

    pub fn hemisphere(axis: &[f64]) -> Result<Self, SphereError> {
        Ok(DirectionSet::Hemisphere {
            axis: normalized(axis, "hemisphere axis")?,
        })
    }

    pub fn complement(of: DirectionSet) -> Self {
        DirectionSet::Complement { of: Box::new(of) }
    }

    pub fn disjoint_union(dim: usize, parts: Vec<DirectionSet>) -> Result<Self, SphereError> {
        for p in &parts {
            if p.dim() != dim {
                return Err(SphereError::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
        }
        let u = DirectionSet::DisjointUnion { dim, parts };
        if u.measure() > 1.0 + 1e-12 {
            return Err(SphereError::Invalid(
                "parts of a disjoint union have total measure above 1".into(),
            ));
        }
        Ok(u)
    }

    /// The whole sphere `S^{d-1}`.
    pub fn full(dim: usize) -> Self {
        DirectionSet::complement(DirectionSet::empty(dim))
    }

    pub fn empty(dim: usize) -> Self {
        DirectionSet::DisjointUnion {
            dim,
            parts: Vec::new(),
        }
    }

    /// The dimension `d` of the ambient space `R^d` of `S^{d-1}`.
    pub fn dim(&self) -> usize {
        match self {
            DirectionSet::SignSet { .. } => 1,
            DirectionSet::Cap { center, .. } => center.len(),
            DirectionSet::Hemisphere { axis } => axis.len(),
            DirectionSet::Complement { of } => of.dim(),
            DirectionSet::DisjointUnion { dim, .. } => *dim,
        }
    }

    /// Checks the structural invariants of a deserialized value.
    pub fn validate(&self) -> Result<(), SphereError> {
        match self {
            DirectionSet::SignSet { signs } => {
                if signs.iter().any(|x| *x != 1 && *x != -1) {
                    return Err(SphereError::Invalid("signs must be -1 or +1".into()));
                }
            }
            DirectionSet::Cap { center, angle } => {
                if !(*angle > 0.0 && *angle < PI) {
                    return Err(SphereError::Invalid("cap angle must lie in (0, pi)".into()));
                }
                UnitVector::new(center.clone())?;
            }
            DirectionSet::Hemisphere { axis } => {
                UnitVector::new(axis.clone())?;
            }
            DirectionSet::Complement { of } => of.validate()?,
            DirectionSet::DisjointUnion { dim, parts } => {
                for p in parts {
                    p.validate()?;
                    if p.dim() != *dim {
                        return Err(SphereError::DimensionMismatch {
                            expected: *dim,
                            got: p.dim(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Membership of a unit vector.
    pub fn contains(&self, u: &UnitVector) -> bool {
        assert_eq!(u.dim(), self.dim(), "direction set and vector dimensions differ");
        self.contains_direction_of(u.coords())
            .expect("unit vectors are nonzero")
    }

    /// Membership of `v/‖v‖` without normalizing `v` first; `None` for `v = 0`.
    pub fn contains_direction_of(&self, v: &[f64]) -> Option<bool> {
        if v.iter().all(|x| *x == 0.0) {
            return None;
        }
        Some(match self {
            DirectionSet::SignSet { signs } => {
                let s = if v[0] > 0.0 { 1 } else { -1 };
                signs.contains(&s)
            }
            DirectionSet::Cap { center, angle } => {
                let dot: f64 = center.iter().zip(v).map(|(a, b)| a * b).sum();
                dot > angle.cos() * Norm::Euclidean.of(v)
            }
            DirectionSet::Hemisphere { axis } => {
                axis.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() > 0.0
            }
            DirectionSet::Complement { of } => !of.contains_direction_of(v)?,
            DirectionSet::DisjointUnion { parts, .. } => parts
                .iter()
                .any(|p| p.contains_direction_of(v).unwrap_or(false)),
        })
    }

    /// Normalized surface measure in `[0, 1]`.
    pub fn measure(&self) -> f64 {
        match self {
            DirectionSet::SignSet { signs } => signs.len() as f64 / 2.0,
            DirectionSet::Cap { center, angle } => cap_measure(center.len(), *angle),
            DirectionSet::Hemisphere { .. } => 0.5,
            DirectionSet::Complement { of } => 1.0 - of.measure(),
            DirectionSet::DisjointUnion { parts, .. } => parts.iter().map(|p| p.measure()).sum(),
        }
    }
}

/// Normalized measure of a cap of angular radius `angle` on `S^{d-1}`.
pub fn cap_measure(d: usize, angle: f64) -> f64 {
    if d == 1 {
        // S^0: the cap holds the center alone until it swallows both points.
        return if angle > PI / 2.0 { 1.0 } else { 0.5 };
    }
    if angle > PI / 2.0 {
        return 1.0 - cap_measure(d, PI - angle);
    }
    let s = angle.sin();
    0.5 * beta_reg((d as f64 - 1.0) / 2.0, 0.5, s * s)
}

/// Volume of the radius-`r` ball of `R^d` in the given norm.
pub fn ball_volume(d: usize, r: f64, norm: Norm) -> f64 {
    match norm {
        Norm::Euclidean => {
            // V_d = 2 pi / d * V_{d-2}, V_0 = 1, V_1 = 2.
            let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
            let mut k = if d % 2 == 0 { 2 } else { 3 };
            while k <= d {
                v *= 2.0 * PI / k as f64;
                k += 2;
            }
            v * r.powi(d as i32)
        }
        Norm::Sup => (2.0 * r).powi(d as i32),
    }
}

fn parse_coords(s: &str, input: &str) -> Result<Vec<f64>, SphereError> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| SphereError::Parse {
                input: input.to_string(),
                reason: e.to_string(),
            })
        })
        .collect()
}

impl FromStr for DirectionSet {
    type Err = SphereError;

    /// Parses `sign:-1`, `sign:-1,1`, `hemisphere:<axis>`,
    /// `cap:<center>:<angle>`, `full:<d>` and `complement:<spec>`.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| SphereError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let (head, rest) = input.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        match head {
            "sign" => {
                let signs: Result<Vec<i8>, _> = rest
                    .split(',')
                    .map(|t| match t.trim() {
                        "-1" | "-" => Ok(-1),
                        "1" | "+1" | "+" => Ok(1),
                        _ => Err(bad("signs must be -1 or +1")),
                    })
                    .collect();
                DirectionSet::sign_set(&signs?)
            }
            "hemisphere" => DirectionSet::hemisphere(&parse_coords(rest, input)?),
            "cap" => {
                let (c, a) = rest.rsplit_once(':').ok_or_else(|| bad("cap needs center:angle"))?;
                let angle = a.trim().parse::<f64>().map_err(|e| bad(&e.to_string()))?;
                DirectionSet::cap(&parse_coords(c, input)?, angle)
            }
            "full" => {
                let d = rest.trim().parse::<usize>().map_err(|e| bad(&e.to_string()))?;
                Ok(DirectionSet::full(d))
            }
            "complement" => Ok(DirectionSet::complement(rest.parse()?)),
            _ => Err(bad("unknown direction set kind")),
        }
    }
}
