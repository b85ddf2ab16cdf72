//! Run configuration: every experiment parameter with a documented default,
//! loadable from JSON and overridable from the command line.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contfrac::CfSpec;
use crate::experiments::census::CensusMode;
use crate::experiments::Threshold;
use crate::lattice::DEFAULT_CANDIDATE_BUDGET;
use crate::sphere::{DirectionSet, Norm};

/// Environment variable overriding the enumeration candidate budget.
pub const BUDGET_ENV: &str = "SPIRALING_CANDIDATE_BUDGET";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("cannot parse direction set {spec:?}: {reason}")]
    DirectionSet { spec: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read configuration: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Thm1,
    Birkhoff,
    Thm3,
    BiasedCensus,
    BiasedRatio,
    Nonminimal,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Thm1,
        ExperimentId::Birkhoff,
        ExperimentId::Thm3,
        ExperimentId::BiasedCensus,
        ExperimentId::BiasedRatio,
        ExperimentId::Nonminimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Thm1 => "thm1",
            ExperimentId::Birkhoff => "birkhoff",
            ExperimentId::Thm3 => "thm3",
            ExperimentId::BiasedCensus => "biased-census",
            ExperimentId::BiasedRatio => "biased-ratio",
            ExperimentId::Nonminimal => "nonminimal",
        }
    }
}

impl std::str::FromStr for ExperimentId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

/// Parameters of a run. Absent JSON fields take the defaults of
/// [`RunConfig::default`]; fields that only some experiments read are
/// ignored by the others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentId,
    /// Dimension of `x` (`Λ ⊂ R^{d+1}`). Default 1.
    pub d: usize,
    /// Constant in the thinning region. Default 1.
    pub c: f64,
    /// Lower cutoff `ε` of `R_{ε,T}`. Default 0.1.
    pub eps: f64,
    /// Counting threshold `T` for `thm1` and `nonminimal`. Default `10^5`.
    #[serde(rename = "T")]
    pub t: f64,
    /// Flow times for `thm3`. Default `[6]`.
    pub t_grid: Vec<f64>,
    /// Direction set in the command-line syntax (`sign:-1`,
    /// `hemisphere:1,0`, `cap:1,0:0.5`, `complement:<spec>`, `full`).
    /// Default `sign:-1` for `d = 1`, else the hemisphere around `e_1`.
    #[serde(rename = "A")]
    pub a: Option<String>,
    /// Default sup.
    pub norm: Norm,
    /// Number of sampled points `x` (`thm1`). Default 200.
    pub n: usize,
    /// Number of rotation samples (`thm3`). Default 2000.
    #[serde(rename = "M")]
    pub m: usize,
    /// Default 7.
    pub seed: u64,
    /// Census depth (default 7) or number of dyadic shells (default 14).
    pub nmax: Option<u32>,
    /// Thresholds for `biased-ratio`. Default: level ends 5, 7, 9.
    pub thresholds: Vec<Threshold>,
    pub census_mode: CensusMode,
    /// Number of random lattices for `birkhoff`. Default 5.
    pub num_lattices: usize,
    /// Base number of `nonminimal`. Default golden.
    pub x_base: CfSpec,
    /// Smallest `q` checked by `nonminimal`. Default 100.
    pub q_min: u64,
    /// Candidate budget for lattice enumeration.
    pub budget: u64,
    /// Worker thread cap; all cores when absent.
    pub threads: Option<usize>,
    /// Output directory; nothing is written when absent.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: ExperimentId::Thm1,
            d: 1,
            c: 1.0,
            eps: 0.1,
            t: 1e5,
            t_grid: vec![6.0],
            a: None,
            norm: Norm::Sup,
            n: 200,
            m: 2000,
            seed: 7,
            nmax: None,
            thresholds: vec![Threshold::LevelEnd(5), Threshold::LevelEnd(7), Threshold::LevelEnd(9)],
            census_mode: CensusMode::Interval,
            num_lattices: 5,
            x_base: CfSpec::Golden,
            q_min: 100,
            budget: DEFAULT_CANDIDATE_BUDGET,
            threads: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(s).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let s = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// Applies the budget override from [`BUDGET_ENV`], if set.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(v) = std::env::var(BUDGET_ENV) {
            self.budget = v
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{BUDGET_ENV}={v:?} is not an integer")))?;
        }
        Ok(())
    }

    /// The direction set, with the dimension-dependent default.
    pub fn direction_set(&self) -> Result<DirectionSet, ConfigError> {
        let a = match &self.a {
            Some(s) => parse_direction_set(s)?,
            None if self.d == 1 => DirectionSet::sign_set(&[-1]).expect("valid sign set"),
            None => {
                let mut axis = vec![0.0; self.d];
                axis[0] = 1.0;
                DirectionSet::hemisphere(&axis).expect("unit axis")
            }
        };
        if a.dim() != self.d {
            return Err(ConfigError::Invalid(format!(
                "direction set lives in dimension {}, but d = {}",
                a.dim(),
                self.d
            )));
        }
        Ok(a)
    }

    /// Census depth for the biased experiments.
    pub fn census_depth(&self) -> u32 {
        self.nmax.unwrap_or(7)
    }

    /// Number of dyadic shells for `birkhoff`.
    pub fn shells(&self) -> u32 {
        self.nmax.unwrap_or(14)
    }

    /// Checks the parameters the selected experiment reads.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c = {} must be positive", self.c));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        match self.experiment {
            ExperimentId::Thm1 => {
                self.direction_set()?;
                if self.t < 10.0 || self.n == 0 {
                    return bad("thm1 needs T >= 10 and n >= 1".into());
                }
            }
            ExperimentId::Birkhoff => {
                if self.a.is_some() {
                    self.direction_set()?;
                }
                if self.shells() < 2 || self.num_lattices == 0 {
                    return bad("birkhoff needs nmax >= 2 and num_lattices >= 1".into());
                }
            }
            ExperimentId::Thm3 => {
                self.direction_set()?;
                if !(self.eps > 0.0 && self.eps < 1.0) {
                    return bad(format!(
                        "thm3 needs 0 < eps < 1 (the region volume is infinite at eps = {})",
                        self.eps
                    ));
                }
                if self.m < 2 || self.t_grid.is_empty() {
                    return bad("thm3 needs M >= 2 and a nonempty t grid".into());
                }
            }
            ExperimentId::BiasedCensus => {
                if self.census_depth() > 9 {
                    return bad("biased-census needs nmax <= 9".into());
                }
            }
            ExperimentId::BiasedRatio => {
                if self.d != 1 {
                    return bad("biased-ratio needs d = 1".into());
                }
                self.direction_set()?;
                if !(0.0..1.0).contains(&self.eps) {
                    return bad(format!("eps = {} outside [0, 1)", self.eps));
                }
                if self.thresholds.is_empty() || self.thresholds.iter().any(|t| t.level() > 9) {
                    return bad("biased-ratio needs thresholds within census level 9".into());
                }
            }
            ExperimentId::Nonminimal => {
                if self.d < 2 {
                    return bad("nonminimal needs d >= 2".into());
                }
            }
        }
        Ok(())
    }
}

fn parse_coords(s: &str, spec: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|c| {
            c.trim().parse::<f64>().map_err(|_| ConfigError::DirectionSet {
                spec: spec.to_string(),
                reason: format!("{c:?} is not a number"),
            })
        })
        .collect()
}

/// Parses `sign:-1`, `sign:-1,1`, `hemisphere:<axis>`, `cap:<center>:<angle>`,
/// `complement:<spec>` and `full:<d>`.
pub fn parse_direction_set(spec: &str) -> Result<DirectionSet, ConfigError> {
    let err = |reason: String| ConfigError::DirectionSet {
        spec: spec.to_string(),
        reason,
    };
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let set = match kind.trim() {
        "sign" => {
            let signs = rest
                .split(',')
                .map(|s| s.trim().parse::<i8>().map_err(|_| err(format!("{s:?} is not a sign"))))
                .collect::<Result<Vec<_>, _>>()?;
            DirectionSet::sign_set(&signs)
        }
        "hemisphere" => DirectionSet::hemisphere(&parse_coords(rest, spec)?),
        "cap" => {
            let (center, angle) = rest
                .rsplit_once(':')
                .ok_or_else(|| err("expected cap:<center>:<angle>".into()))?;
            let angle: f64 = angle
                .trim()
                .parse()
                .map_err(|_| err(format!("{angle:?} is not an angle")))?;
            DirectionSet::cap(&parse_coords(center, spec)?, angle)
        }
        "complement" => return Ok(DirectionSet::complement(parse_direction_set(rest)?)),
        "full" => {
            let d = if rest.is_empty() {
                1
            } else {
                rest.trim().parse().map_err(|_| err(format!("{rest:?} is not a dimension")))?
            };
            return Ok(DirectionSet::full(d));
        }
        other => return Err(err(format!("unknown kind {other:?}"))),
    };
    set.map_err(|e| err(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut c = RunConfig::default();
        c.experiment = ExperimentId::Thm3;
        c.d = 2;
        c.a = Some("hemisphere:1,0".into());
        c.t_grid = vec![2.0, 4.0, 6.0];
        c.out = Some("out".into());
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment": "nope"}"#).is_err());
    }

    #[test]
    fn direction_syntax() {
        assert_eq!(parse_direction_set("sign:-1").unwrap(), DirectionSet::sign_set(&[-1]).unwrap());
        assert_eq!(parse_direction_set("sign:1,-1").unwrap().measure(), 1.0);
        assert_eq!(parse_direction_set("hemisphere:0,2").unwrap(), DirectionSet::hemisphere(&[0.0, 1.0]).unwrap());
        let cap = parse_direction_set("cap:1,0,0:0.5").unwrap();
        assert_eq!(cap, DirectionSet::cap(&[1.0, 0.0, 0.0], 0.5).unwrap());
        let comp = parse_direction_set("complement:sign:-1").unwrap();
        assert_eq!(comp.contains_direction_of(&[1.0]), Some(true));
        assert_eq!(parse_direction_set("full:3").unwrap().measure(), 1.0);
        for bad in ["sign:2", "hemisphere:0,0", "cap:1,0", "blob:1", "sign:x"] {
            assert!(parse_direction_set(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.experiment = ExperimentId::Thm3;
        c.eps = 0.0;
        assert!(c.validate().is_err());
        c.eps = 0.1;
        c.d = 2;
        assert!(c.validate().is_ok());
        c.a = Some("sign:-1".into());
        assert!(c.validate().is_err());
        c.experiment = ExperimentId::Nonminimal;
        c.d = 1;
        assert!(c.validate().is_err());
        assert_eq!("biased-census".parse::<ExperimentId>().unwrap(), ExperimentId::BiasedCensus);
        assert!("x".parse::<ExperimentId>().is_err());
    }
}
