//! Reports built on the exact census of the biased number.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::census::{census, level_end_threshold, window_count, Census, CensusMode};
use super::{to_value, ExperimentError, ExperimentReport};
use crate::contfrac::CFNumber;
use crate::sphere::DirectionSet;

/// Deepest census level accepted.
pub const MAX_LEVEL: u32 = 9;

/// A counting threshold `T` along the biased number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "kebab-case")]
pub enum Threshold {
    /// `T = q_n`.
    Convergent(u32),
    /// `T = ⌊√a_{n+1}⌋ q_n`, the last in-between point of level `n` in `R`.
    LevelEnd(u32),
}

impl Threshold {
    pub fn value(self) -> BigInt {
        match self {
            Threshold::Convergent(n) => CFNumber::biased().q(n as i64),
            Threshold::LevelEnd(n) => level_end_threshold(n),
        }
    }

    /// Census depth needed to cover the threshold.
    pub fn level(self) -> u32 {
        match self {
            Threshold::Convergent(n) => n.saturating_sub(1),
            Threshold::LevelEnd(n) => n,
        }
    }
}

/// Census of the biased number as a report: one record per level, rows
/// available through [`Census::write_csv`].
pub fn biased_census_report(n_max: u32, mode: CensusMode) -> Result<(ExperimentReport, Census), ExperimentError> {
    if n_max > MAX_LEVEL {
        return Err(ExperimentError::InvalidParameter(format!("n_max = {n_max} exceeds {MAX_LEVEL}")));
    }
    let c = census(&CFNumber::biased(), n_max, mode)?;
    let records = c.levels.iter().map(to_value).collect();
    let neg = c.rows.iter().filter(|r| r.sign < 0).count();
    let odd_ok = c
        .levels
        .iter()
        .all(|l| l.l_bound.is_none_or(|b| l.l_n >= b));
    let summary = json!({
        "rows": c.rows.len(),
        "q_end": c.q_end.to_string(),
        "negative": neg,
        "ratio_neg": neg as f64 / c.rows.len() as f64,
        "L_bound_holds": odd_ok,
        "candidates_checked": c.candidates_checked,
    });
    let params = json!({"n_max": n_max, "mode": mode});
    Ok((ExperimentReport::new("biased-census", params, records, summary, None), c))
}

/// Exact `N(Λ_x, A, ε, T) / N(Λ_x, ε, T)` at each threshold from an existing
/// census.
pub fn biased_ratio_with(
    census: &Census,
    thresholds: &[Threshold],
    a: &DirectionSet,
    eps: f64,
) -> Result<ExperimentReport, ExperimentError> {
    if a.dim() != 1 {
        return Err(ExperimentError::InvalidParameter("A must be a subset of S^0".into()));
    }
    let comp = DirectionSet::complement(a.clone());
    let mut records = Vec::new();
    let mut ratios = Vec::new();
    for th in thresholds {
        let w = window_count(census, &th.value(), eps)?;
        let r = w.ratio(a)?;
        let rc = w.ratio(&comp)?;
        ratios.push(r);
        records.push(json!({
            "threshold": th,
            "T": w.t.to_string(),
            "total": w.total,
            "negative": w.negative,
            "positive": w.positive,
            "degenerate": w.degenerate,
            "ratio": r,
            "ratio_complement": rc,
        }));
    }
    let summary = json!({
        "measure_A": a.measure(),
        "last_ratio": ratios.last(),
        "min_ratio": ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        "max_ratio": ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "nondecreasing": ratios.windows(2).all(|w| w[1] >= w[0]),
    });
    let params = json!({"thresholds": thresholds, "A": a, "eps": eps});
    Ok(ExperimentReport::new("biased-ratio", params, records, summary, None))
}

/// [`biased_ratio_with`] on a fresh census deep enough for every threshold.
pub fn biased_ratio(thresholds: &[Threshold], a: &DirectionSet, eps: f64) -> Result<ExperimentReport, ExperimentError> {
    let depth = thresholds.iter().map(|t| t.level()).max().unwrap_or(0);
    if depth > MAX_LEVEL {
        return Err(ExperimentError::InvalidParameter(format!(
            "thresholds need census level {depth} > {MAX_LEVEL}"
        )));
    }
    let c = census(&CFNumber::biased(), depth, CensusMode::Interval)?;
    biased_ratio_with(&c, thresholds, a, eps)
}
