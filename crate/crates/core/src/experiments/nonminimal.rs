use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{to_value, ExperimentError, ExperimentReport};
use crate::contfrac::CfSpec;
use crate::lattice::{count_approximates_with, ApproxTarget, CountOptions, Witness};
use crate::sphere::{DirectionSet, Norm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonminimalParams {
    pub d: usize,
    pub x_base: CfSpec,
    #[serde(rename = "T")]
    pub t: f64,
    /// Directions are checked for `q >= q_min`.
    pub q_min: u64,
    #[serde(rename = "C")]
    pub c: f64,
    pub norm: Norm,
}

/// Largest `|u_1 - u_2| / √2`, the distance to the subsphere `{u_1 = u_2}`,
/// and the number of points in `cap`, over witnesses with `q >= q_min`.
fn scan(witnesses: &[Witness], q_min: u64) -> (f64, f64, u64, u64) {
    let mut sub = 0f64;
    let mut diag = 0f64;
    let mut in_cap = 0;
    let mut n = 0;
    for w in witnesses.iter().filter(|w| w.q.unwrap_or(0) >= q_min) {
        n += 1;
        if w.in_a == Some(true) {
            in_cap += 1;
        }
        let Some(u) = &w.direction else { continue };
        sub = sub.max((u[0] - u[1]).abs() / 2f64.sqrt());
        if u.len() == 2 {
            let s = u[0].signum() / 2f64.sqrt();
            diag = diag.max(((u[0] - s).powi(2) + (u[1] - s).powi(2)).sqrt());
        }
    }
    (sub, diag, in_cap, n)
}

/// Approximates of `x = (α, ..., α)`: the integer relation `x_1 - x_2 = 0`
/// confines their directions to `{u_1 = u_2}` once `q` is large. Also checks
/// that the near points of a rational `x` lie on one line.
pub fn nonminimal_experiment(p: &NonminimalParams) -> Result<ExperimentReport, ExperimentError> {
    if p.d < 2 {
        return Err(ExperimentError::InvalidParameter("needs d >= 2".into()));
    }
    let alpha = p.x_base.build()?.to_f64();
    let x = vec![alpha; p.d];
    // A cap around (1, -1, 0, ...) missing the subsphere u_1 = u_2.
    let mut center = vec![0.0; p.d];
    center[0] = 1.0;
    center[1] = -1.0;
    let cap = DirectionSet::cap(&center, FRAC_PI_4)
        .map_err(|e| ExperimentError::InvalidParameter(e.to_string()))?;
    let opts = CountOptions {
        witnesses: true,
        ..Default::default()
    };
    let res = count_approximates_with(&ApproxTarget::Float(x.clone()), p.t, p.norm, p.c, Some(&cap), opts)?;
    let witnesses = res.witnesses.clone().unwrap_or_default();
    let (sub, diag, in_cap, checked) = scan(&witnesses, p.q_min);

    // d = 1, x = 1/2: every near point with q >= 3 has qx - p = 0.
    let rational = count_approximates_with(&ApproxTarget::Float(vec![0.5]), p.t, p.norm, p.c, None, opts)?;
    let off_line = rational
        .witnesses
        .unwrap_or_default()
        .iter()
        .filter(|w| w.q.unwrap_or(0) >= 3 && w.v[0] != 0.0)
        .count();

    let records = witnesses
        .iter()
        .map(|w| json!({"q": w.q, "v": w.v, "direction": w.direction, "in_A": w.in_a}))
        .collect();
    let summary = json!({
        "x": x,
        "total": res.total,
        "in_A": res.in_a,
        "checked": checked,
        "max_subsphere_distance": sub,
        "max_diagonal_distance": (p.d == 2).then_some(diag),
        "in_A_large_q": in_cap,
        "rational_total": rational.total,
        "rational_on_line": rational.degenerate,
        "rational_off_line_large_q": off_line,
    });
    Ok(ExperimentReport::new("nonminimal", to_value(p), records, summary, None))
}
