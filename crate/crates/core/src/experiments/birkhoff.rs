use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{sample_x, to_value, ExperimentError, ExperimentReport};
use crate::lattice::{count_region, g_flow_scale, region_volume, shell_count, Lattice, RegionSpec};
use crate::sphere::{DirectionSet, Norm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffParams {
    pub d: usize,
    /// Number of random lattices `Λ_x`, `x` uniform in `(0,1)^d`.
    pub num_lattices: usize,
    #[serde(rename = "N_max")]
    pub n_max: u32,
    pub c: f64,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none", default)]
    pub a: Option<DirectionSet>,
    pub norm: Norm,
    pub seed: u64,
}

/// `x`, per-shell `(total, in_A)`, shell additivity, flow equivariance.
type LatticeShells = (Vec<f64>, Vec<(u64, Option<u64>)>, bool, Option<bool>);

/// Dyadic shell sums `N(Λ, 2^N) / N` and `N(Λ, 2^N, A) / N` for random
/// `Λ_x`, compared against `vol(P_2)` and `vol(P_{A,2})`.
pub fn birkhoff_experiment(p: &BirkhoffParams) -> Result<ExperimentReport, ExperimentError> {
    if p.n_max < 2 || p.num_lattices == 0 {
        return Err(ExperimentError::InvalidParameter(
            "need N_max >= 2 and at least one lattice".into(),
        ));
    }
    let mut p2 = RegionSpec::p(p.d, p.c, 2.0).with_norm(p.norm);
    let vol = region_volume(&p2)?;
    p2.directions = p.a.clone();
    let vol_a = region_volume(&p2)?;

    let per_lattice: Vec<Result<LatticeShells, ExperimentError>> = (0..p.num_lattices)
        .into_par_iter()
        .map(|i| {
            let x = sample_x(p.d, p.seed, i);
            let lattice = Lattice::from_x(&x);
            let shells = (1..=p.n_max)
                .map(|k| shell_count(&lattice, k, p.c, p.norm, p.a.as_ref()).map(|r| (r.total, r.in_a)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut whole = RegionSpec::p(p.d, p.c, 2f64.powi(p.n_max as i32)).with_norm(p.norm);
            whole.directions = p.a.clone();
            let full = count_region(&lattice, &whole)?;
            let sum: u64 = shells.iter().map(|s| s.0).sum();
            let additive = sum == full.total;
            // g_{-s} maps Q_1 onto Q_2 for e^s = 2 and d = 1.
            let equivariant = if p.d == 1 {
                let moved = lattice.transformed(&g_flow_scale(2.0, 1))?;
                Some(shell_count(&moved, 1, p.c, p.norm, None)?.total == shells[1].0)
            } else {
                None
            };
            Ok((x, shells, additive, equivariant))
        })
        .collect();

    let mut records = Vec::new();
    let mut finals = Vec::new();
    let mut all_additive = true;
    let mut all_equivariant = true;
    for (i, r) in per_lattice.into_iter().enumerate() {
        let (x, shells, additive, equivariant) = r?;
        all_additive &= additive;
        all_equivariant &= equivariant.unwrap_or(true);
        let (mut cum, mut cum_a) = (0u64, 0u64);
        for (k, (total, in_a)) in shells.iter().enumerate() {
            let n = (k + 1) as f64;
            cum += total;
            cum_a += in_a.unwrap_or(0);
            let mut rec = json!({
                "lattice": i,
                "x": x,
                "N": k + 1,
                "shell": total,
                "count": cum,
                "count_per_N": cum as f64 / n,
            });
            if p.a.is_some() {
                rec["shell_in_A"] = json!(in_a);
                rec["count_in_A"] = json!(cum_a);
                rec["count_in_A_per_N"] = json!(cum_a as f64 / n);
                rec["ratio"] = json!(if cum > 0 { cum_a as f64 / cum as f64 } else { f64::NAN });
            }
            records.push(rec);
        }
        let per_n = cum as f64 / p.n_max as f64;
        finals.push(json!({
            "lattice": i,
            "x": x,
            "count_per_N": per_n,
            "relative_deviation": (per_n - vol).abs() / vol,
            "ratio": p.a.as_ref().map(|_| cum_a as f64 / cum.max(1) as f64),
            "shell_additive": additive,
            "equivariant": equivariant,
        }));
    }
    let summary = json!({
        "vol_P2": vol,
        "vol_PA2": p.a.as_ref().map(|_| vol_a),
        "measure_A": p.a.as_ref().map(DirectionSet::measure),
        "shell_additive": all_additive,
        "equivariant": all_equivariant,
        "final": finals,
    });
    Ok(ExperimentReport::new("birkhoff", to_value(p), records, summary, Some(p.seed)))
}
