use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::haar::{haar_rotation, sample_rng};
use super::{siegel_transform_with, SiegelError, TestFunction};
use crate::lattice::{count_region_with, g_flow, region_volume, CountOptions, Lattice, RegionKind, RegionSpec};

/// Monte Carlo estimate of a spherical average.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    #[serde(rename = "M")]
    pub samples: usize,
    pub t: f64,
    pub seed: u64,
    /// `∫ f dv`, the limit predicted as `t -> ∞`.
    pub integral_reference: Option<f64>,
}

impl MCEstimate {
    pub fn from_samples(values: &[f64], t: f64, seed: u64, integral_reference: Option<f64>) -> Self {
        let m = values.len();
        let mean = values.iter().sum::<f64>() / m as f64;
        let var = if m > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64
        } else {
            0.0
        };
        MCEstimate {
            mean,
            stderr: (var / m as f64).sqrt(),
            samples: m,
            t,
            seed,
            integral_reference,
        }
    }

    /// `|mean - reference|` in units of the standard error.
    pub fn z_score(&self) -> Option<f64> {
        self.integral_reference
            .map(|r| (self.mean - r).abs() / self.stderr.max(f64::MIN_POSITIVE))
    }
}

/// The lattice `g_t k_i Λ` of sample `i`.
fn sample_lattice(lattice: &Lattice, t: f64, seed: u64, i: usize) -> Result<Lattice, SiegelError> {
    let n = lattice.dim();
    let k = haar_rotation(n, &mut sample_rng(seed, i as u64));
    Ok(lattice.transformed(&(g_flow(t, n - 1) * k))?)
}

fn check_samples(m: usize) -> Result<(), SiegelError> {
    if m < 2 {
        return Err(SiegelError::InvalidParameter(format!("M = {m} must be at least 2")));
    }
    Ok(())
}

/// `f̂(g_t k_i Λ)` for `i < M`, in sample order.
pub fn spherical_samples(
    f: &TestFunction,
    lattice: &Lattice,
    t: f64,
    m: usize,
    seed: u64,
    budget: u64,
) -> Result<Vec<f64>, SiegelError> {
    check_samples(m)?;
    (0..m)
        .into_par_iter()
        .map(|i| siegel_transform_with(f, &sample_lattice(lattice, t, seed, i)?, false, budget))
        .collect()
}

/// `(1/M) Σ f̂(g_t k_i Λ)` with independent Haar `k_i`.
pub fn spherical_average(
    f: &TestFunction,
    lattice: &Lattice,
    t: f64,
    m: usize,
    seed: u64,
    budget: u64,
) -> Result<MCEstimate, SiegelError> {
    let values = spherical_samples(f, lattice, t, m, seed, budget)?;
    Ok(MCEstimate::from_samples(&values, t, seed, Some(f.integral()?)))
}

/// Writes `sample, value, running_mean` rows.
pub fn write_trace_csv<W: std::io::Write>(w: W, values: &[f64]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["sample", "value", "running_mean"])?;
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        out.write_record(&[i.to_string(), v.to_string(), (sum / (i + 1) as f64).to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Paired estimate of `∫ #(g_t kΛ ∩ R_{A,eps}) dk / ∫ #(g_t kΛ ∩ R_eps) dk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm3Estimate {
    pub ratio: f64,
    /// Delta-method standard error of the ratio.
    pub stderr: f64,
    pub numerator: MCEstimate,
    pub denominator: MCEstimate,
    /// `Σ_i N_A(i)` and `Σ_i N(i)`; complementary sets split `sum_total`
    /// exactly.
    pub sum_in_a: u64,
    pub sum_total: u64,
    pub degenerate: u64,
}

/// Ratio of spherical averages of `#(· ∩ R_{A,eps,1})` and `#(· ∩ R_{eps,1})`
/// over common rotation samples. `region` must be of kind R with `T = 1`;
/// without a direction set the ratio is 1.
pub fn thm3_ratio(
    lattice: &Lattice,
    region: &RegionSpec,
    t: f64,
    m: usize,
    seed: u64,
    budget: u64,
) -> Result<Thm3Estimate, SiegelError> {
    check_samples(m)?;
    if region.kind != RegionKind::R || region.eps <= 0.0 || region.t != 1.0 {
        return Err(SiegelError::InvalidParameter(
            "the ratio needs a region of kind R with eps > 0 and T = 1".into(),
        ));
    }
    region.validate().map_err(SiegelError::from)?;
    let opts = CountOptions {
        witnesses: false,
        budget,
    };
    let counts: Vec<(u64, u64, u64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let moved = sample_lattice(lattice, t, seed, i)?;
            let r = count_region_with(&moved, region, opts)?;
            Ok((r.in_a.unwrap_or(r.total), r.total, r.degenerate))
        })
        .collect::<Result<_, SiegelError>>()?;
    let sum_in_a: u64 = counts.iter().map(|c| c.0).sum();
    let sum_total: u64 = counts.iter().map(|c| c.1).sum();
    let degenerate: u64 = counts.iter().map(|c| c.2).sum();
    if sum_total == 0 {
        return Err(SiegelError::DivisionByZero);
    }
    let num: Vec<f64> = counts.iter().map(|c| c.0 as f64).collect();
    let den: Vec<f64> = counts.iter().map(|c| c.1 as f64).collect();
    let ratio = sum_in_a as f64 / sum_total as f64;
    let den_mean = sum_total as f64 / m as f64;
    let resid_var = num
        .iter()
        .zip(&den)
        .map(|(a, n)| (a - ratio * n).powi(2))
        .sum::<f64>()
        / (m - 1) as f64;
    let mut full = region.clone();
    full.directions = None;
    Ok(Thm3Estimate {
        ratio,
        stderr: (resid_var / m as f64).sqrt() / den_mean,
        numerator: MCEstimate::from_samples(&num, t, seed, Some(region_volume(region)?)),
        denominator: MCEstimate::from_samples(&den, t, seed, Some(region_volume(&full)?)),
        sum_in_a,
        sum_total,
        degenerate,
    })
}
