//! The acceptance suite behind `spiraling verify`.
//!
//! Each criterion returns a pass/fail verdict with a one-line detail. Exact
//! criteria use zero tolerance; the statistical ones use fixed tolerances and
//! per-criterion default seeds, all replaced by `seed` when it is given.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::contfrac::CFNumber;
use crate::experiments::census::{
    brute_force_in_r, census, outside_candidate_classes, best_approximation_violations, Census, CensusMode,
};
use crate::experiments::{
    biased::biased_ratio_with, birkhoff_experiment, nonminimal_experiment, thm1_experiment, thm3_experiment,
    BirkhoffParams, ExperimentError, ExperimentReport, NonminimalParams, Thm1Params, Thm3Params, Threshold,
};
use crate::contfrac::CfSpec;
use crate::lattice::{Lattice, DEFAULT_CANDIDATE_BUDGET};
use crate::siegel::{haar_rotation, orthogonality_residual, sample_rng, spherical_average, TestFunction};
use crate::sphere::{DirectionSet, Norm};

pub const THM1_SEED: u64 = 7;
pub const BIRKHOFF_SEED: u64 = 7;
pub const THM3_SEED: u64 = 3;
pub const HAAR_SEED: u64 = 7;

/// Exact `(level, eps, total, negative)` window counts at the thresholds
/// `⌊√a_{n+1}⌋ q_n`, frozen from the census.
pub const FROZEN_WINDOWS: [(u32, f64, u64, u64); 12] = [
    (3, 0.0, 28, 22),
    (3, 0.01, 21, 18),
    (3, 0.1, 15, 15),
    (5, 0.0, 248, 240),
    (5, 0.01, 214, 214),
    (5, 0.1, 195, 195),
    (7, 0.0, 4348, 4338),
    (7, 0.01, 4056, 4056),
    (7, 0.1, 3687, 3687),
    (9, 0.0, 104352, 104340),
    (9, 0.01, 99000, 99000),
    (9, 0.1, 90000, 90000),
];

pub const CRITERIA: [&str; 12] = [
    "continued-fraction identities",
    "error ratio bounds",
    "best approximation",
    "census completeness",
    "L_n lower bound",
    "biased directions",
    "random x equidistribution",
    "Birkhoff shelling",
    "spherical averages",
    "Haar sampler",
    "non-minimal translation",
    "reproducibility",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceOptions {
    /// Skips the level-9 census and the level-7 exhaustive cross-check.
    pub quick: bool,
    pub seed: Option<u64>,
}

impl AcceptanceOptions {
    fn seed_or(&self, default: u64) -> u64 {
        self.seed.unwrap_or(default)
    }

    fn top_level(&self) -> u32 {
        if self.quick {
            7
        } else {
            9
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    /// `[PASS]  5 L_n lower bound (0.3 s): ...`
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub options: AcceptanceOptions,
    pub criteria: Vec<CriterionResult>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        let mut s: String = self.criteria.iter().map(|c| c.line() + "\n").collect();
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        s.push_str(&format!("{passed}/{} criteria passed\n", self.criteria.len()));
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

type Outcome = Result<(bool, String), ExperimentError>;

/// Runs criterion `id` (1 to 12).
pub fn run_criterion(id: usize, opts: &AcceptanceOptions) -> CriterionResult {
    assert!((1..=12).contains(&id), "criteria are numbered 1 to 12");
    let start = Instant::now();
    let outcome = match id {
        1 => cf_identities(),
        2 => error_ratios(),
        3 => best_approximation(),
        4 => census_completeness(),
        5 => l_bound(opts),
        6 => biased_directions(opts),
        7 => random_x(opts),
        8 => birkhoff(opts),
        9 => spherical(opts),
        10 => haar(opts),
        11 => nonminimal(),
        _ => reproducibility(opts),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        name: CRITERIA[id - 1].to_string(),
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Runs every criterion in order.
pub fn run_all(opts: &AcceptanceOptions) -> AcceptanceReport {
    AcceptanceReport {
        options: *opts,
        criteria: (1..=12).map(|id| run_criterion(id, opts)).collect(),
    }
}

fn cf_identities() -> Outcome {
    let x = CFNumber::biased();
    let mut failures = Vec::new();
    for n in 0..=12i64 {
        let c = x.convergent(n);
        let prev = x.convergent(n - 1);
        let sign = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        if &c.q * &prev.p - &c.p * &prev.q != sign {
            failures.push(format!("determinant at {n}"));
        }
        if n >= 1 {
            let a = BigInt::from(x.element(n as usize));
            let pp = x.convergent(n - 2);
            if c.q != &a * &prev.q + &pp.q || c.p != &a * &prev.p + &pp.p {
                failures.push(format!("recurrence at {n}"));
            }
        }
        let s = x.convergent_error_sign(n)?;
        let expect = if n % 2 == 0 { Ordering::Greater } else { Ordering::Less };
        if s != expect {
            failures.push(format!("sign at {n}"));
        }
        // 1/(q_n + q_{n+1}) < |q_n x - p_n| < 1/q_{n+1}, with s(q_n x - p_n) = |.|.
        let q1 = x.q(n + 1);
        let s = if expect == Ordering::Greater { BigInt::one() } else { -BigInt::one() };
        let sum = &c.q + &q1;
        let lower = x.sign_affine(&(&s * &c.q * &sum), &(&s * &c.p * &sum + 1))?;
        let upper = x.sign_affine(&(&s * &c.q * &q1), &(&s * &c.p * &q1 + 1))?;
        if lower != Ordering::Greater || upper != Ordering::Less {
            failures.push(format!("error bounds at {n}"));
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            "determinant, recurrences, error bounds and signs hold for n <= 12".into()
        } else {
            failures.join(", ")
        },
    ))
}

fn error_ratios() -> Outcome {
    let x = CFNumber::biased();
    let mut failures = Vec::new();
    for n in 1..=10usize {
        let iv = x.error_ratio_bounds(n)?;
        let (lo, hi) = if n % 2 == 0 {
            (BigRational::from_integer(2.into()), BigRational::from_integer(6.into()))
        } else if n <= 9 {
            let k = BigInt::from(n + 1).pow(n as u32 + 1);
            (BigRational::new(k.clone(), 2.into()), BigRational::from_integer(k + 2))
        } else {
            continue;
        };
        if !iv.inside_open(&lo, &hi) {
            let (a, b) = iv.to_f64_bounds();
            failures.push(format!("n = {n}: [{a:e}, {b:e}]"));
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            "enclosures inside (2, 6) for even n <= 10 and ((n+1)^(n+1)/2, (n+1)^(n+1)+2) for odd n <= 9".into()
        } else {
            failures.join(", ")
        },
    ))
}

fn best_approximation() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, x) in [("biased", CFNumber::biased()), ("golden", CFNumber::golden())] {
        let end = x.q(5).to_u64().expect("small q_5");
        let bad = best_approximation_violations(&x, end)?;
        ok &= bad.is_empty();
        parts.push(format!("{label}: {} values of q < {end}, {} violations", end - 1, bad.len()));
    }
    Ok((ok, parts.join("; ")))
}

fn q5_brute() -> Result<(CFNumber, u64, Vec<(u64, i64)>), ExperimentError> {
    let x = CFNumber::biased();
    let end = x.q(5).to_u64().expect("small q_5");
    let brute = brute_force_in_r(&x, end)?;
    Ok((x, end, brute))
}

fn census_completeness() -> Outcome {
    let (x, end, brute) = q5_brute()?;
    let outside = outside_candidate_classes(&x, &brute);
    let c = census(&x, 4, CensusMode::Interval)?;
    let listed: Vec<(u64, i64)> = c
        .rows
        .iter()
        .filter(|r| r.q < BigInt::from(end))
        .map(|r| (r.q.to_u64().unwrap_or(u64::MAX), r.p.to_i64().unwrap_or(i64::MAX)))
        .collect();
    let same = listed == brute;
    Ok((
        outside.is_empty() && same,
        format!(
            "{} points of R with q < {end}; {} outside the candidate classes; census {}",
            brute.len(),
            outside.len(),
            if same { "identical" } else { "differs" }
        ),
    ))
}

fn top_census(opts: &AcceptanceOptions) -> Result<Census, ExperimentError> {
    census(&CFNumber::biased(), opts.top_level(), CensusMode::Interval)
}

fn l_bound(opts: &AcceptanceOptions) -> Outcome {
    let c = top_census(opts)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for lvl in c.levels.iter().filter(|l| l.l_bound.is_some() && l.n >= 5) {
        let b = lvl.l_bound.unwrap_or(0);
        ok &= lvl.l_n >= b;
        parts.push(format!("L_{} = {} >= {b}", lvl.n, lvl.l_n));
    }
    // Cross-check the bisection census against the candidate-by-candidate scan.
    let depth = if opts.quick { 5 } else { 7 };
    let exhaustive = census(&CFNumber::biased(), depth, CensusMode::Exhaustive)?;
    let interval = census(&CFNumber::biased(), depth, CensusMode::Interval)?;
    let agree = exhaustive.rows == interval.rows;
    ok &= agree;
    parts.push(format!(
        "exhaustive scan of {} candidates (n <= {depth}) {}",
        exhaustive.candidates_checked.unwrap_or(0),
        if agree { "agrees" } else { "disagrees" }
    ));
    Ok((ok, parts.join(", ")))
}

fn biased_directions(opts: &AcceptanceOptions) -> Outcome {
    let c = top_census(opts)?;
    let top = opts.top_level();
    let levels = [top - 4, top - 2, top];
    let thresholds: Vec<Threshold> = levels.iter().map(|n| Threshold::LevelEnd(*n)).collect();
    let neg = DirectionSet::sign_set(&[-1]).expect("valid");
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.0, 0.01, 0.1] {
        let r = biased_ratio_with(&c, &thresholds, &neg, eps)?;
        let ratios: Vec<f64> = r.records.iter().map(|v| v["ratio"].as_f64().unwrap_or(f64::NAN)).collect();
        for (rec, n) in r.records.iter().zip(levels) {
            let frozen = FROZEN_WINDOWS
                .iter()
                .find(|f| f.0 == n && f.1 == eps)
                .expect("frozen entry");
            let matches = rec["total"] == frozen.2 && rec["negative"] == frozen.3;
            ok &= matches;
        }
        let last = *ratios.last().expect("three thresholds");
        let gap = last - (1.0 - last);
        let monotone = ratios.windows(2).all(|w| w[1] >= w[0]);
        ok &= gap >= 0.5 && monotone;
        parts.push(format!(
            "eps {eps}: ratios {} gap {gap:.4}",
            ratios.iter().map(|r| format!("{r:.5}")).collect::<Vec<_>>().join(" <= ")
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn thm1_reports(opts: &AcceptanceOptions) -> Result<[ExperimentReport; 2], ExperimentError> {
    let seed = opts.seed_or(THM1_SEED);
    let d1 = thm1_experiment(&Thm1Params {
        d: 1,
        num_points: 200,
        t: 1e5,
        a: DirectionSet::sign_set(&[-1]).expect("valid"),
        norm: Norm::Sup,
        c: 1.0,
        seed,
    })?;
    let d2 = thm1_experiment(&Thm1Params {
        d: 2,
        num_points: 50,
        t: 1e4,
        a: DirectionSet::hemisphere(&[1.0, 0.0]).expect("valid"),
        norm: Norm::Sup,
        c: 1.0,
        seed,
    })?;
    Ok([d1, d2])
}

fn random_x(opts: &AcceptanceOptions) -> Outcome {
    let [d1, d2] = thm1_reports(opts)?;
    let m1 = d1.summary_f64("mean_ratio").unwrap_or(f64::NAN);
    let m2 = d2.summary_f64("mean_ratio").unwrap_or(f64::NAN);
    Ok((
        (m1 - 0.5).abs() <= 0.02 && (m2 - 0.5).abs() <= 0.05,
        format!("d = 1 mean {m1:.4} (tol 0.02), d = 2 mean {m2:.4} (tol 0.05)"),
    ))
}

fn birkhoff_report(opts: &AcceptanceOptions) -> Result<ExperimentReport, ExperimentError> {
    birkhoff_experiment(&BirkhoffParams {
        d: 1,
        num_lattices: 5,
        n_max: 14,
        c: 1.0,
        a: None,
        norm: Norm::Sup,
        seed: opts.seed_or(BIRKHOFF_SEED),
    })
}

fn birkhoff(opts: &AcceptanceOptions) -> Outcome {
    let r = birkhoff_report(opts)?;
    let devs: Vec<f64> = r.summary["final"]
        .as_array()
        .map(|a| a.iter().map(|f| f["relative_deviation"].as_f64().unwrap_or(f64::NAN)).collect())
        .unwrap_or_default();
    let additive = r.summary["shell_additive"] == true;
    let within = devs.len() == 5 && devs.iter().all(|d| *d <= 0.15);
    Ok((
        additive && within,
        format!(
            "shells additive: {additive}; relative deviations {} (tol 0.15)",
            devs.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn thm3_report(d: usize, opts: &AcceptanceOptions) -> Result<ExperimentReport, ExperimentError> {
    let mut axis = vec![0.0; d];
    axis[0] = 1.0;
    thm3_experiment(&Thm3Params {
        d,
        c: 1.0,
        eps: 0.1,
        t_grid: vec![6.0],
        m: 2000,
        a: DirectionSet::hemisphere(&axis).expect("valid"),
        norm: Norm::Euclidean,
        seed: opts.seed_or(THM3_SEED),
        budget: DEFAULT_CANDIDATE_BUDGET,
    })
}

fn spherical(opts: &AcceptanceOptions) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [1, 2] {
        let r = thm3_report(d, opts)?;
        let f = |k: &str| r.summary_f64(k).unwrap_or(f64::NAN);
        let (ratio, se) = (f("ratio"), f("stderr"));
        let (num, num_se, reference) = (f("numerator_mean"), f("numerator_stderr"), f("numerator_reference"));
        let ratio_ok = (ratio - 0.5).abs() <= 3.0 * se;
        let num_ok = (num - reference).abs() <= 3.0 * num_se + 0.05 * reference;
        ok &= ratio_ok && num_ok;
        parts.push(format!(
            "d = {d}: ratio {ratio:.4} ± {se:.4}, numerator {num:.3} ± {num_se:.3} vs {reference:.3}"
        ));
    }
    let f = TestFunction::radial(2, 0.5, 1.5);
    let est = spherical_average(&f, &Lattice::integer(2), 0.0, 50, opts.seed_or(THM3_SEED), DEFAULT_CANDIDATE_BUDGET)?;
    let radial_ok = est.mean == 8.0 && est.stderr == 0.0;
    ok &= radial_ok;
    parts.push(format!("t = 0 radial mean {} stderr {}", est.mean, est.stderr));
    Ok((ok, parts.join("; ")))
}

fn haar(opts: &AcceptanceOptions) -> Outcome {
    let m = 10_000u64;
    let seed = opts.seed_or(HAAR_SEED);
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [2usize, 3, 4] {
        let mut worst = 0f64;
        let mut sum = 0f64;
        for i in 0..m {
            let k = haar_rotation(n, &mut sample_rng(seed, i));
            worst = worst.max(orthogonality_residual(&k));
            sum += k[(0, 0)];
        }
        let mean = sum / m as f64;
        let tol = 4.0 / (m as f64).sqrt();
        ok &= worst <= 1e-10 && mean.abs() <= tol;
        parts.push(format!("n = {n}: residual {worst:.1e}, mean {mean:.4}"));
    }
    Ok((ok, parts.join("; ")))
}

fn nonminimal_report() -> Result<ExperimentReport, ExperimentError> {
    nonminimal_experiment(&NonminimalParams {
        d: 2,
        x_base: CfSpec::Golden,
        t: 1e4,
        q_min: 100,
        c: 1.0,
        norm: Norm::Euclidean,
    })
}

fn nonminimal() -> Outcome {
    let r = nonminimal_report()?;
    let dist = r.summary_f64("max_diagonal_distance").unwrap_or(f64::NAN);
    let in_cap = r.summary["in_A_large_q"].as_u64().unwrap_or(u64::MAX);
    let checked = r.summary["checked"].as_u64().unwrap_or(0);
    Ok((
        checked > 0 && dist <= 1e-9 && in_cap == 0,
        format!("{checked} directions with q >= 100, max distance {dist:.1e}, {in_cap} in the disjoint cap"),
    ))
}

/// Every report the statistical and census criteria produce, in a fixed
/// order.
pub fn acceptance_reports(opts: &AcceptanceOptions) -> Result<Vec<ExperimentReport>, ExperimentError> {
    let c = top_census(opts)?;
    let top = opts.top_level();
    let thresholds: Vec<Threshold> = [top - 4, top - 2, top].map(Threshold::LevelEnd).to_vec();
    let neg = DirectionSet::sign_set(&[-1]).expect("valid");
    let mut out = Vec::new();
    for eps in [0.0, 0.01, 0.1] {
        out.push(biased_ratio_with(&c, &thresholds, &neg, eps)?);
    }
    out.extend(thm1_reports(opts)?);
    out.push(birkhoff_report(opts)?);
    out.push(thm3_report(1, opts)?);
    out.push(thm3_report(2, opts)?);
    out.push(nonminimal_report()?);
    Ok(out)
}

fn reproducibility(opts: &AcceptanceOptions) -> Outcome {
    let a = acceptance_reports(opts)?;
    let b = acceptance_reports(opts)?;
    let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.canonical_json() == y.canonical_json());
    let verdicts_a: Vec<bool> = (1..=6).map(|id| run_criterion(id, opts).passed).collect();
    let verdicts_b: Vec<bool> = (1..=6).map(|id| run_criterion(id, opts).passed).collect();
    let same_verdicts = verdicts_a == verdicts_b;
    Ok((
        same && same_verdicts,
        format!(
            "{} reports {} across two runs (timestamp excluded); exact verdicts {}",
            a.len(),
            if same { "byte-identical" } else { "differ" },
            if same_verdicts { "identical" } else { "differ" }
        ),
    ))
}
