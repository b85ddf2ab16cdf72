use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::contfrac::{biased_elements, CFNumber, ContFracError};
use crate::lattice::exact;
use crate::sphere::DirectionSet;

const EPS: f64 = f64::EPSILON;

/// Deepest level the exhaustive mode accepts (`a_9 / 1 ≈ 1.7·10^7` candidates
/// per class at `n = 7`; `n = 9` would need `10^10`).
pub const EXHAUSTIVE_MAX_LEVEL: u32 = 7;

/// One lattice point `(p, q)` of `R` (sup norm, `C = 1`) found by the census,
/// written `q = m q_n + r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub n: u32,
    #[serde(with = "crate::bigint_serde::int")]
    pub r: BigInt,
    pub m: u64,
    #[serde(with = "crate::bigint_serde::int")]
    pub q: BigInt,
    #[serde(with = "crate::bigint_serde::int")]
    pub p: BigInt,
    #[serde(rename = "in_R")]
    pub in_r: bool,
    /// Sign of `qx - p`.
    pub sign: i8,
}

/// Per-level totals of a census.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub n: u32,
    #[serde(with = "crate::bigint_serde::int")]
    pub q_n: BigInt,
    #[serde(with = "crate::bigint_serde::int_vec")]
    pub classes: Vec<BigInt>,
    pub in_r_by_class: Vec<u64>,
    /// In-between points of remainder `0` lying in `R`.
    #[serde(rename = "L_n")]
    pub l_n: u64,
    /// `⌊(n+1)^{(n+1)/2}⌋` for odd `n`.
    #[serde(rename = "L_bound", skip_serializing_if = "Option::is_none")]
    pub l_bound: Option<u64>,
    /// Fraction of negative-direction points among all points with
    /// `q < q_{n+1}`.
    pub ratio_neg_so_far: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensusMode {
    /// Binary search on the quadratic `(mq_n + r)(q·x)` in `m`; cost
    /// logarithmic in `a_{n+1}`.
    Interval,
    /// Every candidate `m` checked (floating point with a certified error
    /// bound, exact fallback).
    Exhaustive,
}

/// Every point of `R` with `1 <= q <= q_{n_max+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub n_max: u32,
    pub mode: CensusMode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub candidates_checked: Option<u64>,
    /// Largest `q` covered, `q_{n_max+1}`.
    #[serde(with = "crate::bigint_serde::int")]
    pub q_end: BigInt,
    pub levels: Vec<LevelSummary>,
    pub rows: Vec<CensusRow>,
}

impl Census {
    pub fn level(&self, n: u32) -> Option<&LevelSummary> {
        self.levels.iter().find(|l| l.n == n)
    }

    /// `L_n` for the given level.
    pub fn l_n(&self, n: u32) -> Option<u64> {
        self.level(n).map(|l| l.l_n)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn cf_err(e: ContFracError) -> ExperimentError {
    ExperimentError::ContFrac(e)
}

/// Exact membership of `(p, q)` in `R`: `|qx - p| q <= 1`.
fn in_r_exact(x: &CFNumber, q: &BigInt, p: &BigInt) -> Result<bool, ExperimentError> {
    let a = q * q;
    let b = q * p;
    let hi = x.sign_affine(&a, &(&b + 1)).map_err(cf_err)?;
    let lo = x.sign_affine(&a, &(&b - 1)).map_err(cf_err)?;
    Ok(hi != Ordering::Greater && lo != Ordering::Less)
}

fn sign_of(x: &CFNumber, q: &BigInt, p: &BigInt) -> Result<i8, ExperimentError> {
    Ok(match x.sign_affine(q, p).map_err(cf_err)? {
        Ordering::Greater => 1,
        Ordering::Less => -1,
        Ordering::Equal => 0,
    })
}

/// Candidate remainders `{0, q_{n-1}, 2 q_{n-1}, q_n - q_{n-1}}` reduced
/// modulo `q_n`, sorted and deduplicated.
pub fn candidate_classes(x: &CFNumber, n: u32) -> Vec<BigInt> {
    let qn = x.q(n as i64);
    let qp = x.q(n as i64 - 1);
    let mut v: Vec<BigInt> = [BigInt::zero(), qp.clone(), &qp * 2, &qn - &qp]
        .into_iter()
        .map(|r| r.mod_floor(&qn))
        .collect();
    v.sort();
    v.dedup();
    v
}

/// `⌊(n+1)^{(n+1)/2}⌋`.
pub fn l_lower_bound(n: u32) -> u64 {
    let k = BigInt::from(n + 1).pow(n + 1);
    k.sqrt().to_u64().expect("bound fits in u64")
}

/// Census of the biased number.
pub fn biased_census(n_max: u32) -> Result<Census, ExperimentError> {
    census(&CFNumber::biased(), n_max, CensusMode::Interval)
}

/// Enumerates the points of `R` with `q <= q_{n_max+1}` among the candidate
/// remainder classes of every level `n <= n_max`, plus all points with
/// `q <= 2` (where several `p` can qualify).
pub fn census(x: &CFNumber, n_max: u32, mode: CensusMode) -> Result<Census, ExperimentError> {
    let mut rows = small_q_rows(x)?;
    let mut tasks = Vec::new();
    for n in 0..=n_max {
        for r in candidate_classes(x, n) {
            let ks: &[i64] = match mode {
                CensusMode::Interval => &[-1, 0, 1],
                CensusMode::Exhaustive => &[0],
            };
            for &k in ks {
                tasks.push((n, r.clone(), k));
            }
        }
    }
    if mode == CensusMode::Exhaustive && n_max > EXHAUSTIVE_MAX_LEVEL {
        return Err(ExperimentError::InvalidParameter(format!(
            "exhaustive census limited to n_max <= {EXHAUSTIVE_MAX_LEVEL}"
        )));
    }
    let found: Vec<(Vec<CensusRow>, u64)> = tasks
        .par_iter()
        .map(|(n, r, k)| match mode {
            CensusMode::Interval => class_interval(x, *n, r, *k).map(|v| (v, 0)),
            CensusMode::Exhaustive => class_exhaustive(x, *n, r),
        })
        .collect::<Result<_, _>>()?;
    let mut candidates_checked = 0;
    for (f, c) in found {
        rows.extend(f);
        candidates_checked += c;
    }
    // q_{n_max+1} itself closes the covered range.
    let q_end = x.q(n_max as i64 + 1);
    let c = x.convergent(n_max as i64 + 1);
    rows.push(CensusRow {
        n: n_max + 1,
        r: BigInt::zero(),
        m: 1,
        sign: sign_of(x, &c.q, &c.p)?,
        q: c.q,
        p: c.p,
        in_r: true,
    });
    rows.sort_by(|a, b| a.q.cmp(&b.q).then(a.p.cmp(&b.p)));

    let biased = x.label() == CFNumber::biased().label();
    let mut levels = Vec::new();
    for n in 0..=n_max {
        let classes = candidate_classes(x, n);
        let in_r_by_class = classes
            .iter()
            .map(|r| {
                rows.iter()
                    .filter(|row| row.n == n && &row.r == r && row.q > BigInt::from(2))
                    .count() as u64
            })
            .collect::<Vec<_>>();
        let q_next = x.q(n as i64 + 1);
        let upto: Vec<&CensusRow> = rows.iter().filter(|row| row.q < q_next).collect();
        let neg = upto.iter().filter(|row| row.sign < 0).count();
        levels.push(LevelSummary {
            n,
            q_n: x.q(n as i64),
            l_n: rows
                .iter()
                .filter(|row| row.n == n && row.r.is_zero() && row.q > BigInt::from(2))
                .count() as u64,
            classes,
            in_r_by_class,
            l_bound: (biased && n % 2 == 1).then(|| l_lower_bound(n)),
            ratio_neg_so_far: neg as f64 / upto.len().max(1) as f64,
        });
    }
    Ok(Census {
        n_max,
        mode,
        candidates_checked: (mode == CensusMode::Exhaustive).then_some(candidates_checked),
        q_end,
        levels,
        rows,
    })
}

fn small_q_rows(x: &CFNumber) -> Result<Vec<CensusRow>, ExperimentError> {
    let mut rows = Vec::new();
    let xf = x.to_f64();
    for q in 1..=2i64 {
        let base = (q as f64 * xf).floor() as i64;
        for p in base - 1..=base + 2 {
            let (qb, pb) = (BigInt::from(q), BigInt::from(p));
            if in_r_exact(x, &qb, &pb)? {
                rows.push(CensusRow {
                    n: 0,
                    r: BigInt::zero(),
                    m: q as u64,
                    sign: sign_of(x, &qb, &pb)?,
                    q: qb,
                    p: pb,
                    in_r: true,
                });
            }
        }
    }
    Ok(rows)
}

/// The `m` range with `max(q_n, 3) <= m q_n + r < q_{n+1}`.
fn m_range(x: &CFNumber, n: u32, r: &BigInt) -> Option<(u64, u64)> {
    let qn = x.q(n as i64);
    let lo = qn.clone().max(BigInt::from(3));
    let hi = x.q(n as i64 + 1) - 1;
    let m_lo = Integer::div_ceil(&(lo - r), &qn).max(BigInt::zero());
    let m_hi = Integer::div_floor(&(hi - r), &qn);
    if m_hi < m_lo {
        return None;
    }
    Some((m_lo.to_u64()?, m_hi.to_u64()?))
}

/// Smallest `m` in `[a, b]` with `pred(m)` for `pred` monotone false -> true,
/// or `b + 1`.
fn first_true<F>(a: u64, b: u64, mut pred: F) -> Result<u64, ExperimentError>
where
    F: FnMut(u64) -> Result<bool, ExperimentError>,
{
    let (mut lo, mut hi) = (a, b + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Points of one residue class and one branch `p = m p_n + P_r + k`.
///
/// `G(m) = q (qx - p)` is a quadratic polynomial in `m`, so the set where
/// `|G| <= 1` is found from its vertex and monotone pieces by bisection,
/// every comparison being an exact sign of an affine form in `x`.
fn class_interval(x: &CFNumber, n: u32, r: &BigInt, k: i64) -> Result<Vec<CensusRow>, ExperimentError> {
    let Some((m_lo, m_hi)) = m_range(x, n, r) else {
        return Ok(Vec::new());
    };
    let c = x.convergent(n as i64);
    let (qn, pn) = (c.q, c.p);
    let p_r = if r.is_zero() {
        BigInt::zero()
    } else {
        x.nearest_integer(r).map_err(cf_err)?
    } + k;
    let qp = |m: u64| {
        let mb = BigInt::from(m);
        (&mb * &qn + r, &mb * &pn + &p_r)
    };
    // G(m) > 1 and G(m) < -1.
    let above = |m: u64| -> Result<bool, ExperimentError> {
        let (q, p) = qp(m);
        Ok(x.sign_affine(&(&q * &q), &(&q * &p + 1)).map_err(cf_err)? == Ordering::Greater)
    };
    let below = |m: u64| -> Result<bool, ExperimentError> {
        let (q, p) = qp(m);
        Ok(x.sign_affine(&(&q * &q), &(&q * &p - 1)).map_err(cf_err)? == Ordering::Less)
    };
    // G(m+1) >= G(m).
    let rising = |m: u64| -> Result<bool, ExperimentError> {
        let (q0, p0) = qp(m);
        let (q1, p1) = qp(m + 1);
        let a = &q1 * &q1 - &q0 * &q0;
        let b = &q1 * &p1 - &q0 * &p0;
        Ok(x.sign_affine(&a, &b).map_err(cf_err)? != Ordering::Less)
    };
    // The leading coefficient of G has the sign of q_n x - p_n.
    let convex = x.sign_affine(&qn, &pn).map_err(cf_err)? == Ordering::Greater;
    let mut spans = Vec::new();
    if m_lo == m_hi {
        if !above(m_lo)? && !below(m_lo)? {
            spans.push(Some((m_lo, m_lo)));
        }
    } else if convex {
        let v = first_true(m_lo, m_hi - 1, rising)?.min(m_hi);
        spans.push(decreasing_span(m_lo, v, &above, &below)?);
        if v < m_hi {
            spans.push(increasing_span(v + 1, m_hi, &above, &below)?);
        }
    } else {
        let v = first_true(m_lo, m_hi - 1, |m| Ok(!rising(m)?))?.min(m_hi);
        spans.push(increasing_span(m_lo, v, &above, &below)?);
        if v < m_hi {
            spans.push(decreasing_span(v + 1, m_hi, &above, &below)?);
        }
    }
    let mut rows = Vec::new();
    for (s, e) in spans.into_iter().flatten() {
        for m in s..=e {
            let (q, p) = qp(m);
            rows.push(CensusRow {
                n,
                r: r.clone(),
                m,
                sign: sign_of(x, &q, &p)?,
                q,
                p,
                in_r: true,
            });
        }
    }
    Ok(rows)
}

type Probe<'a> = dyn Fn(u64) -> Result<bool, ExperimentError> + 'a;

/// In-`R` span of a piece of `[a, b]` where `G` is nondecreasing.
fn increasing_span(a: u64, b: u64, above: &Probe<'_>, below: &Probe<'_>) -> Result<Option<(u64, u64)>, ExperimentError> {
    let start = first_true(a, b, |m| Ok(!below(m)?))?;
    let end = first_true(a, b, above)?;
    Ok((start < end).then(|| (start, end - 1)))
}

/// In-`R` span of a piece of `[a, b]` where `G` is nonincreasing.
fn decreasing_span(a: u64, b: u64, above: &Probe<'_>, below: &Probe<'_>) -> Result<Option<(u64, u64)>, ExperimentError> {
    let start = first_true(a, b, |m| Ok(!above(m)?))?;
    let end = first_true(a, b, below)?;
    Ok((start < end).then(|| (start, end - 1)))
}

/// Exhaustive scan of one residue class; returns the rows and the number of
/// candidates examined.
fn class_exhaustive(x: &CFNumber, n: u32, r: &BigInt) -> Result<(Vec<CensusRow>, u64), ExperimentError> {
    let Some((m_lo, m_hi)) = m_range(x, n, r) else {
        return Ok((Vec::new(), 0));
    };
    let c = x.convergent(n as i64);
    let (qn, pn) = (c.q, c.p);
    let p_r = if r.is_zero() {
        BigInt::zero()
    } else {
        x.nearest_integer(r).map_err(cf_err)?
    };
    // q x - p = m delta + rho with delta = q_n x - p_n and rho = r x - P_r.
    let delta = x.affine_f64(&qn, &pn).map_err(cf_err)?;
    let rho = x.affine_f64(r, &p_r).map_err(cf_err)?;
    let qn_f = qn.to_f64().unwrap_or(f64::INFINITY);
    let r_f = r.to_f64().unwrap_or(f64::INFINITY);
    let mut rows = Vec::new();
    for m in m_lo..=m_hi {
        let mf = m as f64;
        let raw = mf.mul_add(delta, rho);
        let k = raw.round();
        let v = raw - k;
        let q_f = mf.mul_add(qn_f, r_f);
        // Relative error of delta and rho is below 2^-52, plus the rounding of
        // the fused product, the subtraction and the product with q.
        let err = (mf * delta.abs() + rho.abs() + raw.abs()) * 4.0 * EPS * q_f + 4.0 * EPS;
        let g = v.abs() * q_f;
        if g > 1.0 + err {
            continue;
        }
        let mb = BigInt::from(m);
        let q = &mb * &qn + r;
        let p = &mb * &pn + &p_r + BigInt::from(k as i64);
        if g >= 1.0 - err && !in_r_exact(x, &q, &p)? {
            continue;
        }
        let sign = if v.abs() * q_f > err {
            if v > 0.0 { 1 } else { -1 }
        } else {
            sign_of(x, &q, &p)?
        };
        rows.push(CensusRow {
            n,
            r: r.clone(),
            m,
            q,
            p,
            in_r: true,
            sign,
        });
    }
    Ok((rows, m_hi - m_lo + 1))
}

/// Every `(p, q)` with `1 <= q < q_end` and `|q(qx - p)| <= 1`, by direct
/// scan over `q`.
pub fn brute_force_in_r(x: &CFNumber, q_end: u64) -> Result<Vec<(u64, i64)>, ExperimentError> {
    let q_max = q_end.saturating_sub(1);
    let chunks: Vec<(u64, u64)> = (1..=q_max)
        .step_by(4096)
        .map(|s| (s, (s + 4095).min(q_max)))
        .collect();
    let found: Vec<Vec<(u64, i64)>> = chunks
        .par_iter()
        .map(|&(s, e)| {
            let mut out = Vec::new();
            for q in s..=e {
                let qb = BigInt::from(q);
                let p0 = x.nearest_integer(&qb).map_err(cf_err)?;
                for dp in -1..=1 {
                    let p = &p0 + dp;
                    if in_r_exact(x, &qb, &p)? {
                        out.push((q, p.to_i64().expect("p fits in i64")));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Points of `brute` whose `q` lies in no candidate class of its level
/// (`q_n <= q < q_{n+1}`, `q >= 3`).
pub fn outside_candidate_classes(x: &CFNumber, brute: &[(u64, i64)]) -> Vec<(u64, i64)> {
    brute
        .iter()
        .filter(|(q, _)| {
            if *q <= 2 {
                return false;
            }
            let qb = BigInt::from(*q);
            let mut n = 0u32;
            while x.q(n as i64 + 1) <= qb {
                n += 1;
            }
            let qn = x.q(n as i64);
            !candidate_classes(x, n).contains(&qb.mod_floor(&qn))
        })
        .copied()
        .collect()
}

/// Smallest `|n q_n x - p_n|` governing `q`: the convergent index `n` with
/// `q_n <= q < q_{n+1}`. Checks `|q·x| >= |q_n·x|` exactly for all
/// `1 <= q < q_end` and returns the violations.
pub fn best_approximation_violations(x: &CFNumber, q_end: u64) -> Result<Vec<u64>, ExperimentError> {
    let mut bad = Vec::new();
    let mut n = 0i64;
    for q in 1..q_end {
        let qb = BigInt::from(q);
        while x.q(n + 1) <= qb {
            n += 1;
        }
        let c = x.convergent(n);
        let p = x.nearest_integer(&qb).map_err(cf_err)?;
        // s_a (q x - p) - s_b (q_n x - p_n) >= 0 with s the respective signs.
        let sa = x.sign_affine(&qb, &p).map_err(cf_err)?;
        let sb = x.sign_affine(&c.q, &c.p).map_err(cf_err)?;
        let s = |o: Ordering| if o == Ordering::Less { -1 } else { 1 };
        let (ka, kb) = (BigInt::from(s(sa)), BigInt::from(s(sb)));
        let a = &ka * &qb - &kb * &c.q;
        let b = &ka * &p - &kb * &c.p;
        if x.sign_affine(&a, &b).map_err(cf_err)? == Ordering::Less {
            bad.push(q);
        }
    }
    Ok(bad)
}

/// Threshold `⌊√a_{n+1}⌋ q_n`: the end of the in-between points of level `n`
/// lying in `R`.
pub fn level_end_threshold(n: u32) -> BigInt {
    let a = BigInt::from(biased_elements(n as u64 + 1));
    a.sqrt() * CFNumber::biased().q(n as i64)
}

/// Sign counts inside the window `εT <= q <= T` (`q >= 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCount {
    #[serde(rename = "T", with = "crate::bigint_serde::int")]
    pub t: BigInt,
    pub eps: f64,
    pub total: u64,
    pub negative: u64,
    pub positive: u64,
    pub degenerate: u64,
}

impl WindowCount {
    /// `N(A) / N` for the sign set `A`.
    pub fn ratio(&self, a: &DirectionSet) -> Result<f64, ExperimentError> {
        if self.total == 0 {
            return Err(ExperimentError::EmptyDenominator);
        }
        let neg = a.contains_direction_of(&[-1.0]) == Some(true);
        let pos = a.contains_direction_of(&[1.0]) == Some(true);
        let hits = neg as u64 * self.negative + pos as u64 * self.positive;
        Ok(hits as f64 / self.total as f64)
    }
}

/// Counts census points with `εT <= q <= T`; `T` must not exceed the
/// census coverage `q_end`.
pub fn window_count(census: &Census, t: &BigInt, eps: f64) -> Result<WindowCount, ExperimentError> {
    if t > &census.q_end {
        return Err(ExperimentError::InvalidParameter(format!(
            "threshold {t} beyond census coverage {}",
            census.q_end
        )));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(ExperimentError::InvalidParameter(format!("eps = {eps} outside [0, 1]")));
    }
    // εT <= q exactly: eps is a dyadic rational.
    let eps_r = exact::rational(eps);
    let t_r = BigRational::from_integer(t.clone());
    let lower = (&eps_r * &t_r).ceil().to_integer().max(BigInt::one());
    let mut wc = WindowCount {
        t: t.clone(),
        eps,
        total: 0,
        negative: 0,
        positive: 0,
        degenerate: 0,
    };
    for row in census.rows.iter().filter(|r| r.q >= lower && &r.q <= t) {
        wc.total += 1;
        match row.sign {
            -1 => wc.negative += 1,
            1 => wc.positive += 1,
            _ => wc.degenerate += 1,
        }
    }
    Ok(wc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> u64 {
        CFNumber::biased().q(5).to_u64().unwrap()
    }

    #[test]
    fn classes_and_bounds() {
        let x = CFNumber::biased();
        let c: Vec<i64> = candidate_classes(&x, 2).iter().map(|v| v.to_i64().unwrap()).collect();
        assert_eq!(c, vec![0, 4, 8, 13]);
        assert_eq!(l_lower_bound(5), 216);
        assert_eq!(l_lower_bound(7), 4096);
        assert_eq!(l_lower_bound(9), 100000);
        assert_eq!(level_end_threshold(1), BigInt::from(8));
    }

    #[test]
    fn census_matches_brute_force_below_q5() {
        let x = CFNumber::biased();
        let brute = brute_force_in_r(&x, q5()).unwrap();
        assert_eq!(brute.len(), 32);
        assert!(outside_candidate_classes(&x, &brute).is_empty());
        let census = census(&x, 4, CensusMode::Interval).unwrap();
        let got: Vec<(u64, i64)> = census
            .rows
            .iter()
            .filter(|r| r.q < BigInt::from(q5()))
            .map(|r| (r.q.to_u64().unwrap(), r.p.to_i64().unwrap()))
            .collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn golden_census_matches_brute_force() {
        let x = CFNumber::golden();
        let census = census(&x, 20, CensusMode::Interval).unwrap();
        let end = census.q_end.to_u64().unwrap();
        let brute = brute_force_in_r(&x, end + 1).unwrap();
        let got: Vec<(u64, i64)> = census
            .rows
            .iter()
            .map(|r| (r.q.to_u64().unwrap(), r.p.to_i64().unwrap()))
            .collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn interval_and_exhaustive_agree() {
        let x = CFNumber::biased();
        let a = census(&x, 5, CensusMode::Interval).unwrap();
        let b = census(&x, 5, CensusMode::Exhaustive).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.l_n(5), Some(216));
    }

    #[test]
    fn level_counts() {
        let c = biased_census(5).unwrap();
        assert_eq!(c.l_n(1), Some(2));
        assert_eq!(c.l_n(3), Some(16));
        assert_eq!(c.l_n(5), Some(216));
        for lvl in &c.levels {
            if lvl.n % 2 == 1 {
                assert!(lvl.l_n >= lvl.l_bound.unwrap());
            }
        }
    }

    #[test]
    fn row_signs_follow_exact_rotation_sign() {
        let x = CFNumber::biased();
        let c = biased_census(5).unwrap();
        for row in c.rows.iter().step_by(7) {
            let rot = x.rotation_value(&row.q).unwrap();
            assert_eq!(rot.sign, row.sign);
        }
        // Convergents alternate.
        for row in c.rows.iter().filter(|r| r.m == 1 && r.r.is_zero() && r.q > BigInt::from(2)) {
            assert_eq!(row.sign, if row.n % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn window_ratios_partition() {
        let c = biased_census(5).unwrap();
        let t = level_end_threshold(5);
        let w = window_count(&c, &t, 0.0).unwrap();
        let neg = w.ratio(&DirectionSet::sign_set(&[-1]).unwrap()).unwrap();
        let pos = w.ratio(&DirectionSet::sign_set(&[1]).unwrap()).unwrap();
        assert_eq!(w.degenerate, 0);
        assert!((neg + pos - 1.0).abs() < 1e-15);
        assert_eq!(w.total, 248);
        assert_eq!(w.negative, 240);
        let narrow = window_count(&c, &BigInt::from(7), 0.9).unwrap();
        assert!(matches!(
            narrow.ratio(&DirectionSet::sign_set(&[-1]).unwrap()),
            Err(ExperimentError::EmptyDenominator)
        ));
        assert!(window_count(&c, &(c.q_end.clone() + 1), 0.0).is_err());
    }

    #[test]
    fn csv_has_decimal_strings() {
        let c = biased_census(2).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("n,r,m,q,p,in_R,sign\n"));
        assert!(s.contains(",72,"));
    }
}
