use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::enumerate::visit_box;
use super::exact;
use super::region::{Predicate, Verdict, Window};
use super::{CountResult, Lattice, LatticeError, LatticeKind, Witness, DEFAULT_CANDIDATE_BUDGET};
use crate::contfrac::CFNumber;
use crate::sphere::{DirectionSet, Norm};
use crate::lattice::RegionSpec;

const EPS: f64 = f64::EPSILON;
/// Values of `q` handled per parallel task in the structured counter.
const Q_CHUNK: u64 = 1 << 14;

/// Knobs for the counting routines.
#[derive(Clone, Copy, Debug)]
pub struct CountOptions {
    pub witnesses: bool,
    pub budget: u64,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            witnesses: false,
            budget: DEFAULT_CANDIDATE_BUDGET,
        }
    }
}

/// `#(Λ ∩ region)`, with the direction split when the region carries `A`.
pub fn count_region(lattice: &Lattice, spec: &RegionSpec) -> Result<CountResult, LatticeError> {
    count_region_with(lattice, spec, CountOptions::default())
}

pub fn count_region_with(
    lattice: &Lattice,
    spec: &RegionSpec,
    opts: CountOptions,
) -> Result<CountResult, LatticeError> {
    spec.validate()?;
    if lattice.dim() != spec.d + 1 {
        return Err(LatticeError::DimensionMismatch {
            expected: spec.d + 1,
            got: lattice.dim(),
        });
    }
    if !spec.is_bounded() {
        return Err(LatticeError::UnboundedRegion);
    }
    count_predicate(lattice, &spec.predicate(), opts)
}

/// The dyadic shell `Q_i = P_{2^i} \ P_{2^{i-1}}`: `‖v_1‖^d v_2 <= c` and
/// `2^{i-1} < v_2 <= 2^i`.
pub fn shell_count(
    lattice: &Lattice,
    i: u32,
    c: f64,
    norm: Norm,
    a: Option<&DirectionSet>,
) -> Result<CountResult, LatticeError> {
    assert!(i >= 1, "shells are indexed from 1");
    let d = lattice.dim() - 1;
    let mut spec = RegionSpec::p(d, c, 2f64.powi(i as i32)).with_norm(norm);
    spec.directions = a.cloned();
    spec.validate()?;
    let lo = 2f64.powi(i as i32 - 1);
    let pred = Predicate::new(
        Window::open_closed(lo, exact::rational(lo), spec.t),
        d,
        c,
        norm,
        a,
    );
    count_predicate(lattice, &pred, CountOptions::default())
}

pub(crate) fn count_predicate(
    lattice: &Lattice,
    pred: &Predicate<'_>,
    opts: CountOptions,
) -> Result<CountResult, LatticeError> {
    match lattice.kind() {
        LatticeKind::Horospherical { x, exact } => Ok(scan_horospherical(x, exact.as_ref(), pred, opts).0),
        LatticeKind::Generic => count_generic(lattice, pred, opts),
    }
}

struct Tally<'p, 'a> {
    pred: &'p Predicate<'a>,
    result: CountResult,
    /// Smallest `q` of a counted point with `v_1 = 0`.
    zero_q: Option<u64>,
}

impl<'p, 'a> Tally<'p, 'a> {
    fn new(pred: &'p Predicate<'a>, opts: CountOptions) -> Self {
        Tally {
            pred,
            result: CountResult::empty(pred.directions().is_some(), opts.witnesses),
            zero_q: None,
        }
    }

    fn add(&mut self, verdict: Verdict, v: &[f64], coords: &[i64], q: Option<u64>) {
        let Verdict::In { zero, in_a } = verdict else {
            return;
        };
        let r = &mut self.result;
        r.total += 1;
        if zero {
            r.degenerate += 1;
            if let Some(q) = q {
                self.zero_q = Some(self.zero_q.map_or(q, |z| z.min(q)));
            }
        }
        if let (Some(n), Some(true)) = (r.in_a.as_mut(), in_a) {
            *n += 1;
        }
        if let Some(w) = r.witnesses.as_mut() {
            let d = self.pred.d();
            let direction = (!zero).then(|| {
                let n = Norm::Euclidean.of(&v[..d]);
                v[..d].iter().map(|x| x / n).collect()
            });
            w.push(Witness {
                v: v.to_vec(),
                coords: coords.to_vec(),
                q,
                direction,
                in_a,
            });
        }
    }
}

fn count_generic(lattice: &Lattice, pred: &Predicate<'_>, opts: CountOptions) -> Result<CountResult, LatticeError> {
    let bx = pred.window().bounding_box(pred.d(), pred.c());
    let b = lattice.basis();
    let dim = lattice.dim();
    let mut tally = Tally::new(pred, opts);
    let mut err = vec![0.0; dim];
    visit_box(lattice, &bx, opts.budget, |n, v| {
        for (i, e) in err.iter_mut().enumerate() {
            let mag: f64 = (0..dim).map(|j| (b[(i, j)] * n[j] as f64).abs()).sum();
            *e = mag * (dim as f64 + 1.0) * EPS;
        }
        let verdict = pred.classify(v, &err, || lattice.exact_point(n));
        tally.add(verdict, v, n, None);
    })?;
    Ok(tally.result)
}

/// Source of `x` for the per-`q` scan of `Λ_x`.
trait Horo: Sync {
    fn x(&self) -> &[f64];
    /// Absolute error of `fma(q, x_i, -p_i)` beyond its own rounding.
    fn x_err(&self, q: f64) -> f64;
    fn exact(&self, pred: &Predicate<'_>, q: u64, p: &[i64]) -> Verdict;
}

struct Floats<'a>(&'a [f64]);

impl Horo for Floats<'_> {
    fn x(&self) -> &[f64] {
        self.0
    }

    fn x_err(&self, _q: f64) -> f64 {
        0.0
    }

    fn exact(&self, pred: &Predicate<'_>, q: u64, p: &[i64]) -> Verdict {
        let qr = BigRational::from_integer(q.into());
        let mut v: Vec<BigRational> = self
            .0
            .iter()
            .zip(p)
            .map(|(x, p)| exact::rational(*x) * &qr - exact::int(*p))
            .collect();
        v.push(qr);
        pred.classify_exact(&v)
    }
}

struct Cf<'a> {
    cf: &'a CFNumber,
    x: [f64; 1],
}

impl Horo for Cf<'_> {
    fn x(&self) -> &[f64] {
        &self.x
    }

    fn x_err(&self, q: f64) -> f64 {
        q * EPS
    }

    fn exact(&self, pred: &Predicate<'_>, q: u64, p: &[i64]) -> Verdict {
        cf_verdict(self.cf, pred, q, p[0])
    }
}

/// Exact verdict for `v = (qx - p, q)` with `x` given by continued fraction
/// (`d = 1`, where both norms are `|v_1|`).
fn cf_verdict(x: &CFNumber, pred: &Predicate<'_>, q: u64, p: i64) -> Verdict {
    let qr = BigRational::from_integer(q.into());
    if !pred.window_contains(&qr) {
        return Verdict::Out;
    }
    let (q, p) = (BigInt::from(q), BigInt::from(p));
    let c = pred.c_exact();
    let (cn, cd) = (c.numer(), c.denom());
    // |qx - p| q <= c  <=>  -cn <= cd q^2 x - cd p q <= cn
    let a = cd * &q * &q;
    let b = cd * &p * &q;
    let sign = |b: &BigInt| x.sign_affine(&a, b).expect("sign of an affine form of x");
    let (above, below) = (sign(&(&b + cn)), sign(&(&b - cn)));
    let outside = if pred.is_strict() {
        above != Ordering::Less || below != Ordering::Greater
    } else {
        above == Ordering::Greater || below == Ordering::Less
    };
    if outside {
        return Verdict::Out;
    }
    let s = x.sign_affine(&q, &p).expect("sign of qx - p");
    if s == Ordering::Equal {
        return Verdict::In { zero: true, in_a: None };
    }
    let u = if s == Ordering::Greater { 1.0 } else { -1.0 };
    Verdict::In {
        zero: false,
        in_a: pred.directions().and_then(|a| a.contains_direction_of(&[u])),
    }
}

pub(crate) fn scan_horospherical(
    x: &[f64],
    cf: Option<&CFNumber>,
    pred: &Predicate<'_>,
    opts: CountOptions,
) -> (CountResult, Option<u64>) {
    match cf {
        Some(cf) => count_horospherical(pred, opts, &Cf { cf, x: [cf.to_f64()] }),
        None => count_horospherical(pred, opts, &Floats(x)),
    }
}

/// Per-`q` scan of `Λ_x`; also returns the smallest `q` with `qx = p`.
fn count_horospherical<H: Horo>(pred: &Predicate<'_>, opts: CountOptions, src: &H) -> (CountResult, Option<u64>) {
    let w = pred.window();
    let q_lo = w.lo.floor().max(1.0) as u64;
    let q_hi = w.hi.floor() as u64 + 1;
    if q_lo > q_hi {
        return (CountResult::empty(pred.directions().is_some(), opts.witnesses), None);
    }
    let chunks: Vec<(u64, u64)> = (q_lo..=q_hi)
        .step_by(Q_CHUNK as usize)
        .map(|s| (s, (s + Q_CHUNK - 1).min(q_hi)))
        .collect();
    let parts: Vec<(CountResult, Option<u64>)> = chunks
        .par_iter()
        .map(|&(a, b)| scan_q_range(pred, opts, src, a, b))
        .collect();
    let mut total = CountResult::empty(pred.directions().is_some(), opts.witnesses);
    let mut zero_q = None;
    for (p, z) in parts {
        total.merge(p);
        zero_q = zero_q.or(z);
    }
    (total, zero_q)
}

fn scan_q_range<H: Horo>(
    pred: &Predicate<'_>,
    opts: CountOptions,
    src: &H,
    q_from: u64,
    q_to: u64,
) -> (CountResult, Option<u64>) {
    let d = pred.d();
    let x = src.x();
    let mut tally = Tally::new(pred, opts);
    let mut v = vec![0.0; d + 1];
    let mut err = vec![0.0; d + 1];
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    let mut p = vec![0i64; d];
    let mut coords = vec![0i64; d + 1];
    for q in q_from..=q_to {
        let qf = q as f64;
        let rho = (pred.c() / qf).powf(1.0 / d as f64) * (1.0 + 1e-6) + 1e-9;
        for i in 0..d {
            let qx = qf * x[i];
            lo[i] = (qx - rho).floor() as i64;
            hi[i] = (qx + rho).ceil() as i64;
        }
        p.copy_from_slice(&lo);
        'odometer: loop {
            for i in 0..d {
                v[i] = qf.mul_add(x[i], -(p[i] as f64));
                err[i] = v[i].abs() * EPS + src.x_err(qf);
                coords[i] = -p[i];
            }
            v[d] = qf;
            coords[d] = q as i64;
            let verdict = match pred.classify_f64(&v, &err) {
                Some(verdict) => verdict,
                None => src.exact(pred, q, &p),
            };
            tally.add(verdict, &v, &coords, Some(q));
            let mut k = 0;
            loop {
                if k == d {
                    break 'odometer;
                }
                if p[k] < hi[k] {
                    p[k] += 1;
                    break;
                }
                p[k] = lo[k];
                k += 1;
            }
        }
    }
    (tally.result, tally.zero_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::g_flow_scale;

    #[test]
    fn integer_lattice_examples() {
        let z2 = Lattice::integer(2);
        let r = count_region(&z2, &RegionSpec::p(1, 1.0, 10.0)).unwrap();
        assert_eq!((r.total, r.in_a, r.degenerate), (9, None, 9));
        let a = DirectionSet::sign_set(&[-1]).unwrap();
        let r = count_region(&z2, &RegionSpec::p(1, 1.0, 10.0).with_directions(a)).unwrap();
        assert_eq!((r.total, r.in_a, r.degenerate), (9, Some(0), 9));
        // At v_2 = 1 the constraint ‖v_1‖^2 <= 1 keeps the whole unit sphere
        // of the norm, not just v_1 = 0.
        let z3 = Lattice::integer(3);
        let r = RegionSpec::r(2, 1.0, 0.9, 1.0);
        assert_eq!(count_region(&z3, &r).unwrap().total, 9);
        let r = r.with_norm(Norm::Euclidean);
        assert_eq!(count_region(&z3, &r).unwrap().total, 5);
    }

    #[test]
    fn shells_of_z2() {
        let z2 = Lattice::integer(2);
        assert_eq!(shell_count(&z2, 2, 1.0, Norm::Sup, None).unwrap().total, 2);
        let sum: u64 = (1..=3)
            .map(|i| shell_count(&z2, i, 1.0, Norm::Sup, None).unwrap().total)
            .sum();
        assert_eq!(sum, 7);
        assert_eq!(count_region(&z2, &RegionSpec::p(1, 1.0, 8.0)).unwrap().total, 7);
    }

    #[test]
    fn structured_and_generic_paths_agree() {
        let x = [0.6180339887498949, 0.2];
        for d in 1..=2 {
            let horo = Lattice::from_x(&x[..d]);
            let generic = Lattice::from_basis(horo.basis().clone()).unwrap();
            let spec = RegionSpec::r(d, 1.0, 0.05, 300.0)
                .with_directions(DirectionSet::hemisphere(&[1.0, 0.5][..d]).unwrap());
            let a = count_region(&horo, &spec).unwrap();
            let b = count_region(&generic, &spec).unwrap();
            assert_eq!(a, b, "d = {d}");
            assert!(a.total > 0);
        }
    }

    #[test]
    fn cf_path_matches_float_path() {
        let cf = CFNumber::golden();
        let exact = Lattice::from_cf(&cf);
        let float = Lattice::from_x(&[cf.to_f64()]);
        let spec = RegionSpec::p(1, 1.0, 5000.0).with_directions(DirectionSet::sign_set(&[1]).unwrap());
        let opts = CountOptions { witnesses: true, ..Default::default() };
        let a = count_region_with(&exact, &spec, opts).unwrap();
        let b = count_region_with(&float, &spec, opts).unwrap();
        assert_eq!(a.total, b.total);
        assert_eq!(a.in_a, b.in_a);
        assert_eq!(a.in_a, Some(9));
        // Every counted q is a Fibonacci number.
        let qs: Vec<u64> = a.witnesses.unwrap().iter().map(|w| w.q.unwrap()).collect();
        assert_eq!(qs, vec![2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181]);
    }

    #[test]
    fn flow_equivariance_with_dyadic_scale() {
        // e^t = 4, d = 1: g_t maps R_{eps,4} onto R_{eps,1}.
        let l = Lattice::from_x(&[0.3819660112501051]);
        let moved = l.transformed(&g_flow_scale(4.0, 1)).unwrap();
        let before = count_region(&l, &RegionSpec::r(1, 1.0, 0.25, 4.0)).unwrap();
        let after = count_region(&moved, &RegionSpec::r(1, 1.0, 0.25, 1.0)).unwrap();
        assert_eq!(before.total, after.total);
    }

    #[test]
    fn unbounded_and_mismatched_specs_fail() {
        let z2 = Lattice::integer(2);
        assert_eq!(
            count_region(&z2, &RegionSpec::r(1, 1.0, 0.0, 3.0)),
            Err(LatticeError::UnboundedRegion)
        );
        assert!(matches!(
            count_region(&z2, &RegionSpec::p(2, 1.0, 3.0)),
            Err(LatticeError::DimensionMismatch { .. })
        ));
    }
}
