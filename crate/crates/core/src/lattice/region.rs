use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::enumerate::AxisBox;
use super::exact;
use super::LatticeError;
use crate::sphere::{ball_volume, DirectionSet, Norm};

/// Relative slack under which a floating-point decision is re-done exactly.
const GRAZE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    /// `P_T`: `‖v_1‖^d v_2 <= c`, `1 < v_2 <= T`.
    P,
    /// `R_{eps,T}`: `‖v_1‖^d v_2 <= c`, `eps T <= v_2 <= T`.
    R,
}

/// One of the regions `P_T`, `R_{eps,T}` or their direction-restricted
/// variants `P_{A,T}`, `R_{A,eps,T}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub d: usize,
    pub c: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub norm: Norm,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "A")]
    pub directions: Option<DirectionSet>,
}

impl RegionSpec {
    pub fn p(d: usize, c: f64, t: f64) -> Self {
        RegionSpec {
            kind: RegionKind::P,
            d,
            c,
            t,
            eps: 0.0,
            norm: Norm::Sup,
            directions: None,
        }
    }

    pub fn r(d: usize, c: f64, eps: f64, t: f64) -> Self {
        RegionSpec {
            kind: RegionKind::R,
            d,
            c,
            t,
            eps,
            norm: Norm::Sup,
            directions: None,
        }
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_directions(mut self, a: DirectionSet) -> Self {
        self.directions = Some(a);
        self
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        let bad = |m: String| Err(LatticeError::InvalidRegion(m));
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c = {} must be positive", self.c));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("T = {} must be positive", self.t));
        }
        if self.kind == RegionKind::R && !(0.0..1.0).contains(&self.eps) {
            return bad(format!("eps = {} must lie in [0, 1)", self.eps));
        }
        if let Some(a) = &self.directions {
            a.validate()
                .map_err(|e| LatticeError::InvalidRegion(e.to_string()))?;
            if a.dim() != self.d {
                return Err(LatticeError::DimensionMismatch {
                    expected: self.d,
                    got: a.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn is_bounded(&self) -> bool {
        match self.kind {
            RegionKind::P => true,
            RegionKind::R => self.eps > 0.0,
        }
    }

    pub(crate) fn window(&self) -> Window {
        match self.kind {
            RegionKind::P => Window::open_closed(1.0, exact::int(1), self.t),
            RegionKind::R => Window {
                lo: self.eps * self.t,
                lo_exact: exact::rational(self.eps) * exact::rational(self.t),
                lo_strict: false,
                hi: self.t,
                hi_exact: exact::rational(self.t),
            },
        }
    }

    pub(crate) fn predicate(&self) -> Predicate<'_> {
        Predicate::new(self.window(), self.d, self.c, self.norm, self.directions.as_ref())
    }

    /// Axis-aligned box containing the region.
    pub fn bounding_box(&self) -> Result<AxisBox, LatticeError> {
        self.validate()?;
        if !self.is_bounded() {
            return Err(LatticeError::UnboundedRegion);
        }
        Ok(self.window().bounding_box(self.d, self.c))
    }
}

/// Result of a region membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    In,
    Out,
    /// Passes the scalar constraints but `v_1 = 0`, so the direction test
    /// of a direction-restricted region is undefined.
    Degenerate,
}

/// Range constraint on `v_2`.
#[derive(Clone, Debug)]
pub(crate) struct Window {
    pub lo: f64,
    pub lo_exact: BigRational,
    pub lo_strict: bool,
    pub hi: f64,
    pub hi_exact: BigRational,
}

impl Window {
    /// `lo < v_2 <= hi`.
    pub fn open_closed(lo: f64, lo_exact: BigRational, hi: f64) -> Self {
        Window {
            lo,
            lo_exact,
            lo_strict: true,
            hi,
            hi_exact: exact::rational(hi),
        }
    }

    pub fn bounding_box(&self, d: usize, c: f64) -> AxisBox {
        let lo = self.lo.max(0.0);
        let rho = (c / lo).powf(1.0 / d as f64) * (1.0 + GRAZE);
        let mut lower = vec![-rho; d + 1];
        let mut upper = vec![rho; d + 1];
        lower[d] = lo * (1.0 - GRAZE);
        upper[d] = self.hi * (1.0 + GRAZE);
        AxisBox::new(lower, upper)
    }
}

/// Membership predicate of a region, evaluated in floating point with an
/// exact re-check close to any boundary.
pub(crate) struct Predicate<'a> {
    window: Window,
    d: usize,
    c: f64,
    c_exact: BigRational,
    norm: Norm,
    dirs: Option<&'a DirectionSet>,
    /// Use `<` instead of `<=` against `c`.
    strict: bool,
}

/// Outcome of the membership test, with the direction test kept apart from
/// the scalar constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Verdict {
    Out,
    /// Passes the scalar constraints. `in_a` is `None` when no direction set
    /// is given or `v_1 = 0`.
    In { zero: bool, in_a: Option<bool> },
}

impl Verdict {
    pub fn membership(self, has_dirs: bool) -> Membership {
        match self {
            Verdict::Out => Membership::Out,
            Verdict::In { zero: true, .. } if has_dirs => Membership::Degenerate,
            Verdict::In { in_a: Some(false), .. } => Membership::Out,
            Verdict::In { .. } => Membership::In,
        }
    }
}

fn near(a: f64, b: f64, err: f64) -> bool {
    (a - b).abs() <= err + GRAZE * a.abs().max(b.abs()).max(1.0)
}

impl<'a> Predicate<'a> {
    pub fn new(window: Window, d: usize, c: f64, norm: Norm, dirs: Option<&'a DirectionSet>) -> Self {
        Predicate {
            window,
            d,
            c,
            c_exact: exact::rational(c),
            norm,
            dirs,
            strict: false,
        }
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c_exact(&self) -> &BigRational {
        &self.c_exact
    }

    pub fn directions(&self) -> Option<&'a DirectionSet> {
        self.dirs
    }

    /// Floating-point decision for a computed point `v` whose coordinates
    /// are within `err` of the true ones, or `None` when the margin is too
    /// small to trust.
    pub fn classify_f64(&self, v: &[f64], err: &[f64]) -> Option<Verdict> {
        let d = self.d;
        let (v2, e2) = (v[d], err[d]);
        let w = &self.window;
        if near(v2, w.lo, e2) || near(v2, w.hi, e2) {
            return None;
        }
        if v2 < w.lo || v2 > w.hi {
            return Some(Verdict::Out);
        }
        let v1 = &v[..d];
        let n = self.norm.of(v1);
        let en = self.norm.of(&err[..d]);
        if n <= en {
            return None;
        }
        let f = n.powi(d as i32) * v2.abs();
        let rel = 2.0 * (d as f64 * en / n + e2 / v2.abs()) + GRAZE;
        if (f - self.c).abs() <= rel * f.max(self.c) {
            return None;
        }
        if f > self.c {
            return Some(Verdict::Out);
        }
        let Some(a) = self.dirs else {
            return Some(Verdict::In { zero: false, in_a: None });
        };
        if near_exact_boundary(a, v1, n, &err[..d]) {
            return None;
        }
        Some(Verdict::In {
            zero: false,
            in_a: a.contains_direction_of(v1),
        })
    }

    pub fn classify_exact(&self, v: &[BigRational]) -> Verdict {
        let d = self.d;
        let v2 = &v[d];
        if !self.window_contains(v2) {
            return Verdict::Out;
        }
        let v1 = &v[..d];
        if !norm_constraint_exact(v1, v2, d, &self.c_exact, self.norm, self.strict) {
            return Verdict::Out;
        }
        if v1.iter().all(|x| x.is_zero()) {
            return Verdict::In { zero: true, in_a: None };
        }
        Verdict::In {
            zero: false,
            in_a: self.dirs.map(|a| contains_exact(a, v1)),
        }
    }

    pub fn window_contains(&self, v2: &BigRational) -> bool {
        let w = &self.window;
        let above_lo = if w.lo_strict {
            v2 > &w.lo_exact
        } else {
            v2 >= &w.lo_exact
        };
        above_lo && v2 <= &w.hi_exact
    }

    pub fn classify<F>(&self, v: &[f64], err: &[f64], exact_point: F) -> Verdict
    where
        F: FnOnce() -> Vec<BigRational>,
    {
        match self.classify_f64(v, err) {
            Some(m) => m,
            None => self.classify_exact(&exact_point()),
        }
    }
}

/// `‖v_1‖^d |v_2| <= c`, exactly.
fn norm_constraint_exact(
    v1: &[BigRational],
    v2: &BigRational,
    d: usize,
    c: &BigRational,
    norm: Norm,
    strict: bool,
) -> bool {
    let h = v2.abs();
    let (lhs, rhs) = match norm {
        Norm::Sup => (exact::pow(&exact::sup_abs(v1), d) * h, c.clone()),
        Norm::Euclidean => {
            let s = exact::sum_squares(v1);
            if d % 2 == 0 {
                (exact::pow(&s, d / 2) * h, c.clone())
            } else {
                (exact::pow(&s, d) * &h * &h, c * c)
            }
        }
    };
    if strict {
        lhs < rhs
    } else {
        lhs <= rhs
    }
}

fn near_exact_boundary(a: &DirectionSet, v1: &[f64], n: f64, err: &[f64]) -> bool {
    match a {
        DirectionSet::Hemisphere { axis } => {
            let dot: f64 = axis.iter().zip(v1).map(|(x, y)| x * y).sum();
            let slack: f64 = axis.iter().zip(err).map(|(x, e)| x.abs() * e).sum();
            dot.abs() <= 2.0 * slack + 1e-12 * n
        }
        DirectionSet::SignSet { .. } => v1[0].abs() <= 2.0 * err[0],
        DirectionSet::Complement { of } => near_exact_boundary(of, v1, n, err),
        DirectionSet::DisjointUnion { parts, .. } => {
            parts.iter().any(|p| near_exact_boundary(p, v1, n, err))
        }
        DirectionSet::Cap { .. } => false,
    }
}

/// Direction membership of a nonzero exact `v_1`. Sign sets and hemispheres
/// are decided exactly; caps fall back to floating point.
fn contains_exact(a: &DirectionSet, v1: &[BigRational]) -> bool {
    match a {
        DirectionSet::SignSet { signs } => {
            let s = if v1[0].is_positive() { 1 } else { -1 };
            signs.contains(&s)
        }
        DirectionSet::Hemisphere { axis } => exact::dot(axis, v1).is_positive(),
        DirectionSet::Cap { .. } => {
            use num_traits::ToPrimitive;
            let f: Vec<f64> = v1.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
            a.contains_direction_of(&f).unwrap_or(false)
        }
        DirectionSet::Complement { of } => !contains_exact(of, v1),
        DirectionSet::DisjointUnion { parts, .. } => parts.iter().any(|p| contains_exact(p, v1)),
    }
}

/// Evaluates the membership predicate of `spec` at `v`, treating the
/// coordinates of `v` as exact.
pub fn region_contains(spec: &RegionSpec, v: &[f64]) -> Membership {
    assert_eq!(v.len(), spec.d + 1, "vector dimension must be d + 1");
    let zero = vec![0.0; v.len()];
    spec.predicate()
        .classify(v, &zero, || v.iter().map(|x| exact::rational(*x)).collect())
        .membership(spec.directions.is_some())
}

/// Membership in the unbounded thinning region `R = {‖v_1‖^d |v_2| <= c}`.
pub fn thinning_cone_contains(v: &[f64], d: usize, c: f64, norm: Norm) -> bool {
    let v1: Vec<BigRational> = v[..d].iter().map(|x| exact::rational(*x)).collect();
    norm_constraint_exact(&v1, &exact::rational(v[d]), d, &exact::rational(c), norm, false)
}

/// Lebesgue volume of the region. `R_{eps,T}` has the same volume for every
/// `T` because `g_t` maps it onto `R_{eps,1}`.
pub fn region_volume(spec: &RegionSpec) -> Result<f64, LatticeError> {
    spec.validate()?;
    let log_ratio = match spec.kind {
        RegionKind::P => spec.t.max(1.0).ln(),
        RegionKind::R => {
            if spec.eps == 0.0 {
                return Err(LatticeError::UnboundedRegion);
            }
            -spec.eps.ln()
        }
    };
    let measure = spec.directions.as_ref().map_or(1.0, |a| a.measure());
    Ok(measure * ball_volume(spec.d, 1.0, spec.norm) * spec.c * log_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_examples() {
        let p = RegionSpec::p(1, 1.0, 50.0);
        assert_eq!(region_contains(&p, &[0.01, 40.0]), Membership::In);
        assert_eq!(region_contains(&p, &[0.1, 40.0]), Membership::Out);
        let r = RegionSpec::r(1, 1.0, 0.5, 10.0).with_directions(DirectionSet::sign_set(&[-1]).unwrap());
        assert_eq!(region_contains(&r, &[0.0, 7.0]), Membership::Degenerate);
        assert_eq!(region_contains(&r, &[-0.1, 7.0]), Membership::In);
        assert_eq!(region_contains(&r, &[0.1, 7.0]), Membership::Out);
    }

    #[test]
    fn boundaries_follow_inequalities_literally() {
        let p = RegionSpec::p(1, 1.0, 10.0);
        // v_2 = 1 is excluded, v_2 = T included, ‖v_1‖ v_2 = c included.
        assert_eq!(region_contains(&p, &[0.0, 1.0]), Membership::Out);
        assert_eq!(region_contains(&p, &[0.0, 10.0]), Membership::In);
        assert_eq!(region_contains(&p, &[0.5, 2.0]), Membership::In);
        assert_eq!(region_contains(&p, &[0.5, 2.0000000000000004]), Membership::Out);
        let r = RegionSpec::r(1, 1.0, 0.5, 10.0);
        assert_eq!(region_contains(&r, &[0.0, 5.0]), Membership::In);
        assert_eq!(region_contains(&r, &[0.0, 4.999999999999999]), Membership::Out);
    }

    #[test]
    fn euclidean_odd_dimension_exact() {
        // d = 3: ‖v_1‖^3 v_2 = 1 exactly at v_1 = (1,0,0), v_2 = 1.
        let r = RegionSpec::r(3, 1.0, 0.5, 1.0).with_norm(Norm::Euclidean);
        assert_eq!(region_contains(&r, &[1.0, 0.0, 0.0, 1.0]), Membership::In);
        assert_eq!(region_contains(&r, &[0.6, 0.8, 0.0, 1.0]), Membership::Out);
    }

    #[test]
    fn volumes() {
        let p = RegionSpec::p(1, 1.0, 2.0).with_norm(Norm::Euclidean);
        assert!((region_volume(&p).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
        let r = RegionSpec::r(1, 1.0, (-1f64).exp(), 123.0)
            .with_norm(Norm::Euclidean)
            .with_directions(DirectionSet::sign_set(&[-1]).unwrap());
        assert!((region_volume(&r).unwrap() - 1.0).abs() < 1e-15);
        let unbounded = RegionSpec::r(1, 1.0, 0.0, 5.0);
        assert_eq!(region_volume(&unbounded), Err(LatticeError::UnboundedRegion));
    }

    #[test]
    fn volume_ratio_is_direction_measure() {
        let a = DirectionSet::cap(&[0.0, 0.0, 1.0], 0.8).unwrap();
        let full = RegionSpec::p(3, 1.0, 2.0).with_norm(Norm::Euclidean);
        let part = full.clone().with_directions(a.clone());
        let ratio = region_volume(&part).unwrap() / region_volume(&full).unwrap();
        assert!((ratio - a.measure()).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(RegionSpec::r(1, 1.0, 1.0, 5.0).validate().is_err());
        assert!(RegionSpec::p(2, -1.0, 5.0).validate().is_err());
        let wrong_dim = RegionSpec::p(2, 1.0, 5.0).with_directions(DirectionSet::sign_set(&[1]).unwrap());
        assert!(matches!(
            wrong_dim.validate(),
            Err(LatticeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cone_is_symmetric_under_negation() {
        for v in [[0.3, 2.0], [-0.49, 2.0], [0.51, -2.0], [0.0, -100.0]] {
            let neg = [-v[0], -v[1]];
            assert_eq!(
                thinning_cone_contains(&v, 1, 1.0, Norm::Sup),
                thinning_cone_contains(&neg, 1, 1.0, Norm::Sup)
            );
        }
    }
}
