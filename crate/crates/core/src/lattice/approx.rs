use super::count::{scan_horospherical, CountOptions};
use super::exact;
use super::region::{Predicate, Window};
use super::{CountResult, LatticeError};
use crate::contfrac::CFNumber;
use crate::sphere::{DirectionSet, Norm};

/// The number being approximated: a float vector `x ∈ R^d`, or a real number
/// given by its continued fraction (`d = 1`, decided exactly).
#[derive(Clone, Debug)]
pub enum ApproxTarget {
    Float(Vec<f64>),
    Cf(CFNumber),
}

impl ApproxTarget {
    pub fn dim(&self) -> usize {
        match self {
            ApproxTarget::Float(x) => x.len(),
            ApproxTarget::Cf(_) => 1,
        }
    }
}

/// `N(x, T)` and `N(x, T, A)`: pairs `(p, q)` with `0 < q <= T` and
/// `‖qx - p‖ < C q^{-1/d}`, every `p` in that ball counted.
pub fn count_approximates(
    target: &ApproxTarget,
    t: f64,
    norm: Norm,
    c: f64,
    a: Option<&DirectionSet>,
) -> Result<CountResult, LatticeError> {
    count_approximates_with(target, t, norm, c, a, CountOptions::default())
}

pub fn count_approximates_with(
    target: &ApproxTarget,
    t: f64,
    norm: Norm,
    c: f64,
    a: Option<&DirectionSet>,
    opts: CountOptions,
) -> Result<CountResult, LatticeError> {
    let d = target.dim();
    if d == 0 {
        return Err(LatticeError::InvalidRegion("x must have at least one coordinate".into()));
    }
    if !(t >= 1.0 && t.is_finite()) {
        return Err(LatticeError::InvalidRegion(format!("T = {t} must be at least 1")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(LatticeError::InvalidRegion(format!("C = {c} must be positive")));
    }
    if let Some(a) = a {
        a.validate()
            .map_err(|e| LatticeError::InvalidRegion(e.to_string()))?;
        if a.dim() != d {
            return Err(LatticeError::DimensionMismatch {
                expected: d,
                got: a.dim(),
            });
        }
    }
    let pred = Predicate::new(Window::open_closed(0.0, exact::int(0), t), d, c, norm, a).strict();
    let (result, zero_q) = match target {
        ApproxTarget::Float(x) => scan_horospherical(x, None, &pred, opts),
        ApproxTarget::Cf(cf) => scan_horospherical(&[], Some(cf), &pred, opts),
    };
    match zero_q {
        Some(q) if a.is_some() => Err(LatticeError::DegenerateRational { q }),
        _ => Ok(result),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{count_region, Lattice, RegionSpec};

    #[test]
    fn convergents_of_constant_four_are_counted() {
        let cf = CFNumber::constant(4);
        let opts = CountOptions {
            witnesses: true,
            ..Default::default()
        };
        let r = count_approximates_with(&ApproxTarget::Cf(cf.clone()), 72.0, Norm::Sup, 1.0, None, opts).unwrap();
        let found: Vec<(i64, u64)> = r
            .witnesses
            .unwrap()
            .iter()
            .map(|w| (-w.coords[0], w.q.unwrap()))
            .collect();
        for n in 1..=3 {
            let c = cf.convergent(n);
            let pair = (i64::try_from(c.p).unwrap(), u64::try_from(c.q).unwrap());
            assert!(found.contains(&pair), "missing convergent {pair:?}");
        }
    }

    #[test]
    fn golden_q1() {
        let r = count_approximates(&ApproxTarget::Cf(CFNumber::golden()), 1.0, Norm::Sup, 1.0, None).unwrap();
        // |x - 0| and |x - 1| are both below 1.
        assert_eq!(r.total, 2);
    }

    #[test]
    fn full_sign_set_counts_everything() {
        let both = DirectionSet::sign_set(&[-1, 1]).unwrap();
        let r = count_approximates(
            &ApproxTarget::Cf(CFNumber::biased()),
            20000.0,
            Norm::Sup,
            1.0,
            Some(&both),
        )
        .unwrap();
        assert_eq!(r.in_a, Some(r.total));
        assert_eq!(r.degenerate, 0);
    }

    #[test]
    fn rational_target_with_directions_is_rejected() {
        let a = DirectionSet::sign_set(&[1]).unwrap();
        let err = count_approximates(&ApproxTarget::Float(vec![0.5]), 10.0, Norm::Sup, 1.0, Some(&a));
        assert_eq!(err, Err(LatticeError::DegenerateRational { q: 2 }));
        let ok = count_approximates(&ApproxTarget::Float(vec![0.5]), 10.0, Norm::Sup, 1.0, None).unwrap();
        assert_eq!(ok.degenerate, 5);
    }

    #[test]
    fn lattice_count_differs_by_q1_solutions() {
        let cf = CFNumber::biased();
        let t = 5000.0;
        let approx = count_approximates(&ApproxTarget::Cf(cf.clone()), t, Norm::Sup, 1.0, None).unwrap();
        let q1 = count_approximates(&ApproxTarget::Cf(cf.clone()), 1.0, Norm::Sup, 1.0, None).unwrap();
        let lattice = count_region(&Lattice::from_cf(&cf), &RegionSpec::p(1, 1.0, t)).unwrap();
        assert_eq!(approx.total, lattice.total + q1.total);
    }
}
