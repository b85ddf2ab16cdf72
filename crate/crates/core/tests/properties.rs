use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive};
use proptest::prelude::*;

use spiraling::config::{ExperimentId, RunConfig};
use spiraling::experiments::census::{brute_force_in_r, census, CensusMode};
use spiraling::lattice::{count_approximates, count_region, region_contains, shell_count, ApproxTarget, Membership};
use spiraling::siegel::{haar_rotation, orthogonality_residual, sample_rng, thm3_ratio};
use spiraling::sphere::{cap_measure, DirectionSet};
use spiraling::{CFNumber, Lattice, Norm, RegionSpec};

fn periodic(elements: &[u32]) -> CFNumber {
    CFNumber::periodic(elements.iter().map(|a| BigUint::from(*a)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convergents_satisfy_determinant_and_alternate(period in prop::collection::vec(1u32..50, 1..5)) {
        let x = periodic(&period);
        for n in 0..15i64 {
            let c = x.convergent(n);
            let prev = x.convergent(n - 1);
            let det = &c.q * &prev.p - &c.p * &prev.q;
            prop_assert_eq!(det, if n % 2 == 0 { BigInt::one() } else { -BigInt::one() });
            let expect = if n % 2 == 0 { Ordering::Greater } else { Ordering::Less };
            prop_assert_eq!(x.convergent_error_sign(n).unwrap(), expect);
        }
    }

    #[test]
    fn rotation_value_matches_float(period in prop::collection::vec(1u32..9, 1..4), q in 1u64..100_000) {
        let x = periodic(&period);
        let r = x.rotation_value(&BigInt::from(q)).unwrap();
        let qx = q as f64 * x.to_f64();
        let frac = qx - qx.round();
        prop_assert!(r.enclosure.lo().to_f64().unwrap() <= frac + 1e-9);
        prop_assert!(r.enclosure.hi().to_f64().unwrap() >= frac - 1e-9);
        if frac.abs() > 1e-9 {
            prop_assert_eq!(r.sign as f64, frac.signum());
        }
        prop_assert!(r.enclosure.abs().hi() < &num_rational::BigRational::new(1.into(), 2.into()));
        prop_assert!(!r.p.is_negative());
    }

    #[test]
    fn census_equals_brute_force(period in prop::collection::vec(1u32..12, 1..4), n_max in 2u32..7) {
        let x = periodic(&period);
        let c = census(&x, n_max, CensusMode::Interval).unwrap();
        let end = c.q_end.to_u64().unwrap();
        prop_assume!(end < 200_000);
        let brute = brute_force_in_r(&x, end + 1).unwrap();
        let got: Vec<(u64, i64)> = c.rows.iter().map(|r| (r.q.to_u64().unwrap(), r.p.to_i64().unwrap())).collect();
        prop_assert_eq!(got, brute);
        let exhaustive = census(&x, n_max, CensusMode::Exhaustive).unwrap();
        prop_assert_eq!(exhaustive.rows, c.rows);
    }

    #[test]
    fn complementary_sign_sets_partition_approximates(x in 0.0f64..1.0, t in 10.0f64..3000.0) {
        let neg = DirectionSet::sign_set(&[-1]).unwrap();
        let target = ApproxTarget::Float(vec![x]);
        match (
            count_approximates(&target, t, Norm::Sup, 1.0, Some(&neg)),
            count_approximates(&target, t, Norm::Sup, 1.0, Some(&DirectionSet::complement(neg.clone()))),
        ) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.total, b.total);
                prop_assert_eq!(a.in_a.unwrap() + b.in_a.unwrap(), a.total);
            }
            (a, b) => prop_assert!(a.is_err() && b.is_err()),
        }
    }

    #[test]
    fn dyadic_shells_partition_the_region(x in 0.0f64..1.0, y in 0.0f64..1.0, n in 2u32..9) {
        let l = Lattice::from_x(&[x, y]);
        let sum: u64 = (1..=n).map(|i| shell_count(&l, i, 1.0, Norm::Sup, None).unwrap().total).sum();
        let whole = count_region(&l, &RegionSpec::p(2, 1.0, 2f64.powi(n as i32))).unwrap();
        prop_assert_eq!(sum, whole.total);
    }

    #[test]
    fn counts_grow_with_t(x in 0.0f64..1.0, t in 2.0f64..500.0, extra in 0.0f64..500.0) {
        let l = Lattice::from_x(&[x]);
        let a = count_region(&l, &RegionSpec::p(1, 1.0, t)).unwrap().total;
        let b = count_region(&l, &RegionSpec::p(1, 1.0, t + extra)).unwrap().total;
        prop_assert!(a <= b);
    }

    #[test]
    fn region_membership_is_flow_invariant(v1 in -2.0f64..2.0, v2 in 1.5f64..50.0, k in 0i32..4) {
        // g_s with e^s = 2 maps R_{eps,T} onto R_{eps,T/2} for d = 1 (exact scaling).
        let s = 2f64.powi(k);
        let spec = RegionSpec::r(1, 1.0, 0.25, 64.0);
        let moved = RegionSpec::r(1, 1.0, 0.25, 64.0 / s);
        let a = region_contains(&spec, &[v1, v2]);
        let b = region_contains(&moved, &[v1 * s, v2 / s]);
        prop_assert_eq!(a == Membership::Out, b == Membership::Out);
    }

    #[test]
    fn cap_measure_is_monotone_and_complementary(d in 2usize..6, a in 0.01f64..3.1, b in 0.01f64..3.1) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(cap_measure(d, lo) <= cap_measure(d, hi) + 1e-12);
        let m = cap_measure(d, a);
        prop_assert!((0.0..=1.0).contains(&m));
        prop_assert!((m + cap_measure(d, std::f64::consts::PI - a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn haar_samples_are_rotations(n in 2usize..6, seed in any::<u64>(), i in any::<u64>()) {
        let k = haar_rotation(n, &mut sample_rng(seed, i));
        prop_assert!(orthogonality_residual(&k) < 1e-12);
        prop_assert!((k.determinant() - 1.0).abs() < 1e-10);
        let again = haar_rotation(n, &mut sample_rng(seed, i));
        prop_assert_eq!(k, again);
    }

    #[test]
    fn config_round_trips(d in 1usize..4, seed in any::<u64>(), eps in 0.001f64..0.9, m in 2usize..5000, exp in 0usize..6) {
        let cfg = RunConfig {
            experiment: ExperimentId::ALL[exp],
            d,
            seed,
            eps,
            m,
            t_grid: vec![eps * 10.0, 6.0],
            a: Some("complement:sign:-1".into()),
            ..RunConfig::default()
        };
        prop_assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn paired_spherical_ratios_sum_to_one(seed in any::<u64>(), t in 0.0f64..2.0, angle in 0.3f64..1.2) {
        let cap = DirectionSet::cap(&[1.0, 0.0], angle).unwrap();
        let spec = RegionSpec::r(2, 1.0, 0.2, 1.0).with_norm(Norm::Euclidean);
        let a = thm3_ratio(&Lattice::integer(3), &spec.clone().with_directions(cap.clone()), t, 20, seed, 1 << 24).unwrap();
        let b = thm3_ratio(&Lattice::integer(3), &spec.with_directions(DirectionSet::complement(cap)), t, 20, seed, 1 << 24).unwrap();
        prop_assert_eq!(a.sum_total, b.sum_total);
        if a.degenerate == 0 {
            prop_assert_eq!(a.sum_in_a + b.sum_in_a, a.sum_total);
        }
    }

    #[test]
    fn unimodular_images_count_like_the_original(a in -3i32..4, b in -3i32..4) {
        // An integer unimodular change of basis leaves Z^2 unchanged.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, a as f64, 0.0, 1.0])
            * DMatrix::from_row_slice(2, 2, &[1.0, 0.0, b as f64, 1.0]);
        let l = Lattice::integer(2).transformed(&m).unwrap();
        let spec = RegionSpec::p(1, 1.0, 40.0);
        prop_assert_eq!(count_region(&l, &spec).unwrap().total, count_region(&Lattice::integer(2), &spec).unwrap().total);
    }
}
