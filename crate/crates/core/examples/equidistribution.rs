//! Directions of approximates of random `x` and the dyadic shell sums.

use spiraling::experiments::{birkhoff_experiment, thm1_experiment, BirkhoffParams, Thm1Params};
use spiraling::{DirectionSet, Norm};

fn main() {
    for (d, t) in [(1, 1e5), (2, 1e4), (3, 2e3)] {
        let mut axis = vec![0.0; d];
        axis[0] = 1.0;
        let a = if d == 1 {
            DirectionSet::sign_set(&[-1]).unwrap()
        } else {
            DirectionSet::hemisphere(&axis).unwrap()
        };
        let r = thm1_experiment(&Thm1Params {
            d,
            num_points: 50,
            t,
            a,
            norm: Norm::Sup,
            c: 1.0,
            seed: 7,
        })
        .unwrap();
        println!(
            "d = {d}, T = {t:e}: mean ratio {:.4} ± {:.4} (sd over x)",
            r.summary_f64("mean_ratio").unwrap(),
            r.summary_f64("std_ratio").unwrap()
        );
    }

    let r = birkhoff_experiment(&BirkhoffParams {
        d: 1,
        num_lattices: 5,
        n_max: 20,
        c: 1.0,
        a: Some(DirectionSet::sign_set(&[1]).unwrap()),
        norm: Norm::Sup,
        seed: 7,
    })
    .unwrap();
    println!("vol(P_2) = {:.4}", r.summary_f64("vol_P2").unwrap());
    for f in r.summary["final"].as_array().unwrap() {
        println!(
            "x = {:.6}: N(2^20)/20 = {:.3}, ratio {:.3}",
            f["x"][0].as_f64().unwrap(),
            f["count_per_N"].as_f64().unwrap(),
            f["ratio"].as_f64().unwrap()
        );
    }
}
