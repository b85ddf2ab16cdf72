//! Siegel transforms, Haar-random rotations and paired spherical averages.

use spiraling::lattice::{AxisBox, DEFAULT_CANDIDATE_BUDGET};
use spiraling::siegel::{siegel_transform, spherical_average, thm3_ratio, TestFunction};
use spiraling::{DirectionSet, Lattice, Norm, RegionSpec};

fn main() {
    let z3 = Lattice::integer(3);
    let cube = TestFunction::box_indicator(&AxisBox::cube(3, 2.0));
    println!("Σ 1_[-2,2]^3 over Z^3 \\ 0 = {}", siegel_transform(&cube, &z3, false).unwrap());
    println!("primitive only = {}", siegel_transform(&cube, &z3, true).unwrap());

    let ball = TestFunction::radial(3, 0.0, 2.0);
    for t in [0.0, 1.0, 2.0] {
        let est = spherical_average(&ball, &z3, t, 400, 11, DEFAULT_CANDIDATE_BUDGET).unwrap();
        println!(
            "t = {t}: mean {:.3} ± {:.3}, integral {:.3}",
            est.mean,
            est.stderr,
            est.integral_reference.unwrap()
        );
    }

    let region = RegionSpec::r(2, 1.0, 0.1, 1.0)
        .with_norm(Norm::Euclidean)
        .with_directions(DirectionSet::hemisphere(&[1.0, 0.0]).unwrap());
    for t in [2.0, 4.0, 6.0] {
        let est = thm3_ratio(&z3, &region, t, 500, 3, DEFAULT_CANDIDATE_BUDGET).unwrap();
        println!("t = {t}: ratio {:.4} ± {:.4} (measure 0.5)", est.ratio, est.stderr);
    }
}
