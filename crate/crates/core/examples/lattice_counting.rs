//! Lattice points in thinning regions and Diophantine approximates.

use spiraling::lattice::{count_approximates, count_region, g_flow, region_volume, ApproxTarget};
use spiraling::{CFNumber, DirectionSet, Lattice, Norm, RegionSpec};

fn main() {
    let neg = DirectionSet::sign_set(&[-1]).unwrap();

    // Approximates of the golden ratio and of a random-looking number.
    for (name, target) in [
        ("golden", ApproxTarget::Cf(CFNumber::golden())),
        ("sqrt(2) - 1", ApproxTarget::Float(vec![2f64.sqrt() - 1.0])),
    ] {
        let r = count_approximates(&target, 1e5, Norm::Sup, 1.0, Some(&neg)).unwrap();
        println!("{name}: N(T=1e5) = {}, in A = {:?}, ratio {:.3}", r.total, r.in_a, r.ratio().unwrap());
    }

    // The same count phrased as lattice points of Λ_x in P_T.
    let x = [std::f64::consts::FRAC_1_PI, std::f64::consts::FRAC_1_SQRT_2];
    let lattice = Lattice::from_x(&x);
    let spec = RegionSpec::p(2, 1.0, 1e4).with_directions(DirectionSet::hemisphere(&[1.0, 0.0]).unwrap());
    let r = count_region(&lattice, &spec).unwrap();
    println!("Λ_x ∩ P_(1e4), d = 2: {} points, {:?} in the hemisphere", r.total, r.in_a);

    // R_{eps,1} after flowing: the count approaches vol(R) for typical lattices.
    let region = RegionSpec::r(2, 1.0, 0.1, 1.0).with_norm(Norm::Euclidean);
    let moved = lattice.transformed(&g_flow(5.0, 2)).unwrap();
    println!(
        "#(g_5 Λ_x ∩ R_0.1) = {}, vol(R_0.1) = {:.3}",
        count_region(&moved, &region).unwrap().total,
        region_volume(&region).unwrap()
    );
}
