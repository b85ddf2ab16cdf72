//! Convergents, exact signs of `q·x`, and the error ratios of the biased number.

use num_bigint::BigInt;
use spiraling::contfrac::{cf_product, CFNumber};

fn main() {
    let x = CFNumber::biased();
    println!("x = [0; {}, ...] ≈ {:.15}", x.prefix_strings(6).join(", "), x.to_f64());

    for c in x.convergents(8) {
        let sign = x.convergent_error_sign(c.n).unwrap();
        println!("n = {:>2}  p/q = {}/{}  sign(q x - p) = {sign:?}", c.n, c.p, c.q);
    }

    for n in 1..=6 {
        let (lo, hi) = x.error_ratio_bounds(n).unwrap().to_f64_bounds();
        println!("|q_{}·x| / |q_{n}·x| in [{lo:.6e}, {hi:.6e}]", n - 1);
    }

    let r = x.rotation_value(&BigInt::from(1000)).unwrap();
    let (lo, hi) = r.enclosure.to_f64_bounds();
    println!("1000·x = {} + ({lo:.3e} .. {hi:.3e}), sign {}", r.p, r.sign);

    // Interleaving [0;4,4,...] with the self-power sequence gives the same number.
    let y = cf_product(&CFNumber::constant(4), &CFNumber::even_self_power());
    println!("product matches biased number: {}", y.prefix(10) == x.prefix(10));
}
