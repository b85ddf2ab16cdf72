//! Exact census of the lattice points of `R` along the biased number, and the
//! resulting direction bias.

use spiraling::experiments::biased::biased_ratio_with;
use spiraling::experiments::census::{biased_census, level_end_threshold};
use spiraling::experiments::Threshold;
use spiraling::DirectionSet;

fn main() {
    let census = biased_census(9).unwrap();
    println!("{} points of R with q <= {}", census.rows.len(), census.q_end);
    for lvl in &census.levels {
        println!(
            "n = {}  classes {:?}  in R {:?}  L_n = {}{}",
            lvl.n,
            lvl.classes.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            lvl.in_r_by_class,
            lvl.l_n,
            lvl.l_bound.map(|b| format!(" (bound {b})")).unwrap_or_default()
        );
    }

    let thresholds: Vec<Threshold> = [3, 5, 7, 9].map(Threshold::LevelEnd).to_vec();
    let neg = DirectionSet::sign_set(&[-1]).unwrap();
    for eps in [0.0, 0.01, 0.1] {
        let r = biased_ratio_with(&census, &thresholds, &neg, eps).unwrap();
        let ratios: Vec<String> = r.records.iter().map(|v| format!("{:.5}", v["ratio"].as_f64().unwrap())).collect();
        println!("eps = {eps}: ratio(A = {{-1}}) = {}", ratios.join(", "));
    }
    println!("T for level 9 = {}", level_end_threshold(9));

    let mut out = std::io::stdout().lock();
    if std::env::args().any(|a| a == "--csv") {
        census.write_csv(&mut out).unwrap();
    }
}
