//! Approximates of `(α, α)` all point along the diagonal.

use spiraling::contfrac::CfSpec;
use spiraling::experiments::{nonminimal_experiment, NonminimalParams};
use spiraling::Norm;

fn main() {
    let r = nonminimal_experiment(&NonminimalParams {
        d: 2,
        x_base: CfSpec::Golden,
        t: 1e4,
        q_min: 100,
        c: 1.0,
        norm: Norm::Euclidean,
    })
    .unwrap();
    println!("{}", serde_json::to_string_pretty(&r.summary).unwrap());
    for rec in r.records.iter().take(8) {
        println!("q = {}  direction {}", rec["q"], rec["direction"]);
    }
}
