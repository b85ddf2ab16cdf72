//! Drives an experiment from a JSON configuration, as the binary does.

use spiraling::config::RunConfig;
use spiraling::runner::run;

fn main() {
    let cfg = RunConfig::from_json(
        r#"{
            "experiment": "biased-ratio",
            "eps": 0.0,
            "thresholds": [{"kind": "convergent", "n": 6}, {"kind": "level-end", "n": 7}]
        }"#,
    )
    .unwrap();
    println!("{}", cfg.to_json());
    let out = run(&cfg).unwrap();
    println!("{}", out.report.canonical_json());
}
