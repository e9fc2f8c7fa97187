//! Replicated guarantee checks on the 3x3 diagonal instance.
//!
//! `cargo run --release --example experiment -- [reps]`

use lnat::harness::{run_experiment, ExperimentConfig};

fn config(solver: &str, guarantee: &str, extra: &str, reps: u64) -> String {
    format!(
        r#"{{
            "instance": {{"kind": "diagonal_trap", "d": 2, "n": 3}},
            "noise": {{"kind": "gaussian", "sigma": 0.5}},
            "algorithm": {{"solver": "{solver}" {extra}}},
            "guarantee": {guarantee},
            "replications": {reps},
            "seed": 2024
        }}"#
    )
}

fn main() -> lnat::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let pgs = r#"{"mode": "pgs", "epsilon": 1.0, "delta": 0.2}"#;
    let pcs = r#"{"mode": "pcs_iz", "c": 2.0, "delta": 0.2}"#;
    let neighbor = r#", "neighbor": {"bias_ratio": 0.25, "sigma_tilde": 0.5}"#;
    let runs = [
        ("ssgd_pgs", config("ssgd_pgs", pgs, "", reps)),
        ("ssgd_pcs_iz", config("ssgd_pcs_iz", pcs, "", reps)),
        ("steepest_pgs", config("steepest_pgs", pgs, neighbor, reps)),
        ("steepest_pcs_iz", config("steepest_pcs_iz", pcs, neighbor, reps)),
    ];
    for (name, text) in runs {
        let s = run_experiment(&ExperimentConfig::from_json(&text)?)?;
        println!(
            "{name:>16}: good {:.3} (threshold {:.3}, {}) mean cost {:.0}",
            s.good_frequency,
            s.threshold,
            if s.pass { "pass" } else { "FAIL" },
            s.mean_cost
        );
    }
    Ok(())
}
