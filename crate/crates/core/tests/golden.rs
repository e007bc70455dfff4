//! Bit-exact regression for one small two-part run.
//!
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p twopart-cs --test golden`
//! after an intentional numerical change.

use std::path::PathBuf;

use serde_json::{json, Value};
use twopart_cs::bench::calibrate::m1_for;
use twopart_cs::pipeline::{run_two_part, TwoPartConfig, TwoPartSeeds};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_two_part.json")
}

fn instance() -> TwoPartConfig {
    let seeds = TwoPartSeeds {
        signal: 11,
        matrix1: 12,
        matrix2: 13,
        noise1: 14,
        noise2: 15,
    };
    TwoPartConfig::noisy(500, 5, m1_for(3.0, 500, 5), 400, 0.2, 10f64.powf(-2.5), 50, seeds)
}

#[test]
fn two_part_matches_golden_vector() {
    let (xhat, report) = run_two_part(&instance()).unwrap();
    let bits: Vec<String> = xhat.iter().map(|v| format!("{:016x}", v.to_bits())).collect();
    let current = json!({
        "n": 500,
        "k": 5,
        "residual_problem_size": report.residual_problem_size,
        "part1_zero_identified": report.part1_zero_identified,
        "part1_false_zeros": report.part1_false_zeros,
        "xhat_bits": bits,
    });
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden_path(), serde_json::to_string_pretty(&current).unwrap() + "\n").unwrap();
        return;
    }
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(golden_path()).unwrap()).unwrap();
    assert_eq!(current, stored);
}
