//! Deterministic simulation from a response-type law and the command-line
//! reports built on it.
//!
//! Run: cargo run --example simulate

use regime_bounds::cli::{rt_truth, value_report};
use regime_bounds::estimation::{EstimationConfig, PolicySpec};
use regime_bounds::oracle::{sample, ResponseTypeLaw};

fn main() -> regime_bounds::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/two_strata.json");
    let rt = ResponseTypeLaw::from_json_str(&std::fs::read_to_string(path)?)?;
    let a = sample(&rt, 1_000, 42)?;
    let b = sample(&rt, 1_000, 42)?;
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    println!("first rows:\n{}", a.to_csv_string().lines().take(4).collect::<Vec<_>>().join("\n"));
    let truth = rt_truth(&rt)?;
    println!("true ATE {:.4}, E(Y) {:.4}", truth["truth"]["ate"], truth["truth"]["ey"]);
    let data = sample(&rt, 10_000, 42)?;
    let report = value_report(&data, &PolicySpec::Observed, &EstimationConfig { seed: 1, ..Default::default() })?;
    print!("{}", report.csv);
    Ok(())
}
