//! Confidence intervals for partially identified parameters: cross-fitted
//! candidate-term estimates, then Imbens-Manski intervals with the max/min
//! selection of the active term.
//!
//! Run: cargo run --release --example confidence_intervals

use regime_bounds::cli::ci_report;
use regime_bounds::estimation::EstimationConfig;
use regime_bounds::inference_ci::{critical_value, im_jd_ci, ThetaEstimates};
use regime_bounds::oracle::{sample, ResponseTypeLaw};

fn main() -> regime_bounds::Result<()> {
    println!("C at zero gap: {:.6}; at a wide gap: {:.6}", critical_value(0.0, 0.05)?, critical_value(50.0, 0.05)?);
    let est = ThetaEstimates::simple(0.2, 0.03, 0.5, 0.04, 0.05);
    let ci = im_jd_ci(&est)?;
    println!("interval [0.2, 0.5] with SEs 0.03/0.04 -> CI [{:.4}, {:.4}], C = {:.4}", ci.ci_lo, ci.ci_up, ci.c);

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/two_strata.json");
    let rt = ResponseTypeLaw::from_json_str(&std::fs::read_to_string(path)?)?;
    let mut only = rt.clone();
    only.strata.truncate(1);
    only.strata[0].weight = Some(1.0);
    let data = sample(&only, 5_000, 2)?;
    let report = ci_report(&data, &EstimationConfig { seed: 1, ..Default::default() })?;
    print!("{}", report.csv);
    Ok(())
}
