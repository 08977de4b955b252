//! Estimate regime-value bounds from data: simulate from a known law, learn a
//! regime on a split, cross-fit one-step estimators with bootstrap CIs and
//! compare with the population bounds.
//!
//! Run: cargo run --release --example estimation

use regime_bounds::bounds_bp::bp_bounds;
use regime_bounds::estimation::{split_pipeline, EstimationConfig, PolicySpec};
use regime_bounds::induced::induce_all;
use regime_bounds::law::validate;
use regime_bounds::oracle::{observed_law, sample, ResponseTypeLaw};
use regime_bounds::regimes::{regime_from_criterion, regime_value_bounds, Criterion, Scope};

fn main() -> regime_bounds::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/two_strata.json");
    let rt = ResponseTypeLaw::from_json_str(&std::fs::read_to_string(path)?)?;
    let data = sample(&rt, 20_000, 11)?;
    let law = observed_law(&rt);
    let obs = validate(&law)?;
    let arms: Vec<_> = law.strata.iter().map(|s| bp_bounds(&s.p)).collect();
    let ib = induce_all(&obs, &arms)?;
    let cfg = EstimationConfig { seed: 3, ..Default::default() };

    let out = split_pipeline(&data, &PolicySpec::Observed, &cfg)?;
    println!("observed: {:.4} [{:.4}, {:.4}]", out.lower.point, out.lower.ci_lo, out.lower.ci_up);
    for c in [Criterion::Optimist, Criterion::Healthcare { baseline: 0 }, Criterion::ConventionalitySup] {
        let spec = PolicySpec::Criterion { criterion: c, scope: Scope::Superoptimal };
        let out = split_pipeline(&data, &spec, &cfg)?;
        let pop = regime_value_bounds(&regime_from_criterion(c, Scope::Superoptimal, &ib)?, &obs, &arms)?;
        println!(
            "{:<20} estimate [{:.4}, {:.4}]  95% CI [{:.4}, {:.4}]  population [{:.4}, {:.4}]",
            c.name(), out.lower.point, out.upper.point, out.lower.ci_lo, out.upper.ci_up, pop.lo, pop.up
        );
    }
    Ok(())
}
