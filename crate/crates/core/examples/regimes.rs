//! Decision criteria under partial identification: per-stratum decisions,
//! regime value bounds and the minimax-regret mixed strategy.
//!
//! Run: cargo run --example regimes

use regime_bounds::bounds_bp::bp_bounds;
use regime_bounds::induced::induce_all;
use regime_bounds::law::validate;
use regime_bounds::oracle::{ground_truth, observed_law, ResponseTypeLaw};
use regime_bounds::regimes::{mixed_policy, regime_from_criterion, regime_value_bounds, Criterion, Scope};

fn main() -> regime_bounds::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/two_strata.json");
    let rt = ResponseTypeLaw::from_json_str(&std::fs::read_to_string(path)?)?;
    let law = observed_law(&rt);
    let obs = validate(&law)?;
    let arms: Vec<_> = law.strata.iter().map(|s| bp_bounds(&s.p)).collect();
    let ib = induce_all(&obs, &arms)?;
    let truth = ground_truth(&rt, None)?;
    println!("E(Y) = {:.4}; optimal value {:.4}; superoptimal value {:.4}", truth.ey, truth.value_opt, truth.value_sup);
    for scope in [Scope::L, Scope::Superoptimal] {
        println!("\nscope {scope:?}");
        for c in Criterion::ALL {
            let g = regime_from_criterion(c, scope, &ib)?;
            let v = regime_value_bounds(&g, &obs, &arms)?;
            println!("  {:<20} value in [{:.4}, {:.4}]  regime {}", c.name(), v.lo, v.up, g.to_json());
        }
    }
    for st in &ib.strata {
        let m = mixed_policy(st.cate_l);
        println!("\nstratum {}: treat with probability {:.3}, worst-case regret {:.4}", st.label(), m.p_star, m.worst_case_regret);
    }
    Ok(())
}
