//! Sharp IV bounds on a response-type law: ground truth, arm bounds, induced
//! (A=a′)-level bounds and the case where the ATE sign is unknown but both
//! subgroup signs are identified.
//!
//! Run: cargo run --example iv_bounds [-- path/to/law.json]

use regime_bounds::bounds_bp::{bp_bounds, theta_decomposition};
use regime_bounds::induced::{classify, induce_all};
use regime_bounds::law::validate;
use regime_bounds::oracle::{ground_truth, observed_law, ResponseTypeLaw};

fn main() -> regime_bounds::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/sign_reversal.json").into());
    let rt = ResponseTypeLaw::from_json_str(&std::fs::read_to_string(path)?)?;
    let truth = ground_truth(&rt, None)?;
    println!("P(A=1) = {:.3}, P(A=1|Z=0) = {:.3}, P(A=1|Z=1) = {:.3}", truth.p_treated, truth.p_treated_given_z[0], truth.p_treated_given_z[1]);
    println!("ATE = {:.3}, CATE|A=0 = {:.3}, CATE|A=1 = {:.3}", truth.ate, truth.cate_given_a[0], truth.cate_given_a[1]);

    let law = observed_law(&rt);
    let obs = validate(&law)?;
    let arms: Vec<_> = law.strata.iter().map(|s| bp_bounds(&s.p)).collect();
    let ib = induce_all(&obs, &arms)?;
    for (st, s) in ib.strata.iter().zip(&law.strata) {
        let th = theta_decomposition(&s.p);
        let cls = classify(st, 0.0)?;
        println!("\nstratum {}", st.label());
        for a in 0..2 {
            println!("  E(Y^{a}) in [{:.4}, {:.4}]  (active terms: lower {}, upper {})", st.arms[a].lo, st.arms[a].up, th.d_l[a], th.d_u[a]);
        }
        println!("  ATE        in [{:.4}, {:.4}]  {:?}", st.cate_l.lo, st.cate_l.up, cls.l_status.kind);
        for ap in 0..2 {
            println!("  CATE|A={ap}   in [{:.4}, {:.4}]  {:?}", st.cate[ap].lo, st.cate[ap].up, cls.a_status[ap].kind);
        }
    }
    Ok(())
}
