//! Marginal sensitivity model: bounds over a Γ grid on a confounded design
//! with known truth, showing nesting in Γ and the (L,A)-level signs.
//!
//! Run: cargo run --example msm_sensitivity

use regime_bounds::bounds_msm::msm_arm_bounds;
use regime_bounds::induced::{classify, induce};
use regime_bounds::law::StratumObs;
use regime_bounds::oracle::MsmDgp;

fn main() -> regime_bounds::Result<()> {
    let gamma_star = std::f64::consts::E;
    let dgp = MsmDgp::new(gamma_star)?;
    println!("Γ* = e; largest realised odds ratio at l=0: {:.4}", dgp.sensitivity_ratio(0.0));
    for l in [-1.5, 0.0, 1.2] {
        let t = dgp.truth(l);
        let obs = StratumObs::new(format!("l={l}"), 1.0, t.pa[1], t.mu_a)?;
        println!("\nl = {l}: true CATE {:+.4}, CATE|A=0 {:+.4}, CATE|A=1 {:+.4}", t.cate, t.cate_given_a[0], t.cate_given_a[1]);
        for log_g in [0.0, 0.25, 0.5, 1.0] {
            let g = f64::exp(log_g);
            let ib = induce(&obs, msm_arm_bounds(&obs, g)?)?;
            let cls = classify(&ib, 0.0)?;
            println!(
                "  log Γ = {log_g:.2}: l-CATE [{:+.3}, {:+.3}] {:?}; A=0 [{:+.3}, {:+.3}] {:?}; A=1 [{:+.3}, {:+.3}] {:?}",
                ib.cate_l.lo, ib.cate_l.up, cls.l_status.kind,
                ib.cate[0].lo, ib.cate[0].up, cls.a_status[0].kind,
                ib.cate[1].lo, ib.cate[1].up, cls.a_status[1].kind,
            );
        }
    }
    Ok(())
}
