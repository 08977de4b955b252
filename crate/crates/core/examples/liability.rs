//! Liability example: how the instrument's prevalence changes which subgroup
//! effects are sign-identified from the same conditional table.
//!
//! Run: cargo run --example liability

use regime_bounds::bounds_bp::bp_bounds;
use regime_bounds::induced::{classify, induce};
use regime_bounds::law::{validate, StratifiedIVLaw};

fn main() -> regime_bounds::Result<()> {
    let p = [[[0.32, 0.02], [0.32, 0.17]], [[0.04, 0.67], [0.32, 0.14]]];
    for pz in [0.10, 0.25] {
        let law = StratifiedIVLaw::single(pz, p);
        let obs = validate(&law)?;
        let ib = induce(&obs.strata[0], bp_bounds(&law.strata[0].p))?;
        let cls = classify(&ib, 0.0)?;
        println!("P(Z=1) = {pz}");
        println!("  l-CATE      [{:+.4}, {:+.4}] {:?}", ib.cate_l.lo, ib.cate_l.up, cls.l_status.kind);
        for ap in 0..2 {
            println!("  (l,{ap})-CATE  [{:+.4}, {:+.4}] {:?}", ib.cate[ap].lo, ib.cate[ap].up, cls.a_status[ap].kind);
        }
    }
    Ok(())
}
