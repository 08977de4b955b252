//! Treatments with more than two levels: bounds on E(Y^a | A=a′) from bounds
//! on E(Y^a), checked against an enumeration oracle.
//!
//! Run: cargo run --example multi_valued

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regime_bounds::induced::multi_valued_bounds;
use regime_bounds::oracle::MultiArmLaw;
use regime_bounds::Interval;

fn main() -> regime_bounds::Result<()> {
    let arms = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut probs: Vec<f64> = (0..arms << arms).map(|_| rng.gen::<f64>()).collect();
    let tot: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= tot);
    let law = MultiArmLaw::from_probs(arms, &probs);
    for a in 0..arms {
        // an interval of half-width 0.02 around E(Y^a), as an upstream bound would supply
        let (pa, mu) = (law.pa(a), law.mu_a(a));
        let ey = Interval::new(law.ey(a) - 0.02, law.ey(a) + 0.02);
        for ap in (0..arms).filter(|&ap| ap != a) {
            let b = multi_valued_bounds(ey, pa, mu, law.pa(ap))?;
            let truth = law.ey_given(a, ap);
            println!("E(Y^{a} | A={ap}) = {truth:.4} in [{:.4}, {:.4}]", b.lo, b.up);
        }
    }
    Ok(())
}
