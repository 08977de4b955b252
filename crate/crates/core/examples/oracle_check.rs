//! Audit closed-form bounds against the exact linear-programming oracle on
//! random response-type laws.
//!
//! Run: cargo run --release --example oracle_check [-- n_laws]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regime_bounds::cli::audit;
use regime_bounds::oracle::{observed_law, ResponseTypeLaw};

fn main() -> regime_bounds::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let mut pi = [[0.0; 4]; 4];
        let mut tot = 0.0;
        for row in pi.iter_mut() {
            for c in row.iter_mut() {
                *c = -rng.gen::<f64>().ln();
                tot += *c;
            }
        }
        pi.iter_mut().flatten().for_each(|c| *c /= tot);
        let rt = ResponseTypeLaw::single(pi, rng.gen_range(0.05..0.95));
        let a = audit(&observed_law(&rt))?;
        worst = worst.max(a.max_diff);
    }
    println!("{n} random laws: largest closed-form vs LP gap {worst:.2e}");
    Ok(())
}
