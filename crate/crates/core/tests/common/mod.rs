//! Shared helpers for integration tests.
#![allow(dead_code)]

use rand::Rng;
use regime_bounds::law::StratifiedIVLaw;
use regime_bounds::oracle::response_type::PiTable;
use regime_bounds::oracle::{ResponseTypeLaw, RtStratum};

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).expect("fixture")
}

pub fn sign_reversal() -> ResponseTypeLaw {
    ResponseTypeLaw::from_json_str(&fixture("sign_reversal.json")).unwrap()
}

pub fn liability(pz: f64) -> StratifiedIVLaw {
    StratifiedIVLaw::single(pz, [[[0.32, 0.02], [0.32, 0.17]], [[0.04, 0.67], [0.32, 0.14]]])
}

/// Uniform draw from the simplex over the 16 response-type cells.
pub fn random_pi(rng: &mut impl Rng) -> PiTable {
    let mut pi = [[0.0; 4]; 4];
    let mut tot = 0.0;
    for c in pi.iter_mut().flatten() {
        *c = -(rng.gen::<f64>().max(1e-300)).ln();
        tot += *c;
    }
    pi.iter_mut().flatten().for_each(|c| *c /= tot);
    pi
}

/// Random law with 1 to 3 strata.
pub fn random_rt_law(rng: &mut impl Rng) -> ResponseTypeLaw {
    let k = rng.gen_range(1..=3);
    let mut w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let tot: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= tot);
    let strata = (0..k)
        .map(|s| RtStratum { label: format!("s{s}"), weight: Some(w[s]), pi: random_pi(rng), pz: None })
        .collect();
    ResponseTypeLaw { strata, pz: rng.gen_range(0.05..0.95) }
}
