//! Sensitivity-model data-generating process with a binary unmeasured
//! confounder `U ~ Bern(0.5)` and `L ~ Unif[-2, 2]`.
//!
//! The propensity follows `e(l) = σ(0.75 l + 0.5)` tilted by `U` so that the
//! `U`-specific propensity odds are exactly `Γ*` (u = 1) or `1/Γ*` (u = 0) times
//! the odds of `e(l)`. The outcome model is
//! `Y^a | L=l, U=u ~ Bern(σ(c·l + (2a−1)·k·(2u−1)))` with defaults `c = 0.3`,
//! `k = 1.5`: `U` modifies the effect, so the treated and untreated have
//! effects of opposite sign while the `l`-level effect is zero.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::response_type::record_rng;
use crate::error::{Error, Result};
use crate::estimation::Dataset;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel {
    pub slope: f64,
    pub effect: f64,
}

impl Default for OutcomeModel {
    fn default() -> Self {
        OutcomeModel { slope: 0.3, effect: 1.5 }
    }
}

/// Population quantities at one value of `l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsmTruth {
    pub l: f64,
    /// P(A=a | l).
    pub pa: [f64; 2],
    /// E(Y | A=a, l).
    pub mu_a: [f64; 2],
    /// E(Y^a | l).
    pub ey_a: [f64; 2],
    /// `ey_a_given_a[a][a′] = E(Y^a | A=a′, l)`.
    pub ey_a_given_a: [[f64; 2]; 2],
    pub cate: f64,
    pub cate_given_a: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsmDgp {
    pub gamma_star: f64,
    pub outcome: OutcomeModel,
}

impl MsmDgp {
    pub fn new(gamma_star: f64) -> Result<Self> {
        if !(gamma_star >= 1.0) || !gamma_star.is_finite() {
            return Err(Error::InfeasibleGamma(format!("Γ* = {gamma_star} must be ≥ 1")));
        }
        Ok(MsmDgp { gamma_star, outcome: OutcomeModel::default() })
    }

    pub fn nominal_propensity(&self, l: f64) -> f64 {
        sigmoid(0.75 * l + 0.5)
    }

    pub fn alpha(&self, l: f64, gamma: f64) -> f64 {
        1.0 / (gamma * self.nominal_propensity(l)) + 1.0 - 1.0 / gamma
    }

    pub fn beta(&self, l: f64, gamma: f64) -> f64 {
        gamma / self.nominal_propensity(l) + 1.0 - gamma
    }

    /// P(A=1 | l, u).
    pub fn propensity_lu(&self, l: f64, u: u8) -> f64 {
        if u == 1 {
            1.0 / self.alpha(l, self.gamma_star)
        } else {
            1.0 / self.beta(l, self.gamma_star)
        }
    }

    /// Odds of P(A=1|l,u) relative to the odds of e(l), for u = 0, 1.
    pub fn u_odds_ratios(&self, l: f64) -> [f64; 2] {
        let e = odds(self.nominal_propensity(l));
        [odds(self.propensity_lu(l, 0)) / e, odds(self.propensity_lu(l, 1)) / e]
    }

    /// P(Y^a = 1 | l, u).
    pub fn outcome_prob(&self, a: u8, l: f64, u: u8) -> f64 {
        let sa = 2.0 * a as f64 - 1.0;
        let su = 2.0 * u as f64 - 1.0;
        sigmoid(self.outcome.slope * l + sa * self.outcome.effect * su)
    }

    pub fn truth(&self, l: f64) -> MsmTruth {
        let mut pa = [0.0; 2];
        let mut joint = [[0.0; 2]; 2];
        let mut ey_a = [0.0; 2];
        for u in 0..2u8 {
            let e1 = self.propensity_lu(l, u);
            let pau = [1.0 - e1, e1];
            for ap in 0..2 {
                pa[ap] += 0.5 * pau[ap];
                for a in 0..2 {
                    joint[a][ap] += 0.5 * pau[ap] * self.outcome_prob(a as u8, l, u);
                }
            }
            for a in 0..2 {
                ey_a[a] += 0.5 * self.outcome_prob(a as u8, l, u);
            }
        }
        let mut ey_a_given_a = [[0.0; 2]; 2];
        for a in 0..2 {
            for ap in 0..2 {
                ey_a_given_a[a][ap] = joint[a][ap] / pa[ap];
            }
        }
        MsmTruth {
            l,
            pa,
            mu_a: [ey_a_given_a[0][0], ey_a_given_a[1][1]],
            ey_a,
            ey_a_given_a,
            cate: ey_a[1] - ey_a[0],
            cate_given_a: [0, 1].map(|ap| ey_a_given_a[1][ap] - ey_a_given_a[0][ap]),
        }
    }

    /// Largest odds ratio between P(A=a|l,Y^a=y) and P(A=a|l) over a, y,
    /// reported as a value ≥ 1.
    pub fn sensitivity_ratio(&self, l: f64) -> f64 {
        let t = self.truth(l);
        let mut worst: f64 = 1.0;
        for a in 0..2u8 {
            for y in 0..2u8 {
                let mut num = 0.0;
                let mut den = 0.0;
                for u in 0..2u8 {
                    let e1 = self.propensity_lu(l, u);
                    let pa = if a == 1 { e1 } else { 1.0 - e1 };
                    let m = self.outcome_prob(a, l, u);
                    let py = if y == 1 { m } else { 1.0 - m };
                    num += 0.5 * pa * py;
                    den += 0.5 * py;
                }
                let r = odds(num / den) / odds(t.pa[a as usize]);
                worst = worst.max(r).max(1.0 / r);
            }
        }
        worst
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<MsmSample> {
        if n == 0 {
            return Err(Error::InvalidSampleSize(n));
        }
        let mut data = Dataset::with_capacity(n, 1);
        let mut l_vals = Vec::with_capacity(n);
        let mut u_vals = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = record_rng(seed, i as u64);
            let l = -2.0 + 4.0 * rng.gen::<f64>();
            let u = u8::from(rng.gen::<f64>() < 0.5);
            let a = u8::from(rng.gen::<f64>() < self.propensity_lu(l, u));
            let y = u8::from(rng.gen::<f64>() < self.outcome_prob(a, l, u));
            data.push(y, a, 0, &[l]);
            l_vals.push(l);
            u_vals.push(u);
        }
        Ok(MsmSample { dgp: *self, data, u: u_vals })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MsmSample {
    pub dgp: MsmDgp,
    /// Records `(y, a, z = 0, x1 = l)`.
    pub data: Dataset,
    pub u: Vec<u8>,
}

pub fn msm_dgp(gamma_star: f64, seed: u64, n: usize) -> Result<MsmSample> {
    MsmDgp::new(gamma_star)?.sample(n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_gamma_removes_confounding() {
        let d = MsmDgp::new(1.0).unwrap();
        for l in [-1.5, 0.0, 0.7] {
            let e = d.nominal_propensity(l);
            assert!((d.propensity_lu(l, 0) - e).abs() < 1e-15);
            assert!((d.propensity_lu(l, 1) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn nominal_propensity_at_zero() {
        let d = MsmDgp::new(std::f64::consts::E).unwrap();
        assert!((d.nominal_propensity(0.0) - sigmoid(0.5)).abs() < 1e-15);
    }

    #[test]
    fn u_propensities_hit_gamma_exactly() {
        let g = std::f64::consts::E;
        let d = MsmDgp::new(g).unwrap();
        let s = msm_dgp(g, 3, 500).unwrap();
        for &l in s.data.column(0).iter() {
            let [r0, r1] = d.u_odds_ratios(l);
            assert!((r1 - g).abs() < 1e-9 && (r0 - 1.0 / g).abs() < 1e-9);
        }
    }

    #[test]
    fn outcome_model_satisfies_sensitivity_bound() {
        let d = MsmDgp::new(std::f64::consts::E).unwrap();
        for i in 0..=400 {
            let l = -2.0 + 0.01 * i as f64;
            assert!(d.sensitivity_ratio(l) <= std::f64::consts::E);
        }
    }

    #[test]
    fn effects_flip_with_natural_treatment() {
        let t = MsmDgp::new(std::f64::consts::E).unwrap().truth(1.2);
        assert!(t.cate.abs() < 1e-15);
        assert!(t.cate_given_a[0] < 0.0 && t.cate_given_a[1] > 0.0);
    }
}
