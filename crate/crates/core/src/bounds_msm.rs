//! Marginal sensitivity model bounds on `E(Y^a | l)` for binary outcomes.
//!
//! With `q = E(Y^a | A = 1−a, l)`, Bayes' rule gives the odds ratios of
//! `P(A=a | l, Y^a=y)` against `P(A=a | l)` as `μ/q` for `y = 1` and
//! `(1−μ)/(1−q)` for `y = 0`. The first is decreasing in `q`, the second
//! increasing, so the feasible `q` form an interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::law::StratumObs;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsmProblem {
    /// P(A=a | l).
    pub e: f64,
    /// E(Y | A=a, l).
    pub mu_obs: f64,
    pub gamma: f64,
}

impl MsmProblem {
    pub fn new(e: f64, mu_obs: f64, gamma: f64) -> Result<Self> {
        let p = MsmProblem { e, mu_obs, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0 && self.e < 1.0) {
            return Err(Error::InvalidInput(format!("propensity {} not in (0,1)", self.e)));
        }
        if !(0.0..=1.0).contains(&self.mu_obs) {
            return Err(Error::InvalidInput(format!("outcome mean {} not in [0,1]", self.mu_obs)));
        }
        if !(self.gamma >= 1.0) {
            return Err(Error::InfeasibleGamma(format!("Γ = {} must be ≥ 1", self.gamma)));
        }
        Ok(())
    }

    /// Odds ratio for `y = 1` at `q`; `None` when the conditioning event is null.
    pub fn odds_ratio_y1(&self, q: f64) -> Option<f64> {
        if self.mu_obs == 0.0 && q == 0.0 {
            None
        } else {
            Some(self.mu_obs / q)
        }
    }

    /// Odds ratio for `y = 0` at `q`; `None` when the conditioning event is null.
    pub fn odds_ratio_y0(&self, q: f64) -> Option<f64> {
        if self.mu_obs == 1.0 && q == 1.0 {
            None
        } else {
            Some((1.0 - self.mu_obs) / (1.0 - q))
        }
    }

    pub fn feasible(&self, q: f64) -> bool {
        let ok = |r: Option<f64>| r.is_none_or(|r| r >= 1.0 / self.gamma && r <= self.gamma);
        (0.0..=1.0).contains(&q) && ok(self.odds_ratio_y1(q)) && ok(self.odds_ratio_y0(q))
    }

    fn value(&self, q: f64) -> f64 {
        self.mu_obs * self.e + q * (1.0 - self.e)
    }

    /// Feasible range of the cross-arm mean `q`.
    pub fn q_range(&self) -> Interval {
        let (mu, g) = (self.mu_obs, self.gamma);
        if g.is_infinite() {
            return Interval::new(0.0, 1.0);
        }
        let lo = (mu / g).max(1.0 - g * (1.0 - mu)).max(0.0);
        let up = (mu * g).min(1.0 - (1.0 - mu) / g).min(1.0);
        Interval::new(lo, up)
    }
}

/// Sharp bounds on `E(Y^a | l)` within the binary-outcome model.
pub fn msm_bounds(prob: &MsmProblem) -> Result<Interval> {
    prob.validate()?;
    let mut q = prob.q_range();
    if q.lo > q.up + 1e-12 {
        return Err(Error::InfeasibleGamma(format!("no cross-arm mean is compatible with Γ = {}", prob.gamma)));
    }
    if q.lo > q.up {
        // rounding at Γ = 1 where the range is the single point μ
        q = Interval::point(prob.mu_obs);
    }
    Ok(Interval::new(prob.value(q.lo), prob.value(q.up)))
}

/// Same bounds located by bisection on the two monotone odds-ratio constraints.
pub fn msm_bounds_bisection(prob: &MsmProblem) -> Result<Interval> {
    prob.validate()?;
    let mu = prob.mu_obs;
    if !prob.feasible(mu) {
        return Err(Error::InfeasibleGamma(format!("Γ = {}", prob.gamma)));
    }
    // feasible set is an interval containing μ; search each side
    let edge = |mut inside: f64, mut outside: f64| {
        if prob.feasible(outside) {
            return outside;
        }
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if prob.feasible(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
            if (outside - inside).abs() < 1e-15 {
                break;
            }
        }
        inside
    };
    let lo = edge(mu, 0.0);
    let up = edge(mu, 1.0);
    Ok(Interval::new(prob.value(lo), prob.value(up)))
}

/// Grid search over `q` with the given step.
pub fn msm_bounds_grid(prob: &MsmProblem, step: f64) -> Option<Interval> {
    let n = (1.0 / step).round() as usize;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=n {
        let q = (i as f64 * step).min(1.0);
        if prob.feasible(q) {
            let v = prob.value(q);
            best = Some(match best {
                None => (v, v),
                Some((lo, up)) => (lo.min(v), up.max(v)),
            });
        }
    }
    best.map(|(lo, up)| Interval::new(lo, up))
}

/// l-CATE interval from the two arm problems (`prob0.e = P(A=0|l)`, `prob1.e = P(A=1|l)`).
pub fn msm_cate_bounds(prob0: &MsmProblem, prob1: &MsmProblem) -> Result<Interval> {
    Ok(msm_bounds(prob1)?.minus(&msm_bounds(prob0)?))
}

/// Arm bounds `[E(Y^0|l), E(Y^1|l)]` for one observational stratum.
pub fn msm_arm_bounds(obs: &StratumObs, gamma: f64) -> Result<[Interval; 2]> {
    let b0 = msm_bounds(&MsmProblem::new(obs.pa[0], obs.mu_a[0], gamma)?)?;
    let b1 = msm_bounds(&MsmProblem::new(obs.pa[1], obs.mu_a[1], gamma)?)?;
    Ok([b0, b1])
}
