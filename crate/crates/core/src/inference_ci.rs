//! Confidence intervals for partially identified parameters whose bounds are
//! a max (lower) and min (upper) over candidate terms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bounds_bp::{argmax, argmin};
use crate::error::{Error, Result};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimates {
    pub theta_l: Vec<f64>,
    pub se_l: Vec<f64>,
    pub theta_u: Vec<f64>,
    pub se_u: Vec<f64>,
    pub alpha: f64,
}

impl ThetaEstimates {
    /// A single lower and upper estimate.
    pub fn simple(lo: f64, se_lo: f64, up: f64, se_up: f64, alpha: f64) -> Self {
        ThetaEstimates { theta_l: vec![lo], se_l: vec![se_lo], theta_u: vec![up], se_u: vec![se_up], alpha }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_l.is_empty() || self.theta_u.is_empty() {
            return Err(Error::InvalidInput("theta vectors must be non-empty".into()));
        }
        if self.theta_l.len() != self.se_l.len() || self.theta_u.len() != self.se_u.len() {
            return Err(Error::InvalidInput("each theta needs a standard error".into()));
        }
        if self.se_l.iter().chain(&self.se_u).any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidInput("standard errors must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidInput(format!("alpha {} not in (0, 0.5)", self.alpha)));
        }
        Ok(())
    }

    fn select(&self) -> (usize, usize) {
        let dl = (0..self.theta_l.len()).fold(0, |b, j| if self.theta_l[j] > self.theta_l[b] { j } else { b });
        let du = (0..self.theta_u.len()).fold(0, |b, j| if self.theta_u[j] < self.theta_u[b] { j } else { b });
        (dl, du)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImJdCi {
    pub ci_lo: f64,
    pub ci_up: f64,
    pub c: f64,
    pub d_l: usize,
    pub d_u: usize,
    /// Smallest distance from the selected lower term to any other lower term.
    pub margin_gap_l: f64,
    pub margin_gap_u: f64,
}

/// Tolerated amount by which the estimated upper bound may fall below the lower.
pub const CROSS_TOL: f64 = 1e-9;

/// Solve `Φ(C + Δ/σ) − Φ(−C) = 1 − α` for `C` by bisection on `[0, 10]`.
pub fn critical_value(gap_over_sigma: f64, alpha: f64) -> Result<f64> {
    let f = |c: f64| norm_cdf(c + gap_over_sigma) - norm_cdf(-c) - (1.0 - alpha);
    let (mut lo, mut hi) = (0.0, 10.0);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::NoRoot);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Interval that covers the partially identified parameter with probability
/// at least `1 − α`.
pub fn im_jd_ci(est: &ThetaEstimates) -> Result<ImJdCi> {
    est.validate()?;
    let (d_l, d_u) = est.select();
    let (tl, su) = (est.theta_l[d_l], est.se_u[d_u]);
    let (tu, sl) = (est.theta_u[d_u], est.se_l[d_l]);
    if tu < tl - CROSS_TOL {
        return Err(Error::CrossedBounds { lo: tl, up: tu });
    }
    let gap = (tu - tl).max(0.0);
    let c = critical_value(gap / sl.max(su), est.alpha)?;
    let gap_of = |v: &[f64], d: usize| {
        (0..v.len()).filter(|&j| j != d).map(|j| (v[j] - v[d]).abs()).fold(f64::INFINITY, f64::min)
    };
    Ok(ImJdCi {
        ci_lo: tl - c * sl,
        ci_up: tu + c * su,
        c,
        d_l,
        d_u,
        margin_gap_l: gap_of(&est.theta_l, d_l),
        margin_gap_u: gap_of(&est.theta_u, d_u),
    })
}

/// Transform arm-bound θ estimates into estimates for `E(Y^a | A=1−a, l)`:
/// `θ̃ = (θ − μ_a π_a) / π_{1−a}` with delta-method standard errors.
pub fn theta_tilde(theta: &ThetaEstimates, mu_a: f64, se_mu: f64, pi_a: f64, pi_other: f64) -> Result<ThetaEstimates> {
    if !(pi_a > 0.0 && pi_other > 0.0) {
        return Err(Error::PositivityViolation(format!("P(A=a|l) = {pi_a}, P(A=1−a|l) = {pi_other}")));
    }
    let t = |v: &[f64]| v.iter().map(|x| (x - mu_a * pi_a) / pi_other).collect::<Vec<_>>();
    let s = |v: &[f64]| v.iter().map(|x| (x * x + (pi_a * se_mu).powi(2)).sqrt() / pi_other).collect::<Vec<_>>();
    Ok(ThetaEstimates {
        theta_l: t(&theta.theta_l),
        se_l: s(&theta.se_l),
        theta_u: t(&theta.theta_u),
        se_u: s(&theta.se_u),
        alpha: theta.alpha,
    })
}

/// θ estimates for a four-term decomposition (used with the Balke-Pearl terms).
pub fn theta_estimates_from_terms(theta_l: [f64; 4], se_l: [f64; 4], theta_u: [f64; 4], se_u: [f64; 4], alpha: f64) -> ThetaEstimates {
    debug_assert!(argmax(&theta_l) < 4 && argmin(&theta_u) < 4);
    ThetaEstimates { theta_l: theta_l.to_vec(), se_l: se_l.to_vec(), theta_u: theta_u.to_vec(), se_u: se_u.to_vec(), alpha }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_endpoints_give_two_sided_quantile() {
        let ci = im_jd_ci(&ThetaEstimates::simple(0.3, 0.1, 0.3, 0.1, 0.05)).unwrap();
        assert!((ci.c - 1.959964).abs() < 1e-6);
        assert!((ci.c - norm_quantile(0.975)).abs() < 1e-9);
    }

    #[test]
    fn wide_gap_gives_one_sided_quantile() {
        let c = critical_value(1e3, 0.05).unwrap();
        assert!((c - 1.644854).abs() < 1e-6);
    }

    #[test]
    fn crossed_estimates_error() {
        let r = im_jd_ci(&ThetaEstimates::simple(0.5, 0.1, 0.3, 0.1, 0.05));
        assert!(matches!(r, Err(Error::CrossedBounds { .. })));
    }

    #[test]
    fn selection_uses_max_and_min() {
        let est = ThetaEstimates {
            theta_l: vec![0.1, 0.25, 0.2],
            se_l: vec![0.01; 3],
            theta_u: vec![0.9, 0.6, 0.7],
            se_u: vec![0.01; 3],
            alpha: 0.05,
        };
        let ci = im_jd_ci(&est).unwrap();
        assert_eq!((ci.d_l, ci.d_u), (1, 1));
        assert!((ci.margin_gap_l - 0.05).abs() < 1e-12);
        assert!(ci.ci_lo <= 0.25 && ci.ci_up >= 0.6);
    }

    #[test]
    fn tilde_with_exact_mean_scales_se() {
        let est = ThetaEstimates::simple(0.4, 0.02, 0.6, 0.03, 0.05);
        let t = theta_tilde(&est, 0.5, 0.0, 0.4, 0.6).unwrap();
        assert!((t.se_l[0] - 0.02 / 0.6).abs() < 1e-15);
        assert!((t.theta_l[0] - (0.4 - 0.2) / 0.6).abs() < 1e-15);
    }
}
