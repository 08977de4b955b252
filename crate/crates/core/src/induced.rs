//! Bounds on (l, a′)-level effects induced from bounds on `E(Y^a | l)`.
//!
//! For `a ≠ a′`, total expectation gives
//! `E(Y^a | A=a′, l) = (E(Y^a | l) − E(Y | A=a, l) P(A=a | l)) / P(A=a′ | l)`,
//! so any interval on `E(Y^a | l)` maps to an interval on the cross-arm
//! value and on the (l, a′)-CATE, with width `φ(1−a′, l) / P(A=a′ | l)`.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Identification, IdentificationStatus, Interval};
use crate::law::{ObservationalLaw, StratifiedIVLaw, StratumObs, POSITIVITY_TOL};
use crate::regime::Regime;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedStratum {
    pub obs: StratumObs,
    /// Source intervals on `E(Y^0 | l)`, `E(Y^1 | l)`.
    pub arms: [Interval; 2],
    /// l-CATE interval `(L1 − U0, U1 − L0)`.
    pub cate_l: Interval,
    /// (l, a′)-CATE interval for `a′ = 0, 1`.
    pub cate: [Interval; 2],
    /// Interval on `E(Y^{1−a′} | A=a′, l)`.
    pub value_crossarm: [Interval; 2],
    /// Induced width `φ(1−a′, l) / P(A=a′ | l)`.
    pub rho: [f64; 2],
    /// Source widths `φ(a, l)`.
    pub phi: [f64; 2],
    /// True when clipping moved an induced endpoint.
    pub clipped: bool,
}

impl InducedStratum {
    pub fn label(&self) -> &str {
        &self.obs.label
    }

    /// l-CATE width `ω(l) = φ(0, l) + φ(1, l)`.
    pub fn omega(&self) -> f64 {
        self.phi[0] + self.phi[1]
    }

    /// Interval on `E(Y^a | A=a′, l)`; point-identified when `a = a′`.
    pub fn value_given_a(&self, a: usize, a_prime: usize) -> Interval {
        if a == a_prime {
            Interval::point(self.obs.mu_a[a])
        } else {
            self.value_crossarm[a_prime]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedBounds {
    pub strata: Vec<InducedStratum>,
}

fn check_positivity(obs: &StratumObs) -> Result<()> {
    for a in 0..2 {
        if obs.pa[a] <= POSITIVITY_TOL {
            return Err(Error::PositivityViolation(format!("stratum {}: P(A={a}|l) = {}", obs.label, obs.pa[a])));
        }
    }
    Ok(())
}

/// Induce (l, a′)-level bounds for one stratum from arm bounds.
pub fn induce(obs: &StratumObs, arms: [Interval; 2]) -> Result<InducedStratum> {
    check_positivity(obs)?;
    let [p0, p1] = obs.pa;
    let mu = obs.mu;
    let raw_cate = [
        Interval::new((arms[1].lo - mu) / p0, (arms[1].up - mu) / p0),
        Interval::new((mu - arms[0].up) / p1, (mu - arms[0].lo) / p1),
    ];
    let raw_value = [
        Interval::new((arms[1].lo - obs.mu_a[1] * p1) / p0, (arms[1].up - obs.mu_a[1] * p1) / p0),
        Interval::new((arms[0].lo - obs.mu_a[0] * p0) / p1, (arms[0].up - obs.mu_a[0] * p0) / p1),
    ];
    let cate = raw_cate.map(|i| i.clip_effect());
    let value_crossarm = raw_value.map(|i| i.clip_prob());
    let clipped = cate != raw_cate || value_crossarm != raw_value;
    if clipped {
        debug!("stratum {}: induced interval clipped", obs.label);
    }
    let phi = [arms[0].width(), arms[1].width()];
    Ok(InducedStratum {
        obs: obs.clone(),
        arms,
        cate_l: arms[1].minus(&arms[0]),
        cate,
        value_crossarm,
        rho: [phi[1] / p0, phi[0] / p1],
        phi,
        clipped,
    })
}

/// Induce every stratum of a law with per-stratum arm bounds.
pub fn induce_all(law: &ObservationalLaw, arms: &[[Interval; 2]]) -> Result<InducedBounds> {
    if arms.len() != law.strata.len() {
        return Err(Error::MissingBounds(format!("{} arm-bound pairs for {} strata", arms.len(), law.strata.len())));
    }
    let strata = law.strata.iter().zip(arms).map(|(o, b)| induce(o, *b)).collect::<Result<Vec<_>>>()?;
    Ok(InducedBounds { strata })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumClassification {
    pub label: String,
    pub l_status: IdentificationStatus,
    /// Status of the (l, a′)-CATE for `a′ = 0, 1`.
    pub a_status: [IdentificationStatus; 2],
    /// Sign of `E(Y | l) − E(Y^{1−a′} | l)`, oriented as the (l, a′)-CATE.
    pub pie_route: [Identification; 2],
}

/// Sign classification of the l-CATE and both (l, a′)-CATEs, cross-checked
/// against the population-intervention-effect route.
pub fn classify(ib: &InducedStratum, tau: f64) -> Result<StratumClassification> {
    let l_status = ib.cate_l.status(tau);
    let a_status = [ib.cate[0].status(tau), ib.cate[1].status(tau)];
    let mu = ib.obs.mu;
    let pa = ib.obs.pa;
    // a′ = 0: E(Y^1|A=0,l) − E(Y|A=0,l) has the sign of E(Y^1|l) − E(Y|l)
    // a′ = 1: E(Y|A=1,l) − E(Y^0|A=1,l) has the sign of E(Y|l) − E(Y^0|l)
    let margins = [
        (ib.arms[1].lo - mu - tau * pa[0], ib.arms[1].up - mu + tau * pa[0]),
        (mu - ib.arms[0].up - tau * pa[1], mu - ib.arms[0].lo + tau * pa[1]),
    ];
    let mut pie_route = [Identification::Ambiguous; 2];
    for ap in 0..2 {
        let (lo_margin, up_margin) = margins[ap];
        pie_route[ap] = if lo_margin > 0.0 {
            Identification::IdentifiedTreat
        } else if up_margin < 0.0 {
            Identification::IdentifiedControl
        } else {
            Identification::Ambiguous
        };
        let borderline = lo_margin.abs() < 1e-12 || up_margin.abs() < 1e-12;
        if pie_route[ap] != a_status[ap].kind && !borderline && !ib.clipped {
            return Err(Error::Internal(format!(
                "stratum {}: interval route {:?} disagrees with intervention-effect route {:?} at a′={ap}",
                ib.label(),
                a_status[ap].kind,
                pie_route[ap]
            )));
        }
    }
    Ok(StratumClassification { label: ib.label().to_string(), l_status, a_status, pie_route })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthIdentity {
    pub omega: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub residual: f64,
}

/// `ω(l) = P(A=0|l) ρ(0,l) + P(A=1|l) ρ(1,l)`.
pub fn width_identity(ib: &InducedStratum) -> WidthIdentity {
    let omega = ib.omega();
    let mix = ib.obs.pa[0] * ib.rho[0] + ib.obs.pa[1] * ib.rho[1];
    WidthIdentity { omega, rho0: ib.rho[0], rho1: ib.rho[1], residual: (omega - mix).abs() }
}

/// Interval on the (l, 1−a′)-CATE from the l-CATE and (l, a′)-CATE intervals,
/// where `p_a = P(A=a′ | l)`.
pub fn cross_bound(cate_l: Interval, cate_a: Interval, p_a: f64) -> Result<Interval> {
    if !(p_a > POSITIVITY_TOL && p_a < 1.0 - POSITIVITY_TOL) {
        return Err(Error::PositivityViolation(format!("P(A=a′|l) = {p_a}")));
    }
    let q = 1.0 - p_a;
    Ok(Interval::new((cate_l.lo - cate_a.up * p_a) / q, (cate_l.up - cate_a.lo * p_a) / q).clip_effect())
}

const EQ_TOL: f64 = 1e-12;

fn same(a: &Interval, b: &Interval) -> bool {
    a.max_abs_diff(b) <= EQ_TOL
}

/// Whether the l-CATE interval equals both (l, a′)-CATE intervals. Also
/// verifies that equality with one a′ forces equality with the other.
pub fn bound_equality_check(ib: &InducedStratum) -> Result<bool> {
    let eq = [same(&ib.cate_l, &ib.cate[0]), same(&ib.cate_l, &ib.cate[1])];
    let full = eq[0] && eq[1];
    if eq[0] != eq[1] {
        return Err(Error::Internal(format!(
            "stratum {}: l-CATE bounds equal the (l,{})-CATE bounds only",
            ib.label(),
            if eq[0] { 0 } else { 1 }
        )));
    }
    Ok(full)
}

/// Bounds on `E(Y^a | A=a′, l)` for a treatment with more than two levels,
/// given an interval on `E(Y^a | l)`, `P(A=a | l)`, `E(Y | A=a, l)` and `P(A=a′ | l)`.
pub fn multi_valued_bounds(ey_a: Interval, p_a: f64, mu_a: f64, p_a_prime: f64) -> Result<Interval> {
    if p_a_prime <= POSITIVITY_TOL || p_a <= POSITIVITY_TOL {
        return Err(Error::PositivityViolation(format!("P(A=a|l) = {p_a}, P(A=a′|l) = {p_a_prime}")));
    }
    let lo = (ey_a.lo - mu_a * p_a + p_a + p_a_prime - 1.0) / p_a_prime;
    let up = (ey_a.up - mu_a * p_a) / p_a_prime;
    Ok(Interval::new(lo, up).clip_prob())
}

/// Bounds on `E(Y^a | l)` from bounds on the value of the regime that assigns
/// `a` in stratum `l` and follows the natural treatment elsewhere.
pub fn invert_regime_bounds(regime_bounds: Interval, law: &ObservationalLaw, a: usize, l: usize) -> Result<Interval> {
    let s = law.strata.get(l).ok_or_else(|| Error::InvalidInput(format!("stratum index {l} out of range")))?;
    if s.weight <= 0.0 {
        return Err(Error::ZeroStratumWeight(s.label.clone()));
    }
    let _ = a;
    let others: f64 = law.strata.iter().enumerate().filter(|(i, _)| *i != l).map(|(_, o)| o.weight * o.mu).sum();
    Ok(Interval::new((regime_bounds.lo - others) / s.weight, (regime_bounds.up - others) / s.weight))
}

/// The regime `g_{a,l}`: action `a` in stratum `l`, natural treatment elsewhere.
pub fn point_deviation_regime(labels: &[String], a: u8, l: usize) -> Regime {
    use crate::regime::Action;
    Regime::from_fn(labels, |s, ap| if s == l { Action::from_bit(a) } else { Action::from_bit(ap as u8) })
}

/// Observational summary of stratum `s` conditional on `Z = z`.
pub fn stratum_given_z(law: &StratifiedIVLaw, s: usize, z: usize) -> Result<StratumObs> {
    let st = &law.strata[s];
    if st.pz(z) <= 0.0 {
        return Err(Error::PositivityViolation(format!("stratum {}: P(Z={z}|l) = 0", st.label)));
    }
    let pa = [st.pa_given_z(0, z), st.pa_given_z(1, z)];
    if pa.iter().any(|p| *p <= POSITIVITY_TOL) {
        return Err(Error::PositivityViolation(format!("stratum {}: P(A=a|l,Z={z}) = 0", st.label)));
    }
    Ok(StratumObs {
        label: format!("{}|z={z}", st.label),
        weight: st.weight,
        pa,
        mu_a: [st.mu_az(0, z), st.mu_az(1, z)],
        mu: st.mu_z(z),
    })
}

/// (L, A, Z)-level induced bounds: the same algebra with observables
/// conditioned on `Z = z` and the unconditional arm bounds, valid because
/// `E(Y^a | l, z) = E(Y^a | l)` under the IV assumptions.
pub fn induce_given_z(law: &StratifiedIVLaw, arms: &[[Interval; 2]], z: usize) -> Result<InducedBounds> {
    let strata = (0..law.strata.len())
        .map(|s| induce(&stratum_given_z(law, s, z)?, arms[s]))
        .collect::<Result<Vec<_>>>()?;
    Ok(InducedBounds { strata })
}

/// (L, Z)-level CATE interval. It coincides with the l-CATE interval since
/// the arm means do not depend on `z`.
pub fn cate_given_z(arms: &[Interval; 2], _z: usize) -> Interval {
    arms[1].minus(&arms[0])
}

/// Signed width difference `w^{g_sup} − w^{g_opt}` of induced value bounds:
/// `Σ_{a′,l} P(L=l) (I[g_sup(a′,l) ≠ a′] − I[g_opt(l) ≠ a′]) w^{1−a′}(l)`.
/// Only cells where a regime deviates from the natural treatment contribute
/// width, and `Σ_{a′} I[g_opt(l) ≠ a′] w^{1−a′}(l) = w^{g_opt(l)}(l)`.
/// `g_opt` is read at `a′ = 0`; `arm_widths[s][a]` is the width of the bounds
/// on `E(Y^a | l_s)`.
pub fn regime_width_compare(g_sup: &Regime, g_opt: &Regime, weights: &[f64], arm_widths: &[[f64; 2]]) -> Result<f64> {
    let mut total = 0.0;
    for (s, w) in weights.iter().enumerate() {
        let opt = g_opt.get(s, 0).bit().ok_or_else(|| Error::MissingBounds("g_opt must be deterministic".into()))?
            as usize;
        for ap in 0..2 {
            let sup = g_sup.get(s, ap).bit().ok_or_else(|| Error::MissingBounds("g_sup must be deterministic".into()))?
                as usize;
            let ind = |b: bool| if b { 1.0 } else { 0.0 };
            total += w * (ind(sup != ap) - ind(opt != ap)) * arm_widths[s][1 - ap];
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(p1: f64, mu0: f64, mu1: f64) -> StratumObs {
        StratumObs::new("l", 1.0, p1, [mu0, mu1]).unwrap()
    }

    #[test]
    fn point_arms_give_point_effects() {
        let o = obs(0.4, 0.3, 0.6);
        let ib = induce(&o, [Interval::point(0.35), Interval::point(0.5)]).unwrap();
        assert_eq!(ib.cate[0].width(), 0.0);
        assert_eq!(ib.cate[1].width(), 0.0);
        // total expectation: P0·cate0 + P1·cate1 = cate_l
        let mix = 0.6 * ib.cate[0].lo + 0.4 * ib.cate[1].lo;
        assert!((mix - 0.15).abs() < 1e-12);
    }

    #[test]
    fn equal_widths_at_half() {
        let o = obs(0.5, 0.4, 0.5);
        let ib = induce(&o, [Interval::new(0.2, 0.6), Interval::new(0.3, 0.7)]).unwrap();
        let w = width_identity(&ib);
        assert!((w.rho0 - w.rho1).abs() < 1e-12);
        assert!((w.omega - w.rho0).abs() < 1e-12);
        assert!(w.residual < 1e-12);
    }

    #[test]
    fn constructed_equality_instance() {
        // U1 + L0 = L1 + U0 = 2 E(Y|l) with P(A=1|l) = 1/2
        let o = obs(0.5, 0.4, 0.5);
        let ib = induce(&o, [Interval::new(0.2, 0.6), Interval::new(0.3, 0.7)]).unwrap();
        assert!(bound_equality_check(&ib).unwrap());
        let ib = induce(&o, [Interval::point(0.45), Interval::point(0.45)]).unwrap();
        assert!(bound_equality_check(&ib).unwrap());
        let ib = induce(&obs(0.3, 0.4, 0.5), [Interval::new(0.2, 0.6), Interval::new(0.3, 0.7)]).unwrap();
        assert!(!bound_equality_check(&ib).unwrap());
    }

    #[test]
    fn cross_bound_with_points_inverts_total_expectation() {
        let c = cross_bound(Interval::point(0.1), Interval::point(0.4), 0.25).unwrap();
        let expect = (0.1 - 0.4 * 0.25) / 0.75;
        assert!((c.lo - expect).abs() < 1e-15 && (c.up - expect).abs() < 1e-15);
    }

    #[test]
    fn binary_reduction_of_multi_valued_bounds() {
        // with two arms P(a) + P(a′) = 1 and the interval matches the cross-arm term
        let o = obs(0.3, 0.2, 0.7);
        let arms = [Interval::point(0.3), Interval::point(0.5)];
        let ib = induce(&o, arms).unwrap();
        let m = multi_valued_bounds(arms[1], 0.3, 0.7, 0.7).unwrap();
        assert!(m.max_abs_diff(&ib.value_crossarm[0]) < 1e-15);
        assert_eq!(m.width(), 0.0);
    }

    #[test]
    fn positivity_guard() {
        let o = StratumObs { label: "x".into(), weight: 1.0, pa: [1.0, 0.0], mu_a: [0.5, 0.5], mu: 0.5 };
        assert!(matches!(induce(&o, [Interval::point(0.5); 2]), Err(Error::PositivityViolation(_))));
    }

    #[test]
    fn observed_regime_width_difference() {
        let labels = vec!["l".to_string()];
        let sup = Regime::observed(&labels);
        let opt = Regime::from_l(&labels, &[1]);
        let widths = [[0.3, 0.2]];
        let d = regime_width_compare(&sup, &opt, &[1.0], &widths).unwrap();
        // minus the width of the g_opt bounds, which is w^1
        assert!((d - -0.2).abs() < 1e-15);
    }
}
