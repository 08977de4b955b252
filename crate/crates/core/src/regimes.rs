//! Decision criteria over partially identified effects and bounds on the
//! value of a regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::induced::{induce, InducedBounds, InducedStratum};
use crate::interval::Interval;
use crate::law::ObservationalLaw;
pub use crate::regime::{Action, Regime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    /// Maximax: compare upper bounds.
    Optimist,
    /// Maximin: compare lower bounds.
    Pessimist,
    /// Treat when the effect interval leans positive.
    Opportunist,
    /// Deviate from the baseline action only when the sign is identified.
    Healthcare { baseline: u8 },
    /// Follow the natural treatment unless its (l, a′)-effect sign says otherwise.
    ConventionalitySup,
    /// Follow the natural treatment unless the arm bounds certify an improvement.
    ConventionalityOpt,
    /// Randomize with the minimax-regret probability.
    Mixed,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::Optimist,
        Criterion::Pessimist,
        Criterion::Opportunist,
        Criterion::Healthcare { baseline: 0 },
        Criterion::ConventionalitySup,
        Criterion::ConventionalityOpt,
        Criterion::Mixed,
    ];

    pub fn name(&self) -> String {
        match self {
            Criterion::Optimist => "optimist".into(),
            Criterion::Pessimist => "pessimist".into(),
            Criterion::Opportunist => "opportunist".into(),
            Criterion::Healthcare { baseline: 0 } => "healthcare".into(),
            Criterion::Healthcare { baseline } => format!("healthcare{baseline}"),
            Criterion::ConventionalitySup => "conventionality-sup".into(),
            Criterion::ConventionalityOpt => "conventionality-opt".into(),
            Criterion::Mixed => "mixed".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Criterion> {
        Ok(match s {
            "optimist" => Criterion::Optimist,
            "pessimist" => Criterion::Pessimist,
            "opportunist" => Criterion::Opportunist,
            "healthcare" | "healthcare0" => Criterion::Healthcare { baseline: 0 },
            "healthcare1" => Criterion::Healthcare { baseline: 1 },
            "conventionality-sup" => Criterion::ConventionalitySup,
            "conventionality-opt" => Criterion::ConventionalityOpt,
            "mixed" => Criterion::Mixed,
            other => return Err(Error::InvalidInput(format!("unknown criterion '{other}'"))),
        })
    }

    /// Conventionality criteria are defined on (a′, l) only.
    pub fn is_conventionality(&self) -> bool {
        matches!(self, Criterion::ConventionalitySup | Criterion::ConventionalityOpt)
    }
}

/// Whether a criterion acts on l-level or on (l, a′)-level bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    L,
    Superoptimal,
}

/// Bounds available to a decision in one stratum.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DecisionInputs {
    /// Intervals on `E(Y^0 | l)`, `E(Y^1 | l)`.
    pub arms: Option<[Interval; 2]>,
    pub mu: Option<f64>,
    /// `value_given_a[a′][a]`: interval on `E(Y^a | A=a′, l)`.
    pub value_given_a: Option<[[Interval; 2]; 2]>,
    /// (l, a′)-CATE intervals.
    pub cate_a: Option<[Interval; 2]>,
}

impl DecisionInputs {
    pub fn l_level(arms: [Interval; 2]) -> Self {
        DecisionInputs { arms: Some(arms), ..Default::default() }
    }

    fn arms(&self) -> Result<[Interval; 2]> {
        self.arms.ok_or_else(|| Error::MissingBounds("l-level arm bounds".into()))
    }

    fn mu(&self) -> Result<f64> {
        self.mu.ok_or_else(|| Error::MissingBounds("E(Y|l)".into()))
    }

    fn values(&self, ap: usize) -> Result<[Interval; 2]> {
        self.value_given_a.map(|v| v[ap]).ok_or_else(|| Error::MissingBounds("(l,a′)-level value bounds".into()))
    }

    fn cate_a(&self, ap: usize) -> Result<Interval> {
        self.cate_a.map(|c| c[ap]).ok_or_else(|| Error::MissingBounds("(l,a′)-CATE bounds".into()))
    }
}

impl From<&InducedStratum> for DecisionInputs {
    fn from(ib: &InducedStratum) -> Self {
        DecisionInputs {
            arms: Some(ib.arms),
            mu: Some(ib.obs.mu),
            value_given_a: Some([0, 1].map(|ap| [ib.value_given_a(0, ap), ib.value_given_a(1, ap)])),
            cate_a: Some(ib.cate),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPolicy {
    pub p_star: f64,
    pub worst_case_regret: f64,
}

/// Minimax-regret randomization for an effect interval.
pub fn mixed_policy(effect: Interval) -> MixedPolicy {
    let (l, u) = (effect.lo, effect.up);
    if l > 0.0 {
        MixedPolicy { p_star: 1.0, worst_case_regret: 0.0 }
    } else if u < 0.0 || u == l {
        MixedPolicy { p_star: 0.0, worst_case_regret: 0.0 }
    } else {
        MixedPolicy { p_star: u / (u - l), worst_case_regret: -l * u / (u - l) }
    }
}

/// Worst-case regret of a deterministic action over an effect interval.
pub fn deterministic_worst_regret(effect: Interval, action: u8) -> f64 {
    if action == 1 {
        (-effect.lo).max(0.0)
    } else {
        effect.up.max(0.0)
    }
}

fn opportunist(effect: Interval) -> u8 {
    if effect.lo > 0.0 {
        1
    } else if effect.up < 0.0 {
        0
    } else {
        u8::from(effect.up.abs() > effect.lo.abs())
    }
}

fn healthcare(effect: Interval, baseline: u8) -> u8 {
    if baseline == 0 {
        u8::from(effect.lo > 0.0)
    } else {
        u8::from(effect.up >= 0.0)
    }
}

/// Action of criterion `c` at natural treatment `a_prime` in one stratum.
pub fn decide(c: Criterion, inputs: &DecisionInputs, a_prime: usize, scope: Scope) -> Result<Action> {
    let bit = |b: u8| Ok(Action::from_bit(b));
    match c {
        Criterion::ConventionalitySup => {
            let e = inputs.cate_a(a_prime)?;
            let ap = a_prime as f64;
            let ind = u8::from((1.0 - ap) * e.lo - ap * e.up > 0.0);
            // (1 − 2a′)·I(·) + a′
            bit(if a_prime == 0 { ind } else { 1 - ind })
        }
        Criterion::ConventionalityOpt => {
            let [b0, b1] = inputs.arms()?;
            let mu = inputs.mu()?;
            bit(if a_prime == 1 {
                1 - u8::from(b0.lo > mu && b1.lo <= b0.up)
            } else {
                u8::from(b1.lo > b0.up.max(mu))
            })
        }
        _ => {
            let (values, effect) = match scope {
                Scope::L => {
                    let arms = inputs.arms()?;
                    (arms, arms[1].minus(&arms[0]))
                }
                Scope::Superoptimal => (inputs.values(a_prime)?, inputs.cate_a(a_prime)?),
            };
            match c {
                Criterion::Optimist => bit(u8::from(values[1].up > values[0].up)),
                Criterion::Pessimist => bit(u8::from(values[1].lo > values[0].lo)),
                Criterion::Opportunist => bit(opportunist(effect)),
                Criterion::Healthcare { baseline } => bit(healthcare(effect, baseline)),
                Criterion::Mixed => {
                    let m = mixed_policy(effect);
                    Ok(if m.p_star == 1.0 {
                        Action::Treat1
                    } else if m.p_star == 0.0 {
                        Action::Treat0
                    } else {
                        Action::Prob(m.p_star)
                    })
                }
                _ => unreachable!(),
            }
        }
    }
}

/// Regime chosen by a criterion over every stratum.
pub fn regime_from_criterion(c: Criterion, scope: Scope, ib: &InducedBounds) -> Result<Regime> {
    let labels: Vec<String> = ib.strata.iter().map(|s| s.obs.label.clone()).collect();
    let mut actions = Vec::with_capacity(labels.len());
    for s in &ib.strata {
        let inputs = DecisionInputs::from(s);
        actions.push([decide(c, &inputs, 0, scope)?, decide(c, &inputs, 1, scope)?]);
    }
    Ok(Regime { labels, actions })
}

/// Regime that treats exactly where the (l, a′)-CATE sign is identified
/// positive, untreated where negative, and ambiguous otherwise.
pub fn identified_regime(ib: &InducedBounds, tau: f64, scope: Scope) -> Regime {
    use crate::interval::Identification as I;
    let labels: Vec<String> = ib.strata.iter().map(|s| s.obs.label.clone()).collect();
    Regime::from_fn(&labels, |s, ap| {
        let st = &ib.strata[s];
        let e = match scope {
            Scope::L => st.cate_l,
            Scope::Superoptimal => st.cate[ap],
        };
        match e.status(tau).kind {
            I::IdentifiedTreat => Action::Treat1,
            I::IdentifiedControl => Action::Treat0,
            I::Ambiguous => Action::Ambiguous,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub label: String,
    /// Healthcare (baseline 0) at a′ = 1 vs optimist at a′ = 1, and the `U0 < E(Y|l)` test.
    pub healthcare_a1: u8,
    pub optimist_a1: u8,
    pub upper0_below_mean: bool,
    /// Healthcare (baseline 0) at a′ = 0 vs pessimist at a′ = 0, and the `L1 > E(Y|l)` test.
    pub healthcare_a0: u8,
    pub pessimist_a0: u8,
    pub lower1_above_mean: bool,
    /// `agree[i][j]` over `Criterion::ALL` (deterministic part) at `a′ = 0, 1`.
    pub pairwise_agree: [[[bool; 7]; 7]; 2],
    pub holds: bool,
}

/// Check the healthcare / optimist / pessimist coincidences on one stratum.
pub fn criteria_equivalence_check(ib: &InducedStratum) -> Result<EquivalenceReport> {
    let inputs = DecisionInputs::from(ib);
    let sup = |c: Criterion, ap: usize| -> Result<Action> { decide(c, &inputs, ap, Scope::Superoptimal) };
    let b = |a: Action| a.bit().unwrap_or(2);
    let hc = Criterion::Healthcare { baseline: 0 };
    let healthcare_a1 = b(sup(hc, 1)?);
    let optimist_a1 = b(sup(Criterion::Optimist, 1)?);
    let healthcare_a0 = b(sup(hc, 0)?);
    let pessimist_a0 = b(sup(Criterion::Pessimist, 0)?);
    let upper0_below_mean = ib.arms[0].up < ib.obs.mu;
    let lower1_above_mean = ib.arms[1].lo > ib.obs.mu;
    let mut pairwise_agree = [[[false; 7]; 7]; 2];
    for ap in 0..2 {
        let acts: Vec<Action> = Criterion::ALL.iter().map(|c| sup(*c, ap)).collect::<Result<_>>()?;
        for i in 0..7 {
            for j in 0..7 {
                pairwise_agree[ap][i][j] = acts[i] == acts[j];
            }
        }
    }
    let holds = ib.clipped
        || (healthcare_a1 == optimist_a1
            && healthcare_a1 == u8::from(upper0_below_mean)
            && healthcare_a0 == pessimist_a0
            && healthcare_a0 == u8::from(lower1_above_mean));
    Ok(EquivalenceReport {
        label: ib.obs.label.clone(),
        healthcare_a1,
        optimist_a1,
        upper0_below_mean,
        healthcare_a0,
        pessimist_a0,
        lower1_above_mean,
        pairwise_agree,
        holds,
    })
}

/// Interval on `E(Y^g | l)` for each stratum.
pub fn regime_value_bounds_by_stratum(
    g: &Regime,
    law: &ObservationalLaw,
    arm_bounds: &[[Interval; 2]],
) -> Result<Vec<Interval>> {
    if arm_bounds.len() != law.strata.len() {
        return Err(Error::MissingBounds(format!("{} arm-bound pairs for {} strata", arm_bounds.len(), law.strata.len())));
    }
    let labels: Vec<String> = law.strata.iter().map(|s| s.label.clone()).collect();
    let g = g.aligned_to(&labels)?;
    let mut out = Vec::with_capacity(labels.len());
    for (s, obs) in law.strata.iter().enumerate() {
        let ib = induce(obs, arm_bounds[s])?;
        let mut lo = 0.0;
        let mut up = 0.0;
        for ap in 0..2 {
            let p = g.get(s, ap).p_treat().ok_or_else(|| {
                Error::MissingBounds(format!("regime is ambiguous at (a′={ap}, {})", obs.label))
            })?;
            let v1 = ib.value_given_a(1, ap);
            let v0 = ib.value_given_a(0, ap);
            lo += obs.pa[ap] * (p * v1.lo + (1.0 - p) * v0.lo);
            up += obs.pa[ap] * (p * v1.up + (1.0 - p) * v0.up);
        }
        out.push(Interval::new(lo, up));
    }
    Ok(out)
}

/// Interval on `E(Y^g)` from the decomposition over (A, L).
pub fn regime_value_bounds(g: &Regime, law: &ObservationalLaw, arm_bounds: &[[Interval; 2]]) -> Result<Interval> {
    let per = regime_value_bounds_by_stratum(g, law, arm_bounds)?;
    let (mut lo, mut up) = (0.0, 0.0);
    for (s, i) in law.strata.iter().zip(&per) {
        lo += s.weight * i.lo;
        up += s.weight * i.up;
    }
    Ok(Interval::new(lo, up))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::StratumObs;

    fn stratum(p1: f64, mu: [f64; 2], arms: [Interval; 2]) -> InducedStratum {
        induce(&StratumObs::new("l", 1.0, p1, mu).unwrap(), arms).unwrap()
    }

    #[test]
    fn mixed_policy_branches() {
        let m = mixed_policy(Interval::new(-1.0, 1.0));
        assert_eq!((m.p_star, m.worst_case_regret), (0.5, 0.5));
        let m = mixed_policy(Interval::new(0.2, 0.6));
        assert_eq!((m.p_star, m.worst_case_regret), (1.0, 0.0));
        let m = mixed_policy(Interval::new(-0.6, -0.1));
        assert_eq!((m.p_star, m.worst_case_regret), (0.0, 0.0));
    }

    #[test]
    fn vacuous_bounds_follow_natural_treatment() {
        let inputs = DecisionInputs { cate_a: Some([Interval::new(-1.0, 1.0); 2]), ..Default::default() };
        for ap in 0..2 {
            let a = decide(Criterion::ConventionalitySup, &inputs, ap, Scope::Superoptimal).unwrap();
            assert_eq!(a.bit(), Some(ap as u8));
        }
    }

    #[test]
    fn identified_sign_unites_criteria() {
        // E(Y^1|l) well above E(Y^0|l): everything positive
        let ib = stratum(0.5, [0.2, 0.8], [Interval::new(0.15, 0.25), Interval::new(0.75, 0.85)]);
        assert!(ib.cate[0].lo > 0.0 && ib.cate[1].lo > 0.0 && ib.cate_l.lo > 0.0);
        let inputs = DecisionInputs::from(&ib);
        for c in Criterion::ALL {
            for ap in 0..2 {
                for scope in [Scope::L, Scope::Superoptimal] {
                    assert_eq!(decide(c, &inputs, ap, scope).unwrap(), Action::Treat1, "{c:?} {ap} {scope:?}");
                }
            }
        }
    }

    #[test]
    fn missing_bounds_reported() {
        let inputs = DecisionInputs::l_level([Interval::new(0.1, 0.2), Interval::new(0.3, 0.4)]);
        assert!(decide(Criterion::Optimist, &inputs, 0, Scope::L).is_ok());
        assert!(matches!(decide(Criterion::Optimist, &inputs, 0, Scope::Superoptimal), Err(Error::MissingBounds(_))));
    }

    #[test]
    fn opportunist_tie_goes_to_control() {
        let inputs = DecisionInputs::l_level([Interval::new(0.3, 0.5), Interval::new(0.3, 0.5)]);
        assert_eq!(decide(Criterion::Opportunist, &inputs, 0, Scope::L).unwrap(), Action::Treat0);
    }

    #[test]
    fn criterion_names_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(Criterion::parse(&c.name()).unwrap(), c);
        }
        assert!(Criterion::parse("nope").is_err());
    }

    #[test]
    fn observed_regime_value_is_point() {
        let law = ObservationalLaw::new(vec![StratumObs::new("l", 1.0, 0.4, [0.3, 0.6]).unwrap()]).unwrap();
        let g = Regime::observed(&["l".to_string()]);
        let v = regime_value_bounds(&g, &law, &[[Interval::new(0.1, 0.7), Interval::new(0.2, 0.9)]]).unwrap();
        assert_eq!(v.width(), 0.0);
        assert!((v.lo - law.mean_outcome()).abs() < 1e-15);
    }
}
