//! Influence functions and one-step estimators of Balke-Pearl bound
//! functionals, regime-value bounds and the sign statistic.

use log::warn;
use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_mean_ci, EstimateWithCI};
use super::dataset::Dataset;
use super::nuisance::Nuisance;
use crate::bounds_bp::{lower_terms, theta_decomposition, upper_terms, Side};
use crate::error::{Error, Result};
use crate::interval::Identification;
use crate::law::PTable;
use crate::regime::Regime;

/// Resampling and overlap settings shared by the estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceOptions {
    pub alpha: f64,
    pub boot: usize,
    pub seed: u64,
    /// Clip fraction above which estimation stops with an overlap error.
    pub max_clip_fraction: f64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions { alpha: 0.05, boot: 200, seed: 0, max_clip_fraction: 0.25 }
    }
}

/// Clip fraction above which a warning is emitted.
pub const CLIP_WARN_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub lambda_clip_fraction: f64,
    pub pi_clip_fraction: f64,
}

/// Fractions of rows whose raw `λ̂` or `π̂` fall outside `[ε, 1−ε]`.
pub fn overlap_report(data: &Dataset, nuis: &dyn Nuisance) -> OverlapReport {
    let eps = nuis.epsilon();
    let out = |v: f64| !(eps..=1.0 - eps).contains(&v);
    let n = data.len().max(1) as f64;
    let (mut cl, mut cp) = (0usize, 0usize);
    for i in 0..data.len() {
        let x = data.row(i);
        cl += usize::from(out(nuis.lambda_raw(x)));
        cp += usize::from(out(nuis.pi_raw(x)));
    }
    OverlapReport { lambda_clip_fraction: cl as f64 / n, pi_clip_fraction: cp as f64 / n }
}

fn check_overlap(data: &Dataset, nuis: &dyn Nuisance, opts: &InferenceOptions, with_pi: bool) -> Result<OverlapReport> {
    let r = overlap_report(data, nuis);
    let worst = if with_pi { r.lambda_clip_fraction.max(r.pi_clip_fraction) } else { r.lambda_clip_fraction };
    if worst > opts.max_clip_fraction {
        return Err(Error::OverlapViolation(format!(
            "{:.1}% of λ̂ and {:.1}% of π̂ outside [ε, 1−ε] (tolerated {:.1}%)",
            100.0 * r.lambda_clip_fraction,
            100.0 * r.pi_clip_fraction,
            100.0 * opts.max_clip_fraction
        )));
    }
    if worst > CLIP_WARN_FRACTION {
        warn!("{:.1}% of propensities clipped", 100.0 * worst);
    }
    Ok(r)
}

/// Influence pieces `ψ_{ya.z} = I(Z=z)/λ_z · (I(Y=y, A=a) − p_{ya.z})`.
pub fn psi_cells(y: u8, a: u8, z: u8, p: &PTable, lambda: [f64; 2]) -> PTable {
    let mut out = [[[0.0; 2]; 2]; 2];
    let zi = z as usize;
    for yy in 0..2 {
        for aa in 0..2 {
            let hit = f64::from(u8::from(yy == y as usize && aa == a as usize));
            out[yy][aa][zi] = (hit - p[yy][aa][zi]) / lambda[zi];
        }
    }
    out
}

/// Selected bound term at one row: value `θ_d(x)` and centered influence `φ_d(O)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPiece {
    pub theta: f64,
    pub phi: f64,
    pub d: usize,
}

impl BoundPiece {
    /// Uncentered influence value `θ_d + φ_d`.
    pub fn value(&self) -> f64 {
        self.theta + self.phi
    }
}

/// Both arms and sides evaluated at row `i`: `pieces[a][side]` with side 0 lower, 1 upper.
pub fn bound_pieces(data: &Dataset, i: usize, nuis: &dyn Nuisance) -> [[BoundPiece; 2]; 2] {
    let x = data.row(i);
    let p = nuis.p_table(x);
    let lambda = [nuis.lambda_z(0, x), nuis.lambda_z(1, x)];
    let psi = psi_cells(data.y[i], data.a[i], data.z[i], &p, lambda);
    let t = theta_decomposition(&p);
    [0, 1].map(|a| {
        let lo = BoundPiece { theta: t.lower(a), phi: lower_terms(a)[t.d_l[a]].linear(&psi), d: t.d_l[a] };
        let up = BoundPiece { theta: t.upper(a), phi: upper_terms(a)[t.d_u[a]].linear(&psi), d: t.d_u[a] };
        [lo, up]
    })
}

/// Uncentered influence values `θ_j + φ_j` of every candidate term at row `i`:
/// `out[a][side][j]` with side 0 lower, 1 upper.
pub fn all_term_values(data: &Dataset, i: usize, nuis: &dyn Nuisance) -> [[[f64; 4]; 2]; 2] {
    let x = data.row(i);
    let p = nuis.p_table(x);
    let lambda = [nuis.lambda_z(0, x), nuis.lambda_z(1, x)];
    let psi = psi_cells(data.y[i], data.a[i], data.z[i], &p, lambda);
    [0, 1].map(|a| {
        [lower_terms(a), upper_terms(a)].map(|terms| [0, 1, 2, 3].map(|j| terms[j].eval(&p) + terms[j].linear(&psi)))
    })
}

fn side_ix(side: Side) -> usize {
    match side {
        Side::Lower => 0,
        Side::Upper => 1,
    }
}

fn flip(side: Side) -> Side {
    match side {
        Side::Lower => Side::Upper,
        Side::Upper => Side::Lower,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimand {
    Ey0,
    Ey1,
    Ate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTarget {
    pub side: Side,
    pub estimand: Estimand,
}

impl BoundTarget {
    pub fn new(side: Side, estimand: Estimand) -> Self {
        BoundTarget { side, estimand }
    }
}

fn target_value(pcs: &[[BoundPiece; 2]; 2], t: BoundTarget, f: impl Fn(&BoundPiece) -> f64) -> f64 {
    let s = side_ix(t.side);
    match t.estimand {
        Estimand::Ey0 => f(&pcs[0][s]),
        Estimand::Ey1 => f(&pcs[1][s]),
        Estimand::Ate => f(&pcs[1][s]) - f(&pcs[0][side_ix(flip(t.side))]),
    }
}

/// Per-row uncentered influence values whose mean estimates the bound.
pub fn levis_bound_values(data: &Dataset, nuis: &dyn Nuisance, target: BoundTarget) -> Vec<f64> {
    (0..data.len()).map(|i| target_value(&bound_pieces(data, i, nuis), target, BoundPiece::value)).collect()
}

/// Plug-in bound `P_n θ_d̂(X)` without the influence correction.
pub fn plugin_bound(data: &Dataset, nuis: &dyn Nuisance, target: BoundTarget) -> f64 {
    let n = data.len() as f64;
    (0..data.len()).map(|i| target_value(&bound_pieces(data, i, nuis), target, |p| p.theta)).sum::<f64>() / n
}

/// One-step estimate of a Balke-Pearl bound on `E(Y^0)`, `E(Y^1)` or the ATE.
pub fn levis_bound_estimate(data: &Dataset, nuis: &dyn Nuisance, target: BoundTarget, opts: &InferenceOptions) -> Result<EstimateWithCI> {
    check_overlap(data, nuis, opts, false)?;
    bootstrap_mean_ci(&levis_bound_values(data, nuis, target), opts.boot, opts.alpha, opts.seed)
}

/// A treatment rule evaluated at covariates and natural treatment value.
pub trait Policy: Sync {
    /// Probability of assigning treatment 1.
    fn p_treat(&self, x: &[f64], a_prime: usize) -> f64;
}

impl<F: Fn(&[f64], usize) -> f64 + Sync> Policy for F {
    fn p_treat(&self, x: &[f64], a_prime: usize) -> f64 {
        self(x, a_prime)
    }
}

/// Regime over strata indexed by `x1` (or a single stratum).
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedRegime {
    probs: Vec<[f64; 2]>,
}

impl IndexedRegime {
    pub fn new(g: &Regime) -> Result<Self> {
        let probs = g
            .actions
            .iter()
            .enumerate()
            .map(|(s, acts)| {
                let p = |a: usize| {
                    acts[a].p_treat().ok_or_else(|| Error::InvalidInput(format!("regime is not total at stratum {} a′={a}", g.labels[s])))
                };
                Ok([p(0)?, p(1)?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IndexedRegime { probs })
    }
}

impl Policy for IndexedRegime {
    fn p_treat(&self, x: &[f64], a_prime: usize) -> f64 {
        let s = if self.probs.len() == 1 { 0 } else { x[0] as usize };
        self.probs[s][a_prime]
    }
}

/// The regime that keeps everyone's natural treatment.
pub fn observed_policy(_x: &[f64], a_prime: usize) -> f64 {
    a_prime as f64
}

/// Per-row values whose mean is the one-step bound on `E(Y^g)`:
/// same-arm rows contribute `Y·I(A=a′)`, switched rows contribute
/// `φ(1−a′) − Y·I(A=1−a′)`, the cross-arm mass implied by the arm bound.
pub fn superopt_value_values(data: &Dataset, nuis: &dyn Nuisance, g: &dyn Policy, side: Side) -> Vec<f64> {
    let s = side_ix(side);
    (0..data.len())
        .map(|i| {
            let x = data.row(i);
            let (y, a) = (data.y[i] as f64, data.a[i] as usize);
            let mut pcs = None;
            let mut v = 0.0;
            for ap in 0..2 {
                let pt = g.p_treat(x, ap);
                let keep = if ap == 1 { pt } else { 1.0 - pt };
                if keep > 0.0 && a == ap {
                    v += keep * y;
                }
                if keep < 1.0 {
                    let pcs = pcs.get_or_insert_with(|| bound_pieces(data, i, nuis));
                    let other = 1 - ap;
                    let ind_other = f64::from(u8::from(a == other));
                    v += (1.0 - keep) * (pcs[other][s].value() - y * ind_other);
                }
            }
            v
        })
        .collect()
}

/// One-step estimate of the lower or upper bound on the value of regime `g`.
pub fn superopt_value_onestep(data: &Dataset, nuis: &dyn Nuisance, g: &dyn Policy, side: Side, opts: &InferenceOptions) -> Result<EstimateWithCI> {
    check_overlap(data, nuis, opts, true)?;
    bootstrap_mean_ci(&superopt_value_values(data, nuis, g, side), opts.boot, opts.alpha, opts.seed)
}

/// Cross-arm functional `Ψ(a′, x) = (θ(1−a′, x) − μ_{1−a′} π_{1−a′}) / π_{a′}`
/// and its efficient influence function, per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossArmValues {
    pub psi: Vec<f64>,
    pub psi_eff: Vec<f64>,
}

pub fn cross_arm_values(data: &Dataset, nuis: &dyn Nuisance, a_prime: usize, side: Side) -> Result<CrossArmValues> {
    let other = 1 - a_prime;
    let s = side_ix(side);
    let mut out = CrossArmValues { psi: Vec::with_capacity(data.len()), psi_eff: Vec::with_capacity(data.len()) };
    for i in 0..data.len() {
        let x = data.row(i);
        let (pi_ap, pi_o) = (nuis.pi_a(a_prime, x), nuis.pi_a(other, x));
        if pi_ap <= 0.0 {
            return Err(Error::PositivityViolation(format!("P(A={a_prime}|x) = 0 at row {i}")));
        }
        let mu_o = nuis.mu_a(other, x);
        let pc = bound_pieces(data, i, nuis)[other][s];
        let psi = (pc.theta - mu_o * pi_o) / pi_ap;
        let (y, a) = (data.y[i] as f64, data.a[i] as usize);
        let y_other = y * f64::from(u8::from(a == other));
        let ind_ap = f64::from(u8::from(a == a_prime));
        let eff = (pc.phi - (y_other - mu_o * pi_o)) / pi_ap - psi * (ind_ap - pi_ap) / pi_ap;
        out.psi.push(psi);
        out.psi_eff.push(eff);
    }
    Ok(out)
}

/// One-step estimate of `E[Ψ(a′, X)]`, a bound on `E(Y^{1−a′} | A=a′)` averaged over `x`.
pub fn cross_arm_onestep(data: &Dataset, nuis: &dyn Nuisance, a_prime: usize, side: Side, opts: &InferenceOptions) -> Result<EstimateWithCI> {
    check_overlap(data, nuis, opts, true)?;
    let v = cross_arm_values(data, nuis, a_prime, side)?;
    let vals: Vec<f64> = v.psi.iter().zip(&v.psi_eff).map(|(a, b)| a + b).collect();
    bootstrap_mean_ci(&vals, opts.boot, opts.alpha, opts.seed)
}

/// Sign statistic `E(Y) − E[ψ(a′, X)]` with its report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub estimate: EstimateWithCI,
    pub a_prime: usize,
    pub side: Side,
    /// Natural-treatment group whose superoptimal action the statistic speaks to.
    pub group: usize,
    pub status: Identification,
    /// Identified superoptimal action for `group`, if any.
    pub action: Option<u8>,
}

/// Per-row values of `Ê(Y)·1 − θ̂ + (Y − Ê(Y|x) − φ̂)` before averaging; the
/// first two terms are plug-ins.
pub fn sign_values(data: &Dataset, nuis: &dyn Nuisance, a_prime: usize, side: Side) -> Vec<f64> {
    let s = side_ix(side);
    (0..data.len())
        .map(|i| {
            let x = data.row(i);
            let pc = bound_pieces(data, i, nuis)[a_prime][s];
            let mu = nuis.mu(x);
            mu - pc.theta + (data.y[i] as f64 - mu - pc.phi)
        })
        .collect()
}

/// One-step estimate of `E(Y) − E[ψ(a′, X)]` where `ψ` is the chosen bound on `E(Y^{a′} | x)`.
///
/// A positive upper-side statistic means the natural treatment `1−a′`
/// beats switching to `a′`; a negative lower-side statistic means switching wins.
pub fn sign_onestep(data: &Dataset, nuis: &dyn Nuisance, a_prime: usize, side: Side, opts: &InferenceOptions) -> Result<SignReport> {
    check_overlap(data, nuis, opts, false)?;
    let estimate = bootstrap_mean_ci(&sign_values(data, nuis, a_prime, side), opts.boot, opts.alpha, opts.seed)?;
    let group = 1 - a_prime;
    let (status, action) = match side {
        Side::Upper if estimate.ci_lo > 0.0 => (Identification::from_action(group as u8), Some(group as u8)),
        Side::Lower if estimate.ci_up < 0.0 => (Identification::from_action(a_prime as u8), Some(a_prime as u8)),
        _ => (Identification::Ambiguous, None),
    };
    Ok(SignReport { estimate, a_prime, side, group, status, action })
}
