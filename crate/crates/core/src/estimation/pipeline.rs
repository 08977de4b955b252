//! Split-sample regime learning with cross-fitted value bounds.

use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_mean_ci, EstimateWithCI};
use super::dataset::Dataset;
use super::nuisance::{fit_nuisances, FittedNuisance, Nuisance, NuisanceSpec};
use super::onestep::{
    all_term_values, levis_bound_values, observed_policy, overlap_report, superopt_value_values, BoundTarget, Estimand, IndexedRegime,
    InferenceOptions, OverlapReport, Policy, CLIP_WARN_FRACTION,
};
use super::regression::{Design, FeatureMap};
use crate::bounds_bp::{bp_bounds, Side};
use crate::error::{Error, Result};
use crate::induced::induce;
use crate::law::StratumObs;
use crate::regime::{Action, Regime};
use crate::regimes::{decide, Criterion, DecisionInputs, Scope};

/// Estimation settings, readable from a JSON config file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    pub epsilon: f64,
    pub boot: usize,
    pub folds: usize,
    /// Fraction of rows used to learn the regime.
    pub split: f64,
    pub seed: u64,
    pub alpha: f64,
    pub max_clip_fraction: f64,
    /// Nuisance design; chosen from the data when absent.
    pub design: Option<Design>,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig { epsilon: 0.01, boot: 200, folds: 10, split: 0.2, seed: 0, alpha: 0.05, max_clip_fraction: 0.25, design: None }
    }
}

impl EstimationConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: EstimationConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(0.0..0.5).contains(&self.epsilon) {
            return bad(format!("epsilon {} not in [0, 0.5)", self.epsilon));
        }
        if self.boot < super::bootstrap::MIN_BOOT {
            return bad(format!("boot {} < {}", self.boot, super::bootstrap::MIN_BOOT));
        }
        if self.folds < 2 {
            return bad(format!("folds {} < 2", self.folds));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return bad(format!("split {} not in (0, 1)", self.split));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return bad(format!("alpha {} not in (0, 0.5)", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.max_clip_fraction) {
            return bad(format!("max_clip_fraction {} not in [0, 1]", self.max_clip_fraction));
        }
        Ok(())
    }

    pub fn inference(&self) -> InferenceOptions {
        InferenceOptions { alpha: self.alpha, boot: self.boot, seed: self.seed, max_clip_fraction: self.max_clip_fraction }
    }

    pub fn nuisance_spec(&self, data: &Dataset) -> NuisanceSpec {
        NuisanceSpec::new(self.design.unwrap_or_else(|| Design::auto(data)), self.epsilon)
    }
}

/// Which regime the pipeline evaluates.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    /// Everyone keeps their natural treatment.
    Observed,
    /// A fixed regime over strata indexed by `x1`.
    Fixed(Regime),
    /// Learn the regime from estimated bounds with a decision criterion.
    Criterion { criterion: Criterion, scope: Scope },
}

impl PolicySpec {
    pub fn name(&self) -> String {
        match self {
            PolicySpec::Observed => "observed".into(),
            PolicySpec::Fixed(_) => "fixed".into(),
            PolicySpec::Criterion { criterion, .. } => criterion.name(),
        }
    }
}

/// Criterion applied to plug-in bounds computed from fitted nuisances at `x`.
#[derive(Clone, Debug)]
pub struct LearnedPolicy {
    pub nuis: FittedNuisance,
    pub criterion: Criterion,
    pub scope: Scope,
}

impl LearnedPolicy {
    pub fn action(&self, x: &[f64], a_prime: usize) -> Result<Action> {
        let n = &self.nuis;
        let arms = bp_bounds(&n.p_table(x));
        let obs = StratumObs::new("x", 1.0, n.pi_a(1, x), [n.mu_a(0, x), n.mu_a(1, x)])?;
        let ib = induce(&obs, arms)?;
        decide(self.criterion, &DecisionInputs::from(&ib), a_prime, self.scope)
    }
}

impl Policy for LearnedPolicy {
    fn p_treat(&self, x: &[f64], a_prime: usize) -> f64 {
        match self.action(x, a_prime).map(|a| a.p_treat()) {
            Ok(Some(p)) => p,
            other => {
                debug!("criterion undefined at {x:?} ({other:?}); keeping natural treatment");
                a_prime as f64
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineDiagnostics {
    pub overlap: OverlapReport,
    /// Fraction of strata whose l-CATE bound nearest zero is within 2 SE of it
    /// (one-hot designs only).
    pub near_exceptional_fraction: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub policy: String,
    /// Learned regime as JSON when the design has discrete strata.
    pub learned: Option<serde_json::Value>,
    /// Mean treatment probability among evaluation rows, by natural treatment.
    pub treat_fraction: [f64; 2],
    pub lower: EstimateWithCI,
    pub upper: EstimateWithCI,
    pub n_train: usize,
    pub n_eval: usize,
    pub folds: usize,
    pub diagnostics: PipelineDiagnostics,
}

pub const MIN_PIPELINE_ROWS: usize = 100;

/// Fold labels `0..k` for `n` rows, a seeded balanced assignment.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f01d));
    let mut fold = vec![0; n];
    for (j, &i) in perm.iter().enumerate() {
        fold[i] = j % k;
    }
    fold
}

fn learned_regime(policy: &LearnedPolicy) -> Option<Regime> {
    let fm = &policy.nuis.features;
    let xs: Vec<(String, Vec<f64>)> = match fm.design {
        Design::Intercept => vec![("all".into(), vec![0.0; fm.k])],
        Design::OneHot { column } => fm
            .levels
            .iter()
            .map(|&l| {
                let mut x = vec![0.0; fm.k];
                x[column] = l;
                (format!("{l}"), x)
            })
            .collect(),
        Design::Linear => return None,
    };
    let labels: Vec<String> = xs.iter().map(|(l, _)| l.clone()).collect();
    Some(Regime::from_fn(&labels, |s, ap| policy.action(&xs[s].1, ap).unwrap_or(Action::Ambiguous)))
}

struct FoldOut {
    rows: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    ate: [Vec<f64>; 2],
    overlap: OverlapReport,
    warnings: Vec<String>,
}

/// Learn a regime on a `split` fraction and estimate its value bounds on the
/// rest with `folds`-fold cross-fitting.
///
/// Fixed and observed regimes need no learning, so all rows are used for evaluation.
pub fn split_pipeline(data: &Dataset, spec: &PolicySpec, cfg: &EstimationConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    if data.len() < MIN_PIPELINE_ROWS {
        return Err(Error::InsufficientData(format!("{} rows; the pipeline needs at least {MIN_PIPELINE_ROWS}", data.len())));
    }
    let nspec = cfg.nuisance_spec(data);
    let mut perm: Vec<usize> = (0..data.len()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut warnings = Vec::new();

    let learned_policy;
    let indexed;
    let (policy, learned, eval_rows): (&dyn Policy, Option<Regime>, Vec<usize>) = match spec {
        PolicySpec::Observed => (&observed_policy, None, perm),
        PolicySpec::Fixed(g) => {
            indexed = IndexedRegime::new(g)?;
            (&indexed, Some(g.clone()), perm)
        }
        PolicySpec::Criterion { criterion, scope } => {
            let n_train = ((cfg.split * data.len() as f64).round() as usize).clamp(1, data.len() - 1);
            let mut train_rows = perm[..n_train].to_vec();
            train_rows.sort_unstable();
            let nuis = fit_nuisances(&data.subset(&train_rows), &nspec)?;
            warnings.extend(nuis.diagnostics.warnings.iter().map(|w| format!("regime fit: {w}")));
            learned_policy = LearnedPolicy { nuis, criterion: *criterion, scope: *scope };
            let regime = learned_regime(&learned_policy);
            (&learned_policy, regime, perm[n_train..].to_vec())
        }
    };
    let n_eval = eval_rows.len();
    let n_train = data.len() - n_eval;
    let eval = data.subset(&eval_rows);
    let fold = fold_assignment(n_eval, cfg.folds, cfg.seed);

    let outs = (0..cfg.folds)
        .into_par_iter()
        .map(|f| -> Result<FoldOut> {
            let (rows, rest): (Vec<usize>, Vec<usize>) = (0..n_eval).partition(|&i| fold[i] == f);
            let nuis = fit_nuisances(&eval.subset(&rest), &nspec)?;
            let part = eval.subset(&rows);
            let ate = [Side::Lower, Side::Upper].map(|s| levis_bound_values(&part, &nuis, BoundTarget::new(s, Estimand::Ate)));
            Ok(FoldOut {
                lower: superopt_value_values(&part, &nuis, policy, Side::Lower),
                upper: superopt_value_values(&part, &nuis, policy, Side::Upper),
                ate,
                overlap: overlap_report(&part, &nuis),
                warnings: nuis.diagnostics.warnings.iter().map(|w| format!("fold {f}: {w}")).collect(),
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut lower = Vec::with_capacity(n_eval);
    let mut upper = Vec::with_capacity(n_eval);
    let mut ate_rows: Vec<(usize, f64, f64)> = Vec::with_capacity(n_eval);
    let mut overlap = OverlapReport::default();
    for o in &outs {
        lower.extend_from_slice(&o.lower);
        upper.extend_from_slice(&o.upper);
        let w = o.rows.len() as f64 / n_eval as f64;
        overlap.lambda_clip_fraction += w * o.overlap.lambda_clip_fraction;
        overlap.pi_clip_fraction += w * o.overlap.pi_clip_fraction;
        for (j, &r) in o.rows.iter().enumerate() {
            ate_rows.push((r, o.ate[0][j], o.ate[1][j]));
        }
        warnings.extend(o.warnings.iter().cloned());
    }
    let worst = overlap.lambda_clip_fraction.max(overlap.pi_clip_fraction);
    if worst > cfg.max_clip_fraction {
        return Err(Error::OverlapViolation(format!("{:.1}% of propensities outside [ε, 1−ε]", 100.0 * worst)));
    }
    if worst > CLIP_WARN_FRACTION {
        warnings.push(format!("{:.1}% of propensities clipped", 100.0 * worst));
    }

    let opts = cfg.inference();
    let lo = bootstrap_mean_ci(&lower, opts.boot, opts.alpha, opts.seed)?;
    let up = bootstrap_mean_ci(&upper, opts.boot, opts.alpha, opts.seed)?;

    let mut treat = [0.0; 2];
    let mut count = [0usize; 2];
    for i in 0..n_eval {
        let ap = eval.a[i] as usize;
        treat[ap] += policy.p_treat(eval.row(i), ap);
        count[ap] += 1;
    }
    let treat_fraction = [0, 1].map(|a| if count[a] > 0 { treat[a] / count[a] as f64 } else { f64::NAN });

    let near_exceptional_fraction = near_exceptional(&eval, &ate_rows, &nspec)?;
    Ok(PipelineOutput {
        policy: spec.name(),
        learned: learned.map(|g| g.to_json()),
        treat_fraction,
        lower: lo,
        upper: up,
        n_train,
        n_eval,
        folds: cfg.folds,
        diagnostics: PipelineDiagnostics { overlap, near_exceptional_fraction, warnings },
    })
}

/// Evaluate `f` on each fold with nuisances fitted on the other folds;
/// results come back in row order.
pub fn crossfit<T, F>(data: &Dataset, cfg: &EstimationConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Dataset, &FittedNuisance) -> Vec<T> + Sync,
{
    cfg.validate()?;
    let nspec = cfg.nuisance_spec(data);
    let fold = fold_assignment(data.len(), cfg.folds, cfg.seed);
    let parts = (0..cfg.folds)
        .into_par_iter()
        .map(|k| -> Result<(Vec<usize>, Vec<T>)> {
            let (rows, rest): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| fold[i] == k);
            let nuis = fit_nuisances(&data.subset(&rest), &nspec)?;
            let vals = f(&data.subset(&rows), &nuis);
            Ok((rows, vals))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut slots: Vec<Option<T>> = (0..data.len()).map(|_| None).collect();
    for (rows, vals) in parts {
        for (r, v) in rows.into_iter().zip(vals) {
            slots[r] = Some(v);
        }
    }
    Ok(slots.into_iter().map(|v| v.expect("folds partition the rows")).collect())
}

/// Cross-fitted one-step estimates of every candidate bound term with bootstrap SEs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermEstimates {
    /// `est[a][side][j]`, side 0 lower, 1 upper.
    pub est: [[[f64; 4]; 2]; 2],
    pub se: [[[f64; 4]; 2]; 2],
    /// Per-row values, `rows[i][a][side][j]`.
    #[serde(skip)]
    pub rows: Vec<[[[f64; 4]; 2]; 2]>,
}

pub fn term_estimates(data: &Dataset, cfg: &EstimationConfig) -> Result<TermEstimates> {
    let rows = crossfit(data, cfg, |part, nuis| (0..part.len()).map(|i| all_term_values(part, i, nuis)).collect())?;
    let mut est = [[[0.0; 4]; 2]; 2];
    let mut se = [[[0.0; 4]; 2]; 2];
    for a in 0..2 {
        for s in 0..2 {
            for j in 0..4 {
                let v: Vec<f64> = rows.iter().map(|r| r[a][s][j]).collect();
                let e = bootstrap_mean_ci(&v, cfg.boot, cfg.alpha, cfg.seed)?;
                est[a][s][j] = e.point;
                se[a][s][j] = e.se;
            }
        }
    }
    Ok(TermEstimates { est, se, rows })
}

fn near_exceptional(eval: &Dataset, ate_rows: &[(usize, f64, f64)], nspec: &NuisanceSpec) -> Result<Option<f64>> {
    if !matches!(nspec.design, Design::OneHot { .. }) {
        return Ok(None);
    }
    let fm = FeatureMap::fit(nspec.design, eval)?;
    let mut groups: Vec<[Vec<f64>; 2]> = vec![[vec![], vec![]]; fm.levels.len()];
    for &(r, lo, up) in ate_rows {
        if let Some(l) = fm.level_of(eval.row(r)) {
            groups[l][0].push(lo);
            groups[l][1].push(up);
        }
    }
    let z = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
        m.abs() / (sd / n.sqrt()).max(f64::MIN_POSITIVE)
    };
    let used: Vec<&[Vec<f64>; 2]> = groups.iter().filter(|g| g[0].len() >= 2).collect();
    if used.is_empty() {
        return Ok(None);
    }
    let near = used.iter().filter(|g| z(&g[0]).min(z(&g[1])) < 2.0).count();
    Ok(Some(near as f64 / used.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{sample, ResponseTypeLaw};

    #[test]
    fn folds_partition_rows() {
        let f = fold_assignment(103, 10, 4);
        let mut counts = [0; 10];
        for &k in &f {
            counts[k] += 1;
        }
        assert!(counts.iter().all(|&c| c == 10 || c == 11));
        assert_eq!(counts.iter().sum::<usize>(), 103);
    }

    #[test]
    fn config_defaults_and_unknown_fields() {
        let c = EstimationConfig::from_json_str(r#"{"seed": 7, "boot": 60}"#).unwrap();
        assert_eq!((c.seed, c.boot, c.folds), (7, 60, 10));
        assert!(EstimationConfig::from_json_str(r#"{"bogus": 1}"#).is_err());
        assert!(EstimationConfig::from_json_str(r#"{"folds": 1}"#).is_err());
    }

    #[test]
    fn observed_regime_value_is_mean_and_reproducible() {
        let mut pi = [[1.0 / 16.0; 4]; 4];
        pi[1][1] = 0.1;
        pi[2][2] = 0.025;
        let d = sample(&ResponseTypeLaw::single(pi, 0.5), 400, 3).unwrap();
        let cfg = EstimationConfig { boot: 60, ..Default::default() };
        let out = split_pipeline(&d, &PolicySpec::Observed, &cfg).unwrap();
        assert!((out.lower.point - d.mean_y()).abs() < 1e-12);
        assert!((out.upper.point - d.mean_y()).abs() < 1e-12);
        assert_eq!(out, split_pipeline(&d, &PolicySpec::Observed, &cfg).unwrap());
    }
}
