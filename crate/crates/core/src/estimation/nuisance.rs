//! Nuisance functions of the observed law, fitted or taken from a known law.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::regression::{check_rank, fit_logistic, fit_softmax, Design, FeatureMap, FitInfo, IrlsOptions, SoftmaxModel};
use crate::error::{Error, Result};
use crate::law::{PTable, StratifiedIVLaw};

/// Conditional nuisance functions evaluated at covariates `x`.
///
/// Implement this to plug in an arbitrary regressor.
pub trait Nuisance: Sync {
    /// `p[y][a][z] = P(Y=y, A=a | Z=z, x)`.
    fn p_table(&self, x: &[f64]) -> PTable;
    /// Unclipped `P(Z=1 | x)`.
    fn lambda_raw(&self, x: &[f64]) -> f64;
    /// Unclipped `P(A=1 | x)`.
    fn pi_raw(&self, x: &[f64]) -> f64;
    /// `E(Y | A=a, x)`.
    fn mu_a(&self, a: usize, x: &[f64]) -> f64;
    /// `E(Y | x)`.
    fn mu(&self, x: &[f64]) -> f64;
    /// Propensity clipping level.
    fn epsilon(&self) -> f64;

    /// `P(Z=z | x)` clipped to `[ε, 1−ε]`.
    fn lambda_z(&self, z: usize, x: &[f64]) -> f64 {
        let l1 = clip(self.lambda_raw(x), self.epsilon());
        if z == 1 {
            l1
        } else {
            1.0 - l1
        }
    }

    /// `P(A=a | x)` clipped to `[ε, 1−ε]`.
    fn pi_a(&self, a: usize, x: &[f64]) -> f64 {
        let p1 = clip(self.pi_raw(x), self.epsilon());
        if a == 1 {
            p1
        } else {
            1.0 - p1
        }
    }
}

fn clip(v: f64, eps: f64) -> f64 {
    v.clamp(eps, 1.0 - eps)
}

/// Options for [`fit_nuisances`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuisanceSpec {
    pub design: Design,
    pub irls: IrlsOptions,
    pub epsilon: f64,
}

impl NuisanceSpec {
    pub fn new(design: Design, epsilon: f64) -> Self {
        NuisanceSpec { design, irls: IrlsOptions::default(), epsilon }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NuisanceDiagnostics {
    pub n_train: usize,
    pub max_iterations: usize,
    pub warnings: Vec<String>,
}

/// Parametric nuisance fits: a 4-class softmax of `(Y, A)` per `z`, and
/// logistic models for `Z`, `A`, `Y | A=a` and `Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedNuisance {
    pub features: FeatureMap,
    /// Class index `2y + a`.
    pub p_models: [SoftmaxModel; 2],
    pub lambda_model: SoftmaxModel,
    pub pi_model: SoftmaxModel,
    pub mu_a_models: [SoftmaxModel; 2],
    pub mu_model: SoftmaxModel,
    pub epsilon: f64,
    pub diagnostics: NuisanceDiagnostics,
}

fn rows_where(data: &Dataset, f: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..data.len()).filter(|&i| f(i)).collect()
}

pub fn fit_nuisances(train: &Dataset, spec: &NuisanceSpec) -> Result<FittedNuisance> {
    let need = 10 * train.k.max(1);
    if train.len() < need {
        return Err(Error::InsufficientData(format!("{} rows; need at least {need}", train.len())));
    }
    if !(0.0..0.5).contains(&spec.epsilon) {
        return Err(Error::InvalidInput(format!("epsilon {} not in [0, 0.5)", spec.epsilon)));
    }
    let fm = FeatureMap::fit(spec.design, train)?;
    let dim = fm.dim();
    let all: Vec<usize> = (0..train.len()).collect();
    let x_all = fm.matrix(train, &all);
    check_rank(&x_all, train.len(), dim)?;
    let mut diag = NuisanceDiagnostics { n_train: train.len(), ..Default::default() };
    let mut note = |info: FitInfo, what: &str| {
        diag.max_iterations = diag.max_iterations.max(info.iterations);
        diag.warnings.extend(info.warnings.into_iter().map(|w| format!("{what}: {w}")));
    };
    let subset_fit = |rows: &[usize], what: &str| -> Result<(Vec<f64>, Vec<usize>)> {
        if rows.is_empty() {
            return Err(Error::InsufficientData(format!("no training rows with {what}")));
        }
        Ok((fm.matrix(train, rows), rows.to_vec()))
    };
    let mut p_models = Vec::with_capacity(2);
    for z in 0..2u8 {
        let (x, rows) = subset_fit(&rows_where(train, |i| train.z[i] == z), &format!("Z={z}"))?;
        let y: Vec<usize> = rows.iter().map(|&i| 2 * train.y[i] as usize + train.a[i] as usize).collect();
        let (m, info) = fit_softmax(&x, dim, &y, 4, &spec.irls)?;
        note(info, &format!("P(Y,A|Z={z},x)"));
        p_models.push(m);
    }
    let (lambda_model, info) = fit_logistic(&x_all, dim, &train.z, &spec.irls)?;
    note(info, "P(Z=1|x)");
    let (pi_model, info) = fit_logistic(&x_all, dim, &train.a, &spec.irls)?;
    note(info, "P(A=1|x)");
    let mut mu_a_models = Vec::with_capacity(2);
    for a in 0..2u8 {
        let (x, rows) = subset_fit(&rows_where(train, |i| train.a[i] == a), &format!("A={a}"))?;
        let y: Vec<u8> = rows.iter().map(|&i| train.y[i]).collect();
        let (m, info) = fit_logistic(&x, dim, &y, &spec.irls)?;
        note(info, &format!("E(Y|A={a},x)"));
        mu_a_models.push(m);
    }
    let (mu_model, info) = fit_logistic(&x_all, dim, &train.y, &spec.irls)?;
    note(info, "E(Y|x)");
    let [p0, p1]: [SoftmaxModel; 2] = p_models.try_into().expect("two models");
    let [m0, m1]: [SoftmaxModel; 2] = mu_a_models.try_into().expect("two models");
    Ok(FittedNuisance {
        features: fm,
        p_models: [p0, p1],
        lambda_model,
        pi_model,
        mu_a_models: [m0, m1],
        mu_model,
        epsilon: spec.epsilon,
        diagnostics: diag,
    })
}

impl Nuisance for FittedNuisance {
    fn p_table(&self, x: &[f64]) -> PTable {
        let f = self.features.features(x);
        let mut p = [[[0.0; 2]; 2]; 2];
        let mut probs = [0.0; 4];
        for z in 0..2 {
            self.p_models[z].predict_into(&f, &mut probs);
            for c in 0..4 {
                p[c / 2][c % 2][z] = probs[c];
            }
        }
        p
    }

    fn lambda_raw(&self, x: &[f64]) -> f64 {
        self.lambda_model.prob1(&self.features.features(x))
    }

    fn pi_raw(&self, x: &[f64]) -> f64 {
        self.pi_model.prob1(&self.features.features(x))
    }

    fn mu_a(&self, a: usize, x: &[f64]) -> f64 {
        self.mu_a_models[a].prob1(&self.features.features(x))
    }

    fn mu(&self, x: &[f64]) -> f64 {
        self.mu_model.prob1(&self.features.features(x))
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Population nuisances of a known stratified law; `x1` is the stratum index
/// when there is more than one stratum.
#[derive(Clone, Debug, PartialEq)]
pub struct LawNuisance {
    pub law: StratifiedIVLaw,
    pub epsilon: f64,
}

impl LawNuisance {
    pub fn new(law: StratifiedIVLaw) -> Self {
        LawNuisance { law, epsilon: 0.0 }
    }

    fn stratum(&self, x: &[f64]) -> &crate::law::Stratum {
        if self.law.strata.len() == 1 {
            &self.law.strata[0]
        } else {
            &self.law.strata[x[0] as usize]
        }
    }
}

impl Nuisance for LawNuisance {
    fn p_table(&self, x: &[f64]) -> PTable {
        self.stratum(x).p
    }

    fn lambda_raw(&self, x: &[f64]) -> f64 {
        self.stratum(x).lambda
    }

    fn pi_raw(&self, x: &[f64]) -> f64 {
        self.stratum(x).pa(1)
    }

    fn mu_a(&self, a: usize, x: &[f64]) -> f64 {
        self.stratum(x).mu_a(a)
    }

    fn mu(&self, x: &[f64]) -> f64 {
        self.stratum(x).mu()
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{observed_law, sample, ResponseTypeLaw};

    fn rt() -> ResponseTypeLaw {
        let vals = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0, 9.0, 7.0, 9.0, 3.0];
        let tot: f64 = vals.iter().sum();
        let mut pi = [[0.0; 4]; 4];
        for i in 0..16 {
            pi[i / 4][i % 4] = vals[i] / tot;
        }
        ResponseTypeLaw::single(pi, 0.4)
    }

    #[test]
    fn intercept_fit_matches_empirical_mean() {
        let d = sample(&rt(), 2000, 4).unwrap();
        let n = fit_nuisances(&d, &NuisanceSpec::new(Design::Intercept, 0.01)).unwrap();
        assert!((n.mu(&[]) - d.mean_y()).abs() < 1e-6);
        let p = n.p_table(&[]);
        for z in 0..2 {
            let s: f64 = (0..4).map(|c| p[c / 2][c % 2][z]).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn multinomial_within_three_se_of_truth() {
        let law = observed_law(&rt());
        let d = sample(&rt(), 5000, 11).unwrap();
        let n = fit_nuisances(&d, &NuisanceSpec::new(Design::Intercept, 0.01)).unwrap();
        let p = n.p_table(&[]);
        for z in 0..2 {
            let nz = d.count_z(z as u8) as f64;
            for y in 0..2 {
                for a in 0..2 {
                    let t = law.strata[0].p[y][a][z];
                    let se = (t * (1.0 - t) / nz).sqrt();
                    assert!((p[y][a][z] - t).abs() < 3.0 * se, "{y}{a}.{z}");
                }
            }
        }
    }

    #[test]
    fn too_few_rows_rejected() {
        let d = sample(&rt(), 5, 1).unwrap();
        assert!(matches!(fit_nuisances(&d, &NuisanceSpec::new(Design::Intercept, 0.01)), Err(Error::InsufficientData(_))));
    }
}
