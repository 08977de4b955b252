//! Ridge-penalised logistic and multinomial regression by Newton/IRLS.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};

/// How covariates enter the nuisance regressions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Design {
    /// Intercept only; covariates are ignored.
    Intercept,
    /// Intercept plus every covariate as a linear term.
    Linear,
    /// Intercept plus indicators for the levels of one covariate.
    OneHot { column: usize },
}

impl Design {
    /// One-hot on `x1` when it holds at most 20 integer levels, linear otherwise.
    pub fn auto(data: &Dataset) -> Design {
        match data.k {
            0 => Design::Intercept,
            1 => {
                let col = data.column(0);
                let mut levels: Vec<f64> = col.iter().copied().filter(|v| v.fract() == 0.0).collect();
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                if levels.len() <= 20 && col.iter().all(|v| v.fract() == 0.0) {
                    Design::OneHot { column: 0 }
                } else {
                    Design::Linear
                }
            }
            _ => Design::Linear,
        }
    }
}

/// Design fitted to training data (remembers the observed levels).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub design: Design,
    pub levels: Vec<f64>,
    pub k: usize,
}

impl FeatureMap {
    pub fn fit(design: Design, data: &Dataset) -> Result<FeatureMap> {
        let levels = match design {
            Design::OneHot { column } => {
                if column >= data.k {
                    return Err(Error::InvalidInput(format!("one-hot column x{} not in data with {} covariates", column + 1, data.k)));
                }
                let mut v = data.column(column);
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
            _ => vec![],
        };
        Ok(FeatureMap { design, levels, k: data.k })
    }

    pub fn dim(&self) -> usize {
        match self.design {
            Design::Intercept => 1,
            Design::Linear => 1 + self.k,
            Design::OneHot { .. } => self.levels.len().max(1),
        }
    }

    /// Index of the level of `x`, if the design is one-hot and the level was seen.
    pub fn level_of(&self, x: &[f64]) -> Option<usize> {
        match self.design {
            Design::OneHot { column } => self.levels.iter().position(|&l| l == x[column]),
            _ => None,
        }
    }

    pub fn features_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        match self.design {
            Design::Intercept => {}
            Design::Linear => out.extend_from_slice(x),
            Design::OneHot { column } => {
                // unseen levels fall back to the baseline level
                for &l in self.levels.iter().skip(1) {
                    out.push(f64::from(u8::from(x[column] == l)));
                }
            }
        }
    }

    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        self.features_into(x, &mut v);
        v
    }

    /// Row-major feature matrix for the given rows.
    pub fn matrix(&self, data: &Dataset, rows: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.len() * self.dim());
        let mut f = Vec::with_capacity(self.dim());
        for &i in rows {
            self.features_into(data.row(i), &mut f);
            out.extend_from_slice(&f);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrlsOptions {
    pub ridge: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        IrlsOptions { ridge: 1e-6, max_iter: 100, tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitInfo {
    pub iterations: usize,
    pub deviance: f64,
    pub warnings: Vec<String>,
}

/// Softmax regression with class 0 as reference; two classes give logistic regression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    pub classes: usize,
    pub dim: usize,
    /// `(classes − 1) × dim`, row-major.
    pub beta: Vec<f64>,
}

impl SoftmaxModel {
    pub fn predict_into(&self, f: &[f64], out: &mut [f64]) {
        let mut eta = [0.0f64; 8];
        let eta = &mut eta[..self.classes];
        for c in 1..self.classes {
            let b = &self.beta[(c - 1) * self.dim..c * self.dim];
            eta[c] = b.iter().zip(f).map(|(u, v)| u * v).sum();
        }
        let m = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for c in 0..self.classes {
            out[c] = (eta[c] - m).exp();
            s += out[c];
        }
        for v in out.iter_mut().take(self.classes) {
            *v /= s;
        }
    }

    pub fn predict(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.classes];
        self.predict_into(f, &mut out);
        out
    }

    /// P(class 1) for a two-class model.
    pub fn prob1(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(self.classes, 2);
        let eta: f64 = self.beta.iter().zip(f).map(|(u, v)| u * v).sum();
        1.0 / (1.0 + (-eta).exp())
    }
}

fn penalized_deviance(x: &[f64], y: &[usize], model: &SoftmaxModel, ridge: f64, probs: &mut [f64]) -> f64 {
    let d = model.dim;
    let mut dev = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        model.predict_into(&x[i * d..(i + 1) * d], probs);
        dev -= 2.0 * probs[yi].max(1e-300).ln();
    }
    dev + ridge * model.beta.iter().map(|b| b * b).sum::<f64>()
}

/// Reject designs whose Gram matrix is numerically rank deficient.
pub fn check_rank(x: &[f64], n: usize, d: usize) -> Result<()> {
    let mut g = DMatrix::<f64>::zeros(d, d);
    for i in 0..n {
        let r = &x[i * d..(i + 1) * d];
        for u in 0..d {
            for v in 0..d {
                g[(u, v)] += r[u] * r[v];
            }
        }
    }
    let eig = g.symmetric_eigenvalues();
    let max = eig.iter().copied().fold(0.0, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::SingularDesign(format!("Gram eigenvalues in [{min:.3e}, {max:.3e}]")));
    }
    Ok(())
}

/// Fit a softmax regression of `y ∈ {0..classes}` on row-major features `x`.
pub fn fit_softmax(x: &[f64], dim: usize, y: &[usize], classes: usize, opts: &IrlsOptions) -> Result<(SoftmaxModel, FitInfo)> {
    let n = y.len();
    if n == 0 {
        return Err(Error::InsufficientData("no rows to fit".into()));
    }
    assert_eq!(x.len(), n * dim);
    assert!((2..=8).contains(&classes));
    let q = (classes - 1) * dim;
    let mut model = SoftmaxModel { classes, dim, beta: vec![0.0; q] };
    let mut probs = vec![0.0; classes];
    let mut dev = penalized_deviance(x, y, &model, opts.ridge, &mut probs);
    let mut warnings = Vec::new();
    for it in 1..=opts.max_iter {
        let mut grad = DVector::<f64>::zeros(q);
        let mut hess = DMatrix::<f64>::zeros(q, q);
        for i in 0..n {
            let f = &x[i * dim..(i + 1) * dim];
            model.predict_into(f, &mut probs);
            for c in 1..classes {
                let r = f64::from(u8::from(y[i] == c)) - probs[c];
                for u in 0..dim {
                    grad[(c - 1) * dim + u] += r * f[u];
                }
                for c2 in 1..classes {
                    let w = probs[c] * (f64::from(u8::from(c == c2)) - probs[c2]);
                    if w == 0.0 {
                        continue;
                    }
                    for u in 0..dim {
                        for v in 0..dim {
                            hess[((c - 1) * dim + u, (c2 - 1) * dim + v)] += w * f[u] * f[v];
                        }
                    }
                }
            }
        }
        for j in 0..q {
            grad[j] -= opts.ridge * model.beta[j];
            hess[(j, j)] += opts.ridge;
        }
        let step = hess
            .cholesky()
            .ok_or_else(|| Error::SingularDesign("Hessian is not positive definite".into()))?
            .solve(&grad);
        let mut t = 1.0;
        let old = model.beta.clone();
        let mut new_dev;
        loop {
            for j in 0..q {
                model.beta[j] = old[j] + t * step[j];
            }
            new_dev = penalized_deviance(x, y, &model, opts.ridge, &mut probs);
            if new_dev <= dev + 1e-12 * dev.abs() || t < 1e-10 {
                break;
            }
            t *= 0.5;
        }
        let change = (dev - new_dev).abs();
        dev = new_dev;
        if change / (dev.abs() + 0.1) < opts.tol {
            let max_beta = model.beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            if max_beta > 15.0 {
                let msg = format!("quasi-separation: |β| reached {max_beta:.1}; the ridge keeps the fit finite");
                warn!("{msg}");
                warnings.push(msg);
            }
            return Ok((model, FitInfo { iterations: it, deviance: dev, warnings }));
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, change: dev })
}

/// Logistic regression of a binary response.
pub fn fit_logistic(x: &[f64], dim: usize, y: &[u8], opts: &IrlsOptions) -> Result<(SoftmaxModel, FitInfo)> {
    let yc: Vec<usize> = y.iter().map(|&v| v as usize).collect();
    fit_softmax(x, dim, &yc, 2, opts)
}
