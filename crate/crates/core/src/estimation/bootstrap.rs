//! Nonparametric bootstrap with Wald intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::inference_ci::norm_quantile;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub point: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_up: f64,
    pub alpha: f64,
    pub n_boot: usize,
}

impl EstimateWithCI {
    pub fn wald(point: f64, se: f64, alpha: f64, n_boot: usize) -> Self {
        let z = norm_quantile(1.0 - alpha / 2.0);
        EstimateWithCI { point, se, ci_lo: point - z * se, ci_up: point + z * se, alpha, n_boot }
    }

    pub fn covers(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_up
    }
}

pub const MIN_BOOT: usize = 50;

/// RNG stream for bootstrap replicate `b`.
pub fn replicate_rng(seed: u64, b: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64 + 1);
    rng
}

fn check(b: usize, alpha: f64) -> Result<()> {
    if b < MIN_BOOT {
        return Err(Error::InvalidInput(format!("bootstrap replicates {b} < {MIN_BOOT}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha {alpha} not in (0,1)")));
    }
    Ok(())
}

fn sd(v: &[f64]) -> f64 {
    if v.iter().all(|x| *x == v[0]) {
        return 0.0;
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Bootstrap a statistic of the data by resampling rows.
pub fn bootstrap_ci<F>(stat: F, data: &Dataset, b: usize, alpha: f64, seed: u64) -> Result<EstimateWithCI>
where
    F: Fn(&Dataset) -> Result<f64> + Sync,
{
    check(b, alpha)?;
    let point = stat(data)?;
    let n = data.len();
    let reps = (0..b)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            stat(&data.subset(&idx))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EstimateWithCI::wald(point, sd(&reps), alpha, b))
}

/// Bootstrap the mean of per-row values (nuisances held fixed).
pub fn bootstrap_mean_ci(values: &[f64], b: usize, alpha: f64, seed: u64) -> Result<EstimateWithCI> {
    check(b, alpha)?;
    let n = values.len();
    if n == 0 {
        return Err(Error::InsufficientData("no rows to average".into()));
    }
    let point = values.iter().sum::<f64>() / n as f64;
    let reps: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    Ok(EstimateWithCI::wald(point, sd(&reps), alpha, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(n: usize) -> Dataset {
        let mut d = Dataset::new(0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..n {
            d.push(u8::from(rng.gen::<f64>() < 0.5), 0, 0, &[]);
        }
        d
    }

    #[test]
    fn constant_statistic_has_zero_se() {
        let e = bootstrap_ci(|_| Ok(0.7), &bern(100), 60, 0.05, 1).unwrap();
        assert_eq!(e.se, 0.0);
        assert_eq!((e.ci_lo, e.ci_up), (0.7, 0.7));
    }

    #[test]
    fn mean_se_matches_analytic() {
        let d = bern(1000);
        let e = bootstrap_ci(|d| Ok(d.mean_y()), &d, 500, 0.05, 3).unwrap();
        let want = (0.25f64 / 1000.0).sqrt();
        assert!((e.se / want - 1.0).abs() < 0.2, "{} vs {want}", e.se);
        let f = bootstrap_mean_ci(&d.y.iter().map(|&v| v as f64).collect::<Vec<_>>(), 500, 0.05, 3).unwrap();
        assert!((f.se / want - 1.0).abs() < 0.2);
    }

    #[test]
    fn seeded_runs_identical() {
        let d = bern(200);
        let a = bootstrap_ci(|d| Ok(d.mean_y()), &d, 100, 0.05, 9).unwrap();
        let b = bootstrap_ci(|d| Ok(d.mean_y()), &d, 100, 0.05, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_replicates_rejected() {
        assert!(bootstrap_mean_ci(&[1.0, 2.0], 10, 0.05, 1).is_err());
    }
}
