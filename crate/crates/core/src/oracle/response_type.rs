//! Response-type structural causal model: latent compliance type `r_a` and
//! outcome type `r_y` per stratum, with the instrument drawn independently.
//!
//! `r_a`: 0 never-taker, 1 complier (A = z), 2 defier (A = 1 − z), 3 always-taker.
//! `r_y`: 0 Y = 0, 1 Y = a, 2 Y = 1 − a, 3 Y = 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::Dataset;
use crate::law::{PTable, StratifiedIVLaw, Stratum};
use crate::regime::Regime;

pub type PiTable = [[f64; 4]; 4];

pub fn treatment_of(r_a: usize, z: usize) -> usize {
    match r_a {
        0 => 0,
        1 => z,
        2 => 1 - z,
        _ => 1,
    }
}

pub fn outcome_of(r_y: usize, a: usize) -> usize {
    match r_y {
        0 => 0,
        1 => a,
        2 => 1 - a,
        _ => 1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtStratum {
    pub label: String,
    /// `pi[r_a][r_y]`.
    pub pi: PiTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    /// Overrides the law-level P(Z=1) for this stratum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseTypeLaw {
    pub strata: Vec<RtStratum>,
    pub pz: f64,
}

impl ResponseTypeLaw {
    pub fn single(pi: PiTable, pz: f64) -> Self {
        ResponseTypeLaw { strata: vec![RtStratum { label: "l0".into(), pi, weight: None, pz: None }], pz }
    }

    /// Point mass on one (r_a, r_y) cell.
    pub fn point_mass(r_a: usize, r_y: usize, pz: f64) -> Self {
        let mut pi = [[0.0; 4]; 4];
        pi[r_a][r_y] = 1.0;
        Self::single(pi, pz)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let rt: ResponseTypeLaw = serde_json::from_str(s)?;
        rt.validate()?;
        Ok(rt)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("law serializes")
    }

    pub fn labels(&self) -> Vec<String> {
        self.strata.iter().map(|s| s.label.clone()).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let k = self.strata.len() as f64;
        self.strata.iter().map(|s| s.weight.unwrap_or(1.0 / k)).collect()
    }

    pub fn stratum_pz(&self, s: usize) -> f64 {
        self.strata[s].pz.unwrap_or(self.pz)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strata.is_empty() {
            return Err(Error::EmptyStrata);
        }
        let given = self.strata.iter().filter(|s| s.weight.is_some()).count();
        if given != 0 && given != self.strata.len() {
            return Err(Error::schema(None, "either every stratum has a weight or none does"));
        }
        let wsum: f64 = self.weights().iter().sum();
        if (wsum - 1.0).abs() > 1e-9 || self.weights().iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::NonProbability(format!("stratum weights sum to {wsum}")));
        }
        for (i, s) in self.strata.iter().enumerate() {
            let pz = self.stratum_pz(i);
            if !(pz > 0.0 && pz < 1.0) {
                return Err(Error::NonProbability(format!("stratum {}: P(Z=1) = {pz} not in (0,1)", s.label)));
            }
            let mut tot = 0.0;
            for row in &s.pi {
                for v in row {
                    if !(*v >= 0.0) {
                        return Err(Error::NonProbability(format!("stratum {}: negative pi entry {v}", s.label)));
                    }
                    tot += v;
                }
            }
            if (tot - 1.0).abs() > 1e-12 {
                return Err(Error::NonProbability(format!("stratum {}: pi sums to {tot}", s.label)));
            }
        }
        Ok(())
    }
}

/// Observed `p_{ya.z}` of one response-type table.
pub fn observed_table(pi: &PiTable) -> PTable {
    let mut p = [[[0.0; 2]; 2]; 2];
    for (ra, row) in pi.iter().enumerate() {
        for (ry, w) in row.iter().enumerate() {
            for z in 0..2 {
                let a = treatment_of(ra, z);
                p[outcome_of(ry, a)][a][z] += w;
            }
        }
    }
    p
}

pub fn observed_law(rt: &ResponseTypeLaw) -> StratifiedIVLaw {
    let w = rt.weights();
    let strata = rt
        .strata
        .iter()
        .enumerate()
        .map(|(i, s)| Stratum::new(s.label.clone(), w[i], rt.stratum_pz(i), observed_table(&s.pi)))
        .collect();
    StratifiedIVLaw { strata }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumTruth {
    pub label: String,
    pub weight: f64,
    pub pz: f64,
    /// P(A=a′ | l).
    pub pa: [f64; 2],
    /// E(Y^a | l).
    pub ey_a: [f64; 2],
    /// `ey_a_given_a[a][a′] = E(Y^a | A=a′, l)`.
    pub ey_a_given_a: [[f64; 2]; 2],
    pub cate: f64,
    /// E(Y^1 − Y^0 | A=a′, l).
    pub cate_given_a: [f64; 2],
    pub ey: f64,
    pub g_opt: u8,
    pub g_sup: [u8; 2],
}

impl StratumTruth {
    fn from_pi(label: &str, weight: f64, pz: f64, pi: &PiTable) -> Self {
        let pzv = [1.0 - pz, pz];
        let mut pa = [0.0; 2];
        let mut ey_a = [0.0; 2];
        // joint[a][a′] = E(Y^a I(A=a′) | l)
        let mut joint = [[0.0; 2]; 2];
        for (ra, row) in pi.iter().enumerate() {
            for (ry, w) in row.iter().enumerate() {
                for a in 0..2 {
                    ey_a[a] += w * outcome_of(ry, a) as f64;
                }
                for z in 0..2 {
                    let ap = treatment_of(ra, z);
                    let m = w * pzv[z];
                    pa[ap] += m;
                    for a in 0..2 {
                        joint[a][ap] += m * outcome_of(ry, a) as f64;
                    }
                }
            }
        }
        let mut ey_a_given_a = [[0.0; 2]; 2];
        for a in 0..2 {
            for ap in 0..2 {
                ey_a_given_a[a][ap] = if pa[ap] > 0.0 { joint[a][ap] / pa[ap] } else { ey_a[a] };
            }
        }
        let cate_given_a = [0, 1].map(|ap| ey_a_given_a[1][ap] - ey_a_given_a[0][ap]);
        let ey = joint[0][0] + joint[1][1];
        StratumTruth {
            label: label.to_string(),
            weight,
            pz,
            pa,
            ey_a,
            ey_a_given_a,
            cate: ey_a[1] - ey_a[0],
            cate_given_a,
            ey,
            g_opt: u8::from(ey_a[1] > ey_a[0]),
            g_sup: cate_given_a.map(|c| u8::from(c > 0.0)),
        }
    }

    /// E(Y^g | l) for the stratum's two actions.
    pub fn value(&self, actions: [crate::regime::Action; 2]) -> Result<f64> {
        let mut v = 0.0;
        for ap in 0..2 {
            let p = actions[ap]
                .p_treat()
                .ok_or_else(|| Error::MissingBounds(format!("regime is ambiguous at ({ap}, {})", self.label)))?;
            v += self.pa[ap] * (p * self.ey_a_given_a[1][ap] + (1.0 - p) * self.ey_a_given_a[0][ap]);
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub strata: Vec<StratumTruth>,
    pub ate: f64,
    /// E(Y^1 − Y^0 | A=a′).
    pub cate_given_a: [f64; 2],
    /// `ey_a_given_a[a][a′] = E(Y^a | A=a′)`.
    pub ey_a_given_a: [[f64; 2]; 2],
    pub ey_a: [f64; 2],
    pub ey: f64,
    pub p_treated: f64,
    /// P(A=1 | Z=z).
    pub p_treated_given_z: [f64; 2],
    pub value_opt: f64,
    pub value_sup: f64,
    /// E(Y^g) for the supplied regime.
    pub value_g: Option<f64>,
}

impl GroundTruth {
    pub fn labels(&self) -> Vec<String> {
        self.strata.iter().map(|s| s.label.clone()).collect()
    }

    /// E(Y^g) via the decomposition over (A, L).
    pub fn regime_value(&self, g: &Regime) -> Result<f64> {
        let g = g.aligned_to(&self.labels())?;
        let mut v = 0.0;
        for (s, t) in self.strata.iter().enumerate() {
            v += t.weight * t.value(g.actions[s])?;
        }
        Ok(v)
    }

    pub fn g_opt(&self) -> Regime {
        Regime::from_l(&self.labels(), &self.strata.iter().map(|s| s.g_opt).collect::<Vec<_>>())
    }

    pub fn g_sup(&self) -> Regime {
        Regime::from_fn(&self.labels(), |s, ap| crate::regime::Action::from_bit(self.strata[s].g_sup[ap]))
    }
}

pub fn ground_truth(rt: &ResponseTypeLaw, g: Option<&Regime>) -> Result<GroundTruth> {
    rt.validate()?;
    let w = rt.weights();
    let strata: Vec<StratumTruth> = rt
        .strata
        .iter()
        .enumerate()
        .map(|(i, s)| StratumTruth::from_pi(&s.label, w[i], rt.stratum_pz(i), &s.pi))
        .collect();
    let sum = |f: &dyn Fn(&StratumTruth) -> f64| strata.iter().map(|t| t.weight * f(t)).sum::<f64>();
    let p_treated = sum(&|t| t.pa[1]);
    let pa = [1.0 - p_treated, p_treated];
    let mut ey_a_given_a = [[0.0; 2]; 2];
    for a in 0..2 {
        for ap in 0..2 {
            ey_a_given_a[a][ap] = sum(&|t| t.pa[ap] * t.ey_a_given_a[a][ap]) / pa[ap];
        }
    }
    let mut p_treated_given_z = [0.0; 2];
    for z in 0..2 {
        let pz = |t: &StratumTruth| if z == 1 { t.pz } else { 1.0 - t.pz };
        let mass = sum(&|t| pz(t));
        let treated: f64 = rt
            .strata
            .iter()
            .zip(&strata)
            .map(|(s, t)| t.weight * pz(t) * (0..4).map(|ry| (0..4).filter(|&ra| treatment_of(ra, z) == 1).map(|ra| s.pi[ra][ry]).sum::<f64>()).sum::<f64>())
            .sum();
        p_treated_given_z[z] = treated / mass;
    }
    let ey_a = [sum(&|t| t.ey_a[0]), sum(&|t| t.ey_a[1])];
    let mut gt = GroundTruth {
        ate: ey_a[1] - ey_a[0],
        cate_given_a: [0, 1].map(|ap| ey_a_given_a[1][ap] - ey_a_given_a[0][ap]),
        ey_a_given_a,
        ey_a,
        ey: sum(&|t| t.ey),
        p_treated,
        p_treated_given_z,
        value_opt: 0.0,
        value_sup: 0.0,
        value_g: None,
        strata,
    };
    gt.value_opt = gt.regime_value(&gt.g_opt())?;
    gt.value_sup = gt.regime_value(&gt.g_sup())?;
    if let Some(g) = g {
        gt.value_g = Some(gt.regime_value(g)?);
    }
    Ok(gt)
}

fn categorical(u: f64, probs: impl Iterator<Item = f64>) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        acc += p;
        if p > 0.0 {
            last = i;
        }
        if u < acc {
            return i;
        }
    }
    last
}

/// RNG positioned at the start of record `index` of the stream keyed by `seed`.
pub fn record_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * 16);
    rng
}

/// n i.i.d. records `(y, a, z, x)`; with more than one stratum `x1` is the stratum index.
pub fn sample(rt: &ResponseTypeLaw, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidSampleSize(n));
    }
    rt.validate()?;
    let w = rt.weights();
    let k = usize::from(rt.strata.len() > 1);
    let mut d = Dataset::with_capacity(n, k);
    for i in 0..n {
        let mut rng = record_rng(seed, i as u64);
        let s = categorical(rng.gen::<f64>(), w.iter().copied());
        let z = usize::from(rng.gen::<f64>() < rt.stratum_pz(s));
        let cell = categorical(rng.gen::<f64>(), rt.strata[s].pi.iter().flatten().copied());
        let (ra, ry) = (cell / 4, cell % 4);
        let a = treatment_of(ra, z);
        let y = outcome_of(ry, a);
        let x: Vec<f64> = if k == 1 { vec![s as f64] } else { vec![] };
        d.push(y as u8, a as u8, z as u8, &x);
    }
    Ok(d)
}
