//! Discrete observed laws: the stratified binary-IV law and its
//! Z-marginalized observational summary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `p[y][a][z] = P(Y=y, A=a | Z=z, L=l)`.
pub type PTable = [[[f64; 2]; 2]; 2];

pub const PROB_TOL: f64 = 1e-9;
/// Propensities at or below this are treated as zero.
pub const POSITIVITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stratum {
    pub label: String,
    pub weight: f64,
    /// P(Z=1 | L=l).
    pub lambda: f64,
    pub p: PTable,
}

impl Stratum {
    pub fn new(label: impl Into<String>, weight: f64, lambda: f64, p: PTable) -> Self {
        Stratum { label: label.into(), weight, lambda, p }
    }

    pub fn pz(&self, z: usize) -> f64 {
        if z == 1 {
            self.lambda
        } else {
            1.0 - self.lambda
        }
    }

    /// P(A=a | Z=z, l).
    pub fn pa_given_z(&self, a: usize, z: usize) -> f64 {
        self.p[0][a][z] + self.p[1][a][z]
    }

    /// P(A=a | l).
    pub fn pa(&self, a: usize) -> f64 {
        (0..2).map(|z| self.pz(z) * self.pa_given_z(a, z)).sum()
    }

    /// P(Y=1, A=a | l).
    pub fn p_y1_a(&self, a: usize) -> f64 {
        (0..2).map(|z| self.pz(z) * self.p[1][a][z]).sum()
    }

    /// E(Y | A=a, l).
    pub fn mu_a(&self, a: usize) -> f64 {
        self.p_y1_a(a) / self.pa(a)
    }

    /// E(Y | l).
    pub fn mu(&self) -> f64 {
        self.p_y1_a(0) + self.p_y1_a(1)
    }

    /// E(Y | A=a, Z=z, l).
    pub fn mu_az(&self, a: usize, z: usize) -> f64 {
        self.p[1][a][z] / self.pa_given_z(a, z)
    }

    /// E(Y | Z=z, l).
    pub fn mu_z(&self, z: usize) -> f64 {
        self.p[1][0][z] + self.p[1][1][z]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratifiedIVLaw {
    pub strata: Vec<Stratum>,
}

impl StratifiedIVLaw {
    pub fn single(lambda: f64, p: PTable) -> Self {
        StratifiedIVLaw { strata: vec![Stratum::new("l0", 1.0, lambda, p)] }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let law: StratifiedIVLaw = serde_json::from_str(s)?;
        Ok(law)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("law serializes")
    }

    pub fn stratum_index(&self, label: &str) -> Option<usize> {
        self.strata.iter().position(|s| s.label == label)
    }

    /// Collapse the strata into a single stratum with the same joint law of (Y, A, Z).
    pub fn marginalize(&self) -> StratifiedIVLaw {
        let mut joint = [[[0.0; 2]; 2]; 2];
        let mut pz1 = 0.0;
        for s in &self.strata {
            pz1 += s.weight * s.lambda;
            for y in 0..2 {
                for a in 0..2 {
                    for z in 0..2 {
                        joint[y][a][z] += s.weight * s.pz(z) * s.p[y][a][z];
                    }
                }
            }
        }
        let mut p = [[[0.0; 2]; 2]; 2];
        for y in 0..2 {
            for a in 0..2 {
                for z in 0..2 {
                    let pz = if z == 1 { pz1 } else { 1.0 - pz1 };
                    p[y][a][z] = joint[y][a][z] / pz;
                }
            }
        }
        StratifiedIVLaw::single(pz1, p)
    }
}

/// Per-stratum observational summary with Z marginalized out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumObs {
    pub label: String,
    pub weight: f64,
    /// P(A=a | l).
    pub pa: [f64; 2],
    /// E(Y | A=a, l).
    pub mu_a: [f64; 2],
    /// E(Y | l).
    pub mu: f64,
}

impl StratumObs {
    /// Build from the treated propensity and arm means, checking the invariants.
    pub fn new(label: impl Into<String>, weight: f64, p_treated: f64, mu_a: [f64; 2]) -> Result<Self> {
        let label = label.into();
        if !(0.0..=1.0).contains(&p_treated) || mu_a.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::NonProbability(format!("stratum {label}: propensity or mean outside [0,1]")));
        }
        let pa = [1.0 - p_treated, p_treated];
        check_positivity(&label, pa)?;
        let mu = mu_a[0] * pa[0] + mu_a[1] * pa[1];
        Ok(StratumObs { label, weight, pa, mu_a, mu })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationalLaw {
    pub strata: Vec<StratumObs>,
}

impl ObservationalLaw {
    pub fn new(strata: Vec<StratumObs>) -> Result<Self> {
        if strata.is_empty() {
            return Err(Error::EmptyStrata);
        }
        check_weights(strata.iter().map(|s| s.weight))?;
        for s in &strata {
            let tot = s.mu_a[0] * s.pa[0] + s.mu_a[1] * s.pa[1];
            if (tot - s.mu).abs() > PROB_TOL {
                return Err(Error::NonProbability(format!(
                    "stratum {}: E(Y|l) = {} but arm means give {tot}",
                    s.label, s.mu
                )));
            }
        }
        Ok(ObservationalLaw { strata })
    }

    /// E(Y) = sum_l P(L=l) E(Y|l).
    pub fn mean_outcome(&self) -> f64 {
        self.strata.iter().map(|s| s.weight * s.mu).sum()
    }
}

fn check_positivity(label: &str, pa: [f64; 2]) -> Result<()> {
    for (a, p) in pa.iter().enumerate() {
        if *p <= POSITIVITY_TOL {
            return Err(Error::PositivityViolation(format!("stratum {label}: P(A={a}|l) = {p}")));
        }
    }
    Ok(())
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for w in weights {
        if !(w >= 0.0) {
            return Err(Error::NonProbability(format!("stratum weight {w} is negative")));
        }
        total += w;
    }
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::NonProbability(format!("stratum weights sum to {total}")));
    }
    Ok(())
}

/// Check a single probability table, without positivity.
pub fn validate_table(label: &str, lambda: f64, p: &PTable) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::NonProbability(format!("stratum {label}: lambda = {lambda}")));
    }
    for z in 0..2 {
        let mut col = 0.0;
        for y in 0..2 {
            for a in 0..2 {
                let v = p[y][a][z];
                if !(0.0..=1.0 + PROB_TOL).contains(&v) {
                    return Err(Error::NonProbability(format!("stratum {label}: p[{y}][{a}][{z}] = {v}")));
                }
                col += v;
            }
        }
        if (col - 1.0).abs() > PROB_TOL {
            return Err(Error::NonProbability(format!("stratum {label}: column z={z} sums to {col}")));
        }
    }
    Ok(())
}

/// Validate a stratified IV law and marginalize Z.
pub fn validate(law: &StratifiedIVLaw) -> Result<ObservationalLaw> {
    if law.strata.is_empty() {
        return Err(Error::EmptyStrata);
    }
    check_weights(law.strata.iter().map(|s| s.weight))?;
    let mut out = Vec::with_capacity(law.strata.len());
    for s in &law.strata {
        validate_table(&s.label, s.lambda, &s.p)?;
        let pa = [s.pa(0), s.pa(1)];
        check_positivity(&s.label, pa)?;
        out.push(StratumObs {
            label: s.label.clone(),
            weight: s.weight,
            pa,
            mu_a: [s.mu_a(0), s.mu_a(1)],
            mu: s.mu(),
        });
    }
    Ok(ObservationalLaw { strata: out })
}

/// Table with `A = Z` and the given `P(Y=1|Z=z)`.
pub fn perfect_compliance_table(py1_z: [f64; 2]) -> PTable {
    let mut p = [[[0.0; 2]; 2]; 2];
    for z in 0..2 {
        p[1][z][z] = py1_z[z];
        p[0][z][z] = 1.0 - py1_z[z];
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_compliance_propensity() {
        let law = StratifiedIVLaw::single(0.5, perfect_compliance_table([0.3, 0.6]));
        let obs = validate(&law).unwrap();
        assert!((obs.strata[0].pa[1] - 0.5).abs() < 1e-15);
        assert!((obs.strata[0].mu_a[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn zero_column_is_rejected() {
        let mut p = perfect_compliance_table([0.3, 0.6]);
        for y in 0..2 {
            for a in 0..2 {
                p[y][a][1] = 0.0;
            }
        }
        let err = validate(&StratifiedIVLaw::single(0.5, p)).unwrap_err();
        assert!(matches!(err, Error::NonProbability(_)));
    }

    #[test]
    fn empty_and_positivity_errors() {
        assert!(matches!(validate(&StratifiedIVLaw { strata: vec![] }), Err(Error::EmptyStrata)));
        // nobody is ever treated
        let mut p = [[[0.0; 2]; 2]; 2];
        p[0][0] = [0.5, 0.5];
        p[1][0] = [0.5, 0.5];
        assert!(matches!(validate(&StratifiedIVLaw::single(0.5, p)), Err(Error::PositivityViolation(_))));
    }

    #[test]
    fn marginalize_single_is_identity() {
        let law = StratifiedIVLaw::single(0.3, perfect_compliance_table([0.2, 0.9]));
        let m = law.marginalize();
        assert!((m.strata[0].lambda - 0.3).abs() < 1e-15);
        assert!((m.strata[0].p[1][1][1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn json_rejects_unknown_fields() {
        let s = r#"{"strata":[{"label":"a","weight":1,"lambda":0.5,"p":[[[0.5,0],[0,0.5]],[[0.5,0],[0,0.5]]],"x":1}]}"#;
        assert!(StratifiedIVLaw::from_json_str(s).is_err());
    }
}
