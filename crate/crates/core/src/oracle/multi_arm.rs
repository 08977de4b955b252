//! Enumeration oracle for a treatment with more than two levels.

use serde::{Deserialize, Serialize};

/// Joint law of the natural treatment `A` and the potential outcomes
/// `(Y^0, …, Y^{k−1})` within one stratum: `cells[i] = (a, outcomes, prob)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiArmLaw {
    pub arms: usize,
    pub cells: Vec<(usize, Vec<u8>, f64)>,
}

impl MultiArmLaw {
    /// All `arms · 2^arms` cells with the given probabilities in lexicographic order.
    pub fn from_probs(arms: usize, probs: &[f64]) -> Self {
        let per = 1usize << arms;
        assert_eq!(probs.len(), arms * per, "need arms·2^arms probabilities");
        let cells = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let a = i / per;
                let bits = i % per;
                (a, (0..arms).map(|k| ((bits >> k) & 1) as u8).collect(), p)
            })
            .collect();
        MultiArmLaw { arms, cells }
    }

    /// P(A=a).
    pub fn pa(&self, a: usize) -> f64 {
        self.cells.iter().filter(|c| c.0 == a).map(|c| c.2).sum()
    }

    /// E(Y | A=a) = E(Y^a | A=a).
    pub fn mu_a(&self, a: usize) -> f64 {
        self.ey_given(a, a)
    }

    /// E(Y^a).
    pub fn ey(&self, a: usize) -> f64 {
        self.cells.iter().map(|c| c.2 * c.1[a] as f64).sum()
    }

    /// E(Y^a | A=a′).
    pub fn ey_given(&self, a: usize, a_prime: usize) -> f64 {
        let num: f64 = self.cells.iter().filter(|c| c.0 == a_prime).map(|c| c.2 * c.1[a] as f64).sum();
        num / self.pa(a_prime)
    }
}
