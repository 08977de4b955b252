//! Closed-form Balke-Pearl bounds on `E(Y^a | l)` for a binary instrument,
//! and their decomposition into candidate θ terms.
//!
//! Every θ term is affine in the table `p_{ya.z}`. Term indices follow a fixed
//! order (0..4) so that the selected index `d` is a stable identifier across
//! samples:
//!
//! ```text
//! L0 = max{ p10.1, p10.0, p10.0+p11.0−p00.1−p11.1, p01.0+p10.0−p00.1−p01.1 }
//! U0 = min{ 1−p00.1, 1−p00.0, p01.0+p10.0+p10.1+p11.1, p10.0+p11.0+p01.1+p10.1 }
//! L1 = max{ p11.0, p11.1, p00.1+p11.1−p00.0−p01.0, p10.1+p11.1−p01.0−p10.0 }
//! U1 = min{ 1−p01.1, 1−p01.0, p00.0+p11.0+p10.1+p11.1, p10.0+p11.0+p00.1+p11.1 }
//! ```
//! where `pya.z = P(Y=y, A=a | Z=z, l)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::law::PTable;

/// `constant + Σ coef[y][a][z]·p[y][a][z]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaTerm {
    pub constant: f64,
    pub coef: [[[f64; 2]; 2]; 2],
}

impl ThetaTerm {
    const fn new(constant: f64, entries: &[(usize, usize, usize, f64)]) -> Self {
        let mut coef = [[[0.0; 2]; 2]; 2];
        let mut i = 0;
        while i < entries.len() {
            let (y, a, z, c) = entries[i];
            coef[y][a][z] = c;
            i += 1;
        }
        ThetaTerm { constant, coef }
    }

    pub fn eval(&self, p: &PTable) -> f64 {
        let mut v = self.constant;
        for y in 0..2 {
            for a in 0..2 {
                for z in 0..2 {
                    v += self.coef[y][a][z] * p[y][a][z];
                }
            }
        }
        v
    }

    /// Apply the linear part to arbitrary per-cell values (e.g. influence functions).
    pub fn linear(&self, cells: &PTable) -> f64 {
        self.eval(cells) - self.constant
    }
}

const P: f64 = 1.0;
const M: f64 = -1.0;

static LOWER: [[ThetaTerm; 4]; 2] = [
    [
        ThetaTerm::new(0.0, &[(1, 0, 1, P)]),
        ThetaTerm::new(0.0, &[(1, 0, 0, P)]),
        ThetaTerm::new(0.0, &[(1, 0, 0, P), (1, 1, 0, P), (0, 0, 1, M), (1, 1, 1, M)]),
        ThetaTerm::new(0.0, &[(0, 1, 0, P), (1, 0, 0, P), (0, 0, 1, M), (0, 1, 1, M)]),
    ],
    [
        ThetaTerm::new(0.0, &[(1, 1, 0, P)]),
        ThetaTerm::new(0.0, &[(1, 1, 1, P)]),
        ThetaTerm::new(0.0, &[(0, 0, 1, P), (1, 1, 1, P), (0, 0, 0, M), (0, 1, 0, M)]),
        ThetaTerm::new(0.0, &[(1, 0, 1, P), (1, 1, 1, P), (0, 1, 0, M), (1, 0, 0, M)]),
    ],
];

static UPPER: [[ThetaTerm; 4]; 2] = [
    [
        ThetaTerm::new(1.0, &[(0, 0, 1, M)]),
        ThetaTerm::new(1.0, &[(0, 0, 0, M)]),
        ThetaTerm::new(0.0, &[(0, 1, 0, P), (1, 0, 0, P), (1, 0, 1, P), (1, 1, 1, P)]),
        ThetaTerm::new(0.0, &[(1, 0, 0, P), (1, 1, 0, P), (0, 1, 1, P), (1, 0, 1, P)]),
    ],
    [
        ThetaTerm::new(1.0, &[(0, 1, 1, M)]),
        ThetaTerm::new(1.0, &[(0, 1, 0, M)]),
        ThetaTerm::new(0.0, &[(0, 0, 0, P), (1, 1, 0, P), (1, 0, 1, P), (1, 1, 1, P)]),
        ThetaTerm::new(0.0, &[(1, 0, 0, P), (1, 1, 0, P), (0, 0, 1, P), (1, 1, 1, P)]),
    ],
];

/// Candidate lower-bound terms for arm `a`.
pub fn lower_terms(a: usize) -> &'static [ThetaTerm; 4] {
    &LOWER[a]
}

/// Candidate upper-bound terms for arm `a`.
pub fn upper_terms(a: usize) -> &'static [ThetaTerm; 4] {
    &UPPER[a]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Upper,
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(v: &[f64; 4]) -> usize {
    let mut best = 0;
    for j in 1..4 {
        if v[j] > v[best] {
            best = j;
        }
    }
    best
}

/// Index of the smallest value, lowest index on ties.
pub fn argmin(v: &[f64; 4]) -> usize {
    let mut best = 0;
    for j in 1..4 {
        if v[j] < v[best] {
            best = j;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaDecomposition {
    /// `theta_l[a][j]`.
    pub theta_l: [[f64; 4]; 2],
    pub theta_u: [[f64; 4]; 2],
    pub d_l: [usize; 2],
    pub d_u: [usize; 2],
}

impl ThetaDecomposition {
    pub fn lower(&self, a: usize) -> f64 {
        self.theta_l[a][self.d_l[a]]
    }

    pub fn upper(&self, a: usize) -> f64 {
        self.theta_u[a][self.d_u[a]]
    }

    /// Distance from the selected term to the runner-up (`∞` when all others coincide in index only).
    pub fn margin_gap(&self, a: usize, side: Side) -> f64 {
        let (v, d) = match side {
            Side::Lower => (&self.theta_l[a], self.d_l[a]),
            Side::Upper => (&self.theta_u[a], self.d_u[a]),
        };
        (0..4).filter(|&j| j != d).map(|j| (v[j] - v[d]).abs()).fold(f64::INFINITY, f64::min)
    }
}

pub fn theta_decomposition(p: &PTable) -> ThetaDecomposition {
    let mut theta_l = [[0.0; 4]; 2];
    let mut theta_u = [[0.0; 4]; 2];
    for a in 0..2 {
        for j in 0..4 {
            theta_l[a][j] = LOWER[a][j].eval(p);
            theta_u[a][j] = UPPER[a][j].eval(p);
        }
    }
    ThetaDecomposition {
        d_l: [argmax(&theta_l[0]), argmax(&theta_l[1])],
        d_u: [argmin(&theta_u[0]), argmin(&theta_u[1])],
        theta_l,
        theta_u,
    }
}

/// Largest clip tolerated on an exactly valid law.
pub const CLIP_TOL: f64 = 1e-7;

/// Unclipped arm bounds `[E(Y^0|l), E(Y^1|l)]`.
pub fn bp_bounds_raw(p: &PTable) -> [Interval; 2] {
    let t = theta_decomposition(p);
    [0, 1].map(|a| Interval::new(t.lower(a), t.upper(a)))
}

/// Balke-Pearl arm bounds `[E(Y^0|l), E(Y^1|l)]`, clipped to `[0, 1]`.
pub fn bp_bounds(p: &PTable) -> [Interval; 2] {
    bp_bounds_raw(p).map(|i| i.clip_prob())
}

/// As [`bp_bounds`], but reports clipping beyond [`CLIP_TOL`] or crossed endpoints.
pub fn bp_bounds_checked(p: &PTable) -> Result<[Interval; 2]> {
    let raw = bp_bounds_raw(p);
    for (a, i) in raw.iter().enumerate() {
        let excess = i.clip_excess(0.0, 1.0);
        if excess > CLIP_TOL {
            return Err(Error::Internal(format!("arm {a} bounds clipped by {excess:.3e}")));
        }
        if i.lo > i.up + CLIP_TOL {
            return Err(Error::Internal(format!("arm {a} bounds cross: {} > {}", i.lo, i.up)));
        }
    }
    Ok(raw.map(|i| i.clip_prob()))
}

/// l-CATE interval `(L1 − U0, U1 − L0)` from arm bounds.
pub fn cate_interval(arms: &[Interval; 2]) -> Interval {
    arms[1].minus(&arms[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::perfect_compliance_table;

    #[test]
    fn perfect_compliance_arm_one_is_point() {
        let p = perfect_compliance_table([0.2, 0.7]);
        let b = bp_bounds(&p);
        assert!((b[1].lo - 0.7).abs() < 1e-15 && (b[1].up - 0.7).abs() < 1e-15);
        assert!((b[0].lo - 0.2).abs() < 1e-15 && (b[0].up - 0.2).abs() < 1e-15);
    }

    #[test]
    fn symmetric_table_decomposes() {
        let p = [[[0.25; 2]; 2]; 2];
        let t = theta_decomposition(&p);
        assert_eq!(t.theta_l[0], [0.25, 0.25, 0.0, 0.0]);
        assert_eq!(t.d_l, [0, 0]);
        let b = bp_bounds(&p);
        assert_eq!(b[0], Interval::new(t.lower(0), t.upper(0)));
    }

    #[test]
    fn ties_pick_lowest_index() {
        assert_eq!(argmax(&[0.1, 0.3, 0.3, 0.2]), 1);
        assert_eq!(argmin(&[0.4, 0.1, 0.3, 0.1]), 1);
    }

    #[test]
    fn linear_part_excludes_constant() {
        let t = upper_terms(0)[0];
        let ones = [[[1.0; 2]; 2]; 2];
        assert_eq!(t.linear(&ones), -1.0);
    }
}
