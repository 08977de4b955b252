//! Sharp bounds by linear programming over response-type distributions
//! consistent with one stratum's observed law.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::response_type::{outcome_of, treatment_of};
use super::simplex::{minimize, rational, LpOutcome, Scalar};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::law::{validate_table, StratifiedIVLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    /// E(Y^a | l).
    Ey(u8),
    Cate,
    /// E(Y^1 − Y^0 | A=a′, l).
    CateGivenA(u8),
    /// E(Y^a | A=a′, l) as `(a, a′)`.
    EyGivenA(u8, u8),
}

impl Target {
    pub const EY0: Target = Target::Ey(0);
    pub const EY1: Target = Target::Ey(1);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    /// Exact rationals; f64 inputs are converted exactly.
    Exact,
    /// Doubles with the simplex tolerance.
    Float,
}

/// Equality system in textual `(y, a, z)` order followed by `Σπ = 1`.
fn constraints<T: Scalar>(p: &[[[T; 2]; 2]; 2]) -> (Vec<Vec<T>>, Vec<T>) {
    let mut rows = Vec::with_capacity(9);
    let mut rhs = Vec::with_capacity(9);
    for y in 0..2 {
        for a in 0..2 {
            for z in 0..2 {
                let row = (0..16)
                    .map(|j| {
                        let (ra, ry) = (j / 4, j % 4);
                        let at = treatment_of(ra, z);
                        if at == a && outcome_of(ry, at) == y {
                            T::one()
                        } else {
                            T::zero()
                        }
                    })
                    .collect();
                rows.push(row);
                rhs.push(p[y][a][z].clone());
            }
        }
    }
    rows.push(vec![T::one(); 16]);
    rhs.push(T::one());
    (rows, rhs)
}

/// Objective coefficients over the 16 cells, with the normalizing constant.
fn objective<T: Scalar>(target: Target, lambda: &T, p: &[[[T; 2]; 2]; 2]) -> Result<Vec<T>> {
    let pz = [T::one().sub(lambda), lambda.clone()];
    let y = |ry: usize, a: usize| if outcome_of(ry, a) == 1 { T::one() } else { T::zero() };
    let weight_given = |ra: usize, ap: usize| {
        (0..2).filter(|&z| treatment_of(ra, z) == ap).fold(T::zero(), |acc, z| acc.add(&pz[z]))
    };
    let pa = |ap: usize| {
        (0..2).fold(T::zero(), |acc, z| acc.add(&pz[z].mul(&p[0][ap][z].add(&p[1][ap][z]))))
    };
    let coef: Vec<T> = match target {
        Target::Ey(a) => (0..16).map(|j| y(j % 4, a as usize)).collect(),
        Target::Cate => (0..16).map(|j| y(j % 4, 1).sub(&y(j % 4, 0))).collect(),
        Target::CateGivenA(ap) | Target::EyGivenA(_, ap) => {
            let ap = ap as usize;
            let denom = pa(ap);
            if !denom.is_pos() {
                return Err(Error::PositivityViolation(format!("P(A={ap}|l) = 0")));
            }
            (0..16)
                .map(|j| {
                    let (ra, ry) = (j / 4, j % 4);
                    let v = match target {
                        Target::EyGivenA(a, _) => y(ry, a as usize),
                        _ => y(ry, 1).sub(&y(ry, 0)),
                    };
                    v.mul(&weight_given(ra, ap)).div(&denom)
                })
                .collect()
        }
    };
    Ok(coef)
}

fn solve_bounds<T: Scalar>(lambda: T, p: [[[T; 2]; 2]; 2], target: Target) -> Result<Interval> {
    let (a, b) = constraints(&p);
    let c = objective(target, &lambda, &p)?;
    let neg: Vec<T> = c.iter().map(|v| v.neg()).collect();
    let lo = match minimize(&a, &b, &c) {
        LpOutcome::Optimal { value, .. } => value.to_f64(),
        LpOutcome::Infeasible { residual } => {
            return Err(Error::InfeasibleLaw {
                residual: residual.to_f64(),
                detail: "no response-type distribution reproduces p_{ya.z}".into(),
            })
        }
        LpOutcome::Unbounded => return Err(Error::Internal("bounded LP reported unbounded".into())),
    };
    let up = match minimize(&a, &b, &neg) {
        LpOutcome::Optimal { value, .. } => -value.to_f64(),
        _ => return Err(Error::Internal("maximization failed after feasible minimization".into())),
    };
    Ok(Interval::new(lo, up))
}

/// Exact rational table with each z-column renormalized to sum to one.
fn exact_table(p: &[[[f64; 2]; 2]; 2]) -> [[[BigRational; 2]; 2]; 2] {
    let mut out: [[[BigRational; 2]; 2]; 2] = Default::default();
    for z in 0..2 {
        let mut col = <BigRational as Zero>::zero();
        for y in 0..2 {
            for a in 0..2 {
                out[y][a][z] = rational(p[y][a][z]);
                col += &out[y][a][z];
            }
        }
        if !Zero::is_zero(&col) && col != <BigRational as One>::one() {
            for y in 0..2 {
                for a in 0..2 {
                    out[y][a][z] = &out[y][a][z] / &col;
                }
            }
        }
    }
    out
}

pub fn sharp_bounds_lp_with(
    law: &StratifiedIVLaw,
    target: Target,
    stratum: usize,
    arithmetic: Arithmetic,
) -> Result<Interval> {
    let s = law
        .strata
        .get(stratum)
        .ok_or_else(|| Error::InvalidInput(format!("stratum index {stratum} out of range")))?;
    validate_table(&s.label, s.lambda, &s.p)?;
    match arithmetic {
        Arithmetic::Exact => solve_bounds(rational(s.lambda), exact_table(&s.p), target),
        Arithmetic::Float => solve_bounds(s.lambda, s.p, target),
    }
}

/// Sharp bounds on `target` at `stratum`, solved in exact arithmetic.
pub fn sharp_bounds_lp(law: &StratifiedIVLaw, target: Target, stratum: usize) -> Result<Interval> {
    sharp_bounds_lp_with(law, target, stratum, Arithmetic::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::perfect_compliance_table;

    #[test]
    fn perfect_compliance_collapses() {
        let law = StratifiedIVLaw::single(0.5, perfect_compliance_table([0.25, 0.625]));
        let i = sharp_bounds_lp(&law, Target::EY1, 0).unwrap();
        assert!(i.width().abs() < 1e-15);
        assert!((i.lo - 0.625).abs() < 1e-15);
    }

    #[test]
    fn exact_and_float_agree() {
        let mut p = [[[0.0; 2]; 2]; 2];
        let v = [0.1, 0.2, 0.3, 0.4, 0.05, 0.35, 0.15, 0.45];
        for (i, x) in v.iter().enumerate() {
            p[i >> 2][(i >> 1) & 1][i & 1] = *x;
        }
        // columns: z=0 gets 0.1,0.3,0.05,0.15 -> 0.6; fix to sum 1
        p[1][1][0] += 0.4;
        p[1][1][1] -= 0.4;
        let law = StratifiedIVLaw::single(0.3, p);
        for t in [Target::EY0, Target::EY1, Target::Cate, Target::CateGivenA(0), Target::EyGivenA(1, 0)] {
            let e = sharp_bounds_lp_with(&law, t, 0, Arithmetic::Exact);
            let f = sharp_bounds_lp_with(&law, t, 0, Arithmetic::Float);
            match (e, f) {
                (Ok(e), Ok(f)) => assert!(e.max_abs_diff(&f) < 1e-9, "{t:?}"),
                (Err(_), Err(_)) => {}
                (e, f) => panic!("{t:?}: {e:?} vs {f:?}"),
            }
        }
    }

    #[test]
    fn iv_violation_is_infeasible() {
        // Y flips with Z among always-never-takers: violates the exclusion restriction
        let mut p = [[[0.0; 2]; 2]; 2];
        p[1][0][0] = 1.0;
        p[0][0][1] = 1.0;
        let law = StratifiedIVLaw::single(0.5, p);
        assert!(matches!(sharp_bounds_lp(&law, Target::EY0, 0), Err(Error::InfeasibleLaw { .. })));
    }
}
