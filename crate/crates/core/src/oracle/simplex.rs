//! Dense two-phase simplex with Bland's rule, generic over exact rationals
//! and tolerance-based doubles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn lt(&self, o: &Self) -> bool;
    fn to_f64(&self) -> f64;

    fn is_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
    fn neg(&self) -> Self {
        Self::zero().sub(self)
    }
}

pub const FLOAT_TOL: f64 = 1e-9;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_pos(&self) -> bool {
        *self > FLOAT_TOL
    }
    fn is_neg(&self) -> bool {
        *self < -FLOAT_TOL
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Exact rational for a finite double.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    /// Phase-one optimum (sum of artificials) is strictly positive.
    Infeasible { residual: T },
    Unbounded,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    obj: Vec<T>,
    obj_rhs: T,
    basis: Vec<usize>,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.div(&piv);
        }
        self.rhs[r] = self.rhs[r].div(&piv);
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, p) in self.rows[i].iter_mut().zip(&prow) {
                *v = v.sub(&f.mul(p));
            }
            self.rhs[i] = self.rhs[i].sub(&f.mul(&prhs));
        }
        let f = self.obj[c].clone();
        if !f.is_zero() {
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                *v = v.sub(&f.mul(p));
            }
            self.obj_rhs = self.obj_rhs.sub(&f.mul(&prhs));
        }
        self.basis[r] = c;
    }

    /// Bland's rule iterations over columns `< ncols`. Returns false if unbounded.
    fn run(&mut self, ncols: usize) -> bool {
        loop {
            let entering = (0..ncols).find(|&j| self.obj[j].is_neg() && !self.basis.contains(&j));
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][c].is_pos() {
                    continue;
                }
                let ratio = self.rhs[i].div(&self.rows[i][c]);
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio.lt(br) || (!br.lt(&ratio) && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Minimize `c·x` subject to `A x = b`, `x ≥ 0`.
pub fn minimize<T: Scalar>(a: &[Vec<T>], b: &[T], c: &[T]) -> LpOutcome<T> {
    let m = a.len();
    let n = c.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_neg();
        let mut row: Vec<T> = a[i].iter().map(|v| if flip { v.neg() } else { v.clone() }).collect();
        for k in 0..m {
            row.push(if k == i { T::one() } else { T::zero() });
        }
        rows.push(row);
        rhs.push(if flip { b[i].neg() } else { b[i].clone() });
    }
    // phase one: minimize the sum of artificials
    let mut obj = vec![T::zero(); n + m];
    let mut obj_rhs = T::zero();
    for i in 0..m {
        for j in 0..n {
            obj[j] = obj[j].sub(&rows[i][j]);
        }
        obj_rhs = obj_rhs.sub(&rhs[i]);
    }
    let mut t = Tableau { rows, rhs, obj, obj_rhs, basis: (n..n + m).collect() };
    t.run(n + m);
    let residual = t.obj_rhs.neg();
    if residual.is_pos() {
        return LpOutcome::Infeasible { residual };
    }
    // drive artificials out of the basis where possible; rows where that fails are redundant
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| !t.rows[r][j].is_zero() && !t.basis.contains(&j)) {
                t.pivot(r, c);
            }
        }
    }
    // phase two
    let mut obj: Vec<T> = (0..n + m).map(|j| if j < n { c[j].clone() } else { T::zero() }).collect();
    let mut obj_rhs = T::zero();
    for r in 0..m {
        let bj = t.basis[r];
        if bj < n && !c[bj].is_zero() {
            for j in 0..n + m {
                obj[j] = obj[j].sub(&c[bj].mul(&t.rows[r][j]));
            }
            obj_rhs = obj_rhs.sub(&c[bj].mul(&t.rhs[r]));
        }
    }
    t.obj = obj;
    t.obj_rhs = obj_rhs;
    if !t.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs[r].clone();
        }
    }
    LpOutcome::Optimal { x, value: t.obj_rhs.neg() }
}
