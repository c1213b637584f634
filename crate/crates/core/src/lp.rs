//! Dense primal simplex over a generic ordered field, plus the max-margin
//! feasibility probe used to decide whether an open polyhedral cell is
//! nonempty inside a box.
//!
//! The rational instantiation is exact; the float one compares against a
//! small absolute epsilon. Bland's rule guarantees termination in both.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

pub trait LpScalar: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn abs(&self) -> Self;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn lt(&self, o: &Self) -> bool;
    fn to_f64(&self) -> f64;
}

const FLOAT_EPS: f64 = 1e-12;

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
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
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_positive(&self) -> bool {
        *self > FLOAT_EPS
    }
    fn is_negative(&self) -> bool {
        *self < -FLOAT_EPS
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
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
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn to_f64(&self) -> f64 {
        crate::rational::to_f64(self)
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome<T> {
    Optimal { value: T, point: Vec<T> },
    Unbounded,
}

/// Maximises `c·z` subject to `A z ≤ b`, `z ≥ 0`, with `b ≥ 0` so the slack
/// basis is feasible from the start.
pub fn maximize<T: LpScalar>(a: &[Vec<T>], b: &[T], c: &[T]) -> LpOutcome<T> {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    assert!(b.iter().all(|v| !v.is_negative()), "rhs must be nonnegative");
    let width = n + m + 1;
    // rows 0..m constraints, row m objective (reduced costs as -c)
    let mut t: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n);
        let mut r = row.clone();
        r.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        r.push(b[i].clone());
        t.push(r);
    }
    let mut obj: Vec<T> = c.iter().map(|v| T::zero().sub(v)).collect();
    obj.extend((0..=m).map(|_| T::zero()));
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Bland: lowest-index column with negative reduced cost
    while let Some(col) = (0..width - 1).find(|&j| t[m][j].is_negative()) {
        let mut pivot: Option<(usize, T)> = None;
        for i in 0..m {
            if t[i][col].is_positive() {
                let ratio = t[i][width - 1].div(&t[i][col]);
                let better = match &pivot {
                    None => true,
                    Some((pi, best)) => {
                        ratio.lt(best) || (!best.lt(&ratio) && basis[i] < basis[*pi])
                    }
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = pivot else {
            return LpOutcome::Unbounded;
        };
        let p = t[row][col].clone();
        for v in t[row].iter_mut() {
            *v = v.div(&p);
        }
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col].clone();
            if f.is_positive() || f.is_negative() {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v = v.sub(&f.mul(pv));
                }
            }
        }
        basis[row] = col;
    }
    let mut point = vec![T::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            point[bv] = t[i][width - 1].clone();
        }
    }
    LpOutcome::Optimal {
        value: t[m][width - 1].clone(),
        point,
    }
}

/// Strict inequality `normal·x + offset > 0`.
#[derive(Clone, Debug)]
pub struct OpenHalfspace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

#[derive(Clone, Debug)]
pub struct MarginProbe<T> {
    /// Largest `t ≤ 1` with every (row-normalised) constraint holding with
    /// slack `t`; positive iff the open cell meets the open box.
    pub margin: T,
    pub point: Vec<T>,
}

/// Chebyshev-style probe of `{x : all halfspaces hold} ∩ (lo, hi)`.
/// Each halfspace is scaled by the max-norm of its normal; halfspaces with a
/// zero normal are decided by the sign of their offset.
pub fn max_margin<T: LpScalar>(halfspaces: &[OpenHalfspace<T>], lo: &[T], hi: &[T]) -> MarginProbe<T> {
    let d = lo.len();
    assert_eq!(hi.len(), d);
    let mut rows: Vec<(Vec<T>, T)> = Vec::new();
    for h in halfspaces {
        assert_eq!(h.normal.len(), d);
        let scale = h
            .normal
            .iter()
            .fold(T::zero(), |acc, v| if acc.lt(&v.abs()) { v.abs() } else { acc });
        if !scale.is_positive() {
            if !h.offset.is_positive() {
                let midpoint = lo
                    .iter()
                    .zip(hi)
                    .map(|(l, u)| l.add(u).div(&T::one().add(&T::one())))
                    .collect();
                return MarginProbe {
                    margin: h.offset.clone(),
                    point: midpoint,
                };
            }
            continue;
        }
        let normal: Vec<T> = h.normal.iter().map(|v| v.div(&scale)).collect();
        rows.push((normal, h.offset.div(&scale)));
    }

    // x = lo + y, y >= 0; t = s - K, s >= 0. For a row a·x + b >= t:
    //   -a·y + s <= K + a·lo + b
    let values_at_lo: Vec<T> = rows
        .iter()
        .map(|(a, b)| a.iter().zip(lo).fold(b.clone(), |acc, (ai, li)| acc.add(&ai.mul(li))))
        .collect();
    let mut k = T::zero();
    for v in &values_at_lo {
        let neg = T::zero().sub(v);
        if k.lt(&neg) {
            k = neg;
        }
    }
    let mut a_rows: Vec<Vec<T>> = Vec::new();
    let mut b_rows: Vec<T> = Vec::new();
    for ((a, _), v) in rows.iter().zip(&values_at_lo) {
        let mut r: Vec<T> = a.iter().map(|ai| T::zero().sub(ai)).collect();
        r.push(T::one());
        a_rows.push(r);
        b_rows.push(k.add(v));
    }
    for j in 0..d {
        let width = hi[j].sub(&lo[j]);
        // y_j >= t
        let mut r = vec![T::zero(); d + 1];
        r[j] = T::zero().sub(&T::one());
        r[d] = T::one();
        a_rows.push(r);
        b_rows.push(k.clone());
        // hi - x_j >= t
        let mut r = vec![T::zero(); d + 1];
        r[j] = T::one();
        r[d] = T::one();
        a_rows.push(r);
        b_rows.push(k.add(&width));
    }
    // t <= 1
    let mut r = vec![T::zero(); d + 1];
    r[d] = T::one();
    a_rows.push(r);
    b_rows.push(k.add(&T::one()));

    let mut c = vec![T::zero(); d + 1];
    c[d] = T::one();
    match maximize(&a_rows, &b_rows, &c) {
        LpOutcome::Optimal { point, .. } => {
            let margin = point[d].sub(&k);
            let x = (0..d).map(|j| lo[j].add(&point[j])).collect();
            MarginProbe { margin, point: x }
        }
        LpOutcome::Unbounded => unreachable!("margin is bounded above by 1"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn small_lp_optimum() {
        // max x + y st x + 2y <= 4, 3x + y <= 6
        let a = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        match maximize(&a, &[4.0, 6.0], &[1.0, 1.0]) {
            LpOutcome::Optimal { value, point } => {
                assert!((value - 2.8).abs() < 1e-12);
                assert!((point[0] - 1.6).abs() < 1e-12);
            }
            LpOutcome::Unbounded => panic!(),
        }
    }

    #[test]
    fn unbounded_detected() {
        let a = vec![vec![1.0, -1.0]];
        assert!(matches!(maximize(&a, &[1.0], &[1.0, 0.0]), LpOutcome::Unbounded));
    }

    #[test]
    fn exact_margin_for_open_triangle() {
        // x > 0, y > 0, 1 - x - y > 0 in box (-10,10)^2
        let hs = vec![
            OpenHalfspace { normal: vec![int(1), int(0)], offset: int(0) },
            OpenHalfspace { normal: vec![int(0), int(1)], offset: int(0) },
            OpenHalfspace { normal: vec![int(-1), int(-1)], offset: int(1) },
        ];
        let probe = max_margin(&hs, &[int(-10), int(-10)], &[int(10), int(10)]);
        assert_eq!(probe.margin, frac(1, 3));
        assert_eq!(probe.point, vec![frac(1, 3), frac(1, 3)]);
    }

    #[test]
    fn empty_open_cell_has_nonpositive_margin() {
        // x > 0 and -x > 0
        let hs = vec![
            OpenHalfspace { normal: vec![int(1)], offset: int(0) },
            OpenHalfspace { normal: vec![int(-1)], offset: int(0) },
        ];
        let probe = max_margin(&hs, &[int(-5)], &[int(5)]);
        assert!(!LpScalar::is_positive(&probe.margin));
        // a line touching the box from outside
        let hs = vec![OpenHalfspace { normal: vec![int(1)], offset: int(-5) }];
        let probe = max_margin(&hs, &[int(-5)], &[int(5)]);
        assert!(!LpScalar::is_positive(&probe.margin));
    }
}
