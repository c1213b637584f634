//! Sparse multivariate polynomials keyed by exponent vectors.
//!
//! The same type backs three different uses: per-cell input-space functions
//! of multiplication networks (exact rational coefficients), network outputs
//! viewed as polynomials in the learnable parameters, and random polynomial
//! ensembles (float coefficients).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{self, Rational};

/// Coefficient ring for [`Polynomial`].
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_u32(n: u32) -> Self;
    fn to_f64(&self) -> f64;
    fn pretty(&self) -> String;
}

impl Coefficient for f64 {
    fn from_u32(n: u32) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pretty(&self) -> String {
        format!("{self}")
    }
}

impl Coefficient for Rational {
    fn from_u32(n: u32) -> Self {
        rational::int(n as i64)
    }
    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }
    fn pretty(&self) -> String {
        rational::format_rational(self)
    }
}

/// Exponent vector `α`; `|α|` is the total degree of the monomial.
pub type MultiIndex = Vec<u32>;

#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial<T> {
    nvars: usize,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Coefficient> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The polynomial `x_i`.
    pub fn variable(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range for {nvars} variables");
        let mut alpha = vec![0; nvars];
        alpha[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(alpha, T::one());
        p
    }

    /// Affine form `c + Σ a_i x_i`.
    pub fn affine(coefficients: &[T], constant: T) -> Self {
        let nvars = coefficients.len();
        let mut p = Self::constant(nvars, constant);
        for (i, a) in coefficients.iter().enumerate() {
            let mut alpha = vec![0; nvars];
            alpha[i] = 1;
            p.add_term(alpha, a.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, T)>) -> Self {
        let mut p = Self::zero(nvars);
        for (alpha, c) in terms {
            p.add_term(alpha, c);
        }
        p
    }

    /// Adds `c · x^α`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, alpha: MultiIndex, c: T) {
        assert_eq!(alpha.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&alpha);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &[u32]) -> T {
        self.terms.get(alpha).cloned().unwrap_or_else(T::zero)
    }

    /// Maximum `|α|` over stored terms; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(a, c)| (a.clone(), c.clone() * s.clone())),
        )
    }

    /// Multiplies by `x_i`.
    pub fn shift(&self, i: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(a, c)| {
                let mut a = a.clone();
                a[i] += 1;
                (a, c.clone())
            }),
        )
    }

    pub fn partial(&self, i: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|(a, _)| a[i] > 0).map(|(a, c)| {
                let mut a = a.clone();
                let e = a[i];
                a[i] -= 1;
                (a, c.clone() * T::from_u32(e))
            }),
        )
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    /// Symbolic Hessian, row-major `n×n`.
    pub fn hessian(&self) -> Vec<Vec<Self>> {
        let grad = self.gradient();
        (0..self.nvars)
            .map(|i| (0..self.nvars).map(|j| grad[i].partial(j)).collect())
            .collect()
    }

    pub fn eval(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.nvars);
        let mut total = T::zero();
        for (alpha, c) in &self.terms {
            let mut term = c.clone();
            for (xi, &e) in x.iter().zip(alpha) {
                for _ in 0..e {
                    term = term * xi.clone();
                }
            }
            total = total + term;
        }
        total
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .iter()
                    .zip(x)
                    .fold(c.to_f64(), |acc, (&e, &xi)| acc * xi.powi(e as i32))
            })
            .sum()
    }

    pub fn to_f64_poly(&self) -> Polynomial<f64> {
        Polynomial::from_terms(
            self.nvars,
            self.terms.iter().map(|(a, c)| (a.clone(), c.to_f64())),
        )
    }

    /// Renders with the given variable names (defaults to `x0, x1, …`).
    pub fn display_with(&self, names: Option<&[String]>) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let name = |i: usize| match names {
            Some(n) => n[i].clone(),
            None => format!("x{i}"),
        };
        let mut parts = Vec::new();
        // highest degree first, then lexicographic
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|(a, _), (b, _)| {
            let (da, db) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (alpha, c) in keys {
            let mut factors = Vec::new();
            for (i, &e) in alpha.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(name(i)),
                    _ => factors.push(format!("{}^{}", name(i), e)),
                }
            }
            let coeff = c.pretty();
            if factors.is_empty() {
                parts.push(coeff);
            } else if c.is_one() {
                parts.push(factors.join("*"));
            } else {
                parts.push(format!("{}*{}", coeff, factors.join("*")));
            }
        }
        parts.join(" + ")
    }
}

impl<T: Coefficient> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(None))
    }
}

impl<T: Coefficient> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }
}

impl<T: Coefficient> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), -c.clone());
        }
        out
    }
}

impl<T: Coefficient> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let alpha: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(alpha, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<T: Coefficient> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        self.scale(&-T::one())
    }
}

/// All multi-indices in `n` variables with `|α| ≤ d`, graded then lexicographic.
pub fn multi_indices(n: usize, d: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, budget: u32, prefix: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(n, budget - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out.sort_by(|a, b| {
        a.iter()
            .sum::<u32>()
            .cmp(&b.iter().sum::<u32>())
            .then_with(|| b.cmp(a))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cubic() -> Polynomial<f64> {
        // 2x^3 + y^3 - xy
        Polynomial::from_terms(2, [(vec![3, 0], 2.0), (vec![0, 3], 1.0), (vec![1, 1], -1.0)])
    }

    #[test]
    fn hessian_of_example_cubic() {
        let h = cubic().hessian();
        assert_eq!(h[0][0], Polynomial::from_terms(2, [(vec![1, 0], 12.0)]));
        assert_eq!(h[0][1], Polynomial::constant(2, -1.0));
        assert_eq!(h[1][0], h[0][1]);
        assert_eq!(h[1][1], Polynomial::from_terms(2, [(vec![0, 1], 6.0)]));
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Polynomial::<f64>::variable(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn multi_index_count_matches_binomial() {
        // C(n+d, d)
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 3).len(), 20);
        assert_eq!(multi_indices(1, 0), vec![vec![0]]);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(cubic().to_string(), "2*x0^3 + x1^3 + -1*x0*x1");
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(
            a in proptest::collection::vec(-3i32..4, 6),
            b in proptest::collection::vec(-3i32..4, 6),
            x in -2.0f64..2.0, y in -2.0f64..2.0,
        ) {
            let idx = multi_indices(2, 2);
            let p = Polynomial::from_terms(2, idx.iter().cloned().zip(a.iter().map(|&v| v as f64)));
            let q = Polynomial::from_terms(2, idx.iter().cloned().zip(b.iter().map(|&v| v as f64)));
            let pq = &p * &q;
            let lhs = pq.eval_f64(&[x, y]);
            let rhs = p.eval_f64(&[x, y]) * q.eval_f64(&[x, y]);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
            prop_assert!(pq.degree() <= 4);
        }
    }
}
