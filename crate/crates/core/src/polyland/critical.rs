//! Multi-start search for the critical points of a polynomial.

use rand::Rng;
use rayon::prelude::*;

use super::hessian::{classify_critical_point, spectrum, CriticalClass, Spectrum};
use super::Objective;
use crate::linalg::{norm, solve, SymmetricMatrix};
use crate::poly::Polynomial;

/// A float polynomial with its gradient and Hessian precomputed.
#[derive(Clone, Debug)]
pub struct PolynomialObjective {
    pub poly: Polynomial<f64>,
    gradient: Vec<Polynomial<f64>>,
    hessian: Vec<Vec<Polynomial<f64>>>,
}

impl PolynomialObjective {
    pub fn new(poly: Polynomial<f64>) -> Self {
        PolynomialObjective {
            gradient: poly.gradient(),
            hessian: poly.hessian(),
            poly,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.gradient.iter().map(|g| g.eval(x)).collect()
    }

    pub fn hessian_at(&self, x: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_upper(x.len(), |i, j| self.hessian[i][j].eval(x))
    }
}

impl Objective for PolynomialObjective {
    fn dim(&self) -> usize {
        self.poly.nvars()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.poly.eval(theta)
    }

    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        (self.poly.eval(theta), self.gradient(theta))
    }

    fn symbolic_hessian(&self, theta: &[f64]) -> Option<SymmetricMatrix> {
        Some(self.hessian_at(theta))
    }
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub point: Vec<f64>,
    pub gradient_norm: f64,
    pub spectrum: Spectrum,
    pub class: CriticalClass,
}

#[derive(Clone, Debug)]
pub struct CriticalSearch {
    /// Distinct points in order of first discovery.
    pub points: Vec<CriticalPoint>,
    /// Start indices whose iteration did not reach the gradient tolerance.
    pub failures: Vec<usize>,
}

pub const GRADIENT_TOL: f64 = 1e-10;
pub const DEDUP_RADIUS: f64 = 1e-6;
const MAX_ITERS: usize = 500;

/// Levenberg–Marquardt on `∇P = 0`: steps solve `(H² + μI) δ = −H∇P`,
/// accepted when they shrink `‖∇P‖`.
fn newton_root(obj: &PolynomialObjective, start: &[f64]) -> Option<Vec<f64>> {
    let n = start.len();
    let mut x = start.to_vec();
    let mut g = obj.gradient(&x);
    let mut gn = norm(&g);
    let mut mu = 1e-6;
    for _ in 0..MAX_ITERS {
        if gn <= GRADIENT_TOL {
            return Some(x);
        }
        if !gn.is_finite() {
            return None;
        }
        let h = obj.hessian_at(&x);
        let hs = h.as_slice();
        let mut hh = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hh[i * n + j] = (0..n).map(|k| hs[i * n + k] * hs[k * n + j]).sum();
            }
        }
        let rhs: Vec<f64> = h.mul_vec(&g).iter().map(|v| -v).collect();
        let mut improved = false;
        for _ in 0..40 {
            let mut a = hh.clone();
            for i in 0..n {
                a[i * n + i] += mu;
            }
            if let Some(delta) = solve(n, &a, &rhs) {
                let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
                let tg = obj.gradient(&trial);
                let tn = norm(&tg);
                if tn < gn {
                    x = trial;
                    g = tg;
                    gn = tn;
                    mu = (mu / 4.0).max(1e-15);
                    improved = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (gn <= GRADIENT_TOL).then_some(x)
}

/// Runs the damped Newton iteration from every start (in parallel), keeps
/// converged points that are farther than [`DEDUP_RADIUS`] from earlier
/// ones, and classifies each by its Hessian spectrum.
pub fn find_critical_points(p: &Polynomial<f64>, starts: &[Vec<f64>]) -> CriticalSearch {
    let obj = PolynomialObjective::new(p.clone());
    let results: Vec<Option<Vec<f64>>> = starts.par_iter().map(|s| newton_root(&obj, s)).collect();
    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        let Some(x) = r else {
            failures.push(k);
            continue;
        };
        let dup = points.iter().any(|c| {
            let d: Vec<f64> = c.point.iter().zip(&x).map(|(a, b)| a - b).collect();
            norm(&d) <= DEDUP_RADIUS
        });
        if dup {
            continue;
        }
        let spectrum = spectrum(&obj.hessian_at(&x), None);
        points.push(CriticalPoint {
            gradient_norm: norm(&obj.gradient(&x)),
            class: classify_critical_point(&spectrum),
            spectrum,
            point: x,
        });
    }
    CriticalSearch { points, failures }
}

/// `count` starts uniform in `[−radius, radius]^n`.
pub fn random_starts<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(-radius..=radius)).collect())
        .collect()
}
