//! Ising and spherical p-spin glasses: energies, descent on the sphere, and
//! the index of the critical points it finds.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{dot, gram_schmidt, jacobi_eigen, norm, solve, SymmetricMatrix};
use crate::poly::Polynomial;
use crate::rng;
use crate::stats::{median, spearman};

#[derive(Debug, Error, PartialEq)]
pub enum SpinError {
    #[error("spins violate the spherical constraint: sum of squares {got}, expected {expected}")]
    ConstraintViolation { expected: f64, got: f64 },
    #[error("descent diverged at iteration {0}")]
    Diverged(usize),
    #[error("expected {expected} spins, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, SpinError>;

/// Open-boundary 2-D lattice with Gaussian nearest-neighbour couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingSystem {
    pub rows: usize,
    pub cols: usize,
    /// `horizontal[r * (cols − 1) + c]` couples `(r, c)` and `(r, c + 1)`.
    pub horizontal: Vec<f64>,
    /// `vertical[r * cols + c]` couples `(r, c)` and `(r + 1, c)`.
    pub vertical: Vec<f64>,
    pub spins: Vec<i8>,
}

impl IsingSystem {
    pub fn sample<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let horizontal = (0..rows * cols.saturating_sub(1)).map(|_| rng.sample(StandardNormal)).collect();
        let vertical = (0..rows.saturating_sub(1) * cols).map(|_| rng.sample(StandardNormal)).collect();
        let spins = (0..rows * cols).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        IsingSystem {
            rows,
            cols,
            horizontal,
            vertical,
            spins,
        }
    }

    /// `(i, j, J_ij)` for every neighbouring pair, sites numbered row-major.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.horizontal.len() + self.vertical.len());
        for r in 0..self.rows {
            for c in 0..self.cols.saturating_sub(1) {
                let i = r * self.cols + c;
                out.push((i, i + 1, self.horizontal[r * (self.cols - 1) + c]));
            }
        }
        for r in 0..self.rows.saturating_sub(1) {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                out.push((i, i + self.cols, self.vertical[i]));
            }
        }
        out
    }
}

/// `H = −Σ J_ij σ_i σ_j` over neighbouring pairs.
pub fn ising_energy(sys: &IsingSystem) -> f64 {
    -sys
        .pairs()
        .iter()
        .map(|&(i, j, w)| w * f64::from(sys.spins[i]) * f64::from(sys.spins[j]))
        .sum::<f64>()
}

/// Spherical p-spin model `H = −Σ_{i₁>…>i_p} J σ_{i₁}⋯σ_{i_p}` on
/// `Σσ² = N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PSpinSystem {
    pub n: usize,
    pub p: usize,
    /// Strictly decreasing index tuples with their couplings.
    pub terms: Vec<(Vec<usize>, f64)>,
}

fn decreasing_tuples(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(hi: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for i in (left - 1)..hi {
            prefix.push(i);
            rec(i, left - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, p, &mut Vec::with_capacity(p), &mut out);
    out
}

impl PSpinSystem {
    /// Couplings `N(0, p!/(2N^{p−1}))`, so that energy per spin stays O(1).
    pub fn sample<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Self> {
        if p < 2 || p > n {
            return Err(SpinError::InvalidParameter(format!("need 2 <= p <= N, got p={p}, N={n}")));
        }
        let fact: f64 = (1..=p).map(|k| k as f64).product();
        let sd = (fact / (2.0 * (n as f64).powi(p as i32 - 1))).sqrt();
        let terms = decreasing_tuples(n, p)
            .into_iter()
            .map(|t| {
                let z: f64 = rng.sample(StandardNormal);
                (t, z * sd)
            })
            .collect();
        Ok(PSpinSystem { n, p, terms })
    }

    pub fn zero(n: usize, p: usize) -> Self {
        PSpinSystem {
            n,
            p,
            terms: decreasing_tuples(n, p).into_iter().map(|t| (t, 0.0)).collect(),
        }
    }

    fn check(&self, sigma: &[f64]) -> Result<()> {
        if sigma.len() != self.n {
            return Err(SpinError::DimensionMismatch {
                expected: self.n,
                got: sigma.len(),
            });
        }
        let s = dot(sigma, sigma);
        if (s - self.n as f64).abs() > 1e-9 {
            return Err(SpinError::ConstraintViolation {
                expected: self.n as f64,
                got: s,
            });
        }
        Ok(())
    }

    /// Energy at any `σ`, on the sphere or not.
    pub fn energy_unconstrained(&self, sigma: &[f64]) -> f64 {
        -self
            .terms
            .iter()
            .map(|(t, j)| j * t.iter().map(|&i| sigma[i]).product::<f64>())
            .sum::<f64>()
    }

    fn euclidean_gradient(&self, sigma: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (t, j) in &self.terms {
            for k in 0..t.len() {
                let rest: f64 = t.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, &i)| sigma[i]).product();
                g[t[k]] -= j * rest;
            }
        }
        g
    }

    fn euclidean_hessian(&self, sigma: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut h = vec![0.0; n * n];
        for (t, j) in &self.terms {
            for a in 0..t.len() {
                for b in (a + 1)..t.len() {
                    let rest: f64 = t
                        .iter()
                        .enumerate()
                        .filter(|&(m, _)| m != a && m != b)
                        .map(|(_, &i)| sigma[i])
                        .product();
                    h[t[a] * n + t[b]] -= j * rest;
                    h[t[b] * n + t[a]] -= j * rest;
                }
            }
        }
        h
    }

    /// The energy as an explicit polynomial in the spins.
    pub fn polynomial(&self) -> Polynomial<f64> {
        Polynomial::from_terms(
            self.n,
            self.terms.iter().map(|(t, j)| {
                let mut a = vec![0u32; self.n];
                for &i in t {
                    a[i] = 1;
                }
                (a, -j)
            }),
        )
    }
}

/// Euclidean gradient minus its radial part.
fn project(g: &[f64], sigma: &[f64]) -> Vec<f64> {
    let r = dot(g, sigma) / dot(sigma, sigma);
    g.iter().zip(sigma).map(|(gi, si)| gi - r * si).collect()
}

/// Energy and Riemannian gradient; `σ` must satisfy the constraint.
pub fn pspin_energy(sys: &PSpinSystem, sigma: &[f64]) -> Result<(f64, Vec<f64>)> {
    sys.check(sigma)?;
    Ok((sys.energy_unconstrained(sigma), project(&sys.euclidean_gradient(sigma), sigma)))
}

fn renormalise(sigma: &mut [f64]) {
    let s = (sigma.len() as f64).sqrt() / norm(sigma);
    sigma.iter_mut().for_each(|v| *v *= s);
}

/// Uniform point on the sphere `Σσ² = N`.
pub fn random_sphere_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    renormalise(&mut s);
    s
}

#[derive(Clone, Debug)]
pub struct SphereDescent {
    pub sigma: Vec<f64>,
    pub energy: f64,
    pub grad_norm: f64,
    /// Energy before each step and after the last.
    pub energies: Vec<f64>,
}

/// Projected gradient steps `σ ← σ − η·grad`, each followed by rescaling
/// to the sphere. Stops early once the gradient vanishes.
pub fn spherical_descent(sys: &PSpinSystem, sigma0: &[f64], steps: usize, rate: f64) -> Result<SphereDescent> {
    sys.check(sigma0)?;
    let mut sigma = sigma0.to_vec();
    let mut energies = Vec::new();
    for it in 0..steps {
        let e = sys.energy_unconstrained(&sigma);
        if !e.is_finite() {
            return Err(SpinError::Diverged(it));
        }
        energies.push(e);
        let g = project(&sys.euclidean_gradient(&sigma), &sigma);
        if norm(&g) == 0.0 {
            break;
        }
        for (s, gi) in sigma.iter_mut().zip(&g) {
            *s -= rate * gi;
        }
        renormalise(&mut sigma);
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(SpinError::Diverged(it));
        }
    }
    let energy = sys.energy_unconstrained(&sigma);
    energies.push(energy);
    let grad_norm = norm(&project(&sys.euclidean_gradient(&sigma), &sigma));
    Ok(SphereDescent {
        sigma,
        energy,
        grad_norm,
        energies,
    })
}

/// Orthonormal basis of the tangent space at `σ`, from the standard basis
/// with the `σ` direction removed.
fn tangent_basis(sigma: &[f64]) -> Vec<Vec<f64>> {
    let n = sigma.len();
    let mut seed = vec![sigma.to_vec()];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        seed.push(e);
    }
    let mut b = gram_schmidt(&seed);
    b.remove(0);
    b.truncate(n - 1);
    b
}

/// Hessian of `H` restricted to the sphere, in a tangent basis: the
/// projection of `∇²H − (⟨∇H, σ⟩/N) I`, of size `N − 1`.
pub fn constrained_hessian(sys: &PSpinSystem, sigma: &[f64]) -> SymmetricMatrix {
    let (m, _) = constrained_hessian_with_basis(sys, sigma);
    m
}

fn constrained_hessian_with_basis(sys: &PSpinSystem, sigma: &[f64]) -> (SymmetricMatrix, Vec<Vec<f64>>) {
    let n = sys.n;
    let g = sys.euclidean_gradient(sigma);
    let lambda = dot(&g, sigma) / dot(sigma, sigma);
    let mut h = sys.euclidean_hessian(sigma);
    for i in 0..n {
        h[i * n + i] -= lambda;
    }
    let basis = tangent_basis(sigma);
    let hb: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| (0..n).map(|i| dot(&h[i * n..(i + 1) * n], b)).collect())
        .collect();
    let m = SymmetricMatrix::from_upper(basis.len(), |a, c| 0.5 * (dot(&basis[a], &hb[c]) + dot(&basis[c], &hb[a])));
    (m, basis)
}

/// Riemannian Newton iteration to the nearest critical point of any index;
/// steps are capped at unit length. `None` if `‖grad‖ < 1e-9` is not reached.
pub fn newton_polish(sys: &PSpinSystem, sigma0: &[f64], max_iters: usize) -> Option<Vec<f64>> {
    let mut sigma = sigma0.to_vec();
    for _ in 0..max_iters {
        let g = project(&sys.euclidean_gradient(&sigma), &sigma);
        if norm(&g) < 1e-9 {
            return Some(sigma);
        }
        let (m, basis) = constrained_hessian_with_basis(sys, &sigma);
        let rhs: Vec<f64> = basis.iter().map(|b| -dot(b, &g)).collect();
        let d = solve(m.dim(), m.as_slice(), &rhs)?;
        let mut step = vec![0.0; sys.n];
        for (dk, b) in d.iter().zip(&basis) {
            for (s, bi) in step.iter_mut().zip(b) {
                *s += dk * bi;
            }
        }
        let len = norm(&step);
        if len > 1.0 {
            step.iter_mut().for_each(|s| *s /= len);
        }
        for (s, st) in sigma.iter_mut().zip(&step) {
            *s += st;
        }
        renormalise(&mut sigma);
        if sigma.iter().any(|v| !v.is_finite()) {
            return None;
        }
    }
    let g = project(&sys.euclidean_gradient(&sigma), &sigma);
    (norm(&g) < 1e-9).then_some(sigma)
}

/// Gradient norm below which a point counts as critical.
pub const CRITICAL_GRAD_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ProfileConfig {
    /// Descent runs a uniform number of steps in `0..max_descent_steps`
    /// before the Newton polish, so the polish lands on critical points at
    /// many energy levels.
    pub max_descent_steps: usize,
    pub rate: f64,
    pub polish_iters: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            max_descent_steps: 60,
            rate: 0.05,
            polish_iters: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfilePoint {
    pub energy_per_spin: f64,
    pub index_count: usize,
    pub index_fraction: f64,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Profile {
    pub system: PSpinSystem,
    pub points: Vec<ProfilePoint>,
}

impl Profile {
    pub fn converged(&self) -> Vec<&ProfilePoint> {
        self.points.iter().filter(|p| p.converged).collect()
    }

    /// Spearman correlation of energy and index over converged points.
    pub fn spearman(&self) -> f64 {
        let c = self.converged();
        let e: Vec<f64> = c.iter().map(|p| p.energy_per_spin).collect();
        let i: Vec<f64> = c.iter().map(|p| p.index_count as f64).collect();
        spearman(&e, &i)
    }

    /// Median index among the lowest-energy tenth of converged points.
    pub fn lowest_decile_median_index(&self) -> f64 {
        let mut c = self.converged();
        c.sort_by(|a, b| a.energy_per_spin.total_cmp(&b.energy_per_spin));
        let k = (c.len() / 10).max(1).min(c.len());
        let idx: Vec<f64> = c[..k].iter().map(|p| p.index_count as f64).collect();
        if idx.is_empty() {
            f64::NAN
        } else {
            median(&idx)
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("energy_per_spin,index,index_fraction,gradnorm,converged\n");
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{:e},{}\n",
                p.energy_per_spin, p.index_count, p.index_fraction, p.grad_norm, p.converged as u8
            ));
        }
        s
    }
}

/// One random system (substream 0 of `seed`) and `trials` critical points
/// reached from random starts (substream `t + 1` for trial `t`).
pub fn index_energy_profile(n: usize, p: usize, trials: usize, seed: u64, cfg: &ProfileConfig) -> Result<Profile> {
    let system = PSpinSystem::sample(n, p, &mut rng::substream(seed, 0))?;
    let points = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::substream(seed, t as u64 + 1);
            let start = random_sphere_point(n, &mut r);
            let steps = if cfg.max_descent_steps == 0 {
                0
            } else {
                r.random_range(0..cfg.max_descent_steps)
            };
            let descended = spherical_descent(&system, &start, steps, cfg.rate)?;
            let sigma = newton_polish(&system, &descended.sigma, cfg.polish_iters).unwrap_or(descended.sigma);
            let grad_norm = norm(&project(&system.euclidean_gradient(&sigma), &sigma));
            let eig = jacobi_eigen(&constrained_hessian(&system, &sigma), 1e-14).values;
            let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let index_count = eig.iter().filter(|&&l| l < -1e-9 * scale).count();
            Ok(ProfilePoint {
                energy_per_spin: system.energy_unconstrained(&sigma) / n as f64,
                index_count,
                index_fraction: index_count as f64 / (n - 1) as f64,
                grad_norm,
                converged: grad_norm <= CRITICAL_GRAD_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Profile { system, points })
}

/// Distinct exponent shapes (sorted non-zero exponents) of the top-degree
/// monomials. A depth-`d` multi-linear network and a `p`-spin energy share
/// the single shape `[1; d]` exactly when `p = d`.
pub fn monomial_shapes(poly: &Polynomial<f64>) -> BTreeSet<Vec<u32>> {
    let top = poly.degree();
    poly.terms()
        .filter(|(a, _)| a.iter().sum::<u32>() == top)
        .map(|(a, _)| {
            let mut s: Vec<u32> = a.iter().copied().filter(|&e| e > 0).collect();
            s.sort_unstable();
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::{activation_pattern, NeuronKind};
    use crate::polyland::{tests::random_net, ParamNet};

    #[test]
    fn ising_pairs() {
        let mut sys = IsingSystem {
            rows: 1,
            cols: 2,
            horizontal: vec![1.0],
            vertical: vec![],
            spins: vec![1, 1],
        };
        assert_eq!(ising_energy(&sys), -1.0);
        sys.spins = vec![1, -1];
        assert_eq!(ising_energy(&sys), 1.0);
        let mut r = rng::stream(3);
        for _ in 0..100 {
            let mut s = IsingSystem::sample(4, 5, &mut r);
            assert_eq!(s.pairs().len(), 4 * 4 + 3 * 5);
            let e = ising_energy(&s);
            s.spins.iter_mut().for_each(|v| *v = -*v);
            assert_eq!(ising_energy(&s), e);
        }
    }

    #[test]
    fn tuples_are_decreasing() {
        let t = decreasing_tuples(5, 3);
        assert_eq!(t.len(), 10);
        assert!(t.iter().all(|v| v.windows(2).all(|w| w[0] > w[1])));
    }

    #[test]
    fn energy_parity_and_projection() {
        let mut r = rng::stream(5);
        for p in [2, 3, 4] {
            let sys = PSpinSystem::sample(8, p, &mut r).unwrap();
            let s = random_sphere_point(8, &mut r);
            let (e, g) = pspin_energy(&sys, &s).unwrap();
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            let (en, _) = pspin_energy(&sys, &neg).unwrap();
            if p % 2 == 0 {
                assert!((e - en).abs() < 1e-12);
            } else {
                assert!((e + en).abs() < 1e-12);
            }
            assert!(dot(&g, &s).abs() <= 1e-10);
        }
        let sys = PSpinSystem::sample(4, 2, &mut r).unwrap();
        assert!(matches!(
            pspin_energy(&sys, &[1.0, 1.0, 1.0, 1.1]),
            Err(SpinError::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn quadratic_case_is_a_form() {
        let mut r = rng::stream(6);
        let sys = PSpinSystem::sample(6, 2, &mut r).unwrap();
        let mut j = vec![0.0; 36];
        for (t, w) in &sys.terms {
            j[t[0] * 6 + t[1]] = *w; // upper-triangular in (larger, smaller)
        }
        let s = random_sphere_point(6, &mut r);
        let form: f64 = (0..6).map(|a| (0..6).map(|b| s[a] * j[a * 6 + b] * s[b]).sum::<f64>()).sum();
        assert!((sys.energy_unconstrained(&s) + form).abs() < 1e-12);
    }

    #[test]
    fn polynomial_expansion_matches() {
        let mut r = rng::stream(7);
        for (n, p) in [(6, 2), (8, 3), (10, 3), (7, 4)] {
            let sys = PSpinSystem::sample(n, p, &mut r).unwrap();
            let poly = sys.polynomial();
            for _ in 0..20 {
                let s = random_sphere_point(n, &mut r);
                let a = poly.eval(&s);
                let b = sys.energy_unconstrained(&s);
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300) || (a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_couplings_stay_put() {
        let sys = PSpinSystem::zero(5, 3);
        let s = random_sphere_point(5, &mut rng::stream(1));
        let d = spherical_descent(&sys, &s, 50, 0.1).unwrap();
        assert_eq!(d.sigma, s);
        assert_eq!(d.grad_norm, 0.0);
    }

    #[test]
    fn two_spin_finds_top_eigenvector() {
        let mut r = rng::stream(8);
        let n = 10;
        let sys = PSpinSystem::sample(n, 2, &mut r).unwrap();
        let s_mat = SymmetricMatrix::from_upper(n, |a, b| {
            if a == b {
                0.0
            } else {
                sys.terms.iter().find(|(t, _)| t[0] == b && t[1] == a).unwrap().1
            }
        });
        let eig = jacobi_eigen(&s_mat, 1e-14);
        let start = random_sphere_point(n, &mut r);
        let d = spherical_descent(&sys, &start, 20_000, 0.2).unwrap();
        // H = −½ σᵀSσ is minimised on the top eigenvector ray
        let want = -0.5 * n as f64 * eig.values[0];
        assert!((d.energy - want).abs() < 1e-8, "{} {}", d.energy, want);
        let cos = dot(&d.sigma, &eig.vectors[0]).abs() / norm(&d.sigma);
        assert!((cos - 1.0).abs() < 1e-6);
    }

    #[test]
    fn small_rate_descent_is_monotone_and_on_sphere() {
        for seed in 0..100u64 {
            let mut r = rng::stream(seed);
            let sys = PSpinSystem::sample(10, 3, &mut r).unwrap();
            let s = random_sphere_point(10, &mut r);
            let d = spherical_descent(&sys, &s, 200, 1e-3).unwrap();
            assert!(d.energies.windows(2).all(|w| w[1] <= w[0] + 1e-12), "seed {seed}");
            assert!((dot(&d.sigma, &d.sigma) - 10.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn descent_converges_mostly() {
        let sys = PSpinSystem::sample(20, 3, &mut rng::stream(99)).unwrap();
        let ok = (0..100u64)
            .into_par_iter()
            .filter(|&t| {
                let s = random_sphere_point(20, &mut rng::substream(99, t + 1));
                spherical_descent(&sys, &s, 5000, 0.1).unwrap().grad_norm <= CRITICAL_GRAD_TOL
            })
            .count();
        assert!(ok >= 95, "{ok}");
    }

    #[test]
    fn profile_layering_small() {
        let prof = index_energy_profile(12, 3, 80, 4, &ProfileConfig::default()).unwrap();
        let conv = prof.converged();
        assert!(conv.len() >= 60);
        assert!(conv.iter().all(|p| p.index_count <= 11));
        assert!(prof.spearman() > 0.0);
        assert_eq!(prof.lowest_decile_median_index(), 0.0);
        let again = index_energy_profile(12, 3, 80, 4, &ProfileConfig::default()).unwrap();
        assert_eq!(prof.to_csv(), again.to_csv());
    }

    #[test]
    fn monomial_shapes_match_when_depth_equals_order() {
        let mut r = rng::stream(2);
        for d in [2usize, 3] {
            let net = random_net(40 + d as u64, &vec![3; d - 1], 3, NeuronKind::Linear);
            let x = [0.5, -0.25, 0.75];
            let pattern = activation_pattern(&net, &x).unwrap().pattern;
            let pn = ParamNet::new(net).unwrap();
            let poly = pn.polynomial(&x, &pattern).unwrap();
            let spin = PSpinSystem::sample(6, d, &mut r).unwrap().polynomial();
            assert_eq!(monomial_shapes(&poly), monomial_shapes(&spin), "d = {d}");
            let other = PSpinSystem::sample(6, d + 1, &mut r).unwrap().polynomial();
            assert_ne!(monomial_shapes(&poly), monomial_shapes(&other));
        }
    }
}
