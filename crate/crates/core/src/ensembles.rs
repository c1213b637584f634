//! Random symmetric matrices and random polynomials: how often a random
//! critical point is a minimum, and how many critical points there are.

use rand::Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::SymmetricMatrix;
use crate::poly::{multi_indices, MultiIndex, Polynomial};
use crate::polyland::{find_critical_points, random_starts, CriticalClass};
use crate::rng;
use crate::stats::{line_fit, wilson_interval};

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("decay fit is degenerate: {0}")]
    DegenerateFit(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, EnsembleError>;

/// Gaussian orthogonal ensemble: off-diagonal entries `N(0, s²)`, diagonal
/// entries `N(0, 2s²)`, where `s` is `scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoeSpec {
    pub n: usize,
    pub scale: f64,
}

impl GoeSpec {
    pub fn new(n: usize) -> Self {
        GoeSpec { n, scale: 1.0 }
    }
}

pub fn sample_goe<R: Rng + ?Sized>(spec: &GoeSpec, rng: &mut R) -> SymmetricMatrix {
    let s = spec.scale;
    SymmetricMatrix::from_upper(spec.n, |i, j| {
        let z: f64 = rng.sample(StandardNormal);
        if i == j {
            z * s * std::f64::consts::SQRT_2
        } else {
            z * s
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p: f64,
    /// 95% Wilson interval.
    pub lo: f64,
    pub hi: f64,
}

impl ProbabilityEstimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(successes, trials);
        ProbabilityEstimate {
            successes,
            trials,
            p: successes as f64 / trials as f64,
            lo,
            hi,
        }
    }
}

const CHUNK: u64 = 1 << 14;

/// Fraction of GOE draws that are positive definite. Trials are split into
/// fixed chunks, each with its own substream, so the result does not depend
/// on the thread count.
pub fn prob_positive_definite(spec: &GoeSpec, trials: u64, seed: u64) -> Result<ProbabilityEstimate> {
    if trials == 0 || spec.n == 0 {
        return Err(EnsembleError::InvalidParameter("need n >= 1 and trials >= 1".into()));
    }
    let base = rng::derive(seed, spec.n as u64);
    let successes: u64 = rng::chunks(trials, CHUNK)
        .into_par_iter()
        .map(|(idx, _, len)| {
            let mut r = rng::substream(base, idx);
            (0..len).filter(|_| sample_goe(spec, &mut r).is_positive_definite()).count() as u64
        })
        .sum();
    Ok(ProbabilityEstimate::new(successes, trials))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// Slope of `−ln p` against `n²`.
    pub k: f64,
    pub intercept: f64,
    /// RMS residual of the `n²` model.
    pub residual: f64,
    /// RMS residual of the competing model linear in `n`.
    pub residual_linear_in_n: f64,
    /// The linear-in-`n` model explains the data at least twice as well.
    pub poor: bool,
}

pub fn fit_decay_rate(pairs: &[(usize, f64)]) -> Result<DecayFit> {
    if pairs.len() < 3 {
        return Err(EnsembleError::DegenerateFit(format!("need at least 3 points, got {}", pairs.len())));
    }
    if let Some(&(n, p)) = pairs.iter().find(|(_, p)| !(*p > 0.0 && *p <= 1.0)) {
        return Err(EnsembleError::DegenerateFit(format!("probability {p} at n={n}")));
    }
    if pairs.iter().all(|(_, p)| *p == pairs[0].1) {
        return Err(EnsembleError::DegenerateFit("all probabilities equal".into()));
    }
    let y: Vec<f64> = pairs.iter().map(|(_, p)| -p.ln()).collect();
    let n2: Vec<f64> = pairs.iter().map(|(n, _)| (n * n) as f64).collect();
    let n1: Vec<f64> = pairs.iter().map(|(n, _)| *n as f64).collect();
    let sq = line_fit(&n2, &y).ok_or_else(|| EnsembleError::DegenerateFit("all n equal".into()))?;
    let lin = line_fit(&n1, &y).ok_or_else(|| EnsembleError::DegenerateFit("all n equal".into()))?;
    Ok(DecayFit {
        k: sq.slope,
        intercept: sq.intercept,
        residual: sq.rms,
        residual_linear_in_n: lin.rms,
        poor: 2.0 * lin.rms < sq.rms,
    })
}

/// Random normal polynomial in `nvars` variables of degree `degree`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomPolynomialSpec {
    pub nvars: usize,
    pub degree: u32,
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `d! / (α₁! ⋯ αₙ! (d − |α|)!)`.
pub fn coefficient_variance(degree: u32, alpha: &[u32]) -> f64 {
    let total: u32 = alpha.iter().sum();
    assert!(total <= degree, "monomial degree exceeds polynomial degree");
    factorial(degree) / (alpha.iter().map(|&a| factorial(a)).product::<f64>() * factorial(degree - total))
}

pub fn sample_random_polynomial<R: Rng + ?Sized>(spec: &RandomPolynomialSpec, rng: &mut R) -> Polynomial<f64> {
    let terms: Vec<(MultiIndex, f64)> = multi_indices(spec.nvars, spec.degree)
        .into_iter()
        .map(|a| {
            let z: f64 = rng.sample(StandardNormal);
            let sd = coefficient_variance(spec.degree, &a).sqrt();
            (a, z * sd)
        })
        .collect();
    Polynomial::from_terms(spec.nvars, terms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalStats {
    pub trials: usize,
    pub total_points: usize,
    pub mean_count: f64,
    pub frac_local_min: f64,
    pub frac_local_max: f64,
    pub frac_saddle: f64,
    pub frac_degenerate: f64,
    /// Starts that failed to converge, summed over draws.
    pub failed_starts: usize,
}

/// Default multi-start density: starts per draw and their box half-width.
pub const STARTS_PER_DRAW: usize = 200;
pub const START_RADIUS: f64 = 3.0;

/// Critical points of `trials` random polynomials, each searched from
/// `starts` uniform starting points; draw `t` uses substream `t`.
pub fn critical_point_stats(spec: &RandomPolynomialSpec, trials: usize, seed: u64, starts: usize) -> CriticalStats {
    let per_draw: Vec<(Vec<CriticalClass>, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::substream(seed, t as u64);
            let p = sample_random_polynomial(spec, &mut r);
            let s = random_starts(&mut r, spec.nvars, starts, START_RADIUS);
            let found = find_critical_points(&p, &s);
            (found.points.iter().map(|c| c.class).collect(), found.failures.len())
        })
        .collect();
    let classes: Vec<CriticalClass> = per_draw.iter().flat_map(|(c, _)| c.iter().copied()).collect();
    let total = classes.len();
    let frac = |k: CriticalClass| {
        if total == 0 {
            0.0
        } else {
            classes.iter().filter(|&&c| c == k).count() as f64 / total as f64
        }
    };
    CriticalStats {
        trials,
        total_points: total,
        mean_count: total as f64 / trials.max(1) as f64,
        frac_local_min: frac(CriticalClass::LocalMin),
        frac_local_max: frac(CriticalClass::LocalMax),
        frac_saddle: frac(CriticalClass::Saddle),
        frac_degenerate: frac(CriticalClass::Degenerate),
        failed_starts: per_draw.iter().map(|(_, f)| f).sum(),
    }
}

/// Mean number of critical points visited until the first minimum when each
/// is a minimum independently with probability `p`.
pub fn expected_saddles_before_minimum(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(EnsembleError::InvalidProbability(p));
    }
    Ok(1.0 / p)
}

/// Empirical mean of `draws` geometric trial counts (support `1, 2, …`).
pub fn sample_geometric_mean(p: f64, draws: u64, seed: u64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(EnsembleError::InvalidProbability(p));
    }
    if draws == 0 {
        return Err(EnsembleError::InvalidParameter("draws must be positive".into()));
    }
    let g = Geometric::new(p).map_err(|_| EnsembleError::InvalidProbability(p))?;
    let total: u64 = rng::chunks(draws, CHUNK)
        .into_par_iter()
        .map(|(idx, _, len)| {
            let mut r = rng::substream(seed, idx);
            (0..len).map(|_| g.sample(&mut r) + 1).sum::<u64>()
        })
        .sum();
    Ok(total as f64 / draws as f64)
}
