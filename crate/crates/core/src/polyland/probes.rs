//! Low-dimensional views of a loss: straight-line interpolation, random
//! planes, descent restricted to random subspaces, and a minimal SGD.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{NetworkLoss, Objective, PolylandError, Result};
use crate::linalg::{dot, gram_schmidt, SymmetricMatrix};
use crate::rng;

/// `½ θᵀAθ + bᵀθ + c`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    pub a: SymmetricMatrix,
    pub b: Vec<f64>,
    pub c: f64,
}

impl Quadratic {
    pub fn new(a: SymmetricMatrix, b: Vec<f64>, c: f64) -> Self {
        assert_eq!(a.dim(), b.len(), "quadratic shape");
        Quadratic { a, b, c }
    }

    /// `½ (θ − θ*)ᵀ A (θ − θ*)`.
    pub fn centered(a: SymmetricMatrix, center: &[f64]) -> Self {
        let ac = a.mul_vec(center);
        let c = 0.5 * dot(center, &ac);
        Quadratic {
            b: ac.iter().map(|v| -v).collect(),
            a,
            c,
        }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        0.5 * self.a.quadratic_form(theta) + dot(&self.b, theta) + self.c
    }

    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let at = self.a.mul_vec(theta);
        let v = 0.5 * dot(theta, &at) + dot(&self.b, theta) + self.c;
        (v, at.iter().zip(&self.b).map(|(x, y)| x + y).collect())
    }

    fn symbolic_hessian(&self, _theta: &[f64]) -> Option<SymmetricMatrix> {
        Some(self.a.clone())
    }
}

fn check_dim(obj: &dyn Objective, theta: &[f64]) -> Result<()> {
    if theta.len() != obj.dim() {
        return Err(PolylandError::DimensionMismatch {
            expected: obj.dim(),
            got: theta.len(),
        });
    }
    Ok(())
}

/// `L((1−α)θ₀ + αθ_f)` at `steps` uniform values of `α ∈ [0, 1]`; the
/// endpoints are evaluated at `θ₀` and `θ_f` themselves.
pub fn interpolation_curve(obj: &dyn Objective, theta0: &[f64], thetaf: &[f64], steps: usize) -> Result<Vec<(f64, f64)>> {
    check_dim(obj, theta0)?;
    check_dim(obj, thetaf)?;
    if steps < 2 {
        return Err(PolylandError::InvalidParameter(format!("steps must be at least 2, got {steps}")));
    }
    Ok((0..steps)
        .into_par_iter()
        .map(|k| {
            let alpha = k as f64 / (steps - 1) as f64;
            let value = if k == 0 {
                obj.value(theta0)
            } else if k == steps - 1 {
                obj.value(thetaf)
            } else {
                let t: Vec<f64> = theta0
                    .iter()
                    .zip(thetaf)
                    .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
                    .collect();
                obj.value(&t)
            };
            (alpha, value)
        })
        .collect())
}

/// Largest amount by which the curve rises above the chord joining its
/// endpoints; zero for a convex curve.
pub fn max_interior_bump(curve: &[(f64, f64)]) -> f64 {
    let (Some(&(_, l0)), Some(&(_, l1))) = (curve.first(), curve.last()) else {
        return 0.0;
    };
    curve
        .iter()
        .map(|&(a, l)| l - ((1.0 - a) * l0 + a * l1))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneSection {
    pub grid: usize,
    pub extent: f64,
    /// Offsets along each direction, shared by both axes.
    pub offsets: Vec<f64>,
    /// Row `i` is offset `offsets[i]` along `dir1`; column `j` along `dir2`.
    pub values: Vec<f64>,
    pub dir1: Vec<f64>,
    pub dir2: Vec<f64>,
}

impl PlaneSection {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid + j]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,alpha,beta,loss\n");
        for i in 0..self.grid {
            for j in 0..self.grid {
                s.push_str(&format!("{i},{j},{},{},{}\n", self.offsets[i], self.offsets[j], self.at(i, j)));
            }
        }
        s
    }

    /// Grid size and row-major values from [`PlaneSection::to_csv`] output;
    /// `#` lines are ignored.
    pub fn grid_from_csv(text: &str) -> Result<(usize, Vec<f64>)> {
        let mut cells = Vec::new();
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(PolylandError::Data(format!("bad row {line:?}")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| PolylandError::Data(e.to_string()));
            let i: usize = f[0].parse().map_err(|_| PolylandError::Data(format!("bad index {:?}", f[0])))?;
            let j: usize = f[1].parse().map_err(|_| PolylandError::Data(format!("bad index {:?}", f[1])))?;
            cells.push((i, j, parse(f[4])?));
        }
        let grid = (cells.len() as f64).sqrt().round() as usize;
        if grid * grid != cells.len() || cells.is_empty() {
            return Err(PolylandError::Data(format!("{} cells is not a square grid", cells.len())));
        }
        let mut values = vec![f64::NAN; cells.len()];
        for (i, j, v) in cells {
            if i >= grid || j >= grid {
                return Err(PolylandError::Data(format!("index ({i},{j}) out of range")));
            }
            values[i * grid + j] = v;
        }
        Ok((grid, values))
    }
}

/// Two Gaussian directions, orthonormalised.
fn random_plane<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    for _ in 0..8 {
        let raw: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let mut b = gram_schmidt(&raw);
        if b.len() == 2 {
            let d2 = b.pop().expect("two vectors");
            let d1 = b.pop().expect("two vectors");
            return Ok((d1, d2));
        }
    }
    Err(PolylandError::InvalidParameter("could not draw independent directions".into()))
}

/// Loss on the grid `θ₀ + α d₁ + β d₂` with `α, β` uniform on
/// `[−extent, extent]`. `grid` must be odd so that the centre cell is `θ₀`.
pub fn plane_section<R: Rng + ?Sized>(
    obj: &dyn Objective,
    theta0: &[f64],
    grid: usize,
    extent: f64,
    rng: &mut R,
) -> Result<PlaneSection> {
    check_dim(obj, theta0)?;
    if grid == 0 || grid.is_multiple_of(2) {
        return Err(PolylandError::InvalidParameter(format!("grid must be odd, got {grid}")));
    }
    if theta0.len() < 2 {
        return Err(PolylandError::InvalidParameter("need at least two parameters".into()));
    }
    if !(extent.is_finite() && extent > 0.0) {
        return Err(PolylandError::InvalidParameter(format!("extent {extent}")));
    }
    let (dir1, dir2) = random_plane(rng, theta0.len())?;
    let half = (grid - 1) as i64;
    let offsets: Vec<f64> = (0..grid)
        .map(|i| {
            if half == 0 {
                0.0
            } else {
                extent * (2 * i as i64 - half) as f64 / half as f64
            }
        })
        .collect();
    let values: Vec<f64> = (0..grid * grid)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (offsets[k / grid], offsets[k % grid]);
            if a == 0.0 && b == 0.0 {
                return obj.value(theta0);
            }
            let t: Vec<f64> = (0..theta0.len()).map(|p| theta0[p] + a * dir1[p] + b * dir2[p]).collect();
            obj.value(&t)
        })
        .collect();
    Ok(PlaneSection {
        grid,
        extent,
        offsets,
        values,
        dir1,
        dir2,
    })
}

#[derive(Clone, Debug)]
pub struct DescentRun {
    pub theta: Vec<f64>,
    /// Loss before each step and after the last one.
    pub losses: Vec<f64>,
    pub final_loss: f64,
}

/// Plain fixed-step gradient descent.
pub fn gradient_descent(obj: &dyn Objective, theta0: &[f64], iters: usize, step: f64) -> Result<DescentRun> {
    check_dim(obj, theta0)?;
    let mut theta = theta0.to_vec();
    let mut losses = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let (v, g) = obj.value_and_gradient(&theta);
        losses.push(v);
        for (t, gi) in theta.iter_mut().zip(&g) {
            *t -= step * gi;
        }
    }
    let final_loss = obj.value(&theta);
    losses.push(final_loss);
    Ok(DescentRun {
        theta,
        losses,
        final_loss,
    })
}

/// Gradient descent on the coordinates `c` of `θ = θ₀ + Bc`, where `B`
/// holds `dsub` random orthonormal columns.
pub fn subspace_descent<R: Rng + ?Sized>(
    obj: &dyn Objective,
    theta0: &[f64],
    dsub: usize,
    iters: usize,
    step: f64,
    rng: &mut R,
) -> Result<DescentRun> {
    check_dim(obj, theta0)?;
    let n = theta0.len();
    if dsub == 0 || dsub > n {
        return Err(PolylandError::InvalidParameter(format!("subspace dimension {dsub} not in 1..={n}")));
    }
    let basis = loop {
        let raw: Vec<Vec<f64>> = (0..dsub).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let b = gram_schmidt(&raw);
        if b.len() == dsub {
            break b;
        }
    };
    let embed = |c: &[f64]| -> Vec<f64> {
        let mut t = theta0.to_vec();
        for (ck, bk) in c.iter().zip(&basis) {
            for (ti, bi) in t.iter_mut().zip(bk) {
                *ti += ck * bi;
            }
        }
        t
    };
    let mut c = vec![0.0; dsub];
    let mut losses = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let theta = embed(&c);
        let (v, g) = obj.value_and_gradient(&theta);
        losses.push(v);
        for (ck, bk) in c.iter_mut().zip(&basis) {
            *ck -= step * dot(bk, &g);
        }
    }
    let theta = embed(&c);
    let final_loss = obj.value(&theta);
    losses.push(final_loss);
    Ok(DescentRun {
        theta,
        losses,
        final_loss,
    })
}

#[derive(Clone, Debug)]
pub struct SgdConfig {
    pub step: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            step: 0.05,
            momentum: 0.0,
            batch_size: 8,
            epochs: 100,
            seed: 0,
        }
    }
}

/// Shuffled minibatch SGD with heavy-ball momentum; `losses` holds the
/// full-batch loss after each epoch.
pub fn sgd(loss: &NetworkLoss, theta0: &[f64], cfg: &SgdConfig) -> Result<DescentRun> {
    check_dim(loss, theta0)?;
    if cfg.batch_size == 0 {
        return Err(PolylandError::InvalidParameter("batch size must be positive".into()));
    }
    let mut r = rng::stream(cfg.seed);
    let mut theta = theta0.to_vec();
    let mut velocity = vec![0.0; theta.len()];
    let mut order: Vec<usize> = (0..loss.batch.len()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut r);
        for idx in order.chunks(cfg.batch_size) {
            let (_, g) = loss.on_indices(&theta, idx);
            for ((t, v), gi) in theta.iter_mut().zip(velocity.iter_mut()).zip(&g) {
                *v = cfg.momentum * *v - cfg.step * gi;
                *t += *v;
            }
        }
        losses.push(loss.value(&theta));
    }
    let final_loss = loss.value(&theta);
    Ok(DescentRun {
        theta,
        losses,
        final_loss,
    })
}
