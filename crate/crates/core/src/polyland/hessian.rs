//! Hessians, eigen-spectra and the local classification of critical points.

use super::{Objective, PolylandError, Result};
use crate::linalg::{jacobi_eigen, norm, SymmetricMatrix};

/// Central-difference step for [`HessianMode::FiniteDifference`].
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HessianMode {
    Symbolic,
    /// Central differences of the gradient with step `h`, then `(H + Hᵀ)/2`.
    FiniteDifference { h: f64 },
}

#[derive(Clone, Debug)]
pub struct HessianReport {
    pub matrix: SymmetricMatrix,
    /// A ReLU preactivation lies within the boundary band, so the matrix
    /// describes one side of a pattern change only.
    pub near_boundary: bool,
}

pub fn hessian(obj: &dyn Objective, theta: &[f64], mode: HessianMode) -> Result<HessianReport> {
    if theta.len() != obj.dim() {
        return Err(PolylandError::DimensionMismatch {
            expected: obj.dim(),
            got: theta.len(),
        });
    }
    let matrix = match mode {
        HessianMode::Symbolic => obj.symbolic_hessian(theta).ok_or(PolylandError::SymbolicUnavailable)?,
        HessianMode::FiniteDifference { h } => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(PolylandError::InvalidParameter(format!("step {h}")));
            }
            let n = theta.len();
            let mut data = vec![0.0; n * n];
            for j in 0..n {
                let mut p = theta.to_vec();
                let mut m = theta.to_vec();
                p[j] += h;
                m[j] -= h;
                let gp = obj.value_and_gradient(&p).1;
                let gm = obj.value_and_gradient(&m).1;
                for i in 0..n {
                    data[i * n + j] = (gp[i] - gm[i]) / (2.0 * h);
                }
            }
            SymmetricMatrix::symmetrize(n, &data)?
        }
    };
    Ok(HessianReport {
        matrix,
        near_boundary: obj.near_boundary(theta),
    })
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Eigenvalues below `−τ`.
    pub index_count: usize,
    pub index_fraction: f64,
    /// Eigenvalues within `±τ`.
    pub degenerate: usize,
    pub tau: f64,
}

/// Eigen-decomposition with zero tolerance `τ`; `None` means
/// `1e-9 · max|λ|`.
pub fn spectrum(m: &SymmetricMatrix, tau: Option<f64>) -> Spectrum {
    let eig = jacobi_eigen(m, 1e-14);
    let scale = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tau = tau.unwrap_or(1e-9 * scale);
    let index_count = eig.values.iter().filter(|&&l| l < -tau).count();
    let degenerate = eig.values.iter().filter(|&&l| l.abs() <= tau).count();
    let n = eig.values.len();
    Spectrum {
        index_fraction: if n == 0 { 0.0 } else { index_count as f64 / n as f64 },
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        index_count,
        degenerate,
        tau,
    }
}

/// [`spectrum`] for row-major input that must already be symmetric.
pub fn spectrum_of_rows(rows: &[Vec<f64>], tau: Option<f64>) -> Result<Spectrum> {
    Ok(spectrum(&SymmetricMatrix::from_rows(rows)?, tau))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriticalClass {
    LocalMin,
    LocalMax,
    Saddle,
    Degenerate,
}

impl CriticalClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CriticalClass::LocalMin => "local-min",
            CriticalClass::LocalMax => "local-max",
            CriticalClass::Saddle => "saddle",
            CriticalClass::Degenerate => "degenerate",
        }
    }
}

/// Any eigenvalue within `±τ` makes the point degenerate; otherwise the
/// signs decide.
pub fn classify_critical_point(s: &Spectrum) -> CriticalClass {
    if s.degenerate > 0 {
        CriticalClass::Degenerate
    } else if s.index_count == 0 {
        CriticalClass::LocalMin
    } else if s.index_count == s.eigenvalues.len() {
        CriticalClass::LocalMax
    } else {
        CriticalClass::Saddle
    }
}

/// Second-order change `½ dᵀMd` along a unit direction.
pub fn taylor_step_gain(m: &SymmetricMatrix, direction: &[f64]) -> Result<f64> {
    if direction.len() != m.dim() {
        return Err(PolylandError::DimensionMismatch {
            expected: m.dim(),
            got: direction.len(),
        });
    }
    let n = norm(direction);
    if (n - 1.0).abs() > 1e-9 {
        return Err(PolylandError::NonUnitDirection { norm: n });
    }
    Ok(0.5 * m.quadratic_form(direction))
}
