//! Small dense linear algebra: symmetric matrices, cyclic Jacobi
//! eigendecomposition, Cholesky test, Gaussian elimination, Gram–Schmidt.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not symmetric: entry ({i},{j}) = {a} but ({j},{i}) = {b}")]
    NonSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("expected a square matrix of dimension {expected}, got {got} entries")]
    Shape { expected: usize, got: usize },
}

/// Dense symmetric matrix; symmetry holds exactly by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    /// Builds from the upper triangle: `f(i, j)` is called for `i ≤ j` only.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Rejects rows that are not exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::Shape {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if a != b {
                    return Err(LinalgError::NonSymmetric { i, j, a, b });
                }
            }
        }
        Ok(SymmetricMatrix { n, data })
    }

    /// `(A + Aᵀ)/2` of a row-major square matrix.
    pub fn symmetrize(n: usize, data: &[f64]) -> Result<Self, LinalgError> {
        if data.len() != n * n {
            return Err(LinalgError::Shape {
                expected: n,
                got: data.len(),
            });
        }
        Ok(Self::from_upper(n, |i, j| {
            0.5 * (data[i * n + j] + data[j * n + i])
        }))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i,j)` and `(j,i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| dot(row, v))
            .collect()
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymmetricMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `Q M Qᵀ` for an orthogonal `Q` given row-major.
    pub fn conjugate(&self, q: &[f64]) -> Self {
        let n = self.n;
        let mut qm = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let qik = q[i * n + k];
                if qik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    qm[i * n + j] += qik * self.data[k * n + j];
                }
            }
        }
        Self::from_upper(n, |i, j| (0..n).map(|k| qm[i * n + k] * q[j * n + k]).sum())
    }

    /// Positive definiteness by attempted Cholesky factorisation.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = self.data[j * n + j];
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = self.data[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        true
    }
}

/// Eigenpairs sorted by descending eigenvalue; `vectors[k]` pairs with `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl Eigen {
    /// `Q Λ Qᵀ` reassembled from the eigenpairs.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.values.len();
        SymmetricMatrix::from_upper(n, |i, j| {
            self.values
                .iter()
                .zip(&self.vectors)
                .map(|(l, v)| l * v[i] * v[j])
                .sum()
        })
    }
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most
/// `tol` times the Frobenius norm of the input (or exactly zero).
pub fn jacobi_eigen(m: &SymmetricMatrix, tol: f64) -> Eigen {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = tol * total.max(f64::MIN_POSITIVE);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while sweeps < 100 && off(&a) > threshold {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                // the rotation zeroes (p,q) analytically
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (a[k * n + k], (0..n).map(|i| v[i * n + k]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (values, vectors) = pairs.into_iter().unzip();
    Eigen {
        values,
        vectors,
        sweeps,
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` (row-major `A`) with partial pivoting; `None` if singular.
pub fn solve(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[pivot * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            rhs.swap(pivot, col);
        }
        for row in (col + 1)..n {
            let factor = m[row * n + col] / m[col * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..n {
            s -= m[row * n + k] * x[k];
        }
        x[row] = s / m[row * n + row];
    }
    Some(x)
}

/// Orthonormalises `vectors` in order (modified Gram–Schmidt), dropping any
/// vector that becomes numerically dependent on its predecessors.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        let original = norm(&w);
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let len = norm(&w);
        if len > 1e-10 * original.max(1e-300) && len > 0.0 {
            basis.push(w.into_iter().map(|x| x / len).collect());
        }
    }
    basis
}
