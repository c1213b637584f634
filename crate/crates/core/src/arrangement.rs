//! Hyperplane arrangements: the closed-form region count, the layerwise
//! product bound and an exact cell enumerator.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::geometry::{Affine2, Polygon};
use crate::lp::{self, OpenHalfspace};
use crate::rational::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArrangementError {
    #[error("degenerate box: side {axis} has lo >= hi")]
    DegenerateBox { axis: usize },
    #[error("hyperplane {0} has a zero normal")]
    ZeroNormal(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// `r(n, d) = Σ_{i=0}^{d} C(n, i)`, the number of regions cut out of `R^d`
/// by `n` hyperplanes in general position.
pub fn region_count_formula(n: u64, d: u64) -> BigUint {
    let mut total = BigUint::zero();
    let mut binom = BigUint::one();
    for i in 0..=d.min(n) {
        total += &binom;
        binom = binom * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    total
}

/// `Π r(n_i, d)` over the layer widths.
pub fn layerwise_upper_bound(widths: &[u64], d: u64) -> BigUint {
    widths
        .iter()
        .fold(BigUint::one(), |acc, &n| acc * region_count_formula(n, d))
}

/// `{x : normal·x + offset = 0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl Hyperplane {
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Self {
        Hyperplane { normal, offset }
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.normal
            .iter()
            .zip(x)
            .fold(self.offset.clone(), |acc, (a, v)| acc + a * v)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.normal
            .iter()
            .zip(x)
            .fold(rational::to_f64(&self.offset), |acc, (a, v)| acc + rational::to_f64(a) * v)
    }
}

/// `true` is the positive side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector {
    pub signs: Vec<bool>,
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(if s { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Axis-aligned open box.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

pub const DEFAULT_HALF_WIDTH: i64 = 1000;

impl BoundingBox {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self, ArrangementError> {
        if lo.len() != hi.len() {
            return Err(ArrangementError::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if let Some(axis) = (0..lo.len()).find(|&i| lo[i] >= hi[i]) {
            return Err(ArrangementError::DegenerateBox { axis });
        }
        Ok(BoundingBox { lo, hi })
    }

    pub fn symmetric(d: usize, half_width: Rational) -> Result<Self, ArrangementError> {
        Self::new(vec![-half_width.clone(); d], vec![half_width; d])
    }

    /// `[−1000, 1000]^d`.
    pub fn default_for(d: usize) -> Self {
        Self::symmetric(d, rational::int(DEFAULT_HALF_WIDTH)).expect("nondegenerate")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn rectangle(&self) -> Polygon {
        assert_eq!(self.dim(), 2);
        Polygon::rectangle(
            [self.lo[0].clone(), self.lo[1].clone()],
            [self.hi[0].clone(), self.hi[1].clone()],
        )
    }
}

/// One cell of an arrangement, with a witness point inside it.
#[derive(Clone, Debug)]
pub struct Cell {
    pub signs: SignVector,
    pub witness: Vec<Rational>,
    /// Exact polygon, present in the plane.
    pub polygon: Option<Polygon>,
}

/// Sign vectors whose open cell meets the open box, in lexicographic order.
/// Exact polygon splitting in the plane; LP probes in other dimensions.
pub fn enumerate_regions(
    hyperplanes: &[Hyperplane],
    bbox: &BoundingBox,
) -> Result<Vec<SignVector>, ArrangementError> {
    Ok(enumerate_cells(hyperplanes, bbox)?
        .into_iter()
        .map(|c| c.signs)
        .collect())
}

pub fn enumerate_cells(
    hyperplanes: &[Hyperplane],
    bbox: &BoundingBox,
) -> Result<Vec<Cell>, ArrangementError> {
    let d = bbox.dim();
    if d == 0 {
        return Err(ArrangementError::DegenerateBox { axis: 0 });
    }
    for (i, h) in hyperplanes.iter().enumerate() {
        if h.dim() != d {
            return Err(ArrangementError::DimensionMismatch {
                expected: d,
                got: h.dim(),
            });
        }
        if h.normal.iter().all(Zero::is_zero) {
            return Err(ArrangementError::ZeroNormal(i));
        }
    }
    let mut cells = if d == 2 {
        planar_cells(hyperplanes, bbox)
    } else {
        lp_cells(hyperplanes, bbox)
    };
    cells.sort_by(|a, b| a.signs.cmp(&b.signs));
    Ok(cells)
}

fn planar_cells(hyperplanes: &[Hyperplane], bbox: &BoundingBox) -> Vec<Cell> {
    let mut cells: Vec<(Vec<bool>, Polygon)> = vec![(Vec::new(), bbox.rectangle())];
    for (k, h) in hyperplanes.iter().enumerate() {
        let f = Affine2::new(h.normal[0].clone(), h.normal[1].clone(), h.offset.clone());
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (signs, poly) in cells {
            let (pos, neg) = poly.split(&f, Some(k));
            for (side, piece) in [(true, pos), (false, neg)] {
                if let Some(piece) = piece {
                    let mut s = signs.clone();
                    s.push(side);
                    next.push((s, piece));
                }
            }
        }
        cells = next;
    }
    cells
        .into_iter()
        .map(|(signs, poly)| Cell {
            signs: SignVector { signs },
            witness: poly.centroid().to_vec(),
            polygon: Some(poly),
        })
        .collect()
}

/// Ambiguity band for float margins; anything inside it is redone exactly.
const FLOAT_MARGIN_EPS: f64 = 1e-9;

/// Whether the open cell `{sign_k·(h_k·x) > 0}` meets the open box, with an
/// interior witness. Float LP first, exact LP when the float margin is small.
pub fn open_cell_witness(
    halfspaces: &[OpenHalfspace<Rational>],
    bbox: &BoundingBox,
) -> Option<Vec<Rational>> {
    let float_hs: Vec<OpenHalfspace<f64>> = halfspaces
        .iter()
        .map(|h| OpenHalfspace {
            normal: h.normal.iter().map(rational::to_f64).collect(),
            offset: rational::to_f64(&h.offset),
        })
        .collect();
    let lo: Vec<f64> = bbox.lo.iter().map(rational::to_f64).collect();
    let hi: Vec<f64> = bbox.hi.iter().map(rational::to_f64).collect();
    let probe = lp::max_margin(&float_hs, &lo, &hi);
    if probe.margin > FLOAT_MARGIN_EPS {
        // confirm the float witness exactly; fall through on failure
        let w: Option<Vec<Rational>> = probe.point.iter().map(|&v| rational::from_f64(v)).collect();
        if let Some(w) = w {
            let inside_box = w
                .iter()
                .zip(bbox.lo.iter().zip(&bbox.hi))
                .all(|(v, (l, u))| v > l && v < u);
            let inside = halfspaces.iter().all(|h| {
                h.normal
                    .iter()
                    .zip(&w)
                    .fold(h.offset.clone(), |acc, (a, v)| acc + a * v)
                    .is_positive()
            });
            if inside_box && inside {
                return Some(w);
            }
        }
    } else if probe.margin < -FLOAT_MARGIN_EPS {
        return None;
    }
    let exact = lp::max_margin(halfspaces, &bbox.lo, &bbox.hi);
    exact.margin.is_positive().then_some(exact.point)
}

fn lp_cells(hyperplanes: &[Hyperplane], bbox: &BoundingBox) -> Vec<Cell> {
    let mut cells: Vec<(Vec<bool>, Vec<Rational>)> = vec![(
        Vec::new(),
        bbox.lo
            .iter()
            .zip(&bbox.hi)
            .map(|(l, u)| (l + u) / rational::int(2))
            .collect(),
    )];
    for (k, h) in hyperplanes.iter().enumerate() {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (signs, witness) in cells {
            let v = h.eval(&witness);
            for side in [true, false] {
                let mut s = signs.clone();
                s.push(side);
                // the current witness already certifies the side it lies on
                if (side && v.is_positive()) || (!side && v.is_negative()) {
                    next.push((s, witness.clone()));
                    continue;
                }
                let hs: Vec<OpenHalfspace<Rational>> = hyperplanes[..=k]
                    .iter()
                    .zip(&s)
                    .map(|(h, &pos)| oriented(h, pos))
                    .collect();
                if let Some(w) = open_cell_witness(&hs, bbox) {
                    next.push((s, w));
                }
            }
        }
        cells = next;
    }
    cells
        .into_iter()
        .map(|(signs, witness)| Cell {
            signs: SignVector { signs },
            witness,
            polygon: None,
        })
        .collect()
}

pub fn oriented(h: &Hyperplane, positive: bool) -> OpenHalfspace<Rational> {
    if positive {
        OpenHalfspace {
            normal: h.normal.clone(),
            offset: h.offset.clone(),
        }
    } else {
        OpenHalfspace {
            normal: h.normal.iter().map(|v| -v).collect(),
            offset: -&h.offset,
        }
    }
}

/// `n,d,count` rows.
pub fn counts_csv(rows: &[(u64, u64, BigUint)]) -> String {
    let mut out = String::from("n,d,count\n");
    for (n, d, c) in rows {
        out.push_str(&format!("{n},{d},{c}\n"));
    }
    out
}
