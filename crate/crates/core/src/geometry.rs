//! Exact convex polygons in the plane, split by affine functions.
//!
//! Each edge carries an optional label naming the cut that created it
//! (`None` for bounding-box edges), so renderers can tell bend lines apart.

use num_traits::{Signed, Zero};

use crate::rational::{self, Rational};

pub type Point = [Rational; 2];

/// Affine function `a·x + b` on the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine2 {
    pub a: [Rational; 2],
    pub b: Rational,
}

impl Affine2 {
    pub fn new(a0: Rational, a1: Rational, b: Rational) -> Self {
        Affine2 { a: [a0, a1], b }
    }

    pub fn eval(&self, p: &Point) -> Rational {
        &self.a[0] * &p[0] + &self.a[1] * &p[1] + &self.b
    }

    pub fn is_constant(&self) -> bool {
        self.a[0].is_zero() && self.a[1].is_zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    /// Counter-clockwise vertices.
    pub vertices: Vec<Point>,
    /// `labels[i]` labels the edge from vertex `i` to vertex `i + 1`.
    pub labels: Vec<Option<usize>>,
}

impl Polygon {
    pub fn rectangle(lo: [Rational; 2], hi: [Rational; 2]) -> Self {
        let [x0, y0] = lo;
        let [x1, y1] = hi;
        Polygon {
            vertices: vec![
                [x0.clone(), y0.clone()],
                [x1.clone(), y0],
                [x1, y1.clone()],
                [x0, y1],
            ],
            labels: vec![None; 4],
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Twice the signed area (shoelace), exact.
    pub fn double_area(&self) -> Rational {
        let n = self.vertices.len();
        let mut s = Rational::zero();
        for i in 0..n {
            let p = &self.vertices[i];
            let q = &self.vertices[(i + 1) % n];
            s += &p[0] * &q[1] - &q[0] * &p[1];
        }
        s
    }

    pub fn area(&self) -> Rational {
        self.double_area() / rational::int(2)
    }

    /// Vertex average; strictly interior for a nondegenerate convex polygon.
    pub fn centroid(&self) -> Point {
        let n = rational::int(self.vertices.len() as i64);
        let mut sx = Rational::zero();
        let mut sy = Rational::zero();
        for v in &self.vertices {
            sx += &v[0];
            sy += &v[1];
        }
        [sx / &n, sy / n]
    }

    /// Pieces where `f ≥ 0` and `f ≤ 0`; pieces of zero area are `None`.
    /// New edges along `f = 0` get `label`.
    pub fn split(&self, f: &Affine2, label: Option<usize>) -> (Option<Polygon>, Option<Polygon>) {
        let values: Vec<Rational> = self.vertices.iter().map(|v| f.eval(v)).collect();
        if values.iter().all(|v| !v.is_negative()) {
            return (Some(self.clone()), None);
        }
        if values.iter().all(|v| !v.is_positive()) {
            return (None, Some(self.clone()));
        }
        let pos = self.keep(&values, label, 1);
        let neg = self.keep(&values, label, -1);
        (pos, neg)
    }

    fn keep(&self, values: &[Rational], label: Option<usize>, side: i32) -> Option<Polygon> {
        let n = self.vertices.len();
        let sign = |v: &Rational| -> i32 {
            let s = if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            };
            s * side
        };
        let mut verts: Vec<Point> = Vec::new();
        let mut labels: Vec<Option<usize>> = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            let si = sign(&values[i]);
            let sj = sign(&values[j]);
            if si >= 0 {
                verts.push(self.vertices[i].clone());
                labels.push(if si == 0 && sj < 0 { label } else { self.labels[i] });
            }
            if si * sj < 0 {
                let t = &values[i] / (&values[i] - &values[j]);
                let p = &self.vertices[i];
                let q = &self.vertices[j];
                verts.push([
                    &p[0] + &t * (&q[0] - &p[0]),
                    &p[1] + &t * (&q[1] - &p[1]),
                ]);
                labels.push(if si > 0 { label } else { self.labels[i] });
            }
        }
        let poly = Polygon {
            vertices: verts,
            labels,
        }
        .simplified();
        (poly.len() >= 3 && poly.double_area().is_positive()).then_some(poly)
    }

    /// Drops repeated and collinear vertices, merging their edges.
    fn simplified(mut self) -> Polygon {
        loop {
            let n = self.vertices.len();
            if n < 3 {
                return self;
            }
            let mut removed = false;
            for i in 0..n {
                let prev = (i + n - 1) % n;
                let next = (i + 1) % n;
                let a = &self.vertices[prev];
                let b = &self.vertices[i];
                let c = &self.vertices[next];
                let cross = (&b[0] - &a[0]) * (&c[1] - &a[1]) - (&b[1] - &a[1]) * (&c[0] - &a[0]);
                if b == a || cross.is_zero() {
                    // keep the label of the incoming edge unless it was degenerate
                    let keep = if b == a { self.labels[i] } else { self.labels[prev] };
                    self.labels[prev] = keep;
                    self.vertices.remove(i);
                    self.labels.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                return self;
            }
        }
    }

    pub fn contains_strict(&self, p: &Point) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            let cross = (&b[0] - &a[0]) * (&p[1] - &a[1]) - (&b[1] - &a[1]) * (&p[0] - &a[0]);
            cross.is_positive()
        })
    }

    pub fn contains_closed(&self, p: &Point) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            let cross = (&b[0] - &a[0]) * (&p[1] - &a[1]) - (&b[1] - &a[1]) * (&p[0] - &a[0]);
            !cross.is_negative()
        })
    }

    pub fn vertices_f64(&self) -> Vec<[f64; 2]> {
        self.vertices
            .iter()
            .map(|v| [rational::to_f64(&v[0]), rational::to_f64(&v[1])])
            .collect()
    }

    pub fn max_bits(&self) -> u64 {
        self.vertices
            .iter()
            .flat_map(|v| v.iter().map(rational::bit_size))
            .max()
            .unwrap_or(0)
    }
}
