//! Curved cells of networks with multiplication neurons. Cells are found by
//! grid labelling plus bisection along pattern changes; the function on each
//! cell is built symbolically and exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{region_polynomials, CarveError, Result};
use crate::arrangement::BoundingBox;
use crate::netspec::{activation_pattern, ActivationPattern, Network};
use crate::poly::Polynomial;
use crate::rational::{self, Rational};

#[derive(Clone, Debug)]
pub struct PolynomialCell {
    pub pattern: ActivationPattern,
    /// Grid points labelled with this pattern.
    pub points: Vec<[f64; 2]>,
    /// Output id to its exact polynomial on this cell.
    pub polynomials: BTreeMap<String, Polynomial<Rational>>,
}

pub type Polyline = Vec<[f64; 2]>;

const BISECTION_STEPS: usize = 40;

fn box_f64(bbox: &BoundingBox) -> Result<([f64; 2], [f64; 2])> {
    if bbox.dim() != 2 {
        return Err(CarveError::BadBox { expected: 2 });
    }
    Ok((
        [rational::to_f64(&bbox.lo[0]), rational::to_f64(&bbox.lo[1])],
        [rational::to_f64(&bbox.hi[0]), rational::to_f64(&bbox.hi[1])],
    ))
}

fn check_planar(net: &Network) -> Result<()> {
    if net.input_dim() != 2 {
        return Err(CarveError::InputDimension {
            expected: 2,
            got: net.input_dim(),
        });
    }
    Ok(())
}

/// Labels a `grid × grid` lattice of cell centres, then bisects every
/// neighbouring pair whose patterns differ. A pattern met only during
/// bisection means a cell thinner than the grid step, which is reported as
/// [`CarveError::ResolutionTooCoarse`].
pub fn carve_polynomial(net: &Network, bbox: &BoundingBox, grid: usize) -> Result<Vec<PolynomialCell>> {
    check_planar(net)?;
    if grid < 2 {
        return Err(CarveError::InvalidParameter("grid must be at least 2".into()));
    }
    let (lo, hi) = box_f64(bbox)?;
    let point = |i: usize, j: usize| -> [f64; 2] {
        [
            lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / grid as f64,
            lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / grid as f64,
        ]
    };
    let mut labels: Vec<Option<ActivationPattern>> = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            let r = activation_pattern(net, &point(i, j))?;
            labels.push((!r.boundary).then_some(r.pattern));
        }
    }
    let on_grid: BTreeSet<&ActivationPattern> = labels.iter().flatten().collect();
    for i in 0..grid {
        for j in 0..grid {
            let Some(a) = &labels[i * grid + j] else { continue };
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni >= grid || nj >= grid {
                    continue;
                }
                let Some(b) = &labels[ni * grid + nj] else { continue };
                if a == b {
                    continue;
                }
                let (mut p, mut q) = (point(i, j), point(ni, nj));
                for _ in 0..BISECTION_STEPS {
                    // off-centre so lattice-aligned boundaries are not hit exactly
                    let t = 0.5 + 1e-6 * std::f64::consts::SQRT_2;
                    let mid = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                    let r = activation_pattern(net, &mid)?;
                    if r.boundary {
                        break;
                    }
                    if !on_grid.contains(&r.pattern) {
                        return Err(CarveError::ResolutionTooCoarse(format!(
                            "pattern {} appears between grid points near ({:.4}, {:.4})",
                            r.pattern, mid[0], mid[1]
                        )));
                    }
                    if &r.pattern == a {
                        p = mid;
                    } else if &r.pattern == b {
                        q = mid;
                    } else {
                        // a third known pattern in between; keep narrowing toward a
                        q = mid;
                    }
                }
            }
        }
    }
    let mut cells: BTreeMap<ActivationPattern, Vec<[f64; 2]>> = BTreeMap::new();
    for i in 0..grid {
        for j in 0..grid {
            if let Some(p) = &labels[i * grid + j] {
                cells.entry(p.clone()).or_default().push(point(i, j));
            }
        }
    }
    cells
        .into_iter()
        .map(|(pattern, points)| {
            let values = region_polynomials(net, &pattern)?;
            let polynomials = net
                .outputs()
                .iter()
                .map(|&o| (net.neuron(o).id.clone(), values[o].clone()))
                .collect();
            Ok(PolynomialCell {
                pattern,
                points,
                polynomials,
            })
        })
        .collect()
}

/// Contour `value(neuron) = c` inside the cell of `pattern`, by marching
/// squares on a `(grid+1)²` lattice. Crossings are refined by bisection on
/// the exact cell polynomial; squares not wholly inside the cell are skipped.
pub fn trace_level_set(
    net: &Network,
    neuron: &str,
    pattern: &ActivationPattern,
    c: f64,
    bbox: &BoundingBox,
    grid: usize,
) -> Result<Vec<Polyline>> {
    check_planar(net)?;
    if grid < 2 {
        return Err(CarveError::InvalidParameter("grid must be at least 2".into()));
    }
    let idx = net
        .index_of(neuron)
        .ok_or_else(|| CarveError::UnknownNeuron(neuron.to_string()))?;
    let poly = region_polynomials(net, pattern)?[idx].to_f64_poly();
    let f = |x: [f64; 2]| poly.eval_f64(&x) - c;
    let (lo, hi) = box_f64(bbox)?;
    let n = grid + 1;
    let vertex = |i: usize, j: usize| -> [f64; 2] {
        [
            lo[0] + (hi[0] - lo[0]) * i as f64 / grid as f64,
            lo[1] + (hi[1] - lo[1]) * j as f64 / grid as f64,
        ]
    };
    let mut inside = vec![false; n * n];
    let mut value = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let x = vertex(i, j);
            let r = activation_pattern(net, &x)?;
            inside[i * n + j] = !r.boundary && &r.pattern == pattern;
            value[i * n + j] = f(x);
        }
    }
    if !inside.iter().any(|&b| b) {
        return Err(CarveError::ResolutionTooCoarse(format!(
            "pattern {pattern} not found on the grid"
        )));
    }

    // edge key: (horizontal?, i, j) for the edge starting at vertex (i, j)
    type EdgeKey = (bool, usize, usize);
    let mut crossing: HashMap<EdgeKey, [f64; 2]> = HashMap::new();
    let mut crossing_at = |key: EdgeKey| -> Option<[f64; 2]> {
        if let Some(p) = crossing.get(&key) {
            return Some(*p);
        }
        let (horizontal, i, j) = key;
        let (a, b) = if horizontal {
            ((i, j), (i + 1, j))
        } else {
            ((i, j), (i, j + 1))
        };
        let (va, vb) = (value[a.0 * n + a.1], value[b.0 * n + b.1]);
        if (va > 0.0) == (vb > 0.0) {
            return None;
        }
        let (mut p, mut q) = (vertex(a.0, a.1), vertex(b.0, b.1));
        let pos_p = va > 0.0;
        for _ in 0..80 {
            let mid = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
            if (f(mid) > 0.0) == pos_p {
                p = mid;
            } else {
                q = mid;
            }
        }
        let pt = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
        crossing.insert(key, pt);
        Some(pt)
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if !corners.iter().all(|&(a, b)| inside[a * n + b]) {
                continue;
            }
            // bottom, right, top, left
            let edges: [EdgeKey; 4] = [(true, i, j), (false, i + 1, j), (true, i, j + 1), (false, i, j)];
            let hits: Vec<EdgeKey> = edges.iter().copied().filter(|&e| crossing_at(e).is_some()).collect();
            match hits.len() {
                2 => segments.push((hits[0], hits[1])),
                4 => {
                    let centre = [
                        (vertex(i, j)[0] + vertex(i + 1, j)[0]) / 2.0,
                        (vertex(i, j)[1] + vertex(i, j + 1)[1]) / 2.0,
                    ];
                    let corner_positive = value[i * n + j] > 0.0;
                    if (f(centre) > 0.0) == corner_positive {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[0], edges[3]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    Ok(join_segments(&segments)
        .into_iter()
        .map(|keys| keys.iter().map(|k| crossing[k]).collect())
        .collect())
}

/// Chains segments sharing endpoints; open chains first, then loops.
fn join_segments<K: Copy + Ord + std::hash::Hash>(segments: &[(K, K)]) -> Vec<Vec<K>> {
    let mut adj: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start: K, used: &mut Vec<bool>| -> Vec<K> {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&s) = adj[&cur].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let (a, b) = segments[s];
            cur = if a == cur { b } else { a };
            chain.push(cur);
        }
        chain
    };
    let ends: Vec<K> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    for e in ends {
        if adj[&e].iter().all(|&s| used[s]) {
            continue;
        }
        out.push(walk(e, &mut used));
    }
    let keys: Vec<K> = adj.keys().copied().collect();
    for k in keys {
        if adj[&k].iter().any(|&s| !used[s]) {
            out.push(walk(k, &mut used));
        }
    }
    out
}
