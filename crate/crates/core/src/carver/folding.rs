//! Hand-built networks whose early layers fold the unit cube onto itself,
//! so the last layer's arrangement is replicated in every fold.

use super::{CarveError, Result};
use crate::netspec::{Network, NeuronDecl, NeuronKind};
use crate::rational::{self, Rational};

/// `L − 1` folding layers of `n` ReLUs (`m = n/d` per coordinate), each
/// mapping `[0, 1]` onto itself `m` times per coordinate via the tent map
/// `Σ_k a_k relu(z − k/m)` with `a_0 = m`, `a_k = (−1)^k 2m`. The last layer
/// places `n` hyperplanes in general position inside the folded cube, and a
/// linear output `y` sums them.
pub fn build_folding_network(n: usize, d: usize, layers: usize) -> Result<Network> {
    if d == 0 || n == 0 || n < d {
        return Err(CarveError::InvalidParameter(format!("need n >= d >= 1, got n={n}, d={d}")));
    }
    if !n.is_multiple_of(d) {
        return Err(CarveError::Divisibility { n, d });
    }
    if layers < 2 {
        return Err(CarveError::InvalidParameter(format!("need at least 2 layers, got {layers}")));
    }
    let m = n / d;
    let mr = rational::int(m as i64);
    let tent: Vec<Rational> = (0..m)
        .map(|k| {
            if k == 0 {
                mr.clone()
            } else if k % 2 == 1 {
                -rational::int(2 * m as i64)
            } else {
                rational::int(2 * m as i64)
            }
        })
        .collect();

    let mut decls: Vec<NeuronDecl> = (0..d).map(|i| NeuronDecl::input(format!("x{i}"))).collect();
    // per coordinate: list of (neuron id, weight) whose weighted sum is the folded coordinate
    let mut coord: Vec<Vec<(String, Rational)>> =
        (0..d).map(|i| vec![(format!("x{i}"), rational::int(1))]).collect();
    for l in 1..layers {
        for (i, sources) in coord.iter_mut().enumerate() {
            let mut next = Vec::with_capacity(m);
            for (k, w) in tent.iter().enumerate() {
                let id = format!("f{l}_{i}_{k}");
                decls.push(NeuronDecl {
                    id: id.clone(),
                    kind: NeuronKind::Relu,
                    incoming: sources.clone(),
                    bias: Some(-rational::frac(k as i64, m as i64)),
                });
                next.push((id, w.clone()));
            }
            *sources = next;
        }
    }
    for (k, (normal, offset)) in final_hyperplanes(n, d).into_iter().enumerate() {
        let mut incoming = Vec::new();
        for (i, a) in normal.iter().enumerate() {
            for (src, w) in &coord[i] {
                incoming.push((src.clone(), a * w));
            }
        }
        decls.push(NeuronDecl {
            id: format!("c{k}"),
            kind: NeuronKind::Relu,
            incoming,
            bias: Some(offset),
        });
    }
    decls.push(NeuronDecl {
        id: "y".into(),
        kind: NeuronKind::Linear,
        incoming: (0..n).map(|k| (format!("c{k}"), rational::int(1))).collect(),
        bias: Some(rational::int(0)),
    });
    Ok(Network::from_decls(d, decls)?.with_metadata(Some(format!("folding-n{n}-d{d}-L{layers}")), None))
}

/// `n` hyperplanes in general position with every vertex inside `(0, 1)^d`.
/// In one dimension these are the points `(k+1)/(n+1)`; otherwise normals
/// lie on the moment curve and the planes pass close to the cube centre.
fn final_hyperplanes(n: usize, d: usize) -> Vec<(Vec<Rational>, Rational)> {
    if d == 1 {
        return (0..n)
            .map(|k| (vec![rational::int(1)], -rational::frac(k as i64 + 1, n as i64 + 1)))
            .collect();
    }
    let half = rational::frac(1, 2);
    (0..n)
        .map(|k| {
            let t = (k + 1) as i64;
            let normal: Vec<Rational> = (0..d).map(|j| rational::int(t.pow(j as u32))).collect();
            // shift off the common centre by a small distinct amount
            let shift = rational::frac(((k * k) % 7) as i64 + k as i64, 1000 * (n * n) as i64 + 1);
            let through_centre: Rational = normal.iter().fold(rational::int(0), |acc, a| acc + a * &half);
            (normal, shift - through_centre)
        })
        .collect()
}
