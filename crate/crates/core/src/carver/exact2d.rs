//! Exact planar carving: polygons are split by each ReLU's zero line in
//! topological order, using rational arithmetic throughout.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;

use super::{require_pure_relu, AffineFunction, CarveError, Result};
use crate::arrangement::BoundingBox;
use crate::geometry::{Affine2, Polygon};
use crate::netspec::{ActivationPattern, Network, NeuronDecl, NeuronKind};
use crate::rational::{self, Rational};

#[derive(Clone, Debug)]
pub struct CarveOptions {
    /// Largest numerator/denominator size tolerated for vertex coordinates.
    pub max_bits: u64,
}

impl Default for CarveOptions {
    fn default() -> Self {
        CarveOptions { max_bits: 4096 }
    }
}

#[derive(Clone, Debug)]
pub struct CarvedRegion {
    pub pattern: ActivationPattern,
    pub polygon: Polygon,
    /// Output id to its affine map on this region (the logit for sigmoid outputs).
    pub functions: BTreeMap<String, AffineFunction>,
    /// The polygon touches the box, so the true cell may extend beyond it.
    pub clipped: bool,
}

impl CarvedRegion {
    pub fn area(&self) -> Rational {
        self.polygon.area()
    }
}

struct Work {
    polygon: Polygon,
    bits: Vec<bool>,
    values: Vec<AffineFunction>,
}

fn to_affine2(f: &AffineFunction) -> Affine2 {
    Affine2::new(f.coefficients[0].clone(), f.coefficients[1].clone(), f.constant.clone())
}

fn check_box(bbox: &BoundingBox) -> Result<()> {
    if bbox.dim() != 2 {
        return Err(CarveError::BadBox { expected: 2 });
    }
    Ok(())
}

pub fn carve_exact_2d(net: &Network, bbox: &BoundingBox) -> Result<Vec<CarvedRegion>> {
    carve_exact_2d_with(net, bbox, &CarveOptions::default())
}

/// Regions in lexicographic pattern order; they tile the box exactly.
pub fn carve_exact_2d_with(net: &Network, bbox: &BoundingBox, opts: &CarveOptions) -> Result<Vec<CarvedRegion>> {
    if net.input_dim() != 2 {
        return Err(CarveError::InputDimension {
            expected: 2,
            got: net.input_dim(),
        });
    }
    check_box(bbox)?;
    require_pure_relu(net)?;
    let n = net.neurons().len();
    let relu_count = net.relus().len();
    let mut regions = vec![Work {
        polygon: bbox.rectangle(),
        bits: vec![false; relu_count],
        values: vec![AffineFunction::zero(2); n],
    }];
    for (k, &i) in net.inputs().iter().enumerate() {
        for r in &mut regions {
            r.values[i] = AffineFunction::variable(2, k);
        }
    }
    for &i in net.order() {
        let neuron = net.neuron(i);
        if neuron.kind == NeuronKind::Input {
            continue;
        }
        let mut next = Vec::with_capacity(regions.len() * 2);
        for mut r in regions {
            let mut pre = AffineFunction::zero(2);
            pre.constant = neuron.bias.clone();
            for e in &neuron.incoming {
                pre.add_scaled(&e.weight, &r.values[e.source]);
            }
            if neuron.kind != NeuronKind::Relu {
                r.values[i] = pre;
                next.push(r);
                continue;
            }
            let slot = net.relu_slot(i).expect("relu slot");
            let line = to_affine2(&pre);
            match r.polygon.split(&line, Some(i)) {
                (Some(pos), Some(neg)) => {
                    let bits = pos.max_bits().max(neg.max_bits());
                    if bits > opts.max_bits {
                        return Err(CarveError::ExactArithmeticOverflow { bits });
                    }
                    let mut inactive = Work {
                        polygon: neg,
                        bits: r.bits.clone(),
                        values: r.values.clone(),
                    };
                    inactive.values[i] = AffineFunction::zero(2);
                    r.polygon = pos;
                    r.bits[slot] = true;
                    r.values[i] = pre;
                    next.push(r);
                    next.push(inactive);
                }
                _ => {
                    let active = line.eval(&r.polygon.centroid()).is_positive();
                    r.bits[slot] = active;
                    r.values[i] = if active { pre } else { AffineFunction::zero(2) };
                    next.push(r);
                }
            }
        }
        regions = next;
    }
    let mut out: Vec<CarvedRegion> = regions
        .into_iter()
        .map(|r| CarvedRegion {
            pattern: ActivationPattern::new(r.bits),
            clipped: r.polygon.labels.iter().any(Option::is_none),
            functions: net
                .outputs()
                .iter()
                .map(|&o| (net.neuron(o).id.clone(), r.values[o].clone()))
                .collect(),
            polygon: r.polygon,
        })
        .collect();
    out.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    Ok(out)
}

/// Number of distinct activation patterns restricted to ReLU layers
/// `1..=k`, for each `k`; the region count after each layer.
pub fn layer_counts(net: &Network, patterns: &[ActivationPattern]) -> Vec<usize> {
    let layers = net.relu_layers();
    let slot_layer: Vec<usize> = net.relus().iter().map(|&i| layers[i].expect("relu layer")).collect();
    let depth = slot_layer.iter().copied().max().unwrap_or(0);
    (1..=depth)
        .map(|k| {
            patterns
                .iter()
                .map(|p| {
                    p.bits
                        .iter()
                        .zip(&slot_layer)
                        .filter(|(_, &l)| l <= k)
                        .map(|(&b, _)| b)
                        .collect::<Vec<bool>>()
                })
                .collect::<BTreeSet<_>>()
                .len()
        })
        .collect()
}

/// Id of the dummy coordinate added by [`embed_in_strip`].
pub const STRIP_INPUT: &str = "_strip";

/// Embeds a 1-input network into the plane by adding an unused second
/// coordinate; carving the strip `[lo, hi] × [0, 1]` gives the intervals.
pub fn embed_in_strip(net: &Network) -> Result<Network> {
    if net.input_dim() != 1 {
        return Err(CarveError::InputDimension {
            expected: 1,
            got: net.input_dim(),
        });
    }
    let mut decls: Vec<NeuronDecl> = Vec::with_capacity(net.neurons().len() + 1);
    for n in net.neurons() {
        decls.push(NeuronDecl {
            id: n.id.clone(),
            kind: n.kind,
            incoming: n
                .incoming
                .iter()
                .map(|e| (net.neuron(e.source).id.clone(), e.weight.clone()))
                .collect(),
            bias: match n.kind {
                NeuronKind::Input | NeuronKind::Mul => None,
                _ => Some(n.bias.clone()),
            },
        });
    }
    decls.push(NeuronDecl::input(STRIP_INPUT));
    Ok(Network::from_decls(2, decls)?)
}

/// Strip box `[lo, hi] × [0, 1]`.
pub fn strip_box(lo: Rational, hi: Rational) -> Result<BoundingBox> {
    BoundingBox::new(vec![lo, rational::int(0)], vec![hi, rational::int(1)])
        .map_err(|_| CarveError::BadBox { expected: 1 })
}
