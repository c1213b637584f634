//! Dimension-independent carving: breadth-first search over activation
//! patterns, one strict-interior LP per candidate extension.

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::{require_pure_relu, AffineFunction, CarveError, Result};
use crate::arrangement::{open_cell_witness, BoundingBox};
use crate::lp::{self, OpenHalfspace};
use crate::netspec::{ActivationPattern, Network, NeuronKind};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CarveMode {
    /// Every feasibility question is answered by the rational LP.
    Exact,
    /// Float LP; margins inside the tolerance band are re-decided exactly.
    #[default]
    Float,
    /// Float LP only; a margin inside the band is an error.
    FloatUnverified,
}

/// Margin band treated as ambiguous by the float LP.
pub const MARGIN_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PatternWitness {
    pub pattern: ActivationPattern,
    /// Strictly interior to the cell and the box.
    pub point: Vec<Rational>,
}

#[derive(Clone)]
struct Cell {
    bits: Vec<bool>,
    values: Vec<AffineFunction>,
    constraints: Vec<OpenHalfspace<Rational>>,
    witness: Vec<Rational>,
}

fn halfspace(f: &AffineFunction, positive: bool) -> OpenHalfspace<Rational> {
    if positive {
        OpenHalfspace {
            normal: f.coefficients.clone(),
            offset: f.constant.clone(),
        }
    } else {
        OpenHalfspace {
            normal: f.coefficients.iter().map(|v| -v).collect(),
            offset: -&f.constant,
        }
    }
}

fn find_witness(
    constraints: &[OpenHalfspace<Rational>],
    bbox: &BoundingBox,
    mode: CarveMode,
    bits: &[bool],
) -> Result<Option<Vec<Rational>>> {
    match mode {
        CarveMode::Float => Ok(open_cell_witness(constraints, bbox)),
        CarveMode::Exact => {
            let probe = lp::max_margin(constraints, &bbox.lo, &bbox.hi);
            Ok(probe.margin.is_positive().then_some(probe.point))
        }
        CarveMode::FloatUnverified => {
            let hs: Vec<OpenHalfspace<f64>> = constraints
                .iter()
                .map(|h| OpenHalfspace {
                    normal: h.normal.iter().map(rational::to_f64).collect(),
                    offset: rational::to_f64(&h.offset),
                })
                .collect();
            let lo: Vec<f64> = bbox.lo.iter().map(rational::to_f64).collect();
            let hi: Vec<f64> = bbox.hi.iter().map(rational::to_f64).collect();
            let probe = lp::max_margin(&hs, &lo, &hi);
            if probe.margin.abs() <= MARGIN_EPS {
                return Err(CarveError::SolverTolerance {
                    pattern: ActivationPattern::new(bits.to_vec()).to_string(),
                });
            }
            Ok((probe.margin > 0.0).then(|| {
                probe
                    .point
                    .iter()
                    .map(|&v| rational::from_f64(v).expect("finite LP point"))
                    .collect()
            }))
        }
    }
}

/// Every activation pattern whose open cell meets the open box, with a
/// witness point, sorted by pattern. Works in any input dimension.
pub fn carve_signvectors(net: &Network, bbox: &BoundingBox, mode: CarveMode) -> Result<Vec<PatternWitness>> {
    require_pure_relu(net)?;
    let d = net.input_dim();
    if bbox.dim() != d {
        return Err(CarveError::BadBox { expected: d });
    }
    let n = net.neurons().len();
    let mut start = Cell {
        bits: vec![false; net.relus().len()],
        values: vec![AffineFunction::zero(d); n],
        constraints: Vec::new(),
        witness: bbox
            .lo
            .iter()
            .zip(&bbox.hi)
            .map(|(l, u)| (l + u) / rational::int(2))
            .collect(),
    };
    for (k, &i) in net.inputs().iter().enumerate() {
        start.values[i] = AffineFunction::variable(d, k);
    }
    let mut cells = vec![start];
    for &i in net.order() {
        let neuron = net.neuron(i);
        if neuron.kind == NeuronKind::Input {
            continue;
        }
        let step: Vec<Result<Vec<Cell>>> = cells
            .into_par_iter()
            .map(|mut c| {
                let mut pre = AffineFunction::zero(d);
                pre.constant = neuron.bias.clone();
                for e in &neuron.incoming {
                    if !e.weight.is_zero() {
                        pre.add_scaled(&e.weight, &c.values[e.source]);
                    }
                }
                if neuron.kind != NeuronKind::Relu {
                    c.values[i] = pre;
                    return Ok(vec![c]);
                }
                let slot = net.relu_slot(i).expect("relu slot");
                if pre.is_constant() {
                    let active = pre.constant.is_positive();
                    c.bits[slot] = active;
                    c.values[i] = if active { pre } else { AffineFunction::zero(d) };
                    return Ok(vec![c]);
                }
                let at_witness = pre.eval(&c.witness);
                let mut out = Vec::with_capacity(2);
                for active in [true, false] {
                    let h = halfspace(&pre, active);
                    let mut bits = c.bits.clone();
                    bits[slot] = active;
                    let holds = if active {
                        at_witness.is_positive()
                    } else {
                        at_witness.is_negative()
                    };
                    let mut constraints = c.constraints.clone();
                    constraints.push(h);
                    let witness = if holds {
                        Some(c.witness.clone())
                    } else {
                        find_witness(&constraints, bbox, mode, &bits)?
                    };
                    if let Some(witness) = witness {
                        let mut values = c.values.clone();
                        values[i] = if active { pre.clone() } else { AffineFunction::zero(d) };
                        out.push(Cell {
                            bits,
                            values,
                            constraints,
                            witness,
                        });
                    }
                }
                Ok(out)
            })
            .collect();
        let mut next = Vec::new();
        for s in step {
            next.extend(s?);
        }
        cells = next;
    }
    let mut out: Vec<PatternWitness> = cells
        .into_iter()
        .map(|c| PatternWitness {
            pattern: ActivationPattern::new(c.bits),
            point: c.witness,
        })
        .collect();
    out.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    Ok(out)
}
