//! Computation-graph model of a network: neuron declarations, validation,
//! topological order, evaluation and activation patterns.
//!
//! Weights and biases are stored as exact rationals. Float evaluation uses
//! cached `f64` copies; exact evaluation works on the rationals directly.

mod parse;
mod unroll;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{self, IntoRational, Rational};

pub use parse::{parse_network, to_json, NumberMode};
pub use unroll::{unroll_conv, unroll_rnn, ConvFilter, RnnCell};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cycle through neuron `{0}`")]
    Cycle(String),
    #[error("neuron `{neuron}` references undeclared id `{source_id}`")]
    DanglingReference { neuron: String, source_id: String },
    #[error("input has dimension {got}, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("neuron `{0}` cannot be evaluated exactly")]
    NotExact(String),
}

pub type Result<T> = std::result::Result<T, NetworkError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NeuronKind {
    Input,
    Relu,
    Linear,
    Sigmoid,
    Mul,
}

impl NeuronKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NeuronKind::Input => "input",
            NeuronKind::Relu => "relu",
            NeuronKind::Linear => "linear",
            NeuronKind::Sigmoid => "sigmoid",
            NeuronKind::Mul => "mul",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "input" => NeuronKind::Input,
            "relu" => NeuronKind::Relu,
            "linear" => NeuronKind::Linear,
            "sigmoid" => NeuronKind::Sigmoid,
            "mul" => NeuronKind::Mul,
            _ => return None,
        })
    }
}

/// Declaration as written in a network document, before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct NeuronDecl {
    pub id: String,
    pub kind: NeuronKind,
    pub incoming: Vec<(String, Rational)>,
    pub bias: Option<Rational>,
}

impl NeuronDecl {
    pub fn input(id: impl Into<String>) -> Self {
        NeuronDecl {
            id: id.into(),
            kind: NeuronKind::Input,
            incoming: Vec::new(),
            bias: None,
        }
    }

    pub fn new<W: IntoRational>(
        id: impl Into<String>,
        kind: NeuronKind,
        incoming: impl IntoIterator<Item = (impl Into<String>, W)>,
        bias: impl IntoRational,
    ) -> Self {
        NeuronDecl {
            id: id.into(),
            kind,
            incoming: incoming
                .into_iter()
                .map(|(s, w)| (s.into(), w.into_rational()))
                .collect(),
            bias: Some(bias.into_rational()),
        }
    }

    /// Multiplication neuron `a · b`.
    pub fn mul(id: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Self {
        NeuronDecl {
            id: id.into(),
            kind: NeuronKind::Mul,
            incoming: vec![(a.into(), rational::int(1)), (b.into(), rational::int(1))],
            bias: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub source: usize,
    pub weight: Rational,
    weight_f64: f64,
}

impl Edge {
    pub fn weight_f64(&self) -> f64 {
        self.weight_f64
    }
}

#[derive(Clone, Debug)]
pub struct Neuron {
    pub id: String,
    pub kind: NeuronKind,
    pub incoming: Vec<Edge>,
    pub bias: Rational,
    bias_f64: f64,
}

impl Neuron {
    pub fn bias_f64(&self) -> f64 {
        self.bias_f64
    }
}

/// Immutable, validated network. Neuron indices refer to declaration order.
#[derive(Clone, Debug)]
pub struct Network {
    name: Option<String>,
    seed: Option<u64>,
    input_dim: usize,
    neurons: Vec<Neuron>,
    index: HashMap<String, usize>,
    order: Vec<usize>,
    inputs: Vec<usize>,
    relus: Vec<usize>,
    relu_slot: Vec<Option<usize>>,
    outputs: Vec<usize>,
}

impl Network {
    /// Validates declarations: unique ids, no dangling references, input and
    /// multiplication arity rules, acyclicity, sigmoid only as a sink, and
    /// `input_dim` matching the number of input neurons.
    pub fn from_decls(input_dim: usize, decls: Vec<NeuronDecl>) -> Result<Self> {
        if input_dim == 0 {
            return Err(NetworkError::Invalid("input_dim must be positive".into()));
        }
        let mut index = HashMap::new();
        for (i, d) in decls.iter().enumerate() {
            if d.id.is_empty() {
                return Err(NetworkError::Invalid("empty neuron id".into()));
            }
            if index.insert(d.id.clone(), i).is_some() {
                return Err(NetworkError::Invalid(format!("duplicate id `{}`", d.id)));
            }
        }
        let mut neurons = Vec::with_capacity(decls.len());
        for d in &decls {
            let mut incoming = Vec::with_capacity(d.incoming.len());
            for (src, w) in &d.incoming {
                let &source = index.get(src).ok_or_else(|| NetworkError::DanglingReference {
                    neuron: d.id.clone(),
                    source_id: src.clone(),
                })?;
                incoming.push(Edge {
                    source,
                    weight: w.clone(),
                    weight_f64: rational::to_f64(w),
                });
            }
            match d.kind {
                NeuronKind::Input => {
                    if !incoming.is_empty() {
                        return Err(NetworkError::Invalid(format!(
                            "input `{}` has incoming edges",
                            d.id
                        )));
                    }
                    if d.bias.is_some() {
                        return Err(NetworkError::Invalid(format!("input `{}` has a bias", d.id)));
                    }
                }
                NeuronKind::Mul => {
                    if incoming.len() != 2 {
                        return Err(NetworkError::Invalid(format!(
                            "mul neuron `{}` needs exactly 2 operands, has {}",
                            d.id,
                            incoming.len()
                        )));
                    }
                }
                _ => {
                    if incoming.is_empty() {
                        return Err(NetworkError::Invalid(format!(
                            "neuron `{}` has no incoming edges",
                            d.id
                        )));
                    }
                }
            }
            let bias = match d.kind {
                NeuronKind::Input | NeuronKind::Mul => Rational::zero(),
                _ => d.bias.clone().unwrap_or_else(Rational::zero),
            };
            neurons.push(Neuron {
                id: d.id.clone(),
                kind: d.kind,
                bias_f64: rational::to_f64(&bias),
                bias,
                incoming,
            });
        }

        let order = topo_order(&neurons)?;

        let mut consumers = vec![0usize; neurons.len()];
        for n in &neurons {
            for e in &n.incoming {
                consumers[e.source] += 1;
                if neurons[e.source].kind == NeuronKind::Sigmoid {
                    return Err(NetworkError::Invalid(format!(
                        "sigmoid `{}` feeds `{}`; sigmoid is only allowed as a final squashing output",
                        neurons[e.source].id, n.id
                    )));
                }
            }
        }
        let inputs: Vec<usize> = (0..neurons.len())
            .filter(|&i| neurons[i].kind == NeuronKind::Input)
            .collect();
        if inputs.len() != input_dim {
            return Err(NetworkError::Invalid(format!(
                "input_dim is {input_dim} but {} input neurons are declared",
                inputs.len()
            )));
        }
        let relus: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| neurons[i].kind == NeuronKind::Relu)
            .collect();
        let mut relu_slot = vec![None; neurons.len()];
        for (slot, &i) in relus.iter().enumerate() {
            relu_slot[i] = Some(slot);
        }
        let outputs = order
            .iter()
            .copied()
            .filter(|&i| consumers[i] == 0 && neurons[i].kind != NeuronKind::Input)
            .collect();
        Ok(Network {
            name: None,
            seed: None,
            input_dim,
            neurons,
            index,
            order,
            inputs,
            relus,
            relu_slot,
            outputs,
        })
    }

    pub fn with_metadata(mut self, name: Option<String>, seed: Option<u64>) -> Self {
        self.name = name;
        self.seed = seed;
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn neurons(&self) -> &[Neuron] {
        &self.neurons
    }

    pub fn neuron(&self, i: usize) -> &Neuron {
        &self.neurons[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Neuron indices in topological order (ties by declaration order).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Input neurons in declaration order; position `k` reads `x[k]`.
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    /// ReLU neurons in topological order; this is the bit order of patterns.
    pub fn relus(&self) -> &[usize] {
        &self.relus
    }

    pub fn relu_slot(&self, neuron: usize) -> Option<usize> {
        self.relu_slot[neuron]
    }

    /// Non-input neurons with no consumers, in topological order.
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn has_kind(&self, kind: NeuronKind) -> bool {
        self.neurons.iter().any(|n| n.kind == kind)
    }

    pub fn is_pure_relu(&self) -> bool {
        !self.has_kind(NeuronKind::Mul) && !self.has_kind(NeuronKind::Sigmoid)
    }

    /// Longest-path depth of each neuron (inputs at depth 0).
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.neurons.len()];
        for &i in &self.order {
            depth[i] = self.neurons[i]
                .incoming
                .iter()
                .map(|e| depth[e.source] + 1)
                .max()
                .unwrap_or(0);
        }
        depth
    }

    /// Number of ReLU neurons per ReLU layer, where a layer is the set of
    /// ReLU neurons sharing a count of ReLU ancestors on their longest path.
    pub fn relu_layer_widths(&self) -> Vec<usize> {
        let mut level = vec![0usize; self.neurons.len()];
        let mut widths: Vec<usize> = Vec::new();
        for &i in &self.order {
            let n = &self.neurons[i];
            let base = n.incoming.iter().map(|e| level[e.source]).max().unwrap_or(0);
            if n.kind == NeuronKind::Relu {
                level[i] = base + 1;
                if widths.len() < level[i] {
                    widths.resize(level[i], 0);
                }
                widths[level[i] - 1] += 1;
            } else {
                level[i] = base;
            }
        }
        widths
    }

    /// ReLU layer (1-based) of every ReLU neuron, indexed by neuron.
    pub fn relu_layers(&self) -> Vec<Option<usize>> {
        let mut level = vec![0usize; self.neurons.len()];
        let mut out = vec![None; self.neurons.len()];
        for &i in &self.order {
            let n = &self.neurons[i];
            let base = n.incoming.iter().map(|e| level[e.source]).max().unwrap_or(0);
            if n.kind == NeuronKind::Relu {
                level[i] = base + 1;
                out[i] = Some(level[i]);
            } else {
                level[i] = base;
            }
        }
        out
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.input_dim {
            return Err(NetworkError::DimensionMismatch {
                expected: self.input_dim,
                got,
            });
        }
        Ok(())
    }
}

/// Kahn's algorithm with a min-heap on declaration index.
fn topo_order(neurons: &[Neuron]) -> Result<Vec<usize>> {
    let n = neurons.len();
    let mut indegree = vec![0usize; n];
    let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, neuron) in neurons.iter().enumerate() {
        for e in &neuron.incoming {
            indegree[i] += 1;
            consumers[e.source].push(i);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &c in &consumers[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(NetworkError::Cycle(neurons[stuck].id.clone()));
    }
    Ok(order)
}

/// Neuron ids in topological order.
pub fn topo_sort(net: &Network) -> Vec<String> {
    net.order().iter().map(|&i| net.neurons[i].id.clone()).collect()
}

/// Values and preactivations of every neuron, indexed by neuron.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub values: Vec<f64>,
    pub preactivations: Vec<f64>,
}

impl Evaluation {
    pub fn value_of(&self, net: &Network, id: &str) -> Option<f64> {
        net.index_of(id).map(|i| self.values[i])
    }

    pub fn to_map(&self, net: &Network) -> HashMap<String, f64> {
        net.neurons
            .iter()
            .zip(&self.values)
            .map(|(n, &v)| (n.id.clone(), v))
            .collect()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Float forward pass.
pub fn forward(net: &Network, x: &[f64]) -> Result<Evaluation> {
    net.check_dim(x.len())?;
    let n = net.neurons.len();
    let mut values = vec![0.0; n];
    let mut pre = vec![0.0; n];
    for (k, &i) in net.inputs.iter().enumerate() {
        values[i] = x[k];
        pre[i] = x[k];
    }
    for &i in &net.order {
        let neuron = &net.neurons[i];
        match neuron.kind {
            NeuronKind::Input => {}
            NeuronKind::Mul => {
                let v = values[neuron.incoming[0].source] * values[neuron.incoming[1].source];
                pre[i] = v;
                values[i] = v;
            }
            kind => {
                let z = neuron
                    .incoming
                    .iter()
                    .fold(neuron.bias_f64, |acc, e| acc + e.weight_f64 * values[e.source]);
                pre[i] = z;
                values[i] = match kind {
                    NeuronKind::Relu => z.max(0.0),
                    NeuronKind::Sigmoid => sigmoid(z),
                    _ => z,
                };
            }
        }
    }
    Ok(Evaluation {
        values,
        preactivations: pre,
    })
}

/// Exact forward pass; sigmoid neurons yield [`NetworkError::NotExact`].
pub fn forward_exact(net: &Network, x: &[Rational]) -> Result<Vec<Rational>> {
    net.check_dim(x.len())?;
    let mut values = vec![Rational::zero(); net.neurons.len()];
    for (k, &i) in net.inputs.iter().enumerate() {
        values[i] = x[k].clone();
    }
    for &i in &net.order {
        let neuron = &net.neurons[i];
        values[i] = match neuron.kind {
            NeuronKind::Input => continue,
            NeuronKind::Mul => {
                &values[neuron.incoming[0].source] * &values[neuron.incoming[1].source]
            }
            NeuronKind::Sigmoid => return Err(NetworkError::NotExact(neuron.id.clone())),
            kind => {
                let z = neuron
                    .incoming
                    .iter()
                    .fold(neuron.bias.clone(), |acc, e| acc + &e.weight * &values[e.source]);
                if kind == NeuronKind::Relu && !z.is_positive() {
                    Rational::zero()
                } else {
                    z
                }
            }
        };
    }
    Ok(values)
}

/// Active/Inactive state of every ReLU neuron, in topological order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivationPattern {
    pub bits: Vec<bool>,
}

impl ActivationPattern {
    pub fn new(bits: Vec<bool>) -> Self {
        ActivationPattern { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_active(&self, slot: usize) -> bool {
        self.bits[slot]
    }

    /// Parses the `A`/`I` string form produced by `Display`.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                'A' => Some(true),
                'I' => Some(false),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(ActivationPattern::new)
    }
}

impl fmt::Display for ActivationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "A" } else { "I" })?;
        }
        Ok(())
    }
}

/// Pattern at a point plus the ReLU slots whose preactivation is exactly 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternReading {
    pub pattern: ActivationPattern,
    pub boundary: bool,
    pub boundary_slots: Vec<usize>,
}

/// Active iff the preactivation is strictly positive.
pub fn activation_pattern(net: &Network, x: &[f64]) -> Result<PatternReading> {
    let eval = forward(net, x)?;
    Ok(reading_from(net, &eval.preactivations, |z| *z > 0.0, |z| *z == 0.0))
}

/// Exact variant of [`activation_pattern`].
pub fn activation_pattern_exact(net: &Network, x: &[Rational]) -> Result<PatternReading> {
    net.check_dim(x.len())?;
    let mut values = vec![Rational::zero(); net.neurons.len()];
    let mut pre = vec![Rational::zero(); net.neurons.len()];
    for (k, &i) in net.inputs.iter().enumerate() {
        values[i] = x[k].clone();
    }
    for &i in &net.order {
        let neuron = &net.neurons[i];
        match neuron.kind {
            NeuronKind::Input => continue,
            NeuronKind::Mul => {
                let v = &values[neuron.incoming[0].source] * &values[neuron.incoming[1].source];
                pre[i] = v.clone();
                values[i] = v;
            }
            NeuronKind::Sigmoid => {
                pre[i] = neuron
                    .incoming
                    .iter()
                    .fold(neuron.bias.clone(), |acc, e| acc + &e.weight * &values[e.source]);
            }
            kind => {
                let z = neuron
                    .incoming
                    .iter()
                    .fold(neuron.bias.clone(), |acc, e| acc + &e.weight * &values[e.source]);
                values[i] = if kind == NeuronKind::Relu && !z.is_positive() {
                    Rational::zero()
                } else {
                    z.clone()
                };
                pre[i] = z;
            }
        }
    }
    Ok(reading_from(net, &pre, |z| z.is_positive(), |z| z.is_zero()))
}

fn reading_from<T>(
    net: &Network,
    pre: &[T],
    active: impl Fn(&T) -> bool,
    zero: impl Fn(&T) -> bool,
) -> PatternReading {
    let mut bits = Vec::with_capacity(net.relus.len());
    let mut boundary_slots = Vec::new();
    for (slot, &i) in net.relus.iter().enumerate() {
        bits.push(active(&pre[i]));
        if zero(&pre[i]) {
            boundary_slots.push(slot);
        }
    }
    PatternReading {
        pattern: ActivationPattern::new(bits),
        boundary: !boundary_slots.is_empty(),
        boundary_slots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diff_net() -> Network {
        // single relu computing relu(x1 - x2)
        Network::from_decls(
            2,
            vec![
                NeuronDecl::input("x1"),
                NeuronDecl::input("x2"),
                NeuronDecl::new("h", NeuronKind::Relu, [("x1", 1), ("x2", -1)], 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn relu_of_difference() {
        let net = diff_net();
        let v = forward(&net, &[3.0, 1.0]).unwrap();
        assert_eq!(v.value_of(&net, "h"), Some(2.0));
        let v = forward(&net, &[1.0, 3.0]).unwrap();
        assert_eq!(v.value_of(&net, "h"), Some(0.0));
    }

    #[test]
    fn zero_weights_give_zero_values() {
        let net = Network::from_decls(
            2,
            vec![
                NeuronDecl::input("x1"),
                NeuronDecl::input("x2"),
                NeuronDecl::new("h1", NeuronKind::Relu, [("x1", 0), ("x2", 0)], 0),
                NeuronDecl::new("h2", NeuronKind::Relu, [("x1", 0), ("x2", 0)], 0),
                NeuronDecl::new("y", NeuronKind::Linear, [("h1", 0), ("h2", 0)], 0),
            ],
        )
        .unwrap();
        let v = forward(&net, &[0.7, -2.5]).unwrap();
        for id in ["h1", "h2", "y"] {
            assert_eq!(v.value_of(&net, id), Some(0.0));
        }
    }

    #[test]
    fn attention_product() {
        let net = Network::from_decls(
            2,
            vec![
                NeuronDecl::input("x1"),
                NeuronDecl::input("x2"),
                NeuronDecl::new("a", NeuronKind::Relu, [("x1", 1)], 0),
                NeuronDecl::new("f", NeuronKind::Relu, [("x2", 1)], 0),
                NeuronDecl::mul("y", "a", "f"),
            ],
        )
        .unwrap();
        let v = forward(&net, &[2.0, 3.0]).unwrap();
        assert_eq!(v.value_of(&net, "y"), Some(6.0));
        let exact = forward_exact(&net, &[rational::int(2), rational::int(3)]).unwrap();
        assert_eq!(exact[net.index_of("y").unwrap()], rational::int(6));
    }

    #[test]
    fn pattern_and_boundary_flag() {
        let net = Network::from_decls(
            2,
            vec![
                NeuronDecl::input("x1"),
                NeuronDecl::input("x2"),
                NeuronDecl::new("g", NeuronKind::Relu, [("x1", 1)], 0),
                NeuronDecl::new("b", NeuronKind::Relu, [("x2", 1)], 0),
            ],
        )
        .unwrap();
        let r = activation_pattern(&net, &[1.0, -1.0]).unwrap();
        assert_eq!(r.pattern.to_string(), "AI");
        assert!(!r.boundary);
        let r = activation_pattern(&net, &[5.0, 5.0]).unwrap();
        assert_eq!(r.pattern.to_string(), "AA");
        let r = activation_pattern(&net, &[1.0, 0.0]).unwrap();
        assert_eq!(r.pattern.to_string(), "AI");
        assert!(r.boundary);
        assert_eq!(r.boundary_slots, vec![1]);
    }

    #[test]
    fn dimension_mismatch() {
        let err = forward(&diff_net(), &[1.0]).unwrap_err();
        assert_eq!(err, NetworkError::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let err = Network::from_decls(
            1,
            vec![
                NeuronDecl::input("x"),
                NeuronDecl::new("y", NeuronKind::Relu, [("x", 1), ("y", 1)], 0),
            ],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::Cycle("y".into()));
    }

    #[test]
    fn structural_rules() {
        let bad_mul = Network::from_decls(
            1,
            vec![
                NeuronDecl::input("x"),
                NeuronDecl::new("m", NeuronKind::Mul, [("x", 1)], 0),
            ],
        );
        assert!(matches!(bad_mul, Err(NetworkError::Invalid(_))));
        let sigmoid_inside = Network::from_decls(
            1,
            vec![
                NeuronDecl::input("x"),
                NeuronDecl::new("s", NeuronKind::Sigmoid, [("x", 1)], 0),
                NeuronDecl::new("r", NeuronKind::Relu, [("s", 1)], 0),
            ],
        );
        assert!(matches!(sigmoid_inside, Err(NetworkError::Invalid(_))));
        let wrong_dim = Network::from_decls(2, vec![NeuronDecl::input("x")]);
        assert!(matches!(wrong_dim, Err(NetworkError::Invalid(_))));
    }

    #[test]
    fn topo_order_layers_and_stability() {
        // declared out of order on purpose
        let net = Network::from_decls(
            2,
            vec![
                NeuronDecl::new("y", NeuronKind::Linear, [("h1", 1), ("h2", 1)], 0),
                NeuronDecl::new("h1", NeuronKind::Relu, [("x1", 1)], 0),
                NeuronDecl::input("x1"),
                NeuronDecl::new("h2", NeuronKind::Relu, [("x2", 1)], 0),
                NeuronDecl::input("x2"),
            ],
        )
        .unwrap();
        let order = topo_sort(&net);
        assert_eq!(order, topo_sort(&net));
        let pos = |id: &str| order.iter().position(|o| o == id).unwrap();
        assert!(pos("x1") < pos("h1") && pos("x2") < pos("h2"));
        assert!(pos("h1") < pos("y") && pos("h2") < pos("y"));
        assert_eq!(net.relu_layer_widths(), vec![2]);
    }

    #[test]
    fn single_neuron_network() {
        let net = Network::from_decls(1, vec![NeuronDecl::input("x")]).unwrap();
        assert_eq!(topo_sort(&net), vec!["x".to_string()]);
        assert!(net.outputs().is_empty());
    }
}
