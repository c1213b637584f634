//! Networks as functions of their learnable parameters: the path
//! polynomial, squared-error and cross-entropy losses with reverse-mode
//! gradients, Hessian spectra, and landscape probes.

mod critical;
mod hessian;
mod probes;

pub use critical::{find_critical_points, random_starts, CriticalPoint, CriticalSearch, PolynomialObjective};
pub use hessian::{
    classify_critical_point, hessian, spectrum, spectrum_of_rows, taylor_step_gain, CriticalClass, HessianMode,
    HessianReport, Spectrum, DEFAULT_FD_STEP,
};
pub use probes::{
    gradient_descent, interpolation_curve, max_interior_bump, plane_section, sgd, subspace_descent, DescentRun,
    PlaneSection, Quadratic, SgdConfig,
};

use thiserror::Error;

use crate::linalg::{LinalgError, SymmetricMatrix};
use crate::netspec::{
    activation_pattern, sigmoid, ActivationPattern, Network, NetworkError, NeuronKind,
};
use crate::poly::{MultiIndex, Polynomial};

#[derive(Debug, Error, PartialEq)]
pub enum PolylandError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("activation pattern {pattern} is not realised at the given input")]
    PatternUnrealizable { pattern: String },
    #[error("direction must be a unit vector (norm {norm})")]
    NonUnitDirection { norm: f64 },
    #[error(transparent)]
    NonSymmetric(#[from] LinalgError),
    #[error("parameter vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("network must have exactly one output, found {0}")]
    OutputCount(usize),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("objective has no symbolic Hessian; use finite differences")]
    SymbolicUnavailable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bad data: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, PolylandError>;

/// Preactivations closer than this to zero make a Hessian unreliable.
pub const BOUNDARY_EPS: f64 = 1e-8;

/// A twice-differentiable scalar function of a parameter vector.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn value(&self, theta: &[f64]) -> f64;
    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>);
    /// Exact Hessian when the objective knows its own polynomial structure.
    fn symbolic_hessian(&self, _theta: &[f64]) -> Option<SymmetricMatrix> {
        None
    }
    /// Whether `theta` sits within [`BOUNDARY_EPS`] of a pattern change.
    fn near_boundary(&self, _theta: &[f64]) -> bool {
        false
    }
}

/// A network whose weights and biases are free parameters. Parameter ids
/// are `w:src->dst` for edges and `b:id` for biases, in topological order of
/// the receiving neuron (edges first, then the bias). Multiplication
/// neurons carry no parameters.
///
/// The scalar `f` is the single output's value, or its logit when the
/// output is a sigmoid.
#[derive(Clone, Debug)]
pub struct ParamNet {
    net: Network,
    ids: Vec<String>,
    edge_param: Vec<Vec<Option<usize>>>,
    bias_param: Vec<Option<usize>>,
    output: usize,
}

#[derive(Clone, Debug)]
struct Trace {
    values: Vec<f64>,
    pre: Vec<f64>,
    active: Vec<bool>,
}

impl ParamNet {
    pub fn new(net: Network) -> Result<Self> {
        if net.outputs().len() != 1 {
            return Err(PolylandError::OutputCount(net.outputs().len()));
        }
        let output = net.outputs()[0];
        let n = net.neurons().len();
        let mut ids = Vec::new();
        let mut edge_param = vec![Vec::new(); n];
        let mut bias_param = vec![None; n];
        for &i in net.order() {
            let neuron = net.neuron(i);
            if matches!(neuron.kind, NeuronKind::Input | NeuronKind::Mul) {
                edge_param[i] = vec![None; neuron.incoming.len()];
                continue;
            }
            for e in &neuron.incoming {
                edge_param[i].push(Some(ids.len()));
                ids.push(format!("w:{}->{}", net.neuron(e.source).id, neuron.id));
            }
            bias_param[i] = Some(ids.len());
            ids.push(format!("b:{}", neuron.id));
        }
        Ok(ParamNet {
            net,
            ids,
            edge_param,
            bias_param,
            output,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn dim(&self) -> usize {
        self.ids.len()
    }

    pub fn param_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn param_index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|p| p == id)
    }

    /// The parameters stored in the network itself.
    pub fn initial_theta(&self) -> Vec<f64> {
        let mut theta = vec![0.0; self.dim()];
        for &i in self.net.order() {
            let neuron = self.net.neuron(i);
            for (e, p) in neuron.incoming.iter().zip(&self.edge_param[i]) {
                if let Some(p) = p {
                    theta[*p] = e.weight_f64();
                }
            }
            if let Some(p) = self.bias_param[i] {
                theta[p] = neuron.bias_f64();
            }
        }
        theta
    }

    fn check(&self, theta: &[f64], x: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(PolylandError::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        if x.len() != self.net.input_dim() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.net.input_dim(),
                got: x.len(),
            }
            .into());
        }
        Ok(())
    }

    fn trace(&self, theta: &[f64], x: &[f64], pattern: Option<&ActivationPattern>) -> Trace {
        let n = self.net.neurons().len();
        let mut values = vec![0.0; n];
        let mut pre = vec![0.0; n];
        let mut active = vec![false; n];
        for (k, &i) in self.net.inputs().iter().enumerate() {
            values[i] = x[k];
        }
        for &i in self.net.order() {
            let neuron = self.net.neuron(i);
            match neuron.kind {
                NeuronKind::Input => continue,
                NeuronKind::Mul => {
                    let v = values[neuron.incoming[0].source] * values[neuron.incoming[1].source];
                    pre[i] = v;
                    values[i] = v;
                    continue;
                }
                _ => {}
            }
            let mut z = theta[self.bias_param[i].expect("bias parameter")];
            for (e, p) in neuron.incoming.iter().zip(&self.edge_param[i]) {
                z += theta[p.expect("edge parameter")] * values[e.source];
            }
            pre[i] = z;
            values[i] = match neuron.kind {
                NeuronKind::Relu => {
                    let on = match pattern {
                        Some(p) => p.is_active(self.net.relu_slot(i).expect("relu slot")),
                        None => z > 0.0,
                    };
                    active[i] = on;
                    if on {
                        z
                    } else {
                        0.0
                    }
                }
                NeuronKind::Sigmoid => sigmoid(z),
                _ => z,
            };
        }
        Trace { values, pre, active }
    }

    fn output_of(&self, t: &Trace) -> f64 {
        if self.net.neuron(self.output).kind == NeuronKind::Sigmoid {
            t.pre[self.output]
        } else {
            t.values[self.output]
        }
    }

    /// `f(θ; x)` with the activation pattern decided by `θ`.
    pub fn output(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        self.check(theta, x)?;
        Ok(self.output_of(&self.trace(theta, x, None)))
    }

    /// `f(θ; x)` with every ReLU forced to the state given by `pattern`.
    pub fn output_with_pattern(&self, theta: &[f64], x: &[f64], pattern: &ActivationPattern) -> Result<f64> {
        self.check(theta, x)?;
        Ok(self.output_of(&self.trace(theta, x, Some(pattern))))
    }

    /// `f` and `∂f/∂θ` by reverse accumulation.
    pub fn output_gradient(&self, theta: &[f64], x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(theta, x)?;
        let t = self.trace(theta, x, None);
        Ok((self.output_of(&t), self.backprop(theta, &t)))
    }

    fn backprop(&self, theta: &[f64], t: &Trace) -> Vec<f64> {
        let n = self.net.neurons().len();
        let mut grad = vec![0.0; self.dim()];
        // adjoints of neuron values; the output seeds its preactivation
        let mut adj = vec![0.0; n];
        adj[self.output] = 1.0;
        let sigmoid_out = self.net.neuron(self.output).kind == NeuronKind::Sigmoid;
        for &i in self.net.order().iter().rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let neuron = self.net.neuron(i);
            let a_pre = match neuron.kind {
                NeuronKind::Input => continue,
                NeuronKind::Mul => {
                    let (s0, s1) = (neuron.incoming[0].source, neuron.incoming[1].source);
                    adj[s0] += a * t.values[s1];
                    adj[s1] += a * t.values[s0];
                    continue;
                }
                NeuronKind::Relu => {
                    if t.active[i] {
                        a
                    } else {
                        0.0
                    }
                }
                NeuronKind::Sigmoid if !(sigmoid_out && i == self.output) => {
                    let s = t.values[i];
                    a * s * (1.0 - s)
                }
                _ => a,
            };
            if a_pre == 0.0 {
                continue;
            }
            grad[self.bias_param[i].expect("bias parameter")] += a_pre;
            for (e, p) in neuron.incoming.iter().zip(&self.edge_param[i]) {
                let p = p.expect("edge parameter");
                grad[p] += a_pre * t.values[e.source];
                adj[e.source] += a_pre * theta[p];
            }
        }
        grad
    }

    fn min_relu_margin(&self, theta: &[f64], x: &[f64]) -> f64 {
        let t = self.trace(theta, x, None);
        self.net
            .relus()
            .iter()
            .map(|&i| t.pre[i].abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// `f` as a polynomial in `θ` at fixed `x`, every ReLU frozen to
    /// `pattern`. Inputs enter as coefficients, so each monomial is a path.
    pub fn polynomial(&self, x: &[f64], pattern: &ActivationPattern) -> Result<Polynomial<f64>> {
        if x.len() != self.net.input_dim() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.net.input_dim(),
                got: x.len(),
            }
            .into());
        }
        let d = self.dim();
        let n = self.net.neurons().len();
        let mut values: Vec<Polynomial<f64>> = vec![Polynomial::zero(d); n];
        for (k, &i) in self.net.inputs().iter().enumerate() {
            values[i] = Polynomial::constant(d, x[k]);
        }
        for &i in self.net.order() {
            let neuron = self.net.neuron(i);
            values[i] = match neuron.kind {
                NeuronKind::Input => continue,
                NeuronKind::Mul => &values[neuron.incoming[0].source] * &values[neuron.incoming[1].source],
                kind => {
                    if kind == NeuronKind::Relu && !pattern.is_active(self.net.relu_slot(i).expect("relu slot")) {
                        Polynomial::zero(d)
                    } else {
                        let mut acc = Polynomial::variable(d, self.bias_param[i].expect("bias parameter"));
                        for (e, p) in neuron.incoming.iter().zip(&self.edge_param[i]) {
                            let w = Polynomial::variable(d, p.expect("edge parameter"));
                            acc = &acc + &(&w * &values[e.source]);
                        }
                        acc
                    }
                }
            };
        }
        Ok(values[self.output].clone())
    }
}

/// The output of `net` at input `x` as a polynomial in its parameters,
/// on the branch where the ReLUs follow `pattern`. The pattern must be the
/// one the network's own weights produce at `x`.
pub fn parameter_polynomial(net: &Network, x: &[f64], pattern: &ActivationPattern) -> Result<(ParamNet, Polynomial<f64>)> {
    let reading = activation_pattern(net, x)?;
    if &reading.pattern != pattern {
        return Err(PolylandError::PatternUnrealizable {
            pattern: pattern.to_string(),
        });
    }
    let pn = ParamNet::new(net.clone())?;
    let p = pn.polynomial(x, pattern)?;
    Ok((pn, p))
}

/// Monomials of a parameter polynomial containing at least one bias variable.
pub fn bias_monomials<'a>(pn: &ParamNet, p: &'a Polynomial<f64>) -> Vec<(&'a MultiIndex, f64)> {
    let bias: Vec<bool> = pn.param_ids().iter().map(|id| id.starts_with("b:")).collect();
    p.terms()
        .filter(|(alpha, _)| alpha.iter().zip(&bias).any(|(&e, &b)| b && e > 0))
        .map(|(a, &c)| (a, c))
        .collect()
}

/// One labelled training sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub target: f64,
}

/// Reads `x1,…,xd,G` rows; a non-numeric first line is taken as a header,
/// `#` lines and blank lines are skipped.
pub fn parse_batch(text: &str, input_dim: usize) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: std::result::Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let fields = match fields {
            Ok(f) => f,
            Err(_) if out.is_empty() => continue,
            Err(e) => return Err(PolylandError::Data(format!("line {}: {e}", lineno + 1))),
        };
        if fields.len() != input_dim + 1 {
            return Err(PolylandError::Data(format!(
                "line {}: expected {} columns, got {}",
                lineno + 1,
                input_dim + 1,
                fields.len()
            )));
        }
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(PolylandError::Data(format!("line {}: non-finite value", lineno + 1)));
        }
        let target = fields[input_dim];
        out.push(Sample {
            x: fields[..input_dim].to_vec(),
            target,
        });
    }
    if out.is_empty() {
        return Err(PolylandError::EmptyBatch);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Mean of `(f − G)²`.
    SquaredError,
    /// Mean of `−G ln p − (1 − G) ln(1 − p)` with `p = σ(f)`.
    CrossEntropy,
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// A loss over a fixed batch, viewed as a function of the parameters.
#[derive(Clone, Debug)]
pub struct NetworkLoss {
    pub net: ParamNet,
    pub batch: Vec<Sample>,
    pub kind: LossKind,
}

impl NetworkLoss {
    pub fn new(net: ParamNet, batch: Vec<Sample>, kind: LossKind) -> Result<Self> {
        if batch.is_empty() {
            return Err(PolylandError::EmptyBatch);
        }
        for s in &batch {
            net.check(&vec![0.0; net.dim()], &s.x)?;
        }
        Ok(NetworkLoss { net, batch, kind })
    }

    /// Loss and gradient on a subset of the batch.
    pub fn on_indices(&self, theta: &[f64], idx: &[usize]) -> (f64, Vec<f64>) {
        let mut value = 0.0;
        let mut grad = vec![0.0; self.net.dim()];
        for &k in idx {
            let s = &self.batch[k];
            let t = self.net.trace(theta, &s.x, None);
            let f = self.net.output_of(&t);
            let (l, r) = match self.kind {
                LossKind::SquaredError => ((f - s.target).powi(2), 2.0 * (f - s.target)),
                LossKind::CrossEntropy => (softplus(f) - s.target * f, sigmoid(f) - s.target),
            };
            value += l;
            if r != 0.0 {
                for (g, df) in grad.iter_mut().zip(self.net.backprop(theta, &t)) {
                    *g += r * df;
                }
            }
        }
        let m = idx.len() as f64;
        grad.iter_mut().for_each(|g| *g /= m);
        (value / m, grad)
    }

    fn all(&self) -> Vec<usize> {
        (0..self.batch.len()).collect()
    }
}

impl Objective for NetworkLoss {
    fn dim(&self) -> usize {
        self.net.dim()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.on_indices(theta, &self.all()).0
    }

    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        self.on_indices(theta, &self.all())
    }

    /// `mean(c₂ ∇f∇fᵀ + c₁ ∇²f)` with `∇²f` from the path polynomial of
    /// each sample's current pattern.
    fn symbolic_hessian(&self, theta: &[f64]) -> Option<SymmetricMatrix> {
        let d = self.net.dim();
        let mut acc = vec![0.0; d * d];
        for s in &self.batch {
            let t = self.net.trace(theta, &s.x, None);
            let f = self.net.output_of(&t);
            let g = self.net.backprop(theta, &t);
            let pattern = ActivationPattern::new(self.net.net.relus().iter().map(|&i| t.active[i]).collect());
            let poly = self.net.polynomial(&s.x, &pattern).ok()?;
            let (c1, c2) = match self.kind {
                LossKind::SquaredError => (2.0 * (f - s.target), 2.0),
                LossKind::CrossEntropy => {
                    let p = sigmoid(f);
                    (p - s.target, p * (1.0 - p))
                }
            };
            for i in 0..d {
                for j in 0..d {
                    acc[i * d + j] += c2 * g[i] * g[j];
                }
            }
            if c1 != 0.0 {
                for (i, row) in poly.hessian().iter().enumerate() {
                    for (j, h) in row.iter().enumerate() {
                        if !h.is_zero() {
                            acc[i * d + j] += c1 * h.eval(theta);
                        }
                    }
                }
            }
        }
        let m = self.batch.len() as f64;
        Some(SymmetricMatrix::from_upper(d, |i, j| 0.5 * (acc[i * d + j] + acc[j * d + i]) / m))
    }

    fn near_boundary(&self, theta: &[f64]) -> bool {
        self.batch
            .iter()
            .any(|s| self.net.min_relu_margin(theta, &s.x) <= BOUNDARY_EPS)
    }
}

/// Mean squared error and its gradient.
pub fn loss_l2(net: &ParamNet, batch: &[Sample], theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    batch_loss(net, batch, theta, LossKind::SquaredError)
}

/// Mean cross-entropy of `σ(f)` against `G` and its gradient.
pub fn loss_xent(net: &ParamNet, batch: &[Sample], theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    batch_loss(net, batch, theta, LossKind::CrossEntropy)
}

fn batch_loss(net: &ParamNet, batch: &[Sample], theta: &[f64], kind: LossKind) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(PolylandError::EmptyBatch);
    }
    for s in batch {
        net.check(theta, &s.x)?;
    }
    let loss = NetworkLoss {
        net: net.clone(),
        batch: batch.to_vec(),
        kind,
    };
    Ok(loss.value_and_gradient(theta))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::netspec::{forward, parse_network, NeuronDecl, NumberMode};
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    pub(crate) fn random_net(seed: u64, widths: &[usize], input_dim: usize, out: NeuronKind) -> Network {
        let mut r = rng::stream(seed);
        let mut decls: Vec<NeuronDecl> = (0..input_dim).map(|i| NeuronDecl::input(format!("x{i}"))).collect();
        let mut prev: Vec<String> = (0..input_dim).map(|i| format!("x{i}")).collect();
        for (l, &w) in widths.iter().enumerate() {
            let mut cur = Vec::new();
            for j in 0..w {
                let id = format!("h{l}_{j}");
                let inc: Vec<(String, i64)> = prev.iter().map(|p| (p.clone(), r.random_range(-20..=20))).collect();
                decls.push(NeuronDecl::new(
                    id.clone(),
                    NeuronKind::Relu,
                    inc.iter().map(|(p, k)| (p.as_str(), crate::rational::frac(*k, 10))),
                    crate::rational::frac(r.random_range(-10..=10), 10),
                ));
                cur.push(id);
            }
            prev = cur;
        }
        let inc: Vec<(String, i64)> = prev.iter().map(|p| (p.clone(), r.random_range(-20..=20))).collect();
        decls.push(NeuronDecl::new(
            "y",
            out,
            inc.iter().map(|(p, k)| (p.as_str(), crate::rational::frac(*k, 10))),
            crate::rational::frac(1, 10),
        ));
        Network::from_decls(input_dim, decls).unwrap()
    }

    fn random_batch(seed: u64, dim: usize, m: usize, binary: bool) -> Vec<Sample> {
        let mut r = rng::stream(seed);
        (0..m)
            .map(|_| Sample {
                x: (0..dim).map(|_| r.random_range(-2.0..2.0)).collect(),
                target: if binary {
                    r.random_range(0..2) as f64
                } else {
                    r.random_range(-1.0..1.0)
                },
            })
            .collect()
    }

    fn central_difference(obj: &dyn Objective, theta: &[f64], h: f64) -> Vec<f64> {
        (0..theta.len())
            .map(|i| {
                let mut p = theta.to_vec();
                let mut m = theta.to_vec();
                p[i] += h;
                m[i] -= h;
                (obj.value(&p) - obj.value(&m)) / (2.0 * h)
            })
            .collect()
    }

    pub(crate) fn fig11() -> Network {
        parse_network(include_str!("../../data/fig11.json"), NumberMode::Exact).unwrap()
    }

    #[test]
    fn fig11_paths() {
        let net = fig11();
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let pattern = activation_pattern(&net, &x).unwrap().pattern;
        assert_eq!(pattern.to_string(), "AAA");
        let (pn, p) = parameter_polynomial(&net, &x, &pattern).unwrap();
        let mut alpha = vec![0u32; pn.dim()];
        alpha[pn.param_index("w:x3->h1").unwrap()] = 1;
        alpha[pn.param_index("w:h1->y").unwrap()] = 1;
        assert_eq!(p.coefficient(&alpha), 3.0);
        assert_eq!(bias_monomials(&pn, &p).len(), 4);
        assert_eq!(p.len(), 15 + 4);
        assert!(p.terms().all(|(a, _)| a.iter().all(|&e| e <= 1)));
        assert!(p.degree() <= 2);
    }

    #[test]
    fn unrealised_pattern_rejected() {
        let net = fig11();
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let bad = ActivationPattern::parse("IAA").unwrap();
        assert!(matches!(
            parameter_polynomial(&net, &x, &bad),
            Err(PolylandError::PatternUnrealizable { .. })
        ));
    }

    #[test]
    fn polynomial_matches_frozen_forward() {
        let net = random_net(3, &[3, 2], 2, NeuronKind::Linear);
        let x = [0.7, -0.4];
        let pattern = activation_pattern(&net, &x).unwrap().pattern;
        let (pn, p) = parameter_polynomial(&net, &x, &pattern).unwrap();
        let direct = forward(&net, &x).unwrap().value_of(&net, "y").unwrap();
        assert!((p.eval(&pn.initial_theta()) - direct).abs() < 1e-12);
        let mut r = rng::stream(8);
        for _ in 0..100 {
            let theta: Vec<f64> = (0..pn.dim()).map(|_| r.random_range(-2.0..2.0)).collect();
            let want = pn.output_with_pattern(&theta, &x, &pattern).unwrap();
            let got = p.eval(&theta);
            assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} {want}");
        }
        // no squared weight anywhere
        for i in 0..pn.dim() {
            assert!(p.partial(i).partial(i).is_zero());
        }
    }

    #[test]
    fn hand_chain_rule() {
        let net = Network::from_decls(
            1,
            vec![NeuronDecl::input("x"), NeuronDecl::new("y", NeuronKind::Linear, [("x", 1)], 0)],
        )
        .unwrap();
        let pn = ParamNet::new(net).unwrap();
        let batch = [Sample { x: vec![2.0], target: 0.0 }];
        let w = pn.param_index("w:x->y").unwrap();
        let mut theta = vec![0.0; 2];
        theta[w] = 1.0;
        let (_, g) = loss_l2(&pn, &batch, &theta).unwrap();
        assert_eq!(g[w], 8.0);
        // f = 0, G = 1, df/dw = 2
        theta[w] = 0.0;
        let batch = [Sample { x: vec![2.0], target: 1.0 }];
        let (v, g) = loss_xent(&pn, &batch, &theta).unwrap();
        assert_eq!(g[w], -1.0);
        assert!((v - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..10u64 {
            let net = random_net(seed, &[4], 2, NeuronKind::Linear);
            let pn = ParamNet::new(net).unwrap();
            let theta = pn.initial_theta();
            for (kind, binary) in [(LossKind::SquaredError, false), (LossKind::CrossEntropy, true)] {
                let loss = NetworkLoss::new(pn.clone(), random_batch(seed + 50, 2, 6, binary), kind).unwrap();
                if loss.near_boundary(&theta) {
                    continue;
                }
                let (_, g) = loss.value_and_gradient(&theta);
                let fd = central_difference(&loss, &theta, 1e-5);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "seed {seed}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn zero_residual_zero_gradient() {
        let net = random_net(4, &[3], 2, NeuronKind::Linear);
        let pn = ParamNet::new(net).unwrap();
        let theta = pn.initial_theta();
        let x = vec![0.3, 0.9];
        let f = pn.output(&theta, &x).unwrap();
        let (_, g) = loss_l2(&pn, &[Sample { x: x.clone(), target: f }], &theta).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        // p = G exactly when σ saturates
        let mut big = theta.clone();
        for v in big.iter_mut() {
            *v *= 1e4;
        }
        let f = pn.output(&big, &x).unwrap();
        let target = if f > 0.0 { 1.0 } else { 0.0 };
        assert_eq!(sigmoid(f), target);
        let (_, g) = loss_xent(&pn, &[Sample { x, target }], &big).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sigmoid_output_uses_logit() {
        let net = random_net(5, &[3], 2, NeuronKind::Sigmoid);
        let pn = ParamNet::new(net.clone()).unwrap();
        let x = [0.5, -0.5];
        let f = pn.output(&pn.initial_theta(), &x).unwrap();
        let p = forward(&net, &x).unwrap().value_of(&net, "y").unwrap();
        assert!((sigmoid(f) - p).abs() < 1e-15);
    }

    #[test]
    fn parses_batches() {
        let b = parse_batch("x1,x2,G\n1,2,0\n# c\n3,4,1\n", 2).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[1].x, vec![3.0, 4.0]);
        assert!(parse_batch("1,2\n", 2).is_err());
        assert_eq!(parse_batch("x,G\n", 1), Err(PolylandError::EmptyBatch));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn xent_gradient_identity(seed in 0u64..10_000) {
            let net = random_net(seed, &[3], 2, NeuronKind::Linear);
            let pn = ParamNet::new(net).unwrap();
            let batch = random_batch(seed ^ 0xabc, 2, 4, true);
            let mut r = rng::stream(seed);
            let theta: Vec<f64> = (0..pn.dim()).map(|_| r.random_range(-1.5..1.5)).collect();
            let (_, g) = loss_xent(&pn, &batch, &theta).unwrap();
            let mut want = vec![0.0; pn.dim()];
            for s in &batch {
                let (f, df) = pn.output_gradient(&theta, &s.x).unwrap();
                let p = sigmoid(f);
                for (w, d) in want.iter_mut().zip(df) {
                    *w += (p - s.target) * d / batch.len() as f64;
                }
            }
            for (a, b) in g.iter().zip(&want) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300) || (a - b).abs() < 1e-15);
            }
        }
    }
}
