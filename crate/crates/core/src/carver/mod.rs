//! Layer-by-layer carving of input space into activation regions, with the
//! affine (or polynomial) function living on each region.

mod decision;
mod exact2d;
mod folding;
mod polycells;
mod signvec;

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::netspec::{ActivationPattern, Network, NetworkError, NeuronKind};
use crate::poly::Polynomial;
use crate::rational::{self, Rational};

pub use decision::{decision_partition, logit_threshold, DecisionLabel, DecisionPartition, DecisionPiece};
pub use exact2d::{
    carve_exact_2d, carve_exact_2d_with, embed_in_strip, layer_counts, strip_box, CarveOptions, CarvedRegion, STRIP_INPUT,
};
pub use folding::build_folding_network;
pub use polycells::{carve_polynomial, trace_level_set, PolynomialCell, Polyline};
pub use signvec::{carve_signvectors, CarveMode, PatternWitness};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarveError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("network is not pure ReLU: neuron `{0}`")]
    NotPureRelu(String),
    #[error("network has input dimension {got}, operation needs {expected}")]
    InputDimension { expected: usize, got: usize },
    #[error("box must have {expected} nondegenerate sides")]
    BadBox { expected: usize },
    #[error("exact coordinates grew to {bits} bits; try a smaller box")]
    ExactArithmeticOverflow { bits: u64 },
    #[error("feasibility of pattern {pattern} is ambiguous within solver tolerance")]
    SolverTolerance { pattern: String },
    #[error("thresholds must satisfy 0 < T2 < T1 < 1, got T1={t1}, T2={t2}")]
    InvalidThresholds { t1: f64, t2: f64 },
    #[error("grid resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("width {n} is not divisible by input dimension {d}")]
    Divisibility { n: usize, d: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pattern has {got} bits, network has {expected} ReLU neurons")]
    PatternLength { expected: usize, got: usize },
    #[error("no neuron named `{0}`")]
    UnknownNeuron(String),
}

pub type Result<T> = std::result::Result<T, CarveError>;

/// `constant + Σ coefficients[i]·x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFunction {
    pub coefficients: Vec<Rational>,
    pub constant: Rational,
}

impl AffineFunction {
    pub fn zero(d: usize) -> Self {
        AffineFunction {
            coefficients: vec![Rational::zero(); d],
            constant: Rational::zero(),
        }
    }

    pub fn variable(d: usize, i: usize) -> Self {
        let mut f = Self::zero(d);
        f.coefficients[i] = rational::int(1);
        f
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_constant(&self) -> bool {
        self.coefficients.iter().all(Zero::is_zero)
    }

    pub fn is_zero(&self) -> bool {
        self.is_constant() && self.constant.is_zero()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coefficients
            .iter()
            .zip(x)
            .fold(self.constant.clone(), |acc, (a, v)| acc + a * v)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(x)
            .fold(rational::to_f64(&self.constant), |acc, (a, v)| acc + rational::to_f64(a) * v)
    }

    /// `self + w · other`.
    pub fn add_scaled(&mut self, w: &Rational, other: &AffineFunction) {
        for (a, b) in self.coefficients.iter_mut().zip(&other.coefficients) {
            *a += w * b;
        }
        self.constant += w * &other.constant;
    }

    pub fn to_polynomial(&self) -> Polynomial<Rational> {
        Polynomial::affine(&self.coefficients, self.constant.clone())
    }

    /// `None` when the polynomial has degree above 1.
    pub fn from_polynomial(p: &Polynomial<Rational>) -> Option<Self> {
        if p.degree() > 1 {
            return None;
        }
        let d = p.nvars();
        let mut f = Self::zero(d);
        for (alpha, c) in p.terms() {
            match alpha.iter().position(|&e| e == 1) {
                Some(i) => f.coefficients[i] = c.clone(),
                None => f.constant = c.clone(),
            }
        }
        Some(f)
    }

    pub fn max_bits(&self) -> u64 {
        self.coefficients
            .iter()
            .chain(std::iter::once(&self.constant))
            .map(rational::bit_size)
            .max()
            .unwrap_or(0)
    }
}

impl std::fmt::Display for AffineFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_polynomial())
    }
}

fn check_pattern(net: &Network, pattern: &ActivationPattern) -> Result<()> {
    if pattern.len() != net.relus().len() {
        return Err(CarveError::PatternLength {
            expected: net.relus().len(),
            got: pattern.len(),
        });
    }
    Ok(())
}

/// Exact polynomial in the inputs computed by every neuron once the pattern
/// is fixed: active ReLUs pass through, inactive ones emit zero. Sigmoid
/// neurons carry their logit.
pub fn region_polynomials(net: &Network, pattern: &ActivationPattern) -> Result<Vec<Polynomial<Rational>>> {
    check_pattern(net, pattern)?;
    let d = net.input_dim();
    let mut values: Vec<Polynomial<Rational>> = vec![Polynomial::zero(d); net.neurons().len()];
    for (k, &i) in net.inputs().iter().enumerate() {
        values[i] = Polynomial::variable(d, k);
    }
    for &i in net.order() {
        let n = net.neuron(i);
        values[i] = match n.kind {
            NeuronKind::Input => continue,
            NeuronKind::Mul => &values[n.incoming[0].source] * &values[n.incoming[1].source],
            kind => {
                if kind == NeuronKind::Relu && !pattern.is_active(net.relu_slot(i).expect("relu slot")) {
                    Polynomial::zero(d)
                } else {
                    let mut p = Polynomial::constant(d, n.bias.clone());
                    for e in &n.incoming {
                        if !e.weight.is_zero() {
                            p = &p + &values[e.source].scale(&e.weight);
                        }
                    }
                    p
                }
            }
        };
    }
    Ok(values)
}

/// Affine map of every output neuron under a fixed pattern, obtained by
/// summing weight products over active paths and propagating biases.
pub fn region_function(net: &Network, pattern: &ActivationPattern) -> Result<BTreeMap<String, AffineFunction>> {
    check_pattern(net, pattern)?;
    if let Some(&m) = net.outputs().iter().find(|&&i| net.neuron(i).kind == NeuronKind::Mul) {
        return Err(CarveError::NotPureRelu(net.neuron(m).id.clone()));
    }
    let all = region_affine_all(net, pattern)?;
    Ok(net
        .outputs()
        .iter()
        .map(|&i| (net.neuron(i).id.clone(), all[i].clone()))
        .collect())
}

/// Affine values of all neurons under a fixed pattern (no mul neurons).
pub(crate) fn region_affine_all(net: &Network, pattern: &ActivationPattern) -> Result<Vec<AffineFunction>> {
    let d = net.input_dim();
    let mut values = vec![AffineFunction::zero(d); net.neurons().len()];
    for (k, &i) in net.inputs().iter().enumerate() {
        values[i] = AffineFunction::variable(d, k);
    }
    for &i in net.order() {
        let n = net.neuron(i);
        match n.kind {
            NeuronKind::Input => {}
            NeuronKind::Mul => return Err(CarveError::NotPureRelu(n.id.clone())),
            kind => {
                if kind == NeuronKind::Relu && !pattern.is_active(net.relu_slot(i).expect("relu slot")) {
                    continue;
                }
                let mut f = AffineFunction::zero(d);
                f.constant = n.bias.clone();
                for e in &n.incoming {
                    let src = values[e.source].clone();
                    f.add_scaled(&e.weight, &src);
                }
                values[i] = f;
            }
        }
    }
    Ok(values)
}

/// Structural degree of every neuron as a function of the input: inputs are
/// degree 1, affine combinations keep the maximum, products add.
pub fn polynomial_degree(net: &Network) -> BTreeMap<String, u32> {
    let mut deg = vec![0u32; net.neurons().len()];
    for &i in net.order() {
        let n = net.neuron(i);
        deg[i] = match n.kind {
            NeuronKind::Input => 1,
            NeuronKind::Mul => deg[n.incoming[0].source] + deg[n.incoming[1].source],
            _ => n.incoming.iter().map(|e| deg[e.source]).max().unwrap_or(0),
        };
    }
    net.neurons()
        .iter()
        .zip(deg)
        .map(|(n, d)| (n.id.clone(), d))
        .collect()
}

fn require_pure_relu(net: &Network) -> Result<()> {
    if let Some(n) = net.neurons().iter().find(|n| n.kind == NeuronKind::Mul) {
        return Err(CarveError::NotPureRelu(n.id.clone()));
    }
    Ok(())
}
