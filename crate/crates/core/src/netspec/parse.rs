//! JSON network documents.
//!
//! ```json
//! {"input_dim": 2,
//!  "neurons": [{"id": "x1", "kind": "input"},
//!              {"id": "h", "kind": "relu", "bias": "1/2", "in": [["x1", "-3/4"]]}]}
//! ```

use serde_json::{json, Map, Value};

use super::{Network, NetworkError, NeuronDecl, NeuronKind, Result};
use crate::rational::{self, Rational};

/// How numeric fields are read. `Exact` accepts only integers and rational
/// strings; `Float` also takes JSON floating-point literals, converted exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NumberMode {
    #[default]
    Exact,
    Float,
}

fn perr(msg: impl Into<String>) -> NetworkError {
    NetworkError::Parse(msg.into())
}

fn number(v: &Value, mode: NumberMode, what: &str) -> Result<Rational> {
    match v {
        Value::String(s) => {
            rational::parse_rational(s).ok_or_else(|| perr(format!("{what}: `{s}` is not a finite rational")))
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(rational::int(i));
            }
            if let Some(u) = n.as_u64() {
                return Ok(Rational::from_integer(u.into()));
            }
            match mode {
                NumberMode::Exact => Err(perr(format!(
                    "{what}: float literal {n} not allowed in exact mode; write it as a \"p/q\" string"
                ))),
                NumberMode::Float => n
                    .as_f64()
                    .and_then(rational::from_f64)
                    .ok_or_else(|| perr(format!("{what}: non-finite number"))),
            }
        }
        other => Err(perr(format!("{what}: expected number, got {other}"))),
    }
}

pub fn parse_network(text: &str, mode: NumberMode) -> Result<Network> {
    let doc: Value = serde_json::from_str(text).map_err(|e| perr(e.to_string()))?;
    let obj = doc.as_object().ok_or_else(|| perr("top level must be an object"))?;
    let input_dim = obj
        .get("input_dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| perr("missing or non-integer `input_dim`"))? as usize;
    let neurons = obj
        .get("neurons")
        .and_then(Value::as_array)
        .ok_or_else(|| perr("missing `neurons` array"))?;
    let mut decls = Vec::with_capacity(neurons.len());
    for (k, n) in neurons.iter().enumerate() {
        let n = n.as_object().ok_or_else(|| perr(format!("neuron #{k} is not an object")))?;
        let id = n
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| perr(format!("neuron #{k} has no string `id`")))?
            .to_string();
        let kind_text = n
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| perr(format!("neuron `{id}` has no `kind`")))?;
        let kind = NeuronKind::parse(kind_text)
            .ok_or_else(|| perr(format!("neuron `{id}`: unknown kind `{kind_text}`")))?;
        let bias = match n.get("bias") {
            None | Some(Value::Null) => None,
            Some(b) => Some(number(b, mode, &format!("bias of `{id}`"))?),
        };
        let mut incoming = Vec::new();
        if let Some(list) = n.get("in") {
            let list = list
                .as_array()
                .ok_or_else(|| perr(format!("`in` of `{id}` must be an array")))?;
            for edge in list {
                let pair = edge
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| perr(format!("edge of `{id}` must be [source, weight]")))?;
                let src = pair[0]
                    .as_str()
                    .ok_or_else(|| perr(format!("edge source of `{id}` must be a string")))?;
                let w = number(&pair[1], mode, &format!("weight {src}->{id}"))?;
                incoming.push((src.to_string(), w));
            }
        }
        if kind == NeuronKind::Input && bias.is_some() {
            return Err(NetworkError::Invalid(format!("input `{id}` has a bias")));
        }
        decls.push(NeuronDecl {
            id,
            kind,
            incoming,
            bias,
        });
    }
    let name = obj.get("name").and_then(Value::as_str).map(str::to_string);
    let seed = obj.get("seed").and_then(Value::as_u64);
    Ok(Network::from_decls(input_dim, decls)?.with_metadata(name, seed))
}

/// Serialises with rational strings, so exact round-trips are lossless.
pub fn to_json(net: &Network) -> String {
    let neurons: Vec<Value> = net
        .neurons()
        .iter()
        .map(|n| {
            let mut m = Map::new();
            m.insert("id".into(), json!(n.id));
            m.insert("kind".into(), json!(n.kind.as_str()));
            if !matches!(n.kind, NeuronKind::Input | NeuronKind::Mul) {
                m.insert("bias".into(), json!(rational::format_rational(&n.bias)));
            }
            if !n.incoming.is_empty() {
                let edges: Vec<Value> = n
                    .incoming
                    .iter()
                    .map(|e| json!([net.neuron(e.source).id, rational::format_rational(&e.weight)]))
                    .collect();
                m.insert("in".into(), Value::Array(edges));
            }
            Value::Object(m)
        })
        .collect();
    let mut top = Map::new();
    if let Some(name) = net.name() {
        top.insert("name".into(), json!(name));
    }
    if let Some(seed) = net.seed() {
        top.insert("seed".into(), json!(seed));
    }
    top.insert("input_dim".into(), json!(net.input_dim()));
    top.insert("neurons".into(), Value::Array(neurons));
    serde_json::to_string_pretty(&Value::Object(top)).expect("json serialisation")
}
