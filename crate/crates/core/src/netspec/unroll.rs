//! Weight-shared unrollings of convolution and recurrence into plain DAGs.

use super::{Network, NetworkError, NeuronDecl, NeuronKind, Result};
use crate::rational::Rational;

/// One `k × k` filter (row-major rows) with its bias.
#[derive(Clone, Debug)]
pub struct ConvFilter {
    pub weights: Vec<Vec<Rational>>,
    pub bias: Rational,
}

/// Single-channel image of `shape = (rows, cols)` flattened row-major into
/// inputs `p{r}_{c}`; each filter position becomes a ReLU `f{k}_{i}_{j}`.
pub fn unroll_conv(filters: &[ConvFilter], shape: (usize, usize), stride: usize) -> Result<Network> {
    let (rows, cols) = shape;
    if filters.is_empty() {
        return Err(NetworkError::Shape("no filters".into()));
    }
    if stride == 0 || rows == 0 || cols == 0 {
        return Err(NetworkError::Shape("stride and image sides must be positive".into()));
    }
    let k = filters[0].weights.len();
    for (fi, f) in filters.iter().enumerate() {
        if f.weights.len() != k || f.weights.iter().any(|r| r.len() != k) || k == 0 {
            return Err(NetworkError::Shape(format!("filter {fi} is not {k}x{k}")));
        }
    }
    if k > rows || k > cols {
        return Err(NetworkError::Shape(format!(
            "{k}x{k} filter does not fit a {rows}x{cols} image"
        )));
    }
    let mut decls = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            decls.push(NeuronDecl::input(format!("p{r}_{c}")));
        }
    }
    for (fi, f) in filters.iter().enumerate() {
        for (i, top) in (0..=rows - k).step_by(stride).enumerate() {
            for (j, left) in (0..=cols - k).step_by(stride).enumerate() {
                let mut incoming = Vec::with_capacity(k * k);
                for (dr, row) in f.weights.iter().enumerate() {
                    for (dc, w) in row.iter().enumerate() {
                        incoming.push((format!("p{}_{}", top + dr, left + dc), w.clone()));
                    }
                }
                decls.push(NeuronDecl {
                    id: format!("f{fi}_{i}_{j}"),
                    kind: NeuronKind::Relu,
                    incoming,
                    bias: Some(f.bias.clone()),
                });
            }
        }
    }
    Network::from_decls(rows * cols, decls)
}

/// Elman cell: `h_t = relu(Wx x_t + Wh h_{t-1} + bh)` with `h_0 = 0`, and a
/// linear readout `y = Wy h_T + by` after the last step.
#[derive(Clone, Debug)]
pub struct RnnCell {
    /// hidden × input
    pub wx: Vec<Vec<Rational>>,
    /// hidden × hidden
    pub wh: Vec<Vec<Rational>>,
    pub bh: Vec<Rational>,
    /// output × hidden
    pub wy: Vec<Vec<Rational>>,
    pub by: Vec<Rational>,
}

impl RnnCell {
    pub fn input_size(&self) -> usize {
        self.wx.first().map_or(0, Vec::len)
    }

    pub fn hidden_size(&self) -> usize {
        self.wx.len()
    }

    fn check(&self) -> Result<()> {
        let h = self.hidden_size();
        let d = self.input_size();
        let bad = |m: &str| Err(NetworkError::Shape(m.to_string()));
        if h == 0 || d == 0 {
            return bad("empty input or hidden size");
        }
        if self.wx.iter().any(|r| r.len() != d) {
            return bad("ragged input weights");
        }
        if self.wh.len() != h || self.wh.iter().any(|r| r.len() != h) {
            return bad("hidden weights must be hidden x hidden");
        }
        if self.bh.len() != h {
            return bad("hidden bias length");
        }
        if self.wy.is_empty() || self.wy.iter().any(|r| r.len() != h) {
            return bad("output weights must be output x hidden");
        }
        if self.by.len() != self.wy.len() {
            return bad("output bias length");
        }
        Ok(())
    }
}

/// Inputs are `x{t}_{i}` (step-major), hidden units `h{t}_{j}` and outputs `y{o}`.
pub fn unroll_rnn(cell: &RnnCell, steps: usize) -> Result<Network> {
    if steps == 0 {
        return Err(NetworkError::Shape("need at least one step".into()));
    }
    cell.check()?;
    let d = cell.input_size();
    let h = cell.hidden_size();
    let mut decls = Vec::new();
    for t in 1..=steps {
        for i in 0..d {
            decls.push(NeuronDecl::input(format!("x{t}_{i}")));
        }
    }
    for t in 1..=steps {
        for j in 0..h {
            let mut incoming: Vec<(String, Rational)> = (0..d)
                .map(|i| (format!("x{t}_{i}"), cell.wx[j][i].clone()))
                .collect();
            if t > 1 {
                incoming.extend((0..h).map(|m| (format!("h{}_{m}", t - 1), cell.wh[j][m].clone())));
            }
            decls.push(NeuronDecl {
                id: format!("h{t}_{j}"),
                kind: NeuronKind::Relu,
                incoming,
                bias: Some(cell.bh[j].clone()),
            });
        }
    }
    for (o, row) in cell.wy.iter().enumerate() {
        decls.push(NeuronDecl {
            id: format!("y{o}"),
            kind: NeuronKind::Linear,
            incoming: (0..h).map(|j| (format!("h{steps}_{j}"), row[j].clone())).collect(),
            bias: Some(cell.by[o].clone()),
        });
    }
    Network::from_decls(steps * d, decls)
}

#[cfg(test)]
/// Plain row-major direct convolution followed by ReLU, in filter/row/col order.
pub fn direct_conv(filters: &[Vec<Vec<f64>>], biases: &[f64], image: &[Vec<f64>], stride: usize) -> Vec<f64> {
    let k = filters[0].len();
    let rows = image.len();
    let cols = image[0].len();
    let mut out = Vec::new();
    for (f, b) in filters.iter().zip(biases) {
        for top in (0..=rows - k).step_by(stride) {
            for left in (0..=cols - k).step_by(stride) {
                let mut z = *b;
                for dr in 0..k {
                    for dc in 0..k {
                        z += f[dr][dc] * image[top + dr][left + dc];
                    }
                }
                out.push(z.max(0.0));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::{forward, topo_sort};
    use crate::rational::{from_f64, int};
    use crate::rng::stream;
    use rand::Rng;

    fn rat(m: &[Vec<f64>]) -> Vec<Vec<Rational>> {
        m.iter().map(|r| r.iter().map(|&v| from_f64(v).unwrap()).collect()).collect()
    }

    #[test]
    fn conv_counts() {
        let f = ConvFilter {
            weights: vec![vec![int(1), int(0)], vec![int(0), int(0)]],
            bias: int(0),
        };
        let net = unroll_conv(&[f], (3, 3), 1).unwrap();
        assert_eq!(net.relus().len(), 4);
        for &r in net.relus() {
            assert_eq!(net.neuron(r).incoming.len(), 4);
        }
        // identity filter picks the top-left pixel of each window
        let img: Vec<f64> = vec![1.0, -2.0, 3.0, -4.0, 5.0, -6.0, 7.0, 8.0, -9.0];
        let v = forward(&net, &img).unwrap();
        let outs: Vec<f64> = net.relus().iter().map(|&r| v.values[r]).collect();
        assert_eq!(outs, vec![1.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn conv_rejects_oversized_filter() {
        let f = ConvFilter {
            weights: vec![vec![int(1); 4]; 4],
            bias: int(0),
        };
        assert!(matches!(unroll_conv(&[f], (3, 3), 1), Err(NetworkError::Shape(_))));
    }

    #[test]
    fn conv_matches_direct_convolution() {
        let mut rng = stream(11);
        let (rows, cols, k, stride) = (5, 6, 3, 2);
        let filters: Vec<Vec<Vec<f64>>> = (0..2)
            .map(|_| (0..k).map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
            .collect();
        let biases: Vec<f64> = (0..2).map(|_| rng.random_range(-0.5..0.5)).collect();
        let conv: Vec<ConvFilter> = filters
            .iter()
            .zip(&biases)
            .map(|(f, &b)| ConvFilter { weights: rat(f), bias: from_f64(b).unwrap() })
            .collect();
        let net = unroll_conv(&conv, (rows, cols), stride).unwrap();
        for _ in 0..100 {
            let img: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let flat: Vec<f64> = img.iter().flatten().copied().collect();
            let v = forward(&net, &flat).unwrap();
            let got: Vec<f64> = net.relus().iter().map(|&r| v.values[r]).collect();
            let want = direct_conv(&filters, &biases, &img, stride);
            assert_eq!(got.len(), want.len());
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    type CellAndWeights = (RnnCell, [Vec<Vec<f64>>; 3], [Vec<f64>; 2]);

    fn random_cell(rng: &mut crate::rng::Stream, d: usize, h: usize, o: usize) -> CellAndWeights {
        let mut m = |r: usize, c: usize| -> Vec<Vec<f64>> {
            (0..r).map(|_| (0..c).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
        };
        let wx = m(h, d);
        let wh = m(h, h);
        let wy = m(o, h);
        let bh = m(1, h).remove(0);
        let by = m(1, o).remove(0);
        let cell = RnnCell {
            wx: rat(&wx),
            wh: rat(&wh),
            bh: bh.iter().map(|&v| from_f64(v).unwrap()).collect(),
            wy: rat(&wy),
            by: by.iter().map(|&v| from_f64(v).unwrap()).collect(),
        };
        (cell, [wx, wh, wy], [bh, by])
    }

    #[test]
    fn rnn_shapes() {
        let mut rng = stream(3);
        let (cell, _, _) = random_cell(&mut rng, 2, 3, 1);
        let one = unroll_rnn(&cell, 1).unwrap();
        assert_eq!(one.relu_layer_widths(), vec![3]);
        let two = unroll_rnn(&cell, 2).unwrap();
        assert_eq!(two.input_dim(), 4);
        let order = topo_sort(&two);
        let pos = |id: &str| order.iter().position(|o| o == id).unwrap();
        for j in 0..3 {
            for m in 0..3 {
                assert!(pos(&format!("h1_{j}")) < pos(&format!("h2_{m}")));
            }
        }
        assert!(matches!(unroll_rnn(&cell, 0), Err(NetworkError::Shape(_))));
    }

    #[test]
    fn rnn_matches_recurrence() {
        let mut rng = stream(5);
        let (d, h, o, steps) = (2, 3, 2, 4);
        let (cell, [wx, wh, wy], [bh, by]) = random_cell(&mut rng, d, h, o);
        let net = unroll_rnn(&cell, steps).unwrap();
        for _ in 0..50 {
            let xs: Vec<Vec<f64>> = (0..steps)
                .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let mut state = vec![0.0; h];
            for x in &xs {
                state = (0..h)
                    .map(|j| {
                        let z = bh[j]
                            + (0..d).map(|i| wx[j][i] * x[i]).sum::<f64>()
                            + (0..h).map(|m| wh[j][m] * state[m]).sum::<f64>();
                        z.max(0.0)
                    })
                    .collect();
            }
            let flat: Vec<f64> = xs.iter().flatten().copied().collect();
            let v = forward(&net, &flat).unwrap();
            for k in 0..o {
                let want = by[k] + (0..h).map(|j| wy[k][j] * state[j]).sum::<f64>();
                let got = v.value_of(&net, &format!("y{k}")).unwrap();
                assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
            }
        }
    }
}
