//! Exact ReLU MLP construction.
//!
//! Every network here is a plain layered feedforward net with explicit weight
//! matrices, built so that on its contract domain it computes its target map
//! exactly in double precision: affine maps, min/max via
//! `|z| = relu(z) + relu(-z)`, integer step indicators, gate inhibition, and
//! finite-table lookup through unit-width "bump" neurons. Evaluation
//! accumulates each row in column order and skips zero weights, which keeps
//! the exactness arguments local to each constructor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

/// One affine layer plus its activation tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Row-major weights, one row per output unit.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn rows(&self) -> usize {
        self.weights.len()
    }

    pub fn cols(&self) -> usize {
        self.weights.first().map_or(0, |r| r.len())
    }
}

/// A layered affine+ReLU network with explicit weights.
///
/// Construction precomputes a sparse view of each row (nonzero weights in
/// ascending column order); evaluation walks that view, which matches the
/// dense accumulation order bit for bit while skipping zero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Layer>,
    sparse: Vec<Vec<Vec<(u32, f64)>>>,
}

/// Bound on a gated core's output magnitude over its legal inputs. The
/// inhibition construction is exact only while the core stays inside the
/// bound; the machine asserts it at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateBound(f64);

impl GateBound {
    pub const DEFAULT: GateBound = GateBound(1e6);

    pub fn new(bound: f64) -> Result<Self> {
        if !bound.is_finite() || bound <= 0.0 {
            return Err(Error::Config(format!(
                "gate bound must be a positive real, got {bound}"
            )));
        }
        Ok(GateBound(bound))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// One row of a finite lookup table: an integer key tuple and its outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub key: Vec<i64>,
    pub value: Vec<f64>,
}

/// Largest integer magnitude allowed in table keys and indicator thresholds;
/// keeps all integer arithmetic inside the network exact in doubles.
const MAX_EXACT_INT: i64 = 1 << 51;

impl Network {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Shape("network input dimension must be positive".into()));
        }
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        let mut width = input_dim;
        for (idx, layer) in layers.iter().enumerate() {
            if layer.rows() == 0 {
                return Err(Error::Shape(format!("layer {idx} has no units")));
            }
            if layer.bias.len() != layer.rows() {
                return Err(Error::Shape(format!(
                    "layer {idx}: {} bias entries for {} rows",
                    layer.bias.len(),
                    layer.rows()
                )));
            }
            for row in &layer.weights {
                if row.len() != width {
                    return Err(Error::Shape(format!(
                        "layer {idx}: row width {} does not chain onto {} inputs",
                        row.len(),
                        width
                    )));
                }
                if let Some(&bad) = row.iter().find(|w| !w.is_finite()) {
                    return Err(Error::NonFinite {
                        context: "weight",
                        value: bad,
                    });
                }
            }
            if let Some(&bad) = layer.bias.iter().find(|b| !b.is_finite()) {
                return Err(Error::NonFinite {
                    context: "bias",
                    value: bad,
                });
            }
            width = layer.rows();
        }
        let sparse = layers
            .iter()
            .map(|layer| {
                layer
                    .weights
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(_, &w)| w != 0.0)
                            .map(|(c, &w)| (c as u32, w))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Network {
            input_dim,
            layers,
            sparse,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Feedforward pass.
    pub fn eval(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "expected {} inputs, got {}",
                self.input_dim,
                input.len()
            )));
        }
        let mut h = input.to_vec();
        let mut next = Vec::new();
        for (layer, rows) in self.layers.iter().zip(&self.sparse) {
            next.clear();
            next.reserve(layer.rows());
            for (row, &b) in rows.iter().zip(&layer.bias) {
                let mut acc = b;
                for &(c, w) in row {
                    acc += w * h[c as usize];
                }
                next.push(match layer.activation {
                    Activation::Relu => {
                        if acc > 0.0 {
                            acc
                        } else {
                            0.0
                        }
                    }
                    Activation::Identity => acc,
                });
            }
            std::mem::swap(&mut h, &mut next);
        }
        Ok(h)
    }

    /// Single identity layer computing `x -> Wx + b`.
    pub fn affine(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Network> {
        let cols = weights.first().map_or(0, |r| r.len());
        Network::new(
            cols,
            vec![Layer {
                weights,
                bias,
                activation: Activation::Identity,
            }],
        )
    }

    /// Identity map on `n` channels.
    pub fn identity(n: usize) -> Network {
        let weights = (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                row
            })
            .collect();
        Network::affine(weights, vec![0.0; n]).expect("identity is well-formed")
    }

    /// Projects the listed input channels, in order.
    pub fn select(input_dim: usize, channels: &[usize]) -> Result<Network> {
        let mut weights = Vec::with_capacity(channels.len());
        for &c in channels {
            if c >= input_dim {
                return Err(Error::Shape(format!(
                    "selected channel {c} out of {input_dim} inputs"
                )));
            }
            let mut row = vec![0.0; input_dim];
            row[c] = 1.0;
            weights.push(row);
        }
        Network::new(
            input_dim,
            vec![Layer {
                weights,
                bias: vec![0.0; channels.len()],
                activation: Activation::Identity,
            }],
        )
    }

    /// Ignores its input and outputs the given constants.
    pub fn constant(input_dim: usize, values: &[f64]) -> Result<Network> {
        Network::new(
            input_dim,
            vec![Layer {
                weights: vec![vec![0.0; input_dim]; values.len()],
                bias: values.to_vec(),
                activation: Activation::Identity,
            }],
        )
    }

    /// Exact two-input minimum via `(x1 + x2 - |x1 - x2|) / 2`.
    pub fn min2() -> Network {
        min_max(true)
    }

    /// Exact two-input maximum via `(x1 + x2 + |x1 - x2|) / 2`.
    pub fn max2() -> Network {
        min_max(false)
    }

    /// Step indicator `relu(x - a + 1) - relu(x - a)`: equals 1 for integer
    /// x >= a and 0 for integer x <= a - 1. On non-integers it is the linear
    /// ramp between the two; callers guarantee integer inputs.
    pub fn indicator_ge(a: i64) -> Network {
        assert!(a.abs() <= MAX_EXACT_INT, "threshold too large for exact arithmetic");
        let a = a as f64;
        let l1 = Layer {
            weights: vec![vec![1.0], vec![1.0]],
            bias: vec![1.0 - a, -a],
            activation: Activation::Relu,
        };
        let l2 = Layer {
            weights: vec![vec![1.0, -1.0]],
            bias: vec![0.0],
            activation: Activation::Identity,
        };
        Network::new(1, vec![l1, l2]).expect("indicator is well-formed")
    }

    /// Equality indicator on integers: 1 iff x = a. Built as the hat function
    /// `relu(x-a+1) - 2*relu(x-a) + relu(x-a-1)`.
    pub fn equals_const(a: i64) -> Network {
        assert!(a.abs() <= MAX_EXACT_INT, "threshold too large for exact arithmetic");
        let a = a as f64;
        let l1 = Layer {
            weights: vec![vec![1.0], vec![1.0], vec![1.0]],
            bias: vec![1.0 - a, -a, -1.0 - a],
            activation: Activation::Relu,
        };
        let l2 = Layer {
            weights: vec![vec![1.0, -2.0, 1.0]],
            bias: vec![0.0],
            activation: Activation::Identity,
        };
        Network::new(1, vec![l1, l2]).expect("equality indicator is well-formed")
    }

    /// Wraps a core map `f` into a gated network over `(g, x)`:
    /// `y_i = relu(f_i(x) + B*g - B) - relu(-f_i(x) + B*g - B)`.
    ///
    /// For g = 1 and |f_i(x)| <= B the output is f_i(x) bitwise (the `B*g`
    /// term is accumulated first, so `-B + B*1` cancels exactly); for g = 0 it
    /// is exactly 0. Gate values are assumed to be exactly 0 or 1.
    pub fn gate_wrap(core: &Network, bound: GateBound) -> Network {
        let b = bound.value();
        let mut layers = Vec::with_capacity(core.layers.len() + 2);
        // carry the gate through every core layer on channel 0
        for layer in &core.layers {
            let cols = 1 + layer.cols();
            let mut weights = Vec::with_capacity(1 + layer.rows());
            let mut row0 = vec![0.0; cols];
            row0[0] = 1.0;
            weights.push(row0);
            for row in &layer.weights {
                let mut r = vec![0.0; cols];
                r[1..].copy_from_slice(row);
                weights.push(r);
            }
            let mut bias = vec![0.0];
            bias.extend_from_slice(&layer.bias);
            layers.push(Layer {
                weights,
                bias,
                activation: layer.activation,
            });
        }
        // inhibition pairs over (g, f_1 .. f_m)
        let m = core.output_dim();
        let mut pairs = Vec::with_capacity(2 * m);
        let mut pair_bias = Vec::with_capacity(2 * m);
        for i in 0..m {
            for sign in [1.0, -1.0] {
                let mut row = vec![0.0; 1 + m];
                row[0] = b;
                row[1 + i] = sign;
                pairs.push(row);
                pair_bias.push(-b);
            }
        }
        layers.push(Layer {
            weights: pairs,
            bias: pair_bias,
            activation: Activation::Relu,
        });
        let mut recombine = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = vec![0.0; 2 * m];
            row[2 * i] = 1.0;
            row[2 * i + 1] = -1.0;
            recombine.push(row);
        }
        layers.push(Layer {
            weights: recombine,
            bias: vec![0.0; m],
            activation: Activation::Identity,
        });
        Network::new(1 + core.input_dim, layers).expect("gate wrap is well-formed")
    }

    /// Compiles a finite function on integer key tuples into a lookup network
    /// with one bump unit per entry: `b_j = relu(1 - sum_i |x_i - k_{j,i}|)`.
    /// Exact on every listed key; zero on every other integer tuple (distinct
    /// integer tuples are at L1 distance >= 1). Duplicate identical entries
    /// are deduplicated; a key mapped to two distinct outputs is a conflict.
    pub fn table(entries: &[TableEntry], key_width: usize, value_width: usize) -> Result<Network> {
        if entries.is_empty() {
            return Err(Error::Shape("table needs at least one entry".into()));
        }
        if key_width == 0 {
            return Err(Error::Shape("table key width must be positive".into()));
        }
        let mut unique: BTreeMap<Vec<i64>, (usize, Vec<f64>)> = BTreeMap::new();
        for (idx, entry) in entries.iter().enumerate() {
            if entry.key.len() != key_width {
                return Err(Error::Shape(format!(
                    "table entry {idx}: key width {} != {key_width}",
                    entry.key.len()
                )));
            }
            if entry.value.len() != value_width {
                return Err(Error::Shape(format!(
                    "table entry {idx}: value width {} != {value_width}",
                    entry.value.len()
                )));
            }
            if let Some(&k) = entry.key.iter().find(|k| k.abs() > MAX_EXACT_INT) {
                return Err(Error::NonIntegerKey {
                    value: k as f64,
                    context: format!("entry {idx} exceeds the exact integer range"),
                });
            }
            if let Some(&bad) = entry.value.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "table value",
                    value: bad,
                });
            }
            match unique.get(&entry.key) {
                None => {
                    unique.insert(entry.key.clone(), (idx, entry.value.clone()));
                }
                Some((first, existing)) => {
                    if existing != &entry.value {
                        return Err(Error::TableConflict {
                            key: entry.key.clone(),
                            first: format!("entry {first} -> {existing:?}"),
                            second: format!("entry {idx} -> {:?}", entry.value),
                        });
                    }
                }
            }
        }
        let n = unique.len();
        let d = key_width;
        // layer 1: relu(x_i - k) and relu(k - x_i) per entry and key component
        let mut abs_weights = Vec::with_capacity(2 * d * n);
        let mut abs_bias = Vec::with_capacity(2 * d * n);
        for key in unique.keys() {
            for (i, &k) in key.iter().enumerate() {
                let k = k as f64;
                let mut pos = vec![0.0; d];
                pos[i] = 1.0;
                abs_weights.push(pos);
                abs_bias.push(-k);
                let mut neg = vec![0.0; d];
                neg[i] = -1.0;
                abs_weights.push(neg);
                abs_bias.push(k);
            }
        }
        // layer 2: bump per entry
        let mut bump_weights = Vec::with_capacity(n);
        for j in 0..n {
            let mut row = vec![0.0; 2 * d * n];
            for c in 0..2 * d {
                row[j * 2 * d + c] = -1.0;
            }
            bump_weights.push(row);
        }
        // layer 3: value readout
        let mut out_weights = vec![vec![0.0; n]; value_width];
        for (j, (_, (_, value))) in unique.iter().enumerate() {
            for (i, &v) in value.iter().enumerate() {
                out_weights[i][j] = v;
            }
        }
        Network::new(
            d,
            vec![
                Layer {
                    weights: abs_weights,
                    bias: abs_bias,
                    activation: Activation::Relu,
                },
                Layer {
                    weights: bump_weights,
                    bias: vec![1.0; n],
                    activation: Activation::Relu,
                },
                Layer {
                    weights: out_weights,
                    bias: vec![0.0; value_width],
                    activation: Activation::Identity,
                },
            ],
        )
    }

    /// Runs `self` and `next` in sequence as one network.
    pub fn then(&self, next: &Network) -> Result<Network> {
        if self.output_dim() != next.input_dim {
            return Err(Error::Shape(format!(
                "cannot compose: {} outputs into {} inputs",
                self.output_dim(),
                next.input_dim
            )));
        }
        let mut layers = self.layers.clone();
        layers.extend(next.layers.iter().cloned());
        Network::new(self.input_dim, layers)
    }

    /// Runs all component networks on one shared input and concatenates their
    /// outputs. Components of unequal depth are first brought to a common
    /// shape (ReLU hidden layers plus an identity readout) by the split-pair
    /// carry used in [`Network::to_pure_relu`], so the combined network
    /// evaluates each component bit-for-bit.
    pub fn parallel(nets: &[Network]) -> Result<Network> {
        if nets.is_empty() {
            return Err(Error::Shape("parallel stack needs at least one network".into()));
        }
        let input_dim = nets[0].input_dim;
        if nets.iter().any(|n| n.input_dim != input_dim) {
            return Err(Error::Shape("parallel stack requires a shared input width".into()));
        }
        // fast path: identical depth and activation schedule
        let depth = nets[0].layers.len();
        let uniform = nets.iter().all(|n| {
            n.layers.len() == depth
                && n.layers
                    .iter()
                    .zip(&nets[0].layers)
                    .all(|(a, b)| a.activation == b.activation)
        });
        let shaped: Vec<Network> = if uniform {
            nets.to_vec()
        } else {
            let hidden = nets.iter().map(|n| n.natural_hidden()).max().unwrap();
            nets.iter()
                .map(|n| n.shaped(hidden))
                .collect::<Result<Vec<_>>>()?
        };
        let depth = shaped[0].layers.len();
        let mut layers = Vec::with_capacity(depth);
        for l in 0..depth {
            let activation = shaped[0].layers[l].activation;
            let in_width: usize = if l == 0 {
                input_dim
            } else {
                shaped.iter().map(|n| n.layers[l - 1].rows()).sum()
            };
            let mut weights = Vec::new();
            let mut bias = Vec::new();
            let mut col_offset = 0;
            for net in &shaped {
                let layer = &net.layers[l];
                let cols = layer.cols();
                for (row, &b) in layer.weights.iter().zip(&layer.bias) {
                    let mut r = vec![0.0; in_width];
                    if l == 0 {
                        // all components read the shared input directly
                        r[..cols].copy_from_slice(row);
                    } else {
                        r[col_offset..col_offset + cols].copy_from_slice(row);
                    }
                    weights.push(r);
                    bias.push(b);
                }
                if l > 0 {
                    col_offset += cols;
                }
            }
            layers.push(Layer {
                weights,
                bias,
                activation,
            });
        }
        Network::new(input_dim, layers)
    }

    /// Number of hidden layers the network has in split normal form.
    fn natural_hidden(&self) -> usize {
        let last_identity = self.layers.last().map(|l| l.activation) == Some(Activation::Identity);
        self.layers.len() - usize::from(last_identity)
    }

    /// Canonical all-ReLU form: every hidden layer ReLU, one identity readout.
    /// Linear values crossing a ReLU layer are split into adjacent
    /// `relu(v), relu(-v)` unit pairs and recombined downstream with
    /// `(w, -w)` weights, so both forms evaluate identically.
    pub fn to_pure_relu(&self) -> Network {
        self.shaped(self.natural_hidden())
            .expect("reshaping to own depth cannot fail")
    }

    /// Rebuilds the network with exactly `hidden` ReLU layers followed by one
    /// identity readout, padding with carry layers as needed.
    fn shaped(&self, hidden: usize) -> Result<Network> {
        assert!(hidden >= self.natural_hidden(), "cannot shrink a network");
        let mut layers: Vec<Layer> = Vec::new();
        // Representation of each logical channel in the last emitted layer:
        // Direct(col) or Split(+col, -col).
        #[derive(Clone, Copy)]
        enum Repr {
            Direct(usize),
            Split(usize, usize),
        }
        let mut repr: Vec<Repr> = (0..self.input_dim).map(Repr::Direct).collect();
        let prev_width = |layers: &Vec<Layer>, input_dim: usize| {
            layers.last().map_or(input_dim, |l: &Layer| l.rows())
        };
        let expand_row = |row: &[f64], bias: f64, repr: &[Repr], width: usize| {
            let mut r = vec![0.0; width];
            for (&w, re) in row.iter().zip(repr) {
                match *re {
                    Repr::Direct(c) => r[c] = w,
                    Repr::Split(p, n) => {
                        r[p] = w;
                        r[n] = -w;
                    }
                }
            }
            (r, bias)
        };
        let total = self.layers.len();
        let last_is_identity = self.layers[total - 1].activation == Activation::Identity;
        let body_end = if last_is_identity { total - 1 } else { total };
        for layer in &self.layers[..body_end] {
            let width = prev_width(&layers, self.input_dim);
            match layer.activation {
                Activation::Relu => {
                    let mut weights = Vec::with_capacity(layer.rows());
                    let mut bias = Vec::with_capacity(layer.rows());
                    for (row, &b) in layer.weights.iter().zip(&layer.bias) {
                        let (r, b) = expand_row(row, b, &repr, width);
                        weights.push(r);
                        bias.push(b);
                    }
                    repr = (0..layer.rows()).map(Repr::Direct).collect();
                    layers.push(Layer {
                        weights,
                        bias,
                        activation: Activation::Relu,
                    });
                }
                Activation::Identity => {
                    // split each affine value into an adjacent relu pair
                    let mut weights = Vec::with_capacity(2 * layer.rows());
                    let mut bias = Vec::with_capacity(2 * layer.rows());
                    for (row, &b) in layer.weights.iter().zip(&layer.bias) {
                        let (r, b) = expand_row(row, b, &repr, width);
                        let neg_r: Vec<f64> = r.iter().map(|w| -w).collect();
                        weights.push(r);
                        bias.push(b);
                        weights.push(neg_r);
                        bias.push(-b);
                    }
                    repr = (0..layer.rows()).map(|j| Repr::Split(2 * j, 2 * j + 1)).collect();
                    layers.push(Layer {
                        weights,
                        bias,
                        activation: Activation::Relu,
                    });
                }
            }
        }
        // carry layers to reach the requested depth
        while layers.len() < hidden {
            let width = prev_width(&layers, self.input_dim);
            if layers.is_empty() {
                // raw inputs may be negative: carry them as split pairs
                let mut weights = Vec::with_capacity(2 * repr.len());
                for j in 0..repr.len() {
                    let mut pos = vec![0.0; width];
                    pos[j] = 1.0;
                    let mut neg = vec![0.0; width];
                    neg[j] = -1.0;
                    weights.push(pos);
                    weights.push(neg);
                }
                let rows = weights.len();
                repr = (0..repr.len()).map(|j| Repr::Split(2 * j, 2 * j + 1)).collect();
                layers.push(Layer {
                    weights,
                    bias: vec![0.0; rows],
                    activation: Activation::Relu,
                });
            } else {
                // post-relu channels are nonnegative; identity rows carry them
                let mut weights = Vec::with_capacity(width);
                for j in 0..width {
                    let mut row = vec![0.0; width];
                    row[j] = 1.0;
                    weights.push(row);
                }
                layers.push(Layer {
                    weights,
                    bias: vec![0.0; width],
                    activation: Activation::Relu,
                });
                // channel representation indices are unchanged
            }
        }
        // identity readout
        let width = prev_width(&layers, self.input_dim);
        let (readout_rows, readout_bias): (Vec<Vec<f64>>, Vec<f64>) = if last_is_identity {
            let layer = &self.layers[total - 1];
            layer
                .weights
                .iter()
                .zip(&layer.bias)
                .map(|(row, &b)| expand_row(row, b, &repr, width))
                .unzip()
        } else {
            (0..self.output_dim())
                .map(|j| expand_row(&one_hot(self.output_dim(), j), 0.0, &repr, width))
                .unzip()
        };
        layers.push(Layer {
            weights: readout_rows,
            bias: readout_bias,
            activation: Activation::Identity,
        });
        Network::new(self.input_dim, layers)
    }
}

fn one_hot(n: usize, j: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    row[j] = 1.0;
    row
}

fn min_max(is_min: bool) -> Network {
    // units: relu(x1-x2), relu(x2-x1), relu(x1+x2), relu(-x1-x2)
    let l1 = Layer {
        weights: vec![
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
        ],
        bias: vec![0.0; 4],
        activation: Activation::Relu,
    };
    let s = if is_min { -0.5 } else { 0.5 };
    let l2 = Layer {
        weights: vec![vec![s, s, 0.5, -0.5]],
        bias: vec![0.0],
        activation: Activation::Identity,
    };
    Network::new(2, vec![l1, l2]).expect("min/max is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluate_identity_network() {
        let net = Network::identity(2);
        assert_eq!(net.eval(&[3.5, -2.0]).unwrap(), vec![3.5, -2.0]);
    }

    #[test]
    fn evaluate_single_relu_layer() {
        let net = Network::new(
            1,
            vec![Layer {
                weights: vec![vec![1.0]],
                bias: vec![-1.0],
                activation: Activation::Relu,
            }],
        )
        .unwrap();
        assert_eq!(net.eval(&[0.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn evaluate_min2_matches_arithmetic_identity() {
        let net = Network::min2();
        let (x1, x2) = (4.0f64, 9.0f64);
        let expected = (x1 + x2 - (x1 - x2).abs()) / 2.0;
        assert_eq!(net.eval(&[x1, x2]).unwrap(), vec![expected]);
        assert_eq!(expected, 4.0);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let net = Network::identity(2);
        assert!(net.eval(&[1.0]).is_err());
    }

    #[test]
    fn affine_increments_second_channel() {
        let net = Network::affine(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 1.0]).unwrap();
        assert_eq!(net.eval(&[5.0, 1.0]).unwrap(), vec![5.0, 2.0]);
    }

    #[test]
    fn affine_constant_marker() {
        let net = Network::constant(1, &[-1.0]).unwrap();
        assert_eq!(net.eval(&[123.0]).unwrap(), vec![-1.0]);
    }

    #[test]
    fn min_and_max_trio() {
        let min = Network::min2();
        let max = Network::max2();
        assert_eq!(min.eval(&[3.0, 5.0]).unwrap(), vec![3.0]);
        assert_eq!(max.eval(&[3.0, 5.0]).unwrap(), vec![5.0]);
        assert_eq!(min.eval(&[-2.0, -2.0]).unwrap(), vec![-2.0]);
        assert_eq!(min.eval(&[7.5, 7.25]).unwrap(), vec![7.25]);
    }

    #[test]
    fn min_max_exact_on_large_integers() {
        let min = Network::min2();
        let max = Network::max2();
        let big = (1u64 << 50) as f64;
        for (x1, x2) in [(big, big - 1.0), (-big, big), (big - 3.0, -big + 7.0)] {
            assert_eq!(min.eval(&[x1, x2]).unwrap()[0], x1.min(x2));
            assert_eq!(max.eval(&[x1, x2]).unwrap()[0], x1.max(x2));
        }
    }

    #[test]
    fn min2_network_equals_the_identity_evaluated_in_doubles() {
        use rand::{Rng, SeedableRng};
        let net = Network::min2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10_000 {
            let x1: f64 = rng.gen_range(-1e6..1e6);
            let x2: f64 = rng.gen_range(-1e6..1e6);
            let identity = (x1 + x2 - (x1 - x2).abs()) / 2.0;
            let got = net.eval(&[x1, x2]).unwrap()[0];
            assert_eq!(got.to_bits(), identity.to_bits(), "at ({x1}, {x2})");
        }
    }

    #[test]
    fn gate_wrap_ten_thousand_random_cores() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        let bound = GateBound::new(1000.0).unwrap();
        for _ in 0..10_000 {
            let rows = rng.gen_range(1..=3);
            let cols = rng.gen_range(1..=3);
            let weights: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-5.0..5.0)).collect())
                .collect();
            let bias: Vec<f64> = (0..rows).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let core = Network::affine(weights, bias).unwrap();
            let wrapped = Network::gate_wrap(&core, bound);
            let x: Vec<f64> = (0..cols).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let f = core.eval(&x).unwrap();
            assert!(f.iter().all(|y| y.abs() <= bound.value()));
            let mut input = vec![0.0];
            input.extend(&x);
            assert!(wrapped.eval(&input).unwrap().iter().all(|&y| y == 0.0));
            input[0] = 1.0;
            let passed = wrapped.eval(&input).unwrap();
            for (a, b) in passed.iter().zip(&f) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn indicator_ge_on_integer_grid() {
        let net = Network::indicator_ge(2);
        assert_eq!(net.eval(&[2.0]).unwrap(), vec![1.0]);
        assert_eq!(net.eval(&[1.0]).unwrap(), vec![0.0]);
        assert_eq!(net.eval(&[5.0]).unwrap(), vec![1.0]);
        for a in -10..=10i64 {
            let net = Network::indicator_ge(a);
            for x in -50..=50i64 {
                let got = net.eval(&[x as f64]).unwrap()[0];
                let expected = if x >= a { 1.0 } else { 0.0 };
                assert_eq!(got, expected, "indicator_ge({a}) at {x}");
            }
        }
    }

    #[test]
    fn equals_const_on_integer_grid() {
        let net = Network::equals_const(1);
        assert_eq!(net.eval(&[1.0]).unwrap(), vec![1.0]);
        assert_eq!(net.eval(&[2.0]).unwrap(), vec![0.0]);
        for a in -10..=10i64 {
            let net = Network::equals_const(a);
            for x in -50..=50i64 {
                let expected = if x == a { 1.0 } else { 0.0 };
                assert_eq!(net.eval(&[x as f64]).unwrap()[0], expected);
            }
        }
    }

    #[test]
    fn conjunction_via_min2() {
        // equals(i - p, 0) AND indicator_ge(p, 2) at (i = 3, p = 3)
        let pre = Network::affine(vec![vec![1.0, -1.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let left = Network::select(2, &[0]).unwrap().then(&Network::equals_const(0)).unwrap();
        let right = Network::select(2, &[1]).unwrap().then(&Network::indicator_ge(2)).unwrap();
        let and = pre
            .then(&Network::parallel(&[left, right]).unwrap())
            .unwrap()
            .then(&Network::min2())
            .unwrap();
        for i in 0..6i64 {
            for p in 0..6i64 {
                let expected = if i == p && p >= 2 { 1.0 } else { 0.0 };
                assert_eq!(and.eval(&[i as f64, p as f64]).unwrap()[0], expected, "(i={i}, p={p})");
            }
        }
    }

    #[test]
    fn gate_wrap_inhibits_and_passes() {
        let wrapped = Network::gate_wrap(&Network::min2(), GateBound::new(1000.0).unwrap());
        assert_eq!(wrapped.eval(&[0.0, 5.0, 3.0]).unwrap(), vec![0.0]);
        assert_eq!(wrapped.eval(&[1.0, 5.0, 3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn gate_wrap_out_of_bound_core_leaks_past_the_bound() {
        // |f| = 10.5 > B = 10: the wrapped output still exceeds B at g = 1,
        // which is exactly what the machine's run-time assertion catches.
        let core = Network::affine(vec![vec![1.0]], vec![1.0]).unwrap();
        let wrapped = Network::gate_wrap(&core, GateBound::new(10.0).unwrap());
        let out = wrapped.eval(&[1.0, 9.5]).unwrap();
        assert_eq!(out, vec![10.5]);
        assert!(out[0].abs() > 10.0);
        // and at g = 0 the inhibition guarantee is broken for such inputs
        assert_ne!(wrapped.eval(&[0.0, 9.5]).unwrap()[0], 0.0);
    }

    #[test]
    fn table_lookup_listed_and_unlisted_keys() {
        let entries = vec![
            TableEntry { key: vec![0, 0], value: vec![5.0] },
            TableEntry { key: vec![1, 0], value: vec![7.0] },
        ];
        let net = Network::table(&entries, 2, 1).unwrap();
        assert_eq!(net.eval(&[1.0, 0.0]).unwrap(), vec![7.0]);
        assert_eq!(net.eval(&[0.0, 0.0]).unwrap(), vec![5.0]);
        assert_eq!(net.eval(&[2.0, 2.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn table_conflicts_rejected_duplicates_deduplicated() {
        let conflicting = vec![
            TableEntry { key: vec![1], value: vec![2.0] },
            TableEntry { key: vec![1], value: vec![3.0] },
        ];
        assert!(matches!(
            Network::table(&conflicting, 1, 1),
            Err(Error::TableConflict { .. })
        ));
        let duplicated = vec![
            TableEntry { key: vec![1], value: vec![2.0] },
            TableEntry { key: vec![1], value: vec![2.0] },
        ];
        let net = Network::table(&duplicated, 1, 1).unwrap();
        assert_eq!(net.eval(&[1.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn table_exact_on_random_finite_function() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut entries = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        while entries.len() < 50 {
            let key: Vec<i64> = (0..3).map(|_| rng.gen_range(0..=20)).collect();
            if seen.insert(key.clone()) {
                let value = vec![rng.gen_range(-10.0..10.0)];
                entries.push(TableEntry { key, value });
            }
        }
        let net = Network::table(&entries, 3, 1).unwrap();
        for e in &entries {
            let x: Vec<f64> = e.key.iter().map(|&k| k as f64).collect();
            assert_eq!(net.eval(&x).unwrap(), e.value, "key {:?}", e.key);
        }
    }

    #[test]
    fn parallel_duplicates_identity() {
        let net = Network::parallel(&[Network::identity(1), Network::identity(1)]).unwrap();
        assert_eq!(net.eval(&[3.0]).unwrap(), vec![3.0, 3.0]);
    }

    #[test]
    fn parallel_indicator_pair() {
        let net = Network::parallel(&[Network::indicator_ge(1), Network::indicator_ge(2)]).unwrap();
        assert_eq!(net.eval(&[1.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn compose_trio() {
        let id = Network::identity(3);
        let net = id.then(&id).unwrap();
        assert_eq!(net.eval(&[1.0, -2.0, 0.5]).unwrap(), vec![1.0, -2.0, 0.5]);

        let dup = Network::affine(vec![vec![1.0], vec![1.0]], vec![0.0, 0.0]).unwrap();
        let min_of_dup = dup.then(&Network::min2()).unwrap();
        assert_eq!(min_of_dup.eval(&[4.0]).unwrap(), vec![4.0]);

        // |x| as a composition of a relu splitter and a summation
        let splitter = Network::new(
            1,
            vec![Layer {
                weights: vec![vec![1.0], vec![-1.0]],
                bias: vec![0.0, 0.0],
                activation: Activation::Relu,
            }],
        )
        .unwrap();
        let sum = Network::affine(vec![vec![1.0, 1.0]], vec![0.0]).unwrap();
        let abs = splitter.then(&sum).unwrap();
        assert_eq!(abs.eval(&[-3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn pure_relu_form_matches_original() {
        let mixed = Network::affine(vec![vec![2.0, -1.0], vec![0.5, 0.5]], vec![0.25, -1.0])
            .unwrap()
            .then(&Network::min2())
            .unwrap();
        let canonical = mixed.to_pure_relu();
        for layer in &canonical.layers()[..canonical.layers().len() - 1] {
            assert_eq!(layer.activation, Activation::Relu);
        }
        for x in [[0.0, 0.0], [1.5, -2.0], [-3.25, 4.0], [100.0, 99.5]] {
            let a = mixed.eval(&x).unwrap();
            let b = canonical.eval(&x).unwrap();
            assert_eq!(a[0].to_bits(), b[0].to_bits(), "at {x:?}");
        }
    }

    proptest! {
        #[test]
        fn min2_exact_on_integers(x1 in -100i64..=100, x2 in -100i64..=100) {
            let min = Network::min2();
            let max = Network::max2();
            prop_assert_eq!(min.eval(&[x1 as f64, x2 as f64]).unwrap()[0], x1.min(x2) as f64);
            prop_assert_eq!(max.eval(&[x1 as f64, x2 as f64]).unwrap()[0], x1.max(x2) as f64);
        }

        #[test]
        fn gate_wrap_contract_on_random_affine_cores(
            w in proptest::collection::vec(-2.0..2.0f64, 4),
            b in proptest::collection::vec(-2.0..2.0f64, 2),
            x in proptest::collection::vec(-10.0..10.0f64, 2),
        ) {
            let core = Network::affine(
                vec![vec![w[0], w[1]], vec![w[2], w[3]]],
                b.clone(),
            ).unwrap();
            let wrapped = Network::gate_wrap(&core, GateBound::new(100.0).unwrap());
            let f = core.eval(&x).unwrap();
            let mut off = vec![0.0; 1 + x.len()];
            off[1..].copy_from_slice(&x);
            let inhibited = wrapped.eval(&off).unwrap();
            prop_assert!(inhibited.iter().all(|&y| y == 0.0));
            let mut on = off;
            on[0] = 1.0;
            let passed = wrapped.eval(&on).unwrap();
            for (a, b) in passed.iter().zip(&f) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn table_zero_on_unlisted_integer_tuples(probe in proptest::collection::vec(-5i64..=25, 2)) {
            let entries = vec![
                TableEntry { key: vec![0, 0], value: vec![5.0, -1.0] },
                TableEntry { key: vec![1, 0], value: vec![7.0, 2.0] },
                TableEntry { key: vec![3, 4], value: vec![-2.5, 0.5] },
            ];
            let net = Network::table(&entries, 2, 2).unwrap();
            let x: Vec<f64> = probe.iter().map(|&k| k as f64).collect();
            let out = net.eval(&x).unwrap();
            match entries.iter().find(|e| e.key == probe) {
                Some(e) => prop_assert_eq!(out, e.value.clone()),
                None => prop_assert!(out.iter().all(|&y| y == 0.0)),
            }
        }

        #[test]
        fn parallel_equals_componentwise_evaluation(
            x in proptest::collection::vec(-20.0..20.0f64, 2),
            a in -3i64..=3,
        ) {
            // deliberately unequal depths to exercise the carry padding
            let comps = vec![
                Network::affine(vec![vec![1.0, 2.0]], vec![-0.5]).unwrap(),
                Network::select(2, &[0]).unwrap().then(&Network::indicator_ge(a)).unwrap(),
                Network::min2(),
            ];
            let stacked = Network::parallel(&comps).unwrap();
            let got = stacked.eval(&x).unwrap();
            let mut expected = Vec::new();
            for c in &comps {
                expected.extend(c.eval(&x).unwrap());
            }
            prop_assert_eq!(got.len(), expected.len());
            for (g, e) in got.iter().zip(&expected) {
                prop_assert_eq!(g.to_bits(), e.to_bits());
            }
        }

        #[test]
        fn compose_equals_nested_evaluation(x in proptest::collection::vec(-20.0..20.0f64, 2)) {
            let f = Network::affine(vec![vec![1.0, -1.0], vec![2.0, 1.0]], vec![0.5, -1.5]).unwrap();
            let g = Network::min2();
            let fg = f.then(&g).unwrap();
            let expected = g.eval(&f.eval(&x).unwrap()).unwrap();
            let got = fg.eval(&x).unwrap();
            prop_assert_eq!(got[0].to_bits(), expected[0].to_bits());
        }
    }
}
