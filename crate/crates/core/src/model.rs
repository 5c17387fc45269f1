//! The two-layer diffusion-convolutional network.
//!
//! For node `i`, hop `j` and feature `k` the hidden activation is
//! `Z[i,j,k] = f(Wc[j,k] * D[i,j,k])` where `D` holds the diffused features.
//! The flattened `(H+1)*F` block of each node feeds a fully connected layer
//! with bias, and a row softmax turns the logits into class probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hexfloat;
use crate::kernel::{DiffusedFeatures, KernelMode};
use crate::sparse::DenseMatrix;

/// Elementwise nonlinearity of the diffusion-convolution layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the input `pre` and output `out`.
    fn derivative(self, pre: f64, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::config(format!("unknown activation {other:?}"))),
        }
    }
}

/// Model weights. Parameter shapes depend only on `(H, F, C)`, never on the
/// number of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DcnnModel {
    n_hops: usize,
    n_features: usize,
    n_classes: usize,
    activation: Activation,
    /// `(H+1) x F`
    w_c: DenseMatrix,
    /// `((H+1) F) x C`
    w_d: DenseMatrix,
    bias: Vec<f64>,
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let s = (6.0 / (rows + cols) as f64).sqrt();
    let values = (0..rows * cols).map(|_| rng.random_range(-s..=s)).collect();
    DenseMatrix::from_vec(rows, cols, values).expect("shape matches")
}

impl DcnnModel {
    /// Zero-initialised model.
    pub fn zeros(n_hops: usize, n_features: usize, n_classes: usize, activation: Activation) -> Self {
        let width = (n_hops + 1) * n_features;
        Self {
            n_hops,
            n_features,
            n_classes,
            activation,
            w_c: DenseMatrix::zeros(n_hops + 1, n_features),
            w_d: DenseMatrix::zeros(width, n_classes),
            bias: vec![0.0; n_classes],
        }
    }

    /// Uniform Glorot initialisation of both weight matrices; zero bias.
    pub fn init(
        n_hops: usize,
        n_features: usize,
        n_classes: usize,
        activation: Activation,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = (n_hops + 1) * n_features;
        Self {
            w_c: glorot(&mut rng, n_hops + 1, n_features),
            w_d: glorot(&mut rng, width, n_classes),
            ..Self::zeros(n_hops, n_features, n_classes, activation)
        }
    }

    pub fn n_hops(&self) -> usize {
        self.n_hops
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn w_c(&self) -> &DenseMatrix {
        &self.w_c
    }

    pub fn w_c_mut(&mut self) -> &mut DenseMatrix {
        &mut self.w_c
    }

    pub fn w_d(&self) -> &DenseMatrix {
        &self.w_d
    }

    pub fn w_d_mut(&mut self) -> &mut DenseMatrix {
        &mut self.w_d
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    fn width(&self) -> usize {
        (self.n_hops + 1) * self.n_features
    }

    pub fn n_parameters(&self) -> usize {
        self.w_c.values().len() + self.w_d.values().len() + self.bias.len()
    }

    /// All parameters flattened as `[Wc, Wd, bias]`.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_parameters());
        p.extend_from_slice(self.w_c.values());
        p.extend_from_slice(self.w_d.values());
        p.extend_from_slice(&self.bias);
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_parameters() {
            return Err(Error::input(format!(
                "expected {} parameters, got {}",
                self.n_parameters(),
                params.len()
            )));
        }
        let (c, rest) = params.split_at(self.w_c.values().len());
        let (d, b) = rest.split_at(self.w_d.values().len());
        self.w_c.values_mut().copy_from_slice(c);
        self.w_d.values_mut().copy_from_slice(d);
        self.bias.copy_from_slice(b);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().iter().all(|v| v.is_finite())
    }

    fn check_shapes(&self, diffused: &DiffusedFeatures) -> Result<()> {
        if diffused.n_hops() != self.n_hops || diffused.n_features() != self.n_features {
            return Err(Error::input(format!(
                "model expects H={} F={}, diffused features have H={} F={}",
                self.n_hops,
                self.n_features,
                diffused.n_hops(),
                diffused.n_features()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, diffused: &DiffusedFeatures) -> Result<ForwardTrace> {
        self.check_shapes(diffused)?;
        if !diffused.values().iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric("non-finite diffused feature".into()));
        }
        if !self.is_finite() {
            return Err(Error::Numeric("non-finite model weight".into()));
        }
        let n = diffused.n_nodes();
        let width = self.width();
        let c = self.n_classes;
        let w_c = self.w_c.values();
        let mut z = vec![0.0; n * width];
        let mut logits = DenseMatrix::zeros(n, c);
        let mut probs = DenseMatrix::zeros(n, c);
        for i in 0..n {
            let zi = &mut z[i * width..(i + 1) * width];
            for ((out, &d), &w) in zi.iter_mut().zip(diffused.node(i)).zip(w_c) {
                *out = self.activation.apply(w * d);
            }
            let li = logits.row_mut(i);
            li.copy_from_slice(&self.bias);
            for (q, &zq) in zi.iter().enumerate() {
                if zq != 0.0 {
                    for (l, &w) in li.iter_mut().zip(self.w_d.row(q)) {
                        *l += zq * w;
                    }
                }
            }
            let max = li.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pi = probs.row_mut(i);
            let mut total = 0.0;
            for (p, &l) in pi.iter_mut().zip(logits.row(i)) {
                *p = (l - max).exp();
                total += *p;
            }
            pi.iter_mut().for_each(|p| *p /= total);
        }
        Ok(ForwardTrace {
            n_hops: self.n_hops,
            n_features: self.n_features,
            z,
            logits,
            probs,
        })
    }

    /// Analytic gradient of the mean masked cross-entropy.
    pub fn backward(
        &self,
        diffused: &DiffusedFeatures,
        trace: &ForwardTrace,
        labels: &[Option<usize>],
        mask: &[bool],
    ) -> Result<Gradients> {
        self.check_shapes(diffused)?;
        let n = diffused.n_nodes();
        if labels.len() != n || mask.len() != n || trace.probs.n_rows() != n {
            return Err(Error::input("labels, mask and trace must cover every node"));
        }
        let mut grads = Gradients::zeros_like(self);
        let selected = masked_labels(labels, mask)?;
        if selected.is_empty() {
            return Ok(grads);
        }
        let scale = 1.0 / selected.len() as f64;
        let width = self.width();
        let w_c = self.w_c.values();
        let mut d_logits = vec![0.0; self.n_classes];
        let mut d_z = vec![0.0; width];
        for &(i, y) in &selected {
            for (c, (g, &p)) in d_logits.iter_mut().zip(trace.probs.row(i)).enumerate() {
                *g = (p - if c == y { 1.0 } else { 0.0 }) * scale;
            }
            let zi = trace.node_activations(i);
            for (q, &zq) in zi.iter().enumerate() {
                let w_row = self.w_d.row(q);
                let g_row = grads.d_w_d.row_mut(q);
                let mut back = 0.0;
                for ((g, &w), &dl) in g_row.iter_mut().zip(w_row).zip(&d_logits) {
                    *g += zq * dl;
                    back += w * dl;
                }
                d_z[q] = back;
            }
            for (b, &dl) in grads.d_bias.iter_mut().zip(&d_logits) {
                *b += dl;
            }
            let di = diffused.node(i);
            for (q, g) in grads.d_w_c.values_mut().iter_mut().enumerate() {
                let pre = w_c[q] * di[q];
                *g += d_z[q] * self.activation.derivative(pre, zi[q]) * di[q];
            }
        }
        Ok(grads)
    }

    /// Plain gradient-descent update `w -= lr * g`.
    pub fn apply_update(&mut self, step: &Gradients, learning_rate: f64) {
        let pairs = [
            (self.w_c.values_mut(), step.d_w_c.values()),
            (self.w_d.values_mut(), step.d_w_d.values()),
            (&mut self.bias[..], &step.d_bias[..]),
        ];
        for (w, g) in pairs {
            for (w, g) in w.iter_mut().zip(g) {
                *w -= learning_rate * g;
            }
        }
    }
}

fn masked_labels(labels: &[Option<usize>], mask: &[bool]) -> Result<Vec<(usize, usize)>> {
    mask.iter()
        .enumerate()
        .filter(|(_, m)| **m)
        .map(|(i, _)| {
            labels[i]
                .map(|y| (i, y))
                .ok_or_else(|| Error::input(format!("masked node {i} has no label")))
        })
        .collect()
}

/// Activations, logits and probabilities of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    n_hops: usize,
    n_features: usize,
    z: Vec<f64>,
    pub logits: DenseMatrix,
    pub probs: DenseMatrix,
}

impl ForwardTrace {
    pub fn n_nodes(&self) -> usize {
        self.probs.n_rows()
    }

    /// Hidden activation `Z[node, hop, feature]`.
    pub fn z(&self, node: usize, hop: usize, feature: usize) -> f64 {
        self.node_activations(node)[hop * self.n_features + feature]
    }

    pub fn node_activations(&self, node: usize) -> &[f64] {
        let w = (self.n_hops + 1) * self.n_features;
        &self.z[node * w..(node + 1) * w]
    }

    /// Row-wise argmax; ties go to the lowest class index.
    pub fn predict(&self) -> Vec<usize> {
        (0..self.probs.n_rows())
            .map(|i| argmax(self.probs.row(i)))
            .collect()
    }

    /// Mean negative log-likelihood of the true class over masked nodes,
    /// evaluated from the logits with log-sum-exp.
    pub fn loss(&self, labels: &[Option<usize>], mask: &[bool]) -> Result<f64> {
        if labels.len() != self.n_nodes() || mask.len() != self.n_nodes() {
            return Err(Error::input("labels and mask must cover every node"));
        }
        let selected = masked_labels(labels, mask)?;
        if selected.is_empty() {
            return Err(Error::input("loss over an empty mask"));
        }
        let total: f64 = selected
            .iter()
            .map(|&(i, y)| {
                let row = self.logits.row(i);
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + row.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
                lse - row[y]
            })
            .sum();
        Ok(total / selected.len() as f64)
    }
}

/// Index of the first maximum.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = c;
        }
    }
    best
}

/// Gradient buffers shaped like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub d_w_c: DenseMatrix,
    pub d_w_d: DenseMatrix,
    pub d_bias: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &DcnnModel) -> Self {
        Self {
            d_w_c: DenseMatrix::zeros(model.w_c.n_rows(), model.w_c.n_cols()),
            d_w_d: DenseMatrix::zeros(model.w_d.n_rows(), model.w_d.n_cols()),
            d_bias: vec![0.0; model.n_classes],
        }
    }

    /// Flattened in the same order as [`DcnnModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut g = self.d_w_c.values().to_vec();
        g.extend_from_slice(self.d_w_d.values());
        g.extend_from_slice(&self.d_bias);
        g
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }

    /// `self = decay * self + other`, used for momentum.
    pub fn accumulate(&mut self, decay: f64, other: &Gradients) {
        let pairs = [
            (self.d_w_c.values_mut(), other.d_w_c.values()),
            (self.d_w_d.values_mut(), other.d_w_d.values()),
            (&mut self.d_bias[..], &other.d_bias[..]),
        ];
        for (v, g) in pairs {
            for (v, g) in v.iter_mut().zip(g) {
                *v = decay * *v + g;
            }
        }
    }
}

const CHECKPOINT_FORMAT: &str = "sdcnn-checkpoint";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(serde::Serialize, serde::Deserialize)]
struct CheckpointDoc {
    format: String,
    version: u32,
    n_hops: usize,
    n_features: usize,
    n_classes: usize,
    activation: Activation,
    threshold_mode: String,
    threshold: String,
    w_c: Vec<String>,
    w_d: Vec<String>,
    bias: Vec<String>,
}

/// A trained model together with the kernel mode it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: DcnnModel,
    pub mode: KernelMode,
}

fn hex_all(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| hexfloat::format(*v)).collect()
}

fn unhex_all(values: &[String]) -> Result<Vec<f64>> {
    values.iter().map(|s| hexfloat::parse(s)).collect()
}

impl Checkpoint {
    /// JSON document with every float in hexadecimal notation.
    pub fn to_json(&self) -> String {
        let m = &self.model;
        let doc = CheckpointDoc {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            n_hops: m.n_hops,
            n_features: m.n_features,
            n_classes: m.n_classes,
            activation: m.activation,
            threshold_mode: self.mode.name().into(),
            threshold: hexfloat::format(self.mode.threshold()),
            w_c: hex_all(m.w_c.values()),
            w_d: hex_all(m.w_d.values()),
            bias: hex_all(&m.bias),
        };
        serde_json::to_string_pretty(&doc).expect("checkpoint serialises") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CheckpointDoc =
            serde_json::from_str(text).map_err(|e| Error::input(format!("checkpoint: {e}")))?;
        if doc.format != CHECKPOINT_FORMAT || doc.version != CHECKPOINT_VERSION {
            return Err(Error::input(format!(
                "unsupported checkpoint {} v{}",
                doc.format, doc.version
            )));
        }
        let threshold = hexfloat::parse(&doc.threshold)?;
        let mode = match doc.threshold_mode.as_str() {
            "none" => KernelMode::None,
            "pre" => KernelMode::Pre(threshold),
            "post" => KernelMode::Post(threshold),
            other => return Err(Error::input(format!("unknown threshold mode {other:?}"))),
        };
        let mut model = DcnnModel::zeros(doc.n_hops, doc.n_features, doc.n_classes, doc.activation);
        let mut params = unhex_all(&doc.w_c)?;
        params.extend(unhex_all(&doc.w_d)?);
        params.extend(unhex_all(&doc.bias)?);
        model.set_parameters(&params)?;
        Ok(Self { model, mode })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diffused(n: usize, h: usize, f: usize, values: Vec<f64>) -> DiffusedFeatures {
        DiffusedFeatures::from_vec(n, h, f, values).unwrap()
    }

    #[test]
    fn zero_weights_give_softmax_of_bias() {
        let mut m = DcnnModel::zeros(1, 2, 3, Activation::Tanh);
        let d = diffused(2, 1, 2, vec![1.0, -2.0, 0.5, 3.0, 4.0, 5.0, -1.0, 0.0]);
        let t = m.forward(&d).unwrap();
        for i in 0..2 {
            for c in 0..3 {
                assert!((t.probs.get(i, c) - 1.0 / 3.0).abs() < 1e-15);
            }
            assert!(t.node_activations(i).iter().all(|z| *z == 0.0));
        }
        m.bias_mut().copy_from_slice(&[1.0, 2.0, 3.0]);
        let t = m.forward(&d).unwrap();
        let denom: f64 = [1.0f64, 2.0, 3.0].iter().map(|b| b.exp()).sum();
        assert!((t.probs.get(0, 2) - 3.0f64.exp() / denom).abs() < 1e-15);
    }

    #[test]
    fn scalar_pipeline() {
        let mut m = DcnnModel::zeros(0, 1, 2, Activation::Tanh);
        m.w_c_mut().set(0, 0, 0.5);
        let t = m.forward(&diffused(1, 0, 1, vec![1.0])).unwrap();
        assert_eq!(t.z(0, 0, 0), 0.5f64.tanh());
    }

    #[test]
    fn predictions_and_ties() {
        let t = ForwardTrace {
            n_hops: 0,
            n_features: 0,
            z: vec![],
            logits: DenseMatrix::zeros(2, 2),
            probs: DenseMatrix::from_rows(&[vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap(),
        };
        assert_eq!(t.predict(), vec![1, 0]);
    }

    #[test]
    fn uniform_loss_is_log_classes() {
        let m = DcnnModel::zeros(1, 1, 4, Activation::Tanh);
        let d = diffused(3, 1, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let t = m.forward(&d).unwrap();
        let labels = vec![Some(0), Some(3), None];
        let loss = t.loss(&labels, &[true, true, false]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-15);
        assert!(t.loss(&labels, &[false; 3]).is_err());
        assert!(t.loss(&labels, &[false, false, true]).is_err());
    }

    #[test]
    fn confident_prediction_loss_tends_to_zero() {
        let mut m = DcnnModel::zeros(0, 1, 2, Activation::Identity);
        m.bias_mut().copy_from_slice(&[40.0, 0.0]);
        let t = m.forward(&diffused(1, 0, 1, vec![0.0])).unwrap();
        assert!(t.loss(&[Some(0)], &[true]).unwrap() < 1e-15);
    }

    #[test]
    fn empty_mask_gives_zero_gradients() {
        let m = DcnnModel::init(1, 2, 2, Activation::Tanh, 3);
        let d = diffused(1, 1, 2, vec![0.3, -0.1, 0.2, 0.4]);
        let t = m.forward(&d).unwrap();
        let g = m.backward(&d, &t, &[Some(1)], &[false]).unwrap();
        assert!(g.flatten().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn scalar_gradient_closed_form() {
        // N=1, H=0, F=1, C=2: loss = lse(l) - l_y with l_c = tanh(w x) Wd_c + b_c
        let (w, x, wd, b, y) = (0.7, 1.3, [0.4, -0.9], [0.1, -0.2], 1);
        let mut m = DcnnModel::zeros(0, 1, 2, Activation::Tanh);
        m.w_c_mut().set(0, 0, w);
        m.w_d_mut().values_mut().copy_from_slice(&wd);
        m.bias_mut().copy_from_slice(&b);
        let d = diffused(1, 0, 1, vec![x]);
        let t = m.forward(&d).unwrap();
        let g = m.backward(&d, &t, &[Some(y)], &[true]).unwrap();

        let z = (w * x).tanh();
        let l = [z * wd[0] + b[0], z * wd[1] + b[1]];
        let e = [l[0].exp(), l[1].exp()];
        let p = [e[0] / (e[0] + e[1]), e[1] / (e[0] + e[1])];
        let dl = [p[0], p[1] - 1.0];
        let dz = dl[0] * wd[0] + dl[1] * wd[1];
        let dw = dz * (1.0 - z * z) * x;
        assert!((g.d_w_c.get(0, 0) - dw).abs() < 1e-15);
        assert!((g.d_w_d.get(0, 0) - z * dl[0]).abs() < 1e-15);
        assert!((g.d_bias[1] - dl[1]).abs() < 1e-15);
    }

    #[test]
    fn symmetric_inputs_cancel_wc_gradient() {
        // W_c = 0, zero bias; each class holds a +v / -v pair so the diffused
        // features sum to zero per (hop, feature) within every class
        let m = DcnnModel {
            w_d: DenseMatrix::from_rows(&[vec![0.3, -0.2], vec![0.5, 0.1]]).unwrap(),
            ..DcnnModel::zeros(1, 1, 2, Activation::Tanh)
        };
        let d = diffused(4, 1, 1, vec![0.8, -0.4, -0.8, 0.4, 0.3, 0.9, -0.3, -0.9]);
        let t = m.forward(&d).unwrap();
        let labels = [Some(0), Some(0), Some(1), Some(1)];
        let g = m.backward(&d, &t, &labels, &[true; 4]).unwrap();
        assert!(g.d_w_c.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = DcnnModel::init(1, 2, 2, Activation::Tanh, 0);
        assert!(matches!(
            m.forward(&diffused(1, 2, 2, vec![0.0; 6])),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            m.forward(&diffused(1, 1, 2, vec![f64::NAN, 0.0, 0.0, 0.0])),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = DcnnModel::init(2, 3, 4, Activation::Tanh, 11);
        assert_eq!(a, DcnnModel::init(2, 3, 4, Activation::Tanh, 11));
        assert_ne!(a, DcnnModel::init(2, 3, 4, Activation::Tanh, 12));
        let s = (6.0f64 / (9.0 + 4.0)).sqrt();
        assert!(a.w_d().values().iter().all(|v| v.abs() <= s));
        assert!(a.bias().iter().all(|b| *b == 0.0));
        assert_eq!(a.w_c().values().len(), 3 * 3);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let model = DcnnModel::init(2, 3, 2, Activation::Relu, 5);
        let ck = Checkpoint {
            model,
            mode: KernelMode::Pre(0.1),
        };
        let text = ck.to_json();
        assert!(text.contains("\"threshold_mode\": \"pre\""));
        let back = Checkpoint::from_json(&text).unwrap();
        assert_eq!(back, ck);
        let bits = |m: &DcnnModel| m.parameters().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.model), bits(&ck.model));
    }

    #[test]
    fn checkpoint_rejects_wrong_version() {
        let ck = Checkpoint {
            model: DcnnModel::zeros(0, 1, 2, Activation::Tanh),
            mode: KernelMode::None,
        };
        let text = ck.to_json().replace("\"version\": 1", "\"version\": 9");
        assert!(Checkpoint::from_json(&text).is_err());
    }
}
