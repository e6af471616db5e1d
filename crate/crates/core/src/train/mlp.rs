//! A small fully-connected softmax classifier with hand-written backprop.
//!
//! Parameters live in one flat `Vec<f64>` laid out `W₁ | b₁ | W₂ | b₂ | …`,
//! which is what the optimizers and the gradient probe operate on; matrix
//! views are borrowed from the flat buffer per layer. Hidden layers use
//! ReLU; the loss is mean cross-entropy from a max-subtracted softmax.

use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut2, Axis};
use rand::Rng;

use crate::error::{Error, Result};

/// Hidden sizes of the standard probe architecture.
pub const PROBE_HIDDEN_SIZES: [usize; 3] = [200, 100, 50];

/// Feed-forward network parameters.
#[derive(Debug, Clone)]
pub struct MlpModel {
    layer_dims: Vec<usize>,
    params: Vec<f64>,
}

/// Flat-buffer layout bookkeeping for one layer.
#[derive(Debug, Clone, Copy)]
struct LayerSpan {
    fan_in: usize,
    fan_out: usize,
    weight_start: usize,
    bias_start: usize,
}

impl MlpModel {
    /// Initializes a network with the given `[input, hidden…, output]` sizes:
    /// weights uniform in `±1/√fan_in`, biases zero.
    pub fn init<R: Rng>(layer_dims: &[usize], rng: &mut R) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::invalid("network needs at least input and output sizes"));
        }
        if layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid("layer sizes must be positive"));
        }
        let mut model = MlpModel {
            layer_dims: layer_dims.to_vec(),
            params: vec![0.0; flat_len(layer_dims)],
        };
        for l in 0..model.n_layers() {
            let span = model.span(l);
            let bound = 1.0 / (span.fan_in as f64).sqrt();
            for w in
                &mut model.params[span.weight_start..span.weight_start + span.fan_in * span.fan_out]
            {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(model)
    }

    /// The standard probe classifier: hidden sizes 200/100/50.
    pub fn init_classifier<R: Rng>(input_dim: usize, n_classes: usize, rng: &mut R) -> Result<Self> {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(&PROBE_HIDDEN_SIZES);
        dims.push(n_classes);
        Self::init(&dims, rng)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// Number of weight layers (= number of weight matrices).
    pub fn n_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Replaces the whole flat parameter vector.
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::ShapeMismatch {
                context: "model parameters",
                expected: self.params.len(),
                got: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn span(&self, l: usize) -> LayerSpan {
        let mut offset = 0;
        for k in 0..l {
            offset += self.layer_dims[k] * self.layer_dims[k + 1] + self.layer_dims[k + 1];
        }
        LayerSpan {
            fan_in: self.layer_dims[l],
            fan_out: self.layer_dims[l + 1],
            weight_start: offset,
            bias_start: offset + self.layer_dims[l] * self.layer_dims[l + 1],
        }
    }

    /// Flat index range of weight matrix `l` (biases excluded).
    pub fn weight_range(&self, l: usize) -> std::ops::Range<usize> {
        let span = self.span(l);
        span.weight_start..span.weight_start + span.fan_in * span.fan_out
    }

    fn weight_view(&self, l: usize) -> ArrayView2<'_, f64> {
        let span = self.span(l);
        ArrayView2::from_shape(
            (span.fan_in, span.fan_out),
            &self.params[span.weight_start..span.bias_start],
        )
        .expect("layout matches span")
    }

    fn bias(&self, l: usize) -> &[f64] {
        let span = self.span(l);
        &self.params[span.bias_start..span.bias_start + span.fan_out]
    }

    /// Forward pass keeping pre-activations for backprop.
    fn forward_full(&self, input: &Array2<f64>) -> Vec<Array2<f64>> {
        let n_layers = self.n_layers();
        let mut activations: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        let mut current = input.clone();
        for l in 0..n_layers {
            let mut z = current.dot(&self.weight_view(l));
            let bias = Array1::from_vec(self.bias(l).to_vec());
            z += &bias;
            if l + 1 < n_layers {
                current = z.mapv(|x| x.max(0.0));
            }
            activations.push(z);
        }
        activations
    }

    /// Mean cross-entropy and the full flat gradient for one batch.
    ///
    /// `input` is `batch × input_dim` with pixels already scaled to [0, 1];
    /// `labels` holds one class id per row.
    pub fn forward_backward(&self, input: &Array2<f64>, labels: &[u8]) -> Result<(f64, Vec<f64>)> {
        self.check_batch(input, labels)?;
        let n_layers = self.n_layers();
        let batch = input.nrows();
        let pre = self.forward_full(input);
        let (loss, mut delta) = softmax_cross_entropy(&pre[n_layers - 1], labels)?;

        let mut grads = vec![0.0; self.params.len()];
        for l in (0..n_layers).rev() {
            let upstream: Array2<f64> = if l == 0 {
                input.clone()
            } else {
                pre[l - 1].mapv(|x| x.max(0.0))
            };
            let span = self.span(l);
            {
                let mut dw = ArrayViewMut2::from_shape(
                    (span.fan_in, span.fan_out),
                    &mut grads[span.weight_start..span.bias_start],
                )
                .expect("layout matches span");
                dw.assign(&upstream.t().dot(&delta));
            }
            let db = delta.sum_axis(Axis(0));
            grads[span.bias_start..span.bias_start + span.fan_out]
                .copy_from_slice(db.as_slice().expect("contiguous"));
            if l > 0 {
                let mut back = delta.dot(&self.weight_view(l).t());
                back.zip_mut_with(&pre[l - 1], |d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = back;
            }
        }
        let _ = batch;
        Ok((loss, grads))
    }

    /// Mean cross-entropy only (no gradients).
    pub fn loss(&self, input: &Array2<f64>, labels: &[u8]) -> Result<f64> {
        self.check_batch(input, labels)?;
        let pre = self.forward_full(input);
        let (loss, _) = softmax_cross_entropy(&pre[self.n_layers() - 1], labels)?;
        Ok(loss)
    }

    /// Class predictions (argmax of the logits).
    pub fn predict(&self, input: &Array2<f64>) -> Result<Vec<usize>> {
        if input.ncols() != self.layer_dims[0] {
            return Err(Error::ShapeMismatch {
                context: "batch input dim",
                expected: self.layer_dims[0],
                got: input.ncols(),
            });
        }
        let pre = self.forward_full(input);
        let logits = &pre[self.n_layers() - 1];
        Ok(logits
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite logits"))
                    .expect("non-empty row")
                    .0
            })
            .collect())
    }

    fn check_batch(&self, input: &Array2<f64>, labels: &[u8]) -> Result<()> {
        if input.nrows() == 0 {
            return Err(Error::invalid("batch must be non-empty"));
        }
        if input.ncols() != self.layer_dims[0] {
            return Err(Error::ShapeMismatch {
                context: "batch input dim",
                expected: self.layer_dims[0],
                got: input.ncols(),
            });
        }
        if labels.len() != input.nrows() {
            return Err(Error::ShapeMismatch {
                context: "batch labels",
                expected: input.nrows(),
                got: labels.len(),
            });
        }
        let n_classes = *self.layer_dims.last().expect("validated");
        if labels.iter().any(|&c| c as usize >= n_classes) {
            return Err(Error::invalid(format!(
                "label out of range for {n_classes} classes"
            )));
        }
        Ok(())
    }
}

fn flat_len(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Current model checkpoint format version.
pub const MODEL_CHECKPOINT_VERSION: u32 = 1;

/// Serializable model snapshot. JSON round-trips `f64` values exactly.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelCheckpoint {
    pub version: u32,
    pub layer_dims: Vec<usize>,
    pub params: Vec<f64>,
}

impl MlpModel {
    pub fn checkpoint(&self) -> ModelCheckpoint {
        ModelCheckpoint {
            version: MODEL_CHECKPOINT_VERSION,
            layer_dims: self.layer_dims.clone(),
            params: self.params.clone(),
        }
    }

    pub fn from_checkpoint(c: ModelCheckpoint) -> Result<Self> {
        if c.version != MODEL_CHECKPOINT_VERSION {
            return Err(Error::InvalidConfiguration(format!(
                "unsupported model checkpoint version {} (expected {MODEL_CHECKPOINT_VERSION})",
                c.version
            )));
        }
        if c.layer_dims.len() < 2 || c.layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid("checkpoint layer sizes are invalid"));
        }
        if c.params.len() != flat_len(&c.layer_dims) {
            return Err(Error::ShapeMismatch {
                context: "model checkpoint parameters",
                expected: flat_len(&c.layer_dims),
                got: c.params.len(),
            });
        }
        Ok(MlpModel {
            layer_dims: c.layer_dims,
            params: c.params,
        })
    }
}

/// Writes a model checkpoint as pretty-printed JSON.
pub fn save_model(path: &std::path::Path, model: &MlpModel) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &model.checkpoint())
        .map_err(|e| Error::NumericFailure(format!("model serialization failed: {e}")))
}

/// Reads a model checkpoint written by [`save_model`].
pub fn load_model(path: &std::path::Path) -> Result<MlpModel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let checkpoint: ModelCheckpoint = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::invalid(format!("{}: invalid model checkpoint: {e}", path.display())))?;
    MlpModel::from_checkpoint(checkpoint)
}

/// Mean cross-entropy over the batch and the gradient w.r.t. the logits
/// (`(softmax − onehot)/batch`), computed with max subtraction.
fn softmax_cross_entropy(logits: &Array2<f64>, labels: &[u8]) -> Result<(f64, Array2<f64>)> {
    let batch = logits.nrows();
    let mut delta = logits.clone();
    let mut loss = 0.0;
    for (row_idx, mut row) in delta.rows_mut().into_iter().enumerate() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for z in row.iter_mut() {
            *z = (*z - max).exp();
            sum += *z;
        }
        let label = labels[row_idx] as usize;
        loss += -(row[label] / sum).ln();
        let inv = 1.0 / (sum * batch as f64);
        for z in row.iter_mut() {
            *z *= inv;
        }
        row[label] -= 1.0 / batch as f64;
    }
    loss /= batch as f64;
    if !loss.is_finite() {
        return Err(Error::NumericFailure(format!("non-finite loss: {loss}")));
    }
    Ok((loss, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn classifier_layer_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = MlpModel::init_classifier(784, 10, &mut rng).unwrap();
        assert_eq!(model.layer_dims(), &[784, 200, 100, 50, 10]);
        assert_eq!(
            model.n_params(),
            784 * 200 + 200 + 200 * 100 + 100 + 100 * 50 + 50 + 50 * 10 + 10
        );
        assert_eq!(model.weight_range(0), 0..784 * 200);
    }

    #[test]
    fn init_bounds_and_zero_biases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = MlpModel::init_classifier(784, 10, &mut rng).unwrap();
        let bound = 1.0 / (784f64).sqrt();
        for &w in &model.params()[model.weight_range(0)] {
            assert!(w.abs() <= bound, "first-layer weight {w} outside ±{bound}");
        }
        let span0_bias = model.weight_range(0).end..model.weight_range(0).end + 200;
        for &b in &model.params()[span0_bias] {
            assert_eq!(b, 0.0);
        }
    }

    #[test]
    fn init_deterministic_under_seed() {
        let a = MlpModel::init(&[8, 5, 3], &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = MlpModel::init(&[8, 5, 3], &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn uniform_logits_give_ln_n_classes() {
        // Zero out everything: logits collapse to the biases (all zero), so
        // the softmax is uniform and the loss is ln(n_classes).
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut model = MlpModel::init(&[4, 3, 10], &mut rng).unwrap();
        let zeros = vec![0.0; model.n_params()];
        model.set_params(&zeros).unwrap();
        let input = Array2::from_shape_vec((1, 4), vec![0.3, 0.7, 0.1, 0.0]).unwrap();
        let loss = model.loss(&input, &[4]).unwrap();
        assert_relative_eq!(loss, (10f64).ln(), max_relative = 1e-12);
        assert_relative_eq!(loss, 2.302585092994046, max_relative = 1e-12);
    }

    #[test]
    fn duplicating_the_batch_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = MlpModel::init(&[5, 4, 3], &mut rng).unwrap();
        let x: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        let single = Array2::from_shape_vec((2, 5), x.clone()).unwrap();
        let mut doubled_vec = x.clone();
        doubled_vec.extend_from_slice(&x);
        let doubled = Array2::from_shape_vec((4, 5), doubled_vec).unwrap();

        let (l1, g1) = model.forward_backward(&single, &[0, 2]).unwrap();
        let (l2, g2) = model.forward_backward(&doubled, &[0, 2, 0, 2]).unwrap();
        assert_relative_eq!(l1, l2, max_relative = 1e-12);
        for (a, b) in g1.iter().zip(&g2) {
            assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-15);
        }
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        // Gradients are checked at generic parameter points (all entries
        // random, biases included). The freshly initialized network has zero
        // biases, which can park entire ReLU pre-activation rows exactly on
        // the kink where the one-sided derivatives differ; the loss is
        // differentiable almost everywhere, so a generic point is the
        // correct place to validate backprop.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut model = MlpModel::init(&[4, 3, 3, 3, 2], &mut rng).unwrap();
        let random: Vec<f64> = (0..model.n_params())
            .map(|_| rng.random_range(-0.5..0.5))
            .collect();
        model.set_params(&random).unwrap();
        let input = Array2::from_shape_vec(
            (3, 4),
            (0..12).map(|_| rng.random_range(0.0..1.0)).collect(),
        )
        .unwrap();
        let labels = [0u8, 1, 1];
        let (_, grads) = model.forward_backward(&input, &labels).unwrap();

        let h = 1e-5;
        let mut probe = model.clone();
        for i in 0..model.n_params() {
            let mut p = model.params().to_vec();
            let orig = p[i];
            p[i] = orig + h;
            probe.set_params(&p).unwrap();
            let up = probe.loss(&input, &labels).unwrap();
            p[i] = orig - h;
            probe.set_params(&p).unwrap();
            let down = probe.loss(&input, &labels).unwrap();
            let fd = (up - down) / (2.0 * h);
            let tol = 1e-6 * fd.abs().max(1e-4);
            assert!(
                (grads[i] - fd).abs() <= tol,
                "param {i}: analytic {} vs fd {fd}",
                grads[i]
            );
        }
    }

    #[test]
    fn model_checkpoint_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let model = MlpModel::init(&[6, 4, 3], &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &model).unwrap();
        let restored = load_model(&path).unwrap();
        assert_eq!(model.params(), restored.params());
        assert_eq!(model.layer_dims(), restored.layer_dims());

        let mut bad = model.checkpoint();
        bad.version = 9;
        assert!(MlpModel::from_checkpoint(bad).is_err());
        let mut short = model.checkpoint();
        short.params.pop();
        assert!(MlpModel::from_checkpoint(short).is_err());
    }

    #[test]
    fn rejects_bad_batches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = MlpModel::init(&[4, 3, 2], &mut rng).unwrap();
        let empty = Array2::zeros((0, 4));
        assert!(model.forward_backward(&empty, &[]).is_err());
        let wrong_dim = Array2::zeros((2, 5));
        assert!(model.forward_backward(&wrong_dim, &[0, 1]).is_err());
        let ok = Array2::zeros((2, 4));
        assert!(model.forward_backward(&ok, &[0]).is_err());
        assert!(model.forward_backward(&ok, &[0, 2]).is_err());
        assert!(MlpModel::init(&[4], &mut rng).is_err());
        assert!(MlpModel::init(&[4, 0, 2], &mut rng).is_err());
    }
}
