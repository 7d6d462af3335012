use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{softmax, Dataset, ModelError, Standardizer};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, h: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Relu => h.mapv(|v| v.max(0.0)),
            Activation::Tanh => h.mapv(f64::tanh),
        }
    }

    /// Derivative given the pre-activation `h` and activation `a`.
    fn derivative(self, h: &Array2<f64>, a: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Relu => h.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 }),
            Activation::Tanh => a.mapv(|v| 1.0 - v * v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Weight the cross-entropy by inverse class frequency.
    pub balanced: bool,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![200, 200, 200],
            activation: Activation::Relu,
            epochs: 200,
            learning_rate: 0.01,
            batch_size: 32,
            seed: 0,
            balanced: false,
        }
    }
}

/// Fully connected layer; `weights` is `inputs x outputs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Per-layer `(d weights, d bias)`, aligned with [`MlpModel::layers`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub classes: Vec<String>,
    pub fingerprint: String,
    pub standardizer: Standardizer,
    pub activation: Activation,
    pub layers: Vec<DenseLayer>,
}

impl MlpModel {
    /// Xavier-uniform weights, zero biases.
    pub fn init(
        inputs: usize,
        hidden: &[usize],
        classes: Vec<String>,
        activation: Activation,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(classes.len());
        let layers = sizes
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                DenseLayer {
                    weights: Array2::from_shape_fn((w[0], w[1]), |_| {
                        rng.random_range(-limit..limit)
                    }),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        MlpModel {
            classes,
            fingerprint: String::new(),
            standardizer: Standardizer::identity(inputs),
            activation,
            layers,
        }
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.bias.len())
            .collect()
    }

    /// Output logits for a batch of already-standardized rows.
    pub fn logits(&self, z: ArrayView2<f64>) -> Array2<f64> {
        let mut a = z.to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let h = a.dot(&layer.weights) + &layer.bias;
            a = if i == last {
                h
            } else {
                self.activation.apply(&h)
            };
        }
        a
    }

    /// Class probabilities for one raw feature vector.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let z =
            Array2::from_shape_vec((1, x.len()), self.standardizer.apply(x)).expect("row shape");
        let logits = self.logits(z.view());
        softmax(logits.row(0).as_slice().expect("contiguous"))
    }

    /// Weighted mean cross-entropy and its gradient on standardized rows.
    pub fn loss_and_gradients(
        &self,
        z: ArrayView2<f64>,
        labels: &[usize],
        sample_weights: &[f64],
    ) -> (f64, Gradients) {
        let batch = z.nrows();
        let last = self.layers.len() - 1;

        let mut pre = Vec::with_capacity(self.layers.len());
        let mut acts = vec![z.to_owned()];
        for (i, layer) in self.layers.iter().enumerate() {
            let h = acts[i].dot(&layer.weights) + &layer.bias;
            if i < last {
                acts.push(self.activation.apply(&h));
            }
            pre.push(h);
        }

        let logits = &pre[last];
        let mut delta = Array2::zeros(logits.raw_dim());
        let mut loss = 0.0;
        for r in 0..batch {
            let p = softmax(logits.row(r).as_slice().expect("contiguous"));
            let w = sample_weights[r] / batch as f64;
            loss -= w * p[labels[r]].max(1e-300).ln();
            for (c, pc) in p.iter().enumerate() {
                let target = if c == labels[r] { 1.0 } else { 0.0 };
                delta[[r, c]] = w * (pc - target);
            }
        }

        let mut grads = vec![(Array2::zeros((0, 0)), Array1::zeros(0)); self.layers.len()];
        for i in (0..self.layers.len()).rev() {
            let dw = acts[i].t().dot(&delta);
            let db = delta.sum_axis(Axis(0));
            if i > 0 {
                let back = delta.dot(&self.layers[i].weights.t());
                delta = back * self.activation.derivative(&pre[i - 1], &acts[i]);
            }
            grads[i] = (dw, db);
        }
        (loss, Gradients { layers: grads })
    }

    fn step(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (dw, db)) in self.layers.iter_mut().zip(&grads.layers) {
            layer.weights.scaled_add(-lr, dw);
            layer.bias.scaled_add(-lr, db);
        }
    }
}

/// Trains a softmax MLP by seeded mini-batch SGD.
///
/// Returns the model and the mean training loss of every epoch.
pub fn train_mlp_with_history(
    data: &Dataset,
    cfg: &MlpConfig,
) -> Result<(MlpModel, Vec<f64>), ModelError> {
    data.check_trainable()?;
    let standardizer = Standardizer::fit(data);
    let width = data.width();
    let mut z = Array2::zeros((data.len(), width));
    for i in 0..data.len() {
        let row = standardizer.apply(data.row(i));
        z.row_mut(i).assign(&Array1::from(row));
    }
    let class_weight = data.class_weights(cfg.balanced);
    let weights: Vec<f64> = data.labels().iter().map(|&l| class_weight[l]).collect();

    let mut model = MlpModel::init(
        width,
        &cfg.hidden,
        data.classes().to_vec(),
        cfg.activation,
        cfg.seed,
    );
    model.standardizer = standardizer;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let batch_size = cfg.batch_size.max(1);
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch_size) {
            let zb = z.select(Axis(0), chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| data.label(i)).collect();
            let w: Vec<f64> = chunk.iter().map(|&i| weights[i]).collect();
            let (loss, grads) = model.loss_and_gradients(zb.view(), &labels, &w);
            if !loss.is_finite() {
                return Err(ModelError::NonFinite("training loss"));
            }
            epoch_loss += loss * chunk.len() as f64;
            model.step(&grads, cfg.learning_rate);
        }
        history.push(epoch_loss / data.len() as f64);
    }
    Ok((model, history))
}

pub fn train_mlp(data: &Dataset, cfg: &MlpConfig) -> Result<MlpModel, ModelError> {
    train_mlp_with_history(data, cfg).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::Model;

    fn xor(points: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = Dataset::new(2, ["a", "b"]);
        let centers = [
            (1.0, 1.0, 0),
            (-1.0, -1.0, 0),
            (1.0, -1.0, 1),
            (-1.0, 1.0, 1),
        ];
        for i in 0..points {
            let (cx, cy, label) = centers[i % 4];
            let x = [
                cx + rng.random_range(-0.4..0.4),
                cy + rng.random_range(-0.4..0.4),
            ];
            d.push(&x, label).unwrap();
        }
        d
    }

    #[test]
    fn learns_xor() {
        let d = xor(400, 1);
        let m = Model::Mlp(train_mlp(&d, &MlpConfig::default()).unwrap());
        let correct = (0..d.len())
            .filter(|&i| m.predict(d.row(i)) == d.label(i))
            .count();
        assert!(correct as f64 / d.len() as f64 >= 0.95, "{correct}");
    }

    #[test]
    fn zero_network_is_uniform() {
        for k in [2usize, 3] {
            let classes = (0..k).map(|i| i.to_string()).collect();
            let mut m = MlpModel::init(3, &[4, 4], classes, Activation::Relu, 0);
            for l in &mut m.layers {
                l.weights.fill(0.0);
            }
            let p = m.predict_proba(&[1.0, -2.0, 3.0]);
            for v in &p {
                assert!((v - 1.0 / k as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn probabilities_are_a_distribution() {
        let m = MlpModel::init(
            4,
            &[8, 8, 8],
            vec!["a".into(), "b".into(), "c".into()],
            Activation::Relu,
            3,
        );
        for x in [[0.0, 0.0, 0.0, 0.0], [5.0, -3.0, 2.0, 100.0]] {
            let p = m.predict_proba(&x);
            assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn default_shape() {
        let m = MlpModel::init(
            10,
            &MlpConfig::default().hidden,
            vec!["n".into(), "s".into()],
            Activation::Relu,
            0,
        );
        assert_eq!(m.hidden_widths(), vec![200, 200, 200]);
        assert_eq!(m.layers[0].weights.dim(), (10, 200));
        assert_eq!(m.layers[3].weights.dim(), (200, 2));
    }

    #[test]
    fn deterministic_loss_trajectory() {
        let d = xor(64, 2);
        let cfg = MlpConfig {
            hidden: vec![16, 16],
            epochs: 5,
            ..Default::default()
        };
        let (a, ha) = train_mlp_with_history(&d, &cfg).unwrap();
        let (b, hb) = train_mlp_with_history(&d, &cfg).unwrap();
        assert_eq!(ha, hb);
        assert_eq!(a, b);
    }

    /// Central differences against the backpropagated gradient.
    #[test]
    fn gradient_matches_finite_differences() {
        for activation in [Activation::Relu, Activation::Tanh] {
            let m = MlpModel::init(
                5,
                &[7, 6, 4],
                (0..3).map(|i| i.to_string()).collect(),
                activation,
                17,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let z = Array2::from_shape_fn((6, 5), |_| rng.random_range(-1.5..1.5));
            let labels = [0, 1, 2, 1, 0, 2];
            let weights = [1.0, 2.0, 0.5, 1.0, 1.5, 1.0];
            let (_, grads) = m.loss_and_gradients(z.view(), &labels, &weights);
            let eps = 1e-6;
            let mut checked = 0;
            for layer in 0..m.layers.len() {
                for _ in 0..5 {
                    let (r, c) = (
                        rng.random_range(0..m.layers[layer].weights.nrows()),
                        rng.random_range(0..m.layers[layer].weights.ncols()),
                    );
                    let mut plus = m.clone();
                    plus.layers[layer].weights[[r, c]] += eps;
                    let mut minus = m.clone();
                    minus.layers[layer].weights[[r, c]] -= eps;
                    let numeric = (plus.loss_and_gradients(z.view(), &labels, &weights).0
                        - minus.loss_and_gradients(z.view(), &labels, &weights).0)
                        / (2.0 * eps);
                    let analytic = grads.layers[layer].0[[r, c]];
                    let rel =
                        (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
                    assert!(
                        rel < 1e-4,
                        "{activation:?} layer {layer} ({r},{c}): {analytic} vs {numeric}"
                    );
                    checked += 1;
                }
            }
            assert_eq!(checked, 20);
        }
    }
}
