use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{softmax, Dataset, ModelError, Standardizer};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub epochs: usize,
    /// Initial step size; step `t` uses `learning_rate / sqrt(t)`.
    pub learning_rate: f64,
    /// L2 regularization strength.
    pub lambda: f64,
    pub seed: u64,
    /// Weight each example by `N / (K * count(class))`.
    pub balanced: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            epochs: 50,
            learning_rate: 0.01,
            lambda: 1e-4,
            seed: 0,
            balanced: true,
        }
    }
}

/// Hinge-loss linear classifier over standardized features.
///
/// A binary model holds one weight vector scoring `classes[1]` against
/// `classes[0]`; with more classes there is one one-vs-rest vector per class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub classes: Vec<String>,
    pub fingerprint: String,
    pub standardizer: Standardizer,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearModel {
    /// `w . standardize(x) + b` per weight vector. A binary model returns the
    /// single signed margin of its positive class.
    pub fn decision_value(&self, x: &[f64]) -> Vec<f64> {
        let z = self.standardizer.apply(x);
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| w.iter().zip(&z).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    /// Softmax over the class margins (`[-m, m]` for a binary model).
    pub fn confidences(&self, x: &[f64]) -> Vec<f64> {
        let margins = self.decision_value(x);
        if self.classes.len() == 2 && margins.len() == 1 {
            softmax(&[-margins[0], margins[0]])
        } else {
            softmax(&margins)
        }
    }

    pub fn is_binary(&self) -> bool {
        self.weights.len() == 1
    }
}

pub fn train_linear_svm(data: &Dataset, cfg: &SvmConfig) -> Result<LinearModel, ModelError> {
    data.check_trainable()?;
    let standardizer = Standardizer::fit(data);
    let width = data.width();
    let mut z = vec![0.0; data.len() * width];
    for i in 0..data.len() {
        standardizer.apply_into(data.row(i), &mut z[i * width..(i + 1) * width]);
    }
    let class_weight = data.class_weights(cfg.balanced);
    let k = data.classes().len();

    // One binary problem per vector: positive class 1 when binary, class c
    // against the rest otherwise.
    let targets: Vec<usize> = if k == 2 { vec![1] } else { (0..k).collect() };
    let mut weights = Vec::with_capacity(targets.len());
    let mut bias = Vec::with_capacity(targets.len());
    for (slot, &positive) in targets.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(slot as u64));
        let (w, b) = sgd_hinge(
            &z,
            width,
            data.labels(),
            positive,
            &class_weight,
            cfg,
            &mut rng,
        );
        weights.push(w);
        bias.push(b);
    }
    Ok(LinearModel {
        classes: data.classes().to_vec(),
        fingerprint: String::new(),
        standardizer,
        weights,
        bias,
    })
}

fn sgd_hinge(
    z: &[f64],
    width: usize,
    labels: &[usize],
    positive: usize,
    class_weight: &[f64],
    cfg: &SvmConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let mut w = vec![0.0; width];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let lr = cfg.learning_rate / (t as f64).sqrt();
            let x = &z[i * width..(i + 1) * width];
            let y = if labels[i] == positive { 1.0 } else { -1.0 };
            let margin = y * (w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b);
            let shrink = 1.0 - lr * cfg.lambda;
            w.iter_mut().for_each(|w| *w *= shrink);
            if margin < 1.0 {
                let step = lr * class_weight[labels[i]] * y;
                for (w, x) in w.iter_mut().zip(x) {
                    *w += step * x;
                }
                b += step;
            }
        }
    }
    (w, b)
}
