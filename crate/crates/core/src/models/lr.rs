use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{clamp_probability, sample_bce, sigmoid, Classifier, ModelKind};
use crate::{Error, Result};

/// `sigmoid(w . x + b)` over the flattened history. The bias is the last
/// parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    params: Vec<f64>,
}

impl LogisticRegression {
    pub fn zeros(n_inputs: usize) -> Self {
        LogisticRegression {
            params: vec![0.0; n_inputs + 1],
        }
    }

    pub fn from_parts(weights: Vec<f64>, bias: f64) -> Self {
        let mut params = weights;
        params.push(bias);
        LogisticRegression { params }
    }

    /// Small random weights for tests and gradient checks.
    pub fn random(n_inputs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LogisticRegression {
            params: (0..=n_inputs).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.params.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.params[..self.n_inputs()]
    }

    pub fn bias(&self) -> f64 {
        self.params[self.n_inputs()]
    }

    fn linear(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_inputs() {
            return Err(Error::ShapeMismatch {
                expected: self.n_inputs(),
                actual: x.len(),
            });
        }
        Ok(self.weights().iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias())
    }
}

impl Classifier for LogisticRegression {
    fn kind(&self) -> ModelKind {
        ModelKind::Lr
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn predict(&self, history: &[f64]) -> Result<f64> {
        Ok(clamp_probability(sigmoid(self.linear(history)?)))
    }

    fn logit(&self, history: &[f64]) -> Result<f64> {
        self.linear(history)
    }

    fn accumulate_gradient(&self, history: &[f64], label: u8, grad: &mut [f64]) -> Result<f64> {
        let p = sigmoid(self.linear(history)?);
        let delta = p - f64::from(label);
        let n = self.n_inputs();
        for (g, x) in grad[..n].iter_mut().zip(history) {
            *g += delta * x;
        }
        grad[n] += delta;
        Ok(sample_bce(p, label))
    }

    fn layout(&self) -> Vec<(&'static str, usize, usize, usize)> {
        vec![("weights", 1, self.n_inputs(), 0), ("bias", 1, 1, self.n_inputs())]
    }
}
