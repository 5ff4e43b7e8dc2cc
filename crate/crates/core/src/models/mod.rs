//! Logistic regression and a GRU sequence classifier, trained from scratch
//! on binary cross-entropy.
//!
//! Both models keep their parameters in one flat vector so the optimizers,
//! the finite-difference gradient check and the checkpoint format treat
//! them uniformly.

mod checkpoint;
mod gru;
mod lr;
mod optim;
mod train;

use serde::{Deserialize, Serialize};

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use gru::GruModel;
pub use lr::LogisticRegression;
pub use optim::{Adam, GradientDescent, Optimizer};
pub use train::{grad_check, predict_all, train, EpochRecord, TrainOutcome};

use crate::{Error, Result};

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]`.
pub const PROB_EPS: f64 = 1e-12;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `-sum(y ln p + (1 - y) ln(1 - p))` with clamped probabilities.
pub fn bce_loss(probabilities: &[f64], labels: &[u8]) -> Result<f64> {
    if probabilities.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            expected: probabilities.len(),
            actual: labels.len(),
        });
    }
    Ok(probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| sample_bce(p, y))
        .sum())
}

pub(crate) fn sample_bce(p: f64, y: u8) -> f64 {
    let p = clamp_probability(p);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lr,
    Gru,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Gru => "gru",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub optimizer: OptimizerKind,
    /// Fraction of training concepts held out for early stopping; 0 disables it.
    pub validation_fraction: f64,
    pub hidden_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 50,
            batch_size: 256,
            seed: 42,
            patience: 5,
            optimizer: OptimizerKind::Adam,
            validation_fraction: 0.1,
            hidden_size: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument("learning rate must be > 0".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("epochs and batch size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::InvalidArgument("validation fraction must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// BCE computed from the logit, accurate when `p` is close to 0 or 1.
pub(crate) fn logit_bce(z: f64, y: u8) -> f64 {
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    softplus - f64::from(y) * z
}

/// A binary classifier over flattened `k x dims` histories.
pub trait Classifier: Clone + Send + Sync {
    fn kind(&self) -> ModelKind;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    /// Clamped probability of the positive class.
    fn predict(&self, history: &[f64]) -> Result<f64>;

    /// Pre-sigmoid score.
    fn logit(&self, history: &[f64]) -> Result<f64>;

    /// Adds the gradient of the sample's BCE to `grad` and returns the loss.
    fn accumulate_gradient(&self, history: &[f64], label: u8, grad: &mut [f64]) -> Result<f64>;

    /// Named parameter blocks as (name, rows, cols, offset).
    fn layout(&self) -> Vec<(&'static str, usize, usize, usize)>;
}
