use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::optim::make_optimizer;
use super::{logit_bce, sample_bce, Classifier, TrainConfig};
use crate::dataset::TemporalSample;
use crate::eval::auc;
use crate::{Error, Result};

/// Samples per gradient chunk. Chunk sums are added in a fixed order, so the
/// result does not depend on the number of worker threads.
const GRAD_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean BCE over the fitting samples after the epoch.
    pub train_loss: f64,
    pub validation_auc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    pub model: M,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (1-based; 0 means the initial model).
    pub best_epoch: usize,
    pub n_fit: usize,
    pub n_validation: usize,
}

pub fn predict_all<M: Classifier>(model: &M, samples: &[TemporalSample]) -> Result<Vec<f64>> {
    samples.par_iter().map(|s| model.predict(&s.history)).collect()
}

fn mean_loss<M: Classifier>(model: &M, samples: &[&TemporalSample]) -> Result<f64> {
    let total: f64 = samples
        .par_iter()
        .map(|s| model.predict(&s.history).map(|p| sample_bce(p, s.label)))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    Ok(total / samples.len() as f64)
}

/// Mean gradient of the BCE over `batch`.
fn batch_gradient<M: Classifier>(model: &M, batch: &[&TemporalSample]) -> Result<Vec<f64>> {
    let n = model.params().len();
    let partials = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut g = vec![0.0; n];
            for s in chunk {
                model.accumulate_gradient(&s.history, s.label, &mut g)?;
            }
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grad = vec![0.0; n];
    for g in partials {
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(grad)
}

fn has_both_classes(samples: &[&TemporalSample]) -> bool {
    samples.iter().any(|s| s.label == 1) && samples.iter().any(|s| s.label == 0)
}

/// Holds out a seeded fraction of concepts. All samples of a held-out concept
/// (every cutoff, every oversampled copy) go to validation.
fn split_by_concept(
    samples: &[TemporalSample],
    fraction: f64,
    seed: u64,
) -> (Vec<&TemporalSample>, Vec<&TemporalSample>) {
    let all: Vec<&TemporalSample> = samples.iter().collect();
    if fraction <= 0.0 {
        return (all, Vec::new());
    }
    let mut concepts: Vec<usize> = samples
        .iter()
        .map(|s| s.concept)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e_ed0f_0a11);
    concepts.shuffle(&mut rng);
    let n_val = ((concepts.len() as f64) * fraction).round() as usize;
    let held: BTreeSet<usize> = concepts.into_iter().take(n_val).collect();
    let (val, fit): (Vec<_>, Vec<_>) = all.into_iter().partition(|s| held.contains(&s.concept));
    if !has_both_classes(&val) || !has_both_classes(&fit) {
        return (samples.iter().collect(), Vec::new());
    }
    (fit, val)
}

/// Mini-batch training on BCE with seeded shuffling. When a validation slice
/// with both classes can be held out, training stops after `patience` epochs
/// without an AUC improvement and the best parameters are returned.
pub fn train<M: Classifier>(init: M, samples: &[TemporalSample], config: &TrainConfig) -> Result<TrainOutcome<M>> {
    config.validate()?;
    let all: Vec<&TemporalSample> = samples.iter().collect();
    if !has_both_classes(&all) {
        return Err(Error::SingleClass("training samples".into()));
    }
    let (fit, val) = split_by_concept(samples, config.validation_fraction, config.seed);
    let val_labels: Vec<u8> = val.iter().map(|s| s.label).collect();

    let mut model = init;
    let mut optimizer = make_optimizer(config.optimizer, config.learning_rate, model.params().len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..fit.len()).collect();
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, M)> = None;
    let mut stale = 0;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&TemporalSample> = chunk.iter().map(|&i| fit[i]).collect();
            let grad = batch_gradient(&model, &batch)?;
            optimizer.step(model.params_mut(), &grad);
        }
        if model.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Degenerate(format!("non-finite parameters after epoch {epoch}")));
        }
        let train_loss = mean_loss(&model, &fit)?;
        let validation_auc = if val.is_empty() {
            None
        } else {
            let scores = val
                .par_iter()
                .map(|s| model.predict(&s.history))
                .collect::<Result<Vec<f64>>>()?;
            Some(auc(&scores, &val_labels)?)
        };
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            validation_auc,
        });
        if let Some(a) = validation_auc {
            if best.as_ref().is_none_or(|(b, _, _)| a > *b) {
                best = Some((a, epoch, model.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.patience {
                    break;
                }
            }
        }
    }

    let (model, best_epoch) = match best {
        Some((_, e, m)) => (m, e),
        None => (model, epochs.len()),
    };
    Ok(TrainOutcome {
        model,
        epochs,
        best_epoch,
        n_fit: fit.len(),
        n_validation: val.len(),
    })
}

/// Largest relative error between the analytic gradient and central
/// differences, `|ga - gn| / max(1e-8, |ga| + |gn|)`, over every parameter.
/// The loss is evaluated from the logit. Steps around 1e-3 keep rounding
/// noise below the 1e-8 floor; smaller steps flag tiny but correct components.
pub fn grad_check<M: Classifier>(model: &M, history: &[f64], label: u8, epsilon: f64) -> Result<f64> {
    let mut analytic = vec![0.0; model.params().len()];
    let loss = model.accumulate_gradient(history, label, &mut analytic)?;
    if !loss.is_finite() {
        return Err(Error::Degenerate("non-finite loss".into()));
    }
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for i in 0..analytic.len() {
        let orig = probe.params()[i];
        let mut loss_at = |delta: f64| -> Result<f64> {
            probe.params_mut()[i] = orig + delta;
            let l = logit_bce(probe.logit(history)?, label);
            if !l.is_finite() {
                return Err(Error::Degenerate("non-finite loss".into()));
            }
            Ok(l)
        };
        // five-point stencil: the epsilon^2 error term cancels
        let numeric = (8.0 * (loss_at(epsilon)? - loss_at(-epsilon)?) - (loss_at(2.0 * epsilon)? - loss_at(-2.0 * epsilon)?))
            / (12.0 * epsilon);
        probe.params_mut()[i] = orig;
        let ga = analytic[i];
        let rel = (ga - numeric).abs() / (ga.abs() + numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}
