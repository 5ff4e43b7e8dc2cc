use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::auc;
use crate::dataset::{
    oversample_positives, zscore_apply, zscore_fit, ConceptLabels, Dataset, NormalizationStats, PriorTransfers,
    SplitPlan, TemporalSample,
};
use crate::features::FeatureMatrix;
use crate::models::{
    predict_all, train, Checkpoint, Classifier, EpochRecord, GruModel, LogisticRegression, ModelKind, TrainConfig,
};
use crate::{Error, Result, FEATURE_NAMES};

/// Everything that shapes one train-and-evaluate run besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    /// Normalize per (lag, feature) instead of pooling lags.
    pub per_lag_normalization: bool,
    pub oversample: bool,
    /// Feed LR only the most recent year instead of the flattened history.
    pub lr_last_year_only: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            train: TrainConfig::default(),
            per_lag_normalization: false,
            oversample: true,
            lr_last_year_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: ModelKind,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_train: usize,
    pub test_cutoff: i32,
    pub train_cutoffs: Vec<i32>,
    pub history: usize,
    pub window: i32,
    pub features: Vec<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub concept: usize,
    pub cutoff: i32,
    pub probability: f64,
    pub label: u8,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub report: EvalReport,
    pub predictions: Vec<Prediction>,
    pub model: Checkpoint,
    pub epochs: Vec<EpochRecord>,
    pub normalization: NormalizationStats,
}

/// `concept,cutoff,probability,label` rows.
pub fn predictions_csv(predictions: &[Prediction], concept_names: &[String]) -> String {
    let mut out = String::from("concept,cutoff,probability,label\n");
    for p in predictions {
        writeln!(out, "{},{},{},{}", concept_names[p.concept], p.cutoff, p.probability, p.label).unwrap();
    }
    out
}

fn count_labels(samples: &[TemporalSample]) -> (usize, usize) {
    let pos = samples.iter().filter(|s| s.label == 1).count();
    (pos, samples.len() - pos)
}

fn fit_model<M: Classifier>(
    init: M,
    train_set: &[TemporalSample],
    test_set: &[TemporalSample],
    config: &TrainConfig,
) -> Result<(M, Vec<EpochRecord>, Vec<f64>)> {
    let outcome = train(init, train_set, config)?;
    let scores = predict_all(&outcome.model, test_set)?;
    Ok((outcome.model, outcome.epochs, scores))
}

/// Normalizes with training statistics, oversamples training positives,
/// trains the model and scores the test samples.
pub fn run_experiment(dataset: &Dataset, kind: ModelKind, config: &ExperimentConfig) -> Result<Experiment> {
    let owned;
    let data = if kind == ModelKind::Lr && config.lr_last_year_only {
        owned = dataset.last_year_only();
        &owned
    } else {
        dataset
    };
    let dims = data.dims();
    let (n_pos, n_neg) = count_labels(&data.test);
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass(format!("test set has {n_pos} positive and {n_neg} negative samples")));
    }
    let normalization = zscore_fit(&data.train, dims, config.per_lag_normalization)?;
    let mut train_set = zscore_apply(&normalization, &data.train, dims);
    let test_set = zscore_apply(&normalization, &data.test, dims);
    if config.oversample {
        train_set = oversample_positives(&train_set, config.train.seed)?;
    }
    let t = &config.train;
    let (model, epochs, scores) = match kind {
        ModelKind::Lr => {
            let (m, e, s) = fit_model(LogisticRegression::zeros(dims * data.plan.history), &train_set, &test_set, t)?;
            (Checkpoint::Lr(m), e, s)
        }
        ModelKind::Gru => {
            let init = GruModel::init(dims, t.hidden_size, t.seed);
            let (m, e, s) = fit_model(init, &train_set, &test_set, t)?;
            (Checkpoint::Gru(m), e, s)
        }
    };
    let labels: Vec<u8> = test_set.iter().map(|s| s.label).collect();
    let report = EvalReport {
        model: kind,
        auc: auc(&scores, &labels)?,
        n_pos,
        n_neg,
        n_train: train_set.len(),
        test_cutoff: data.plan.test_cutoff,
        train_cutoffs: data.plan.train_cutoffs.clone(),
        history: data.plan.history,
        window: data.plan.window,
        features: data.columns.iter().map(|&c| FEATURE_NAMES[c].to_string()).collect(),
        seed: t.seed,
    };
    let predictions = test_set
        .iter()
        .zip(scores)
        .map(|(s, probability)| Prediction {
            concept: s.concept,
            cutoff: s.cutoff,
            probability,
            label: s.label,
        })
        .collect();
    Ok(Experiment {
        report,
        predictions,
        model,
        epochs,
        normalization,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub seeds: Vec<u64>,
    pub aucs: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (0 for a single run).
    pub std: f64,
}

/// Runs the same experiment with seeds `seed, seed + 1, ...`.
pub fn repeat_runs(dataset: &Dataset, kind: ModelKind, config: &ExperimentConfig, repeats: usize) -> Result<RepeatSummary> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeat count must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..repeats as u64).map(|i| config.train.seed + i).collect();
    let aucs = seeds
        .iter()
        .map(|&seed| {
            let mut c = *config;
            c.train.seed = seed;
            run_experiment(dataset, kind, &c).map(|e| e.report.auc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = aucs.len() as f64;
    let mean = aucs.iter().sum::<f64>() / n;
    let std = if aucs.len() > 1 {
        (aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(RepeatSummary { seeds, aucs, mean, std })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    /// Feature indices.
    pub columns: Vec<usize>,
}

/// The five feature families plus `all`.
pub fn feature_groups() -> Vec<FeatureGroup> {
    let g = |name: &str, columns: Vec<usize>| FeatureGroup {
        name: name.to_string(),
        columns,
    };
    vec![
        g("hype", vec![0, 1]),
        g("bridge", vec![2, 3]),
        g("ideational", vec![4, 5]),
        g("sci_tech", vec![6, 7]),
        g("graph", vec![8, 9]),
        g("all", (0..FEATURE_NAMES.len()).collect()),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub model: ModelKind,
    pub group: String,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// Trains and evaluates every (model, group) pair on the same split and seed.
pub fn ablation_run(
    dataset: &Dataset,
    groups: &[FeatureGroup],
    models: &[ModelKind],
    config: &ExperimentConfig,
) -> Result<Vec<AblationCell>> {
    if let Some(g) = groups.iter().find(|g| g.columns.is_empty()) {
        return Err(Error::InvalidArgument(format!("feature group `{}` is empty", g.name)));
    }
    let cells: Vec<(ModelKind, &FeatureGroup)> = models
        .iter()
        .flat_map(|&m| groups.iter().map(move |g| (m, g)))
        .collect();
    cells
        .par_iter()
        .map(|&(model, group)| {
            let data = dataset.select_columns(&group.columns)?;
            let r = run_experiment(&data, model, config)?.report;
            Ok(AblationCell {
                model,
                group: group.name.clone(),
                auc: r.auc,
                n_pos: r.n_pos,
                n_neg: r.n_neg,
            })
        })
        .collect()
}

/// Groups as rows, models as columns.
pub fn ablation_csv(cells: &[AblationCell]) -> String {
    let mut models: Vec<ModelKind> = Vec::new();
    let mut groups: Vec<&str> = Vec::new();
    for c in cells {
        if !models.contains(&c.model) {
            models.push(c.model);
        }
        if !groups.contains(&c.group.as_str()) {
            groups.push(&c.group);
        }
    }
    let mut out = String::from("group");
    for m in &models {
        write!(out, ",{}", m.as_str()).unwrap();
    }
    out.push('\n');
    for g in groups {
        out.push_str(g);
        for m in &models {
            match cells.iter().find(|c| c.group == g && c.model == *m) {
                Some(c) => write!(out, ",{:.4}", c.auc).unwrap(),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    HistoryLength,
    WindowLength,
    CutoffYear,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::HistoryLength => "history_length",
            SweepAxis::WindowLength => "window_length",
            SweepAxis::CutoffYear => "cutoff_year",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "history_length" => Ok(SweepAxis::HistoryLength),
            "window_length" => Ok(SweepAxis::WindowLength),
            "cutoff_year" => Ok(SweepAxis::CutoffYear),
            _ => Err(Error::InvalidArgument(format!("unknown sweep axis `{s}`"))),
        }
    }
}

/// The split a sweep starts from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub test_cutoff: i32,
    pub window: i32,
    pub history: usize,
    pub n_train: usize,
    /// First year with feature data.
    pub data_start: i32,
    pub prior: PriorTransfers,
}

impl SweepBase {
    fn plan(&self) -> Result<SplitPlan> {
        SplitPlan::new(self.test_cutoff, self.window, self.history, self.n_train, self.data_start)
    }

    /// Plan for one sweep value. Window sweeps keep the base cutoffs fixed.
    pub fn plan_for(&self, axis: SweepAxis, value: i32) -> Result<SplitPlan> {
        match axis {
            SweepAxis::HistoryLength => {
                if value < 1 {
                    return Err(Error::InvalidArgument("history length must be >= 1".into()));
                }
                SweepBase {
                    history: value as usize,
                    ..*self
                }
                .plan()
            }
            SweepAxis::CutoffYear => SweepBase {
                test_cutoff: value,
                ..*self
            }
            .plan(),
            SweepAxis::WindowLength => {
                if value < 1 {
                    return Err(Error::InvalidArgument("window length must be >= 1".into()));
                }
                let plan = SplitPlan {
                    window: value,
                    ..self.plan()?
                };
                if !plan.is_leakage_free() {
                    return Err(Error::InvalidArgument(format!(
                        "window {value} makes training intervals reach the test cutoff"
                    )));
                }
                Ok(plan)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub axis: SweepAxis,
    pub value: i32,
    pub auc: Option<f64>,
    pub n_pos: usize,
    pub n_neg: usize,
    /// Reason the point could not be evaluated.
    pub failure: Option<String>,
}

/// One evaluation per axis value with shared seeds. Invalid values are
/// recorded as failed points instead of aborting the sweep.
pub fn sensitivity_run(
    features: &FeatureMatrix,
    labels: &ConceptLabels,
    base: &SweepBase,
    axis: SweepAxis,
    values: &[i32],
    model: ModelKind,
    config: &ExperimentConfig,
) -> Vec<SensitivityPoint> {
    values
        .par_iter()
        .map(|&value| {
            let result = base
                .plan_for(axis, value)
                .and_then(|plan| Dataset::build(features, labels, &plan, base.prior))
                .and_then(|data| run_experiment(&data, model, config));
            match result {
                Ok(e) => SensitivityPoint {
                    axis,
                    value,
                    auc: Some(e.report.auc),
                    n_pos: e.report.n_pos,
                    n_neg: e.report.n_neg,
                    failure: None,
                },
                Err(err) => SensitivityPoint {
                    axis,
                    value,
                    auc: None,
                    n_pos: 0,
                    n_neg: 0,
                    failure: Some(err.to_string()),
                },
            }
        })
        .collect()
}

/// `axis_value,auc,n_pos,n_neg,status`; failed points leave `auc` empty.
pub fn sensitivity_csv(points: &[SensitivityPoint]) -> String {
    let mut out = String::from("axis_value,auc,n_pos,n_neg,status\n");
    for p in points {
        let auc = p.auc.map(|a| format!("{a:.6}")).unwrap_or_default();
        let status = match &p.failure {
            None => "ok".to_string(),
            Some(reason) => format!("failed: {}", reason.replace([',', '\n'], ";")),
        };
        writeln!(out, "{},{auc},{},{},{status}", p.value, p.n_pos, p.n_neg).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FieldOutcome {
    Evaluated(EvalReport),
    NotEvaluable { reason: String },
}

/// Splits the dataset by concept field and trains/evaluates each part on its
/// own. Concepts without a field are left out.
pub fn per_field_eval(
    dataset: &Dataset,
    fields: &[Option<String>],
    model: ModelKind,
    config: &ExperimentConfig,
) -> BTreeMap<String, FieldOutcome> {
    let names: BTreeSet<&String> = fields.iter().flatten().collect();
    names
        .into_par_iter()
        .map(|field| {
            let keep = |s: &&TemporalSample| fields.get(s.concept).and_then(|f| f.as_ref()) == Some(field);
            let part = Dataset {
                plan: dataset.plan.clone(),
                columns: dataset.columns.clone(),
                train: dataset.train.iter().filter(keep).cloned().collect(),
                test: dataset.test.iter().filter(keep).cloned().collect(),
            };
            let outcome = match run_experiment(&part, model, config) {
                Ok(e) => FieldOutcome::Evaluated(e.report),
                Err(err) => FieldOutcome::NotEvaluable { reason: err.to_string() },
            };
            (field.clone(), outcome)
        })
        .collect()
}

/// `field,auc,n_pos,n_neg,status`.
pub fn per_field_csv(results: &BTreeMap<String, FieldOutcome>) -> String {
    let mut out = String::from("field,auc,n_pos,n_neg,status\n");
    for (field, outcome) in results {
        match outcome {
            FieldOutcome::Evaluated(r) => writeln!(out, "{field},{:.6},{},{},ok", r.auc, r.n_pos, r.n_neg).unwrap(),
            FieldOutcome::NotEvaluable { reason } => {
                writeln!(out, "{field},,,,not_evaluable: {}", reason.replace([',', '\n'], ";")).unwrap()
            }
        }
    }
    out
}
