use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::models::LogisticRegression;
use crate::{Error, Result};

/// How per-lag coefficients of one feature are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceAggregate {
    #[default]
    MeanAbs,
    MaxAbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub importance: f64,
    /// Majority sign of the per-lag coefficients (+1, -1, or 0 on a tie).
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub aggregate: ImportanceAggregate,
    /// Sorted by descending importance; ties keep column order.
    pub ranking: Vec<FeatureImportance>,
}

impl ImportanceReport {
    pub fn names(&self) -> Vec<&str> {
        self.ranking.iter().map(|f| f.feature.as_str()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,feature,importance,sign\n");
        for (i, f) in self.ranking.iter().enumerate() {
            writeln!(out, "{},{},{},{}", i + 1, f.feature, f.importance, f.sign).unwrap();
        }
        out
    }
}

/// Aggregates the coefficients of an LR trained on z-scored, flattened
/// histories (`k` lags of `names.len()` features, oldest lag first).
pub fn feature_importance(
    model: &LogisticRegression,
    k: usize,
    names: &[String],
    aggregate: ImportanceAggregate,
) -> Result<ImportanceReport> {
    let dims = names.len();
    let w = model.weights();
    if k == 0 || dims == 0 || w.len() != k * dims {
        return Err(Error::ShapeMismatch {
            expected: k * dims,
            actual: w.len(),
        });
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("model is untrained (all weights zero)".into()));
    }
    let mut ranking: Vec<FeatureImportance> = names
        .iter()
        .enumerate()
        .map(|(f, name)| {
            let lags: Vec<f64> = (0..k).map(|lag| w[lag * dims + f]).collect();
            let importance = match aggregate {
                ImportanceAggregate::MeanAbs => lags.iter().map(|v| v.abs()).sum::<f64>() / k as f64,
                ImportanceAggregate::MaxAbs => lags.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
            };
            let pos = lags.iter().filter(|&&v| v > 0.0).count();
            let neg = lags.iter().filter(|&&v| v < 0.0).count();
            FeatureImportance {
                feature: name.clone(),
                importance,
                sign: (pos as i64 - neg as i64).signum() as i8,
            }
        })
        .collect();
    ranking.sort_by(|a, b| b.importance.total_cmp(&a.importance));
    Ok(ImportanceReport { aggregate, ranking })
}
