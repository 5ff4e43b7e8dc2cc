//! Leakage-safe temporal samples: cutoff years, histories, labels,
//! normalization and positive oversampling.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::registry::prediction_label;
use crate::{Error, Result, FEATURE_NAMES, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Test,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Test => "test",
        }
    }
}

/// What to do with concepts that transferred before a training cutoff.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorTransfers {
    /// Keep them; their label at that cutoff is 0.
    #[default]
    Keep,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalSample {
    /// Index into the feature matrix's concept list.
    pub concept: usize,
    pub cutoff: i32,
    /// `k` rows of `dims` values, oldest year first.
    pub history: Vec<f64>,
    pub label: u8,
    pub role: Role,
}

impl TemporalSample {
    pub fn step(&self, dims: usize, lag: usize) -> &[f64] {
        &self.history[lag * dims..(lag + 1) * dims]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub test_cutoff: i32,
    pub train_cutoffs: Vec<i32>,
    pub window: i32,
    pub history: usize,
}

impl SplitPlan {
    /// Plan with the `n_train` latest training cutoffs whose prediction
    /// intervals end before the test cutoff.
    pub fn new(
        test_cutoff: i32,
        window: i32,
        history: usize,
        n_train: usize,
        data_start: i32,
    ) -> Result<SplitPlan> {
        let earliest = data_start + history as i32;
        Ok(SplitPlan {
            test_cutoff,
            train_cutoffs: train_cutoffs(test_cutoff, window, n_train, earliest)?,
            window,
            history,
        })
    }

    /// True when no training prediction interval reaches the test cutoff.
    pub fn is_leakage_free(&self) -> bool {
        self.train_cutoffs
            .iter()
            .all(|&t| t + self.window - 1 < self.test_cutoff)
    }
}

/// The `count` latest cutoffs `t` with `t + window - 1 < test_cutoff`,
/// ascending: `{test - window - count + 1, ..., test - window}`.
pub fn train_cutoffs(test_cutoff: i32, window: i32, count: usize, earliest: i32) -> Result<Vec<i32>> {
    if window < 1 || count < 1 {
        return Err(Error::InvalidArgument("window and count must be >= 1".into()));
    }
    let first = test_cutoff - window - count as i32 + 1;
    if first < earliest {
        return Err(Error::InsufficientHistory(format!(
            "first train cutoff {first} precedes earliest usable cutoff {earliest}"
        )));
    }
    Ok((first..=test_cutoff - window).collect())
}

/// Emergence and transfer year per concept, aligned with a feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptLabels {
    pub emergence: Vec<i32>,
    pub transfer: Vec<Option<i32>>,
}

/// Samples for one cutoff. Eligible concepts emerged by `cutoff - 1`; test
/// samples also exclude concepts transferred before the cutoff.
#[allow(clippy::too_many_arguments)]
pub fn make_samples(
    features: &FeatureMatrix,
    labels: &ConceptLabels,
    cutoff: i32,
    history: usize,
    window: i32,
    role: Role,
    prior: PriorTransfers,
) -> Result<Vec<TemporalSample>> {
    if history == 0 || window <= 0 {
        return Err(Error::InvalidArgument("history and window must be >= 1".into()));
    }
    if labels.emergence.len() != features.concepts.len() || labels.transfer.len() != features.concepts.len() {
        return Err(Error::ShapeMismatch {
            expected: features.concepts.len(),
            actual: labels.emergence.len(),
        });
    }
    let first_year = cutoff - history as i32;
    if first_year < features.start_year || cutoff - 1 > features.end_year {
        return Err(Error::InsufficientHistory(format!(
            "history {first_year}..{cutoff} outside features {}..={}",
            features.start_year, features.end_year
        )));
    }
    let mut out = Vec::new();
    for c in 0..features.concepts.len() {
        if labels.emergence[c] > cutoff - 1 {
            continue;
        }
        let already = labels.transfer[c].is_some_and(|ty| ty < cutoff);
        if already && (role == Role::Test || prior == PriorTransfers::Drop) {
            continue;
        }
        let mut hist = Vec::with_capacity(history * N_FEATURES);
        for year in first_year..cutoff {
            hist.extend_from_slice(&features.row(c, year));
        }
        out.push(TemporalSample {
            concept: c,
            cutoff,
            history: hist,
            label: prediction_label(labels.transfer[c], cutoff, window),
            role,
        });
    }
    Ok(out)
}

/// Train and test samples for a plan, with the feature columns in use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub plan: SplitPlan,
    pub columns: Vec<usize>,
    pub train: Vec<TemporalSample>,
    pub test: Vec<TemporalSample>,
}

impl Dataset {
    pub fn build(
        features: &FeatureMatrix,
        labels: &ConceptLabels,
        plan: &SplitPlan,
        prior: PriorTransfers,
    ) -> Result<Dataset> {
        if !plan.is_leakage_free() {
            return Err(Error::InvalidArgument("training intervals overlap the test interval".into()));
        }
        let mut train = Vec::new();
        for &t in &plan.train_cutoffs {
            train.extend(make_samples(features, labels, t, plan.history, plan.window, Role::Train, prior)?);
        }
        let test = make_samples(
            features,
            labels,
            plan.test_cutoff,
            plan.history,
            plan.window,
            Role::Test,
            prior,
        )?;
        Ok(Dataset {
            plan: plan.clone(),
            columns: (0..N_FEATURES).collect(),
            train,
            test,
        })
    }

    pub fn dims(&self) -> usize {
        self.columns.len()
    }

    /// Projects every history onto a subset of the current columns, given as
    /// original feature indices.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Dataset> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument("empty feature group".into()));
        }
        let positions: Vec<usize> = columns
            .iter()
            .map(|c| {
                self.columns
                    .iter()
                    .position(|x| x == c)
                    .ok_or_else(|| Error::InvalidArgument(format!("column {c} not in dataset")))
            })
            .collect::<Result<_>>()?;
        let dims = self.dims();
        let project = |s: &TemporalSample| {
            let k = s.history.len() / dims;
            let mut h = Vec::with_capacity(k * positions.len());
            for lag in 0..k {
                let step = s.step(dims, lag);
                h.extend(positions.iter().map(|&p| step[p]));
            }
            TemporalSample {
                history: h,
                ..s.clone()
            }
        };
        Ok(Dataset {
            plan: self.plan.clone(),
            columns: columns.to_vec(),
            train: self.train.iter().map(project).collect(),
            test: self.test.iter().map(project).collect(),
        })
    }

    /// Only the most recent year of history.
    pub fn last_year_only(&self) -> Dataset {
        let dims = self.dims();
        let keep_last = |s: &TemporalSample| {
            let k = s.history.len() / dims;
            TemporalSample {
                history: s.step(dims, k - 1).to_vec(),
                ..s.clone()
            }
        };
        Dataset {
            plan: SplitPlan {
                history: 1,
                ..self.plan.clone()
            },
            columns: self.columns.clone(),
            train: self.train.iter().map(keep_last).collect(),
            test: self.test.iter().map(keep_last).collect(),
        }
    }

    /// `concept,cutoff,role,label` then `k * dims` values named
    /// `lag<i>_<feature>`, oldest lag first.
    pub fn to_csv(&self, concept_names: &[String]) -> String {
        let k = self.plan.history;
        let mut out = String::from("concept,cutoff,role,label");
        for lag in 0..k {
            for &c in &self.columns {
                write!(out, ",lag{lag}_{}", FEATURE_NAMES[c]).unwrap();
            }
        }
        out.push('\n');
        for s in self.train.iter().chain(&self.test) {
            write!(out, "{},{},{},{}", concept_names[s.concept], s.cutoff, s.role.as_str(), s.label).unwrap();
            for v in &s.history {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Stats per (lag, dimension) instead of pooled over lags.
    pub per_lag: bool,
}

impl NormalizationStats {
    pub fn is_constant(&self, i: usize) -> bool {
        self.std[i] <= 1e-12
    }

    /// `dimension,mean,std` rows.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut out = String::from("dimension,mean,std\n");
        for (i, (m, s)) in self.mean.iter().zip(&self.std).enumerate() {
            writeln!(out, "{},{m},{s}", names[i % names.len()]).unwrap();
        }
        out
    }
}

/// Population mean and standard deviation per dimension over all history
/// rows of the training samples (per lag and dimension when `per_lag`).
pub fn zscore_fit(train: &[TemporalSample], dims: usize, per_lag: bool) -> Result<NormalizationStats> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let width = if per_lag { train[0].history.len() } else { dims };
    let mut sum = vec![0.0; width];
    let mut count = vec![0usize; width];
    for s in train {
        for (i, v) in s.history.iter().enumerate() {
            let slot = if per_lag { i } else { i % dims };
            sum[slot] += v;
            count[slot] += 1;
        }
    }
    let mean: Vec<f64> = sum.iter().zip(&count).map(|(s, &n)| s / n as f64).collect();
    let mut sq = vec![0.0; width];
    for s in train {
        for (i, v) in s.history.iter().enumerate() {
            let slot = if per_lag { i } else { i % dims };
            sq[slot] += (v - mean[slot]).powi(2);
        }
    }
    let std = sq.iter().zip(&count).map(|(s, &n)| (s / n as f64).sqrt()).collect();
    Ok(NormalizationStats { mean, std, per_lag })
}

/// `(value - mean) / std`; constant dimensions map to 0.
pub fn zscore_apply(stats: &NormalizationStats, samples: &[TemporalSample], dims: usize) -> Vec<TemporalSample> {
    samples
        .iter()
        .map(|s| {
            let history = s
                .history
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let slot = if stats.per_lag { i } else { i % dims };
                    if stats.is_constant(slot) {
                        0.0
                    } else {
                        (v - stats.mean[slot]) / stats.std[slot]
                    }
                })
                .collect();
            TemporalSample {
                history,
                ..s.clone()
            }
        })
        .collect()
}

/// Indices of positive samples drawn with replacement to balance classes.
pub fn oversample_indices(train: &[TemporalSample], seed: u64) -> Result<Vec<usize>> {
    let positives: Vec<usize> = (0..train.len()).filter(|&i| train[i].label == 1).collect();
    let negatives = train.len() - positives.len();
    if positives.is_empty() || negatives == 0 {
        return Err(Error::SingleClass("oversampling needs both classes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extra = negatives.saturating_sub(positives.len());
    Ok((0..extra)
        .map(|_| positives[rng.gen_range(0..positives.len())])
        .collect())
}

/// Appends seeded duplicates of positive samples until both classes have
/// equal counts. Never applied to test data.
pub fn oversample_positives(train: &[TemporalSample], seed: u64) -> Result<Vec<TemporalSample>> {
    let extra = oversample_indices(train, seed)?;
    let mut out = train.to_vec();
    out.extend(extra.into_iter().map(|i| train[i].clone()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn matrix(n: usize, start: i32, end: i32, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_years = (end - start + 1) as usize;
        FeatureMatrix {
            concepts: (0..n).map(|i| format!("c{i}")).collect(),
            start_year: start,
            end_year: end,
            rows: (0..n)
                .map(|_| {
                    (0..n_years)
                        .map(|_| {
                            let mut r = [0.0; N_FEATURES];
                            r.iter_mut().for_each(|v| *v = rng.gen_range(0.0..5.0));
                            r
                        })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn worked_split() {
        assert_eq!(train_cutoffs(2008, 5, 3, 1990).unwrap(), vec![2001, 2002, 2003]);
        assert_eq!(train_cutoffs(2008, 1, 1, 1990).unwrap(), vec![2007]);
        assert!(train_cutoffs(2008, 5, 3, 2002).is_err());
        assert!(train_cutoffs(2008, 0, 3, 1990).is_err());
    }

    #[test]
    fn cutoff_grid_is_disjoint_from_test_interval() {
        for t in 1995..2015 {
            for w in 1..8 {
                for n in 1..5 {
                    let cuts = train_cutoffs(t, w, n, 1900).unwrap();
                    assert_eq!(cuts.len(), n);
                    for c in cuts {
                        // [c, c+w-1] vs [t, t+w-1]
                        assert!(c + w - 1 < t || c > t + w - 1);
                    }
                }
            }
        }
    }

    fn labels(emergence: Vec<i32>, transfer: Vec<Option<i32>>) -> ConceptLabels {
        ConceptLabels { emergence, transfer }
    }

    #[test]
    fn eligibility_rules() {
        let f = matrix(4, 2000, 2010, 1);
        let l = labels(
            vec![2008, 2001, 2002, 2003],
            vec![None, Some(2007), Some(2009), None],
        );
        let test = make_samples(&f, &l, 2008, 3, 2, Role::Test, PriorTransfers::Keep).unwrap();
        let ids: Vec<usize> = test.iter().map(|s| s.concept).collect();
        // emerges at cutoff -> excluded; transferred at t-1 -> excluded in test
        assert_eq!(ids, vec![2, 3]);
        assert_eq!(test[0].label, 1);
        assert_eq!(test[1].label, 0);

        let train = make_samples(&f, &l, 2008, 3, 2, Role::Train, PriorTransfers::Keep).unwrap();
        let ids: Vec<(usize, u8)> = train.iter().map(|s| (s.concept, s.label)).collect();
        assert_eq!(ids, vec![(1, 0), (2, 1), (3, 0)]);
        let dropped = make_samples(&f, &l, 2008, 3, 2, Role::Train, PriorTransfers::Drop).unwrap();
        assert_eq!(dropped.len(), 2);

        assert!(make_samples(&f, &l, 2008, 0, 2, Role::Test, PriorTransfers::Keep).is_err());
        assert!(make_samples(&f, &l, 2008, 3, 0, Role::Test, PriorTransfers::Keep).is_err());
        assert!(make_samples(&f, &l, 2002, 3, 2, Role::Test, PriorTransfers::Keep).is_err());
    }

    #[test]
    fn history_rows_are_strict_past_in_order() {
        let f = matrix(3, 2000, 2010, 2);
        let l = labels(vec![2000; 3], vec![None; 3]);
        let s = make_samples(&f, &l, 2006, 4, 2, Role::Test, PriorTransfers::Keep).unwrap();
        for sample in &s {
            for lag in 0..4 {
                assert_eq!(sample.step(N_FEATURES, lag), &f.row(sample.concept, 2002 + lag as i32)[..]);
            }
        }
    }

    #[test]
    fn random_registry_matches_rule_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = matrix(50, 1995, 2015, 3);
        let emergence: Vec<i32> = (0..50).map(|_| rng.gen_range(1996..2012)).collect();
        let transfer: Vec<Option<i32>> = emergence
            .iter()
            .map(|&e| rng.gen_bool(0.5).then(|| e + rng.gen_range(0..8)))
            .collect();
        let l = labels(emergence.clone(), transfer.clone());
        for role in [Role::Train, Role::Test] {
            for t in 2003..2012 {
                let got = make_samples(&f, &l, t, 5, 3, role, PriorTransfers::Keep).unwrap();
                let expected: Vec<(usize, u8)> = (0..50)
                    .filter(|&c| emergence[c] <= t - 1)
                    .filter(|&c| role == Role::Train || transfer[c].is_none_or(|ty| ty >= t))
                    .map(|c| (c, u8::from(transfer[c].is_some_and(|ty| ty >= t && ty < t + 3))))
                    .collect();
                let got: Vec<(usize, u8)> = got.iter().map(|s| (s.concept, s.label)).collect();
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn zscore_two_values() {
        let s = vec![
            TemporalSample { concept: 0, cutoff: 0, history: vec![0.0], label: 0, role: Role::Train },
            TemporalSample { concept: 1, cutoff: 0, history: vec![2.0], label: 1, role: Role::Train },
        ];
        let stats = zscore_fit(&s, 1, false).unwrap();
        assert_eq!((stats.mean[0], stats.std[0]), (1.0, 1.0));
        let n = zscore_apply(&stats, &s, 1);
        assert_eq!(n[0].history, vec![-1.0]);
        assert_eq!(n[1].history, vec![1.0]);
        assert!(zscore_fit(&[], 1, false).is_err());
    }

    #[test]
    fn zscore_pooled_moments_and_constant_dims() {
        let f = matrix(40, 2000, 2010, 4);
        let l = labels(vec![2000; 40], vec![None; 40]);
        let mut train = make_samples(&f, &l, 2008, 3, 2, Role::Train, PriorTransfers::Keep).unwrap();
        for s in &mut train {
            for lag in 0..3 {
                s.history[lag * N_FEATURES + 4] = 7.0;
            }
        }
        let stats = zscore_fit(&train, N_FEATURES, false).unwrap();
        assert!(stats.is_constant(4));
        let n = zscore_apply(&stats, &train, N_FEATURES);
        for d in 0..N_FEATURES {
            let vals: Vec<f64> = n.iter().flat_map(|s| (0..3).map(move |l| s.history[l * N_FEATURES + d])).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / vals.len() as f64;
            assert!(m.abs() < 1e-9);
            if d == 4 {
                assert!(vals.iter().all(|&x| x == 0.0));
            } else {
                assert!((v - 1.0).abs() < 1e-6);
            }
        }
        // test cells use train stats
        let test = make_samples(&f, &l, 2009, 3, 2, Role::Test, PriorTransfers::Keep).unwrap();
        let nt = zscore_apply(&stats, &test, N_FEATURES);
        let (i, j) = (5, 13);
        let expected = (test[i].history[j] - stats.mean[j % N_FEATURES]) / stats.std[j % N_FEATURES];
        assert_eq!(nt[i].history[j], expected);
    }

    #[test]
    fn per_lag_stats_width() {
        let f = matrix(10, 2000, 2010, 5);
        let l = labels(vec![2000; 10], vec![None; 10]);
        let train = make_samples(&f, &l, 2008, 3, 2, Role::Train, PriorTransfers::Keep).unwrap();
        let stats = zscore_fit(&train, N_FEATURES, true).unwrap();
        assert_eq!(stats.mean.len(), 3 * N_FEATURES);
    }

    fn sample(label: u8, concept: usize) -> TemporalSample {
        TemporalSample { concept, cutoff: 2000, history: vec![concept as f64], label, role: Role::Train }
    }

    #[test]
    fn oversampling_counts() {
        let train: Vec<TemporalSample> =
            [1, 1, 0, 0, 0, 0, 0, 0].iter().enumerate().map(|(i, &l)| sample(l, i)).collect();
        let out = oversample_positives(&train, 9).unwrap();
        assert_eq!(out.iter().filter(|s| s.label == 1).count(), 6);
        assert_eq!(out.iter().filter(|s| s.label == 0).count(), 6);
        let balanced: Vec<TemporalSample> = [1, 0].iter().enumerate().map(|(i, &l)| sample(l, i)).collect();
        assert_eq!(oversample_positives(&balanced, 1).unwrap(), balanced);
        let single: Vec<TemporalSample> = (0..3).map(|i| sample(0, i)).collect();
        assert!(oversample_positives(&single, 1).is_err());
    }

    #[test]
    fn oversampling_is_seed_deterministic() {
        let train: Vec<TemporalSample> = (0..50).map(|i| sample(u8::from(i % 7 == 0), i)).collect();
        assert_eq!(oversample_indices(&train, 42).unwrap(), oversample_indices(&train, 42).unwrap());
        assert_ne!(oversample_indices(&train, 42).unwrap(), oversample_indices(&train, 43).unwrap());
    }

    #[test]
    fn select_columns_projects_each_lag() {
        let f = matrix(5, 2000, 2010, 6);
        let l = labels(vec![2000; 5], vec![Some(2009); 5]);
        let plan = SplitPlan::new(2009, 1, 2, 1, 2000).unwrap();
        let ds = Dataset::build(&f, &l, &plan, PriorTransfers::Keep).unwrap();
        let sub = ds.select_columns(&[8, 9]).unwrap();
        assert_eq!(sub.dims(), 2);
        let s = &sub.test[0];
        assert_eq!(s.history, vec![f.row(0, 2007)[8], f.row(0, 2007)[9], f.row(0, 2008)[8], f.row(0, 2008)[9]]);
        assert!(ds.select_columns(&[]).is_err());
        let last = ds.last_year_only();
        assert_eq!(last.test[0].history, f.row(0, 2008).to_vec());
    }
}
