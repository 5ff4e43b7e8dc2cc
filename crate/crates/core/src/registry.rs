//! Concept careers: emergence, burn-in, transfer labels and field assignment.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusId, Document, Taxonomy};
use crate::{Error, Result};

/// Distinct concept ids mentioned by one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocConcepts {
    pub doc_id: String,
    pub year: i32,
    /// Sorted, deduplicated.
    pub concepts: Vec<usize>,
}

impl DocConcepts {
    pub fn new(doc_id: impl Into<String>, year: i32, mut concepts: Vec<usize>) -> Self {
        concepts.sort_unstable();
        concepts.dedup();
        DocConcepts {
            doc_id: doc_id.into(),
            year,
            concepts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistryConfig {
    pub burn_in_window: usize,
    pub cv_tolerance: f64,
    pub theta: usize,
    /// Maximum years between emergence and transfer; unbounded when `None`.
    pub horizon: Option<i32>,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        RegistryConfig {
            burn_in_window: 5,
            cv_tolerance: 0.2,
            theta: 5,
            horizon: None,
        }
    }
}

/// First papers-corpus year of each mentioned concept.
pub fn compute_emergence_years(papers: &[DocConcepts]) -> BTreeMap<usize, i32> {
    let mut out: BTreeMap<usize, i32> = BTreeMap::new();
    for doc in papers {
        for &c in &doc.concepts {
            out.entry(c)
                .and_modify(|y| *y = (*y).min(doc.year))
                .or_insert(doc.year);
        }
    }
    out
}

/// Number of concepts first seen in each year, with zero-filled gaps.
pub fn yearly_new_counts(emergence: &BTreeMap<usize, i32>) -> BTreeMap<i32, usize> {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    for &y in emergence.values() {
        *counts.entry(y).or_default() += 1;
    }
    if let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) {
        for y in lo..=hi {
            counts.entry(y).or_insert(0);
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurnInResult {
    pub cutoff_year: i32,
    pub yearly_new_counts: BTreeMap<i32, usize>,
    /// Coefficient of variation of the window following each candidate year.
    pub diagnostics: Vec<(i32, f64)>,
}

/// Smallest year `y` whose following window `[y+1, y+window]` of new-concept
/// counts has coefficient of variation (population std / mean) below
/// `cv_tolerance`.
pub fn burn_in_cutoff(
    yearly_new_counts: &BTreeMap<i32, usize>,
    window: usize,
    cv_tolerance: f64,
) -> Result<BurnInResult> {
    if window < 3 {
        return Err(Error::InvalidArgument("burn-in window must be >= 3".into()));
    }
    let (Some(&lo), Some(&hi)) = (
        yearly_new_counts.keys().next(),
        yearly_new_counts.keys().next_back(),
    ) else {
        return Err(Error::InsufficientHistory("no new-concept counts".into()));
    };
    let years = (hi - lo + 1) as usize;
    if years < window + 1 {
        return Err(Error::InsufficientHistory(format!(
            "burn-in needs {} consecutive years, have {years}",
            window + 1
        )));
    }
    let count = |y: i32| yearly_new_counts.get(&y).copied().unwrap_or(0) as f64;
    let mut diagnostics = Vec::new();
    let mut cutoff = None;
    for y in lo..=(hi - window as i32) {
        let vals: Vec<f64> = (1..=window as i32).map(|d| count(y + d)).collect();
        let mean = vals.iter().sum::<f64>() / window as f64;
        let cv = if mean > 0.0 {
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / window as f64;
            var.sqrt() / mean
        } else {
            f64::INFINITY
        };
        diagnostics.push((y, cv));
        if cutoff.is_none() && cv < cv_tolerance {
            cutoff = Some(y);
        }
    }
    let cutoff_year = cutoff.ok_or(Error::NoBurnInYear {
        tolerance: cv_tolerance,
    })?;
    Ok(BurnInResult {
        cutoff_year,
        yearly_new_counts: yearly_new_counts.clone(),
        diagnostics,
    })
}

/// Earliest year at which cumulative distinct target documents since
/// emergence reach `theta`, within `horizon` years of emergence.
///
/// Any target use before emergence disqualifies the concept.
pub fn label_transfers(
    emergence_year: i32,
    target_doc_counts: &BTreeMap<i32, usize>,
    theta: usize,
    horizon: Option<i32>,
) -> Option<i32> {
    if target_doc_counts
        .range(..emergence_year)
        .any(|(_, &n)| n > 0)
    {
        return None;
    }
    let mut cumulative = 0usize;
    for (&year, &n) in target_doc_counts.range(emergence_year..) {
        if horizon.is_some_and(|x| year - emergence_year > x) {
            return None;
        }
        cumulative += n;
        if cumulative >= theta {
            return Some(year);
        }
    }
    None
}

/// 1 iff the transfer falls in `[cutoff, cutoff + window - 1]`.
pub fn prediction_label(transfer_year: Option<i32>, cutoff: i32, window: i32) -> u8 {
    match transfer_year {
        Some(ty) if ty >= cutoff && ty <= cutoff + window - 1 => 1,
        _ => 0,
    }
}

/// Whether a concept counts as transferred at `year`.
pub fn transferred_at(transfer_year: Option<i32>, year: i32) -> bool {
    transfer_year.is_some_and(|ty| ty <= year)
}

/// Inverse document frequency of each field over concepts:
/// `ln(total concepts / concepts with any use in the field)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldIdf {
    pub idf: BTreeMap<String, f64>,
}

impl FieldIdf {
    pub fn fit<'a>(usage: impl IntoIterator<Item = &'a BTreeMap<String, f64>>) -> FieldIdf {
        let mut total = 0usize;
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for per_field in usage {
            total += 1;
            for (f, &u) in per_field {
                if u > 0.0 {
                    *df.entry(f.clone()).or_default() += 1;
                }
            }
        }
        FieldIdf {
            idf: df
                .into_iter()
                .map(|(f, n)| (f, (total as f64 / n as f64).ln()))
                .collect(),
        }
    }
}

/// Field with the largest tf-idf; ties go to the lexicographically smaller
/// field name.
pub fn assign_field(idf: &FieldIdf, usage: &BTreeMap<String, f64>) -> Result<String> {
    let total: f64 = usage.values().filter(|u| **u > 0.0).sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("concept has zero field usage".into()));
    }
    let mut best: Option<(&str, f64)> = None;
    for (field, &u) in usage {
        if u <= 0.0 {
            continue;
        }
        let score = (u / total) * idf.idf.get(field).copied().unwrap_or(0.0);
        // BTreeMap iterates in name order, so strict > keeps the smallest name on ties.
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((field, score));
        }
    }
    Ok(best.expect("non-empty usage").0.to_string())
}

/// Per-concept field usage: discipline weights of every papers document
/// mentioning the concept, mapped through the taxonomy.
pub fn field_usage(
    papers: &[&Document],
    doc_concepts: &[DocConcepts],
    taxonomy: &Taxonomy,
) -> BTreeMap<usize, BTreeMap<String, f64>> {
    let mut out: BTreeMap<usize, BTreeMap<String, f64>> = BTreeMap::new();
    for (doc, dc) in papers.iter().zip(doc_concepts) {
        for &c in &dc.concepts {
            let entry = out.entry(c).or_default();
            for d in &doc.discipline_codes {
                *entry.entry(taxonomy.field_of(&d.code).to_string()).or_default() += d.weight;
            }
        }
    }
    out
}

/// Distinct documents per (concept, year).
pub fn yearly_doc_counts(docs: &[DocConcepts]) -> BTreeMap<usize, BTreeMap<i32, usize>> {
    let mut out: BTreeMap<usize, BTreeMap<i32, usize>> = BTreeMap::new();
    for doc in docs {
        for &c in &doc.concepts {
            *out.entry(c).or_default().entry(doc.year).or_default() += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptRecord {
    pub phrase: String,
    pub emergence_year: i32,
    pub transfer_year: BTreeMap<CorpusId, Option<i32>>,
    pub field: Option<String>,
    /// corpus -> year -> number of documents mentioning the concept
    pub yearly_usage: BTreeMap<CorpusId, BTreeMap<i32, usize>>,
}

impl ConceptRecord {
    pub fn transfer(&self, target: CorpusId) -> Option<i32> {
        self.transfer_year.get(&target).copied().flatten()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegistryLine {
    phrase: String,
    emergence_year: i32,
    transfer_year_patents: Option<i32>,
    transfer_year_trials: Option<i32>,
    field: Option<String>,
}

/// The study set: concepts emerging after the burn-in cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptRegistry {
    pub records: Vec<ConceptRecord>,
    pub burn_in: Option<BurnInResult>,
}

impl ConceptRegistry {
    pub fn index_of(&self, phrase: &str) -> Option<usize> {
        self.records
            .binary_search_by(|r| r.phrase.as_str().cmp(phrase))
            .ok()
    }

    pub fn get(&self, phrase: &str) -> Option<&ConceptRecord> {
        self.index_of(phrase).map(|i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One JSON object per line with the phrase, emergence year, both
    /// transfer years and field.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let line = RegistryLine {
                phrase: r.phrase.clone(),
                emergence_year: r.emergence_year,
                transfer_year_patents: r.transfer(CorpusId::Patents),
                transfer_year_trials: r.transfer(CorpusId::Trials),
                field: r.field.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(contents: &str) -> Result<Self> {
        let mut records = Vec::new();
        for line in contents.lines() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let l: RegistryLine = serde_json::from_str(line)?;
            records.push(ConceptRecord {
                phrase: l.phrase,
                emergence_year: l.emergence_year,
                transfer_year: [
                    (CorpusId::Patents, l.transfer_year_patents),
                    (CorpusId::Trials, l.transfer_year_trials),
                ]
                .into_iter()
                .collect(),
                field: l.field,
                yearly_usage: BTreeMap::new(),
            });
        }
        records.sort_by(|a, b| a.phrase.cmp(&b.phrase));
        Ok(ConceptRegistry {
            records,
            burn_in: None,
        })
    }
}

/// Inputs for [`build_registry`]; concept ids index into `phrases`.
pub struct RegistryInputs<'a> {
    pub phrases: &'a [String],
    pub papers: &'a [DocConcepts],
    pub targets: &'a BTreeMap<CorpusId, Vec<DocConcepts>>,
    pub field_usage: &'a BTreeMap<usize, BTreeMap<String, f64>>,
}

/// Emergence, burn-in, transfer labels and fields for every mentioned concept;
/// keeps those emerging strictly after the burn-in cutoff.
pub fn build_registry(inputs: &RegistryInputs<'_>, config: &RegistryConfig) -> Result<ConceptRegistry> {
    let emergence = compute_emergence_years(inputs.papers);
    let counts = yearly_new_counts(&emergence);
    let burn_in = burn_in_cutoff(&counts, config.burn_in_window, config.cv_tolerance)?;
    build_registry_with_cutoff(inputs, config, &emergence, Some(burn_in))
}

/// Like [`build_registry`] but with an explicit (or no) burn-in result.
pub fn build_registry_with_cutoff(
    inputs: &RegistryInputs<'_>,
    config: &RegistryConfig,
    emergence: &BTreeMap<usize, i32>,
    burn_in: Option<BurnInResult>,
) -> Result<ConceptRegistry> {
    let cutoff = burn_in.as_ref().map(|b| b.cutoff_year);
    let paper_usage = yearly_doc_counts(inputs.papers);
    let target_usage: BTreeMap<CorpusId, BTreeMap<usize, BTreeMap<i32, usize>>> = inputs
        .targets
        .iter()
        .map(|(&c, docs)| (c, yearly_doc_counts(docs)))
        .collect();

    let study: BTreeSet<usize> = emergence
        .iter()
        .filter(|(_, &y)| cutoff.is_none_or(|c| y > c))
        .map(|(&c, _)| c)
        .collect();
    let idf = FieldIdf::fit(study.iter().filter_map(|c| inputs.field_usage.get(c)));

    let empty = BTreeMap::new();
    let mut records: Vec<ConceptRecord> = study
        .iter()
        .map(|&c| {
            let e = emergence[&c];
            let mut yearly_usage = BTreeMap::new();
            yearly_usage.insert(CorpusId::Papers, paper_usage.get(&c).cloned().unwrap_or_default());
            let mut transfer_year = BTreeMap::new();
            for target in [CorpusId::Patents, CorpusId::Trials] {
                let usage = target_usage
                    .get(&target)
                    .and_then(|u| u.get(&c))
                    .unwrap_or(&empty);
                transfer_year.insert(
                    target,
                    label_transfers(e, usage, config.theta, config.horizon),
                );
                if target_usage.contains_key(&target) {
                    yearly_usage.insert(target, usage.clone());
                }
            }
            let field = inputs
                .field_usage
                .get(&c)
                .and_then(|u| assign_field(&idf, u).ok());
            ConceptRecord {
                phrase: inputs.phrases[c].clone(),
                emergence_year: e,
                transfer_year,
                field,
                yearly_usage,
            }
        })
        .collect();
    records.sort_by(|a, b| a.phrase.cmp(&b.phrase));
    Ok(ConceptRegistry { records, burn_in })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(start: i32, vals: &[usize]) -> BTreeMap<i32, usize> {
        vals.iter().enumerate().map(|(i, &v)| (start + i as i32, v)).collect()
    }

    #[test]
    fn emergence_is_min_year() {
        let docs = vec![
            DocConcepts::new("a", 2005, vec![1, 2]),
            DocConcepts::new("b", 1998, vec![1]),
            DocConcepts::new("c", 2003, vec![3]),
            DocConcepts::new("d", 2003, vec![3]),
        ];
        let e = compute_emergence_years(&docs);
        assert_eq!(e[&1], 1998);
        assert_eq!(e[&2], 2005);
        assert_eq!(e[&3], 2003);
        assert!(!e.contains_key(&0));
    }

    #[test]
    fn emergence_matches_full_rescan() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let docs: Vec<DocConcepts> = (0..3000)
            .map(|i| {
                let cs = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..500)).collect();
                DocConcepts::new(format!("d{i}"), rng.gen_range(1990..2020), cs)
            })
            .collect();
        let e = compute_emergence_years(&docs);
        for c in 0..500 {
            let oracle = docs
                .iter()
                .filter(|d| d.concepts.contains(&c))
                .map(|d| d.year)
                .min();
            assert_eq!(e.get(&c).copied(), oracle);
        }
    }

    #[test]
    fn burn_in_constant_counts() {
        let r = burn_in_cutoff(&series(2000, &[100; 6]), 5, 0.2).unwrap();
        assert_eq!(r.cutoff_year, 2000);
        assert_eq!(r.diagnostics, vec![(2000, 0.0)]);
    }

    #[test]
    fn burn_in_halving_then_constant() {
        // 2000..2004 halve, constant 100 from 2004 on.
        let counts = series(2000, &[1600, 800, 400, 200, 100, 100, 100, 100, 100, 100]);
        let r = burn_in_cutoff(&counts, 5, 0.2).unwrap();
        // window after 2002 = [200, 100, 100, 100, 100]: mean 120, std 40, cv 1/3
        // window after 2003 = [100; 5]: cv 0
        let cv_2002 = r.diagnostics.iter().find(|(y, _)| *y == 2002).unwrap().1;
        assert!((cv_2002 - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.cutoff_year, 2003);
        // Concepts from the first constant year on are kept.
        assert!(2004 > r.cutoff_year);
    }

    #[test]
    fn burn_in_errors() {
        assert!(matches!(
            burn_in_cutoff(&series(2000, &[100, 1, 100, 1, 100, 1]), 5, 0.2),
            Err(Error::NoBurnInYear { .. })
        ));
        assert!(burn_in_cutoff(&series(2000, &[1; 5]), 5, 0.2).is_err());
        assert!(burn_in_cutoff(&series(2000, &[1; 9]), 2, 0.2).is_err());
    }

    #[test]
    fn burn_in_monotone_in_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let vals: Vec<usize> = (0..15).map(|_| rng.gen_range(50..150)).collect();
            let counts = series(1990, &vals);
            let mut last = i32::MAX;
            for step in 1..=20 {
                let tol = step as f64 * 0.05;
                if let Ok(r) = burn_in_cutoff(&counts, 5, tol) {
                    assert!(r.cutoff_year <= last);
                    last = r.cutoff_year;
                }
            }
        }
    }

    #[test]
    fn transfer_reaches_theta() {
        let e = 2000;
        let counts = series(2001, &[2, 3]);
        assert_eq!(label_transfers(e, &counts, 5, None), Some(2002));
        assert_eq!(label_transfers(e, &series(2001, &[1, 1, 1, 1]), 5, None), None);
        assert_eq!(label_transfers(e, &counts, 5, Some(1)), None);
        assert_eq!(label_transfers(e, &counts, 5, Some(2)), Some(2002));
        // use before emergence disqualifies
        let mut early = counts.clone();
        early.insert(1999, 1);
        assert_eq!(label_transfers(e, &early, 5, None), None);
    }

    #[test]
    fn transfer_matches_prefix_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let e = rng.gen_range(1995..2005);
            let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
            for y in 1990..2020 {
                if rng.gen_bool(0.3) {
                    counts.insert(y, rng.gen_range(0..4));
                }
            }
            let theta = rng.gen_range(1..8);
            let got = label_transfers(e, &counts, theta, None);
            let before: usize = counts.iter().filter(|(y, _)| **y < e).map(|(_, n)| n).sum();
            let oracle = if before > 0 {
                None
            } else {
                (e..2020).find(|&tau| {
                    (e..=tau).map(|y| counts.get(&y).copied().unwrap_or(0)).sum::<usize>() >= theta
                })
            };
            assert_eq!(got, oracle);
            if let Some(ty) = got {
                assert!(ty >= e);
                for y in 1990..2030 {
                    assert_eq!(transferred_at(got, y), y >= ty);
                }
            }
        }
    }

    #[test]
    fn prediction_label_boundaries() {
        assert_eq!(prediction_label(Some(2005), 2005, 3), 1);
        assert_eq!(prediction_label(Some(2008), 2005, 3), 0);
        assert_eq!(prediction_label(Some(2004), 2005, 3), 0);
        assert_eq!(prediction_label(None, 2005, 3), 0);
        for ty in 1990..2010 {
            for t in 1990..2010 {
                for w in 1..6 {
                    let oracle = u8::from((t..t + w).contains(&ty));
                    assert_eq!(prediction_label(Some(ty), t, w), oracle);
                }
            }
            for w in 1..6 {
                let ones = (1980..2030).filter(|&t| prediction_label(Some(ty), t, w) == 1).count();
                assert_eq!(ones, w as usize);
            }
        }
    }

    fn usage(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(f, u)| (f.to_string(), *u)).collect()
    }

    #[test]
    fn field_single_use() {
        let all = [usage(&[("engineering", 3.0)]), usage(&[("social", 1.0)])];
        let idf = FieldIdf::fit(all.iter());
        assert_eq!(assign_field(&idf, &all[0]).unwrap(), "engineering");
        assert!(assign_field(&idf, &usage(&[])).is_err());
    }

    #[test]
    fn rarer_field_wins_on_equal_tf() {
        let target = usage(&[("bio_health", 1.0), ("social", 1.0)]);
        let all = [
            target.clone(),
            usage(&[("bio_health", 1.0)]),
            usage(&[("bio_health", 2.0)]),
        ];
        let idf = FieldIdf::fit(all.iter());
        assert_eq!(assign_field(&idf, &target).unwrap(), "social");
    }

    #[test]
    fn field_tie_breaks_lexicographically() {
        let target = usage(&[("social", 1.0), ("humanities", 1.0)]);
        let all = [target.clone(), usage(&[("physical_math", 1.0)])];
        let idf = FieldIdf::fit(all.iter());
        assert_eq!(assign_field(&idf, &target).unwrap(), "humanities");
    }

    #[test]
    fn field_matches_tfidf_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fields = ["agriculture", "bio_health", "engineering", "humanities", "physical_math", "social"];
        let all: Vec<BTreeMap<String, f64>> = (0..200)
            .map(|_| {
                let mut m = BTreeMap::new();
                for f in fields {
                    if rng.gen_bool(0.4) {
                        m.insert(f.to_string(), rng.gen_range(1..10) as f64);
                    }
                }
                m
            })
            .filter(|m: &BTreeMap<String, f64>| !m.is_empty())
            .collect();
        let idf = FieldIdf::fit(all.iter());
        let n = all.len() as f64;
        for u in &all {
            let total: f64 = u.values().sum();
            let mut scored: Vec<(f64, &str)> = u
                .iter()
                .map(|(f, v)| {
                    let df = all.iter().filter(|m| m.contains_key(f)).count() as f64;
                    ((v / total) * (n / df).ln(), f.as_str())
                })
                .collect();
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
            assert_eq!(assign_field(&idf, u).unwrap(), scored[0].1);
        }
    }

    #[test]
    fn registry_round_trip_and_study_set() {
        let phrases: Vec<String> = ["alpha", "beta", "gamma"].iter().map(|s| s.to_string()).collect();
        let mut papers = vec![DocConcepts::new("p0", 2000, vec![0])];
        for y in 2001..2010 {
            papers.push(DocConcepts::new(format!("p{y}"), y, vec![1, 2]));
        }
        let patents: Vec<DocConcepts> =
            (0..5).map(|i| DocConcepts::new(format!("x{i}"), 2003 + i, vec![1])).collect();
        let targets = [(CorpusId::Patents, patents)].into_iter().collect();
        let fu = [(1usize, usage(&[("engineering", 1.0)])), (2, usage(&[("social", 1.0)]))]
            .into_iter()
            .collect();
        let inputs = RegistryInputs {
            phrases: &phrases,
            papers: &papers,
            targets: &targets,
            field_usage: &fu,
        };
        let emergence = compute_emergence_years(&papers);
        let burn = BurnInResult {
            cutoff_year: 2000,
            yearly_new_counts: yearly_new_counts(&emergence),
            diagnostics: vec![],
        };
        let reg =
            build_registry_with_cutoff(&inputs, &RegistryConfig::default(), &emergence, Some(burn)).unwrap();
        assert_eq!(reg.len(), 2);
        assert!(reg.get("alpha").is_none());
        let beta = reg.get("beta").unwrap();
        assert_eq!(beta.transfer(CorpusId::Patents), Some(2007));
        assert_eq!(beta.transfer(CorpusId::Trials), None);
        assert_eq!(beta.field.as_deref(), Some("engineering"));

        let again = ConceptRegistry::from_jsonl(&reg.to_jsonl()).unwrap();
        assert_eq!(again.to_jsonl(), reg.to_jsonl());
    }
}
