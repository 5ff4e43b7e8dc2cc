//! Per-(concept, year) feature series.
//!
//! Hype, bridge, ideational and resonance features come from the papers that
//! mention a concept in a given year; the two graph features come from the
//! co-occurrence snapshot of that year. Years before a concept's emergence
//! are zero rows.

mod lexicon;
mod stats;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use lexicon::{EasyWordList, SentimentLexicon};
pub use stats::{feature_correlation, group_comparison, group_ttest, GroupComparison, TTest};

use crate::corpus::{Affiliation, Document, Taxonomy, VenueLinkTable};
use crate::graph::DynamicGraph;
use crate::registry::DocConcepts;
use crate::text::sentences;
use crate::{Error, Result, FEATURE_NAMES, N_FEATURES};

const DALE_CHALL_DIFFICULT: f64 = 0.1579;
const DALE_CHALL_SENTENCE: f64 = 0.0496;
const DALE_CHALL_ADJUSTMENT: f64 = 3.6365;
const DALE_CHALL_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Use log base 2 for discipline entropy instead of the natural log.
    pub entropy_base2: bool,
}

/// Token-level counts for one document's text.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TextStats {
    pub tokens: usize,
    pub emotional: usize,
    pub difficult: usize,
    pub sentences: usize,
}

impl TextStats {
    pub fn measure(text: &str, lexicon: &SentimentLexicon, easy: &EasyWordList) -> TextStats {
        let mut stats = TextStats::default();
        for sentence in sentences(text) {
            stats.sentences += 1;
            for tok in &sentence {
                stats.tokens += 1;
                if lexicon.is_emotional(tok) {
                    stats.emotional += 1;
                }
                if !easy.contains(tok) {
                    stats.difficult += 1;
                }
            }
        }
        stats
    }

    pub fn emotionality(&self) -> f64 {
        self.emotional as f64 / self.tokens as f64
    }

    /// Dale-Chall style score with the configured easy-word list.
    pub fn accessibility(&self) -> f64 {
        let difficult = self.difficult as f64 / self.tokens as f64;
        let mean_sentence = self.tokens as f64 / self.sentences as f64;
        let adjustment = if difficult > DALE_CHALL_THRESHOLD {
            DALE_CHALL_ADJUSTMENT
        } else {
            0.0
        };
        DALE_CHALL_DIFFICULT * (100.0 * difficult) + DALE_CHALL_SENTENCE * mean_sentence + adjustment
    }
}

#[derive(Debug, Clone)]
struct DocProfile {
    year: i32,
    authors: Vec<(u32, bool)>,
    venue: Option<u32>,
    disciplines: Vec<(u32, f64)>,
    text: TextStats,
}

/// Borrowed inputs for [`FeatureEngine::new`]. `doc_concepts[i]` describes
/// `papers[i]` and its concept ids are dense ids `0..n_concepts`.
pub struct FeatureInputs<'a> {
    pub papers: &'a [&'a Document],
    pub doc_concepts: &'a [DocConcepts],
    pub emergence: &'a [i32],
    pub venue_links: &'a VenueLinkTable,
    pub taxonomy: &'a Taxonomy,
    pub lexicon: &'a SentimentLexicon,
    pub easy_words: &'a EasyWordList,
    pub graph: &'a DynamicGraph,
    pub config: FeatureConfig,
}

/// Precomputed per-document profiles and per-concept document lists.
pub struct FeatureEngine {
    docs: Vec<DocProfile>,
    /// concept -> doc indices sorted by (year, index)
    concept_docs: Vec<Vec<usize>>,
    emergence: Vec<i32>,
    venue_link_year: Vec<Option<i32>>,
    engineering_code: Vec<bool>,
    graph_years: (i32, i32),
    graph_features: Vec<Vec<(f64, f64)>>,
    config: FeatureConfig,
}

impl FeatureEngine {
    pub fn new(inputs: &FeatureInputs<'_>) -> Result<FeatureEngine> {
        if inputs.papers.len() != inputs.doc_concepts.len() {
            return Err(Error::ShapeMismatch {
                expected: inputs.papers.len(),
                actual: inputs.doc_concepts.len(),
            });
        }
        let n_concepts = inputs.emergence.len();
        if inputs.graph.n_nodes() != n_concepts {
            return Err(Error::ShapeMismatch {
                expected: n_concepts,
                actual: inputs.graph.n_nodes(),
            });
        }
        let mut authors: HashMap<&str, u32> = HashMap::new();
        let mut venues: HashMap<&str, u32> = HashMap::new();
        let mut venue_names: Vec<&str> = Vec::new();
        let mut codes: HashMap<&str, u32> = HashMap::new();
        let mut code_names: Vec<&str> = Vec::new();
        let mut docs = Vec::with_capacity(inputs.papers.len());
        for doc in inputs.papers {
            let mut doc_authors: Vec<(u32, bool)> = Vec::new();
            for a in &doc.authors {
                let next = authors.len() as u32;
                let id = *authors.entry(a.author_id.as_str()).or_insert(next);
                doc_authors.push((id, a.affiliation_kind == Affiliation::Industry));
            }
            let venue = doc.venue_id.as_deref().map(|v| {
                *venues.entry(v).or_insert_with(|| {
                    venue_names.push(v);
                    venue_names.len() as u32 - 1
                })
            });
            let disciplines = doc
                .discipline_codes
                .iter()
                .map(|d| {
                    let id = *codes.entry(d.code.as_str()).or_insert_with(|| {
                        code_names.push(d.code.as_str());
                        code_names.len() as u32 - 1
                    });
                    (id, d.weight)
                })
                .collect();
            docs.push(DocProfile {
                year: doc.year,
                authors: doc_authors,
                venue,
                disciplines,
                text: TextStats::measure(&doc.text(), inputs.lexicon, inputs.easy_words),
            });
        }
        let mut concept_docs = vec![Vec::new(); n_concepts];
        for (i, dc) in inputs.doc_concepts.iter().enumerate() {
            for &c in &dc.concepts {
                if c >= n_concepts {
                    return Err(Error::UnknownConcept(format!("concept id {c}")));
                }
                concept_docs[c].push(i);
            }
        }
        for list in &mut concept_docs {
            list.sort_by_key(|&i| (docs[i].year, i));
        }
        let years = inputs.graph.years();
        Ok(FeatureEngine {
            docs,
            concept_docs,
            emergence: inputs.emergence.to_vec(),
            venue_link_year: venue_names.iter().map(|v| inputs.venue_links.first_year(v)).collect(),
            engineering_code: code_names.iter().map(|c| inputs.taxonomy.is_engineering(c)).collect(),
            graph_years: (*years.start(), *years.end()),
            graph_features: inputs.graph.node_features(),
            config: inputs.config,
        })
    }

    pub fn n_concepts(&self) -> usize {
        self.emergence.len()
    }

    fn check(&self, concept: usize) -> Result<()> {
        if concept >= self.n_concepts() {
            Err(Error::UnknownConcept(format!("concept id {concept}")))
        } else {
            Ok(())
        }
    }

    fn docs_in_year(&self, concept: usize, year: i32) -> impl Iterator<Item = &DocProfile> {
        self.concept_docs[concept]
            .iter()
            .map(|&i| &self.docs[i])
            .filter(move |d| d.year == year)
    }

    /// (adopter size, author repeated usage).
    pub fn hype_features(&self, concept: usize, year: i32) -> Result<(f64, f64)> {
        self.check(concept)?;
        let current: BTreeSet<u32> = self
            .docs_in_year(concept, year)
            .flat_map(|d| d.authors.iter().map(|a| a.0))
            .collect();
        let previous: BTreeSet<u32> = self.concept_docs[concept]
            .iter()
            .map(|&i| &self.docs[i])
            .filter(|d| d.year < year)
            .flat_map(|d| d.authors.iter().map(|a| a.0))
            .collect();
        let repeated = current.intersection(&previous).count();
        Ok((current.len() as f64, repeated as f64))
    }

    /// (discipline diversity, engineering relation) from the pooled code
    /// distribution of the year's documents.
    pub fn bridge_features(&self, concept: usize, year: i32) -> Result<(f64, f64)> {
        self.check(concept)?;
        let mut mass: BTreeMap<u32, f64> = BTreeMap::new();
        for d in self.docs_in_year(concept, year) {
            for &(code, w) in &d.disciplines {
                *mass.entry(code).or_insert(0.0) += w;
            }
        }
        Ok(self.entropy_and_engineering(&mass))
    }

    fn entropy_and_engineering(&self, mass: &BTreeMap<u32, f64>) -> (f64, f64) {
        let total: f64 = mass.values().sum();
        if total <= 0.0 {
            return (0.0, 0.0);
        }
        let mut entropy = 0.0;
        let mut engineering = 0.0;
        for (&code, &m) in mass {
            let q = m / total;
            if q > 0.0 {
                entropy -= q * q.ln();
            }
            if self.engineering_code[code as usize] {
                engineering += q;
            }
        }
        if self.config.entropy_base2 {
            entropy /= std::f64::consts::LN_2;
        }
        (entropy.max(0.0), engineering)
    }

    /// (emotionality, accessibility): mean document emotionality and
    /// token-weighted mean readability over the year's documents.
    pub fn ideational_features(&self, concept: usize, year: i32) -> Result<(f64, f64)> {
        self.check(concept)?;
        let mut n = 0usize;
        let mut emo = 0.0;
        let mut weight = 0.0;
        let mut acc = 0.0;
        for d in self.docs_in_year(concept, year) {
            if d.text.tokens == 0 {
                continue;
            }
            n += 1;
            emo += d.text.emotionality();
            let w = d.text.tokens as f64;
            weight += w;
            acc += w * d.text.accessibility();
        }
        if n == 0 {
            return Ok((0.0, 0.0));
        }
        Ok((emo / n as f64, acc / weight))
    }

    /// (journal linkage, industry share).
    pub fn resonance_features(&self, concept: usize, year: i32) -> Result<(f64, f64)> {
        self.check(concept)?;
        let mut venues: BTreeSet<u32> = BTreeSet::new();
        let mut authors: BTreeMap<u32, bool> = BTreeMap::new();
        for d in self.docs_in_year(concept, year) {
            venues.extend(d.venue);
            for &(a, industry) in &d.authors {
                *authors.entry(a).or_insert(false) |= industry;
            }
        }
        let linked = venues
            .iter()
            .filter(|&&v| self.venue_link_year[v as usize].is_some_and(|y| y <= year))
            .count();
        let linkage = if venues.is_empty() {
            0.0
        } else {
            linked as f64 / venues.len() as f64
        };
        let industry = authors.values().filter(|&&i| i).count();
        let share = if authors.is_empty() {
            0.0
        } else {
            industry as f64 / authors.len() as f64
        };
        Ok((linkage, share))
    }

    /// (weighted degree, transferred neighbor share) from the snapshot.
    pub fn graph_features(&self, concept: usize, year: i32) -> Result<(f64, f64)> {
        self.check(concept)?;
        let (lo, hi) = self.graph_years;
        if year < lo || year > hi {
            return Ok((0.0, 0.0));
        }
        Ok(self.graph_features[concept][(year - lo) as usize])
    }

    /// The ten features in column order, zero before emergence.
    pub fn feature_row(&self, concept: usize, year: i32) -> Result<[f64; N_FEATURES]> {
        self.check(concept)?;
        if year < self.emergence[concept] {
            return Ok([0.0; N_FEATURES]);
        }
        let (a, b) = self.hype_features(concept, year)?;
        let (c, d) = self.bridge_features(concept, year)?;
        let (e, f) = self.ideational_features(concept, year)?;
        let (g, h) = self.resonance_features(concept, year)?;
        let (i, j) = self.graph_features(concept, year)?;
        Ok([a, b, c, d, e, f, g, h, i, j])
    }

    /// One concept's series over `[start, end]`, built in a single pass.
    fn series(&self, concept: usize, start: i32, end: i32) -> Vec<[f64; N_FEATURES]> {
        let n_years = (end - start + 1) as usize;
        let mut rows = vec![[0.0; N_FEATURES]; n_years];
        let docs = &self.concept_docs[concept];
        let mut seen_authors: BTreeSet<u32> = BTreeSet::new();
        let mut pos = 0;
        // authors from years before the range still count as previous users
        while pos < docs.len() && self.docs[docs[pos]].year < start {
            seen_authors.extend(self.docs[docs[pos]].authors.iter().map(|a| a.0));
            pos += 1;
        }
        for (offset, row) in rows.iter_mut().enumerate() {
            let year = start + offset as i32;
            let begin = pos;
            while pos < docs.len() && self.docs[docs[pos]].year == year {
                pos += 1;
            }
            let year_docs = &docs[begin..pos];
            if year >= self.emergence[concept] {
                let mut authors: BTreeMap<u32, bool> = BTreeMap::new();
                let mut mass: BTreeMap<u32, f64> = BTreeMap::new();
                let mut venues: BTreeSet<u32> = BTreeSet::new();
                let (mut n_text, mut emo, mut weight, mut acc) = (0usize, 0.0, 0.0, 0.0);
                for &i in year_docs {
                    let d = &self.docs[i];
                    for &(a, industry) in &d.authors {
                        *authors.entry(a).or_insert(false) |= industry;
                    }
                    for &(code, w) in &d.disciplines {
                        *mass.entry(code).or_insert(0.0) += w;
                    }
                    venues.extend(d.venue);
                    if d.text.tokens > 0 {
                        n_text += 1;
                        emo += d.text.emotionality();
                        let w = d.text.tokens as f64;
                        weight += w;
                        acc += w * d.text.accessibility();
                    }
                }
                let repeated = authors.keys().filter(|a| seen_authors.contains(a)).count();
                let (diversity, engineering) = self.entropy_and_engineering(&mass);
                let (emotionality, accessibility) = if n_text == 0 {
                    (0.0, 0.0)
                } else {
                    (emo / n_text as f64, acc / weight)
                };
                let linked = venues
                    .iter()
                    .filter(|&&v| self.venue_link_year[v as usize].is_some_and(|y| y <= year))
                    .count();
                let linkage = if venues.is_empty() {
                    0.0
                } else {
                    linked as f64 / venues.len() as f64
                };
                let industry = authors.values().filter(|&&i| i).count();
                let share = if authors.is_empty() {
                    0.0
                } else {
                    industry as f64 / authors.len() as f64
                };
                let (degree, neighbor_share) = self.graph_features(concept, year).expect("checked");
                *row = [
                    authors.len() as f64,
                    repeated as f64,
                    diversity,
                    engineering,
                    emotionality,
                    accessibility,
                    linkage,
                    share,
                    degree,
                    neighbor_share,
                ];
            }
            for &i in year_docs {
                seen_authors.extend(self.docs[i].authors.iter().map(|a| a.0));
            }
        }
        rows
    }

    /// Dense series for the given concepts over `[start, end]`.
    pub fn feature_matrix(
        &self,
        concepts: &[usize],
        names: &[String],
        start: i32,
        end: i32,
    ) -> Result<FeatureMatrix> {
        if start > end {
            return Err(Error::InvalidArgument(format!("year range {start}..={end}")));
        }
        for &c in concepts {
            self.check(c)?;
        }
        let rows: Vec<Vec<[f64; N_FEATURES]>> =
            concepts.par_iter().map(|&c| self.series(c, start, end)).collect();
        Ok(FeatureMatrix {
            concepts: concepts.iter().map(|&c| names[c].clone()).collect(),
            start_year: start,
            end_year: end,
            rows,
        })
    }
}

/// Dense per-concept feature series; `rows[concept][year - start_year]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub concepts: Vec<String>,
    pub start_year: i32,
    pub end_year: i32,
    pub rows: Vec<Vec<[f64; N_FEATURES]>>,
}

impl FeatureMatrix {
    pub fn n_years(&self) -> usize {
        (self.end_year - self.start_year + 1) as usize
    }

    pub fn index_of(&self, concept: &str) -> Option<usize> {
        self.concepts.iter().position(|c| c == concept)
    }

    /// Row for (concept index, year); zeros outside the covered range.
    pub fn row(&self, concept: usize, year: i32) -> [f64; N_FEATURES] {
        if year < self.start_year || year > self.end_year {
            return [0.0; N_FEATURES];
        }
        self.rows[concept][(year - self.start_year) as usize]
    }

    /// `concept,year,<feature names>` header then one row per (concept, year).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("concept,year");
        for name in FEATURE_NAMES {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (c, series) in self.concepts.iter().zip(&self.rows) {
            for (offset, row) in series.iter().enumerate() {
                write!(out, "{c},{}", self.start_year + offset as i32).unwrap();
                for v in row {
                    write!(out, ",{v}").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_csv(contents: &str) -> Result<FeatureMatrix> {
        let mut lines = contents
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty feature file".into()))?;
        let expected: Vec<&str> = ["concept", "year"].into_iter().chain(FEATURE_NAMES).collect();
        if header.split(',').collect::<Vec<_>>() != expected {
            return Err(Error::Parse(format!("unexpected feature header `{header}`")));
        }
        let mut concepts: Vec<String> = Vec::new();
        let mut rows: Vec<Vec<(i32, [f64; N_FEATURES])>> = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse(format!("feature row `{line}`"));
            if parts.len() != N_FEATURES + 2 {
                return Err(bad());
            }
            let year: i32 = parts[1].parse().map_err(|_| bad())?;
            let mut vals = [0.0; N_FEATURES];
            for (v, p) in vals.iter_mut().zip(&parts[2..]) {
                *v = p.parse().map_err(|_| bad())?;
            }
            if concepts.last().map(String::as_str) != Some(parts[0]) {
                concepts.push(parts[0].to_string());
                rows.push(Vec::new());
            }
            rows.last_mut().expect("pushed").push((year, vals));
        }
        let start_year = rows.first().and_then(|r| r.first()).map_or(0, |r| r.0);
        let end_year = rows.first().and_then(|r| r.last()).map_or(-1, |r| r.0);
        let mut dense = Vec::with_capacity(rows.len());
        for series in rows {
            let years: Vec<i32> = series.iter().map(|r| r.0).collect();
            if years != (start_year..=end_year).collect::<Vec<_>>() {
                return Err(Error::Parse("feature rows are not a dense year range".into()));
            }
            dense.push(series.into_iter().map(|r| r.1).collect());
        }
        Ok(FeatureMatrix {
            concepts,
            start_year,
            end_year,
            rows: dense,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::corpus::{AuthorRef, CorpusId, DisciplineWeight};
    use crate::graph::{build_snapshots, SnapshotMode};

    struct Paper {
        year: i32,
        authors: Vec<(&'static str, Affiliation)>,
        venue: Option<&'static str>,
        codes: Vec<(&'static str, f64)>,
        text: String,
        concepts: Vec<usize>,
    }

    fn paper(year: i32, authors: &[&'static str], concepts: &[usize]) -> Paper {
        Paper {
            year,
            authors: authors.iter().map(|a| (*a, Affiliation::Academic)).collect(),
            venue: None,
            codes: Vec::new(),
            text: "plain words here".into(),
            concepts: concepts.to_vec(),
        }
    }

    fn to_document(i: usize, p: &Paper) -> Document {
        Document {
            doc_id: format!("p{i}"),
            corpus_id: CorpusId::Papers,
            year: p.year,
            title: p.text.clone(),
            abstract_text: String::new(),
            authors: p
                .authors
                .iter()
                .map(|(a, k)| AuthorRef {
                    author_id: a.to_string(),
                    affiliation_kind: *k,
                })
                .collect(),
            venue_id: p.venue.map(str::to_string),
            discipline_codes: p
                .codes
                .iter()
                .map(|(c, w)| DisciplineWeight {
                    code: c.to_string(),
                    weight: *w,
                })
                .collect(),
            cited_venue_ids: None,
        }
    }

    struct Fixture {
        engine: FeatureEngine,
        start: i32,
        end: i32,
    }

    fn engine(papers: &[Paper], n_concepts: usize, links: &VenueLinkTable, easy: &EasyWordList) -> Fixture {
        let docs: Vec<Document> = papers.iter().enumerate().map(|(i, p)| to_document(i, p)).collect();
        let refs: Vec<&Document> = docs.iter().collect();
        let doc_concepts: Vec<DocConcepts> = papers
            .iter()
            .enumerate()
            .map(|(i, p)| DocConcepts::new(format!("p{i}"), p.year, p.concepts.clone()))
            .collect();
        let start = papers.iter().map(|p| p.year).min().unwrap_or(2000);
        let end = papers.iter().map(|p| p.year).max().unwrap_or(2000);
        let graph = build_snapshots(&doc_concepts, &vec![None; n_concepts], start..=end, SnapshotMode::Cumulative).unwrap();
        let lexicon = SentimentLexicon::new(["good".to_string()], ["bad".to_string()]).unwrap();
        let engine = FeatureEngine::new(&FeatureInputs {
            papers: &refs,
            doc_concepts: &doc_concepts,
            emergence: &vec![start; n_concepts],
            venue_links: links,
            taxonomy: &Taxonomy::default(),
            lexicon: &lexicon,
            easy_words: easy,
            graph: &graph,
            config: FeatureConfig::default(),
        })
        .unwrap();
        Fixture { engine, start, end }
    }

    fn simple(papers: &[Paper], n_concepts: usize) -> FeatureEngine {
        engine(papers, n_concepts, &VenueLinkTable::default(), &EasyWordList::seed()).engine
    }

    #[test]
    fn hype_examples() {
        let e = simple(&[paper(2000, &["a", "b"], &[0]), paper(2001, &["b", "c"], &[0]), paper(2003, &["z"], &[1])], 2);
        assert_eq!(e.hype_features(0, 2002).unwrap(), (0.0, 0.0));
        assert_eq!(e.hype_features(0, 2000).unwrap(), (2.0, 0.0));
        assert_eq!(e.hype_features(0, 2001).unwrap(), (2.0, 1.0));
        assert!(matches!(e.hype_features(2, 2001), Err(Error::UnknownConcept(_))));
    }

    #[test]
    fn bridge_examples() {
        let mut one = paper(2000, &["a"], &[0]);
        one.codes = vec![("engineering", 1.0)];
        let mut two = paper(2000, &["a"], &[1]);
        two.codes = vec![("social", 0.5), ("humanities", 0.5)];
        let mut three = paper(2000, &["a"], &[2]);
        three.codes = vec![("social", 1.0)];
        let e = simple(&[one, two, three], 3);
        assert_eq!(e.bridge_features(0, 2000).unwrap(), (0.0, 1.0));
        let (h, eng) = e.bridge_features(1, 2000).unwrap();
        assert!((h - std::f64::consts::LN_2).abs() < 1e-12 && eng == 0.0);
        assert_eq!(e.bridge_features(2, 2000).unwrap(), (0.0, 0.0));
        assert_eq!(e.bridge_features(2, 2001).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn ideational_examples() {
        let words = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];
        let easy = EasyWordList::new(words.iter().map(|w| w.to_string())).unwrap();
        let mut p = paper(2000, &["a"], &[0]);
        p.text = words.join(" ");
        let f = engine(&[p], 1, &VenueLinkTable::default(), &easy);
        let (emo, acc) = f.engine.ideational_features(0, 2000).unwrap();
        assert_eq!(emo, 0.0);
        assert!((acc - 0.496).abs() < 1e-12, "{acc}");

        let mut q = paper(2000, &["a"], &[0]);
        q.text = "good bad one two".into();
        let f = engine(&[q], 1, &VenueLinkTable::default(), &easy);
        assert_eq!(f.engine.ideational_features(0, 2000).unwrap().0, 0.5);
    }

    #[test]
    fn resonance_examples() {
        let cited = vec!["v1".to_string(), "v2".to_string()];
        let links = VenueLinkTable::from_citations([(1999, cited.as_slice())]);
        let mut a = paper(2000, &[], &[0]);
        a.venue = Some("v1");
        let mut b = paper(2000, &[], &[0]);
        b.venue = Some("v2");
        b.authors = vec![
            ("i", Affiliation::Industry),
            ("k", Affiliation::Academic),
            ("u", Affiliation::Unknown),
        ];
        let f = engine(&[a, b], 1, &links, &EasyWordList::seed());
        let (linkage, share) = f.engine.resonance_features(0, 2000).unwrap();
        assert_eq!(linkage, 1.0);
        assert!((share - 1.0 / 3.0).abs() < 1e-15);
    }

    const AUTHORS: [&str; 12] = ["a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9", "a10", "a11"];
    const VENUES: [&str; 5] = ["v0", "v1", "v2", "v3", "v4"];
    const CODES: [&str; 6] = ["agriculture", "bio_health", "engineering", "humanities", "physical_math", "social"];
    const WORDS: [&str; 6] = ["good", "bad", "cell", "model", "the", "signal"];

    fn random_papers(seed: u64, n_concepts: usize) -> Vec<Paper> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..150)
            .map(|_| {
                let n_auth = rng.gen_range(0..4);
                let affiliations = [Affiliation::Academic, Affiliation::Industry, Affiliation::Unknown];
                let n_words = rng.gen_range(0..12);
                let mut text: Vec<&str> = (0..n_words).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
                if n_words > 4 {
                    text.insert(3, ".");
                }
                Paper {
                    year: rng.gen_range(2000..2008),
                    authors: (0..n_auth)
                        .map(|_| (AUTHORS[rng.gen_range(0..AUTHORS.len())], affiliations[rng.gen_range(0..3)]))
                        .collect(),
                    venue: rng.gen_bool(0.8).then(|| VENUES[rng.gen_range(0..VENUES.len())]),
                    codes: (0..rng.gen_range(0..3))
                        .map(|_| (CODES[rng.gen_range(0..CODES.len())], rng.gen_range(0.1..1.0)))
                        .collect(),
                    text: text.join(" "),
                    concepts: (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..n_concepts)).collect(),
                }
            })
            .collect()
    }

    fn random_links(seed: u64) -> VenueLinkTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cites: Vec<(i32, Vec<String>)> = (0..6)
            .map(|_| (rng.gen_range(1998..2008), vec![VENUES[rng.gen_range(0..VENUES.len())].to_string()]))
            .collect();
        VenueLinkTable::from_citations(cites.iter().map(|(y, v)| (*y, v.as_slice())))
    }

    #[test]
    fn features_match_recount_oracles() {
        let n = 6;
        for seed in 0..5 {
            let papers = random_papers(seed, n);
            let links = random_links(seed + 100);
            let easy = EasyWordList::new(["the", "cell"].iter().map(|w| w.to_string())).unwrap();
            let f = engine(&papers, n, &links, &easy);
            for c in 0..n {
                let mine: Vec<&Paper> = papers.iter().filter(|p| p.concepts.contains(&c)).collect();
                for year in f.start..=f.end {
                    let now: Vec<&&Paper> = mine.iter().filter(|p| p.year == year).collect();

                    let current: HashSet<&str> = now.iter().flat_map(|p| p.authors.iter().map(|a| a.0)).collect();
                    let before: HashSet<&str> = mine
                        .iter()
                        .filter(|p| p.year < year)
                        .flat_map(|p| p.authors.iter().map(|a| a.0))
                        .collect();
                    let hype = (current.len() as f64, current.intersection(&before).count() as f64);
                    assert_eq!(f.engine.hype_features(c, year).unwrap(), hype);

                    let mut mass: HashMap<&str, f64> = HashMap::new();
                    for p in &now {
                        for (code, w) in &p.codes {
                            *mass.entry(code).or_default() += w;
                        }
                    }
                    let total: f64 = mass.values().sum();
                    let (h, eng) = f.engine.bridge_features(c, year).unwrap();
                    if total == 0.0 {
                        assert_eq!((h, eng), (0.0, 0.0));
                    } else {
                        let want_h: f64 = mass.values().map(|m| -(m / total) * (m / total).ln()).sum();
                        let want_e = mass.get("engineering").copied().unwrap_or(0.0) / total;
                        assert!((h - want_h.max(0.0)).abs() < 1e-12 && (eng - want_e).abs() < 1e-12);
                    }

                    let texts: Vec<(usize, usize, usize, usize)> = now
                        .iter()
                        .map(|p| {
                            let toks: Vec<&str> = p.text.split_whitespace().filter(|w| *w != ".").collect();
                            let emo = toks.iter().filter(|w| ["good", "bad"].contains(w)).count();
                            let hard = toks.iter().filter(|w| !["the", "cell"].contains(w)).count();
                            let sentences = if toks.is_empty() { 0 } else if p.text.contains('.') { 2 } else { 1 };
                            (toks.len(), emo, hard, sentences)
                        })
                        .filter(|t| t.0 > 0)
                        .collect();
                    let (emo, acc) = f.engine.ideational_features(c, year).unwrap();
                    if texts.is_empty() {
                        assert_eq!((emo, acc), (0.0, 0.0));
                    } else {
                        let want_emo = texts.iter().map(|t| t.1 as f64 / t.0 as f64).sum::<f64>() / texts.len() as f64;
                        let score = |t: &(usize, usize, usize, usize)| {
                            let pdw = t.2 as f64 / t.0 as f64;
                            0.1579 * 100.0 * pdw + 0.0496 * (t.0 as f64 / t.3 as f64) + if pdw > 0.05 { 3.6365 } else { 0.0 }
                        };
                        let tokens: f64 = texts.iter().map(|t| t.0 as f64).sum();
                        let want_acc = texts.iter().map(|t| t.0 as f64 * score(t)).sum::<f64>() / tokens;
                        assert!((emo - want_emo).abs() < 1e-12 && (acc - want_acc).abs() < 1e-9, "{acc} {want_acc}");
                    }

                    let venues: HashSet<&str> = now.iter().filter_map(|p| p.venue).collect();
                    let linked = venues.iter().filter(|v| links.contains(year, v)).count();
                    let mut industry: HashMap<&str, bool> = HashMap::new();
                    for p in &now {
                        for (a, k) in &p.authors {
                            *industry.entry(a).or_default() |= *k == Affiliation::Industry;
                        }
                    }
                    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
                    let want = (
                        ratio(linked, venues.len()),
                        ratio(industry.values().filter(|&&i| i).count(), industry.len()),
                    );
                    assert_eq!(f.engine.resonance_features(c, year).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn matrix_matches_per_year_ops() {
        let n = 6;
        let papers = random_papers(9, n);
        let f = engine(&papers, n, &random_links(19), &EasyWordList::seed());
        let names: Vec<String> = (0..n).map(|c| format!("c{c}")).collect();
        let all: Vec<usize> = (0..n).collect();
        let m = f.engine.feature_matrix(&all, &names, f.start - 1, f.end + 1).unwrap();
        assert_eq!(m.n_years(), (f.end - f.start + 3) as usize);
        for c in 0..n {
            for year in f.start - 1..=f.end + 1 {
                let row = f.engine.feature_row(c, year).unwrap();
                let got = m.row(c, year);
                for k in 0..N_FEATURES {
                    assert!((got[k] - row[k]).abs() < 1e-12, "{c} {year} {}", FEATURE_NAMES[k]);
                }
            }
        }
        assert!(f.engine.feature_matrix(&[n], &names, f.start, f.end).is_err());
        assert!(f.engine.feature_matrix(&all, &names, f.end, f.start).is_err());
        let parsed = FeatureMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(parsed, m);
    }
}
