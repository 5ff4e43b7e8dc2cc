//! In-memory chain from documents to a feature matrix and labels.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::{CorpusId, Document, Taxonomy, VenueLinkTable};
use crate::dataset::ConceptLabels;
use crate::features::{EasyWordList, FeatureConfig, FeatureEngine, FeatureInputs, FeatureMatrix, SentimentLexicon};
use crate::graph::{build_snapshots, DynamicGraph, SnapshotMode};
use crate::phrase::{mine_vocabulary, ConceptVocabulary, MinerConfig, Segmenter, Stoplist};
use crate::registry::{
    build_registry, build_registry_with_cutoff, compute_emergence_years, field_usage, yearly_new_counts, BurnInResult,
    ConceptRegistry, DocConcepts, RegistryConfig, RegistryInputs,
};
use crate::text::{sentences, tokenize};
use crate::{Error, Result};

/// Lexicons, word lists and taxonomy shared by the stages.
#[derive(Debug, Clone)]
pub struct Resources {
    pub taxonomy: Taxonomy,
    pub lexicon: SentimentLexicon,
    pub easy_words: EasyWordList,
    pub stoplists: Vec<Stoplist>,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            taxonomy: Taxonomy::default(),
            lexicon: SentimentLexicon::seed(),
            easy_words: EasyWordList::seed(),
            stoplists: vec![Stoplist::generic(), Stoplist::publishers()],
        }
    }
}

/// Mines the vocabulary from papers. Each sentence is a separate unit so
/// n-grams never span sentence boundaries.
pub fn mine_papers(papers: &[&Document], config: &MinerConfig, stoplists: &[Stoplist]) -> Result<ConceptVocabulary> {
    let units: Vec<Vec<String>> = papers
        .par_iter()
        .flat_map_iter(|d| sentences(&d.text()))
        .filter(|s| !s.is_empty())
        .collect();
    mine_vocabulary(units.iter().map(Vec::as_slice), config, stoplists)
}

/// Vocabulary ids mentioned in each document.
pub fn segment_all(docs: &[&Document], segmenter: &Segmenter) -> Vec<DocConcepts> {
    docs.par_iter()
        .map(|d| {
            let ids = segmenter
                .segment_tokens(&tokenize(&d.text()))
                .into_iter()
                .map(|(id, _, _)| id)
                .collect();
            DocConcepts::new(d.doc_id.clone(), d.year, ids)
        })
        .collect()
}

/// Registry over every vocabulary phrase. The burn-in cutoff is searched
/// unless `fixed_cutoff` is given.
pub fn build_study_registry(
    papers: &[&Document],
    targets: &BTreeMap<CorpusId, Vec<&Document>>,
    vocabulary: &ConceptVocabulary,
    taxonomy: &Taxonomy,
    config: &RegistryConfig,
    fixed_cutoff: Option<i32>,
) -> Result<ConceptRegistry> {
    let segmenter = Segmenter::new(vocabulary);
    let phrases: Vec<String> = vocabulary.phrases().map(str::to_string).collect();
    let paper_concepts = segment_all(papers, &segmenter);
    let target_concepts: BTreeMap<CorpusId, Vec<DocConcepts>> = targets
        .iter()
        .map(|(&c, docs)| (c, segment_all(docs, &segmenter)))
        .collect();
    let usage = field_usage(papers, &paper_concepts, taxonomy);
    let inputs = RegistryInputs {
        phrases: &phrases,
        papers: &paper_concepts,
        targets: &target_concepts,
        field_usage: &usage,
    };
    match fixed_cutoff {
        None => build_registry(&inputs, config),
        Some(cutoff_year) => {
            let emergence = compute_emergence_years(&paper_concepts);
            let burn_in = BurnInResult {
                cutoff_year,
                yearly_new_counts: yearly_new_counts(&emergence),
                diagnostics: Vec::new(),
            };
            build_registry_with_cutoff(&inputs, config, &emergence, Some(burn_in))
        }
    }
}

/// Study concepts with dense ids (registry order) and the papers that
/// mention at least one of them.
pub struct StudyFrame<'a> {
    pub names: Vec<String>,
    pub emergence: Vec<i32>,
    pub transfer: Vec<Option<i32>>,
    pub fields: Vec<Option<String>>,
    pub papers: Vec<&'a Document>,
    pub doc_concepts: Vec<DocConcepts>,
    pub start_year: i32,
    pub end_year: i32,
}

impl<'a> StudyFrame<'a> {
    /// `start_year` is the first year after the burn-in cutoff; the frame
    /// ends at the last paper year.
    pub fn new(
        registry: &ConceptRegistry,
        papers: &[&'a Document],
        vocabulary: &ConceptVocabulary,
        target: CorpusId,
        start_year: i32,
    ) -> Result<StudyFrame<'a>> {
        if registry.is_empty() {
            return Err(Error::Degenerate("the registry holds no study concepts".into()));
        }
        let end_year = papers
            .iter()
            .map(|d| d.year)
            .max()
            .ok_or_else(|| Error::Degenerate("no papers".into()))?;
        if end_year < start_year {
            return Err(Error::InsufficientHistory(format!(
                "papers end in {end_year}, before the study start {start_year}"
            )));
        }
        let segmenter = Segmenter::new(vocabulary);
        // vocabulary id -> dense registry id
        let dense: Vec<Option<usize>> = (0..segmenter.len())
            .map(|id| registry.index_of(segmenter.phrase(id)))
            .collect();
        let segmented = segment_all(papers, &segmenter);
        let mut kept_papers = Vec::new();
        let mut doc_concepts = Vec::new();
        for (doc, dc) in papers.iter().zip(segmented) {
            let ids: Vec<usize> = dc.concepts.iter().filter_map(|&c| dense[c]).collect();
            if !ids.is_empty() {
                kept_papers.push(*doc);
                doc_concepts.push(DocConcepts::new(dc.doc_id, dc.year, ids));
            }
        }
        Ok(StudyFrame {
            names: registry.records.iter().map(|r| r.phrase.clone()).collect(),
            emergence: registry.records.iter().map(|r| r.emergence_year).collect(),
            transfer: registry.records.iter().map(|r| r.transfer(target)).collect(),
            fields: registry.records.iter().map(|r| r.field.clone()).collect(),
            papers: kept_papers,
            doc_concepts,
            start_year,
            end_year,
        })
    }

    pub fn labels(&self) -> ConceptLabels {
        ConceptLabels {
            emergence: self.emergence.clone(),
            transfer: self.transfer.clone(),
        }
    }

    pub fn graph(&self, mode: SnapshotMode) -> Result<DynamicGraph> {
        build_snapshots(&self.doc_concepts, &self.transfer, self.start_year..=self.end_year, mode)
    }

    pub fn features(
        &self,
        graph: &DynamicGraph,
        venue_links: &VenueLinkTable,
        resources: &Resources,
        config: FeatureConfig,
    ) -> Result<FeatureMatrix> {
        let engine = FeatureEngine::new(&FeatureInputs {
            papers: &self.papers,
            doc_concepts: &self.doc_concepts,
            emergence: &self.emergence,
            venue_links,
            taxonomy: &resources.taxonomy,
            lexicon: &resources.lexicon,
            easy_words: &resources.easy_words,
            graph,
            config,
        })?;
        let all: Vec<usize> = (0..self.names.len()).collect();
        engine.feature_matrix(&all, &self.names, self.start_year, self.end_year)
    }
}
