//! Frequency and cohesion based phrase mining.
//!
//! Candidates are token n-grams above a frequency floor, scored by a
//! pointwise-mutual-information cohesion squashed into a quality in [0, 1].
//! The cleaned vocabulary drives greedy longest-match segmentation.

mod candidates;
mod segment;
mod vocabulary;

use serde::{Deserialize, Serialize};

pub use candidates::{extract_candidates, score_candidates, CandidatePhrase, NgramCounts};
pub use segment::{segment_document, Mention, Segmenter};
pub use vocabulary::{clean_vocabulary, ConceptVocabulary, PhraseStats, Stoplist};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinerConfig {
    pub max_len: usize,
    pub min_freq: u64,
    pub temperature: f64,
    pub quality_threshold: f64,
    pub min_tokens: usize,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            max_len: 4,
            min_freq: 5,
            temperature: 2.0,
            quality_threshold: 0.7,
            min_tokens: 1,
        }
    }
}

/// Runs counting, scoring and cleaning over pre-tokenized documents.
pub fn mine_vocabulary<'a>(
    docs: impl IntoIterator<Item = &'a [String]>,
    config: &MinerConfig,
    stoplists: &[Stoplist],
) -> crate::Result<ConceptVocabulary> {
    let counts = NgramCounts::count(docs, config.max_len, config.min_freq)?;
    let mut candidates = extract_candidates(&counts, config.max_len, config.min_freq)?;
    score_candidates(&mut candidates, &counts, config.temperature);
    Ok(clean_vocabulary(
        &candidates,
        config.quality_threshold,
        stoplists,
        config.min_tokens,
    ))
}
