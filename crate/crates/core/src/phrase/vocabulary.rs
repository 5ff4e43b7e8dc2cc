use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::CandidatePhrase;
use crate::io_util::parse_word_list;
use crate::{Error, Result};

/// Canonical form: lowercase tokens joined by single spaces.
pub const NORMALIZATION_RULE: &str = "lowercase-space-joined";

/// A phrase list. Matching is on the canonical phrase string.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    pub name: String,
    phrases: BTreeSet<String>,
}

impl Stoplist {
    pub fn new(name: &str, phrases: impl IntoIterator<Item = String>) -> Self {
        Stoplist {
            name: name.to_string(),
            phrases: phrases
                .into_iter()
                .map(|p| crate::text::tokenize(&p).join(" "))
                .filter(|p| !p.is_empty())
                .collect(),
        }
    }

    pub fn parse(name: &str, contents: &str) -> Self {
        Stoplist::new(name, parse_word_list(contents))
    }

    /// Function words and boilerplate phrases of scientific writing.
    pub fn generic() -> Self {
        Stoplist::parse("generic", include_str!("../../data/stoplist_generic.txt"))
    }

    /// Publisher names and copyright boilerplate.
    pub fn publishers() -> Self {
        Stoplist::parse("publishers", include_str!("../../data/stoplist_publishers.txt"))
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.phrases.contains(phrase)
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.phrases.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhraseStats {
    pub frequency: u64,
    pub quality: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConceptVocabulary {
    phrases: BTreeMap<String, PhraseStats>,
    pub normalization: String,
}

impl ConceptVocabulary {
    pub fn from_phrases(phrases: impl IntoIterator<Item = (String, PhraseStats)>) -> Self {
        ConceptVocabulary {
            phrases: phrases
                .into_iter()
                .map(|(p, s)| (crate::text::tokenize(&p).join(" "), s))
                .filter(|(p, _)| !p.is_empty())
                .collect(),
            normalization: NORMALIZATION_RULE.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.phrases.contains_key(phrase)
    }

    pub fn stats(&self, phrase: &str) -> Option<PhraseStats> {
        self.phrases.get(phrase).copied()
    }

    /// Phrases in sorted order; the position is the concept id used by the
    /// segmenter.
    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.phrases.keys().map(String::as_str)
    }

    pub fn max_tokens(&self) -> usize {
        self.phrases
            .keys()
            .map(|p| p.split(' ').count())
            .max()
            .unwrap_or(0)
    }

    /// `phrase<TAB>frequency<TAB>quality`, one per line, sorted by phrase.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (p, s) in &self.phrases {
            writeln!(out, "{p}\t{}\t{}", s.frequency, s.quality).unwrap();
        }
        out
    }

    pub fn from_tsv(contents: &str) -> Result<Self> {
        let mut phrases = Vec::new();
        for (i, line) in contents.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            let bad = || Error::Parse(format!("vocabulary line {}: `{line}`", i + 1));
            if parts.len() != 3 {
                return Err(bad());
            }
            let frequency = parts[1].parse().map_err(|_| bad())?;
            let quality = parts[2].parse().map_err(|_| bad())?;
            phrases.push((parts[0].to_string(), PhraseStats { frequency, quality }));
        }
        Ok(ConceptVocabulary::from_phrases(phrases))
    }
}

/// Keeps candidates with `quality >= threshold`, at least `min_tokens`
/// tokens, and absent from every stoplist.
pub fn clean_vocabulary(
    candidates: &[CandidatePhrase],
    quality_threshold: f64,
    stoplists: &[Stoplist],
    min_tokens: usize,
) -> ConceptVocabulary {
    ConceptVocabulary::from_phrases(
        candidates
            .iter()
            .filter(|c| c.quality >= quality_threshold && c.tokens.len() >= min_tokens)
            .map(|c| (c.phrase(), c))
            .filter(|(p, _)| !stoplists.iter().any(|s| s.contains(p)))
            .map(|(p, c)| {
                (
                    p,
                    PhraseStats {
                        frequency: c.frequency,
                        quality: c.quality,
                    },
                )
            }),
    )
}
