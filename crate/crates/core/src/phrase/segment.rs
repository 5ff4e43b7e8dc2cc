use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ConceptVocabulary;
use crate::corpus::Document;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub doc_id: String,
    pub phrase: String,
    /// Token span, end exclusive.
    pub start: usize,
    pub end: usize,
}

/// Greedy left-to-right longest-match segmenter over a fixed vocabulary.
#[derive(Debug, Clone)]
pub struct Segmenter {
    ids: HashMap<String, usize>,
    phrases: Vec<String>,
    first_tokens: HashSet<String>,
    max_len: usize,
}

impl Segmenter {
    pub fn new(vocab: &ConceptVocabulary) -> Self {
        let phrases: Vec<String> = vocab.phrases().map(str::to_string).collect();
        let ids = phrases.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let first_tokens = phrases
            .iter()
            .map(|p| p.split(' ').next().unwrap_or_default().to_string())
            .collect();
        Segmenter {
            ids,
            phrases,
            first_tokens,
            max_len: vocab.max_tokens(),
        }
    }

    pub fn phrase(&self, id: usize) -> &str {
        &self.phrases[id]
    }

    pub fn id_of(&self, phrase: &str) -> Option<usize> {
        self.ids.get(phrase).copied()
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// (concept id, start, end) triples in token order.
    pub fn segment_tokens(&self, tokens: &[String]) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        let mut key = String::new();
        while i < tokens.len() {
            if !self.first_tokens.contains(&tokens[i]) {
                i += 1;
                continue;
            }
            let longest = self.max_len.min(tokens.len() - i);
            let mut hit = None;
            for len in (1..=longest).rev() {
                key.clear();
                for (j, t) in tokens[i..i + len].iter().enumerate() {
                    if j > 0 {
                        key.push(' ');
                    }
                    key.push_str(t);
                }
                if let Some(&id) = self.ids.get(key.as_str()) {
                    hit = Some((id, len));
                    break;
                }
            }
            match hit {
                Some((id, len)) => {
                    out.push((id, i, i + len));
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    pub fn segment(&self, doc_id: &str, tokens: &[String]) -> Vec<Mention> {
        self.segment_tokens(tokens)
            .into_iter()
            .map(|(id, start, end)| Mention {
                doc_id: doc_id.to_string(),
                phrase: self.phrases[id].clone(),
                start,
                end,
            })
            .collect()
    }
}

/// Segments a document's title and abstract. Builds a throwaway segmenter;
/// reuse a [`Segmenter`] when processing a corpus.
pub fn segment_document(document: &Document, vocabulary: &ConceptVocabulary) -> Vec<Mention> {
    Segmenter::new(vocabulary).segment(&document.doc_id, &tokenize(&document.text()))
}
