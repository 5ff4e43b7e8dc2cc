use std::collections::BTreeSet;

use crate::io_util::parse_word_list;
use crate::{Error, Result};

/// Positive and negative word sets used for emotionality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentLexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl SentimentLexicon {
    pub fn new(
        positive: impl IntoIterator<Item = String>,
        negative: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let positive: BTreeSet<String> = positive.into_iter().collect();
        let negative: BTreeSet<String> = negative.into_iter().collect();
        if let Some(w) = positive.intersection(&negative).next() {
            return Err(Error::Parse(format!("`{w}` is both positive and negative")));
        }
        Ok(SentimentLexicon { positive, negative })
    }

    pub fn parse(positive: &str, negative: &str) -> Result<Self> {
        SentimentLexicon::new(parse_word_list(positive), parse_word_list(negative))
    }

    /// Bundled public seed lists.
    pub fn seed() -> Self {
        SentimentLexicon::parse(
            include_str!("../../data/sentiment_positive.txt"),
            include_str!("../../data/sentiment_negative.txt"),
        )
        .expect("bundled lexicon is disjoint")
    }

    pub fn is_positive(&self, word: &str) -> bool {
        self.positive.contains(word)
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative.contains(word)
    }

    pub fn is_emotional(&self, word: &str) -> bool {
        self.is_positive(word) || self.is_negative(word)
    }

    pub fn positive(&self) -> impl Iterator<Item = &str> {
        self.positive.iter().map(String::as_str)
    }

    pub fn negative(&self) -> impl Iterator<Item = &str> {
        self.negative.iter().map(String::as_str)
    }
}

/// Words treated as easy by the readability score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EasyWordList {
    words: BTreeSet<String>,
}

impl EasyWordList {
    pub fn new(words: impl IntoIterator<Item = String>) -> Result<Self> {
        let words: BTreeSet<String> = words.into_iter().collect();
        if words.is_empty() {
            return Err(Error::Parse("easy word list is empty".into()));
        }
        Ok(EasyWordList { words })
    }

    pub fn parse(contents: &str) -> Result<Self> {
        EasyWordList::new(parse_word_list(contents))
    }

    pub fn seed() -> Self {
        EasyWordList::parse(include_str!("../../data/easy_words.txt")).expect("bundled list is non-empty")
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_load() {
        let lex = SentimentLexicon::seed();
        assert!(lex.is_positive("improve"));
        assert!(lex.is_negative("failure"));
        assert!(!lex.is_emotional("the"));
        assert!(EasyWordList::seed().contains("water"));
    }

    #[test]
    fn overlap_and_empty_are_errors() {
        assert!(SentimentLexicon::parse("good\n", "good\n").is_err());
        assert!(EasyWordList::parse("# nothing\n").is_err());
    }
}
