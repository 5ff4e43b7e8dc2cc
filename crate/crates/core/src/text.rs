//! Tokenization shared by mining, segmentation and the text features.

/// Lowercases, splits on any non-alphanumeric character and drops tokens made
/// only of digits. Hyphenated words come out as separate tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !t.chars().all(|c| c.is_ascii_digit() || c.is_numeric()))
        .map(str::to_lowercase)
        .collect()
}

/// Splits on sentence terminators and tokenizes each sentence. Sentences
/// without tokens are dropped.
pub fn sentences(text: &str) -> Vec<Vec<String>> {
    text.split(['.', '!', '?', ';'])
        .map(tokenize)
        .filter(|s| !s.is_empty())
        .collect()
}
