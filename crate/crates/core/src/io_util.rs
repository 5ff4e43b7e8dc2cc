//! Small helpers for artifact files: digests and comment headers.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Header line prefixed to every tabular artifact so each file carries the
/// run's config digest and seed.
pub fn meta_header(config_digest: &str, seed: u64) -> String {
    format!("# config_digest={config_digest} seed={seed}\n")
}

/// Reads non-empty lines, skipping `#` comment lines.
pub fn data_lines(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line);
    }
    Ok(out)
}

/// Parses a word list: one entry per line, `#` comments and blanks ignored,
/// entries lowercased and trimmed.
pub fn parse_word_list(contents: &str) -> Vec<String> {
    contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn word_list_skips_comments() {
        let words = parse_word_list("# header\nGood\n\n  bad \n");
        assert_eq!(words, vec!["good", "bad"]);
    }
}
