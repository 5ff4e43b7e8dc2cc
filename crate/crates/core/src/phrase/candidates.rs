use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePhrase {
    pub tokens: Vec<String>,
    pub frequency: u64,
    /// PMI-style cohesion; 0 for unigrams, may be negative for n >= 2.
    pub cohesion: f64,
    pub quality: f64,
}

impl CandidatePhrase {
    pub fn phrase(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Level-wise n-gram counts over interned tokens.
///
/// Lengths above one are only counted when both (n-1)-gram sub-windows reach
/// the frequency floor; every pruned n-gram is provably below the floor, so
/// the retained counts are exact.
#[derive(Debug, Clone, Default)]
pub struct NgramCounts {
    token_ids: HashMap<String, u32>,
    tokens: Vec<String>,
    /// levels[n-1]: n-gram -> count, only n-grams that were counted
    levels: Vec<HashMap<Vec<u32>, u64>>,
    /// totals[n-1]: number of n-gram positions of length n in the corpus
    totals: Vec<u64>,
}

impl NgramCounts {
    pub fn count<'a>(
        docs: impl IntoIterator<Item = &'a [String]>,
        max_len: usize,
        min_freq: u64,
    ) -> Result<NgramCounts> {
        if max_len == 0 {
            return Err(Error::InvalidArgument("max_len must be >= 1".into()));
        }
        if min_freq == 0 {
            return Err(Error::InvalidArgument("min_freq must be >= 1".into()));
        }
        let mut counts = NgramCounts {
            totals: vec![0; max_len],
            ..Default::default()
        };
        let mut streams: Vec<Vec<u32>> = Vec::new();
        for doc in docs {
            let ids = doc.iter().map(|t| counts.intern(t)).collect();
            streams.push(ids);
        }
        for n in 1..=max_len {
            let mut level: HashMap<Vec<u32>, u64> = HashMap::new();
            for s in &streams {
                if s.len() < n {
                    continue;
                }
                counts.totals[n - 1] += (s.len() - n + 1) as u64;
                for w in s.windows(n) {
                    if n > 1 {
                        let prev = &counts.levels[n - 2];
                        let frequent = |g: &[u32]| prev.get(g).is_some_and(|&c| c >= min_freq);
                        if !frequent(&w[..n - 1]) || !frequent(&w[1..]) {
                            continue;
                        }
                    }
                    *level.entry(w.to_vec()).or_insert(0) += 1;
                }
            }
            counts.levels.push(level);
        }
        Ok(counts)
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.token_ids.get(token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.to_string());
        self.token_ids.insert(token.to_string(), id);
        id
    }

    pub fn max_len(&self) -> usize {
        self.levels.len()
    }

    /// Corpus count of an n-gram, or `None` when it was pruned as infrequent
    /// or the length exceeds the counted range.
    pub fn frequency(&self, tokens: &[&str]) -> Option<u64> {
        let ids: Option<Vec<u32>> = tokens.iter().map(|t| self.token_ids.get(*t).copied()).collect();
        let ids = ids?;
        self.levels.get(ids.len().checked_sub(1)?)?.get(&ids).copied()
    }

    pub fn total(&self, n: usize) -> u64 {
        self.totals.get(n - 1).copied().unwrap_or(0)
    }

    fn unigram_probability(&self, id: u32) -> f64 {
        self.levels[0][&vec![id]] as f64 / self.totals[0] as f64
    }
}

/// Every n-gram (1 <= n <= max_len) with frequency >= min_freq, sorted by
/// phrase text. Cohesion and quality are left at zero until scored.
pub fn extract_candidates(
    counts: &NgramCounts,
    max_len: usize,
    min_freq: u64,
) -> Result<Vec<CandidatePhrase>> {
    if max_len == 0 || min_freq == 0 {
        return Err(Error::InvalidArgument("max_len and min_freq must be >= 1".into()));
    }
    let mut out: Vec<CandidatePhrase> = counts
        .levels
        .iter()
        .take(max_len)
        .flat_map(|level| level.iter())
        .filter(|(_, &c)| c >= min_freq)
        .map(|(ids, &c)| CandidatePhrase {
            tokens: ids.iter().map(|&i| counts.tokens[i as usize].clone()).collect(),
            frequency: c,
            cohesion: 0.0,
            quality: 0.0,
        })
        .collect();
    out.sort_by(|a, b| a.tokens.cmp(&b.tokens));
    Ok(out)
}

/// Fills cohesion and quality:
/// `cohesion = ln(P(w1..wn) / prod P(wi))`, `quality = 1 / (1 + exp(-cohesion / temperature))`.
/// Unigrams get cohesion 0 and quality 1.
pub fn score_candidates(candidates: &mut [CandidatePhrase], counts: &NgramCounts, temperature: f64) {
    for cand in candidates.iter_mut() {
        let n = cand.tokens.len();
        if n == 1 {
            cand.cohesion = 0.0;
            cand.quality = 1.0;
            continue;
        }
        let joint = cand.frequency as f64 / counts.total(n) as f64;
        let independent: f64 = cand
            .tokens
            .iter()
            .map(|t| counts.unigram_probability(counts.token_ids[t]))
            .product();
        cand.cohesion = (joint / independent).ln();
        cand.quality = 1.0 / (1.0 + (-cand.cohesion / temperature).exp());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn run(docs: &[&str], max_len: usize, min_freq: u64) -> Vec<CandidatePhrase> {
        let toks: Vec<Vec<String>> = docs.iter().map(|d| tokenize(d)).collect();
        let counts = NgramCounts::count(toks.iter().map(Vec::as_slice), max_len, min_freq).unwrap();
        extract_candidates(&counts, max_len, min_freq).unwrap()
    }

    #[test]
    fn hand_countable_example() {
        let got = run(&["gene therapy gene therapy"], 2, 2);
        let got: Vec<(String, u64)> = got.iter().map(|c| (c.phrase(), c.frequency)).collect();
        assert_eq!(
            got,
            vec![
                ("gene".to_string(), 2),
                ("gene therapy".to_string(), 2),
                ("therapy".to_string(), 2)
            ]
        );
    }

    #[test]
    fn min_freq_above_max_count_is_empty() {
        assert!(run(&["gene therapy gene therapy"], 2, 3).is_empty());
        assert!(run(&[], 3, 1).is_empty());
    }

    #[test]
    fn invalid_parameters() {
        let docs: Vec<Vec<String>> = vec![];
        assert!(NgramCounts::count(docs.iter().map(Vec::as_slice), 0, 1).is_err());
        assert!(NgramCounts::count(docs.iter().map(Vec::as_slice), 2, 0).is_err());
    }

    #[test]
    fn planted_corpus_matches_brute_force_counter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let words: Vec<String> = (0..30).map(|i| format!("w{i}x")).collect();
        let planted = ["alpha beta", "gamma delta epsilon", "zeta eta"];
        let docs: Vec<String> = (0..200)
            .map(|_| {
                let mut parts: Vec<String> =
                    (0..12).map(|_| words.choose(&mut rng).unwrap().clone()).collect();
                for _ in 0..rng.gen_range(0..3) {
                    let p = planted.choose(&mut rng).unwrap();
                    let at = rng.gen_range(0..parts.len());
                    parts.insert(at, p.to_string());
                }
                parts.join(" ")
            })
            .collect();
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let got = run(&refs, 3, 4);

        let mut oracle: BTreeMap<Vec<String>, u64> = BTreeMap::new();
        for d in &docs {
            let t = tokenize(d);
            for n in 1..=3 {
                for w in t.windows(n) {
                    *oracle.entry(w.to_vec()).or_default() += 1;
                }
            }
        }
        let expected: Vec<(Vec<String>, u64)> =
            oracle.into_iter().filter(|(_, c)| *c >= 4).collect();
        let got: Vec<(Vec<String>, u64)> = got.into_iter().map(|c| (c.tokens, c.frequency)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn exclusive_pair_cohesion() {
        // "aa bb" always together; filler words elsewhere.
        let docs = ["aa bb c d", "aa bb e f", "c d e f"];
        let toks: Vec<Vec<String>> = docs.iter().map(|d| tokenize(d)).collect();
        let counts = NgramCounts::count(toks.iter().map(Vec::as_slice), 2, 1).unwrap();
        let mut cands = extract_candidates(&counts, 2, 1).unwrap();
        score_candidates(&mut cands, &counts, 2.0);
        let c = cands.iter().find(|c| c.phrase() == "aa bb").unwrap();
        // P(aa bb) = 2/9, P(aa) = P(bb) = 2/12
        let p_joint = 2.0 / 9.0;
        let p_w = 2.0_f64 / 12.0;
        let expected = (p_joint / (p_w * p_w)).ln();
        assert!((c.cohesion - expected).abs() < 1e-12);
        assert!(c.quality > 0.5);
        let uni = cands.iter().find(|c| c.phrase() == "aa").unwrap();
        assert_eq!((uni.cohesion, uni.quality), (0.0, 1.0));
    }

    fn synthetic_counts(unigrams: [u64; 2], bigram: u64, totals: [u64; 2]) -> NgramCounts {
        let mut counts = NgramCounts::default();
        counts.intern("a");
        counts.intern("b");
        counts.levels = vec![
            [(vec![0], unigrams[0]), (vec![1], unigrams[1])].into_iter().collect(),
            [(vec![0, 1], bigram)].into_iter().collect(),
        ];
        counts.totals = totals.to_vec();
        counts
    }

    fn score_pair(counts: &NgramCounts) -> CandidatePhrase {
        let mut cands = extract_candidates(counts, 2, 1).unwrap();
        score_candidates(&mut cands, counts, 2.0);
        cands.into_iter().find(|c| c.tokens.len() == 2).unwrap()
    }

    #[test]
    fn parts_only_together_gives_minus_log_joint() {
        // P(a b) = P(a) = P(b) = 0.3
        let c = score_pair(&synthetic_counts([3, 3], 3, [10, 10]));
        assert!((c.cohesion - (-(0.3_f64).ln())).abs() < 1e-12);
        assert!(c.cohesion > 0.0);
        assert!(c.quality > 0.5);
    }

    #[test]
    fn independent_words_have_zero_cohesion() {
        // P(a) = P(b) = 0.5, P(a b) = 0.25
        let c = score_pair(&synthetic_counts([5, 5], 25, [10, 100]));
        assert!(c.cohesion.abs() < 1e-12);
        assert!((c.quality - 0.5).abs() < 1e-12);
    }

    #[test]
    fn planted_phrases_outrank_random_bigrams() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let words: Vec<String> = (0..40).map(|i| format!("f{i}q")).collect();
        let planted: Vec<String> = (0..10).map(|i| format!("pa{i}z pb{i}z")).collect();
        let docs: Vec<Vec<String>> = (0..400)
            .map(|_| {
                let mut parts: Vec<String> =
                    (0..15).map(|_| words.choose(&mut rng).unwrap().clone()).collect();
                let p = planted.choose(&mut rng).unwrap();
                parts.insert(rng.gen_range(0..parts.len()), p.clone());
                tokenize(&parts.join(" "))
            })
            .collect();
        let counts = NgramCounts::count(docs.iter().map(Vec::as_slice), 2, 5).unwrap();
        let mut cands = extract_candidates(&counts, 2, 5).unwrap();
        score_candidates(&mut cands, &counts, 2.0);
        let (good, random): (Vec<_>, Vec<_>) = cands
            .iter()
            .filter(|c| c.tokens.len() == 2)
            .partition(|c| planted.contains(&c.phrase()));
        assert_eq!(good.len(), planted.len());
        let mut wins = 0usize;
        let mut total = 0usize;
        for g in &good {
            for r in &random {
                total += 1;
                if g.quality > r.quality {
                    wins += 1;
                }
            }
        }
        assert!(total > 0);
        assert!(wins as f64 / total as f64 >= 0.95, "{wins}/{total}");
    }
}
