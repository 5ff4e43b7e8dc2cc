use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CorpusId, Document};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoreConfig {
    pub year_min: i32,
    pub year_max: i32,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            year_min: 1900,
            year_max: 2100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number within the stream.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub count_ok: usize,
    pub count_rejected: usize,
    pub reject_reasons: Vec<Rejection>,
}

impl IngestReport {
    pub fn reasons(&self) -> Vec<&str> {
        self.reject_reasons.iter().map(|r| r.reason.as_str()).collect()
    }
}

#[derive(Debug, Default)]
struct CorpusData {
    docs: Vec<Document>,
    ids: HashMap<String, usize>,
    /// year -> document indices sorted by doc_id
    by_year: BTreeMap<i32, Vec<usize>>,
}

impl CorpusData {
    fn insert(&mut self, doc: Document) {
        let idx = self.docs.len();
        let slot = self.by_year.entry(doc.year).or_default();
        let pos = slot.partition_point(|&i| self.docs[i].doc_id < doc.doc_id);
        slot.insert(pos, idx);
        self.ids.insert(doc.doc_id.clone(), idx);
        self.docs.push(doc);
    }
}

/// Append-only document store with an in-memory (corpus, year) index.
///
/// With a backing directory every accepted record is appended to
/// `<dir>/<corpus>.jsonl`; reopening the directory rebuilds the index.
#[derive(Debug, Default)]
pub struct DocumentStore {
    dir: Option<PathBuf>,
    config: StoreConfig,
    corpora: BTreeMap<CorpusId, CorpusData>,
}

impl DocumentStore {
    pub fn in_memory(config: StoreConfig) -> Self {
        DocumentStore {
            dir: None,
            config,
            corpora: BTreeMap::new(),
        }
    }

    /// Opens (or creates) a store directory and loads any existing records.
    pub fn open(dir: impl AsRef<Path>, config: StoreConfig) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut store = DocumentStore {
            dir: None,
            config,
            corpora: BTreeMap::new(),
        };
        for corpus in CorpusId::ALL {
            let path = dir.join(format!("{corpus}.jsonl"));
            if path.exists() {
                store.ingest_documents(BufReader::new(File::open(&path)?), corpus)?;
            }
        }
        store.dir = Some(dir);
        Ok(store)
    }

    pub fn config(&self) -> StoreConfig {
        self.config
    }

    /// Validates and stores one record per line. Bad records are counted and
    /// never abort the stream. Blank lines are not records.
    pub fn ingest_documents<R: BufRead>(
        &mut self,
        reader: R,
        corpus_id: CorpusId,
    ) -> Result<IngestReport> {
        let mut writer = match &self.dir {
            Some(dir) => Some(BufWriter::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(dir.join(format!("{corpus_id}.jsonl")))?,
            )),
            None => None,
        };
        let config = self.config;
        let data = self.corpora.entry(corpus_id).or_default();
        let mut report = IngestReport::default();

        for (i, raw) in reader.split(b'\n').enumerate() {
            let raw = raw?;
            let line_no = i + 1;
            let mut reject = |reason: &str| {
                report.count_rejected += 1;
                report.reject_reasons.push(Rejection {
                    line: line_no,
                    reason: reason.to_string(),
                });
            };
            let Ok(line) = std::str::from_utf8(&raw) else {
                reject("invalid_utf8");
                continue;
            };
            if line.trim().is_empty() {
                continue;
            }
            let doc = match Document::from_record(line) {
                Ok(doc) => doc,
                Err(reason) => {
                    reject(&reason);
                    continue;
                }
            };
            if doc.corpus_id != corpus_id {
                reject("corpus_mismatch");
                continue;
            }
            if doc.year < config.year_min || doc.year > config.year_max {
                reject("year_out_of_range");
                continue;
            }
            if data.ids.contains_key(&doc.doc_id) {
                reject("duplicate_doc_id");
                continue;
            }
            if let Some(w) = writer.as_mut() {
                writeln!(w, "{}", doc.to_json_line())?;
            }
            data.insert(doc);
            report.count_ok += 1;
        }
        if let Some(mut w) = writer {
            w.flush()?;
        }
        Ok(report)
    }

    /// True once a corpus has been through ingestion, even with zero
    /// accepted records.
    pub fn has_corpus(&self, corpus_id: CorpusId) -> bool {
        self.corpora.contains_key(&corpus_id)
    }

    pub fn len(&self, corpus_id: CorpusId) -> usize {
        self.corpora.get(&corpus_id).map_or(0, |c| c.docs.len())
    }

    pub fn is_empty(&self) -> bool {
        self.corpora.values().all(|c| c.docs.is_empty())
    }

    pub fn get(&self, corpus_id: CorpusId, doc_id: &str) -> Option<&Document> {
        let data = self.corpora.get(&corpus_id)?;
        data.ids.get(doc_id).map(|&i| &data.docs[i])
    }

    /// Documents with `year_lo <= year <= year_hi`, ordered by (year, doc_id),
    /// optionally restricted to one venue.
    pub fn query_documents<'a>(
        &'a self,
        corpus_id: CorpusId,
        year_lo: i32,
        year_hi: i32,
        venue: Option<&'a str>,
    ) -> Result<impl Iterator<Item = &'a Document> + 'a> {
        if year_lo > year_hi {
            return Err(Error::InvalidArgument(format!(
                "year_lo {year_lo} > year_hi {year_hi}"
            )));
        }
        let data = self.corpora.get(&corpus_id);
        let iter = data
            .into_iter()
            .flat_map(move |d| {
                d.by_year
                    .range(year_lo..=year_hi)
                    .flat_map(move |(_, idxs)| idxs.iter().map(move |&i| &d.docs[i]))
            })
            .filter(move |doc| venue.is_none_or(|v| doc.venue_id.as_deref() == Some(v)));
        Ok(iter)
    }

    /// Same as [`query_documents`](Self::query_documents) with the corpus
    /// given by name.
    pub fn query_by_name<'a>(
        &'a self,
        corpus: &str,
        year_lo: i32,
        year_hi: i32,
        venue: Option<&'a str>,
    ) -> Result<impl Iterator<Item = &'a Document> + 'a> {
        let id: CorpusId = corpus.parse()?;
        self.query_documents(id, year_lo, year_hi, venue)
    }

    /// All documents of a corpus in (year, doc_id) order.
    pub fn documents(&self, corpus_id: CorpusId) -> Vec<&Document> {
        self.query_documents(corpus_id, i32::MIN, i32::MAX, None)
            .expect("full range is valid")
            .collect()
    }

    /// (min, max) year present in a corpus.
    pub fn year_span(&self, corpus_id: CorpusId) -> Option<(i32, i32)> {
        let data = self.corpora.get(&corpus_id)?;
        let lo = *data.by_year.keys().next()?;
        let hi = *data.by_year.keys().next_back()?;
        Some((lo, hi))
    }
}
