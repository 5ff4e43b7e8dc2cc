use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CorpusId, DocumentStore};
use crate::{Error, Result};

/// Venues cited by at least one patent granted on or before a given year.
///
/// Stored as cumulative sets keyed by the years in which patents exist; a
/// lookup takes the latest stored year not after the query year.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VenueLinkTable {
    cumulative: BTreeMap<i32, BTreeSet<String>>,
}

impl VenueLinkTable {
    pub fn venues_at(&self, year: i32) -> &BTreeSet<String> {
        static EMPTY: BTreeSet<String> = BTreeSet::new();
        self.cumulative
            .range(..=year)
            .next_back()
            .map_or(&EMPTY, |(_, s)| s)
    }

    pub fn contains(&self, year: i32, venue: &str) -> bool {
        self.venues_at(year).contains(venue)
    }

    /// First year in which a venue appears in the table.
    pub fn first_year(&self, venue: &str) -> Option<i32> {
        self.cumulative
            .iter()
            .find(|(_, s)| s.contains(venue))
            .map(|(&y, _)| y)
    }

    /// Builds the table from (year, cited venues) pairs in any order.
    pub fn from_citations<'a>(
        citations: impl IntoIterator<Item = (i32, &'a [String])>,
    ) -> VenueLinkTable {
        let mut per_year: BTreeMap<i32, BTreeSet<String>> = BTreeMap::new();
        for (year, venues) in citations {
            per_year.entry(year).or_default().extend(venues.iter().cloned());
        }
        let mut running = BTreeSet::new();
        let mut cumulative = BTreeMap::new();
        for (year, venues) in per_year {
            running.extend(venues);
            cumulative.insert(year, running.clone());
        }
        VenueLinkTable { cumulative }
    }
}

pub fn build_venue_link_table(store: &DocumentStore) -> Result<VenueLinkTable> {
    if !store.has_corpus(CorpusId::Patents) {
        return Err(Error::CorpusAbsent("patents"));
    }
    let patents = store.documents(CorpusId::Patents);
    Ok(VenueLinkTable::from_citations(patents.iter().map(|d| {
        (
            d.year,
            d.cited_venue_ids.as_deref().unwrap_or(&[]),
        )
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::StoreConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn patent(id: &str, year: i32, cited: &[&str]) -> String {
        let cited: Vec<String> = cited.iter().map(|c| format!("\"{c}\"")).collect();
        format!(
            r#"{{"doc_id":"{id}","corpus":"patents","year":{year},"title":"t","cited_venues":[{}]}}"#,
            cited.join(",")
        )
    }

    #[test]
    fn absent_patents_is_an_error() {
        let store = DocumentStore::in_memory(StoreConfig::default());
        assert!(matches!(build_venue_link_table(&store), Err(Error::CorpusAbsent(_))));
    }

    #[test]
    fn no_patents_gives_empty_sets() {
        let mut store = DocumentStore::in_memory(StoreConfig::default());
        store.ingest_documents(&b""[..], CorpusId::Patents).unwrap();
        let table = build_venue_link_table(&store).unwrap();
        for y in 1990..2020 {
            assert!(table.venues_at(y).is_empty());
        }
    }

    #[test]
    fn single_patent_boundary() {
        let mut store = DocumentStore::in_memory(StoreConfig::default());
        store
            .ingest_documents(patent("x", 2000, &["V1"]).as_bytes(), CorpusId::Patents)
            .unwrap();
        let table = build_venue_link_table(&store).unwrap();
        assert!(table.venues_at(1999).is_empty());
        assert!(table.contains(2000, "V1"));
        assert!(table.contains(2030, "V1"));
    }

    #[test]
    fn random_patents_match_cumulative_union() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut store = DocumentStore::in_memory(StoreConfig::default());
        let mut raw = Vec::new();
        let mut lines = Vec::new();
        for i in 0..50 {
            let year = rng.gen_range(1995..2010);
            let cited: Vec<String> =
                (0..rng.gen_range(0..4)).map(|_| format!("V{}", rng.gen_range(0..20))).collect();
            let refs: Vec<&str> = cited.iter().map(String::as_str).collect();
            lines.push(patent(&format!("p{i}"), year, &refs));
            raw.push((year, cited));
        }
        store.ingest_documents(lines.join("\n").as_bytes(), CorpusId::Patents).unwrap();
        let table = build_venue_link_table(&store).unwrap();
        for y in 1993..2012 {
            let expected: BTreeSet<String> = raw
                .iter()
                .filter(|(py, _)| *py <= y)
                .flat_map(|(_, c)| c.iter().cloned())
                .collect();
            assert_eq!(table.venues_at(y), &expected, "year {y}");
            assert!(table.venues_at(y).is_subset(table.venues_at(y + 1)));
            for v in table.venues_at(y) {
                assert!(table.first_year(v).unwrap() <= y);
            }
        }
    }
}
