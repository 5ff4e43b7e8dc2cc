//! Dynamic concept co-occurrence graph.
//!
//! Node ids are dense indices into the concept registry, whose records are
//! sorted by phrase, so id order is lexicographic phrase order. Edge weights
//! count documents in which both concepts appear; each document contributes
//! at most once per pair and never to self-loops.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::registry::{transferred_at, DocConcepts};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotMode {
    /// Counts over all documents up to and including the snapshot year.
    #[default]
    Cumulative,
    /// Counts over the snapshot year's documents only.
    PerYear,
}

/// Year-over-year edge increments plus node transfer years.
#[derive(Debug, Clone)]
pub struct DynamicGraph {
    n_nodes: usize,
    years: RangeInclusive<i32>,
    mode: SnapshotMode,
    /// year -> (i, j) with i < j -> documents in that year
    deltas: BTreeMap<i32, HashMap<(usize, usize), u32>>,
    transfer_years: Vec<Option<i32>>,
}

/// Builds the per-year deltas from documents whose concept ids are already
/// dense node ids. Documents outside the year range are ignored.
pub fn build_snapshots(
    docs: &[DocConcepts],
    transfer_years: &[Option<i32>],
    years: RangeInclusive<i32>,
    mode: SnapshotMode,
) -> Result<DynamicGraph> {
    let n_nodes = transfer_years.len();
    let mut deltas: BTreeMap<i32, HashMap<(usize, usize), u32>> = BTreeMap::new();
    for doc in docs {
        if doc.year > *years.end() {
            continue;
        }
        if let Some(&c) = doc.concepts.iter().find(|&&c| c >= n_nodes) {
            return Err(Error::UnknownConcept(format!("node id {c}")));
        }
        let delta = deltas.entry(doc.year).or_default();
        for (a, &i) in doc.concepts.iter().enumerate() {
            for &j in &doc.concepts[a + 1..] {
                *delta.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    Ok(DynamicGraph {
        n_nodes,
        years,
        mode,
        deltas,
        transfer_years: transfer_years.to_vec(),
    })
}

impl DynamicGraph {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn years(&self) -> RangeInclusive<i32> {
        self.years.clone()
    }

    fn included(&self, delta_year: i32, year: i32) -> bool {
        match self.mode {
            SnapshotMode::Cumulative => delta_year <= year,
            SnapshotMode::PerYear => delta_year == year,
        }
    }

    /// Materializes the snapshot for one year.
    pub fn snapshot(&self, year: i32) -> GraphSnapshot {
        let mut adjacency: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new(); self.n_nodes];
        for (&y, delta) in &self.deltas {
            if !self.included(y, year) {
                continue;
            }
            for (&(i, j), &w) in delta {
                *adjacency[i].entry(j).or_insert(0) += w;
                *adjacency[j].entry(i).or_insert(0) += w;
            }
        }
        GraphSnapshot {
            year,
            adjacency,
            status: self
                .transfer_years
                .iter()
                .map(|&ty| transferred_at(ty, year))
                .collect(),
        }
    }

    /// (weighted degree, transferred neighbor share) for every node and every
    /// year in range, computed incrementally. Indexed `[node][year - start]`.
    pub fn node_features(&self) -> Vec<Vec<(f64, f64)>> {
        let start = *self.years.start();
        let n_years = self.years.clone().count();
        let mut out = vec![vec![(0.0, 0.0); n_years]; self.n_nodes];
        let mut adjacency: Vec<HashMap<usize, u32>> = vec![HashMap::new(); self.n_nodes];
        let mut carried = false;
        for year in self.years.clone() {
            if self.mode == SnapshotMode::PerYear && carried {
                adjacency.iter_mut().for_each(HashMap::clear);
            }
            for (&y, delta) in &self.deltas {
                let apply = match self.mode {
                    SnapshotMode::Cumulative => y == year || (y < start && year == start),
                    SnapshotMode::PerYear => y == year,
                };
                if !apply {
                    continue;
                }
                for (&(i, j), &w) in delta {
                    *adjacency[i].entry(j).or_insert(0) += w;
                    *adjacency[j].entry(i).or_insert(0) += w;
                }
            }
            carried = true;
            let idx = (year - start) as usize;
            for (node, neighbors) in adjacency.iter().enumerate() {
                let mut degree = 0u64;
                let mut transferred = 0u64;
                for (&j, &w) in neighbors {
                    degree += u64::from(w);
                    if transferred_at(self.transfer_years[j], year) {
                        transferred += u64::from(w);
                    }
                }
                let share = if degree == 0 {
                    0.0
                } else {
                    transferred as f64 / degree as f64
                };
                out[node][idx] = (degree as f64, share);
            }
        }
        out
    }

    /// `source,target,weight` rows for one snapshot, each edge once.
    pub fn edge_list_csv(&self, year: i32, names: &[String]) -> String {
        let snap = self.snapshot(year);
        let mut out = String::from("source,target,weight\n");
        for (i, neighbors) in snap.adjacency.iter().enumerate() {
            for (&j, &w) in neighbors.range(i + 1..) {
                writeln!(out, "{},{},{w}", csv_field(&names[i]), csv_field(&names[j])).unwrap();
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Materialized adjacency and transfer status at one year.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot {
    pub year: i32,
    adjacency: Vec<BTreeMap<usize, u32>>,
    status: Vec<bool>,
}

impl GraphSnapshot {
    fn check(&self, node: usize) -> Result<()> {
        if node >= self.adjacency.len() {
            Err(Error::UnknownConcept(format!("node id {node}")))
        } else {
            Ok(())
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> u32 {
        self.adjacency
            .get(i)
            .and_then(|n| n.get(&j))
            .copied()
            .unwrap_or(0)
    }

    pub fn transferred(&self, node: usize) -> bool {
        self.status.get(node).copied().unwrap_or(false)
    }

    /// Sum of incident edge weights.
    pub fn weighted_degree(&self, node: usize) -> Result<f64> {
        self.check(node)?;
        Ok(self.adjacency[node].values().map(|&w| f64::from(w)).sum())
    }

    /// Weighted fraction of the degree contributed by transferred
    /// neighbors; 0 for isolated nodes.
    pub fn transferred_neighbor_share(&self, node: usize) -> Result<f64> {
        self.check(node)?;
        let degree = self.weighted_degree(node)?;
        if degree == 0.0 {
            return Ok(0.0);
        }
        let transferred: f64 = self.adjacency[node]
            .iter()
            .filter(|(&j, _)| self.status[j])
            .map(|(_, &w)| f64::from(w))
            .sum();
        Ok(transferred / degree)
    }

    /// (neighbor, weight, transferred) sorted by descending weight, then id.
    pub fn neighborhood(&self, node: usize) -> Result<Vec<(usize, u32, bool)>> {
        self.check(node)?;
        let mut out: Vec<(usize, u32, bool)> = self.adjacency[node]
            .iter()
            .map(|(&j, &w)| (j, w, self.status[j]))
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(out)
    }
}
