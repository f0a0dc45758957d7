//! Two-stage search: Hamming filtering, then weighted re-ranking.
//!
//! The cheap XOR/popcount scan fetches candidates within a Hamming radius;
//! the learned weights then re-order just those candidates by weighted
//! Hamming distance. With the radius at K the search degenerates to an
//! exhaustive weighted scan. All orderings break ties by ascending
//! database index so results are reproducible.

use crate::code::{hamming, weighted_hamming, BinaryCode, CodeDatabase};
use crate::error::{Error, Result};
use crate::learner::BitWeights;

/// A ranking of database entries for one query: `(index, score)` pairs in
/// ascending score order, ties by ascending index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    query_id: u64,
    entries: Vec<(usize, f64)>,
}

impl RankedList {
    fn from_unsorted(query_id: u64, mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        Self { query_id, entries }
    }

    pub fn query_id(&self) -> u64 {
        self.query_id
    }

    pub fn with_query_id(mut self, query_id: u64) -> Self {
        self.query_id = query_id;
        self
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncated(mut self, limit: usize) -> Self {
        self.entries.truncate(limit);
        self
    }

    /// Removes the entry for a database index, keeping the order intact.
    pub(crate) fn without_index(mut self, index: usize) -> Self {
        self.entries.retain(|&(i, _)| i != index);
        self
    }
}

/// Scans the database by standard Hamming distance, keeping entries with
/// distance at most `radius` (all of them when absent) and truncating the
/// sorted result to `limit` when given.
pub fn scan_hamming(
    query: &BinaryCode,
    db: &CodeDatabase,
    limit: Option<usize>,
    radius: Option<u32>,
) -> Result<RankedList> {
    let mut entries = Vec::new();
    for (i, code) in db.codes().iter().enumerate() {
        let d = hamming(query, code)?;
        if radius.is_none_or(|r| d <= r) {
            entries.push((i, f64::from(d)));
        }
    }
    let list = RankedList::from_unsorted(0, entries);
    Ok(match limit {
        Some(limit) => list.truncated(limit),
        None => list,
    })
}

/// Re-orders a candidate list by weighted Hamming distance. The index set
/// is preserved exactly; only the order and scores change.
pub fn rerank_weighted(
    query: &BinaryCode,
    candidates: &RankedList,
    db: &CodeDatabase,
    weights: &BitWeights,
) -> Result<RankedList> {
    let mut entries = Vec::with_capacity(candidates.len());
    for &(i, _) in candidates.entries() {
        let code = db.codes().get(i).ok_or_else(|| {
            Error::invalid_argument(format!(
                "candidate index {i} out of range for a database of {} codes",
                db.len()
            ))
        })?;
        entries.push((i, weighted_hamming(weights, query, code)?));
    }
    Ok(RankedList::from_unsorted(candidates.query_id(), entries))
}

/// Two-stage search: Hamming filter at `radius`, weighted re-rank, then
/// truncation to `limit`. A radius covering K makes the first stage a
/// no-op and the whole search an exhaustive weighted scan.
pub fn search(
    query: &BinaryCode,
    db: &CodeDatabase,
    weights: &BitWeights,
    radius: u32,
    limit: usize,
) -> Result<RankedList> {
    let candidates = scan_hamming(query, db, None, Some(radius))?;
    Ok(rerank_weighted(query, &candidates, db, weights)?.truncated(limit))
}
