//! Extraction of the exact set of paths that are the longest in at least one
//! scenario, written Λ*.
//!
//! Candidates are the paths at least as long as the scenario-independent
//! lower bound Δ(τ). A pairwise pass then removes every path that some other
//! candidate dominates in all scenarios: paths with identical branch sets
//! keep only their longest representative, and a path loses to a longer one
//! whose alternative completions (over the structures they do not share)
//! are all provably longer.

use std::collections::HashMap;

use crate::lowerbound::{build_substructure, delta};
use crate::model::{PDag, StructureId};
use crate::paths::{candidate_paths, PathContext};
use crate::response::interference;

/// How two candidate paths can co-execute across scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    /// Some shared structure is traversed via different branches: the paths
    /// never execute in the same scenario.
    S1,
    /// Identical branch sets: the paths always execute together (or not).
    S2,
    /// Compatible on all shared structures but with different branch sets:
    /// they can execute in the same or in different scenarios.
    S3,
}

/// Classifies a candidate pair. Exactly one class applies.
pub fn classify_pair(a: &PathContext, b: &PathContext) -> PairClass {
    for &sid in a.structures.intersection(&b.structures) {
        if a.branch_for(sid) != b.branch_for(sid) {
            return PairClass::S1;
        }
    }
    if a.branches == b.branches {
        PairClass::S2
    } else {
        PairClass::S3
    }
}

/// Λ*, ordered by length descending, then interference ascending, then
/// lexicographic node sequence. Entries are unique node sequences and every
/// entry is at least Δ(τ) long.
#[derive(Debug, Clone)]
pub struct LambdaStarSet {
    entries: Vec<PathContext>,
    delta: f64,
}

impl LambdaStarSet {
    pub fn paths(&self) -> &[PathContext] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PathContext> {
        self.entries.iter()
    }

    /// The candidate threshold Δ(τ) the set was built with.
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Computes Λ* for a valid p-DAG.
pub fn compute_lambda_star(pdag: &PDag) -> LambdaStarSet {
    let threshold = delta(pdag);
    let mut paths = candidate_paths(pdag, threshold);

    let mut keyed: Vec<(PathContext, f64)> = paths
        .drain(..)
        .map(|p| {
            let i = interference(&p, pdag);
            (p, i)
        })
        .collect();
    keyed.sort_by(|(pa, ia), (pb, ib)| {
        pb.len
            .partial_cmp(&pa.len)
            .unwrap()
            .then(ia.partial_cmp(ib).unwrap())
            .then(pa.nodes.cmp(&pb.nodes))
    });
    let ordered: Vec<PathContext> = keyed.into_iter().map(|(p, _)| p).collect();

    let n = ordered.len();
    let mut alive = vec![true; n];
    // Δ of a sub-structure depends on the anchor only through its unique
    // structure set, so pairs sharing that set reuse the evaluation.
    let mut memo: HashMap<(usize, Vec<StructureId>), f64> = HashMap::new();
    for a in 0..n {
        if !alive[a] {
            continue;
        }
        for b in (a + 1)..n {
            if !alive[b] {
                continue;
            }
            match classify_pair(&ordered[a], &ordered[b]) {
                PairClass::S1 => {}
                PairClass::S2 => {
                    // Ordering guarantees len(a) >= len(b); one
                    // representative of the tied group survives.
                    alive[b] = false;
                }
                PairClass::S3 => {
                    let unique: Vec<StructureId> = ordered[a]
                        .structures
                        .difference(&ordered[b].structures)
                        .copied()
                        .collect();
                    let bound = *memo.entry((a, unique)).or_insert_with(|| {
                        build_substructure(&ordered[a], &ordered[b], pdag).delta(pdag)
                    });
                    if bound > ordered[b].len {
                        alive[b] = false;
                    }
                }
            }
        }
    }

    let entries = ordered
        .into_iter()
        .zip(alive)
        .filter_map(|(p, keep)| keep.then_some(p))
        .collect();
    LambdaStarSet {
        entries,
        delta: threshold,
    }
}
