//! Lower bound on the longest path across all scenarios.
//!
//! Selecting, in every probabilistic structure, the branch with the smallest
//! internal length yields a graph whose longest path cannot exceed the
//! longest path of any scenario; its length Δ therefore lower-bounds the
//! length of every path that can be the longest in some scenario. The same
//! bound applies to sub-structures built around a single path, which is what
//! drives the dominance elimination in [`crate::lambdastar`].

use std::collections::BTreeSet;

use crate::graph::DagView;
use crate::model::{NodeId, PDag, ProbStructure, StructureId};
use crate::paths::{branch_length, PathContext};

/// A fragment of a p-DAG: a node subset with its induced edges and the
/// structures that remain probabilistic inside the fragment. Nodes of other
/// structures' branches, if present, are treated as non-conditional here.
#[derive(Debug, Clone)]
pub struct SubStructure {
    pub nodes: BTreeSet<NodeId>,
    pub edges: Vec<(NodeId, NodeId)>,
    pub structures: Vec<StructureId>,
}

impl SubStructure {
    /// Lower bound on the fragment's longest path over all branch choices of
    /// its structures. Fragments may expose several local sources or sinks
    /// after edge induction; the bound is taken over all of them, which is
    /// equivalent to attaching zero-cost virtual endpoints.
    pub fn delta(&self, pdag: &PDag) -> f64 {
        let structures: Vec<&ProbStructure> = self
            .structures
            .iter()
            .filter_map(|&sid| pdag.structure(sid))
            .collect();
        shortest_branch_len(&self.nodes, &self.edges, &structures, pdag)
    }
}

/// Δ(τ): the length of the longest path of the graph obtained by selecting
/// the shortest branch (ties to the lowest branch index) in every structure.
/// For every scenario, the longest path is at least this long.
pub fn delta(pdag: &PDag) -> f64 {
    let nodes: BTreeSet<NodeId> = pdag.nodes().iter().map(|n| n.id).collect();
    let structures: Vec<&ProbStructure> = pdag.structures().iter().collect();
    shortest_branch_len(&nodes, pdag.edges(), &structures, pdag)
}

fn shortest_branch_len(
    nodes: &BTreeSet<NodeId>,
    edges: &[(NodeId, NodeId)],
    structures: &[&ProbStructure],
    pdag: &PDag,
) -> f64 {
    // Drop every branch node of the fragment's structures, then add back the
    // shortest branch of each.
    let mut kept: BTreeSet<NodeId> = nodes.clone();
    for s in structures {
        for b in &s.branches {
            for &v in &b.nodes {
                kept.remove(&v);
            }
        }
    }
    for s in structures {
        let shortest = s
            .branches
            .iter()
            .map(|b| (b, branch_length(b, pdag)))
            .reduce(|best, cur| if cur.1 < best.1 { cur } else { best });
        if let Some((b, _)) = shortest {
            kept.extend(b.nodes.iter().copied());
        }
    }
    if kept.is_empty() {
        return 0.0;
    }
    let pairs: Vec<(NodeId, f64)> = kept
        .iter()
        .map(|&v| (v, pdag.node_wcet(v).unwrap_or(0.0)))
        .collect();
    let view = DagView::build(&pairs, edges.iter().copied())
        .expect("shortest-branch graph of an acyclic p-DAG is acyclic");
    view.longest_path().1
}

/// Builds the sub-structure spanned by `anchor` and the structures it does
/// not share with `other`: those structures stay probabilistic (all their
/// branches are included), everything else is pinned to the anchor's nodes.
pub fn build_substructure(anchor: &PathContext, other: &PathContext, pdag: &PDag) -> SubStructure {
    let unique: Vec<StructureId> = anchor
        .structures
        .difference(&other.structures)
        .copied()
        .collect();
    let mut nodes: BTreeSet<NodeId> = anchor.nodes.iter().copied().collect();
    for &sid in &unique {
        if let Some(s) = pdag.structure(sid) {
            nodes.insert(s.entry);
            nodes.insert(s.exit);
            for b in &s.branches {
                nodes.extend(b.nodes.iter().copied());
            }
        }
    }
    let edges: Vec<(NodeId, NodeId)> = pdag
        .edges()
        .iter()
        .copied()
        .filter(|(a, b)| nodes.contains(a) && nodes.contains(b))
        .collect();
    SubStructure {
        nodes,
        edges,
        structures: unique,
    }
}
