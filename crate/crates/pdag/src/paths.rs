//! Path machinery: scenario graphs, longest paths, volumes, per-path branch
//! sets, and threshold-pruned path enumeration.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::DagView;
use crate::model::{Branch, BranchIndex, Node, NodeId, PDag, StructureId};

/// Absolute slack used when pruning path prefixes against a length
/// threshold. Emitted paths are filtered exactly on their canonical length;
/// the slack only widens the search to absorb floating-point reassociation.
pub(crate) const LENGTH_SLACK: f64 = 1e-6;

/// One branch choice per probabilistic structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    choice: BTreeMap<StructureId, BranchIndex>,
}

impl Scenario {
    pub fn new(choice: BTreeMap<StructureId, BranchIndex>) -> Scenario {
        Scenario { choice }
    }

    pub fn empty() -> Scenario {
        Scenario {
            choice: BTreeMap::new(),
        }
    }

    pub fn choice(&self) -> &BTreeMap<StructureId, BranchIndex> {
        &self.choice
    }

    pub fn branch_for(&self, structure: StructureId) -> Option<BranchIndex> {
        self.choice.get(&structure).copied()
    }

    /// Whether a path's branch set is compatible with this scenario.
    pub fn admits(&self, branches: &BTreeSet<(StructureId, BranchIndex)>) -> bool {
        branches
            .iter()
            .all(|&(s, b)| self.branch_for(s) == Some(b))
    }
}

/// The non-conditional graph induced by a scenario: all non-conditional
/// nodes plus the chosen branch of every structure.
#[derive(Debug, Clone)]
pub struct ScenarioGraph<'a> {
    pdag: &'a PDag,
    scenario: Scenario,
    nodes: Vec<Node>,
    edges: Vec<(NodeId, NodeId)>,
}

impl<'a> ScenarioGraph<'a> {
    pub fn pdag(&self) -> &'a PDag {
        self.pdag
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub(crate) fn view(&self) -> DagView {
        let pairs: Vec<(NodeId, f64)> = self.nodes.iter().map(|n| (n.id, n.wcet)).collect();
        DagView::build(&pairs, self.edges.iter().copied()).expect("scenario graph is acyclic")
    }
}

/// A source-to-sink path with its length, branch set H and structure set S.
#[derive(Debug, Clone, PartialEq)]
pub struct PathContext {
    pub nodes: Vec<NodeId>,
    /// Canonical length: WCETs summed along the sequence.
    pub len: f64,
    /// H(λ): the branches whose node sets the path intersects.
    pub branches: BTreeSet<(StructureId, BranchIndex)>,
    /// S(λ): the structures of H(λ).
    pub structures: BTreeSet<StructureId>,
}

impl PathContext {
    pub fn branch_for(&self, structure: StructureId) -> Option<BranchIndex> {
        self.branches
            .iter()
            .find(|&&(s, _)| s == structure)
            .map(|&(_, b)| b)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario names unknown structure {0}")]
    UnknownStructure(StructureId),
    #[error("scenario selects unknown branch {index} of structure {structure}")]
    UnknownBranch {
        structure: StructureId,
        index: BranchIndex,
    },
    #[error("scenario is missing a choice for structure {0}")]
    MissingChoice(StructureId),
}

#[derive(Debug, Error)]
pub enum PathError {
    #[error("no edge between consecutive path nodes {0} and {1}")]
    BrokenEdge(NodeId, NodeId),
    #[error("path references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("path is empty")]
    Empty,
}

pub(crate) fn full_view(pdag: &PDag) -> DagView {
    let pairs: Vec<(NodeId, f64)> = pdag.nodes().iter().map(|n| (n.id, n.wcet)).collect();
    DagView::build(&pairs, pdag.edges().iter().copied()).expect("valid p-DAG is acyclic")
}

pub(crate) fn context_from_ids(ids: Vec<NodeId>, len: f64, pdag: &PDag) -> PathContext {
    let mut branches = BTreeSet::new();
    for &v in &ids {
        if let Some(hit) = pdag.branch_of(v) {
            branches.insert(hit);
        }
    }
    let structures = branches.iter().map(|&(s, _)| s).collect();
    PathContext {
        nodes: ids,
        len,
        branches,
        structures,
    }
}

/// Materializes the non-conditional graph a scenario induces.
pub fn instantiate<'a>(pdag: &'a PDag, scenario: &Scenario) -> Result<ScenarioGraph<'a>, ScenarioError> {
    for (&sid, &bidx) in scenario.choice() {
        let s = pdag
            .structure(sid)
            .ok_or(ScenarioError::UnknownStructure(sid))?;
        if s.branch(bidx).is_none() {
            return Err(ScenarioError::UnknownBranch {
                structure: sid,
                index: bidx,
            });
        }
    }
    let mut executed: BTreeSet<NodeId> = BTreeSet::new();
    for n in pdag.nodes() {
        match pdag.branch_of(n.id) {
            None => {
                executed.insert(n.id);
            }
            Some((sid, bidx)) => {
                let chosen = scenario
                    .branch_for(sid)
                    .ok_or(ScenarioError::MissingChoice(sid))?;
                if chosen == bidx {
                    executed.insert(n.id);
                }
            }
        }
    }
    let nodes: Vec<Node> = pdag
        .nodes()
        .iter()
        .filter(|n| executed.contains(&n.id))
        .copied()
        .collect();
    let edges: Vec<(NodeId, NodeId)> = pdag
        .edges()
        .iter()
        .copied()
        .filter(|(a, b)| executed.contains(a) && executed.contains(b))
        .collect();
    Ok(ScenarioGraph {
        pdag,
        scenario: scenario.clone(),
        nodes,
        edges,
    })
}

/// Longest source-to-sink path of a scenario graph; ties resolve to the
/// lexicographically smallest node-id sequence.
pub fn longest_path(graph: &ScenarioGraph) -> PathContext {
    let view = graph.view();
    let (seq, len) = view.longest_path();
    context_from_ids(view.to_ids(&seq), len, graph.pdag())
}

/// Total workload of a scenario graph.
pub fn volume(graph: &ScenarioGraph) -> f64 {
    graph.nodes().iter().map(|n| n.wcet).sum()
}

/// Length of the longest internal path through a branch sub-graph, from any
/// branch node adjacent to the structure's entry to any adjacent to its
/// exit.
pub fn branch_length(branch: &Branch, pdag: &PDag) -> f64 {
    let pairs: Vec<(NodeId, f64)> = branch
        .nodes
        .iter()
        .map(|&v| (v, pdag.node_wcet(v).unwrap_or(0.0)))
        .collect();
    if pairs.is_empty() {
        return 0.0;
    }
    let view = DagView::build(&pairs, pdag.edges().iter().copied())
        .expect("branch sub-graph is acyclic");
    view.longest_path().1
}

/// Builds the [`PathContext`] of an explicit node sequence.
pub fn path_context(sequence: &[NodeId], pdag: &PDag) -> Result<PathContext, PathError> {
    if sequence.is_empty() {
        return Err(PathError::Empty);
    }
    let mut len = 0.0;
    for &v in sequence {
        len += pdag.node_wcet(v).ok_or(PathError::UnknownNode(v))?;
    }
    for pair in sequence.windows(2) {
        if pdag.edges().binary_search(&(pair[0], pair[1])).is_err() {
            return Err(PathError::BrokenEdge(pair[0], pair[1]));
        }
    }
    Ok(context_from_ids(sequence.to_vec(), len, pdag))
}

/// Every source-to-sink path with length at least `threshold`, in
/// lexicographic node-id order. Enumeration prunes prefixes whose best
/// possible completion (a dynamic program over the graph with every
/// structure at its longest branch) cannot reach the threshold.
pub fn candidate_paths(pdag: &PDag, threshold: f64) -> Vec<PathContext> {
    let view = full_view(pdag);
    view.paths_at_least(threshold, LENGTH_SLACK)
        .into_iter()
        .map(|(seq, len)| context_from_ids(view.to_ids(&seq), len, pdag))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn scenario(pairs: &[(StructureId, BranchIndex)]) -> Scenario {
        Scenario::new(pairs.iter().copied().collect())
    }

    #[test]
    fn instantiate_selects_chosen_branch() {
        let pdag = fixtures::single_structure();
        let g = instantiate(&pdag, &scenario(&[(1, 2)])).unwrap();
        let ids: Vec<NodeId> = g.nodes().iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![1, 2, 4, 5, 6, 7]);
    }

    #[test]
    fn instantiate_structure_free_is_identity() {
        let pdag = fixtures::chain(&[1.0, 2.0, 3.0]);
        let g = instantiate(&pdag, &Scenario::empty()).unwrap();
        assert_eq!(g.nodes(), pdag.nodes());
        assert_eq!(g.edges(), pdag.edges());
    }

    #[test]
    fn instantiate_three_structures() {
        let pdag = fixtures::sequential_parallel();
        let g = instantiate(&pdag, &scenario(&[(1, 1), (2, 1), (3, 1)])).unwrap();
        assert_eq!(g.nodes().len(), 11);
    }

    #[test]
    fn instantiate_rejects_bad_branch() {
        let pdag = fixtures::single_structure();
        let err = instantiate(&pdag, &scenario(&[(1, 9)])).unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownBranch { .. }));
    }

    #[test]
    fn longest_path_of_chain() {
        let pdag = fixtures::chain(&[1.0, 2.0, 3.0]);
        let g = instantiate(&pdag, &Scenario::empty()).unwrap();
        let path = longest_path(&g);
        assert_eq!(path.nodes, vec![1, 2, 3]);
        assert_eq!(path.len, 6.0);
    }

    #[test]
    fn longest_path_breaks_tie_deterministically() {
        // Both remaining arms have length 8; the branch arm wins
        // lexicographically over the bypass (1, 7, 6).
        let pdag = fixtures::single_structure();
        let g = instantiate(&pdag, &scenario(&[(1, 2)])).unwrap();
        let path = longest_path(&g);
        assert_eq!(path.nodes, vec![1, 2, 4, 5, 6]);
        assert_eq!(path.len, 8.0);
    }

    #[test]
    fn longest_path_through_long_branch() {
        let pdag = fixtures::single_structure();
        let g = instantiate(&pdag, &scenario(&[(1, 1)])).unwrap();
        let path = longest_path(&g);
        assert_eq!(path.nodes, vec![1, 2, 3, 5, 6]);
        assert_eq!(path.len, 11.0);
    }

    #[test]
    fn volumes() {
        let pdag = fixtures::single_structure();
        let long = instantiate(&pdag, &scenario(&[(1, 1)])).unwrap();
        assert_eq!(volume(&long), 15.0);
        let short = instantiate(&pdag, &scenario(&[(1, 2)])).unwrap();
        assert_eq!(volume(&short), 12.0);
        let single = fixtures::chain(&[7.0]);
        let g = instantiate(&single, &Scenario::empty()).unwrap();
        assert_eq!(volume(&g), 7.0);
    }

    #[test]
    fn branch_length_single_node() {
        let pdag = fixtures::single_structure();
        let b = pdag.structure(1).unwrap().branch(1).unwrap();
        assert_eq!(branch_length(b, &pdag), 5.0);
    }

    #[test]
    fn branch_length_chain_and_diamond() {
        use crate::model::{Branch, Node, PDag, ProbStructure};
        use std::collections::BTreeSet;
        // 1 -> 2(entry) -> {chain 3,4 | diamond 5..8 | single 9} -> 10(exit) -> 11
        let nodes = vec![
            Node { id: 1, wcet: 1.0 },
            Node { id: 2, wcet: 1.0 },
            Node { id: 3, wcet: 2.0 },
            Node { id: 4, wcet: 3.0 },
            Node { id: 5, wcet: 1.0 },
            Node { id: 6, wcet: 1.0 },
            Node { id: 7, wcet: 3.0 },
            Node { id: 8, wcet: 2.0 },
            Node { id: 9, wcet: 1.0 },
            Node { id: 10, wcet: 1.0 },
            Node { id: 11, wcet: 1.0 },
        ];
        let edges = vec![
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 10),
            (2, 5),
            (5, 6),
            (5, 7),
            (6, 8),
            (7, 8),
            (8, 10),
            (2, 9),
            (9, 10),
            (10, 11),
        ];
        let mk = |idx, ids: &[u32], p| Branch {
            structure: 1,
            index: idx,
            nodes: ids.iter().copied().collect::<BTreeSet<u32>>(),
            prob: p,
        };
        let structures = vec![ProbStructure {
            id: 1,
            entry: 2,
            exit: 10,
            branches: vec![
                mk(1, &[3, 4], 0.4),
                mk(2, &[5, 6, 7, 8], 0.3),
                mk(3, &[9], 0.3),
            ],
        }];
        let pdag = PDag::new(nodes, edges, structures, 40.0, 40.0);
        assert!(crate::model::validate(&pdag).ok());
        let s = pdag.structure(1).unwrap();
        assert_eq!(branch_length(s.branch(1).unwrap(), &pdag), 5.0);
        // Diamond arms: 1+1+2 = 4 and 1+3+2 = 6.
        assert_eq!(branch_length(s.branch(2).unwrap(), &pdag), 6.0);
        assert_eq!(branch_length(s.branch(3).unwrap(), &pdag), 1.0);
    }

    #[test]
    fn path_contexts_on_fixture() {
        let pdag = fixtures::single_structure();
        let a = path_context(&[1, 2, 3, 5, 6], &pdag).unwrap();
        assert_eq!(a.len, 11.0);
        assert_eq!(a.branches.iter().copied().collect::<Vec<_>>(), vec![(1, 1)]);
        assert_eq!(a.structures.iter().copied().collect::<Vec<_>>(), vec![1]);
        let c = path_context(&[1, 7, 6], &pdag).unwrap();
        assert_eq!(c.len, 8.0);
        assert!(c.branches.is_empty());
        assert!(c.structures.is_empty());
    }

    #[test]
    fn path_context_three_structure_fixture() {
        let pdag = fixtures::sequential_parallel();
        let p = path_context(&[1, 2, 3, 5, 6, 7, 9, 14], &pdag).unwrap();
        assert_eq!(p.len, 19.0);
        assert_eq!(
            p.branches.iter().copied().collect::<Vec<_>>(),
            vec![(1, 1), (3, 1)]
        );
        assert_eq!(p.structures.iter().copied().collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn path_context_rejects_broken_edge() {
        let pdag = fixtures::single_structure();
        assert!(matches!(
            path_context(&[1, 5, 6], &pdag),
            Err(PathError::BrokenEdge(1, 5))
        ));
    }

    #[test]
    fn candidates_of_single_structure_fixture() {
        let pdag = fixtures::single_structure();
        let got = candidate_paths(&pdag, 8.0);
        let nodes: Vec<Vec<NodeId>> = got.iter().map(|p| p.nodes.clone()).collect();
        assert_eq!(
            nodes,
            vec![vec![1, 2, 3, 5, 6], vec![1, 2, 4, 5, 6], vec![1, 7, 6]]
        );
    }

    #[test]
    fn candidates_of_three_structure_fixture() {
        let pdag = fixtures::sequential_parallel();
        let got = candidate_paths(&pdag, 14.0);
        let mut lens: Vec<f64> = got.iter().map(|p| p.len).collect();
        lens.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(lens, vec![19.0, 18.0, 15.0, 15.0, 14.0, 14.0]);
    }

    #[test]
    fn candidates_above_max_are_empty() {
        let pdag = fixtures::single_structure();
        assert!(candidate_paths(&pdag, 100.0).is_empty());
    }

    /// Exhaustive recursion over the raw edge list, independent of the
    /// pruned enumerator it cross-checks.
    fn brute_force_paths(pdag: &PDag) -> Vec<Vec<NodeId>> {
        let ids: Vec<NodeId> = pdag.nodes().iter().map(|n| n.id).collect();
        let has_pred = |v: NodeId| pdag.edges().iter().any(|&(_, b)| b == v);
        let mut out = Vec::new();
        let mut stack: Vec<Vec<NodeId>> = ids
            .iter()
            .copied()
            .filter(|&v| !has_pred(v))
            .map(|v| vec![v])
            .collect();
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            let succs: Vec<NodeId> = pdag
                .edges()
                .iter()
                .filter(|&&(a, _)| a == last)
                .map(|&(_, b)| b)
                .collect();
            if succs.is_empty() {
                out.push(path);
                continue;
            }
            for s in succs {
                let mut next = path.clone();
                next.push(s);
                stack.push(next);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn zero_threshold_enumerates_everything() {
        for pdag in [
            fixtures::single_structure(),
            fixtures::sequential_parallel(),
            fixtures::two_structure_grid(),
        ] {
            let enumerated: Vec<Vec<NodeId>> = candidate_paths(&pdag, 0.0)
                .into_iter()
                .map(|p| p.nodes)
                .collect();
            let mut sorted = enumerated.clone();
            sorted.sort();
            assert_eq!(sorted, brute_force_paths(&pdag));
        }
    }

    #[test]
    fn scenario_longest_agrees_with_candidate_maximum() {
        let pdag = fixtures::sequential_parallel();
        let all = candidate_paths(&pdag, 0.0);
        for x in 1..=2u32 {
            for y in 1..=2u32 {
                for t in 1..=2u32 {
                    let sc = scenario(&[(1, x), (2, y), (3, t)]);
                    let g = instantiate(&pdag, &sc).unwrap();
                    let best = longest_path(&g);
                    let max_compatible = all
                        .iter()
                        .filter(|p| sc.admits(&p.branches))
                        .map(|p| p.len)
                        .fold(f64::NEG_INFINITY, f64::max);
                    assert_eq!(best.len, max_compatible);
                }
            }
        }
    }
}
