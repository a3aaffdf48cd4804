//! The p-DAG data model, its validation rules, and the canonical on-disk
//! format.
//!
//! A task is a DAG of nodes carrying WCETs, plus a set of probabilistic
//! structures. Each structure is delimited by an ordinary entry node and an
//! ordinary exit node and holds two or more mutually exclusive branches;
//! exactly one branch executes per release, with probabilities summing to
//! one. Branch sub-graphs are non-conditional and never nest.
//!
//! Construction never fails: [`validate`] reports every violated invariant as
//! data so that callers (and the CLI) can show all problems at once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::DagView;

pub type NodeId = u32;
pub type StructureId = u32;
pub type BranchIndex = u32;

/// Absolute tolerance on the per-structure probability sum.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

/// A unit of sequential computation with its worst-case execution time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub wcet: f64,
}

/// One alternative of a probabilistic structure: a non-conditional sub-graph
/// together with its execution probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Id of the owning structure; filled in by [`PDag::new`].
    pub structure: StructureId,
    pub index: BranchIndex,
    pub nodes: BTreeSet<NodeId>,
    pub prob: f64,
}

/// A probabilistic structure: entry node, exit node and the mutually
/// exclusive branches in between.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbStructure {
    pub id: StructureId,
    pub entry: NodeId,
    pub exit: NodeId,
    pub branches: Vec<Branch>,
}

impl ProbStructure {
    pub fn branch(&self, index: BranchIndex) -> Option<&Branch> {
        self.branches.iter().find(|b| b.index == index)
    }
}

/// A p-DAG task. Immutable after construction; all fields are canonically
/// ordered (nodes and structures by id, branches by index, edges
/// lexicographically), so serialization is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct PDag {
    nodes: Vec<Node>,
    edges: Vec<(NodeId, NodeId)>,
    structures: Vec<ProbStructure>,
    period: f64,
    deadline: f64,
    /// node id -> (structure, branch) for nodes inside a branch.
    branch_of: BTreeMap<NodeId, (StructureId, BranchIndex)>,
}

impl PDag {
    pub fn new(
        nodes: Vec<Node>,
        edges: Vec<(NodeId, NodeId)>,
        mut structures: Vec<ProbStructure>,
        period: f64,
        deadline: f64,
    ) -> PDag {
        let mut nodes = nodes;
        nodes.sort_by_key(|n| n.id);
        let mut edges = edges;
        edges.sort_unstable();
        structures.sort_by_key(|s| s.id);
        for s in &mut structures {
            s.branches.sort_by_key(|b| b.index);
            for b in &mut s.branches {
                b.structure = s.id;
            }
        }
        let mut branch_of = BTreeMap::new();
        for s in &structures {
            for b in &s.branches {
                for &v in &b.nodes {
                    branch_of.entry(v).or_insert((s.id, b.index));
                }
            }
        }
        PDag {
            nodes,
            edges,
            structures,
            period,
            deadline,
            branch_of,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn structures(&self) -> &[ProbStructure] {
        &self.structures
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    /// Same task with a different deadline, e.g. to evaluate a tighter time
    /// limit than the task's own.
    pub fn with_deadline(&self, deadline: f64) -> PDag {
        let mut copy = self.clone();
        copy.deadline = deadline;
        copy
    }

    pub fn node_wcet(&self, id: NodeId) -> Option<f64> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| self.nodes[i].wcet)
    }

    pub fn structure(&self, id: StructureId) -> Option<&ProbStructure> {
        self.structures
            .binary_search_by_key(&id, |s| s.id)
            .ok()
            .map(|i| &self.structures[i])
    }

    /// The (structure, branch) owning a node, or `None` for non-conditional
    /// nodes (which include every entry and exit).
    pub fn branch_of(&self, id: NodeId) -> Option<(StructureId, BranchIndex)> {
        self.branch_of.get(&id).copied()
    }

    /// Total WCET of a branch sub-graph.
    pub fn branch_volume(&self, branch: &Branch) -> f64 {
        branch
            .nodes
            .iter()
            .map(|&v| self.node_wcet(v).unwrap_or(0.0))
            .sum()
    }

    /// Number of distinct execution scenarios: the product of branch counts
    /// over all structures (1 when there are none).
    pub fn scenario_count(&self) -> u128 {
        self.structures
            .iter()
            .map(|s| s.branches.len() as u128)
            .product()
    }

    /// Branch probabilities renormalized by their per-structure sum, so that
    /// downstream arithmetic sees an exact point of the probability simplex.
    pub fn renormalized(&self) -> PDag {
        let mut copy = self.clone();
        for s in &mut copy.structures {
            let sum: f64 = s.branches.iter().map(|b| b.prob).sum();
            if sum > 0.0 {
                for b in &mut s.branches {
                    b.prob /= sum;
                }
            }
        }
        copy
    }

    /// Short content hash of the canonical serialization, used to tag
    /// exported records.
    pub fn instance_hash(&self) -> String {
        let digest = Sha256::digest(serialize_pdag(self).as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    DuplicateNodeId,
    NegativeWcet,
    DanglingEdge,
    SelfLoop,
    DuplicateEdge,
    CycleDetected,
    SourceCount,
    SinkCount,
    NonPositivePeriod,
    NonPositiveDeadline,
    DeadlineExceedsPeriod,
    DuplicateStructureId,
    DanglingStructureRef,
    BranchCount,
    DuplicateBranchIndex,
    EmptyBranch,
    ProbabilityRange,
    ProbabilitySum,
    BranchOverlap,
    BranchNodeIsEndpoint,
    BranchEdge,
    BranchConnectivity,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub rule: Rule,
    pub message: String,
    /// Offending node/structure ids, when meaningful.
    pub ids: Vec<u32>,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, rule: Rule, message: String, ids: Vec<u32>) {
        self.violations.push(Violation { rule, message, ids });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            writeln!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{}: {}", v.rule, v.message)?;
            }
            Ok(())
        }
    }
}

/// Checks every model invariant and reports all violations found.
/// Violations are data, not failures; `report.ok()` says whether the
/// instance is a well-formed p-DAG.
pub fn validate(pdag: &PDag) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut known: BTreeSet<NodeId> = BTreeSet::new();

    for n in pdag.nodes() {
        if !known.insert(n.id) {
            report.push(
                Rule::DuplicateNodeId,
                format!("node id {} occurs more than once", n.id),
                vec![n.id],
            );
        }
        if n.wcet < 0.0 {
            report.push(
                Rule::NegativeWcet,
                format!("node {} has negative wcet {}", n.id, n.wcet),
                vec![n.id],
            );
        }
    }

    let mut seen_edges = BTreeSet::new();
    for &(from, to) in pdag.edges() {
        if !known.contains(&from) || !known.contains(&to) {
            report.push(
                Rule::DanglingEdge,
                format!("edge ({from}, {to}) references an unknown node"),
                vec![from, to],
            );
            continue;
        }
        if from == to {
            report.push(
                Rule::SelfLoop,
                format!("self-loop on node {from}"),
                vec![from],
            );
        }
        if !seen_edges.insert((from, to)) {
            report.push(
                Rule::DuplicateEdge,
                format!("edge ({from}, {to}) occurs more than once"),
                vec![from, to],
            );
        }
    }

    if pdag.period() <= 0.0 {
        report.push(
            Rule::NonPositivePeriod,
            format!("period {} is not positive", pdag.period()),
            vec![],
        );
    }
    if pdag.deadline() <= 0.0 {
        report.push(
            Rule::NonPositiveDeadline,
            format!("deadline {} is not positive", pdag.deadline()),
            vec![],
        );
    }
    if pdag.deadline() > pdag.period() {
        report.push(
            Rule::DeadlineExceedsPeriod,
            format!(
                "deadline {} exceeds period {}",
                pdag.deadline(),
                pdag.period()
            ),
            vec![],
        );
    }

    // Graph shape on the well-referenced part.
    let node_list: Vec<(NodeId, f64)> = pdag.nodes().iter().map(|n| (n.id, n.wcet)).collect();
    let clean_edges: Vec<(NodeId, NodeId)> = pdag
        .edges()
        .iter()
        .copied()
        .filter(|(a, b)| known.contains(a) && known.contains(b) && a != b)
        .collect();
    match DagView::build(&node_list, clean_edges.iter().copied()) {
        Err(cycle) => {
            report.push(
                Rule::CycleDetected,
                format!("cycle through nodes {:?}", cycle.nodes),
                cycle.nodes,
            );
        }
        Ok(view) => {
            let sources = view.sources();
            let sinks = view.sinks();
            if sources.len() != 1 {
                let ids: Vec<NodeId> = sources.iter().map(|&v| view.id(v)).collect();
                report.push(
                    Rule::SourceCount,
                    format!("expected exactly one source, found {:?}", ids),
                    ids,
                );
            }
            if sinks.len() != 1 {
                let ids: Vec<NodeId> = sinks.iter().map(|&v| view.id(v)).collect();
                report.push(
                    Rule::SinkCount,
                    format!("expected exactly one sink, found {:?}", ids),
                    ids,
                );
            }
        }
    }

    validate_structures(pdag, &known, &mut report);
    report
}

fn validate_structures(pdag: &PDag, known: &BTreeSet<NodeId>, report: &mut ValidationReport) {
    let mut structure_ids = BTreeSet::new();
    let mut claimed: BTreeMap<NodeId, StructureId> = BTreeMap::new();
    let mut endpoints: BTreeSet<NodeId> = BTreeSet::new();
    for s in pdag.structures() {
        endpoints.insert(s.entry);
        endpoints.insert(s.exit);
    }

    for s in pdag.structures() {
        if !structure_ids.insert(s.id) {
            report.push(
                Rule::DuplicateStructureId,
                format!("structure id {} occurs more than once", s.id),
                vec![s.id],
            );
        }
        for (label, id) in [("entry", s.entry), ("exit", s.exit)] {
            if !known.contains(&id) {
                report.push(
                    Rule::DanglingStructureRef,
                    format!("structure {} {label} references unknown node {id}", s.id),
                    vec![s.id, id],
                );
            }
        }
        if s.branches.len() < 2 {
            report.push(
                Rule::BranchCount,
                format!("structure {} has {} branch(es), need >= 2", s.id, s.branches.len()),
                vec![s.id],
            );
        }
        let mut indices = BTreeSet::new();
        let mut sum = 0.0;
        for b in &s.branches {
            if !indices.insert(b.index) {
                report.push(
                    Rule::DuplicateBranchIndex,
                    format!("structure {} branch index {} repeated", s.id, b.index),
                    vec![s.id, b.index],
                );
            }
            if b.nodes.is_empty() {
                report.push(
                    Rule::EmptyBranch,
                    format!("structure {} branch {} has no nodes", s.id, b.index),
                    vec![s.id, b.index],
                );
            }
            if !(0.0..=1.0).contains(&b.prob) {
                report.push(
                    Rule::ProbabilityRange,
                    format!(
                        "structure {} branch {} probability {} outside [0, 1]",
                        s.id, b.index, b.prob
                    ),
                    vec![s.id, b.index],
                );
            }
            sum += b.prob;
            for &v in &b.nodes {
                if !known.contains(&v) {
                    report.push(
                        Rule::DanglingStructureRef,
                        format!(
                            "structure {} branch {} references unknown node {v}",
                            s.id, b.index
                        ),
                        vec![s.id, v],
                    );
                }
                if endpoints.contains(&v) {
                    report.push(
                        Rule::BranchNodeIsEndpoint,
                        format!(
                            "node {v} belongs to a branch of structure {} but is an entry/exit",
                            s.id
                        ),
                        vec![s.id, v],
                    );
                }
                if let Some(&owner) = claimed.get(&v) {
                    report.push(
                        Rule::BranchOverlap,
                        format!(
                            "node {v} appears in branches of structures {owner} and {}",
                            s.id
                        ),
                        vec![owner, s.id, v],
                    );
                } else {
                    claimed.insert(v, s.id);
                }
            }
        }
        if !s.branches.is_empty() && (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            report.push(
                Rule::ProbabilitySum,
                format!("structure {} branch probabilities sum to {sum}", s.id),
                vec![s.id],
            );
        }
    }

    // Every edge incident to a branch node stays inside its branch or
    // connects the owning structure's entry/exit.
    for &(from, to) in pdag.edges() {
        let bf = pdag.branch_of(from);
        let bt = pdag.branch_of(to);
        let ok = match (bf, bt) {
            (None, None) => true,
            (Some(a), Some(b)) => a == b,
            (None, Some((sid, _))) => pdag.structure(sid).map(|s| s.entry) == Some(from),
            (Some((sid, _)), None) => pdag.structure(sid).map(|s| s.exit) == Some(to),
        };
        if !ok {
            report.push(
                Rule::BranchEdge,
                format!("edge ({from}, {to}) crosses a branch boundary"),
                vec![from, to],
            );
        }
    }

    // Branch connectivity: every branch node reachable from the entry and
    // reaching the exit through nodes of the same branch.
    for s in pdag.structures() {
        for b in &s.branches {
            if b.nodes.is_empty() {
                continue;
            }
            let fwd = reach(&b.nodes, s.entry, pdag.edges(), true);
            let bwd = reach(&b.nodes, s.exit, pdag.edges(), false);
            for &v in &b.nodes {
                if !fwd.contains(&v) || !bwd.contains(&v) {
                    report.push(
                        Rule::BranchConnectivity,
                        format!(
                            "structure {} branch {} node {v} is not connected entry-to-exit",
                            s.id, b.index
                        ),
                        vec![s.id, b.index, v],
                    );
                }
            }
        }
    }
}

/// Nodes of `set` reachable from `anchor` moving only into `set`
/// (forwards along edges when `forward`, backwards otherwise).
fn reach(
    set: &BTreeSet<NodeId>,
    anchor: NodeId,
    edges: &[(NodeId, NodeId)],
    forward: bool,
) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    let mut frontier = vec![anchor];
    while let Some(v) = frontier.pop() {
        for &(a, b) in edges {
            let (src, dst) = if forward { (a, b) } else { (b, a) };
            if src == v && set.contains(&dst) && seen.insert(dst) {
                frontier.push(dst);
            }
        }
    }
    seen
}

// ---------------------------------------------------------------------------
// Canonical text format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    nodes: Vec<Node>,
    edges: Vec<(NodeId, NodeId)>,
    structures: Vec<FileStructure>,
    period: f64,
    deadline: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileStructure {
    id: StructureId,
    entry: NodeId,
    exit: NodeId,
    branches: Vec<FileBranch>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileBranch {
    index: BranchIndex,
    nodes: Vec<NodeId>,
    prob: f64,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{context} references unknown node {id}")]
    UnknownNode { id: NodeId, context: String },
}

/// Parses the canonical instance format. Checks only that every referenced
/// node id exists; semantic validation is [`validate`]'s job.
pub fn parse_pdag(text: &str) -> Result<PDag, ParseError> {
    let doc: FileDoc = serde_json::from_str(text)?;
    let known: BTreeSet<NodeId> = doc.nodes.iter().map(|n| n.id).collect();
    for &(from, to) in &doc.edges {
        for id in [from, to] {
            if !known.contains(&id) {
                return Err(ParseError::UnknownNode {
                    id,
                    context: format!("edge ({from}, {to})"),
                });
            }
        }
    }
    let mut structures = Vec::new();
    for s in doc.structures {
        for (label, id) in [("entry", s.entry), ("exit", s.exit)] {
            if !known.contains(&id) {
                return Err(ParseError::UnknownNode {
                    id,
                    context: format!("structure {} {label}", s.id),
                });
            }
        }
        let mut branches = Vec::new();
        for b in s.branches {
            for &id in &b.nodes {
                if !known.contains(&id) {
                    return Err(ParseError::UnknownNode {
                        id,
                        context: format!("structure {} branch {}", s.id, b.index),
                    });
                }
            }
            branches.push(Branch {
                structure: s.id,
                index: b.index,
                nodes: b.nodes.into_iter().collect(),
                prob: b.prob,
            });
        }
        structures.push(ProbStructure {
            id: s.id,
            entry: s.entry,
            exit: s.exit,
            branches,
        });
    }
    Ok(PDag::new(
        doc.nodes,
        doc.edges,
        structures,
        doc.period,
        doc.deadline,
    ))
}

/// Serializes to the canonical format: sorted ids, full-precision reals,
/// byte-identical output for equal instances.
pub fn serialize_pdag(pdag: &PDag) -> String {
    let doc = FileDoc {
        nodes: pdag.nodes().to_vec(),
        edges: pdag.edges().to_vec(),
        structures: pdag
            .structures()
            .iter()
            .map(|s| FileStructure {
                id: s.id,
                entry: s.entry,
                exit: s.exit,
                branches: s
                    .branches
                    .iter()
                    .map(|b| FileBranch {
                        index: b.index,
                        nodes: b.nodes.iter().copied().collect(),
                        prob: b.prob,
                    })
                    .collect(),
            })
            .collect(),
        period: pdag.period(),
        deadline: pdag.deadline(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model serialization cannot fail");
    text.push('\n');
    text
}
