//! Small hand-built instances with fully known analytical results, shared by
//! the unit tests, the integration suite and the documentation. The same
//! instances ship as files under `fixtures/` at the repository root.

use std::collections::BTreeSet;

use crate::model::{Branch, Node, PDag, ProbStructure};

fn branch(structure: u32, index: u32, nodes: &[u32], prob: f64) -> Branch {
    Branch {
        structure,
        index,
        nodes: nodes.iter().copied().collect::<BTreeSet<u32>>(),
        prob,
    }
}

/// Seven nodes, one structure with two single-node branches, and a
/// non-conditional bypass arm.
///
/// ```text
///              3 (C=5, p=0.3)
///   1 -> 2 <           > 5 -> 6
///    \         4 (C=2, p=0.7)         /
///     `------------ 7 --------------'
/// ```
///
/// Source 1 (C=2), entry 2 (C=1), exit 5 (C=1), sink 6 (C=2), bypass 7 (C=4).
/// Source-to-sink paths: (1,2,3,5,6) of length 11, (1,2,4,5,6) of length 8,
/// and (1,7,6) of length 8.
pub fn single_structure() -> PDag {
    single_structure_with_probs(0.3, 0.7)
}

/// Same graph as [`single_structure`] with arbitrary branch probabilities,
/// e.g. to build instances that violate the probability-sum rule.
pub fn single_structure_with_probs(p1: f64, p2: f64) -> PDag {
    let nodes = vec![
        Node { id: 1, wcet: 2.0 },
        Node { id: 2, wcet: 1.0 },
        Node { id: 3, wcet: 5.0 },
        Node { id: 4, wcet: 2.0 },
        Node { id: 5, wcet: 1.0 },
        Node { id: 6, wcet: 2.0 },
        Node { id: 7, wcet: 4.0 },
    ];
    let edges = vec![(1, 2), (2, 3), (2, 4), (3, 5), (4, 5), (5, 6), (1, 7), (7, 6)];
    let structures = vec![ProbStructure {
        id: 1,
        entry: 2,
        exit: 5,
        branches: vec![branch(1, 1, &[3], p1), branch(1, 2, &[4], p2)],
    }];
    PDag::new(nodes, edges, structures, 30.0, 30.0)
}

/// A sequential structure followed by two parallel structure arms.
///
/// Structure 3 (entry 2, exit 5) selects between node 3 (C=5) and node 4
/// (C=1); after its exit the graph forks into structure 1 (entry 6, exit 9;
/// branches 7 with C=8 and 8 with C=7) and structure 2 (entry 10, exit 13;
/// branches 11 with C=4 and 12 with C=3), joining at the sink 14. All other
/// nodes have C=1 and every branch probability is 0.5.
pub fn sequential_parallel() -> PDag {
    let wcets = [
        (1, 1.0),
        (2, 1.0),
        (3, 5.0),
        (4, 1.0),
        (5, 1.0),
        (6, 1.0),
        (7, 8.0),
        (8, 7.0),
        (9, 1.0),
        (10, 1.0),
        (11, 4.0),
        (12, 3.0),
        (13, 1.0),
        (14, 1.0),
    ];
    let nodes = wcets.iter().map(|&(id, wcet)| Node { id, wcet }).collect();
    let edges = vec![
        (1, 2),
        (2, 3),
        (2, 4),
        (3, 5),
        (4, 5),
        (5, 6),
        (5, 10),
        (6, 7),
        (6, 8),
        (7, 9),
        (8, 9),
        (9, 14),
        (10, 11),
        (10, 12),
        (11, 13),
        (12, 13),
        (13, 14),
    ];
    let structures = vec![
        ProbStructure {
            id: 1,
            entry: 6,
            exit: 9,
            branches: vec![branch(1, 1, &[7], 0.5), branch(1, 2, &[8], 0.5)],
        },
        ProbStructure {
            id: 2,
            entry: 10,
            exit: 13,
            branches: vec![branch(2, 1, &[11], 0.5), branch(2, 2, &[12], 0.5)],
        },
        ProbStructure {
            id: 3,
            entry: 2,
            exit: 5,
            branches: vec![branch(3, 1, &[3], 0.5), branch(3, 2, &[4], 0.5)],
        },
    ];
    PDag::new(nodes, edges, structures, 50.0, 50.0)
}

/// Fourteen nodes in three parallel arms, two of which contain a structure.
/// The shortest-branch selection executes nodes 6 and 11, with a longest
/// path (1, 2, 6, 9, 12, 14) of length 15; three paths are the longest in at
/// least one scenario.
pub fn two_structure_grid() -> PDag {
    let wcets = [
        (1, 1.0),
        (2, 2.0),
        (3, 2.0),
        (4, 3.0),
        (5, 4.0),
        (6, 3.0),
        (7, 3.0),
        (8, 2.0),
        (9, 2.0),
        (10, 7.0),
        (11, 3.0),
        (12, 6.0),
        (13, 2.0),
        (14, 1.0),
    ];
    let nodes = wcets.iter().map(|&(id, wcet)| Node { id, wcet }).collect();
    let edges = vec![
        (1, 2),
        (1, 3),
        (1, 4),
        (2, 5),
        (2, 6),
        (5, 9),
        (6, 9),
        (3, 7),
        (7, 12),
        (9, 12),
        (12, 14),
        (4, 8),
        (8, 10),
        (8, 11),
        (10, 13),
        (11, 13),
        (13, 14),
    ];
    let structures = vec![
        ProbStructure {
            id: 1,
            entry: 2,
            exit: 9,
            branches: vec![branch(1, 1, &[5], 0.3), branch(1, 2, &[6], 0.7)],
        },
        ProbStructure {
            id: 2,
            entry: 8,
            exit: 13,
            branches: vec![branch(2, 1, &[10], 0.6), branch(2, 2, &[11], 0.4)],
        },
    ];
    PDag::new(nodes, edges, structures, 40.0, 40.0)
}

/// A structure-free chain with the given WCETs; ids start at 1.
pub fn chain(wcets: &[f64]) -> PDag {
    let nodes = wcets
        .iter()
        .enumerate()
        .map(|(i, &wcet)| Node {
            id: i as u32 + 1,
            wcet,
        })
        .collect();
    let edges = (1..wcets.len() as u32).map(|i| (i, i + 1)).collect();
    let total: f64 = wcets.iter().sum();
    PDag::new(nodes, edges, vec![], total.max(1.0) * 2.0, total.max(1.0) * 2.0)
}
