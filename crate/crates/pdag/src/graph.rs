//! Internal dense-index DAG machinery shared by the analysis modules.
//!
//! All path lengths produced here are *canonical*: the WCETs of the node
//! sequence summed left to right. Longest-path searches reconstruct the
//! sequence first and recompute its canonical length, so that equal node
//! sequences always yield bit-identical lengths no matter which module
//! produced them. Ties are broken towards the lexicographically smallest
//! node-id sequence.

use crate::model::NodeId;

/// Immutable adjacency view over a subset of nodes, indexed densely.
/// Node ids are kept sorted, so dense index order equals id order.
#[derive(Debug)]
pub(crate) struct DagView {
    ids: Vec<NodeId>,
    wcet: Vec<f64>,
    succs: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
    /// Topological order over dense indices.
    topo: Vec<usize>,
}

/// Nodes that remain on a cycle after peeling all acyclic structure.
#[derive(Debug)]
pub(crate) struct CycleError {
    pub nodes: Vec<NodeId>,
}

impl DagView {
    /// Builds a view from `(id, wcet)` pairs and the edges whose endpoints
    /// both appear in `nodes`. Edges touching unknown ids are ignored, which
    /// lets callers pass a full edge list when instantiating sub-graphs.
    pub fn build<I>(nodes: &[(NodeId, f64)], edges: I) -> Result<DagView, CycleError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut sorted: Vec<(NodeId, f64)> = nodes.to_vec();
        sorted.sort_by_key(|(id, _)| *id);
        let ids: Vec<NodeId> = sorted.iter().map(|(id, _)| *id).collect();
        let wcet: Vec<f64> = sorted.iter().map(|(_, c)| *c).collect();
        let n = ids.len();

        let mut succs = vec![Vec::new(); n];
        let mut preds = vec![Vec::new(); n];
        for (from, to) in edges {
            if let (Ok(f), Ok(t)) = (ids.binary_search(&from), ids.binary_search(&to)) {
                succs[f].push(t);
                preds[t].push(f);
            }
        }
        for list in succs.iter_mut().chain(preds.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }

        // Kahn's algorithm; anything left over sits on a cycle.
        let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        queue.sort_unstable();
        let mut topo = Vec::with_capacity(n);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            topo.push(v);
            for &s in &succs[v] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    queue.push(s);
                }
            }
        }
        if topo.len() != n {
            let mut leftover: Vec<NodeId> = (0..n)
                .filter(|v| !topo.contains(v))
                .map(|v| ids[v])
                .collect();
            leftover.sort_unstable();
            return Err(CycleError { nodes: leftover });
        }

        Ok(DagView {
            ids,
            wcet,
            succs,
            preds,
            topo,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, dense: usize) -> NodeId {
        self.ids[dense]
    }

    pub fn sources(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.preds[v].is_empty()).collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.succs[v].is_empty()).collect()
    }

    /// Canonical length of a dense-index sequence.
    pub fn seq_len(&self, seq: &[usize]) -> f64 {
        seq.iter().map(|&v| self.wcet[v]).sum()
    }

    /// For every node, the maximum total WCET of a path from the node
    /// (inclusive) to any local sink.
    pub fn suffix_potential(&self) -> Vec<f64> {
        let mut pot = vec![0.0; self.len()];
        for &v in self.topo.iter().rev() {
            let best = self.succs[v]
                .iter()
                .map(|&s| pot[s])
                .fold(f64::NEG_INFINITY, f64::max);
            pot[v] = if best == f64::NEG_INFINITY {
                self.wcet[v]
            } else {
                self.wcet[v] + best
            };
        }
        pot
    }

    /// Longest path from any local source to any local sink. Ties are broken
    /// towards the lexicographically smallest id sequence; the returned
    /// length is the canonical sum over the returned sequence.
    pub fn longest_path(&self) -> (Vec<usize>, f64) {
        assert!(self.len() > 0, "longest path over empty graph");
        let pot = self.suffix_potential();
        let start = self
            .sources()
            .into_iter()
            .max_by(|&a, &b| pot[a].partial_cmp(&pot[b]).unwrap().then(b.cmp(&a)))
            .expect("acyclic graph has a source");
        let mut seq = vec![start];
        let mut v = start;
        while !self.succs[v].is_empty() {
            let next = self.succs[v]
                .iter()
                .copied()
                .find(|&s| self.wcet[v] + pot[s] == pot[v])
                .expect("potential admits a witness successor");
            seq.push(next);
            v = next;
        }
        let len = self.seq_len(&seq);
        (seq, len)
    }

    /// Enumerates every source-to-sink path whose canonical length is at
    /// least `threshold`, in lexicographic id order.
    ///
    /// Prefixes are abandoned when the accumulated length plus the maximum
    /// possible suffix falls below `threshold - slack`; the slack absorbs the
    /// difference between the incremental prefix sums and the dynamic-program
    /// potentials, so the exact filter at emission never loses a path.
    pub fn paths_at_least(&self, threshold: f64, slack: f64) -> Vec<(Vec<usize>, f64)> {
        let pot = self.suffix_potential();
        let cutoff = threshold - slack;
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        for src in self.sources() {
            if pot[src] >= cutoff {
                prefix.push(src);
                self.descend(src, self.wcet[src], threshold, cutoff, &pot, &mut prefix, &mut out);
                prefix.pop();
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        v: usize,
        acc: f64,
        threshold: f64,
        cutoff: f64,
        pot: &[f64],
        prefix: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if self.succs[v].is_empty() {
            if acc >= threshold {
                out.push((prefix.clone(), acc));
            }
            return;
        }
        for &s in &self.succs[v] {
            if acc + pot[s] >= cutoff {
                prefix.push(s);
                self.descend(s, acc + self.wcet[s], threshold, cutoff, pot, prefix, out);
                prefix.pop();
            }
        }
    }

    /// Dense sequence to node ids.
    pub fn to_ids(&self, seq: &[usize]) -> Vec<NodeId> {
        seq.iter().map(|&v| self.ids[v]).collect()
    }
}
