//! Undirected simple graphs with stable node identifiers.
//!
//! Node ids are non-negative integers that need not be contiguous: deletions
//! leave gaps, insertions allocate `max + 1`, and inverse moves may re-use a
//! freed id through their receipt. Iteration over nodes and edges is always
//! in ascending order, so every downstream computation is deterministic.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::rng::mix64;

/// Identifier of a node within a [`Graph`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// Normalizes an unordered pair so the smaller id comes first.
#[inline]
pub fn ordered(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("endpoint {node} out of range for {n} nodes")]
    EndpointOutOfRange { node: NodeId, n: u32 },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} listed twice")]
    DuplicateNode(NodeId),
}

/// Undirected simple graph. Mutation is confined to this crate; callers see
/// an immutable value and operations that return fresh graphs.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Graph {
    adj: BTreeMap<NodeId, BTreeSet<NodeId>>,
    edge_count: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// The triangle on nodes {0, 1, 2}, the smallest Laman graph used as the
    /// base of every inductive construction.
    pub fn triangle() -> Self {
        Self::from_edge_list(3, &[(0, 1), (0, 2), (1, 2)]).expect("triangle is well-formed")
    }

    /// Builds a graph on nodes `{0..n-1}` from an explicit edge list.
    /// Duplicate edges (in either orientation) are rejected rather than
    /// merged.
    pub fn from_edge_list(n: u32, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let mut g = Graph::new();
        for i in 0..n {
            g.adj.insert(NodeId(i), BTreeSet::new());
        }
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(NodeId(a)));
            }
            for e in [a, b] {
                if e >= n {
                    return Err(GraphError::EndpointOutOfRange { node: NodeId(e), n });
                }
            }
            let (u, v) = ordered(NodeId(a), NodeId(b));
            if g.contains_edge(u, v) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            g.insert_edge(u, v);
        }
        Ok(g)
    }

    /// Builds a graph from an explicit node set (not necessarily
    /// contiguous) and an edge list over those nodes.
    pub fn from_node_and_edge_sets(nodes: &[u32], edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let mut g = Graph::new();
        for &v in nodes {
            if g.contains_node(NodeId(v)) {
                return Err(GraphError::DuplicateNode(NodeId(v)));
            }
            g.adj.insert(NodeId(v), BTreeSet::new());
        }
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(NodeId(a)));
            }
            for e in [a, b] {
                if !g.contains_node(NodeId(e)) {
                    return Err(GraphError::UnknownNode(NodeId(e)));
                }
            }
            let (u, v) = ordered(NodeId(a), NodeId(b));
            if g.contains_edge(u, v) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            g.insert_edge(u, v);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn contains_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj.get(&u).map_or(false, |s| s.contains(&v))
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.keys().copied()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, nbrs)| nbrs.range(next_id(u)..).map(move |&v| (u, v)))
    }

    /// Neighbors of `v` in ascending order (empty if `v` is not present).
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj.get(&v).map_or(0, |s| s.len())
    }

    pub fn max_node_id(&self) -> Option<NodeId> {
        self.adj.keys().next_back().copied()
    }

    pub(crate) fn insert_node(&mut self, v: NodeId) {
        debug_assert!(!self.contains_node(v));
        self.adj.insert(v, BTreeSet::new());
    }

    /// Removes `v` and returns its incident edges as normalized pairs in
    /// ascending neighbor order.
    pub(crate) fn remove_node(&mut self, v: NodeId) -> Vec<(NodeId, NodeId)> {
        let nbrs = self.adj.remove(&v).unwrap_or_default();
        let mut removed = Vec::with_capacity(nbrs.len());
        for u in nbrs {
            self.adj.get_mut(&u).expect("adjacency is symmetric").remove(&v);
            self.edge_count -= 1;
            removed.push(ordered(u, v));
        }
        removed
    }

    pub(crate) fn insert_edge(&mut self, u: NodeId, v: NodeId) {
        debug_assert!(u != v);
        debug_assert!(self.contains_node(u) && self.contains_node(v));
        debug_assert!(!self.contains_edge(u, v));
        self.adj.get_mut(&u).unwrap().insert(v);
        self.adj.get_mut(&v).unwrap().insert(u);
        self.edge_count += 1;
    }

    pub(crate) fn remove_edge(&mut self, u: NodeId, v: NodeId) {
        debug_assert!(self.contains_edge(u, v));
        self.adj.get_mut(&u).unwrap().remove(&v);
        self.adj.get_mut(&v).unwrap().remove(&u);
        self.edge_count -= 1;
    }

    /// The subgraph induced by the node set `s`.
    pub fn induced_subgraph(&self, s: &BTreeSet<NodeId>) -> Result<Graph, GraphError> {
        let mut g = Graph::new();
        for &v in s {
            if !self.contains_node(v) {
                return Err(GraphError::UnknownNode(v));
            }
            g.adj.insert(v, BTreeSet::new());
        }
        for &v in s {
            for u in self.neighbors(v) {
                if u > v && s.contains(&u) {
                    g.insert_edge(v, u);
                }
            }
        }
        Ok(g)
    }

    /// Relabels nodes to `0..n-1` by ascending original id. This is the
    /// canonical form used by the serialized graph format.
    pub fn compact_ids(&self) -> Graph {
        let rank: BTreeMap<NodeId, NodeId> = self
            .nodes()
            .enumerate()
            .map(|(i, v)| (v, NodeId(i as u32)))
            .collect();
        let mut g = Graph::new();
        for &r in rank.values() {
            g.adj.insert(r, BTreeSet::new());
        }
        for (u, v) in self.edges() {
            g.insert_edge(rank[&u], rank[&v]);
        }
        g
    }

    /// Default refinement depth for [`Graph::wl_fingerprint`].
    pub const DEFAULT_WL_ROUNDS: usize = 3;

    /// Relabel-invariant 64-bit digest from iterative neighborhood
    /// refinement. Equal digests are necessary but not sufficient for
    /// isomorphism; this is a dedup hash, not a decision procedure.
    ///
    /// The empty graph hashes to `0x4821_8226_ff3c_d4bf`.
    pub fn wl_fingerprint(&self, rounds: usize) -> u64 {
        let ids: Vec<NodeId> = self.nodes().collect();
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut labels: Vec<u64> = ids.iter().map(|&v| mix64(self.degree(v) as u64)).collect();
        let mut scratch: Vec<u64> = Vec::new();
        for _ in 0..rounds {
            let mut next = Vec::with_capacity(labels.len());
            for &v in &ids {
                scratch.clear();
                scratch.extend(self.neighbors(v).map(|u| labels[index[&u]]));
                scratch.sort_unstable();
                let mut h = mix64(labels[index[&v]] ^ 0xa076_1d64_78bd_642f);
                for &nl in scratch.iter() {
                    h = combine(h, nl);
                }
                next.push(h);
            }
            labels = next;
        }
        labels.sort_unstable();
        let mut digest = combine(
            mix64(self.node_count() as u64 ^ 0x9e37_79b9_7f4a_7c15),
            self.edge_count() as u64,
        );
        for &l in &labels {
            digest = combine(digest, l);
        }
        digest
    }
}

#[inline]
fn next_id(v: NodeId) -> NodeId {
    NodeId(v.0 + 1)
}

#[inline]
fn combine(h: u64, v: u64) -> u64 {
    mix64(h ^ v.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(31))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn k3() -> Graph {
        Graph::triangle()
    }

    #[test]
    fn from_edge_list_builds_triangle() {
        let g = Graph::from_edge_list(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![
                (NodeId(0), NodeId(1)),
                (NodeId(0), NodeId(2)),
                (NodeId(1), NodeId(2))
            ]
        );
    }

    #[test]
    fn from_edge_list_rejects_self_loop() {
        assert_eq!(
            Graph::from_edge_list(2, &[(0, 0)]),
            Err(GraphError::SelfLoop(NodeId(0)))
        );
    }

    #[test]
    fn from_edge_list_rejects_duplicates_in_any_orientation() {
        assert_eq!(
            Graph::from_edge_list(4, &[(0, 1), (0, 1)]),
            Err(GraphError::DuplicateEdge(NodeId(0), NodeId(1)))
        );
        assert_eq!(
            Graph::from_edge_list(4, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(NodeId(0), NodeId(1)))
        );
    }

    #[test]
    fn from_edge_list_rejects_out_of_range() {
        assert_eq!(
            Graph::from_edge_list(2, &[(0, 2)]),
            Err(GraphError::EndpointOutOfRange { node: NodeId(2), n: 2 })
        );
    }

    #[test]
    fn induced_subgraph_examples() {
        let g = k3();
        let s: BTreeSet<NodeId> = [NodeId(0), NodeId(1)].into_iter().collect();
        let sub = g.induced_subgraph(&s).unwrap();
        assert_eq!(sub.edges().collect::<Vec<_>>(), vec![(NodeId(0), NodeId(1))]);

        let all: BTreeSet<NodeId> = g.nodes().collect();
        assert_eq!(g.induced_subgraph(&all).unwrap(), g);

        // K4 minus edge (0,1): {0,2,3} induces a triangle.
        let k4m = Graph::from_edge_list(4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let s: BTreeSet<NodeId> = [NodeId(0), NodeId(2), NodeId(3)].into_iter().collect();
        let sub = k4m.induced_subgraph(&s).unwrap();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 3);
    }

    #[test]
    fn induced_subgraph_unknown_node() {
        let g = k3();
        let s: BTreeSet<NodeId> = [NodeId(0), NodeId(9)].into_iter().collect();
        assert_eq!(g.induced_subgraph(&s), Err(GraphError::UnknownNode(NodeId(9))));
    }

    #[test]
    fn fingerprint_is_relabel_invariant() {
        let a = k3();
        // Same triangle on ids {7, 8, 9}.
        let mut b = Graph::new();
        for v in [7, 8, 9] {
            b.insert_node(NodeId(v));
        }
        b.insert_edge(NodeId(7), NodeId(8));
        b.insert_edge(NodeId(7), NodeId(9));
        b.insert_edge(NodeId(8), NodeId(9));
        assert_eq!(
            a.wl_fingerprint(Graph::DEFAULT_WL_ROUNDS),
            b.wl_fingerprint(Graph::DEFAULT_WL_ROUNDS)
        );
    }

    #[test]
    fn fingerprint_separates_triangle_from_path() {
        let tri = k3();
        let path = Graph::from_edge_list(3, &[(0, 1), (1, 2)]).unwrap();
        assert_ne!(
            tri.wl_fingerprint(Graph::DEFAULT_WL_ROUNDS),
            path.wl_fingerprint(Graph::DEFAULT_WL_ROUNDS)
        );
    }

    #[test]
    fn fingerprint_of_empty_graph_is_documented_constant() {
        assert_eq!(
            Graph::new().wl_fingerprint(Graph::DEFAULT_WL_ROUNDS),
            0x4821_8226_ff3c_d4bf
        );
    }

    #[test]
    fn compact_ids_ranks_nodes() {
        let mut g = Graph::new();
        for v in [3, 10, 40] {
            g.insert_node(NodeId(v));
        }
        g.insert_edge(NodeId(3), NodeId(40));
        g.insert_edge(NodeId(10), NodeId(40));
        let c = g.compact_ids();
        assert_eq!(c.nodes().collect::<Vec<_>>(), vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert_eq!(
            c.edges().collect::<Vec<_>>(),
            vec![(NodeId(0), NodeId(2)), (NodeId(1), NodeId(2))]
        );
    }
}
