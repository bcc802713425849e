//! Laman validity and edge-independence queries.
//!
//! A graph on `n >= 2` nodes is Laman when it has exactly `2n - 3` edges and
//! every induced subgraph on `k` nodes has at most `2k - 3` edges. The fast
//! path decides both conditions with the (2,3)-pebble game; brute-force
//! subset enumeration serves as an independent oracle on small graphs and as
//! the exact counter behind the decomposability metric.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RigidityError {
    #[error("graph has fewer than 2 nodes")]
    TooSmall,
    #[error("graph has {n} nodes, above the brute-force limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("edge ({0}, {1}) already present")]
    EdgeExists(NodeId, NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// Working state of the (2,3)-pebble game. Each node starts with two
/// pebbles; accepting an edge consumes one pebble from an endpoint and
/// orients the edge away from it, so `total pebbles + accepted edges = 2n`
/// throughout.
pub struct PebbleState {
    ids: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    pebbles: Vec<u8>,
    out: Vec<Vec<usize>>,
    accepted: usize,
    // DFS scratch, kept across calls to avoid reallocation.
    visited: Vec<u32>,
    epoch: u32,
    parent: Vec<usize>,
    stack: Vec<usize>,
}

impl PebbleState {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let ids: Vec<NodeId> = nodes.into_iter().collect();
        let index = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = ids.len();
        PebbleState {
            ids,
            index,
            pebbles: vec![2; n],
            out: vec![Vec::new(); n],
            accepted: 0,
            visited: vec![0; n],
            epoch: 0,
            parent: vec![usize::MAX; n],
            stack: Vec::new(),
        }
    }

    /// Builds the state for `g` by inserting every edge; returns `None` when
    /// some edge is rejected, i.e. `g` is not (2,3)-sparse.
    pub fn build(g: &Graph) -> Option<Self> {
        let mut state = PebbleState::new(g.nodes());
        for (u, v) in g.edges() {
            if !state.insert_edge(u, v) {
                return None;
            }
        }
        Some(state)
    }

    pub fn accepted_edges(&self) -> usize {
        self.accepted
    }

    fn idx(&self, v: NodeId) -> usize {
        self.index[&v]
    }

    /// Attempts to accept edge `(u, v)`: gathers four pebbles on the
    /// endpoints, then consumes one and orients the edge.
    pub fn insert_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        let (ui, vi) = (self.idx(u), self.idx(v));
        if !self.gather(ui, vi) {
            return false;
        }
        debug_assert!(self.pebbles[ui] > 0);
        self.pebbles[ui] -= 1;
        insert_sorted(&mut self.out[ui], vi);
        self.accepted += 1;
        debug_assert_eq!(
            self.pebbles.iter().map(|&p| p as usize).sum::<usize>() + self.accepted,
            2 * self.ids.len(),
            "pebble conservation violated"
        );
        true
    }

    /// Whether edge `(u, v)` could be accepted right now. Pebbles may move
    /// but the independence structure is unchanged, so the state remains
    /// valid for further queries.
    pub fn can_insert(&mut self, u: NodeId, v: NodeId) -> bool {
        let (ui, vi) = (self.idx(u), self.idx(v));
        self.gather(ui, vi)
    }

    /// Brings the pebble count on `{a, b}` up to four if possible.
    fn gather(&mut self, a: usize, b: usize) -> bool {
        loop {
            if self.pebbles[a] as usize + self.pebbles[b] as usize >= 4 {
                return true;
            }
            let moved = (self.pebbles[a] < 2 && self.search(a, b))
                || (self.pebbles[b] < 2 && self.search(b, a));
            if !moved {
                return false;
            }
        }
    }

    /// DFS along the orientation from `root` for a node with a spare pebble
    /// (excluding `root` and `other`); on success the path is reversed and
    /// the pebble moves to `root`. Neighbors are explored in ascending node
    /// order so runs are reproducible.
    fn search(&mut self, root: usize, other: usize) -> bool {
        self.epoch += 1;
        self.visited[root] = self.epoch;
        self.stack.clear();
        self.stack.push(root);
        while let Some(x) = self.stack.pop() {
            if x != root && x != other && self.pebbles[x] > 0 {
                self.pebbles[x] -= 1;
                self.pebbles[root] += 1;
                // Reverse the tree path root -> ... -> x.
                let mut cur = x;
                while cur != root {
                    let p = self.parent[cur];
                    remove_sorted(&mut self.out[p], cur);
                    insert_sorted(&mut self.out[cur], p);
                    cur = p;
                }
                return true;
            }
            // Push in reverse so the smallest-id neighbor pops first.
            for i in (0..self.out[x].len()).rev() {
                let y = self.out[x][i];
                if self.visited[y] != self.epoch {
                    self.visited[y] = self.epoch;
                    self.parent[y] = x;
                    self.stack.push(y);
                }
            }
        }
        false
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

fn remove_sorted(v: &mut Vec<usize>, x: usize) {
    if let Ok(pos) = v.binary_search(&x) {
        v.remove(pos);
    }
}

/// Whether `g` is a Laman graph: `2n - 3` edges total and every induced
/// subgraph within its own `2k - 3` budget, decided by the pebble game.
pub fn is_laman(g: &Graph) -> Result<bool, RigidityError> {
    let n = g.node_count();
    if n < 2 {
        return Err(RigidityError::TooSmall);
    }
    if g.edge_count() != 2 * n - 3 {
        return Ok(false);
    }
    Ok(PebbleState::build(g).is_some())
}

/// Whether `g` satisfies the subgraph condition alone (every induced
/// subgraph has at most `2k - 3` edges), with no constraint on the total
/// edge count.
pub fn is_sparse(g: &Graph) -> bool {
    g.edge_count() == 0 || PebbleState::build(g).is_some()
}

/// Whether adding `(u, v)` keeps every induced subgraph within `2k - 3`
/// edges. Expects a (2,3)-sparse input; a non-sparse input yields `false`
/// since the subgraph condition is already violated.
pub fn can_add_edge(g: &Graph, u: NodeId, v: NodeId) -> Result<bool, RigidityError> {
    if u == v {
        return Err(RigidityError::SelfLoop(u));
    }
    for x in [u, v] {
        if !g.contains_node(x) {
            return Err(RigidityError::UnknownNode(x));
        }
    }
    if g.contains_edge(u, v) {
        return Err(RigidityError::EdgeExists(u, v));
    }
    match PebbleState::build(g) {
        Some(mut state) => Ok(state.can_insert(u, v)),
        None => Ok(false),
    }
}

/// Node limit for the brute-force operations below.
pub const BRUTE_FORCE_MAX_NODES: usize = 16;

struct BitGraph {
    n: usize,
    // adj_high[i] has a bit for every neighbor with index > i.
    adj_high: Vec<u32>,
    adj: Vec<u32>,
}

impl BitGraph {
    fn new(g: &Graph, max: usize) -> Result<Self, RigidityError> {
        let n = g.node_count();
        if n > max {
            return Err(RigidityError::TooLarge { n, max });
        }
        let index: BTreeMap<NodeId, usize> = g.nodes().enumerate().map(|(i, v)| (v, i)).collect();
        let mut adj = vec![0u32; n];
        for (u, v) in g.edges() {
            let (ui, vi) = (index[&u], index[&v]);
            adj[ui] |= 1 << vi;
            adj[vi] |= 1 << ui;
        }
        let adj_high = adj
            .iter()
            .enumerate()
            .map(|(i, &m)| m & !((1u32 << (i + 1)).wrapping_sub(1)))
            .collect();
        Ok(BitGraph { n, adj_high, adj })
    }

    fn edges_within(&self, subset: u32) -> usize {
        let mut rest = subset;
        let mut count = 0;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            count += (self.adj_high[i] & subset).count_ones() as usize;
        }
        count
    }

    fn subset_is_sparse(&self, subset: u32) -> bool {
        // Check every sub-subset of `subset` directly; only used on subsets
        // that already match the Laman edge count, so keep it simple with a
        // pebble game over the induced subgraph.
        let mut ids = Vec::new();
        let mut rest = subset;
        while rest != 0 {
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            ids.push(NodeId(i));
        }
        let mut state = PebbleState::new(ids.iter().copied());
        for (a, &i) in ids.iter().enumerate() {
            for &j in ids.iter().skip(a + 1) {
                if self.adj[i.0 as usize] & (1 << j.0) != 0 && !state.insert_edge(i, j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Independent oracle for [`is_laman`]: enumerates every node subset of size
/// at least 2 and checks the two counting conditions directly. Limited to
/// 16 nodes.
pub fn brute_force_is_laman(g: &Graph) -> Result<bool, RigidityError> {
    let n = g.node_count();
    if n < 2 {
        return Err(RigidityError::TooSmall);
    }
    let bg = BitGraph::new(g, BRUTE_FORCE_MAX_NODES)?;
    if g.edge_count() != 2 * n - 3 {
        return Ok(false);
    }
    Ok(brute_force_subsets_sparse(&bg))
}

/// Brute-force version of the subgraph condition alone.
pub fn brute_force_is_sparse(g: &Graph) -> Result<bool, RigidityError> {
    let bg = BitGraph::new(g, BRUTE_FORCE_MAX_NODES)?;
    Ok(brute_force_subsets_sparse(&bg))
}

fn brute_force_subsets_sparse(bg: &BitGraph) -> bool {
    for subset in 0u32..(1 << bg.n) {
        let k = subset.count_ones() as usize;
        if k < 2 {
            continue;
        }
        if bg.edges_within(subset) > 2 * k - 3 {
            return false;
        }
    }
    true
}

/// Exact count of well-constrained induced subgraphs and the resulting
/// decomposability ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct DodResult {
    /// Number of node subsets (size >= `min_size`) inducing a Laman graph.
    pub well_constrained: usize,
    /// Node count of the input graph.
    pub nodes: usize,
    /// `well_constrained / nodes`.
    pub dod: f64,
}

/// Counts node-induced Laman subgraphs with at least `min_size` nodes by
/// exhaustive subset enumeration. A subset counts when its induced edge
/// count is exactly `2k - 3` and the induced subgraph is (2,3)-sparse
/// (connectivity follows from those two conditions).
pub fn count_well_constrained_subgraphs(
    g: &Graph,
    min_size: usize,
    max_n: usize,
) -> Result<DodResult, RigidityError> {
    let n = g.node_count();
    if n == 0 {
        return Err(RigidityError::TooSmall);
    }
    let bg = BitGraph::new(g, max_n.min(BRUTE_FORCE_MAX_NODES))?;
    // Subsets of a sparse graph are sparse, so the per-subset pebble check
    // is only needed when the graph itself has a violating subgraph.
    let whole_sparse = is_sparse(g);
    let mut count = 0usize;
    for subset in 0u32..(1 << n) {
        let k = subset.count_ones() as usize;
        if k < min_size {
            continue;
        }
        if bg.edges_within(subset) == 2 * k - 3 && (whole_sparse || bg.subset_is_sparse(subset)) {
            count += 1;
        }
    }
    Ok(DodResult {
        well_constrained: count,
        nodes: n,
        dod: count as f64 / n as f64,
    })
}

/// Default minimum subgraph size counted by the decomposability metric.
/// Two-node subgraphs are excluded so the ratio is not dominated by bare
/// edges.
pub const DOD_MIN_SIZE: usize = 3;

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::triangle()
    }

    fn k4() -> Graph {
        Graph::from_edge_list(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn laman_basics() {
        assert_eq!(is_laman(&k3()), Ok(true));
        assert_eq!(is_laman(&k4()), Ok(false));
        // K2 satisfies both conditions degenerately.
        let k2 = Graph::from_edge_list(2, &[(0, 1)]).unwrap();
        assert_eq!(is_laman(&k2), Ok(true));
        let single = Graph::from_edge_list(1, &[]).unwrap();
        assert_eq!(is_laman(&single), Err(RigidityError::TooSmall));
    }

    #[test]
    fn laman_rejects_k4_with_pendant() {
        // n=5, m=7 = 2n-3, but the K4 block violates the subgraph bound.
        let g = Graph::from_edge_list(
            5,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)],
        )
        .unwrap();
        assert_eq!(g.edge_count(), 2 * 5 - 3);
        assert_eq!(is_laman(&g), Ok(false));
        assert_eq!(brute_force_is_laman(&g), Ok(false));
    }

    #[test]
    fn can_add_edge_examples() {
        let path = Graph::from_edge_list(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(can_add_edge(&path, NodeId(0), NodeId(2)), Ok(true));

        let k4m = Graph::from_edge_list(4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(can_add_edge(&k4m, NodeId(0), NodeId(1)), Ok(false));

        assert_eq!(
            can_add_edge(&path, NodeId(0), NodeId(1)),
            Err(RigidityError::EdgeExists(NodeId(0), NodeId(1)))
        );
        assert_eq!(
            can_add_edge(&path, NodeId(1), NodeId(1)),
            Err(RigidityError::SelfLoop(NodeId(1)))
        );
        assert_eq!(
            can_add_edge(&path, NodeId(0), NodeId(7)),
            Err(RigidityError::UnknownNode(NodeId(7)))
        );
    }

    #[test]
    fn can_add_edge_agrees_with_brute_force_on_shared_triangles() {
        // Two triangles sharing node 0: n=5, m=6, (2,3)-sparse.
        let g = Graph::from_edge_list(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]).unwrap();
        assert!(is_sparse(&g));
        for u in 0..5u32 {
            for v in (u + 1)..5 {
                let (u, v) = (NodeId(u), NodeId(v));
                if g.contains_edge(u, v) {
                    continue;
                }
                let mut h = g.clone();
                h.insert_edge(u, v);
                assert_eq!(
                    can_add_edge(&g, u, v).unwrap(),
                    brute_force_is_sparse(&h).unwrap(),
                    "disagreement at ({u}, {v})"
                );
            }
        }
    }

    #[test]
    fn brute_force_matches_fast_path_on_all_n5_candidates() {
        // All graphs on 5 nodes with 2n-3 = 7 edges.
        let pairs: Vec<(u32, u32)> = (0..5)
            .flat_map(|a| ((a + 1)..5).map(move |b| (a, b)))
            .collect();
        let mut checked = 0;
        for mask in 0u32..(1 << pairs.len()) {
            if mask.count_ones() != 7 {
                continue;
            }
            let edges: Vec<(u32, u32)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &e)| e)
                .collect();
            let g = Graph::from_edge_list(5, &edges).unwrap();
            assert_eq!(is_laman(&g).unwrap(), brute_force_is_laman(&g).unwrap());
            checked += 1;
        }
        assert_eq!(checked, 120);
    }

    #[test]
    fn dod_examples() {
        let r = count_well_constrained_subgraphs(&k3(), DOD_MIN_SIZE, 16).unwrap();
        assert_eq!(r.well_constrained, 1);
        assert!((r.dod - 1.0 / 3.0).abs() < 1e-12);

        // Two triangles sharing an edge.
        let fan = Graph::from_edge_list(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        let r = count_well_constrained_subgraphs(&fan, DOD_MIN_SIZE, 16).unwrap();
        assert_eq!(r.well_constrained, 3);
        assert!((r.dod - 0.75).abs() < 1e-12);

        // K4 minus one edge: two triangles plus the whole graph.
        let k4m = Graph::from_edge_list(4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let r = count_well_constrained_subgraphs(&k4m, DOD_MIN_SIZE, 16).unwrap();
        assert_eq!(r.well_constrained, 3);
        assert!((r.dod - 0.75).abs() < 1e-12);
    }

    #[test]
    fn dod_rejects_oversized_graphs() {
        let g = Graph::from_edge_list(17, &[]).unwrap();
        assert!(matches!(
            count_well_constrained_subgraphs(&g, DOD_MIN_SIZE, 16),
            Err(RigidityError::TooLarge { n: 17, max: 16 })
        ));
    }

    #[test]
    fn removing_any_edge_breaks_the_count() {
        let g = Graph::from_edge_list(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(is_laman(&g), Ok(true));
        for (u, v) in g.edges().collect::<Vec<_>>() {
            let mut h = g.clone();
            h.remove_edge(u, v);
            assert_eq!(is_laman(&h), Ok(false));
        }
    }
}
