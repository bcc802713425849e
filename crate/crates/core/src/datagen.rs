//! Synthetic Laman dataset generation.
//!
//! Each graph grows from a triangle by `n - 3` random Henneberg moves; the
//! per-step probability `p` of choosing a type I move controls how many
//! small rigid blocks the result contains, which is what the
//! decomposability metric measures. Datasets draw `n` from a rounded,
//! clamped normal and `p` uniformly from a preset range.

use alloc::vec::Vec;
use rand::Rng;

use crate::fmath;
use crate::graph::{Graph, NodeId};
use crate::moves::{self, Move};
use crate::rng::{derive_rng, sample_normal, sample_uniform};

#[derive(Debug, Clone, PartialEq)]
pub struct DatagenConfig {
    pub count: usize,
    pub n_mean: f64,
    pub n_std: f64,
    /// Type I probability is drawn uniformly from `[p_low, p_high]`.
    pub p_low: f64,
    pub p_high: f64,
    pub n_floor: u32,
    pub n_cap: Option<u32>,
}

impl Default for DatagenConfig {
    fn default() -> Self {
        DatagenConfig {
            count: 1,
            n_mean: 30.0,
            n_std: 5.0,
            p_low: 0.0,
            p_high: 0.1,
            n_floor: 3,
            n_cap: None,
        }
    }
}

impl DatagenConfig {
    /// Desk-scale preset keeping every graph small enough for exact
    /// decomposability counting.
    pub fn desk(count: usize, p_low: f64, p_high: f64) -> Self {
        DatagenConfig {
            count,
            n_mean: 12.0,
            n_std: 2.0,
            p_low,
            p_high,
            n_floor: 3,
            n_cap: Some(16),
        }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        if !(0.0..=1.0).contains(&self.p_low) || !(0.0..=1.0).contains(&self.p_high) || self.p_low > self.p_high {
            return Err(DatagenError::InvalidConfig("need 0 <= p_low <= p_high <= 1"));
        }
        if self.n_floor < 3 {
            return Err(DatagenError::InvalidConfig("n_floor must be >= 3"));
        }
        if let Some(cap) = self.n_cap {
            if cap < self.n_floor {
                return Err(DatagenError::InvalidConfig("n_cap must be >= n_floor"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatagenError {
    #[error("invalid datagen config: {0}")]
    InvalidConfig(&'static str),
    #[error("target size must be at least 3")]
    TooSmall,
}

/// One generated graph with the move sequence that produced it and the
/// sampled generation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub graph: Graph,
    pub moves: Vec<Move>,
    pub n: u32,
    pub p: f64,
}

/// Grows one Laman graph on `n` nodes from a triangle. Each step is a
/// uniformly random type I move with probability `p`, otherwise a uniformly
/// random type II move. The returned sequence replays from the triangle to
/// the exact same graph.
pub fn generate_laman<R: Rng>(n: u32, p: f64, rng: &mut R) -> Result<(Graph, Vec<Move>), DatagenError> {
    if n < 3 {
        return Err(DatagenError::TooSmall);
    }
    let mut g = Graph::triangle();
    let mut seq = Vec::with_capacity(n as usize - 3);
    for _ in 3..n {
        let mv = if rng.gen_bool(p) {
            random_insert_i(&g, rng)
        } else {
            random_insert_ii(&g, rng)
        };
        let (next, _) = moves::apply(&g, &mv).expect("generated inserts are always legal");
        g = next;
        seq.push(mv);
    }
    Ok((g, seq))
}

fn random_insert_i<R: Rng>(g: &Graph, rng: &mut R) -> Move {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let count = nodes.len();
    // Uniform unordered pair via index decode.
    let idx = rng.gen_range(0..count * (count - 1) / 2);
    let (mut i, mut rem) = (0usize, idx);
    loop {
        let row = count - 1 - i;
        if rem < row {
            break;
        }
        rem -= row;
        i += 1;
    }
    Move::insert_i(nodes[i], nodes[i + 1 + rem])
}

fn random_insert_ii<R: Rng>(g: &Graph, rng: &mut R) -> Move {
    let edges: Vec<(NodeId, NodeId)> = g.edges().collect();
    let (u, v) = edges[rng.gen_range(0..edges.len())];
    let others: Vec<NodeId> = g.nodes().filter(|&x| x != u && x != v).collect();
    let w = others[rng.gen_range(0..others.len())];
    Move::insert_ii(u, v, w)
}

/// Generates item `index` of the dataset addressed by `seed`. Items are
/// independent, so workers can produce them in any order and still emit a
/// deterministic file.
pub fn generate_item(cfg: &DatagenConfig, seed: u64, index: u64) -> DatasetItem {
    let mut rng = derive_rng(seed, "datagen", index);
    let mut n = fmath::round(sample_normal(&mut rng, cfg.n_mean, cfg.n_std));
    if n < cfg.n_floor as f64 {
        n = cfg.n_floor as f64;
    }
    if let Some(cap) = cfg.n_cap {
        if n > cap as f64 {
            n = cap as f64;
        }
    }
    let n = n as u32;
    let p = sample_uniform(&mut rng, cfg.p_low, cfg.p_high);
    let (graph, moves) = generate_laman(n, p, &mut rng).expect("n is clamped to >= 3");
    DatasetItem { graph, moves, n, p }
}

/// Generates the whole dataset sequentially.
pub fn generate_dataset(cfg: &DatagenConfig, seed: u64) -> Result<Vec<DatasetItem>, DatagenError> {
    cfg.validate()?;
    Ok((0..cfg.count as u64).map(|i| generate_item(cfg, seed, i)).collect())
}

/// Replays a recorded move sequence from the triangle.
pub fn replay_from_triangle(seq: &[Move]) -> Result<Graph, moves::MoveError> {
    let mut g = Graph::triangle();
    for m in seq {
        g = moves::apply(&g, m)?.0;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigidity::{count_well_constrained_subgraphs, is_laman, DOD_MIN_SIZE};
    use crate::rng::rng_from_seed;

    #[test]
    fn n3_is_always_the_triangle() {
        let mut rng = rng_from_seed(0);
        let (g, seq) = generate_laman(3, 0.7, &mut rng).unwrap();
        assert_eq!(g, Graph::triangle());
        assert!(seq.is_empty());
    }

    #[test]
    fn n4_with_p1_is_a_type_i_extension() {
        let mut rng = rng_from_seed(1);
        for _ in 0..20 {
            let (g, seq) = generate_laman(4, 1.0, &mut rng).unwrap();
            assert_eq!(seq.len(), 1);
            assert!(matches!(seq[0], Move::InsertI { .. }));
            assert_eq!(g.node_count(), 4);
            assert_eq!(g.edge_count(), 5);
            assert_eq!(is_laman(&g), Ok(true));
        }
    }

    #[test]
    fn generated_graphs_are_laman_and_replayable() {
        let cfg = DatagenConfig { count: 50, ..DatagenConfig::default() };
        let items = generate_dataset(&cfg, 42).unwrap();
        for item in &items {
            assert_eq!(is_laman(&item.graph), Ok(true));
            assert_eq!(item.graph.node_count() as u32, item.n);
            assert_eq!(replay_from_triangle(&item.moves).unwrap(), item.graph);
        }
    }

    #[test]
    fn dataset_respects_size_clamps() {
        let cfg = DatagenConfig { count: 200, ..DatagenConfig::desk(200, 0.0, 0.1) };
        for item in generate_dataset(&cfg, 9).unwrap() {
            assert!((3..=16).contains(&item.n));
        }
    }

    #[test]
    fn high_type_i_probability_raises_decomposability() {
        let mut rng = rng_from_seed(77);
        let mut mean = |p_lo: f64, p_hi: f64, rng: &mut rand_chacha::ChaCha8Rng| {
            let reps = 120;
            let mut acc = 0.0;
            for _ in 0..reps {
                let p = sample_uniform(rng, p_lo, p_hi);
                let (g, _) = generate_laman(12, p, rng).unwrap();
                acc += count_well_constrained_subgraphs(&g, DOD_MIN_SIZE, 16).unwrap().dod;
            }
            acc / reps as f64
        };
        let low = mean(0.0, 0.1, &mut rng);
        let high = mean(0.9, 1.0, &mut rng);
        assert!(high > low, "expected DoD ordering, got low={low} high={high}");
    }

    #[test]
    fn same_seed_reproduces_items() {
        let cfg = DatagenConfig::desk(5, 0.0, 0.1);
        assert_eq!(generate_dataset(&cfg, 3).unwrap(), generate_dataset(&cfg, 3).unwrap());
    }
}
