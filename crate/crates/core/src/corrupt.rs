//! The fixed corruption distribution: a geometric number of uniformly
//! chosen legal moves.
//!
//! Each step picks a move type uniformly among the types that currently
//! have at least one legal instance (under the size masks), then picks one
//! of that type's instances uniformly. When a drawn type is empty the draw
//! renormalizes over the non-empty types rather than rejecting.

use alloc::vec::Vec;
use rand::Rng;

use crate::graph::Graph;
use crate::moves::{self, Move, MoveKind, MoveReceipt};
use crate::rigidity;
use crate::rng::sample_geometric;

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionConfig {
    /// Expected number of corruption moves (geometric mean).
    pub mean_steps: f64,
    /// Deletions are masked at this node count.
    pub size_min: u32,
    /// Insertions are masked at this node count.
    pub size_max: u32,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig { mean_steps: 5.0, size_min: 3, size_max: 100 }
    }
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<(), CorruptError> {
        if !(self.mean_steps >= 1.0) {
            return Err(CorruptError::InvalidConfig("mean_steps must be >= 1"));
        }
        if self.size_min < 3 {
            return Err(CorruptError::InvalidConfig("size_min must be >= 3"));
        }
        if self.size_max < self.size_min {
            return Err(CorruptError::InvalidConfig("size_max must be >= size_min"));
        }
        Ok(())
    }
}

/// One corruption step: the move applied, its receipt, and the state it
/// produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionStep {
    pub mv: Move,
    pub receipt: MoveReceipt,
    pub state: Graph,
}

/// A full corruption sequence starting at `start`. Replaying the moves from
/// `start` reproduces the recorded states; the last state is the corrupted
/// object handed to the reconstructor.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionTrace {
    pub start: Graph,
    pub steps: Vec<CorruptionStep>,
}

impl CorruptionTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_state(&self) -> &Graph {
        &self.steps.last().expect("corruption traces have at least one step").state
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorruptError {
    #[error("invalid corruption config: {0}")]
    InvalidConfig(&'static str),
    #[error("input graph is not Laman")]
    NotLaman,
    #[error("input graph is smaller than size_min")]
    TooSmall,
    #[error("no legal moves available (size masks exclude every move type)")]
    NoLegalMoves,
    #[error("move application failed: {0}")]
    Move(#[from] moves::MoveError),
}

/// Geometric corruption length with expectation `mean_steps`, support
/// {1, 2, ...}.
pub fn sample_length<R: Rng>(rng: &mut R, mean_steps: f64) -> u64 {
    sample_geometric(rng, mean_steps)
}

/// Draws a corruption sequence from the input graph. Every intermediate
/// state is Laman; the trace carries enough to replay or invert each step.
pub fn corrupt<R: Rng>(x: &Graph, cfg: &CorruptionConfig, rng: &mut R) -> Result<CorruptionTrace, CorruptError> {
    cfg.validate()?;
    if !rigidity::is_laman(x).map_err(|_| CorruptError::NotLaman)? {
        return Err(CorruptError::NotLaman);
    }
    if (x.node_count() as u32) < cfg.size_min {
        return Err(CorruptError::TooSmall);
    }
    let k = sample_length(rng, cfg.mean_steps);
    let mut steps = Vec::with_capacity(k as usize);
    let mut state = x.clone();
    for _ in 0..k {
        let mv = sample_move(&state, cfg, rng)?;
        let (next, receipt) = moves::apply(&state, &mv)?;
        steps.push(CorruptionStep { mv, receipt, state: next.clone() });
        state = next;
    }
    Ok(CorruptionTrace { start: x.clone(), steps })
}

/// One uniform-type, uniform-instance move draw on `state`.
pub fn sample_move<R: Rng>(state: &Graph, cfg: &CorruptionConfig, rng: &mut R) -> Result<Move, CorruptError> {
    let all = moves::enumerate_legal(state, cfg.size_min, cfg.size_max).map_err(CorruptError::Move)?;
    let mut buckets: [Vec<Move>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for m in all {
        let slot = MoveKind::ALL.iter().position(|&k| k == m.kind()).unwrap();
        buckets[slot].push(m);
    }
    let non_empty: Vec<usize> = (0..4).filter(|&i| !buckets[i].is_empty()).collect();
    if non_empty.is_empty() {
        return Err(CorruptError::NoLegalMoves);
    }
    let bucket = &buckets[non_empty[rng.gen_range(0..non_empty.len())]];
    Ok(bucket[rng.gen_range(0..bucket.len())])
}
