//! The alternating corrupt/reconstruct sampler.
//!
//! One transition corrupts the current graph and lets the model rebuild
//! until it emits stop; the rebuilt graph is the next state and is emitted
//! as a sample. When reconstruction runs past its step cap the whole
//! transition, corruption included, is drawn again up to a retry budget.
//! Every visited state is Laman by construction of the moves.

use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;

use crate::corrupt::{self, CorruptError, CorruptionConfig};
use crate::graph::Graph;
use crate::model::{self, ModelError, ModelParams};
use crate::rigidity;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub transitions: usize,
    pub corruption: CorruptionConfig,
    pub max_reconstruction_steps: usize,
    pub resample_transition_retries: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            transitions: 1000,
            corruption: CorruptionConfig::default(),
            max_reconstruction_steps: 30,
            resample_transition_retries: 5,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), ChainError> {
        if self.transitions == 0 || self.max_reconstruction_steps == 0 {
            return Err(ChainError::InvalidConfig("transitions and step cap must be positive"));
        }
        self.corruption.validate()?;
        Ok(())
    }
}

/// One emitted transition.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    pub index: usize,
    /// Number of corruption moves in the accepted attempt.
    pub corruption_len: usize,
    /// The corrupted graph handed to the reconstructor.
    pub corrupted: Graph,
    /// The reconstructed graph; this is the sample and the next chain state.
    pub reconstructed: Graph,
    /// Number of reconstruction moves before stop.
    pub reconstruction_len: usize,
    /// Whether any attempt of this transition was thrown away.
    pub resampled: bool,
    /// Whether any attempt hit the reconstruction step cap.
    pub hit_max_steps: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainError {
    #[error("invalid chain config: {0}")]
    InvalidConfig(&'static str),
    #[error("initial graph is not Laman")]
    InitNotLaman,
    #[error("initial graph violates the chain size bounds")]
    InitOutOfBounds,
    #[error("corruption failed: {0}")]
    Corrupt(#[from] CorruptError),
    #[error("model failed: {0}")]
    Model(#[from] ModelError),
    #[error("transition {transition} exhausted {attempts} attempts at the step cap")]
    RetryBudgetExhausted { transition: usize, attempts: usize },
}

/// Sequential chain over one RNG stream. The transition function sees only
/// the current state and the stream, so the process is Markov by
/// construction.
pub struct ChainSampler<'a> {
    params: &'a ModelParams,
    cfg: ChainConfig,
    state: Graph,
    rng: ChaCha8Rng,
    index: usize,
}

impl<'a> ChainSampler<'a> {
    pub fn new(init: Graph, params: &'a ModelParams, cfg: ChainConfig, rng: ChaCha8Rng) -> Result<Self, ChainError> {
        cfg.validate()?;
        if !rigidity::is_laman(&init).map_err(|_| ChainError::InitNotLaman)? {
            return Err(ChainError::InitNotLaman);
        }
        let n = init.node_count() as u32;
        if n < cfg.corruption.size_min || n > cfg.corruption.size_max {
            return Err(ChainError::InitOutOfBounds);
        }
        Ok(ChainSampler { params, cfg, state: init, rng, index: 0 })
    }

    pub fn state(&self) -> &Graph {
        &self.state
    }

    /// Runs one transition and returns its record.
    pub fn next_record(&mut self) -> Result<ChainRecord, ChainError> {
        let bounds = (self.cfg.corruption.size_min, self.cfg.corruption.size_max);
        let mut attempts = 0usize;
        loop {
            let trace = corrupt::corrupt(&self.state, &self.cfg.corruption, &mut self.rng)?;
            match model::sample_reconstruction(
                trace.final_state(),
                self.params,
                bounds.0,
                bounds.1,
                &mut self.rng,
                self.cfg.max_reconstruction_steps,
            ) {
                Ok((rebuilt, path)) => {
                    debug_assert_eq!(rigidity::is_laman(&rebuilt), Ok(true));
                    let record = ChainRecord {
                        index: self.index,
                        corruption_len: trace.len(),
                        corrupted: trace.final_state().clone(),
                        reconstructed: rebuilt.clone(),
                        reconstruction_len: path.len(),
                        resampled: attempts > 0,
                        hit_max_steps: attempts > 0,
                    };
                    self.state = rebuilt;
                    self.index += 1;
                    return Ok(record);
                }
                Err(ModelError::MaxStepsExceeded) => {
                    attempts += 1;
                    if attempts > self.cfg.resample_transition_retries {
                        return Err(ChainError::RetryBudgetExhausted {
                            transition: self.index,
                            attempts,
                        });
                    }
                }
                Err(e) => return Err(ChainError::Model(e)),
            }
        }
    }
}

impl<'a> Iterator for ChainSampler<'a> {
    type Item = Result<ChainRecord, ChainError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.index >= self.cfg.transitions {
            return None;
        }
        Some(self.next_record())
    }
}

/// Runs a full chain and collects its records.
pub fn run_chain(
    init: Graph,
    params: &ModelParams,
    cfg: &ChainConfig,
    rng: ChaCha8Rng,
) -> Result<Vec<ChainRecord>, ChainError> {
    let sampler = ChainSampler::new(init, params, cfg.clone(), rng)?;
    sampler.collect()
}
