//! Training loop: fresh corruptions every epoch, minibatch gradients, and
//! an Adamax update with linear warm-up and step decay.

use alloc::vec::Vec;
use rand::Rng;

use crate::corrupt::{self, CorruptError, CorruptionConfig, CorruptionTrace};
use crate::fmath;
use crate::graph::Graph;
use crate::moves;
use crate::rng::derive_rng;

use super::params::{Hyper, ModelParams};
use super::{grad, net, Action, ModelError};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    /// Learning rate scales linearly from zero over these first epochs.
    pub warmup_epochs: usize,
    /// Zero-based epochs from which the rate is divided by ten (cumulative).
    pub decay_epochs: Vec<usize>,
    pub corruption: CorruptionConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 256,
            base_lr: 2e-3,
            warmup_epochs: 5,
            decay_epochs: alloc::vec![12, 24],
            corruption: CorruptionConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("epochs and batch_size must be positive"));
        }
        if !(self.base_lr > 0.0) {
            return Err(TrainError::InvalidConfig("base_lr must be positive"));
        }
        if self.warmup_epochs > self.epochs {
            return Err(TrainError::InvalidConfig("warmup_epochs must not exceed epochs"));
        }
        if self.decay_epochs.iter().any(|&d| d >= self.epochs) {
            return Err(TrainError::InvalidConfig("decay epochs must lie within the epoch range"));
        }
        self.corruption.validate().map_err(TrainError::Corrupt)
    }

    fn lr_for_epoch(&self, epoch: usize) -> f64 {
        let mut lr = self.base_lr;
        if epoch < self.warmup_epochs {
            lr *= (epoch + 1) as f64 / self.warmup_epochs as f64;
        }
        for &d in &self.decay_epochs {
            if epoch >= d {
                lr /= 10.0;
            }
        }
        lr
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("invalid train config: {0}")]
    InvalidConfig(&'static str),
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("corruption failed: {0}")]
    Corrupt(#[from] CorruptError),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("non-finite values at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub step_size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub params: ModelParams,
    pub log: Vec<EpochLog>,
}

struct Adamax {
    m: ModelParams,
    u: ModelParams,
    beta1: f64,
    beta2: f64,
    eps: f64,
    /// Running `beta1^t` for bias correction.
    beta1_pow: f64,
}

impl Adamax {
    fn new(shape: &ModelParams) -> Self {
        Adamax {
            m: shape.zeros_like(),
            u: shape.zeros_like(),
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            beta1_pow: 1.0,
        }
    }

    fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, lr: f64) {
        self.beta1_pow *= self.beta1;
        let correction = 1.0 - self.beta1_pow;
        let mut ps = params.named_tensors_mut();
        let gs = grads.named_tensors();
        let mut ms = self.m.named_tensors_mut();
        let mut us = self.u.named_tensors_mut();
        for (((p, g), m), u) in ps.iter_mut().zip(&gs).zip(ms.iter_mut()).zip(us.iter_mut()) {
            debug_assert_eq!(p.name, g.name);
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m.data[i] = self.beta1 * m.data[i] + (1.0 - self.beta1) * gi;
                u.data[i] = (self.beta2 * u.data[i]).max(fmath::abs(gi));
                p.data[i] -= lr / correction * m.data[i] / (u.data[i] + self.eps);
            }
        }
    }
}

/// Trains a freshly initialized model on `dataset`. Every epoch corrupts
/// every graph anew, shuffles, and applies minibatch Adamax updates. Fully
/// deterministic in `cfg.seed`.
pub fn train(dataset: &[Graph], hyper: Hyper, cfg: &TrainConfig) -> Result<TrainOutput, TrainError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut params = ModelParams::init(hyper, cfg.seed);
    let mut opt = Adamax::new(&params);
    let mut log = Vec::with_capacity(cfg.epochs);
    let (size_min, size_max) = (cfg.corruption.size_min, cfg.corruption.size_max);

    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_for_epoch(epoch);
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        shuffle(&mut order, &mut derive_rng(cfg.seed, "train-shuffle", epoch as u64));
        let mut corrupt_rng = derive_rng(cfg.seed, "train-corrupt", epoch as u64);
        let mut traces = Vec::with_capacity(dataset.len());
        for &i in &order {
            traces.push(corrupt::corrupt(&dataset[i], &cfg.corruption, &mut corrupt_rng)?);
        }

        let mut epoch_loss = 0.0;
        for (batch_index, batch) in traces.chunks(cfg.batch_size).enumerate() {
            let (grads, mean_loss) = grad(&params, batch, size_min, size_max)
                .map_err(|e| match e {
                    ModelError::NonFinite(_) => TrainError::NonFinite { epoch, batch: batch_index },
                    other => TrainError::Model(other),
                })?;
            if !mean_loss.is_finite() {
                return Err(TrainError::NonFinite { epoch, batch: batch_index });
            }
            opt.step(&mut params, &grads, lr);
            epoch_loss += mean_loss * batch.len() as f64;
        }
        params
            .check_finite()
            .map_err(|_| TrainError::NonFinite { epoch, batch: usize::MAX })?;
        log.push(EpochLog { epoch, mean_loss: epoch_loss / traces.len() as f64, step_size: lr });
    }

    Ok(TrainOutput { params, log })
}

fn shuffle<R: Rng>(items: &mut [usize], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// Loss of a trace under uniform logits: the log of each state's action
/// count (legal moves plus stop). This is the closed form that any constant
/// scoring function attains.
pub fn uniform_logit_loss(trace: &CorruptionTrace, size_min: u32, size_max: u32) -> Result<f64, ModelError> {
    let mut total = 0.0;
    let mut add = |g: &Graph| -> Result<(), ModelError> {
        let k = moves::enumerate_legal(g, size_min, size_max)
            .map_err(|_| ModelError::NotLaman)?
            .len();
        total += fmath::ln((k + 1) as f64);
        Ok(())
    };
    for step in trace.steps.iter().rev() {
        add(&step.state)?;
    }
    add(&trace.start)?;
    Ok(total)
}

/// Mean trained loss and mean uniform-logit loss over one seeded corruption
/// of each held-out graph.
pub fn heldout_losses(
    params: &ModelParams,
    graphs: &[Graph],
    corruption: &CorruptionConfig,
    seed: u64,
) -> Result<(f64, f64), TrainError> {
    if graphs.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut trained = 0.0;
    let mut uniform = 0.0;
    for (i, g) in graphs.iter().enumerate() {
        let mut rng = derive_rng(seed, "heldout", i as u64);
        let trace = corrupt::corrupt(g, corruption, &mut rng)?;
        trained += super::loss(params, &trace, corruption.size_min, corruption.size_max)?;
        uniform += uniform_logit_loss(&trace, corruption.size_min, corruption.size_max)?;
    }
    let n = graphs.len() as f64;
    Ok((trained / n, uniform / n))
}

/// Fraction of single-step corruptions whose exact reverse move is the
/// model's argmax action.
pub fn top1_reverse_accuracy(
    params: &ModelParams,
    graphs: &[Graph],
    size_min: u32,
    size_max: u32,
    seed: u64,
) -> Result<f64, TrainError> {
    if graphs.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let one_step = CorruptionConfig { mean_steps: 1.0, size_min, size_max };
    let mut hits = 0usize;
    for (i, g) in graphs.iter().enumerate() {
        let mut rng = derive_rng(seed, "top1", i as u64);
        let trace = corrupt::corrupt(g, &one_step, &mut rng)?;
        debug_assert_eq!(trace.len(), 1);
        let step = &trace.steps[0];
        let reverse = moves::inverse(&step.mv, &step.receipt).expect("receipt matches move");
        let fwd = net::forward(&step.state, params, size_min, size_max)?;
        let mut best = 0;
        for j in 1..fwd.probs.len() {
            if fwd.probs[j] > fwd.probs[best] {
                best = j;
            }
        }
        if fwd.actions[best] == Action::Apply(reverse) {
            hits += 1;
        }
    }
    Ok(hits as f64 / graphs.len() as f64)
}
