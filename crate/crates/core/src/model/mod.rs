//! The learned reconstruction distribution over legal moves plus a stop
//! action, trained to reverse corruption sequences.

use alloc::vec::Vec;
use rand::Rng;

use crate::corrupt::CorruptionTrace;
use crate::graph::Graph;
use crate::moves::{self, Move};

mod net;
mod params;
mod train;

pub use net::{featurize, message_pass};
pub use params::{default_fourier_freqs, Hyper, Linear, Matrix, Mlp2, ModelParams, MpRound, TensorMut, TensorRef};
pub use train::{
    heldout_losses, top1_reverse_accuracy, train, uniform_logit_loss, EpochLog, TrainConfig,
    TrainError, TrainOutput,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("graph is not Laman")]
    NotLaman,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("reverse move is missing from the enumerated action set")]
    TargetNotInLegalSet,
    #[error("reconstruction exceeded the step limit without sampling stop")]
    MaxStepsExceeded,
    #[error("invalid model config: {0}")]
    InvalidConfig(&'static str),
}

/// One reconstruction action: apply a move or stop.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Action {
    Stop,
    Apply(Move),
}

/// Categorical distribution over stop and every legal move of a state.
/// Probabilities sum to one; illegal moves are simply absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    pub actions: Vec<Action>,
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl ActionDistribution {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Inverse-CDF categorical draw.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Action {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, p) in self.actions.iter().zip(&self.probabilities) {
            acc += p;
            if u < acc {
                return *a;
            }
        }
        *self.actions.last().expect("distribution is never empty")
    }

    /// Highest-probability action (first on exact ties).
    pub fn argmax(&self) -> Action {
        let mut best = 0;
        for i in 1..self.probabilities.len() {
            if self.probabilities[i] > self.probabilities[best] {
                best = i;
            }
        }
        self.actions[best]
    }
}

/// Scores stop and every legal move of `g` under the size masks with one
/// joint softmax.
pub fn score_actions(
    g: &Graph,
    params: &ModelParams,
    size_min: u32,
    size_max: u32,
) -> Result<ActionDistribution, ModelError> {
    let fwd = net::forward(g, params, size_min, size_max)?;
    Ok(ActionDistribution { actions: fwd.actions, logits: fwd.logits, probabilities: fwd.probs })
}

/// Negative log-likelihood of reversing `trace`: one term per corrupted
/// state for its exact reverse move, plus the stop term at the original
/// graph. A trace with no steps contributes the stop term alone.
pub fn loss(
    params: &ModelParams,
    trace: &CorruptionTrace,
    size_min: u32,
    size_max: u32,
) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for_each_term(trace, |state, target| {
        let fwd = net::forward(state, params, size_min, size_max)?;
        let idx = fwd.target_index(&target).ok_or(ModelError::TargetNotInLegalSet)?;
        total -= fwd.log_prob(idx);
        Ok(())
    })?;
    if !total.is_finite() {
        return Err(ModelError::NonFinite("loss"));
    }
    Ok(total)
}

/// Analytic gradient of the mean per-trace loss over a batch, in parameter
/// shape, together with that mean loss.
pub fn grad(
    params: &ModelParams,
    batch: &[CorruptionTrace],
    size_min: u32,
    size_max: u32,
) -> Result<(ModelParams, f64), ModelError> {
    if batch.is_empty() {
        return Err(ModelError::InvalidConfig("gradient batch must be non-empty"));
    }
    let mut grads = params.zeros_like();
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for trace in batch {
        for_each_term(trace, |state, target| {
            let fwd = net::forward(state, params, size_min, size_max)?;
            let idx = fwd.target_index(&target).ok_or(ModelError::TargetNotInLegalSet)?;
            total -= fwd.log_prob(idx);
            let mut dlogits: Vec<f64> = fwd.probs.iter().map(|p| p * scale).collect();
            dlogits[idx] -= scale;
            net::backward(params, &fwd, &dlogits, &mut grads);
            Ok(())
        })?;
    }
    grads.check_finite().map_err(|_| ModelError::NonFinite("gradient"))?;
    Ok((grads, total * scale))
}

/// Visits the (state, target action) pairs of a trace: the reverse move at
/// every corrupted state, then stop at the original.
fn for_each_term<F>(trace: &CorruptionTrace, mut f: F) -> Result<(), ModelError>
where
    F: FnMut(&Graph, Action) -> Result<(), ModelError>,
{
    for step in trace.steps.iter().rev() {
        let reverse = moves::inverse(&step.mv, &step.receipt)
            .map_err(|_| ModelError::TargetNotInLegalSet)?;
        f(&step.state, Action::Apply(reverse))?;
    }
    f(&trace.start, Action::Stop)
}

/// Samples moves from the model until it emits stop, returning the final
/// graph and the applied moves. Errors with [`ModelError::MaxStepsExceeded`]
/// when `max_steps` moves were applied without a stop; the caller decides
/// whether to resample the surrounding transition.
pub fn sample_reconstruction<R: Rng>(
    corrupted: &Graph,
    params: &ModelParams,
    size_min: u32,
    size_max: u32,
    rng: &mut R,
    max_steps: usize,
) -> Result<(Graph, Vec<Move>), ModelError> {
    let mut state = corrupted.clone();
    let mut path = Vec::new();
    for _ in 0..=max_steps {
        let dist = score_actions(&state, params, size_min, size_max)?;
        match dist.sample(rng) {
            Action::Stop => return Ok((state, path)),
            Action::Apply(mv) => {
                if path.len() == max_steps {
                    return Err(ModelError::MaxStepsExceeded);
                }
                let (next, _) = moves::apply(&state, &mv)
                    .map_err(|_| ModelError::TargetNotInLegalSet)?;
                state = next;
                path.push(mv);
            }
        }
    }
    Err(ModelError::MaxStepsExceeded)
}

#[cfg(test)]
mod tests;
