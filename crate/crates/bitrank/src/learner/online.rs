//! Passive-aggressive online weight updates with mini-batch EGD.

use crate::error::{Error, Result};
use crate::sampler::TripletBatch;

use super::offline::egd_step;
use super::{add_data_gradient, check_weight_len, data_objective, BitWeights, LearnerConfig};

const MAX_BACKTRACKS: usize = 20;

/// Current weights and update counter of an online learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineState {
    w: BitWeights,
    t: u64,
    cfg: LearnerConfig,
}

impl OnlineState {
    /// Starts an online run; EGD maintains positivity, so the starting
    /// weights must be strictly positive.
    pub fn new(w: BitWeights, cfg: LearnerConfig) -> Result<Self> {
        cfg.validate()?;
        if !w.is_strictly_positive() {
            return Err(Error::InvalidState(
                "online learning requires strictly positive starting weights".into(),
            ));
        }
        Ok(Self { w, t: 0, cfg })
    }

    pub fn weights(&self) -> &BitWeights {
        &self.w
    }

    /// Number of updates applied so far.
    pub fn updates(&self) -> u64 {
        self.t
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }
}

/// Value of the online objective
/// `1/2 ||w - w_t||^2 + C_xi * sum hinge^2 + C_gamma * sum deviation^2`:
/// the batch data terms with a proximal regularizer centered at the
/// pre-update weights instead of the origin.
pub fn online_objective(
    w: &BitWeights,
    w_t: &BitWeights,
    minibatch: &TripletBatch,
    cfg: &LearnerConfig,
) -> Result<f64> {
    check_weight_len(w, w_t.len())?;
    check_weight_len(w, minibatch.bits())?;
    let prox = 0.5
        * w.as_slice()
            .iter()
            .zip(w_t.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    Ok(prox + data_objective(w, minibatch, cfg)?)
}

/// Gradient of [`online_objective`] at `w`.
pub fn online_gradient(
    w: &BitWeights,
    w_t: &BitWeights,
    minibatch: &TripletBatch,
    cfg: &LearnerConfig,
) -> Result<Vec<f64>> {
    let mut grad: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(w_t.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    add_data_gradient(&mut grad, w, minibatch, cfg)?;
    Ok(grad)
}

/// One passive-aggressive update: `inner_iters` EGD steps on the online
/// objective, starting from (and centered at) the current weights.
///
/// When every minibatch constraint is already satisfied at the current
/// weights the gradient vanishes at the proximal center and the weights
/// are returned unchanged — the passive case.
pub fn online_update(state: &OnlineState, minibatch: &TripletBatch) -> Result<OnlineState> {
    if minibatch.is_empty() {
        return Err(Error::invalid_argument("online update needs a non-empty minibatch"));
    }
    check_weight_len(&state.w, minibatch.bits())?;

    let cfg = &state.cfg;
    let center = &state.w;
    let mut w = state.w.clone();
    let mut current = online_objective(&w, center, minibatch, cfg)?;
    let mut eta = cfg.eta;

    for _ in 0..cfg.inner_iters {
        let grad = online_gradient(&w, center, minibatch, cfg)?;
        let mut accepted = None;
        let mut step_eta = eta;
        for _ in 0..=MAX_BACKTRACKS {
            let candidate = egd_step(&w, &grad, step_eta)?;
            let value = online_objective(&candidate, center, minibatch, cfg)?;
            if value <= current {
                accepted = Some((candidate, value));
                break;
            }
            step_eta *= 0.5;
        }
        let Some((next, value)) = accepted else {
            break;
        };
        eta = step_eta;
        w = next;
        current = value;
    }

    Ok(OnlineState {
        w,
        t: state.t + 1,
        cfg: state.cfg.clone(),
    })
}

/// Folds [`online_update`] over a stream of mini-batches.
///
/// Only the current mini-batch and the state are held in memory, so the
/// footprint is independent of the stream length. Returns the final
/// weights and the post-update objective of each step (measured against
/// that step's proximal center).
pub fn train_online<S>(
    stream: S,
    cfg: &LearnerConfig,
    w0: Option<BitWeights>,
) -> Result<(BitWeights, Vec<f64>)>
where
    S: IntoIterator<Item = TripletBatch>,
{
    cfg.validate()?;
    let mut state: Option<OnlineState> = match w0 {
        Some(w) => Some(OnlineState::new(w, cfg.clone())?),
        None => None,
    };
    let mut trace = Vec::new();

    for minibatch in stream {
        if minibatch.len() > cfg.minibatch_size {
            return Err(Error::invalid_argument(format!(
                "stream batch of {} triplets exceeds minibatch_size {}",
                minibatch.len(),
                cfg.minibatch_size
            )));
        }
        let current = match state.take() {
            Some(s) => s,
            None => OnlineState::new(BitWeights::ones(minibatch.bits()), cfg.clone())?,
        };
        let center = current.weights().clone();
        let next = online_update(&current, &minibatch)?;
        trace.push(online_objective(next.weights(), &center, &minibatch, cfg)?);
        state = Some(next);
    }

    match state {
        Some(s) => Ok((s.w, trace)),
        None => Err(Error::invalid_argument("empty stream with no starting weights: code length is unknown")),
    }
}
