//! Ranking-SVM weight learning over ACDV triplets.
//!
//! The model is a non-negative weight per code bit. [`offline`] minimizes the
//! batch objective
//!
//! ```text
//! J(w) = 1/2 ||w||^2
//!      + C_xi    * sum max{0, 1 - (w.a - w.b)}^2     (inter-class margin)
//!      + C_gamma * sum (w.b - w.c)^2                 (intra-class deviation)
//! ```
//!
//! over a [`TripletBatch`](crate::sampler::TripletBatch) where each triplet
//! carries one dissimilar-pair ACDV `a` and two similar-pair ACDVs `b`, `c`.
//! [`online`] replaces the `||w||^2` regularizer with a proximal term
//! `||w - w(t)||^2` around the current weights and applies passive-aggressive
//! mini-batch updates.
//!
//! Non-negativity is maintained by the optimizer itself: exponentiated
//! gradient descent multiplies by `exp(-eta * g)` and stays strictly
//! positive; projected gradient descent skips any component update that
//! would go negative.

pub mod offline;
pub mod online;

pub use offline::{egd_step, gradient, objective, pgd_step, train_offline};
pub use online::{online_gradient, online_objective, online_update, train_online, OnlineState};

use crate::code::MAX_BITS;
use crate::error::{Error, Result};
use crate::sampler::{AcdvTriplet, TripletBatch};

/// Non-negative per-bit weights; the learned model.
#[derive(Debug, Clone, PartialEq)]
pub struct BitWeights {
    values: Vec<f64>,
}

impl BitWeights {
    /// Wraps a weight vector, rejecting negative or non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_BITS {
            return Err(Error::invalid_argument(format!(
                "weight count must be in 1..={MAX_BITS}, got {}",
                values.len()
            )));
        }
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid_argument(format!(
                    "weight {k} must be a non-negative finite value, got {v}"
                )));
            }
        }
        Ok(Self { values })
    }

    /// All-ones weights; weighted Hamming distance with these equals the
    /// standard Hamming distance.
    pub fn ones(len: usize) -> Self {
        assert!(
            (1..=MAX_BITS).contains(&len),
            "weight count must be in 1..={MAX_BITS}, got {len}"
        );
        Self {
            values: vec![1.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length is always >= 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

/// Optimizer choice for the offline learner; the online learner always
/// uses EGD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    /// Exponentiated gradient descent, `w_i <- w_i * exp(-eta * g_i)`.
    Egd,
    /// Projected gradient descent: additive step, skipped per component
    /// whenever it would leave the non-negative orthant.
    Pgd,
}

impl std::fmt::Display for Optimizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Optimizer::Egd => "egd",
            Optimizer::Pgd => "pgd",
        })
    }
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "egd" => Ok(Optimizer::Egd),
            "pgd" => Ok(Optimizer::Pgd),
            other => Err(Error::invalid_argument(format!(
                "unknown optimizer {other:?}, expected \"egd\" or \"pgd\""
            ))),
        }
    }
}

/// Hyperparameters shared by the offline and online learners.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Trade-off weight on violated inter-class margins (squared hinge).
    pub c_xi: f64,
    /// Trade-off weight on intra-class distance deviations.
    pub c_gamma: f64,
    /// Learning rate; backtracking halves it when a step would increase
    /// the objective.
    pub eta: f64,
    pub optimizer: Optimizer,
    /// Full-batch iteration budget for offline training.
    pub max_iters: usize,
    /// Relative objective-decrease threshold that stops offline training.
    pub tol: f64,
    /// Largest mini-batch accepted by online training.
    pub minibatch_size: usize,
    /// EGD steps per online update.
    pub inner_iters: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            c_xi: 1.0,
            c_gamma: 0.1,
            eta: 1e-3,
            optimizer: Optimizer::Egd,
            max_iters: 500,
            tol: 1e-6,
            minibatch_size: 10,
            inner_iters: 3,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_xi > 0.0 && self.c_xi.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "c_xi must be positive, got {}",
                self.c_xi
            )));
        }
        if !(self.c_gamma >= 0.0 && self.c_gamma.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "c_gamma must be non-negative, got {}",
                self.c_gamma
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid_argument("max_iters must be at least 1"));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "tol must be non-negative, got {}",
                self.tol
            )));
        }
        if self.minibatch_size == 0 {
            return Err(Error::invalid_argument("minibatch_size must be at least 1"));
        }
        if self.inner_iters == 0 {
            return Err(Error::invalid_argument("inner_iters must be at least 1"));
        }
        Ok(())
    }
}

fn check_weight_len(w: &BitWeights, bits: usize) -> Result<()> {
    if w.len() != bits {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: bits,
        });
    }
    Ok(())
}

/// Margin and deviation losses of one triplet at `w`.
fn triplet_terms(w: &BitWeights, t: &AcdvTriplet) -> Result<(f64, f64, f64)> {
    let da = t.dissimilar.weighted_sum(w)?;
    let db = t.similar_a.weighted_sum(w)?;
    let dc = t.similar_b.weighted_sum(w)?;
    Ok((da, db, dc))
}

/// Data terms of the objective: squared hinge on the inter-class margin
/// plus squared intra-class deviation, summed over the batch.
pub(crate) fn data_objective(
    w: &BitWeights,
    batch: &TripletBatch,
    cfg: &LearnerConfig,
) -> Result<f64> {
    check_weight_len(w, batch.bits())?;
    let mut total = 0.0;
    for t in batch.triplets() {
        let (da, db, dc) = triplet_terms(w, t)?;
        let margin = da - db;
        if margin < 1.0 {
            let slack = 1.0 - margin;
            total += cfg.c_xi * slack * slack;
        }
        let dev = db - dc;
        total += cfg.c_gamma * dev * dev;
    }
    Ok(total)
}

/// Adds the gradient of the data terms into `grad`.
pub(crate) fn add_data_gradient(
    grad: &mut [f64],
    w: &BitWeights,
    batch: &TripletBatch,
    cfg: &LearnerConfig,
) -> Result<()> {
    check_weight_len(w, batch.bits())?;
    for t in batch.triplets() {
        let (da, db, dc) = triplet_terms(w, t)?;
        let margin = da - db;
        if margin < 1.0 {
            // d/dw of c_xi * (1 - w.a + w.b)^2 over the active set
            let coef = -2.0 * cfg.c_xi * (1.0 - margin);
            for k in t.dissimilar.set_bits() {
                grad[k] += coef;
            }
            for k in t.similar_a.set_bits() {
                grad[k] -= coef;
            }
        }
        let dev = db - dc;
        if cfg.c_gamma != 0.0 {
            let coef = 2.0 * cfg.c_gamma * dev;
            for k in t.similar_a.set_bits() {
                grad[k] += coef;
            }
            for k in t.similar_b.set_bits() {
                grad[k] -= coef;
            }
        }
    }
    Ok(())
}
