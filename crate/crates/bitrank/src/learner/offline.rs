//! Batch Ranking-SVM training with EGD or PGD.

use crate::error::{Error, Result};
use crate::sampler::TripletBatch;

use super::{add_data_gradient, check_weight_len, data_objective, BitWeights, LearnerConfig, Optimizer};

/// Component clamp applied after every EGD step.
pub const EGD_CLAMP_MIN: f64 = 1e-12;
pub const EGD_CLAMP_MAX: f64 = 1e12;

const MAX_BACKTRACKS: usize = 20;

/// Value of the batch objective
/// `1/2 ||w||^2 + C_xi * sum hinge^2 + C_gamma * sum deviation^2`.
pub fn objective(w: &BitWeights, batch: &TripletBatch, cfg: &LearnerConfig) -> Result<f64> {
    check_weight_len(w, batch.bits())?;
    let reg = 0.5 * w.as_slice().iter().map(|v| v * v).sum::<f64>();
    Ok(reg + data_objective(w, batch, cfg)?)
}

/// Gradient of [`objective`] at `w`.
pub fn gradient(w: &BitWeights, batch: &TripletBatch, cfg: &LearnerConfig) -> Result<Vec<f64>> {
    check_weight_len(w, batch.bits())?;
    let mut grad = w.as_slice().to_vec();
    add_data_gradient(&mut grad, w, batch, cfg)?;
    Ok(grad)
}

/// Multiplicative update `w_i <- w_i * exp(-eta * g_i)`, clamped into
/// `[EGD_CLAMP_MIN, EGD_CLAMP_MAX]`. Requires strictly positive input.
pub fn egd_step(w: &BitWeights, grad: &[f64], eta: f64) -> Result<BitWeights> {
    if grad.len() != w.len() {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: grad.len(),
        });
    }
    let mut values = Vec::with_capacity(w.len());
    for (&wi, &gi) in w.as_slice().iter().zip(grad) {
        if wi <= 0.0 {
            return Err(Error::InvalidState(format!(
                "EGD requires strictly positive weights, found {wi}"
            )));
        }
        values.push((wi * (-eta * gi).exp()).clamp(EGD_CLAMP_MIN, EGD_CLAMP_MAX));
    }
    BitWeights::new(values)
}

/// Additive update `w_i <- w_i - eta * g_i`, skipped per component when
/// the result would be negative.
pub fn pgd_step(w: &BitWeights, grad: &[f64], eta: f64) -> Result<BitWeights> {
    if grad.len() != w.len() {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: grad.len(),
        });
    }
    let values = w
        .as_slice()
        .iter()
        .zip(grad)
        .map(|(&wi, &gi)| {
            let candidate = wi - eta * gi;
            if candidate >= 0.0 {
                candidate
            } else {
                wi
            }
        })
        .collect();
    BitWeights::new(values)
}

fn take_step(w: &BitWeights, grad: &[f64], eta: f64, optimizer: Optimizer) -> Result<BitWeights> {
    match optimizer {
        Optimizer::Egd => egd_step(w, grad, eta),
        Optimizer::Pgd => pgd_step(w, grad, eta),
    }
}

/// Full-batch training from `w0` (all-ones when absent, so the starting
/// model is exactly the standard Hamming distance).
///
/// A step that would increase the objective is retried with a halved
/// learning rate, up to 20 halvings; the reduced rate is
/// kept for the remaining iterations, so the returned objective trace is
/// non-increasing. Training stops at `max_iters`, when the relative
/// decrease falls below `cfg.tol`, or when no decreasing step exists.
pub fn train_offline(
    batch: &TripletBatch,
    cfg: &LearnerConfig,
    w0: Option<BitWeights>,
) -> Result<(BitWeights, Vec<f64>)> {
    cfg.validate()?;
    if batch.is_empty() {
        return Err(Error::invalid_argument("offline training needs a non-empty triplet batch"));
    }
    let mut w = match w0 {
        Some(w0) => {
            check_weight_len(&w0, batch.bits())?;
            w0
        }
        None => BitWeights::ones(batch.bits()),
    };

    let mut eta = cfg.eta;
    let mut current = objective(&w, batch, cfg)?;
    let mut trace = vec![current];

    for _ in 0..cfg.max_iters {
        let grad = gradient(&w, batch, cfg)?;

        let mut accepted = None;
        let mut step_eta = eta;
        for _ in 0..=MAX_BACKTRACKS {
            let candidate = take_step(&w, &grad, step_eta, cfg.optimizer)?;
            let value = objective(&candidate, batch, cfg)?;
            if value <= current {
                accepted = Some((candidate, value));
                break;
            }
            step_eta *= 0.5;
        }
        let Some((next, value)) = accepted else {
            break; // no decreasing step within the backtracking budget
        };
        eta = step_eta;

        let decrease = (current - value) / current.max(f64::MIN_POSITIVE);
        w = next;
        current = value;
        trace.push(current);
        if decrease < cfg.tol {
            break;
        }
    }
    Ok((w, trace))
}
