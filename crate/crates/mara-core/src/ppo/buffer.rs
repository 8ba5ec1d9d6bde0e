//! Rollout storage and generalized advantage estimation.

use crate::error::{Error, Result};

/// One stored step. Observations are stored post-normalization (they are
/// what the networks saw); actions are the raw pre-clamp samples whose log
/// probability was evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

/// Fixed-length on-policy buffer plus the advantage/return vectors computed
/// from it.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    pub transitions: Vec<Transition>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn with_capacity(n_steps: usize) -> RolloutBuffer {
        RolloutBuffer {
            transitions: Vec::with_capacity(n_steps),
            advantages: Vec::new(),
            returns: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        self.transitions.push(t);
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
        self.advantages.clear();
        self.returns.clear();
    }

    /// Shift and scale the advantages to zero mean and unit variance. A
    /// near-zero spread (σ < 1e-8) leaves the centered values unscaled.
    pub fn normalize_advantages(&mut self) {
        let n = self.advantages.len();
        if n == 0 {
            return;
        }
        let mean = self.advantages.iter().sum::<f64>() / n as f64;
        let var = self
            .advantages
            .iter()
            .map(|a| (a - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        let std = var.sqrt();
        let scale = if std < 1e-8 { 1.0 } else { std };
        for a in &mut self.advantages {
            *a = (*a - mean) / scale;
        }
    }
}

/// Fill `buffer.advantages`/`buffer.returns`:
///
/// `δ_t = r_t + γ·v_{t+1}·(1 − done_t) − v_t` with `v_n = bootstrap_value`,
/// `A_t = δ_t + γλ·(1 − done_t)·A_{t+1}`, and `returns = advantages + values`.
pub fn compute_gae(
    buffer: &mut RolloutBuffer,
    discount_gamma: f64,
    gae_lambda: f64,
    bootstrap_value: f64,
) -> Result<()> {
    let n = buffer.len();
    if n == 0 {
        return Err(Error::contract("cannot compute advantages of an empty buffer"));
    }
    buffer.advantages = vec![0.0; n];
    buffer.returns = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let not_done = if buffer.transitions[t].done { 0.0 } else { 1.0 };
        let v_next = if t + 1 < n {
            buffer.transitions[t + 1].value
        } else {
            bootstrap_value
        };
        let delta = buffer.transitions[t].reward + discount_gamma * v_next * not_done
            - buffer.transitions[t].value;
        acc = delta + discount_gamma * gae_lambda * not_done * acc;
        buffer.advantages[t] = acc;
        buffer.returns[t] = acc + buffer.transitions[t].value;
    }
    Ok(())
}
