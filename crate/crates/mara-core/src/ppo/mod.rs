//! Proximal policy optimization with a hand-rolled MLP and manual
//! backpropagation.
//!
//! The policy is a diagonal Gaussian whose mean comes from a two-hidden-layer
//! tanh network; a second network of the same shape predicts state values.
//! Gradients of the clipped surrogate objective are derived analytically for
//! this fixed architecture and validated against finite differences in the
//! test suite, so no autodiff dependency is needed.

pub mod adam;
pub mod buffer;
pub mod checkpoint;
pub mod gaussian;
pub mod mlp;
pub mod normalizer;
pub mod trainer;
pub mod update;

pub use adam::Adam;
pub use buffer::{compute_gae, RolloutBuffer, Transition};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use mlp::Mlp;
pub use normalizer::RunningNorm;
pub use trainer::{train, run_policy, EpisodeLog, TrainConfig, TrainOutput};
pub use update::{ppo_loss, ppo_loss_grads, ppo_update, Minibatch, PolicyGrads, UpdateStats};

use crate::error::{Error, Result};
use rand_chacha::ChaCha20Rng;

/// All learnable parameters: policy network, state-independent log standard
/// deviations, and a separate value network of identical hidden shape.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub policy: Mlp,
    pub log_std: Vec<f64>,
    pub value: Mlp,
}

impl PolicyParams {
    /// Zero-initialized parameters for the given widths.
    pub fn zeros(obs_dim: usize, act_dim: usize, hidden: usize) -> PolicyParams {
        PolicyParams {
            policy: Mlp::zeros(obs_dim, hidden, act_dim),
            log_std: vec![0.0; act_dim],
            value: Mlp::zeros(obs_dim, hidden, 1),
        }
    }

    /// Fresh parameters: orthogonal weight columns with gain √2 on hidden
    /// layers, 0.01 on the action head, 1.0 on the value head; biases and
    /// log standard deviations zero.
    pub fn init(obs_dim: usize, act_dim: usize, hidden: usize, rng: &mut ChaCha20Rng) -> PolicyParams {
        let mut p = PolicyParams::zeros(obs_dim, act_dim, hidden);
        p.policy.init_orthogonal(0.01, rng);
        p.value.init_orthogonal(1.0, rng);
        p
    }

    pub fn obs_dim(&self) -> usize {
        self.policy.n_in
    }

    pub fn act_dim(&self) -> usize {
        self.policy.n_out
    }

    pub fn hidden(&self) -> usize {
        self.policy.n_hidden
    }

    /// Total number of scalar parameters.
    pub fn n_params(&self) -> usize {
        self.policy.params.len() + self.log_std.len() + self.value.params.len()
    }

    /// Mutable access to parameter `i` in the canonical flat order: policy
    /// network, log_std, value network.
    pub fn param_mut(&mut self, i: usize) -> &mut f64 {
        let np = self.policy.params.len();
        let ns = self.log_std.len();
        if i < np {
            &mut self.policy.params[i]
        } else if i < np + ns {
            &mut self.log_std[i - np]
        } else {
            &mut self.value.params[i - np - ns]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.log_std.len() != self.policy.n_out {
            return Err(Error::contract("log_std width differs from action width"));
        }
        if self.value.n_in != self.policy.n_in
            || self.value.n_hidden != self.policy.n_hidden
            || self.value.n_out != 1
        {
            return Err(Error::contract("value network shape mismatch"));
        }
        let finite = self.policy.params.iter().all(|p| p.is_finite())
            && self.log_std.iter().all(|p| p.is_finite())
            && self.value.params.iter().all(|p| p.is_finite());
        if !finite {
            return Err(Error::Numerical("non-finite policy parameter".into()));
        }
        Ok(())
    }
}
