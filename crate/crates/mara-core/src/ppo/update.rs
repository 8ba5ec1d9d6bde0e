//! Clipped-surrogate policy updates with analytic gradients.

use crate::error::{Error, Result};
use crate::ppo::adam::Adam;
use crate::ppo::buffer::RolloutBuffer;
use crate::ppo::gaussian;
use crate::ppo::trainer::TrainConfig;
use crate::ppo::PolicyParams;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha20Rng;

/// Index view into a rollout buffer: the samples one gradient step sees.
#[derive(Debug, Clone, Copy)]
pub struct Minibatch<'a> {
    pub buffer: &'a RolloutBuffer,
    pub indices: &'a [usize],
}

/// Parameter gradients in the same layout as [`PolicyParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGrads {
    pub policy: Vec<f64>,
    pub log_std: Vec<f64>,
    pub value: Vec<f64>,
}

impl PolicyGrads {
    fn zeros(params: &PolicyParams) -> PolicyGrads {
        PolicyGrads {
            policy: vec![0.0; params.policy.params.len()],
            log_std: vec![0.0; params.log_std.len()],
            value: vec![0.0; params.value.params.len()],
        }
    }
}

/// Diagnostics of one update (or one minibatch): means of the per-sample
/// quantities. `value_loss` is the raw mean squared error, before the value
/// coefficient is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_frac: f64,
    pub approx_kl: f64,
}

/// The scalar PPO objective on a minibatch:
/// `−mean(min(r·A, clip(r, 1±ε)·A)) + vf_coef·mean((v − ret)²) − ent_coef·H`.
pub fn ppo_loss(
    params: &PolicyParams,
    mb: Minibatch<'_>,
    clip_range: f64,
    vf_coef: f64,
    ent_coef: f64,
) -> Result<f64> {
    let (loss, _) = loss_pieces(params, mb, clip_range, vf_coef, ent_coef, None)?;
    Ok(loss)
}

/// Loss, analytic parameter gradients, and per-minibatch stats in one pass.
pub fn ppo_loss_grads(
    params: &PolicyParams,
    mb: Minibatch<'_>,
    clip_range: f64,
    vf_coef: f64,
    ent_coef: f64,
) -> Result<(PolicyGrads, UpdateStats)> {
    let mut grads = PolicyGrads::zeros(params);
    let (_, stats) = loss_pieces(params, mb, clip_range, vf_coef, ent_coef, Some(&mut grads))?;
    Ok((grads, stats))
}

fn loss_pieces(
    params: &PolicyParams,
    mb: Minibatch<'_>,
    clip_range: f64,
    vf_coef: f64,
    ent_coef: f64,
    mut grads: Option<&mut PolicyGrads>,
) -> Result<(f64, UpdateStats)> {
    if mb.indices.is_empty() {
        return Err(Error::contract("empty minibatch"));
    }
    params.validate()?;
    let n = mb.indices.len() as f64;
    let act_dim = params.act_dim();

    let mut surrogate_sum = 0.0;
    let mut value_mse_sum = 0.0;
    let mut clip_count = 0usize;
    let mut kl_sum = 0.0;

    for &i in mb.indices {
        let t = &mb.buffer.transitions[i];
        let adv = mb.buffer.advantages[i];
        let ret = mb.buffer.returns[i];

        let policy_cache = params.policy.forward_cached(&t.observation);
        let mean = &policy_cache.output;
        let log_prob = gaussian::log_prob(mean, &params.log_std, &t.action);
        let ratio = (log_prob - t.log_prob).exp();
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - clip_range, 1.0 + clip_range) * adv;
        surrogate_sum += unclipped.min(clipped);
        if (ratio - 1.0).abs() > clip_range {
            clip_count += 1;
        }
        kl_sum += (ratio - 1.0) - (log_prob - t.log_prob);

        let value_cache = params.value.forward_cached(&t.observation);
        let v = value_cache.output[0];
        value_mse_sum += (v - ret) * (v - ret);

        if let Some(g) = grads.as_deref_mut() {
            // −min picks the unclipped branch iff it is the smaller term;
            // the clipped branch is flat in the parameters.
            let d_log_prob = if unclipped <= clipped { -adv * ratio / n } else { 0.0 };
            if d_log_prob != 0.0 {
                let mut d_mean = vec![0.0; act_dim];
                for j in 0..act_dim {
                    let sigma = params.log_std[j].exp();
                    let z = (t.action[j] - mean[j]) / sigma;
                    d_mean[j] = d_log_prob * z / sigma;
                    g.log_std[j] += d_log_prob * (z * z - 1.0);
                }
                params.policy.backward(&policy_cache, &d_mean, &mut g.policy);
            }
            let d_v = vf_coef * 2.0 * (v - ret) / n;
            params.value.backward(&value_cache, &[d_v], &mut g.value);
        }
    }

    let entropy = gaussian::entropy(&params.log_std);
    if let Some(g) = grads.as_deref_mut() {
        for j in 0..act_dim {
            g.log_std[j] -= ent_coef;
        }
    }

    let policy_loss = -surrogate_sum / n;
    let value_loss = value_mse_sum / n;
    let loss = policy_loss + vf_coef * value_loss - ent_coef * entropy;
    if !loss.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite loss (policy {policy_loss}, value {value_loss}, entropy {entropy})"
        )));
    }

    let stats = UpdateStats {
        policy_loss,
        value_loss,
        entropy,
        clip_frac: clip_count as f64 / n,
        approx_kl: kl_sum / n,
    };
    Ok((loss, stats))
}

/// One full PPO update: `n_epochs` passes over the buffer, each epoch
/// re-shuffled into `n_minibatches` slices, one optimizer step per slice.
/// Returns the stats averaged over every gradient step taken.
pub fn ppo_update(
    params: &mut PolicyParams,
    optimizer: &mut Adam,
    buffer: &RolloutBuffer,
    config: &TrainConfig,
    update_index: usize,
    rng: &mut ChaCha20Rng,
) -> Result<UpdateStats> {
    if buffer.advantages.len() != buffer.len() || buffer.returns.len() != buffer.len() {
        return Err(Error::contract(
            "advantages not computed; call compute_gae before ppo_update",
        ));
    }
    if buffer.len() % config.n_minibatches != 0 {
        return Err(Error::contract(format!(
            "buffer length {} not divisible into {} minibatches",
            buffer.len(),
            config.n_minibatches
        )));
    }
    let lr = config.learning_rate(update_index);
    let mb_size = buffer.len() / config.n_minibatches;
    let mut indices: Vec<usize> = (0..buffer.len()).collect();

    let mut acc = UpdateStats {
        policy_loss: 0.0,
        value_loss: 0.0,
        entropy: 0.0,
        clip_frac: 0.0,
        approx_kl: 0.0,
    };
    let mut n_batches = 0.0;

    for _ in 0..config.n_epochs {
        indices.shuffle(rng);
        for chunk in indices.chunks(mb_size) {
            let mb = Minibatch {
                buffer,
                indices: chunk,
            };
            let (grads, stats) = ppo_loss_grads(
                params,
                mb,
                config.clip_range,
                config.vf_coef,
                config.entropy_coef,
            )?;
            optimizer.step(
                params
                    .policy
                    .params
                    .iter_mut()
                    .chain(params.log_std.iter_mut())
                    .chain(params.value.params.iter_mut()),
                grads
                    .policy
                    .iter()
                    .chain(grads.log_std.iter())
                    .chain(grads.value.iter())
                    .copied(),
                lr,
            );
            acc.policy_loss += stats.policy_loss;
            acc.value_loss += stats.value_loss;
            acc.entropy += stats.entropy;
            acc.clip_frac += stats.clip_frac;
            acc.approx_kl += stats.approx_kl;
            n_batches += 1.0;
        }
    }

    params.validate()?;
    Ok(UpdateStats {
        policy_loss: acc.policy_loss / n_batches,
        value_loss: acc.value_loss / n_batches,
        entropy: acc.entropy / n_batches,
        clip_frac: acc.clip_frac / n_batches,
        approx_kl: acc.approx_kl / n_batches,
    })
}
