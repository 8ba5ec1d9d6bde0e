//! Diagonal Gaussian action distribution with state-independent standard
//! deviations.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{E, PI};

/// Log density of `action` under `Normal(mean, exp(log_std))` per dimension.
pub fn log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    debug_assert_eq!(mean.len(), log_std.len());
    debug_assert_eq!(mean.len(), action.len());
    let mut lp = 0.0;
    for i in 0..mean.len() {
        let z = (action[i] - mean[i]) / log_std[i].exp();
        lp += -0.5 * z * z - log_std[i] - 0.5 * (2.0 * PI).ln();
    }
    lp
}

/// Closed-form entropy `Σ(log_std + ½·ln(2πe))`.
pub fn entropy(log_std: &[f64]) -> f64 {
    log_std
        .iter()
        .map(|ls| ls + 0.5 * (2.0 * PI * E).ln())
        .sum()
}

/// Draw `mean + exp(log_std)·z` with `z ~ N(0, I)`.
pub fn sample(mean: &[f64], log_std: &[f64], rng: &mut ChaCha20Rng) -> Vec<f64> {
    mean.iter()
        .zip(log_std)
        .map(|(m, ls)| {
            let z: f64 = rng.sample(StandardNormal);
            m + ls.exp() * z
        })
        .collect()
}
