//! TOML run configuration: an `[env]` section mirroring [`EnvConfig`] and an
//! optional `[train]` section mirroring [`TrainConfig`].
//!
//! ```toml
//! [env]
//! variant = "mara_orient"
//! model = "models/default_6dof.toml"   # resolved relative to this file
//! target_position = [0.35, 0.20, 0.55]
//! max_episode_steps = 200
//!
//! [env.reward]
//! beta = 1.1
//!
//! [train]
//! total_timesteps = 500000
//! out_dir = "runs"
//! ```
//!
//! Every field has a default; `model` falls back to the built-in 6-DoF
//! model, and a missing `train.n_steps` picks the variant default (1024 for
//! `mara_collision`, 2048 otherwise).

use crate::env::{EnvConfig, TargetBox, Variant};
use crate::error::{Error, Result};
use crate::math::{Quat, Vec3};
use crate::model_file::load_model;
use crate::ppo::trainer::TrainConfig;
use crate::reward::RewardHyperparams;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    env: RawEnv,
    #[serde(default)]
    train: RawTrain,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    variant: String,
    model: Option<PathBuf>,
    target_position: Option<[f64; 3]>,
    target_orientation: Option<[f64; 4]>,
    #[serde(default)]
    reward: RewardHyperparams,
    max_episode_steps: Option<usize>,
    action_scale: Option<f64>,
    velocity_limit: Option<f64>,
    success_threshold: Option<f64>,
    real_speed: Option<bool>,
    initial_positions: Option<Vec<f64>>,
    target_box_lo: Option<[f64; 3]>,
    target_box_hi: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrain {
    total_timesteps: Option<usize>,
    n_steps: Option<usize>,
    n_minibatches: Option<usize>,
    n_epochs: Option<usize>,
    gae_lambda: Option<f64>,
    discount_gamma: Option<f64>,
    base_learning_rate: Option<f64>,
    clip_range: Option<f64>,
    entropy_coef: Option<f64>,
    vf_coef: Option<f64>,
    seed: Option<u64>,
    hidden_size: Option<usize>,
    checkpoint_every: Option<usize>,
    normalize_observations: Option<bool>,
    out_dir: Option<PathBuf>,
    emit_plots: Option<bool>,
}

/// A parsed run configuration, validated and with the model loaded.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub train: TrainConfig,
}

/// Parse `text` as a run configuration. Relative model paths resolve
/// against `base_dir`; `origin` names the source in parse errors.
pub fn parse_config(text: &str, base_dir: &Path, origin: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
            .unwrap_or(1);
        Error::Parse {
            path: origin.to_string(),
            line,
            msg: e.message().to_string(),
        }
    })?;

    let variant: Variant = raw.env.variant.parse()?;
    let mut env = match raw.env.model {
        Some(rel) => {
            let path = if rel.is_absolute() {
                rel
            } else {
                base_dir.join(rel)
            };
            let (model, scene) = load_model(&path)?;
            EnvConfig {
                model,
                scene,
                ..EnvConfig::default_6dof(variant)
            }
        }
        None => EnvConfig::default_6dof(variant),
    };
    env.variant = variant;
    env.reward_params = raw.env.reward;
    if let Some(p) = raw.env.target_position {
        env.target_pose.position = Vec3::from(p);
    }
    if let Some(q) = raw.env.target_orientation {
        env.target_pose.orientation = Quat::from(q);
    }
    if let Some(v) = raw.env.max_episode_steps {
        env.max_episode_steps = v;
    }
    if let Some(v) = raw.env.action_scale {
        env.action_scale = v;
    }
    if let Some(v) = raw.env.velocity_limit {
        env.velocity_limit = v;
    }
    if let Some(v) = raw.env.success_threshold {
        env.success_threshold = v;
    }
    if let Some(v) = raw.env.real_speed {
        env.real_speed = v;
    }
    env.initial_positions = raw.env.initial_positions;
    env.target_randomization = match (raw.env.target_box_lo, raw.env.target_box_hi) {
        (Some(lo), Some(hi)) => Some(TargetBox {
            lo: Vec3::from(lo),
            hi: Vec3::from(hi),
        }),
        (None, None) => None,
        _ => {
            return Err(Error::config(
                "target_box_lo and target_box_hi must be given together",
            ))
        }
    };

    let defaults = TrainConfig::default_for(variant);
    let t = raw.train;
    let train = TrainConfig {
        total_timesteps: t.total_timesteps.unwrap_or(defaults.total_timesteps),
        n_steps: t.n_steps.unwrap_or(defaults.n_steps),
        n_minibatches: t.n_minibatches.unwrap_or(defaults.n_minibatches),
        n_epochs: t.n_epochs.unwrap_or(defaults.n_epochs),
        gae_lambda: t.gae_lambda.unwrap_or(defaults.gae_lambda),
        discount_gamma: t.discount_gamma.unwrap_or(defaults.discount_gamma),
        base_learning_rate: t
            .base_learning_rate
            .unwrap_or(defaults.base_learning_rate),
        clip_range: t.clip_range.unwrap_or(defaults.clip_range),
        entropy_coef: t.entropy_coef.unwrap_or(defaults.entropy_coef),
        vf_coef: t.vf_coef.unwrap_or(defaults.vf_coef),
        seed: t.seed.unwrap_or(defaults.seed),
        hidden_size: t.hidden_size.unwrap_or(defaults.hidden_size),
        checkpoint_every: t.checkpoint_every.unwrap_or(defaults.checkpoint_every),
        normalize_observations: t
            .normalize_observations
            .unwrap_or(defaults.normalize_observations),
        out_dir: t.out_dir.unwrap_or_else(|| defaults.out_dir.clone()),
        emit_plots: t.emit_plots.unwrap_or(defaults.emit_plots),
    };

    env.seed = train.seed;
    env.validate()?;
    train.validate()?;
    Ok(RunConfig { env, train })
}

/// Load a run configuration from a file. Relative model paths inside it
/// resolve against the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base_dir, &path.display().to_string())
}
