//! Rollout collection and the outer training loop.

use crate::env::{make_env, EnvConfig, Observation, ReachEnv, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::metrics::{MetricsRow, METRICS_HEADER};
use crate::ppo::adam::Adam;
use crate::ppo::buffer::{compute_gae, RolloutBuffer, Transition};
use crate::ppo::checkpoint::{save_checkpoint, Checkpoint};
use crate::ppo::gaussian;
use crate::ppo::normalizer::RunningNorm;
use crate::ppo::update::ppo_update;
use crate::ppo::PolicyParams;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::io::Write as _;
use std::path::PathBuf;

/// Training hyperparameters. `seed` is authoritative for the whole run: the
/// trainer stamps it into the environment config so one value drives both
/// RNG streams.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub total_timesteps: usize,
    /// Rollout length per update.
    pub n_steps: usize,
    pub n_minibatches: usize,
    pub n_epochs: usize,
    pub gae_lambda: f64,
    pub discount_gamma: f64,
    /// Peak learning rate; decays linearly to zero at `total_timesteps`.
    pub base_learning_rate: f64,
    pub clip_range: f64,
    pub entropy_coef: f64,
    pub vf_coef: f64,
    pub seed: u64,
    pub hidden_size: usize,
    /// Write a periodic checkpoint every this many updates.
    pub checkpoint_every: usize,
    pub normalize_observations: bool,
    pub out_dir: PathBuf,
    /// Also write plot-ready reward/entropy series and SVG charts.
    pub emit_plots: bool,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            total_timesteps: 1_000_000,
            n_steps: 2048,
            n_minibatches: 32,
            n_epochs: 10,
            gae_lambda: 0.95,
            discount_gamma: 0.99,
            base_learning_rate: 3e-4,
            clip_range: 0.2,
            entropy_coef: 0.0,
            vf_coef: 0.5,
            seed: 0,
            hidden_size: 64,
            checkpoint_every: 50,
            normalize_observations: true,
            out_dir: PathBuf::from("runs"),
            emit_plots: false,
        }
    }
}

impl TrainConfig {
    /// Defaults for a variant: identical except the collision-penalty
    /// distance variant trains on 1024-step rollouts instead of 2048.
    pub fn default_for(variant: crate::env::Variant) -> TrainConfig {
        TrainConfig {
            n_steps: if variant == crate::env::Variant::MaraCollision {
                1024
            } else {
                2048
            },
            ..TrainConfig::default()
        }
    }

    /// Learning rate for an update: `base·(1 − t/T)` with `t` the steps
    /// consumed before the update.
    pub fn learning_rate(&self, update_index: usize) -> f64 {
        let t = (update_index * self.n_steps) as f64;
        let frac = 1.0 - t / self.total_timesteps as f64;
        self.base_learning_rate * frac.max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_minibatches == 0 || self.n_steps % self.n_minibatches != 0 {
            return Err(Error::config(format!(
                "n_steps {} must divide into n_minibatches {}",
                self.n_steps, self.n_minibatches
            )));
        }
        if self.total_timesteps < self.n_steps {
            return Err(Error::config(format!(
                "total_timesteps {} is below one rollout of {} steps",
                self.total_timesteps, self.n_steps
            )));
        }
        if !(self.clip_range > 0.0 && self.clip_range.is_finite()) {
            return Err(Error::config("clip_range must be positive"));
        }
        if !(self.discount_gamma > 0.0 && self.discount_gamma <= 1.0) {
            return Err(Error::config("discount_gamma must be in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::config("gae_lambda must be in [0, 1]"));
        }
        if self.n_epochs == 0 {
            return Err(Error::config("n_epochs must be at least 1"));
        }
        if !(self.base_learning_rate > 0.0 && self.base_learning_rate.is_finite()) {
            return Err(Error::config("base_learning_rate must be positive"));
        }
        if !(self.vf_coef >= 0.0 && self.entropy_coef >= 0.0) {
            return Err(Error::config("loss coefficients must be non-negative"));
        }
        if self.hidden_size == 0 {
            return Err(Error::config("hidden_size must be at least 1"));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::config("checkpoint_every must be at least 1"));
        }
        Ok(())
    }
}

/// Result of a training run. Metrics duplicate what `metrics.csv` in
/// `instance_dir` holds.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub metrics: Vec<MetricsRow>,
    pub params: PolicyParams,
    pub normalizer: Option<RunningNorm>,
    pub instance_dir: PathBuf,
    pub checkpoint_paths: Vec<PathBuf>,
    pub final_checkpoint: PathBuf,
}

/// Run PPO on one environment instance.
///
/// Outputs land under `out_dir/instance-{id}/`: an incrementally flushed
/// `metrics.csv`, periodic `checkpoint_NNNNNN.bin` files, and
/// `checkpoint_final.bin`. The number of updates is
/// `total_timesteps / n_steps`, rounded down.
pub fn train(env_config: &EnvConfig, train_config: &TrainConfig) -> Result<TrainOutput> {
    train_config.validate()?;
    let mut env_config = env_config.clone();
    env_config.seed = train_config.seed;
    let mut env = make_env(env_config)?;

    let mut rng = ChaCha20Rng::seed_from_u64(train_config.seed);
    rng.set_stream(2 * env.config().instance_id + 1);

    let obs_dim = env.observation_dim();
    let act_dim = env.action_dim();
    let mut params = PolicyParams::init(obs_dim, act_dim, train_config.hidden_size, &mut rng);
    let mut optimizer = Adam::new(params.n_params());
    let mut normalizer = train_config
        .normalize_observations
        .then(|| RunningNorm::new(obs_dim));

    let instance_dir = train_config
        .out_dir
        .join(format!("instance-{}", env.config().instance_id));
    std::fs::create_dir_all(&instance_dir)?;
    let metrics_path = instance_dir.join("metrics.csv");
    let mut metrics_file = std::io::BufWriter::new(std::fs::File::create(&metrics_path)?);
    writeln!(metrics_file, "{METRICS_HEADER}")?;

    let n_updates = train_config.total_timesteps / train_config.n_steps;
    let mut metrics = Vec::with_capacity(n_updates);
    let mut checkpoint_paths = Vec::new();
    let mut buffer = RolloutBuffer::with_capacity(train_config.n_steps);
    let mut raw_obs = env.reset().to_vector();
    let mut episode_return = 0.0;
    let mut mean_ep_reward = f64::NAN;

    for update_index in 0..n_updates {
        buffer.clear();
        let mut completed_returns = Vec::new();

        for _ in 0..train_config.n_steps {
            let norm_obs = match &mut normalizer {
                Some(n) => n.update_then_normalize(&raw_obs),
                None => raw_obs.clone(),
            };
            let mean = params.policy.forward(&norm_obs);
            let action = gaussian::sample(&mean, &params.log_std, &mut rng);
            let log_prob = gaussian::log_prob(&mean, &params.log_std, &action);
            let value = params.value.forward(&norm_obs)[0];

            let result = env.step(&action)?;
            episode_return += result.reward;
            buffer.push(Transition {
                observation: norm_obs,
                action,
                log_prob,
                value,
                reward: result.reward,
                done: result.done,
            });
            if result.done {
                completed_returns.push(episode_return);
                episode_return = 0.0;
                raw_obs = env.reset().to_vector();
            } else {
                raw_obs = result.observation.to_vector();
            }
        }

        let bootstrap_obs = match &normalizer {
            Some(n) => n.normalize(&raw_obs),
            None => raw_obs.clone(),
        };
        let bootstrap_value = params.value.forward(&bootstrap_obs)[0];
        compute_gae(
            &mut buffer,
            train_config.discount_gamma,
            train_config.gae_lambda,
            bootstrap_value,
        )?;
        buffer.normalize_advantages();

        let stats = ppo_update(
            &mut params,
            &mut optimizer,
            &buffer,
            train_config,
            update_index,
            &mut rng,
        )?;

        if !completed_returns.is_empty() {
            mean_ep_reward =
                completed_returns.iter().sum::<f64>() / completed_returns.len() as f64;
        }
        let row = MetricsRow {
            update: update_index + 1,
            timesteps: (update_index + 1) * train_config.n_steps,
            mean_ep_reward,
            entropy: stats.entropy,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            clip_frac: stats.clip_frac,
            approx_kl: stats.approx_kl,
        };
        writeln!(metrics_file, "{}", row.to_csv_row())?;
        metrics_file.flush()?;
        metrics.push(row);

        if (update_index + 1) % train_config.checkpoint_every == 0 {
            let path = instance_dir.join(format!("checkpoint_{:06}.bin", update_index + 1));
            save_checkpoint(
                &path,
                &Checkpoint {
                    params: params.clone(),
                    normalizer: normalizer.clone(),
                    trained_timesteps: row.timesteps as u64,
                },
            )?;
            checkpoint_paths.push(path);
        }
    }

    let final_checkpoint = instance_dir.join("checkpoint_final.bin");
    save_checkpoint(
        &final_checkpoint,
        &Checkpoint {
            params: params.clone(),
            normalizer: normalizer.clone(),
            trained_timesteps: (n_updates * train_config.n_steps) as u64,
        },
    )?;

    if train_config.emit_plots {
        crate::plots::emit_plots(&metrics, &instance_dir)?;
    }

    Ok(TrainOutput {
        metrics,
        params,
        normalizer,
        instance_dir,
        checkpoint_paths,
        final_checkpoint,
    })
}

/// Trajectory of one evaluation episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub records: Vec<TrajectoryRecord>,
    pub episode_return: f64,
    pub success: bool,
    pub collided: bool,
    /// RMS distance at the final step, meters.
    pub final_distance: f64,
    /// Orientation error at the final step, radians.
    pub final_orientation: f64,
}

/// Run a stored policy for one episode: mean actions when `deterministic`,
/// sampled actions otherwise (drawn from the agent stream for
/// `(env seed, instance_id)`).
pub fn run_policy(
    checkpoint: &Checkpoint,
    env_config: &EnvConfig,
    deterministic: bool,
) -> Result<EpisodeLog> {
    let mut rng = ChaCha20Rng::seed_from_u64(env_config.seed);
    rng.set_stream(2 * env_config.instance_id + 1);
    let mut env = make_env(env_config.clone())?;
    run_policy_episode(checkpoint, &mut env, deterministic, &mut rng)
}

/// As [`run_policy`], on an existing environment and RNG (lets callers run
/// several episodes in sequence).
pub fn run_policy_episode(
    checkpoint: &Checkpoint,
    env: &mut ReachEnv,
    deterministic: bool,
    rng: &mut ChaCha20Rng,
) -> Result<EpisodeLog> {
    let params = &checkpoint.params;
    if params.obs_dim() != env.observation_dim() || params.act_dim() != env.action_dim() {
        return Err(Error::Load(format!(
            "checkpoint architecture ({} obs, {} act) does not fit the environment ({} obs, {} act)",
            params.obs_dim(),
            params.act_dim(),
            env.observation_dim(),
            env.action_dim()
        )));
    }
    if let Some(n) = &checkpoint.normalizer {
        if n.dim() != env.observation_dim() {
            return Err(Error::Load(
                "checkpoint normalizer width does not fit the environment".into(),
            ));
        }
    }

    let mut observation: Observation = env.reset();
    let mut records = Vec::new();
    let mut episode_return = 0.0;
    let mut step = 0usize;
    loop {
        step += 1;
        let raw = observation.to_vector();
        let net_in = match &checkpoint.normalizer {
            Some(n) => n.normalize(&raw),
            None => raw,
        };
        let mean = params.policy.forward(&net_in);
        let action = if deterministic {
            mean
        } else {
            gaussian::sample(&mean, &params.log_std, rng)
        };
        let result = env.step(&action)?;
        episode_return += result.reward;
        records.push(TrajectoryRecord {
            step,
            joint_positions: result.observation.joint_positions.clone(),
            ee_position: env.target().position - result.observation.ee_to_target,
            reward: result.reward,
            done: result.done,
        });
        if result.done {
            return Ok(EpisodeLog {
                records,
                episode_return,
                success: result.info.success,
                collided: result.info.collided,
                final_distance: result.info.distance_x,
                final_orientation: result.info.orientation_y,
            });
        }
        observation = result.observation;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Variant;
    use crate::ppo::checkpoint::load_checkpoint;
    use std::path::Path;

    fn tiny_config(dir: &Path) -> (EnvConfig, TrainConfig) {
        let env_config = EnvConfig::planar_2dof(Variant::Mara);
        let train_config = TrainConfig {
            total_timesteps: 128,
            n_steps: 64,
            n_minibatches: 4,
            n_epochs: 2,
            checkpoint_every: 1,
            out_dir: dir.to_path_buf(),
            ..TrainConfig::default()
        };
        (env_config, train_config)
    }

    #[test]
    fn learning_rate_schedule_is_linear_and_exact() {
        let config = TrainConfig {
            total_timesteps: 500_000,
            n_steps: 2048,
            ..TrainConfig::default()
        };
        assert_eq!(config.learning_rate(0), 3e-4);
        assert!((config.learning_rate(1) - 0.0002987712).abs() < 1e-15);
        // At and beyond the final timestep the rate floors at zero.
        let last = 500_000 / 2048;
        assert!(config.learning_rate(last) >= 0.0);
        assert_eq!(config.learning_rate(10 * last), 0.0);
        // Linearity: equal decrements per update.
        let d1 = config.learning_rate(0) - config.learning_rate(1);
        let d2 = config.learning_rate(7) - config.learning_rate(8);
        assert!((d1 - d2).abs() < 1e-18);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = TrainConfig {
            n_steps: 100,
            n_minibatches: 32,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            total_timesteps: 100,
            n_steps: 2048,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            discount_gamma: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn collision_variant_default_uses_shorter_rollouts() {
        assert_eq!(TrainConfig::default_for(Variant::Mara).n_steps, 2048);
        assert_eq!(TrainConfig::default_for(Variant::MaraCollision).n_steps, 1024);
        assert_eq!(
            TrainConfig::default_for(Variant::MaraCollisionOrient).n_steps,
            2048
        );
    }

    #[test]
    fn tiny_budget_run_is_reproducible_bitwise() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let (env_config, mut train_config) = tiny_config(dir_a.path());
        let out_a = train(&env_config, &train_config).unwrap();
        train_config.out_dir = dir_b.path().to_path_buf();
        let out_b = train(&env_config, &train_config).unwrap();

        assert_eq!(out_a.metrics.len(), 2);
        for (ra, rb) in out_a.metrics.iter().zip(&out_b.metrics) {
            assert_eq!(ra.to_csv_row(), rb.to_csv_row());
        }
        assert_eq!(out_a.params, out_b.params);
        assert_eq!(out_a.normalizer, out_b.normalizer);
        let csv_a = std::fs::read(out_a.instance_dir.join("metrics.csv")).unwrap();
        let csv_b = std::fs::read(out_b.instance_dir.join("metrics.csv")).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn seeds_change_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let (env_config, mut train_config) = tiny_config(dir.path());
        let out_a = train(&env_config, &train_config).unwrap();
        train_config.seed = 1;
        train_config.out_dir = dir.path().join("b");
        let out_b = train(&env_config, &train_config).unwrap();
        assert_ne!(out_a.params, out_b.params);
    }

    #[test]
    fn outputs_land_in_the_instance_directory() {
        let dir = tempfile::tempdir().unwrap();
        let (mut env_config, train_config) = tiny_config(dir.path());
        env_config.instance_id = 3;
        let out = train(&env_config, &train_config).unwrap();
        assert!(out.instance_dir.ends_with("instance-3"));
        // checkpoint_every=1 over 2 updates → two periodic checkpoints.
        assert_eq!(out.checkpoint_paths.len(), 2);
        assert!(out.checkpoint_paths[0].ends_with("checkpoint_000001.bin"));
        assert!(out.final_checkpoint.exists());
        let ckpt = load_checkpoint(&out.final_checkpoint).unwrap();
        assert_eq!(ckpt.params, out.params);
        assert_eq!(ckpt.trained_timesteps, 128);
        assert_eq!(ckpt.normalizer, out.normalizer);
        let metrics = crate::metrics::read_metrics_csv(&out.instance_dir.join("metrics.csv"))
            .unwrap();
        assert_eq!(metrics.len(), 2);
        assert_eq!(metrics[1].timesteps, 128);
    }

    #[test]
    fn fresh_policy_runs_to_the_step_cap_without_success() {
        let dir = tempfile::tempdir().unwrap();
        let (env_config, train_config) = tiny_config(dir.path());
        // Build an untrained checkpoint by hand.
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let ckpt = Checkpoint {
            params: PolicyParams::init(11, 2, 64, &mut rng),
            normalizer: None,
            trained_timesteps: 0,
        };
        let _ = train_config;
        let log = run_policy(&ckpt, &env_config, true).unwrap();
        assert!(!log.success);
        assert_eq!(log.records.len(), env_config.max_episode_steps);
        assert!(log.records.last().unwrap().done);
    }

    #[test]
    fn architecture_mismatch_is_a_load_error() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let ckpt = Checkpoint {
            params: PolicyParams::init(11, 2, 64, &mut rng),
            normalizer: None,
            trained_timesteps: 0,
        };
        let env_config = EnvConfig::default_6dof(Variant::Mara);
        assert!(matches!(
            run_policy(&ckpt, &env_config, true),
            Err(Error::Load(_))
        ));
    }

    #[test]
    fn mean_ep_reward_is_nan_until_an_episode_completes() {
        let dir = tempfile::tempdir().unwrap();
        let mut env_config = EnvConfig::planar_2dof(Variant::Mara);
        // 64-step rollout cannot finish a 200-step episode (target far away,
        // tiny random policy steps).
        env_config.max_episode_steps = 200;
        let train_config = TrainConfig {
            total_timesteps: 64,
            n_steps: 64,
            n_minibatches: 4,
            n_epochs: 1,
            out_dir: dir.path().to_path_buf(),
            ..TrainConfig::default()
        };
        let out = train(&env_config, &train_config).unwrap();
        assert!(out.metrics[0].mean_ep_reward.is_nan());
    }

    #[test]
    fn completed_episodes_produce_a_finite_mean_reward() {
        let dir = tempfile::tempdir().unwrap();
        let mut env_config = EnvConfig::planar_2dof(Variant::Mara);
        env_config.max_episode_steps = 25;
        let train_config = TrainConfig {
            total_timesteps: 128,
            n_steps: 64,
            n_minibatches: 4,
            n_epochs: 1,
            out_dir: dir.path().to_path_buf(),
            ..TrainConfig::default()
        };
        let out = train(&env_config, &train_config).unwrap();
        assert!(out.metrics[0].mean_ep_reward.is_finite());
        assert!(out.metrics[1].mean_ep_reward.is_finite());
    }
}
