//! The four gym-style reach environments over the kinematic simulator.
//!
//! All variants share the same dynamics: actions are per-joint position
//! deltas, integrated at a fixed 10 ms control period, rate-limited by the
//! servo velocity cap and clamped to the joint limits. They differ only in
//! the reward dispatched and in whether a collision is penalized — a
//! collision ends the episode in every variant.

use crate::collision::{check_state, CollisionScene, ContactReport};
use crate::error::{Error, Result};
use crate::kinematics::{
    forward_kinematics, quaternion_angle, rms_distance, JointState, Pose, RobotModel,
};
use crate::math::{Quat, Vec3};
use crate::reward::{
    reward_collision, reward_collision_orient, reward_mara, reward_orient_core, RewardHyperparams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

/// Simulated control period per `step`, seconds.
pub const CONTROL_PERIOD: f64 = 0.01;

/// Hard ceiling on the servo velocity flag, radians/second.
pub const VELOCITY_LIMIT_MAX: f64 = 1.57;

/// Which reward the environment dispatches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Distance-only reward.
    Mara,
    /// Distance and orientation reward.
    MaraOrient,
    /// Distance reward with a collision penalty.
    MaraCollision,
    /// Distance and orientation reward with a collision penalty.
    MaraCollisionOrient,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Mara,
        Variant::MaraOrient,
        Variant::MaraCollision,
        Variant::MaraCollisionOrient,
    ];

    /// Whether the reward uses the orientation error `y`.
    pub fn uses_orientation(self) -> bool {
        matches!(self, Variant::MaraOrient | Variant::MaraCollisionOrient)
    }

    /// Whether a collision subtracts a penalty (it ends the episode in every
    /// variant either way).
    pub fn penalizes_collision(self) -> bool {
        matches!(self, Variant::MaraCollision | Variant::MaraCollisionOrient)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Variant::Mara => "mara",
            Variant::MaraOrient => "mara_orient",
            Variant::MaraCollision => "mara_collision",
            Variant::MaraCollisionOrient => "mara_collision_orient",
        };
        f.write_str(name)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "mara" => Ok(Variant::Mara),
            "mara_orient" => Ok(Variant::MaraOrient),
            "mara_collision" => Ok(Variant::MaraCollision),
            "mara_collision_orient" => Ok(Variant::MaraCollisionOrient),
            other => Err(Error::config(format!(
                "unknown variant '{other}' (expected mara, mara_orient, \
                 mara_collision, or mara_collision_orient)"
            ))),
        }
    }
}

/// Axis-aligned box for per-episode target randomization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetBox {
    pub lo: Vec3,
    pub hi: Vec3,
}

/// Everything needed to build one environment instance.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub variant: Variant,
    pub model: RobotModel,
    pub scene: CollisionScene,
    /// Reach target. The orientation component is consumed only by the
    /// orientation-aware variants.
    pub target_pose: Pose,
    pub reward_params: RewardHyperparams,
    pub max_episode_steps: usize,
    /// Radians of commanded joint travel per unit action, before rate
    /// limiting.
    pub action_scale: f64,
    /// Servo velocity cap, radians/second, in (0, 1.57]. The effective cap
    /// per joint is the smaller of this and the joint's own limit.
    pub velocity_limit: f64,
    /// RMS distance below which the episode ends in success, meters.
    pub success_threshold: f64,
    /// Throttle stepping to wall-clock time (one control period per step)
    /// instead of running as fast as possible.
    pub real_speed: bool,
    pub seed: u64,
    /// Namespaces RNG streams and output paths so parallel instances never
    /// collide.
    pub instance_id: u64,
    /// Joint angles after reset; all zeros when absent.
    pub initial_positions: Option<Vec<f64>>,
    /// When set, a fresh target position is drawn uniformly from this box at
    /// every reset.
    pub target_randomization: Option<TargetBox>,
}

impl EnvConfig {
    /// Config for the shipped 6-DoF model with an off-axis reachable target.
    pub fn default_6dof(variant: Variant) -> EnvConfig {
        EnvConfig {
            variant,
            model: RobotModel::default_6dof(),
            scene: CollisionScene::default_6dof(),
            target_pose: Pose {
                position: Vec3::new(0.35, 0.20, 0.55),
                orientation: Quat::IDENTITY,
            },
            reward_params: RewardHyperparams::default(),
            max_episode_steps: 200,
            action_scale: 0.025,
            velocity_limit: VELOCITY_LIMIT_MAX,
            success_threshold: 0.02,
            real_speed: false,
            seed: 0,
            instance_id: 0,
            initial_positions: None,
            target_randomization: None,
        }
    }

    /// Config for the reduced planar model used in desk-scale training.
    pub fn planar_2dof(variant: Variant) -> EnvConfig {
        EnvConfig {
            model: RobotModel::planar_2dof(),
            scene: CollisionScene::planar_2dof(),
            target_pose: Pose {
                position: Vec3::new(0.3, 0.4, 0.2),
                orientation: Quat::IDENTITY,
            },
            ..EnvConfig::default_6dof(variant)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.scene.validate(self.model.dof() + 1)?;
        self.reward_params.validate()?;
        if !(self.velocity_limit > 0.0 && self.velocity_limit <= VELOCITY_LIMIT_MAX) {
            return Err(Error::config(format!(
                "velocity_limit {} outside (0, {VELOCITY_LIMIT_MAX}]",
                self.velocity_limit
            )));
        }
        if self.max_episode_steps < 1 {
            return Err(Error::config("max_episode_steps must be at least 1"));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::config("success_threshold must be positive"));
        }
        if !(self.action_scale > 0.0 && self.action_scale.is_finite()) {
            return Err(Error::config("action_scale must be positive"));
        }
        if !self.target_pose.position.is_finite() {
            return Err(Error::config("target position must be finite"));
        }
        if self.target_pose.orientation.normalized().is_none() {
            return Err(Error::config("target orientation must be non-zero"));
        }
        if let Some(init) = &self.initial_positions {
            if init.len() != self.model.dof() {
                return Err(Error::config(format!(
                    "initial_positions has {} entries, model has {} joints",
                    init.len(),
                    self.model.dof()
                )));
            }
            for (i, (&p, j)) in init.iter().zip(&self.model.joints).enumerate() {
                if !(j.limit_lo..=j.limit_hi).contains(&p) {
                    return Err(Error::config(format!(
                        "initial position {p} of joint {i} violates its limits"
                    )));
                }
            }
        }
        if let Some(b) = &self.target_randomization {
            if !(b.lo.x <= b.hi.x && b.lo.y <= b.hi.y && b.lo.z <= b.hi.z) {
                return Err(Error::config("target_randomization box has lo > hi"));
            }
        }
        Ok(())
    }
}

/// Per-step agent input. The layout is identical across variants so policies
/// keep a fixed input width: for an n-joint model the flattened vector has
/// `2n + 7` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub joint_positions: Vec<f64>,
    pub joint_velocities: Vec<f64>,
    /// `target - end_effector`, meters.
    pub ee_to_target: Vec3,
    pub ee_orientation: Quat,
}

impl Observation {
    /// Flattened width for an n-joint model.
    pub fn dim(dof: usize) -> usize {
        2 * dof + 7
    }

    /// Flatten in the fixed order: positions, velocities, `ee_to_target`,
    /// orientation quaternion (w, x, y, z).
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Observation::dim(self.joint_positions.len()));
        v.extend_from_slice(&self.joint_positions);
        v.extend_from_slice(&self.joint_velocities);
        v.extend_from_slice(&self.ee_to_target.to_array());
        v.extend_from_slice(&self.ee_orientation.to_array());
        v
    }
}

/// Diagnostics attached to every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub collided: bool,
    /// RMS distance to the target, meters.
    pub distance_x: f64,
    /// Orientation error against the target, radians (reported for all
    /// variants; only orientation-aware rewards consume it).
    pub orientation_y: f64,
    pub success: bool,
}

/// Outcome of one `step` call.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    /// True when the episode ended: success, collision, or step cap.
    pub done: bool,
    pub info: StepInfo,
}

/// One reach environment instance. Single-threaded; distinct instances with
/// distinct `instance_id`s may run on separate threads.
#[derive(Debug, Clone)]
pub struct ReachEnv {
    config: EnvConfig,
    state: JointState,
    target: Pose,
    step_count: usize,
    done: bool,
    awaiting_reset: bool,
    rng: ChaCha20Rng,
    next_deadline: Option<Instant>,
}

/// Construct an environment in its pre-reset state.
///
/// RNG streams are derived from `(seed, instance_id)`: the environment draws
/// from stream `2·instance_id`, leaving `2·instance_id + 1` for the agent
/// driving it, so instances never share randomness.
pub fn make_env(config: EnvConfig) -> Result<ReachEnv> {
    config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    rng.set_stream(2 * config.instance_id);
    let dof = config.model.dof();
    let target = config.target_pose;
    Ok(ReachEnv {
        config,
        state: JointState::zeros(dof),
        target,
        step_count: 0,
        done: false,
        awaiting_reset: true,
        rng,
        next_deadline: None,
    })
}

impl ReachEnv {
    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn dof(&self) -> usize {
        self.config.model.dof()
    }

    /// Width of the flattened observation vector.
    pub fn observation_dim(&self) -> usize {
        Observation::dim(self.dof())
    }

    /// Width of the action vector (one entry per joint).
    pub fn action_dim(&self) -> usize {
        self.dof()
    }

    /// Target pose for the current episode.
    pub fn target(&self) -> Pose {
        self.target
    }

    /// Replace the target for the current episode (kept across steps, reset
    /// re-derives it from the config).
    pub fn set_target(&mut self, target: Pose) {
        self.target = target;
    }

    /// Current joint state.
    pub fn joint_state(&self) -> &JointState {
        &self.state
    }

    fn ee_pose(&self) -> Pose {
        let poses = forward_kinematics(&self.config.model, &self.state)
            .expect("state dimension matches model");
        *poses.last().expect("chain is non-empty")
    }

    /// Observation of the current state.
    pub fn observe(&self) -> Observation {
        let ee = self.ee_pose();
        Observation {
            joint_positions: self.state.positions.clone(),
            joint_velocities: self.state.velocities.clone(),
            ee_to_target: self.target.position - ee.position,
            ee_orientation: ee.orientation,
        }
    }

    /// Start a new episode: joints to the configured initial pose with zero
    /// velocity, step counter cleared, target re-derived (drawn fresh when
    /// randomization is configured).
    pub fn reset(&mut self) -> Observation {
        self.state = match &self.config.initial_positions {
            Some(init) => JointState {
                positions: init.clone(),
                velocities: vec![0.0; init.len()],
            },
            None => JointState::zeros(self.dof()),
        };
        self.step_count = 0;
        self.done = false;
        self.awaiting_reset = false;
        self.next_deadline = None;
        self.target = self.config.target_pose;
        if let Some(b) = &self.config.target_randomization {
            self.target.position = Vec3::new(
                self.rng.gen_range(b.lo.x..=b.hi.x),
                self.rng.gen_range(b.lo.y..=b.hi.y),
                self.rng.gen_range(b.lo.z..=b.hi.z),
            );
        }
        self.observe()
    }

    /// Advance one control period.
    ///
    /// Actions are clamped to [-1, 1] per joint, scaled by `action_scale`,
    /// rate-limited to the effective velocity cap, and integrated into the
    /// joint positions (saturating at the joint limits). The reward for the
    /// resulting state is dispatched according to the variant.
    pub fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if self.awaiting_reset || self.done {
            return Err(Error::contract(
                "step called on a finished episode; call reset first",
            ));
        }
        if action.len() != self.dof() {
            return Err(Error::contract(format!(
                "action has {} entries, model has {} joints",
                action.len(),
                self.dof()
            )));
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::contract("action contains a non-finite entry"));
        }

        for (i, (&a, joint)) in action.iter().zip(&self.config.model.joints).enumerate() {
            let rate_cap =
                joint.velocity_limit.min(self.config.velocity_limit) * CONTROL_PERIOD;
            let delta = (self.config.action_scale * a.clamp(-1.0, 1.0)).clamp(-rate_cap, rate_cap);
            let old = self.state.positions[i];
            let new = (old + delta).clamp(joint.limit_lo, joint.limit_hi);
            self.state.positions[i] = new;
            self.state.velocities[i] = (new - old) / CONTROL_PERIOD;
        }

        let poses = forward_kinematics(&self.config.model, &self.state)?;
        let ee = *poses.last().expect("chain is non-empty");
        let contact: ContactReport = check_state(&self.config.scene, &poses)?;

        let x = rms_distance(ee.position, self.target.position);
        let y = quaternion_angle(ee.orientation, self.target.orientation)?;
        let h = &self.config.reward_params;
        let reward = match self.config.variant {
            Variant::Mara => reward_mara(x, h)?,
            Variant::MaraOrient => reward_orient_core(x, y, h)?,
            Variant::MaraCollision => reward_collision(x, contact.colliding, h)?,
            Variant::MaraCollisionOrient => reward_collision_orient(x, y, contact.colliding, h)?,
        };

        self.step_count += 1;
        let success = x < self.config.success_threshold;
        let done = contact.colliding || success || self.step_count >= self.config.max_episode_steps;
        self.done = done;

        if self.config.real_speed {
            self.throttle();
        }

        Ok(StepResult {
            observation: self.observe(),
            reward,
            done,
            info: StepInfo {
                collided: contact.colliding,
                distance_x: x,
                orientation_y: y,
                success,
            },
        })
    }

    /// Sleep until one control period after the previous step returned.
    fn throttle(&mut self) {
        let period = Duration::from_secs_f64(CONTROL_PERIOD);
        let now = Instant::now();
        let deadline = match self.next_deadline {
            Some(d) => d,
            None => now + period,
        };
        if deadline > now {
            std::thread::sleep(deadline - now);
        }
        self.next_deadline = Some(deadline.max(now) + period);
    }
}

/// One row of a trajectory or random-agent log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Step index within the run, starting at 1.
    pub step: usize,
    pub joint_positions: Vec<f64>,
    pub ee_position: Vec3,
    pub reward: f64,
    pub done: bool,
}

/// Log returned by `run_random_agent`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomAgentLog {
    pub records: Vec<TrajectoryRecord>,
    /// Total reward of every episode completed during the run.
    pub episode_returns: Vec<f64>,
}

impl RandomAgentLog {
    pub fn mean_reward(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.reward).sum::<f64>() / self.records.len() as f64
    }
}

/// Drive an environment with uniform random actions for `n_steps`, resetting
/// whenever an episode ends. Deterministic for a given `(seed, instance_id)`.
pub fn run_random_agent(config: EnvConfig, n_steps: usize) -> Result<RandomAgentLog> {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    rng.set_stream(2 * config.instance_id + 1);
    let mut env = make_env(config)?;
    env.reset();

    let mut records = Vec::with_capacity(n_steps);
    let mut episode_returns = Vec::new();
    let mut episode_return = 0.0;
    let dof = env.dof();
    let mut action = vec![0.0; dof];

    for step in 1..=n_steps {
        for a in &mut action {
            *a = rng.gen_range(-1.0..=1.0);
        }
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
            episode_returns.push(episode_return);
            episode_return = 0.0;
            env.reset();
        }
    }

    Ok(RandomAgentLog {
        records,
        episode_returns,
    })
}
