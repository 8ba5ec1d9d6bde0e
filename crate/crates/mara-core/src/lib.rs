//! Kinematic reach environments for a six-jointed arm and a from-scratch
//! PPO trainer over them.
//!
//! The crate is organized bottom-up:
//!
//! - [`math`]: vectors and quaternions.
//! - [`kinematics`]: robot models, forward kinematics, pose errors.
//! - [`collision`]: capsule scenes and contact checks.
//! - [`reward`]: the exponential distance/orientation/collision rewards and
//!   the reward-surface export.
//! - [`mod@env`]: the four gym-style reach environments.
//! - [`ppo`]: networks, GAE, the clipped-surrogate update, training loop,
//!   and checkpoints.
//! - [`eval`], [`metrics`], [`plots`]: accuracy reports and training logs.
//! - [`model_file`], [`config_file`], [`trajectory`]: file formats.

pub mod collision;
pub mod config_file;
pub mod env;
pub mod error;
pub mod eval;
pub mod kinematics;
pub mod math;
pub mod metrics;
pub mod model_file;
pub mod plots;
pub mod ppo;
pub mod reward;
pub mod trajectory;

pub use collision::{check_state, Capsule, CollisionScene, ContactPair, ContactReport};
pub use config_file::{load_config, parse_config, RunConfig};
pub use env::{
    make_env, run_random_agent, EnvConfig, Observation, RandomAgentLog, ReachEnv, StepInfo,
    StepResult, TargetBox, TrajectoryRecord, Variant, CONTROL_PERIOD, VELOCITY_LIMIT_MAX,
};
pub use error::{Error, Result};
pub use eval::{benchmark, AccuracyReport, AxisStat};
pub use kinematics::{
    forward_kinematics, quaternion_angle, rms_distance, Joint, JointState, Pose, RobotModel,
};
pub use math::{Quat, Vec3};
pub use metrics::{
    metrics_from_csv, metrics_to_csv, read_metrics_csv, write_metrics_csv, MetricsRow,
};
pub use model_file::{load_model, save_model, FORMAT_VERSION};
pub use plots::{emit_plots, emit_plots_from_file, PlotsOutput};
pub use ppo::{
    load_checkpoint, run_policy, save_checkpoint, train, Checkpoint, PolicyParams, TrainConfig,
    TrainOutput,
};
pub use reward::{
    distance_fraction, reward_collision, reward_collision_orient, reward_mara,
    reward_orient_core, reward_surface, write_surface_csv, RewardHyperparams, SurfacePoint,
};
pub use trajectory::{
    read_trajectory_csv, trajectory_from_csv, trajectory_to_csv, write_trajectory_csv,
};
