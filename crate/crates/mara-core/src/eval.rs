//! Post-training accuracy evaluation: repeated stochastic episodes and
//! per-axis error statistics against the target.

use crate::env::{make_env, EnvConfig};
use crate::error::{Error, Result};
use crate::kinematics::Pose;
use crate::math::Quat;
use crate::ppo::checkpoint::Checkpoint;
use crate::ppo::trainer::run_policy_episode;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fmt::Write as _;

/// Mean and population standard deviation of one signed error axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisStat {
    pub mean: f64,
    pub std: f64,
}

fn axis_stat(values: &[f64]) -> AxisStat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    AxisStat {
        mean,
        std: var.sqrt(),
    }
}

/// Final-state error distribution over `n_runs` evaluation episodes.
///
/// Position errors are signed `end_effector − target` per world axis in
/// millimeters. Orientation errors (present exactly for the orientation-aware
/// variants) decompose the relative rotation `q_ee ⊗ q_target⁻¹` into
/// roll/pitch/yaw in degrees. Stds are population standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub n_runs: usize,
    /// Episodes that ended in success (distance under the threshold).
    pub n_success: usize,
    pub position_mm: [AxisStat; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orientation_deg: Option<[AxisStat; 3]>,
}

/// Roll/pitch/yaw (radians) of a rotation, fixed-axis x-y-z convention:
/// `R = Rz(yaw)·Ry(pitch)·Rx(roll)`.
pub fn roll_pitch_yaw(q: Quat) -> Result<[f64; 3]> {
    let q = q
        .normalized()
        .ok_or_else(|| Error::contract("cannot decompose a zero quaternion"))?;
    let m = q.to_matrix();
    let roll = m[2][1].atan2(m[2][2]);
    let pitch = (-m[2][0]).clamp(-1.0, 1.0).asin();
    let yaw = m[1][0].atan2(m[0][0]);
    Ok([roll, pitch, yaw])
}

/// Run `n_runs` stochastic evaluation episodes and collect the final-state
/// error distribution. Episodes stop at success, collision, or the step cap;
/// every episode contributes its final state.
pub fn benchmark(
    checkpoint: &Checkpoint,
    env_config: &EnvConfig,
    n_runs: usize,
) -> Result<AccuracyReport> {
    if n_runs == 0 {
        return Err(Error::Report("benchmark needs at least one run".into()));
    }
    let mut env = make_env(env_config.clone())?;
    let mut rng = ChaCha20Rng::seed_from_u64(env_config.seed);
    rng.set_stream(2 * env_config.instance_id + 1);

    let mut errors_mm: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut errors_deg: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut n_success = 0;

    for _ in 0..n_runs {
        let log = run_policy_episode(checkpoint, &mut env, false, &mut rng)?;
        if log.success {
            n_success += 1;
        }
        let final_ee = log
            .records
            .last()
            .expect("episode has at least one step")
            .ee_position;
        let target: Pose = env.target();
        let err = final_ee - target.position;
        errors_mm[0].push(err.x * 1000.0);
        errors_mm[1].push(err.y * 1000.0);
        errors_mm[2].push(err.z * 1000.0);

        if env_config.variant.uses_orientation() {
            let ee_orientation = env.observe().ee_orientation;
            let relative = ee_orientation * target.orientation.conjugate();
            let rpy = roll_pitch_yaw(relative)?;
            for (axis, angle) in rpy.iter().enumerate() {
                errors_deg[axis].push(angle.to_degrees());
            }
        }
    }

    Ok(AccuracyReport {
        n_runs,
        n_success,
        position_mm: [
            axis_stat(&errors_mm[0]),
            axis_stat(&errors_mm[1]),
            axis_stat(&errors_mm[2]),
        ],
        orientation_deg: env_config.variant.uses_orientation().then(|| {
            [
                axis_stat(&errors_deg[0]),
                axis_stat(&errors_deg[1]),
                axis_stat(&errors_deg[2]),
            ]
        }),
    })
}

impl AccuracyReport {
    /// Structured-text form of the report.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

impl fmt::Display for AccuracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "runs: {} ({} reached the target)", self.n_runs, self.n_success)?;
        writeln!(out, "position error (mm, end-effector − target):")?;
        for (name, stat) in ["x", "y", "z"].iter().zip(&self.position_mm) {
            writeln!(out, "  {name}: {:9.2} ± {:.2}", stat.mean, stat.std)?;
        }
        if let Some(orient) = &self.orientation_deg {
            writeln!(out, "orientation error (degrees):")?;
            for (name, stat) in ["roll", "pitch", "yaw"].iter().zip(orient) {
                writeln!(out, "  {name}: {:7.2} ± {:.2}", stat.mean, stat.std)?;
            }
        }
        f.write_str(out.trim_end())
    }
}
