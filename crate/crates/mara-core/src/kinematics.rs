//! Forward kinematics for a serial revolute chain, plus the two distance
//! metrics every reward computation is built on: per-axis RMS position error
//! and the geodesic angle between unit quaternions.

use crate::error::{Error, Result};
use crate::math::{Quat, Vec3};
use serde::{Deserialize, Serialize};

/// One revolute joint: a fixed transform from the parent link frame followed
/// by a rotation of the joint angle about `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    /// Unit rotation axis in the joint's local frame.
    pub axis: Vec3,
    /// Translation from the parent link frame to this joint, meters.
    pub origin_offset: Vec3,
    /// Fixed rotation applied after `origin_offset`, before the joint angle.
    #[serde(default)]
    pub origin_rotation: Quat,
    /// Lower position limit, radians.
    pub limit_lo: f64,
    /// Upper position limit, radians.
    pub limit_hi: f64,
    /// Maximum joint speed, radians/second.
    pub velocity_limit: f64,
}

/// Kinematic description of an arm mounted on a table.
///
/// The table top is the plane `z = table_height` in world frame; the shipped
/// default model sits at the world origin with `table_height = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub joints: Vec<Joint>,
    /// Pose of the chain root in world frame.
    pub base_pose: Pose,
    /// Translation from the last link frame to the end-effector point,
    /// expressed in the last link frame.
    #[serde(default)]
    pub ee_offset: Vec3,
}

impl RobotModel {
    /// Number of actuated joints.
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    /// Validate the structural invariants: unit axes, ordered limits,
    /// positive velocity limits, finite offsets.
    pub fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::config("robot model has no joints"));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if (j.axis.norm() - 1.0).abs() >= 1e-12 {
                return Err(Error::config(format!(
                    "joint {i}: axis {:?} is not unit length",
                    j.axis
                )));
            }
            if !(j.limit_lo < j.limit_hi) {
                return Err(Error::config(format!(
                    "joint {i}: limit_lo {} must be below limit_hi {}",
                    j.limit_lo, j.limit_hi
                )));
            }
            if !(j.velocity_limit > 0.0) {
                return Err(Error::config(format!(
                    "joint {i}: velocity_limit must be positive"
                )));
            }
            if !j.origin_offset.is_finite() || !j.origin_rotation.is_finite() {
                return Err(Error::config(format!("joint {i}: non-finite origin")));
            }
        }
        if !self.ee_offset.is_finite() {
            return Err(Error::config("non-finite ee_offset"));
        }
        if (self.base_pose.orientation.norm() - 1.0).abs() >= 1e-9 {
            return Err(Error::config("base_pose orientation is not unit length"));
        }
        Ok(())
    }

    /// Clamp a position vector into the joint limits, in place.
    pub fn clamp_positions(&self, positions: &mut [f64]) {
        for (p, j) in positions.iter_mut().zip(&self.joints) {
            *p = p.clamp(j.limit_lo, j.limit_hi);
        }
    }

    /// Shipped 6-DoF default: alternating z/y axes, vertical link stack with
    /// a 0.90 m reach, mounted at the world origin on a table at z = 0.
    ///
    /// All-zero joint angles put the end-effector at (0, 0, 0.90) with
    /// identity orientation.
    pub fn default_6dof() -> RobotModel {
        use std::f64::consts::PI;
        let z = Vec3::new(0.0, 0.0, 1.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        let joint = |axis: Vec3, dz: f64, lim: f64| Joint {
            axis,
            origin_offset: Vec3::new(0.0, 0.0, dz),
            origin_rotation: Quat::IDENTITY,
            limit_lo: -lim,
            limit_hi: lim,
            velocity_limit: 1.57,
        };
        RobotModel {
            joints: vec![
                joint(z, 0.12, PI),
                joint(y, 0.10, 2.2),
                joint(z, 0.25, PI),
                joint(y, 0.08, 2.5),
                joint(z, 0.25, PI),
                joint(y, 0.06, PI),
            ],
            base_pose: Pose::IDENTITY,
            ee_offset: Vec3::new(0.0, 0.0, 0.04),
        }
    }

    /// Reduced 2-DoF planar model used for desk-scale training runs: two
    /// z-axis joints and two 0.40 m links moving in the plane z = 0.20, far
    /// above the table.
    pub fn planar_2dof() -> RobotModel {
        use std::f64::consts::PI;
        let z = Vec3::new(0.0, 0.0, 1.0);
        let joint = |offset: Vec3| Joint {
            axis: z,
            origin_offset: offset,
            origin_rotation: Quat::IDENTITY,
            limit_lo: -PI,
            limit_hi: PI,
            velocity_limit: 1.57,
        };
        RobotModel {
            joints: vec![
                joint(Vec3::ZERO),
                joint(Vec3::new(0.4, 0.0, 0.0)),
            ],
            base_pose: Pose {
                position: Vec3::new(0.0, 0.0, 0.2),
                orientation: Quat::IDENTITY,
            },
            ee_offset: Vec3::new(0.4, 0.0, 0.0),
        }
    }
}

/// Joint-space state of the arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    /// Joint angles, radians; one per joint.
    pub positions: Vec<f64>,
    /// Joint speeds, radians/second; one per joint.
    pub velocities: Vec<f64>,
}

impl JointState {
    /// All joints at zero angle and zero speed.
    pub fn zeros(dof: usize) -> JointState {
        JointState {
            positions: vec![0.0; dof],
            velocities: vec![0.0; dof],
        }
    }
}

/// Position and orientation of a frame in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    #[serde(default)]
    pub position: Vec3,
    /// Unit quaternion, scalar-first.
    #[serde(default)]
    pub orientation: Quat,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: Vec3::ZERO,
        orientation: Quat::IDENTITY,
    };

    /// Map a point from this frame into the world frame.
    pub fn transform_point(&self, local: Vec3) -> Vec3 {
        self.position + self.orientation.rotate(local)
    }
}

/// Compute world-frame poses for every link of the chain.
///
/// Returns one pose per link plus a final entry for the end-effector point
/// (`model.ee_offset` ahead of the last link, same orientation), so the
/// result has `dof + 1` entries and the last one is the end-effector.
pub fn forward_kinematics(model: &RobotModel, q: &JointState) -> Result<Vec<Pose>> {
    if q.positions.len() != model.dof() {
        return Err(Error::contract(format!(
            "joint state has {} positions, model has {} joints",
            q.positions.len(),
            model.dof()
        )));
    }
    let mut poses = Vec::with_capacity(model.dof() + 1);
    let mut p = model.base_pose.position;
    let mut r = model.base_pose.orientation;
    for (joint, &angle) in model.joints.iter().zip(&q.positions) {
        p = p + r.rotate(joint.origin_offset);
        r = r * joint.origin_rotation * Quat::from_axis_angle(joint.axis, angle);
        // Renormalize so long chains cannot drift away from unit norm.
        r = r.normalized().expect("rotation stayed non-zero");
        poses.push(Pose {
            position: p,
            orientation: r,
        });
    }
    let last = poses.last().expect("model has at least one joint");
    poses.push(Pose {
        position: last.transform_point(model.ee_offset),
        orientation: last.orientation,
    });
    Ok(poses)
}

/// Geodesic angle between two unit quaternions, radians in [0, π].
///
/// Both arguments are renormalized internally; the sign ambiguity of the
/// double cover is absorbed by the absolute value, so `q` and `-q` compare
/// as identical orientations.
pub fn quaternion_angle(qa: Quat, qb: Quat) -> Result<f64> {
    let qa = qa
        .normalized()
        .ok_or_else(|| Error::contract("quaternion_angle: first argument is zero"))?;
    let qb = qb
        .normalized()
        .ok_or_else(|| Error::contract("quaternion_angle: second argument is zero"))?;
    // |⟨qa, qb⟩| equals the scalar part of qa ⊗ conj(qb) up to sign.
    let dot = qa.dot(qb).abs().clamp(0.0, 1.0);
    Ok(2.0 * dot.acos())
}

/// Per-axis RMS distance between two points: `sqrt(mean(Δx², Δy², Δz²))`,
/// i.e. the Euclidean distance divided by √3.
pub fn rms_distance(p_robot: Vec3, p_target: Vec3) -> f64 {
    let d = p_robot - p_target;
    (d.norm_squared() / 3.0).sqrt()
}
