//! Capsule-based self-collision and arm–table collision checks.
//!
//! Each link is approximated by a capsule (a segment with a radius) given in
//! that link's frame. Two capsules collide when their axis segments come
//! closer than the sum of their radii; a capsule collides with the table when
//! it dips below the plane `z = table_height`. Pairs of capsules on adjacent
//! links touch at the joint by construction and are ignored.

use crate::error::{Error, Result};
use crate::kinematics::Pose;
use crate::math::Vec3;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A link-attached capsule: the set of points within `radius` of the segment
/// `endpoint_a`–`endpoint_b` (both in the link's local frame).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    /// Index into the pose list produced by `forward_kinematics`.
    pub link_index: usize,
    pub endpoint_a: Vec3,
    pub endpoint_b: Vec3,
    /// Capsule radius, meters; must be positive.
    pub radius: f64,
}

/// Immutable collision world: capsules, the table half-space, and the set of
/// capsule pairs excluded from testing.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionScene {
    pub capsules: Vec<Capsule>,
    /// The table occupies `z ≤ table_height` in world frame.
    pub table_height: f64,
    /// Unordered capsule-index pairs to skip, stored with the smaller index
    /// first.
    pub ignore_pairs: BTreeSet<(usize, usize)>,
}

/// Which geometry pair produced the reported minimum separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactPair {
    /// Two capsules, by index into the scene's capsule list.
    Capsules(usize, usize),
    /// A capsule against the table plane.
    Table(usize),
}

/// Result of a collision query over one arm state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactReport {
    /// True exactly when `min_separation < 0`.
    pub colliding: bool,
    /// Smallest clearance over all tested pairs, meters; negative values are
    /// penetration depth.
    pub min_separation: f64,
    /// The pair attaining `min_separation`.
    pub pair: ContactPair,
}

impl CollisionScene {
    /// Build a scene that ignores every capsule pair whose links are the same
    /// or adjacent in the chain, plus any explicitly listed extra pairs.
    pub fn new(
        capsules: Vec<Capsule>,
        table_height: f64,
        extra_ignore_pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> CollisionScene {
        let mut ignore_pairs = BTreeSet::new();
        for i in 0..capsules.len() {
            for j in (i + 1)..capsules.len() {
                let li = capsules[i].link_index as i64;
                let lj = capsules[j].link_index as i64;
                if (li - lj).abs() <= 1 {
                    ignore_pairs.insert((i, j));
                }
            }
        }
        for (a, b) in extra_ignore_pairs {
            ignore_pairs.insert((a.min(b), a.max(b)));
        }
        CollisionScene {
            capsules,
            table_height,
            ignore_pairs,
        }
    }

    /// Check structural invariants against a chain with `n_links` pose
    /// entries.
    pub fn validate(&self, n_links: usize) -> Result<()> {
        for (i, c) in self.capsules.iter().enumerate() {
            if !(c.radius > 0.0) {
                return Err(Error::config(format!("capsule {i}: radius must be positive")));
            }
            if c.link_index >= n_links {
                return Err(Error::config(format!(
                    "capsule {i}: link index {} out of range for {} link frames",
                    c.link_index, n_links
                )));
            }
            if !c.endpoint_a.is_finite() || !c.endpoint_b.is_finite() {
                return Err(Error::config(format!("capsule {i}: non-finite endpoint")));
            }
        }
        for &(a, b) in &self.ignore_pairs {
            if a >= self.capsules.len() || b >= self.capsules.len() {
                return Err(Error::config(format!(
                    "ignore pair ({a}, {b}) references a missing capsule"
                )));
            }
        }
        Ok(())
    }

    fn is_ignored(&self, i: usize, j: usize) -> bool {
        self.ignore_pairs.contains(&(i.min(j), i.max(j)))
    }

    /// Capsule set matching `RobotModel::default_6dof`.
    pub fn default_6dof() -> CollisionScene {
        let cap = |link_index: usize, za: f64, zb: f64, radius: f64| Capsule {
            link_index,
            endpoint_a: Vec3::new(0.0, 0.0, za),
            endpoint_b: Vec3::new(0.0, 0.0, zb),
            radius,
        };
        CollisionScene::new(
            vec![
                cap(0, -0.05, 0.08, 0.05),
                cap(1, 0.02, 0.23, 0.05),
                cap(2, 0.01, 0.07, 0.05),
                cap(3, 0.02, 0.20, 0.045),
                cap(4, 0.01, 0.05, 0.045),
                cap(5, 0.00, 0.04, 0.04),
            ],
            0.0,
            [],
        )
    }

    /// Capsule set matching `RobotModel::planar_2dof`: two link capsules that
    /// stay 0.17 m above the table in every configuration.
    pub fn planar_2dof() -> CollisionScene {
        let cap = |link_index: usize| Capsule {
            link_index,
            endpoint_a: Vec3::new(0.02, 0.0, 0.0),
            endpoint_b: Vec3::new(0.38, 0.0, 0.0),
            radius: 0.03,
        };
        CollisionScene::new(vec![cap(0), cap(1)], 0.0, [])
    }
}

/// Exact minimum distance between the closed segments `a0`–`a1` and
/// `b0`–`b1`. Degenerate (zero-length) segments are handled as points.
pub fn segment_segment_distance(a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> f64 {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let r = a0 - b0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(r);

    let (s, t) = if a <= f64::EPSILON && e <= f64::EPSILON {
        (0.0, 0.0)
    } else if a <= f64::EPSILON {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(r);
        if e <= f64::EPSILON {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            // Closest point on the infinite lines, clamped into the segment
            // parameter box; each clamp is followed by re-projecting the
            // other parameter.
            let mut s = if denom > f64::EPSILON {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };

    ((a0 + d1 * s) - (b0 + d2 * t)).norm()
}

/// Test one arm state for self-collision and table contact.
///
/// `link_poses` must come from `forward_kinematics` on the model this scene
/// was built for (the end-effector entry counts as a link frame).
pub fn check_state(scene: &CollisionScene, link_poses: &[Pose]) -> Result<ContactReport> {
    scene.validate(link_poses.len())?;
    if scene.capsules.is_empty() {
        return Err(Error::contract("collision scene has no capsules"));
    }

    let world: Vec<(Vec3, Vec3, f64)> = scene
        .capsules
        .iter()
        .map(|c| {
            let pose = &link_poses[c.link_index];
            (
                pose.transform_point(c.endpoint_a),
                pose.transform_point(c.endpoint_b),
                c.radius,
            )
        })
        .collect();

    let mut min_separation = f64::INFINITY;
    let mut pair = ContactPair::Table(0);

    for (i, &(a0, a1, ri)) in world.iter().enumerate() {
        for (j, &(b0, b1, rj)) in world.iter().enumerate().skip(i + 1) {
            if scene.is_ignored(i, j) {
                continue;
            }
            let sep = segment_segment_distance(a0, a1, b0, b1) - ri - rj;
            if sep < min_separation {
                min_separation = sep;
                pair = ContactPair::Capsules(i, j);
            }
        }
        let sep = a0.z.min(a1.z) - scene.table_height - ri;
        if sep < min_separation {
            min_separation = sep;
            pair = ContactPair::Table(i);
        }
    }

    Ok(ContactReport {
        colliding: min_separation < 0.0,
        min_separation,
        pair,
    })
}
