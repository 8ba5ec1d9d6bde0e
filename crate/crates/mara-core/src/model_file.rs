//! Robot model description files.
//!
//! A model file is TOML with a `format_version` field, the kinematic chain
//! (`base_pose`, `[[joints]]`, `ee_offset`), and the collision geometry
//! (`table_height`, `[[capsules]]`, optional extra `ignore_pairs`). Capsule
//! pairs on the same or adjacent links are always ignored; `ignore_pairs`
//! adds further exclusions on top.

use crate::collision::{Capsule, CollisionScene};
use crate::error::{Error, Result};
use crate::kinematics::{Joint, Pose, RobotModel};
use crate::math::Vec3;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Newest file format understood by this crate.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(default)]
    name: String,
    base_pose: Pose,
    joints: Vec<Joint>,
    #[serde(default)]
    ee_offset: Vec3,
    #[serde(default)]
    table_height: f64,
    capsules: Vec<Capsule>,
    #[serde(default)]
    ignore_pairs: Vec<(usize, usize)>,
}

/// Convert a byte offset into a 1-based line number.
fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

fn parse_error(path: &Path, text: &str, err: toml::de::Error) -> Error {
    let line = err
        .span()
        .map(|span| line_of_offset(text, span.start))
        .unwrap_or(1);
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: err.message().to_string(),
    }
}

/// Load a robot model and its collision scene from a TOML description file.
pub fn load_model(path: &Path) -> Result<(RobotModel, CollisionScene)> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = toml::from_str(&text).map_err(|e| parse_error(path, &text, e))?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Load(format!(
            "{}: unsupported format_version {} (this build reads {})",
            path.display(),
            file.format_version,
            FORMAT_VERSION
        )));
    }
    let model = RobotModel {
        joints: file.joints,
        base_pose: file.base_pose,
        ee_offset: file.ee_offset,
    };
    model.validate()?;
    let scene = CollisionScene::new(file.capsules, file.table_height, file.ignore_pairs);
    scene.validate(model.dof() + 1)?;
    Ok((model, scene))
}

/// Write a robot model and collision scene as a TOML description file.
pub fn save_model(
    path: &Path,
    name: &str,
    model: &RobotModel,
    scene: &CollisionScene,
) -> Result<()> {
    // Only the extra (non-adjacent) exclusions are persisted; adjacency is
    // re-derived on load.
    let adjacent_only = CollisionScene::new(scene.capsules.clone(), scene.table_height, []);
    let extra: Vec<(usize, usize)> = scene
        .ignore_pairs
        .difference(&adjacent_only.ignore_pairs)
        .copied()
        .collect();
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        name: name.to_string(),
        base_pose: model.base_pose,
        joints: model.joints.clone(),
        ee_offset: model.ee_offset,
        table_height: scene.table_height,
        capsules: scene.capsules.clone(),
        ignore_pairs: extra,
    };
    let text = toml::to_string_pretty(&file)
        .map_err(|e| Error::Config(format!("cannot serialize model: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}
