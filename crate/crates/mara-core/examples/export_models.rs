//! Writes the built-in robot models out as TOML description files.
//!
//! ```text
//! cargo run -p mara-core --example export_models -- models
//! ```

use mara_core::{save_model, CollisionScene, RobotModel};
use std::path::PathBuf;

fn main() {
    let dir: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "models".into()).into();
    std::fs::create_dir_all(&dir).expect("create output directory");
    for (name, model, scene) in [
        (
            "default_6dof",
            RobotModel::default_6dof(),
            CollisionScene::default_6dof(),
        ),
        (
            "planar_2dof",
            RobotModel::planar_2dof(),
            CollisionScene::planar_2dof(),
        ),
    ] {
        let path = dir.join(format!("{name}.toml"));
        save_model(&path, name, &model, &scene).expect("write model file");
        println!("wrote {}", path.display());
    }
}
