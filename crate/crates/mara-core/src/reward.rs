//! Reward functions for the reach task.
//!
//! All four variants are built from two measurements: the per-axis RMS
//! distance `x` between end-effector and target (meters) and the geodesic
//! orientation error `y` (radians, in [0, π]). A shared shaped "distance
//! fraction" maps `x` onto roughly (−ε, 11]; the variants combine it with an
//! orientation regulator and/or a collision penalty.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Shaping constants shared by every reward variant.
///
/// Defaults: `alpha = 5`, `beta = 1.5`, `gamma = 1`, `delta = 3`,
/// `eta = 0.03`, `done = 0.02` m. Orientation-aware environments override
/// `beta` per variant (1.1 for plain orientation, 1.5 when combined with
/// collision penalties) through their config files, not in code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardHyperparams {
    /// Decay rate of the distance shaping.
    pub alpha: f64,
    /// Exponent of the orientation regulator.
    pub beta: f64,
    /// Weight softening the orientation regulator.
    pub gamma: f64,
    /// Collision penalty scale.
    pub delta: f64,
    /// Collision penalty exponent (distance-only variant).
    pub eta: f64,
    /// Distance below which the reach counts as done, meters.
    pub done: f64,
    /// Exponent of the collision penalty in the combined collision+orientation
    /// variant. Fixed at 0.03 by the published formula; exposed here as an
    /// escape hatch for experiments.
    pub collision_orient_exponent: f64,
}

impl Default for RewardHyperparams {
    fn default() -> Self {
        RewardHyperparams {
            alpha: 5.0,
            beta: 1.5,
            gamma: 1.0,
            delta: 3.0,
            eta: 0.03,
            done: 0.02,
            collision_orient_exponent: 0.03,
        }
    }
}

impl RewardHyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::config("reward: alpha must be positive"));
        }
        if !(self.beta > 0.0) {
            return Err(Error::config("reward: beta must be positive"));
        }
        if !(self.gamma > -1.0) {
            return Err(Error::config("reward: gamma must exceed -1"));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::config("reward: delta must be non-negative"));
        }
        if !(self.eta > 0.0) {
            return Err(Error::config("reward: eta must be positive"));
        }
        if !(self.done > 0.0) {
            return Err(Error::config("reward: done must be positive"));
        }
        if !(self.collision_orient_exponent > 0.0) {
            return Err(Error::config(
                "reward: collision_orient_exponent must be positive",
            ));
        }
        Ok(())
    }
}

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::contract(format!(
            "distance must be finite and non-negative, got {x}"
        )));
    }
    Ok(())
}

fn check_y(y: f64) -> Result<()> {
    if !y.is_finite() || !(0.0..=PI).contains(&y) {
        return Err(Error::contract(format!(
            "orientation error must lie in [0, pi], got {y}"
        )));
    }
    Ok(())
}

/// Shaped distance term shared by all variants:
///
/// `(e^(-αx) - e^(-α) + 10·(e^(-αx/done) - e^(-α))) / (1 - e^(-α))`
///
/// Strictly decreasing in `x`; exactly 11 at `x = 0`; drops below zero once
/// `x` is large (about 0.52 m with defaults) and approaches
/// `-11·e^(-α)/(1 - e^(-α))` as `x → ∞`.
pub fn distance_fraction(x: f64, h: &RewardHyperparams) -> Result<f64> {
    check_x(x)?;
    let ea = (-h.alpha).exp();
    let wide = (-h.alpha * x).exp() - ea;
    let sharp = (-h.alpha * x / h.done).exp() - ea;
    Ok((wide + 10.0 * sharp) / (1.0 - ea))
}

/// Distance-only reward: `distance_fraction(x) - 1`, i.e. 10 at the target.
pub fn reward_mara(x: f64, h: &RewardHyperparams) -> Result<f64> {
    Ok(distance_fraction(x, h)? - 1.0)
}

/// Distance+orientation core reward:
///
/// `distance_fraction(x) · (1 + γ - (y/π)^β) / (1 + γ) - 1`
///
/// Reduces exactly to `reward_mara` at `y = 0`.
pub fn reward_orient_core(x: f64, y: f64, h: &RewardHyperparams) -> Result<f64> {
    check_y(y)?;
    let frac = distance_fraction(x, h)?;
    let regulator = (1.0 + h.gamma - (y / PI).powf(h.beta)) / (1.0 + h.gamma);
    Ok(frac * regulator - 1.0)
}

/// Collision penalty term `δ·(2·base)^exponent`, with the base floored at
/// zero: past the point where the distance fraction goes negative the
/// published power expression has no real value, so the penalty fades to
/// zero there instead of producing NaN.
fn collision_penalty(base: f64, exponent: f64, h: &RewardHyperparams) -> f64 {
    h.delta * (2.0 * base.max(0.0)).powf(exponent)
}

/// Distance reward with a collision penalty:
/// `distance_fraction(x) - 1 - δ·(2·min(distance_fraction(x), 0.5))^η` when
/// colliding, plain `reward_mara` otherwise. With defaults the min-cap makes
/// the penalty exactly 3 whenever the fraction is at least 0.5.
pub fn reward_collision(x: f64, colliding: bool, h: &RewardHyperparams) -> Result<f64> {
    let frac = distance_fraction(x, h)?;
    let mut reward = frac - 1.0;
    if colliding {
        reward -= collision_penalty(frac.min(0.5), h.eta, h);
    }
    Ok(reward)
}

/// Orientation-aware reward with a collision penalty:
/// `reward_orient_core(x, y) - δ·(2·distance_fraction(x))^0.03` when
/// colliding (exponent per `collision_orient_exponent`, no min-cap),
/// plain `reward_orient_core` otherwise.
pub fn reward_collision_orient(
    x: f64,
    y: f64,
    colliding: bool,
    h: &RewardHyperparams,
) -> Result<f64> {
    let mut reward = reward_orient_core(x, y, h)?;
    if colliding {
        let frac = distance_fraction(x, h)?;
        reward -= collision_penalty(frac, h.collision_orient_exponent, h);
    }
    Ok(reward)
}

/// One cell of a reward-surface grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    pub reward: f64,
}

/// Evaluate `reward_orient_core` over an `nx × ny` grid spanning
/// `x ∈ [0, 1]` m and `y ∈ [0, π]`, row-major with `x` as the outer axis.
pub fn reward_surface(h: &RewardHyperparams, nx: usize, ny: usize) -> Result<Vec<SurfacePoint>> {
    if nx < 2 || ny < 2 {
        return Err(Error::contract(format!(
            "reward surface needs at least a 2x2 grid, got {nx}x{ny}"
        )));
    }
    let mut grid = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = i as f64 / (nx - 1) as f64;
        for j in 0..ny {
            let y = PI * j as f64 / (ny - 1) as f64;
            grid.push(SurfacePoint {
                x,
                y,
                reward: reward_orient_core(x, y, h)?,
            });
        }
    }
    Ok(grid)
}

/// Serialize a reward surface as CSV with header `x,y,reward`, one row per
/// grid cell in grid order.
pub fn surface_to_csv(grid: &[SurfacePoint]) -> String {
    let mut out = String::from("x,y,reward\n");
    for p in grid {
        writeln!(out, "{},{},{}", p.x, p.y, p.reward).expect("string write");
    }
    out
}

pub fn write_surface_csv(path: &Path, grid: &[SurfacePoint]) -> Result<()> {
    std::fs::write(path, surface_to_csv(grid))?;
    Ok(())
}

/// Parse a reward-surface CSV produced by `surface_to_csv`.
pub fn read_surface_csv(path: &Path) -> Result<Vec<SurfacePoint>> {
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "x,y,reward")) => {}
        Some((_, other)) => {
            return Err(Error::Parse {
                path: display,
                line: 1,
                msg: format!("expected header 'x,y,reward', got '{other}'"),
            })
        }
        None => {
            return Err(Error::Parse {
                path: display,
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let mut grid = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            fields
                .next()
                .ok_or(())
                .and_then(|f| f.parse::<f64>().map_err(|_| ()))
                .map_err(|_| Error::Parse {
                    path: display.clone(),
                    line: idx + 1,
                    msg: format!("missing or invalid field '{name}'"),
                })
        };
        grid.push(SurfacePoint {
            x: next("x")?,
            y: next("y")?,
            reward: next("reward")?,
        });
    }
    Ok(grid)
}
