//! Acceptance gate for the toolkit.
//!
//! Every test prints one `acceptance: PASS — …` / `acceptance: FAIL — …` line
//! per criterion (run with `--nocapture` to see the PASS lines; FAIL lines
//! always surface through the panic message). The criteria cover four areas:
//! exactness of the reward formulas, agreement with independent oracles,
//! a desk-scale end-to-end learning run, and bitwise reproducibility.

use mara_core::collision::check_state;
use mara_core::kinematics::{forward_kinematics, JointState, RobotModel};
use mara_core::math::{Quat, Vec3};
use mara_core::ppo::trainer::run_policy_episode;
use mara_core::ppo::{
    compute_gae, load_checkpoint, ppo_loss, ppo_loss_grads, Minibatch, PolicyParams,
    RolloutBuffer, Transition,
};
use mara_core::{
    benchmark, distance_fraction, make_env, reward_collision, reward_mara, reward_orient_core,
    reward_surface, run_random_agent, train, CollisionScene, EnvConfig, RewardHyperparams,
    TrainConfig, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

/// Print the per-criterion verdict line and return whether it passed.
fn criterion(name: &str, ok: bool, detail: &str) -> bool {
    if ok {
        println!("acceptance: PASS — {name}");
    } else {
        println!("acceptance: FAIL — {name} ({detail})");
    }
    ok
}

fn defaults() -> RewardHyperparams {
    RewardHyperparams::default()
}

// ---------------------------------------------------------------------------
// Formula exactness
// ---------------------------------------------------------------------------

#[test]
fn distance_shaping_endpoints_are_exact() {
    let h = defaults();
    let frac0 = distance_fraction(0.0, &h).unwrap();
    let rew0 = reward_mara(0.0, &h).unwrap();
    let ok = (frac0 - 11.0).abs() < 1e-12 && (rew0 - 10.0).abs() < 1e-12;
    assert!(criterion(
        "distance fraction is 11 and distance reward is 10 at zero distance (1e-12)",
        ok,
        &format!("fraction(0) = {frac0:.17}, reward(0) = {rew0:.17}"),
    ));
}

#[test]
fn orientation_reward_reduces_to_distance_reward_at_zero_angle() {
    let h = defaults();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let mut max_diff: f64 = 0.0;
    for _ in 0..10_000 {
        let x = rng.gen_range(0.0..1.5);
        let diff =
            (reward_orient_core(x, 0.0, &h).unwrap() - reward_mara(x, &h).unwrap()).abs();
        max_diff = max_diff.max(diff);
    }
    assert!(criterion(
        "orientation reward at zero angle error equals the distance reward over 10000 samples (1e-12)",
        max_diff < 1e-12,
        &format!("max |difference| = {max_diff:.3e}"),
    ));
}

#[test]
fn collision_penalty_cap_is_exactly_delta() {
    let h = defaults();
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for i in 0..=2000 {
        let x = 0.2 * i as f64 / 2000.0;
        if distance_fraction(x, &h).unwrap() < 0.5 {
            continue;
        }
        checked += 1;
        let free = reward_collision(x, false, &h).unwrap();
        let hit = reward_collision(x, true, &h).unwrap();
        worst = worst.max((free - hit - 3.0).abs());
    }
    assert!(criterion(
        "collision penalty equals exactly 3 wherever the distance fraction reaches its 0.5 cap",
        checked > 1000 && worst == 0.0,
        &format!("{checked} capped distances checked, worst |penalty − 3| = {worst:.3e}"),
    ));
}

#[test]
fn reward_surface_has_one_peak_and_the_expected_slopes() {
    let h = defaults();
    let start = Instant::now();
    let (nx, ny) = (101, 101);
    let grid = reward_surface(&h, nx, ny).unwrap();

    let origin = grid[0].reward;
    let unique_max = grid.iter().skip(1).all(|p| p.reward < origin);

    let down_x = (1..nx)
        .all(|i| (0..ny).all(|j| grid[i * ny + j].reward < grid[(i - 1) * ny + j].reward));

    // Along +y the reward is non-increasing as long as the distance term is
    // non-negative (every row out to its ~0.52 m zero crossing; beyond that
    // the sign flip inverts the trend, pinned in the unit tests).
    let down_y = (0..nx)
        .filter(|&i| distance_fraction(grid[i * ny].x, &h).unwrap() >= 0.0)
        .all(|i| (1..ny).all(|j| grid[i * ny + j].reward <= grid[i * ny + j - 1].reward));

    let elapsed = start.elapsed();
    let ok = unique_max && down_x && down_y && elapsed < Duration::from_secs(1);
    assert!(criterion(
        "101x101 reward surface: unique maximum at the origin, falling along +x everywhere \
         and along +y while the distance term is non-negative, under 1 s",
        ok,
        &format!(
            "unique max: {unique_max}, along x: {down_x}, along y: {down_y}, took {elapsed:?}"
        ),
    ));
}

// ---------------------------------------------------------------------------
// Oracle equivalence
// ---------------------------------------------------------------------------

/// Homogeneous 4×4 transforms, written without reference to the library's
/// quaternion code so the two kinematics paths are independent.
#[derive(Clone, Copy)]
struct Mat4([[f64; 4]; 4]);

impl Mat4 {
    fn identity() -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Mat4(m)
    }

    fn translation(t: Vec3) -> Mat4 {
        let mut m = Mat4::identity();
        m.0[0][3] = t.x;
        m.0[1][3] = t.y;
        m.0[2][3] = t.z;
        m
    }

    /// Rodrigues rotation about a unit axis.
    fn rotation(axis: Vec3, angle: f64) -> Mat4 {
        let (s, c) = angle.sin_cos();
        let cc = 1.0 - c;
        let (x, y, z) = (axis.x, axis.y, axis.z);
        let mut m = Mat4::identity();
        m.0[0][0] = c + x * x * cc;
        m.0[0][1] = x * y * cc - z * s;
        m.0[0][2] = x * z * cc + y * s;
        m.0[1][0] = y * x * cc + z * s;
        m.0[1][1] = c + y * y * cc;
        m.0[1][2] = y * z * cc - x * s;
        m.0[2][0] = z * x * cc - y * s;
        m.0[2][1] = z * y * cc + x * s;
        m.0[2][2] = c + z * z * cc;
        m
    }

    /// Rotation matrix of a unit quaternion, expanded by hand.
    fn from_quat(q: Quat) -> Mat4 {
        let (w, x, y, z) = (q.w, q.x, q.y, q.z);
        let mut m = Mat4::identity();
        m.0[0][0] = 1.0 - 2.0 * (y * y + z * z);
        m.0[0][1] = 2.0 * (x * y - w * z);
        m.0[0][2] = 2.0 * (x * z + w * y);
        m.0[1][0] = 2.0 * (x * y + w * z);
        m.0[1][1] = 1.0 - 2.0 * (x * x + z * z);
        m.0[1][2] = 2.0 * (y * z - w * x);
        m.0[2][0] = 2.0 * (x * z - w * y);
        m.0[2][1] = 2.0 * (y * z + w * x);
        m.0[2][2] = 1.0 - 2.0 * (x * x + y * y);
        m
    }

    fn mul(self, o: Mat4) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat4(m)
    }

    fn position(&self) -> Vec3 {
        Vec3::new(self.0[0][3], self.0[1][3], self.0[2][3])
    }
}

fn matrix_chain(model: &RobotModel, q: &JointState) -> Vec<Mat4> {
    let mut acc = Mat4::translation(model.base_pose.position)
        .mul(Mat4::from_quat(model.base_pose.orientation));
    let mut out = Vec::with_capacity(model.dof() + 1);
    for (joint, &angle) in model.joints.iter().zip(&q.positions) {
        acc = acc
            .mul(Mat4::translation(joint.origin_offset))
            .mul(Mat4::from_quat(joint.origin_rotation))
            .mul(Mat4::rotation(joint.axis, angle));
        out.push(acc);
    }
    out.push(acc.mul(Mat4::translation(model.ee_offset)));
    out
}

fn random_state(model: &RobotModel, rng: &mut ChaCha20Rng) -> JointState {
    JointState {
        positions: model
            .joints
            .iter()
            .map(|j| rng.gen_range(j.limit_lo..j.limit_hi))
            .collect(),
        velocities: vec![0.0; model.dof()],
    }
}

#[test]
fn forward_kinematics_matches_a_matrix_oracle() {
    let start = Instant::now();
    let model = RobotModel::default_6dof();
    let mut rng = ChaCha20Rng::seed_from_u64(42);
    let mut worst_pos: f64 = 0.0;
    let mut worst_rot: f64 = 0.0;
    for _ in 0..1000 {
        let q = random_state(&model, &mut rng);
        let poses = forward_kinematics(&model, &q).unwrap();
        let mats = matrix_chain(&model, &q);
        assert_eq!(poses.len(), mats.len());
        for (pose, mat) in poses.iter().zip(&mats) {
            worst_pos = worst_pos.max((pose.position - mat.position()).norm());
            let rot = pose.orientation.to_matrix();
            for i in 0..3 {
                for j in 0..3 {
                    worst_rot = worst_rot.max((rot[i][j] - mat.0[i][j]).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = worst_pos < 1e-9 && worst_rot < 1e-9 && elapsed < Duration::from_secs(5);
    assert!(criterion(
        "forward kinematics matches a homogeneous-matrix oracle on 1000 random states (1e-9, under 5 s)",
        ok,
        &format!(
            "worst position error {worst_pos:.3e} m, worst rotation-entry error {worst_rot:.3e}, took {elapsed:?}"
        ),
    ));
}

/// Surface samples of one capsule in its link frame: a golden-angle spiral on
/// the cylinder plus a Fibonacci sphere split across the two end caps.
fn capsule_surface_samples(a: Vec3, b: Vec3, r: f64, n: usize) -> Vec<Vec3> {
    let axis = b - a;
    let len = axis.norm();
    let w = if len > 0.0 {
        axis * (1.0 / len)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let pick = if w.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let u = w.cross(pick).normalized().unwrap();
    let v = w.cross(u);

    let cyl_area = 2.0 * PI * r * len;
    let cap_area = 4.0 * PI * r * r;
    let n_cyl = ((n as f64) * cyl_area / (cyl_area + cap_area)).round() as usize;
    let n_sph = n - n_cyl;
    let golden = PI * (3.0 - 5f64.sqrt());

    let mut out = Vec::with_capacity(n);
    for i in 0..n_cyl {
        let t = (i as f64 + 0.5) / n_cyl as f64;
        let (s, c) = (golden * i as f64).sin_cos();
        out.push(a + axis * t + (u * c + v * s) * r);
    }
    for i in 0..n_sph {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n_sph as f64;
        let rho = (1.0 - z * z).sqrt();
        let (s, c) = (golden * i as f64).sin_cos();
        let dir = u * (rho * c) + v * (rho * s) + w * z;
        let center = if z >= 0.0 { b } else { a };
        out.push(center + dir * r);
    }
    out
}

fn point_to_segment(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let denom = ab.dot(ab);
    let t = if denom > 0.0 {
        ((p - a).dot(ab) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

#[test]
fn collision_checks_match_a_point_sampling_oracle() {
    let start = Instant::now();
    let model = RobotModel::default_6dof();
    let scene = CollisionScene::default_6dof();
    let samples: Vec<Vec<Vec3>> = scene
        .capsules
        .iter()
        .map(|c| capsule_surface_samples(c.endpoint_a, c.endpoint_b, c.radius, 500))
        .collect();
    let tested_pairs: Vec<(usize, usize)> = (0..scene.capsules.len())
        .flat_map(|i| (0..scene.capsules.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && !scene.ignore_pairs.contains(&(i.min(j), i.max(j))))
        .collect();

    let mut rng = ChaCha20Rng::seed_from_u64(1969);
    let mut agreements = 0usize;
    let mut out_of_band = Vec::new();
    let mut collisions_seen = 0usize;
    let n_states = 1000;
    for _ in 0..n_states {
        let q = random_state(&model, &mut rng);
        let poses = forward_kinematics(&model, &q).unwrap();
        let report = check_state(&scene, &poses).unwrap();
        collisions_seen += report.colliding as usize;

        let world: Vec<(Vec3, Vec3, f64)> = scene
            .capsules
            .iter()
            .map(|c| {
                let pose = poses[c.link_index];
                (
                    pose.transform_point(c.endpoint_a),
                    pose.transform_point(c.endpoint_b),
                    c.radius,
                )
            })
            .collect();
        let mut oracle = false;
        'outer: for (ci, c) in scene.capsules.iter().enumerate() {
            let pose = poses[c.link_index];
            for &local in &samples[ci] {
                let p = pose.transform_point(local);
                if p.z < scene.table_height {
                    oracle = true;
                    break 'outer;
                }
                for &(pi, pj) in &tested_pairs {
                    if pi != ci {
                        continue;
                    }
                    let (wa, wb, wr) = world[pj];
                    if point_to_segment(p, wa, wb) < wr {
                        oracle = true;
                        break 'outer;
                    }
                }
            }
        }

        if oracle == report.colliding {
            agreements += 1;
        } else if report.min_separation.abs() > 0.002 {
            out_of_band.push(report.min_separation);
        }
    }
    let elapsed = start.elapsed();
    let ok = agreements >= 990
        && out_of_band.is_empty()
        && collisions_seen > 50
        && n_states - collisions_seen > 50
        && elapsed < Duration::from_secs(60);
    assert!(criterion(
        "capsule collision checks agree with a surface point-sampling oracle on ≥99% of \
         1000 random states, disagreements within ±2 mm, under 60 s",
        ok,
        &format!(
            "{agreements}/1000 agree, {} out-of-band separations {:?}, {collisions_seen} colliding states, took {elapsed:?}",
            out_of_band.len(),
            out_of_band,
        ),
    ));
}

/// Advantage oracle: expand the exponentially-weighted sum term by term,
/// cutting every product off at episode boundaries.
fn brute_force_advantages(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
    bootstrap: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let delta = |t: usize| {
        let next = if t + 1 < n { values[t + 1] } else { bootstrap };
        let mask = if dones[t] { 0.0 } else { 1.0 };
        rewards[t] + gamma * next * mask - values[t]
    };
    (0..n)
        .map(|t| {
            let mut total = 0.0;
            let mut weight = 1.0;
            for l in t..n {
                total += weight * delta(l);
                if dones[l] {
                    break;
                }
                weight *= gamma * lambda;
            }
            total
        })
        .collect()
}

#[test]
fn advantage_estimates_match_a_brute_force_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.gen_range(1..=32);
        let gamma = rng.gen_range(0.9..1.0);
        let lambda = rng.gen_range(0.0..=1.0);
        let bootstrap = rng.gen_range(-1.0..1.0);
        let mut buffer = RolloutBuffer::with_capacity(n);
        for _ in 0..n {
            buffer.push(Transition {
                observation: vec![0.0],
                action: vec![0.0],
                log_prob: 0.0,
                value: rng.gen_range(-2.0..2.0),
                reward: rng.gen_range(-2.0..2.0),
                done: rng.gen_bool(0.2),
            });
        }
        compute_gae(&mut buffer, gamma, lambda, bootstrap).unwrap();
        let rewards: Vec<f64> = buffer.transitions.iter().map(|t| t.reward).collect();
        let values: Vec<f64> = buffer.transitions.iter().map(|t| t.value).collect();
        let dones: Vec<bool> = buffer.transitions.iter().map(|t| t.done).collect();
        let oracle = brute_force_advantages(&rewards, &values, &dones, gamma, lambda, bootstrap);
        for t in 0..n {
            worst = worst.max((buffer.advantages[t] - oracle[t]).abs());
            worst = worst.max((buffer.returns[t] - (oracle[t] + values[t])).abs());
        }
        assert!(worst < 1e-10, "case {case}: worst {worst:.3e}");
    }
    assert!(criterion(
        "advantage estimates match a brute-force discounted-sum oracle on 200 buffers of ≤32 steps (1e-10)",
        worst < 1e-10,
        &format!("worst |difference| = {worst:.3e}"),
    ));
}

#[test]
fn loss_gradients_match_central_finite_differences() {
    let (obs_dim, act_dim, hidden, n) = (5, 2, 8, 16);
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let mut params = PolicyParams::init(obs_dim, act_dim, hidden, &mut rng);
    for (i, ls) in params.log_std.iter_mut().enumerate() {
        *ls = -0.2 + 0.1 * i as f64;
    }

    let mut buffer = RolloutBuffer::with_capacity(n);
    for t in 0..n {
        let observation: Vec<f64> = (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let action: Vec<f64> = (0..act_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = params.policy.forward(&observation);
        let log_prob = mara_core::ppo::gaussian::log_prob(&mean, &params.log_std, &action)
            + rng.gen_range(-0.3..0.3);
        let value = params.value.forward(&observation)[0] + rng.gen_range(-0.2..0.2);
        buffer.push(Transition {
            observation,
            action,
            log_prob,
            value,
            reward: rng.gen_range(-1.0..1.0),
            done: t % 7 == 6,
        });
    }
    compute_gae(&mut buffer, 0.99, 0.95, 0.1).unwrap();
    buffer.normalize_advantages();

    let indices: Vec<usize> = (0..n).collect();
    let mb = Minibatch {
        buffer: &buffer,
        indices: &indices,
    };
    let (clip, vf, ent) = (0.2, 0.5, 0.01);
    let (grads, _) = ppo_loss_grads(&params, mb, clip, vf, ent).unwrap();
    let flat: Vec<f64> = grads
        .policy
        .iter()
        .chain(&grads.log_std)
        .chain(&grads.value)
        .copied()
        .collect();

    let mut worst_rel: f64 = 0.0;
    let h = 1e-6;
    for i in 0..params.n_params() {
        let saved = *params.param_mut(i);
        *params.param_mut(i) = saved + h;
        let up = ppo_loss(
            &params,
            Minibatch {
                buffer: &buffer,
                indices: &indices,
            },
            clip,
            vf,
            ent,
        )
        .unwrap();
        *params.param_mut(i) = saved - h;
        let down = ppo_loss(
            &params,
            Minibatch {
                buffer: &buffer,
                indices: &indices,
            },
            clip,
            vf,
            ent,
        )
        .unwrap();
        *params.param_mut(i) = saved;
        let fd = (up - down) / (2.0 * h);
        let diff = (flat[i] - fd).abs();
        if diff > 1e-10 {
            worst_rel = worst_rel.max(diff / flat[i].abs().max(fd.abs()));
        }
    }
    assert!(criterion(
        "analytic loss gradients match central finite differences over every parameter (rel. error < 1e-4)",
        worst_rel < 1e-4,
        &format!("worst relative error = {worst_rel:.3e}"),
    ));
}

// ---------------------------------------------------------------------------
// Desk-scale learning
// ---------------------------------------------------------------------------

#[test]
fn desk_scale_training_learns_the_planar_reach() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let env_config = EnvConfig::planar_2dof(Variant::Mara);
    let train_config = TrainConfig {
        total_timesteps: 500_000,
        n_steps: 2048,
        seed: 0,
        out_dir: dir.path().to_path_buf(),
        ..TrainConfig::default()
    };
    let output = train(&env_config, &train_config).unwrap();
    let elapsed = start.elapsed();
    let first = output.metrics.first().unwrap();
    let last = output.metrics.last().unwrap();
    let improvement = last.mean_ep_reward - first.mean_ep_reward;

    let checkpoint = load_checkpoint(&output.final_checkpoint).unwrap();
    let mut env = make_env(env_config).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1234);
    let mut successes = 0usize;
    let mut distance_sum = 0.0;
    for _ in 0..10 {
        let episode = run_policy_episode(&checkpoint, &mut env, true, &mut rng).unwrap();
        successes += episode.success as usize;
        distance_sum += episode.final_distance;
    }
    let mean_distance = distance_sum / 10.0;

    let a = criterion(
        "desk-scale planar run (500k steps): final mean distance < 0.05 m, mean episode \
         reward up by ≥ 5, under 30 min",
        mean_distance < 0.05 && improvement >= 5.0 && elapsed < Duration::from_secs(30 * 60),
        &format!(
            "mean final distance {mean_distance:.4} m, reward {:.2} → {:.2} (Δ {improvement:.2}), took {elapsed:?}",
            first.mean_ep_reward, last.mean_ep_reward
        ),
    );
    let b = criterion(
        "policy entropy at the end of the desk-scale run is below its starting value",
        last.entropy < first.entropy,
        &format!("entropy {:.3} → {:.3}", first.entropy, last.entropy),
    );
    let c = criterion(
        "trained checkpoint reaches the target in ≥ 8 of 10 deterministic evaluation episodes",
        successes >= 8,
        &format!("{successes}/10 episodes ended in success"),
    );
    assert!(a && b && c, "desk-scale learning criteria failed");
}

// ---------------------------------------------------------------------------
// Full-budget stretch target (not gating; hours of compute)
// ---------------------------------------------------------------------------

#[test]
#[ignore = "full-budget run: ~1e7 timesteps of 6-DoF training; run with --ignored"]
fn full_budget_six_dof_run_reaches_millimeter_scale() {
    let dir = tempfile::tempdir().unwrap();
    let env_config = EnvConfig::default_6dof(Variant::Mara);
    let train_config = TrainConfig {
        total_timesteps: 10_000_000,
        seed: 0,
        out_dir: dir.path().to_path_buf(),
        ..TrainConfig::default_for(Variant::Mara)
    };
    let output = train(&env_config, &train_config).unwrap();
    let checkpoint = load_checkpoint(&output.final_checkpoint).unwrap();
    let report = benchmark(&checkpoint, &env_config, 10).unwrap();

    let mut env = make_env(env_config).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(4242);
    let target = env.target().position;
    let mut abs_mm = [0.0f64; 3];
    for _ in 0..10 {
        let episode = run_policy_episode(&checkpoint, &mut env, false, &mut rng).unwrap();
        let ee = episode.records.last().unwrap().ee_position;
        abs_mm[0] += (ee.x - target.x).abs() * 1000.0;
        abs_mm[1] += (ee.y - target.y).abs() * 1000.0;
        abs_mm[2] += (ee.z - target.z).abs() * 1000.0;
    }
    for m in &mut abs_mm {
        *m /= 10.0;
    }
    println!(
        "full-budget evaluation: mean |error| mm = [{:.2}, {:.2}, {:.2}]\n{report}",
        abs_mm[0], abs_mm[1], abs_mm[2]
    );
    let ok = abs_mm.iter().all(|&m| m < 15.0);
    assert!(criterion(
        "full-budget 6-DoF run: per-axis mean absolute error below 15 mm over 10 evaluation episodes",
        ok,
        &format!("mean |error| mm = [{:.2}, {:.2}, {:.2}]", abs_mm[0], abs_mm[1], abs_mm[2]),
    ));
}

// ---------------------------------------------------------------------------
// Determinism
// ---------------------------------------------------------------------------

#[test]
fn seeded_runs_reproduce_everything_bitwise() {
    let env_config = EnvConfig::planar_2dof(Variant::Mara);
    let make_train = |dir: &std::path::Path| TrainConfig {
        total_timesteps: 128,
        n_steps: 64,
        n_minibatches: 4,
        n_epochs: 2,
        seed: 9,
        out_dir: dir.to_path_buf(),
        ..TrainConfig::default()
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let out_a = train(&env_config, &make_train(dir_a.path())).unwrap();
    let out_b = train(&env_config, &make_train(dir_b.path())).unwrap();
    let metrics_a = std::fs::read(out_a.instance_dir.join("metrics.csv")).unwrap();
    let metrics_b = std::fs::read(out_b.instance_dir.join("metrics.csv")).unwrap();
    let train_ok = metrics_a == metrics_b
        && std::fs::read(&out_a.final_checkpoint).unwrap()
            == std::fs::read(&out_b.final_checkpoint).unwrap();

    let mut agent_config = env_config.clone();
    agent_config.seed = 5;
    let random_ok = run_random_agent(agent_config.clone(), 300).unwrap()
        == run_random_agent(agent_config.clone(), 300).unwrap();

    let checkpoint = load_checkpoint(&out_a.final_checkpoint).unwrap();
    let bench_ok = benchmark(&checkpoint, &agent_config, 5).unwrap().to_toml()
        == benchmark(&checkpoint, &agent_config, 5).unwrap().to_toml();

    assert!(criterion(
        "a fixed seed and config reproduce training metrics, random-agent logs, and benchmark reports bitwise",
        train_ok && random_ok && bench_ok,
        &format!("training: {train_ok}, random agent: {random_ok}, benchmark: {bench_ok}"),
    ));
}
