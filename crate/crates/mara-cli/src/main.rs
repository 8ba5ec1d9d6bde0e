//! `mara`: train, evaluate, and poke at the reach environments from a shell.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid configuration or file,
//! 3 runtime failure.

use clap::{Parser, Subcommand};
use mara_core::{
    benchmark, load_checkpoint, load_config, reward_surface, run_policy, run_random_agent, train,
    write_surface_csv, write_trajectory_csv, EnvConfig, Error, Result, RunConfig, TrainConfig,
    TrainOutput, Variant, VELOCITY_LIMIT_MAX,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "mara",
    version,
    about = "Reach-task environments for a six-jointed arm, with a built-in PPO trainer",
    after_help = "Variants: mara, mara_orient, mara_collision, mara_collision_orient."
)]
struct Cli {
    /// Throttle stepping to the 10 ms control period (wall clock)
    #[arg(short = 'r', long = "real-speed", global = true)]
    real_speed: bool,

    /// Joint velocity limit in rad/s; keep <= 1.57
    #[arg(short = 'v', long = "velocity", global = true, value_name = "RAD_PER_S")]
    velocity: Option<f64>,

    /// Environment instance id; `train` also accepts an inclusive range A..B
    #[arg(long, global = true, value_name = "ID", default_value = "0")]
    instance: String,

    /// Run configuration file (TOML)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master RNG seed for the environment and the agent
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Environment variant (see --help for the list)
    #[arg(long, global = true, value_name = "NAME", value_parser = parse_variant)]
    variant: Option<Variant>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a policy; writes metrics.csv and checkpoints under the run directory
    Train {
        /// Override the total number of environment steps
        #[arg(long, value_name = "N")]
        timesteps: Option<usize>,
        /// Run directory (each instance writes to its own instance-numbered subdirectory)
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Also write reward/entropy series CSVs and SVG charts
        #[arg(long)]
        plots: bool,
    },
    /// Play one episode from a checkpoint and export its trajectory
    Run {
        /// Checkpoint file written by `train`
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Use mean actions instead of sampling from the policy
        #[arg(long)]
        deterministic: bool,
        /// Trajectory CSV output path
        #[arg(long, value_name = "FILE", default_value = "trajectory.csv")]
        out: PathBuf,
    },
    /// Evaluate a checkpoint over repeated episodes and print accuracy tables
    Benchmark {
        /// Checkpoint file written by `train`
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Number of evaluation episodes
        #[arg(long, value_name = "N", default_value_t = 10)]
        runs: usize,
        /// Also write the report as TOML
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Drive the environment with uniform random actions
    Random {
        /// Number of steps to take (episodes reset on termination)
        #[arg(long, value_name = "N", default_value_t = 1000)]
        steps: usize,
        /// Trajectory CSV output path
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Export the reward surface over distance x and orientation error y
    RewardSurface {
        /// Output CSV path
        #[arg(long, value_name = "FILE", default_value = "surface.csv")]
        out: PathBuf,
        /// Grid resolution per axis
        #[arg(long, value_name = "N", default_value_t = 101)]
        grid: usize,
    },
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    })
}

/// Global flags after parsing, with the instance spec expanded.
struct Common {
    real_speed: bool,
    velocity: Option<f64>,
    instances: Vec<u64>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    variant: Option<Variant>,
}

/// Expand an instance spec: a plain id, or an inclusive range `A..B` / `A-B`.
fn parse_instances(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    let bad = |_| Error::config(format!("invalid --instance '{spec}' (expected ID or A..B)"));
    let (lo, hi) = match spec.split_once("..").or_else(|| spec.split_once('-')) {
        Some((a, b)) => (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?),
        None => {
            let id = spec.parse().map_err(bad)?;
            (id, id)
        }
    };
    if hi < lo {
        return Err(Error::config(format!(
            "--instance range {lo}..{hi} is empty"
        )));
    }
    if hi - lo >= 64 {
        return Err(Error::config(
            "refusing to run more than 64 instances at once",
        ));
    }
    Ok((lo..=hi).collect())
}

fn single_instance(common: &Common) -> Result<u64> {
    match common.instances[..] {
        [id] => Ok(id),
        _ => Err(Error::config(
            "--instance ranges are only valid with `train`",
        )),
    }
}

/// Start from `--config` (or the variant defaults) and fold in flag overrides.
fn assemble(common: &Common) -> Result<RunConfig> {
    let mut rc = match &common.config {
        Some(path) => load_config(path)?,
        None => {
            let variant = common.variant.unwrap_or(Variant::Mara);
            RunConfig {
                env: EnvConfig::default_6dof(variant),
                train: TrainConfig::default_for(variant),
            }
        }
    };
    if let Some(v) = common.variant {
        rc.env.variant = v;
    }
    if let Some(seed) = common.seed {
        rc.train.seed = seed;
        rc.env.seed = seed;
    }
    if let Some(v) = common.velocity {
        rc.env.velocity_limit = v;
    }
    if common.real_speed {
        rc.env.real_speed = true;
    }
    rc.env.validate()?;
    rc.train.validate()?;
    Ok(rc)
}

fn cmd_train(
    common: &Common,
    timesteps: Option<usize>,
    out: Option<PathBuf>,
    plots: bool,
) -> Result<()> {
    let mut rc = assemble(common)?;
    if let Some(t) = timesteps {
        rc.train.total_timesteps = t;
    }
    if let Some(dir) = out {
        rc.train.out_dir = dir;
    }
    if plots {
        rc.train.emit_plots = true;
    }
    rc.train.validate()?;

    if let [id] = common.instances[..] {
        rc.env.instance_id = id;
        report_training(&train(&rc.env, &rc.train)?);
        return Ok(());
    }

    let mut handles = Vec::new();
    for &id in &common.instances {
        let mut env = rc.env.clone();
        env.instance_id = id;
        let tc = rc.train.clone();
        handles.push((id, std::thread::spawn(move || train(&env, &tc))));
    }
    let mut failure = None;
    for (id, handle) in handles {
        match handle.join() {
            Ok(Ok(output)) => report_training(&output),
            Ok(Err(e)) => {
                eprintln!("instance {id}: {e}");
                failure.get_or_insert(e);
            }
            Err(_) => {
                failure.get_or_insert(Error::Contract(format!(
                    "trainer thread for instance {id} panicked"
                )));
            }
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn report_training(output: &TrainOutput) {
    println!("instance directory: {}", output.instance_dir.display());
    match output.metrics.last() {
        Some(m) => println!(
            "updates: {}  timesteps: {}  mean episode reward: {:.3}  entropy: {:.3}",
            m.update, m.timesteps, m.mean_ep_reward, m.entropy
        ),
        None => eprintln!("warning: training produced no updates"),
    }
    println!("final checkpoint: {}", output.final_checkpoint.display());
}

fn cmd_run(common: &Common, checkpoint: &Path, deterministic: bool, out: &Path) -> Result<()> {
    let mut rc = assemble(common)?;
    rc.env.instance_id = single_instance(common)?;
    let ck = load_checkpoint(checkpoint)?;
    let log = run_policy(&ck, &rc.env, deterministic)?;
    write_trajectory_csv(out, &log.records)?;
    println!(
        "steps: {}  return: {:.3}  final distance: {:.4} m  success: {}  collided: {}",
        log.records.len(),
        log.episode_return,
        log.final_distance,
        log.success,
        log.collided
    );
    if rc.env.variant.uses_orientation() {
        println!("final orientation error: {:.4} rad", log.final_orientation);
    }
    println!("trajectory: {}", out.display());
    Ok(())
}

fn cmd_benchmark(
    common: &Common,
    checkpoint: &Path,
    runs: usize,
    out: Option<&Path>,
) -> Result<()> {
    let mut rc = assemble(common)?;
    rc.env.instance_id = single_instance(common)?;
    let ck = load_checkpoint(checkpoint)?;
    let report = benchmark(&ck, &rc.env, runs)?;
    println!("{report}");
    if let Some(path) = out {
        std::fs::write(path, report.to_toml())?;
        println!("report: {}", path.display());
    }
    Ok(())
}

fn cmd_random(common: &Common, steps: usize, out: Option<&Path>) -> Result<()> {
    let mut rc = assemble(common)?;
    rc.env.instance_id = single_instance(common)?;
    let log = run_random_agent(rc.env, steps)?;
    println!(
        "steps: {}  episodes completed: {}  mean step reward: {:.4}",
        log.records.len(),
        log.episode_returns.len(),
        log.mean_reward()
    );
    if let Some(path) = out {
        write_trajectory_csv(path, &log.records)?;
        println!("trajectory: {}", path.display());
    }
    Ok(())
}

fn cmd_reward_surface(common: &Common, out: &Path, grid: usize) -> Result<()> {
    let rc = assemble(common)?;
    let surface = reward_surface(&rc.env.reward_params, grid, grid)?;
    write_surface_csv(out, &surface)?;
    println!("wrote {} ({grid}x{grid} grid)", out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let Cli {
        real_speed,
        velocity,
        instance,
        config,
        seed,
        variant,
        command,
    } = cli;
    if let Some(v) = velocity {
        if !(v > 0.0 && v <= VELOCITY_LIMIT_MAX) {
            return Err(Error::config(format!(
                "--velocity {v} is out of range: joint speed must stay in \
                 (0, {VELOCITY_LIMIT_MAX}] rad/s"
            )));
        }
    }
    let common = Common {
        real_speed,
        velocity,
        instances: parse_instances(&instance)?,
        config,
        seed,
        variant,
    };
    match command {
        Command::Train {
            timesteps,
            out,
            plots,
        } => cmd_train(&common, timesteps, out, plots),
        Command::Run {
            checkpoint,
            deterministic,
            out,
        } => cmd_run(&common, &checkpoint, deterministic, &out),
        Command::Benchmark {
            checkpoint,
            runs,
            out,
        } => cmd_benchmark(&common, &checkpoint, runs, out.as_deref()),
        Command::Random { steps, out } => cmd_random(&common, steps, out.as_deref()),
        Command::RewardSurface { out, grid } => cmd_reward_surface(&common, &out, grid),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Load(_) => 2,
        Error::Contract(_) | Error::Numerical(_) | Error::Report(_) | Error::Io(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn instance_specs_expand() {
        assert_eq!(parse_instances("4").unwrap(), vec![4]);
        assert_eq!(parse_instances("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_instances("2-4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_instances(" 7 ").unwrap(), vec![7]);
        assert!(parse_instances("x").is_err());
        assert!(parse_instances("5..2").is_err());
        assert!(parse_instances("0..100").is_err());
    }

    #[test]
    fn variants_parse_through_the_clap_hook() {
        assert_eq!(parse_variant("mara_orient").unwrap(), Variant::MaraOrient);
        assert!(parse_variant("mara_fly").unwrap_err().contains("unknown variant"));
    }
}
