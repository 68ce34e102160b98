//! Command-line runner for spiking-classifier experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stcs::env::grid_world::gw_optimal_steps;
use stcs::harness::config::parse_pairs;
use stcs::harness::{compare_runs, run_experiment, ExperimentConfig};
use stcs::Error;

#[derive(Parser)]
#[command(name = "stcs", version, about = "Spiking-network classifier system experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write metrics under --out-dir.
    Run {
        /// mountain-car, grid or robot.
        #[arg(long)]
        env: Option<String>,
        /// spiking or mlp.
        #[arg(long)]
        repr: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repeats: Option<u32>,
        #[arg(long)]
        out_dir: PathBuf,
        /// key=value file; flags given here override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra key=value overrides, e.g. `--set trials=200`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Welch t-test between two experiment directories.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        #[arg(long, default_value = "macro_steps")]
        column: String,
    },
    /// Fewest grid-world moves from a start to the goal.
    ProbeOracle {
        #[arg(long, default_value_t = 0.25)]
        x: f64,
        #[arg(long, default_value_t = 0.25)]
        y: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 2,
        Error::Engine(_) | Error::Io(_) => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { env, repr, seed, repeats, out_dir, config, set } => {
            let mut pairs = match config {
                Some(path) => parse_pairs(
                    &std::fs::read_to_string(&path)
                        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?,
                )?,
                None => Vec::new(),
            };
            let flags = [
                ("env", env),
                ("repr", repr),
                ("seed", seed.map(|s| s.to_string())),
                ("repeats", repeats.map(|r| r.to_string())),
            ];
            for (k, v) in flags {
                if let Some(v) = v {
                    pairs.push((k.to_string(), v));
                }
            }
            for kv in set {
                let (k, v) =
                    kv.split_once('=').ok_or_else(|| Error::config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
                pairs.push((k.trim().to_string(), v.trim().to_string()));
            }
            let cfg = ExperimentConfig::from_pairs(&pairs)?;
            let outcomes = run_experiment(&cfg, &out_dir)?;
            for (k, o) in outcomes.iter().enumerate() {
                let fm = o.final_mean(|r| r.macro_steps as f64).unwrap_or(f64::NAN);
                let stable = o.stable_at.map_or("not attained".to_string(), |t| t.to_string());
                println!("repeat {k} seed {}: final macro steps {fm:.3}, stability {stable}", o.seed);
            }
            println!("wrote {}", out_dir.display());
        }
        Command::Compare { dir_a, dir_b, column } => {
            let c = compare_runs(&dir_a, &dir_b, &column)?;
            println!("column {column}: mean_a={} mean_b={} t={} df={} p={}", c.mean_a, c.mean_b, c.t, c.df, c.p_value);
        }
        Command::ProbeOracle { x, y, step } => {
            if !(step > 0.0) || !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::config("x and y must lie in [0, 1] and step must be positive"));
            }
            println!("{}", gw_optimal_steps(x, y, step));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
