use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use modac_cli::bootstrap::{bootstrap, BootstrapArgs, BootstrapStatus};
use modac_cli::evaluate::{evaluate, EvaluateArgs, MethodSpec};
use modac_cli::generate::{generate, GenerateArgs};
use modac_cli::manifest::{resolve_instances, Split};
use modac_cli::profile::{profile, ProfileArgs};
use modac_cli::train::{train, TrainOptions};
use modac_cli::{CliError, ExperimentConfig, InstanceSize};
use modac_core::moea::RunSetup;
use modac_core::problems::ProblemKind;
use modac_core::{AlgorithmKind, ObjectiveSet};

#[derive(Parser)]
#[command(name = "modac", version, about = "Learned per-generation parameter control for multi-objective evolutionary algorithms")]
struct Cli {
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Overrides for the run setup taken from the config file.
#[derive(Args)]
struct SetupFlags {
    #[arg(long)]
    algorithm: Option<AlgorithmKind>,
    #[arg(long)]
    objectives: Option<ObjectiveSet>,
    #[arg(long)]
    population: Option<usize>,
    /// Generations per episode.
    #[arg(long)]
    generations: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances and a train/test manifest.
    Generate {
        #[arg(long)]
        problem: Option<ProblemKind>,
        /// `5j5m` (scheduling) or `n20` (routing).
        #[arg(long)]
        size: Option<InstanceSize>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0.5)]
        train_fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attach reference and ideal points to instance files.
    Bootstrap {
        /// Instance files, directories or manifests.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "all")]
        split: Split,
        #[command(flatten)]
        setup: SetupFlags,
        /// Recompute even when matching metadata exists.
        #[arg(long)]
        force: bool,
    },
    /// Train a policy (requires --config).
    Train {
        /// Continue from a checkpoint with training state.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Stop after this many completed epochs.
        #[arg(long)]
        stop_after: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare methods on bootstrapped instances.
    Evaluate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "test")]
        split: Split,
        /// `static`, `name=checkpoint` or a checkpoint path; repeatable.
        #[arg(long = "method", required = true)]
        methods: Vec<MethodSpec>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[command(flatten)]
        setup: SetupFlags,
        /// Also report IGD and IGD+ against the pooled front.
        #[arg(long)]
        igd: bool,
        /// Sample policy actions instead of using the means.
        #[arg(long)]
        sample: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time the components of full episodes on one instance.
    Profile {
        instance: PathBuf,
        #[arg(long, default_value = "static")]
        method: MethodSpec,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        #[command(flatten)]
        setup: SetupFlags,
    },
}

fn resolve_setup(cfg: &ExperimentConfig, flags: &SetupFlags) -> (RunSetup, usize) {
    let setup = RunSetup::new(
        flags.algorithm.unwrap_or(cfg.algorithm),
        flags.objectives.unwrap_or(cfg.objective_set),
        flags.population.unwrap_or(cfg.population_size),
    );
    (setup, flags.generations.unwrap_or(cfg.generations))
}

/// Reports go to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_json(v: &impl serde::Serialize) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("report serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config { field: "threads", message: e.to_string() })?;
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::read(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Generate { problem, size, count, train_fraction, out } => {
            let report = generate(&GenerateArgs {
                problem: problem.unwrap_or(cfg.problem),
                size: size.unwrap_or(cfg.size),
                count,
                seed: cfg.seed,
                out_dir: out,
                train_fraction,
            })?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print_json(&serde_json::json!({
                "manifest": report.manifest, "train": report.train, "test": report.test
            }));
        }
        Command::Bootstrap { inputs, split, setup, force } => {
            let (setup, generations) = resolve_setup(&cfg, &setup);
            let paths = resolve_instances(&inputs, split)?;
            let report = bootstrap(&BootstrapArgs { paths, setup, generations, seed: cfg.seed, force }, |done, total, path, status| {
                let verb = match status {
                    BootstrapStatus::Bootstrapped => "bootstrapped",
                    BootstrapStatus::Skipped => "skipped",
                };
                eprintln!("[{done}/{total}] {verb} {}", path.display());
            })?;
            print_json(&serde_json::json!({
                "bootstrapped": report.bootstrapped.len(), "skipped": report.skipped.len()
            }));
        }
        Command::Train { resume, stop_after, out } => {
            if cli.config.is_none() {
                return Err(CliError::Config { field: "config", message: "training requires --config".into() });
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            let report = train(&cfg, &TrainOptions { resume, stop_after }, |log| {
                let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
                eprintln!(
                    "epoch {} reward {} delta {} kl {:.5} ({:.1}s)",
                    log.epoch,
                    show(log.mean_episode_reward),
                    show(log.mean_final_delta),
                    log.approx_kl,
                    log.wall_clock_secs
                );
            })?;
            print_json(&serde_json::json!({
                "checkpoint": report.checkpoint, "log": report.log, "epochs": report.epochs
            }));
        }
        Command::Evaluate { inputs, split, methods, runs, setup, igd, sample, out } => {
            let (setup, generations) = resolve_setup(&cfg, &setup);
            let paths = resolve_instances(&inputs, split)?;
            let result = evaluate(&EvaluateArgs {
                paths,
                methods,
                setup,
                generations,
                runs,
                seed: cfg.seed,
                igd,
                sample_actions: sample,
            })?;
            result.write(&out)?;
            print_json(&result.table.aggregates);
        }
        Command::Profile { instance, method, episodes, setup } => {
            let (setup, generations) = resolve_setup(&cfg, &setup);
            let report = profile(&ProfileArgs { instance, method, setup, generations, episodes, seed: cfg.seed })?;
            print_json(&report);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
