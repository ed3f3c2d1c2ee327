use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use modac_core::moea::{GenerationParams, RunSetup};
use modac_core::neural::load_checkpoint;
use modac_core::rl::{bootstrap_instance_meta, derive_seed, run_episode, Controller, EnvInstance, EpisodeEnv, Timings};

use crate::bootstrap::meta_matches;
use crate::evaluate::MethodSpec;
use crate::manifest::{instance_name, read_instance};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct ProfileArgs {
    pub instance: PathBuf,
    pub method: MethodSpec,
    pub setup: RunSetup,
    pub generations: usize,
    pub episodes: usize,
    pub seed: u64,
}

/// Mean seconds per episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub instance: String,
    pub method: String,
    pub episodes: usize,
    pub generations: usize,
    pub components: Timings,
    /// Wall clock of a whole episode, including untracked bookkeeping.
    pub total: f64,
    /// Component names, largest first.
    pub ranking: Vec<String>,
    /// Each component's share of `total`.
    pub shares: Timings,
}

fn ranking(t: &Timings) -> Vec<String> {
    let mut named = [
        ("setup", t.setup),
        ("state_graph", t.state_graph),
        ("inference", t.inference),
        ("generation", t.generation),
        ("hypervolume", t.hypervolume),
    ];
    named.sort_by(|a, b| b.1.total_cmp(&a.1));
    named.iter().map(|(n, _)| n.to_string()).collect()
}

/// Times `episodes` full episodes on one instance. Instances without
/// matching metadata are bootstrapped in memory; the file is left untouched.
pub fn profile(args: &ProfileArgs) -> Result<ProfileReport, CliError> {
    if args.episodes == 0 {
        return Err(CliError::Config { field: "episodes", message: "must be positive".into() });
    }
    let file = read_instance(&args.instance)?;
    let meta = match file.meta {
        Some(m) if meta_matches(&m, &args.setup) => m,
        _ => bootstrap_instance_meta(&file.instance, &args.setup, args.generations, args.seed)?,
    };
    let mut env = EpisodeEnv::new(vec![EnvInstance { instance: file.instance, meta }], args.setup, args.generations)?;
    let net = match &args.method {
        MethodSpec::Static => None,
        MethodSpec::Policy { path, .. } => {
            let ck = load_checkpoint(path)?;
            ck.ensure_compatible(args.setup.num_objectives(), args.setup.algorithm.action_dim())?;
            Some(ck.policy()?)
        }
    };

    let mut total = 0.0;
    for e in 0..args.episodes {
        let controller = match &net {
            None => Controller::Static(GenerationParams::vanilla(args.setup.algorithm)),
            Some(net) => Controller::Policy { net, sampler: None },
        };
        let started = Instant::now();
        run_episode(&mut env, 0, derive_seed(args.seed, &[e as u64]), controller)?;
        total += started.elapsed().as_secs_f64();
    }
    let n = args.episodes as f64;
    let t = env.timings();
    let components = Timings {
        setup: t.setup / n,
        state_graph: t.state_graph / n,
        inference: t.inference / n,
        generation: t.generation / n,
        hypervolume: t.hypervolume / n,
    };
    let total = total / n;
    let share = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    Ok(ProfileReport {
        instance: instance_name(&args.instance),
        method: args.method.name().to_string(),
        episodes: args.episodes,
        generations: args.generations,
        ranking: ranking(&components),
        shares: Timings {
            setup: share(components.setup),
            state_graph: share(components.state_graph),
            inference: share(components.inference),
            generation: share(components.generation),
            hypervolume: share(components.hypervolume),
        },
        components,
        total,
    })
}
