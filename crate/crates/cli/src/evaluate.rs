use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rayon::prelude::*;

use modac_core::moea::{GenerationParams, RunSetup, SearchRng};
use modac_core::neural::{load_checkpoint, PolicyNet};
use modac_core::pareto::{hypervolume, igd, igd_plus, non_dominated_indices};
use modac_core::rl::{derive_seed, run_episode, Controller, EnvInstance, EpisodeEnv, EpisodeOutcome};
use modac_core::ObjectiveVector;

use crate::bootstrap::meta_matches;
use crate::manifest::{instance_name, read_instance};
use crate::results::{ResultTable, RunRow};
use crate::{write_file, CliError};

/// A parameter-control method under evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    /// The vanilla parameters every generation.
    Static,
    /// A trained policy checkpoint.
    Policy { name: String, path: PathBuf },
}

impl MethodSpec {
    pub fn name(&self) -> &str {
        match self {
            MethodSpec::Static => "static",
            MethodSpec::Policy { name, .. } => name,
        }
    }
}

impl std::str::FromStr for MethodSpec {
    type Err = String;

    /// `static`, `name=path` or a bare checkpoint path (named after its stem).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "static" {
            return Ok(MethodSpec::Static);
        }
        let (name, path) = match s.split_once('=') {
            Some((n, p)) if !n.is_empty() && !p.is_empty() => (n.to_string(), PathBuf::from(p)),
            Some(_) => return Err(format!("malformed method `{s}` (expected name=path)")),
            None => {
                let path = PathBuf::from(s);
                (instance_name(&path), path)
            }
        };
        Ok(MethodSpec::Policy { name, path })
    }
}

#[derive(Debug, Clone)]
pub struct EvaluateArgs {
    pub paths: Vec<PathBuf>,
    pub methods: Vec<MethodSpec>,
    pub setup: RunSetup,
    pub generations: usize,
    pub runs: usize,
    pub seed: u64,
    /// Add IGD and IGD+ against the pooled per-instance reference front.
    pub igd: bool,
    /// Sample policy actions instead of taking the means.
    pub sample_actions: bool,
}

/// Convergence record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub method: String,
    pub instance: String,
    pub run: usize,
    pub hv_best: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub table: ResultTable,
    pub traces: Vec<Trace>,
}

impl Evaluation {
    pub fn traces_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "instance", "run", "generation", "hv_best"]).expect("in-memory write");
        for t in &self.traces {
            for (g, hv) in t.hv_best.iter().enumerate() {
                w.write_record([t.method.clone(), t.instance.clone(), t.run.to_string(), g.to_string(), hv.to_string()])
                    .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }

    /// Writes `results.csv`, `aggregates.json` and `traces.csv`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        self.table.write(dir)?;
        write_file(&dir.join("traces.csv"), self.traces_csv())
    }
}

enum Method {
    Static(GenerationParams),
    Policy(PolicyNet),
}

fn load_methods(args: &EvaluateArgs) -> Result<Vec<(String, Method)>, CliError> {
    let mut out: Vec<(String, Method)> = Vec::new();
    for spec in &args.methods {
        if out.iter().any(|(n, _)| n == spec.name()) {
            return Err(CliError::Config { field: "method", message: format!("duplicate method name `{}`", spec.name()) });
        }
        let method = match spec {
            MethodSpec::Static => Method::Static(GenerationParams::vanilla(args.setup.algorithm)),
            MethodSpec::Policy { path, .. } => {
                let ck = load_checkpoint(path)?;
                ck.ensure_compatible(args.setup.num_objectives(), args.setup.algorithm.action_dim())?;
                Method::Policy(ck.policy()?)
            }
        };
        out.push((spec.name().to_string(), method));
    }
    Ok(out)
}

/// Runs every method on every instance `runs` times. Run `r` on instance
/// `i` uses the same seed for every method.
pub fn evaluate(args: &EvaluateArgs) -> Result<Evaluation, CliError> {
    if args.runs == 0 {
        return Err(CliError::Config { field: "runs", message: "must be positive".into() });
    }
    if args.methods.is_empty() {
        return Err(CliError::Config { field: "method", message: "at least one method is required".into() });
    }
    let methods = load_methods(args)?;
    let mut instances = Vec::with_capacity(args.paths.len());
    for p in &args.paths {
        let file = read_instance(p)?;
        match &file.meta {
            Some(m) if meta_matches(m, &args.setup) => {}
            _ => {
                return Err(CliError::Instance {
                    path: p.clone(),
                    message: "missing metadata for this algorithm and objective set; run `bootstrap` first".into(),
                })
            }
        }
        instances.push((instance_name(p), EnvInstance::from_file(&file)?));
    }

    let jobs: Vec<(usize, usize, usize)> = (0..methods.len())
        .flat_map(|m| (0..instances.len()).flat_map(move |i| (0..args.runs).map(move |r| (m, i, r))))
        .collect();
    let outcomes: Vec<EpisodeOutcome> = jobs
        .par_iter()
        .map(|&(m, i, r)| {
            let seed = derive_seed(args.seed, &[i as u64, r as u64]);
            let mut env = EpisodeEnv::new(vec![instances[i].1.clone()], args.setup, args.generations)?;
            let controller = match &methods[m].1 {
                Method::Static(p) => Controller::Static(*p),
                Method::Policy(net) => Controller::Policy {
                    net,
                    sampler: args
                        .sample_actions
                        .then(|| SearchRng::seed_from_u64(derive_seed(seed, &[m as u64]))),
                },
            };
            Ok(run_episode(&mut env, 0, seed, controller)?)
        })
        .collect::<Result<_, CliError>>()?;

    let reference_fronts: Vec<Vec<ObjectiveVector>> = if args.igd {
        (0..instances.len())
            .map(|i| {
                let mut pool: Vec<ObjectiveVector> = jobs
                    .iter()
                    .zip(&outcomes)
                    .filter(|((_, ii, _), _)| *ii == i)
                    .flat_map(|(_, o)| o.archive.iter().cloned())
                    .collect();
                pool.sort_by(|a, b| a.partial_cmp(b).expect("finite objectives"));
                pool.dedup();
                let keep = non_dominated_indices(&pool);
                keep.into_iter().map(|k| pool[k].clone()).collect()
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut rows = Vec::with_capacity(jobs.len());
    let mut traces = Vec::with_capacity(jobs.len());
    for (&(m, i, r), outcome) in jobs.iter().zip(&outcomes) {
        let meta = &instances[i].1.meta;
        let hv = hypervolume(&outcome.archive, &meta.reference_point).map_err(modac_core::Error::from)?;
        let (igd_v, igd_p) = if args.igd {
            let rf = &reference_fronts[i];
            (
                Some(igd(&outcome.archive, rf).map_err(modac_core::Error::from)?),
                Some(igd_plus(&outcome.archive, rf).map_err(modac_core::Error::from)?),
            )
        } else {
            (None, None)
        };
        rows.push(RunRow {
            method: methods[m].0.clone(),
            instance: instances[i].0.clone(),
            run: r,
            seed: derive_seed(args.seed, &[i as u64, r as u64]),
            hv,
            igd: igd_v,
            igd_plus: igd_p,
            nondominated: outcome.archive.len(),
        });
        traces.push(Trace {
            method: methods[m].0.clone(),
            instance: instances[i].0.clone(),
            run: r,
            hv_best: outcome.hv_best_trace.clone(),
        });
    }
    Ok(Evaluation { table: ResultTable::new(rows), traces })
}
