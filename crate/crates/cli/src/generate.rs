use std::path::{Path, PathBuf};

use modac_core::problems::{generate_cvrp, generate_fjsp, CvrpGenConfig, FjspGenConfig, Instance, InstanceFile, ProblemKind};
use modac_core::rl::derive_seed;

use crate::manifest::{Manifest, MANIFEST_NAME};
use crate::{write_file, CliError, InstanceSize};

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub problem: ProblemKind,
    pub size: InstanceSize,
    pub count: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Share of instances in the training split (rounded up).
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateReport {
    pub manifest: PathBuf,
    pub train: usize,
    pub test: usize,
    pub warnings: Vec<String>,
}

fn generate_one(problem: ProblemKind, size: InstanceSize, seed: u64) -> Result<Instance, CliError> {
    let bad_size =
        || CliError::Config { field: "size", message: format!("{size:?} does not describe a {problem:?} instance") };
    Ok(match (problem, size) {
        (ProblemKind::Fjsp, InstanceSize::Shop { jobs, machines }) => {
            generate_fjsp(seed, jobs, machines, &FjspGenConfig::default()).map_err(modac_core::Error::from)?.into()
        }
        (ProblemKind::Cvrp, InstanceSize::Routing { customers }) => {
            generate_cvrp(seed, customers, &CvrpGenConfig::default()).map_err(modac_core::Error::from)?.into()
        }
        _ => return Err(bad_size()),
    })
}

pub fn file_name(problem: ProblemKind, size: InstanceSize, index: usize) -> String {
    let p = match problem {
        ProblemKind::Fjsp => "fjsp",
        ProblemKind::Cvrp => "cvrp",
    };
    format!("{p}_{}_{index:04}.json", size.label())
}

/// Writes `count` instances and a train/test manifest into `out_dir`.
/// Instance `i` uses a seed derived from `(seed, i)`.
pub fn generate(args: &GenerateArgs) -> Result<GenerateReport, CliError> {
    if args.count == 0 {
        return Err(CliError::Config { field: "count", message: "must be positive".into() });
    }
    if !(0.0..=1.0).contains(&args.train_fraction) {
        return Err(CliError::Config { field: "train_fraction", message: "must be in [0, 1]".into() });
    }
    let n_train = ((args.count as f64) * args.train_fraction).ceil() as usize;
    let mut names = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let seed = derive_seed(args.seed, &[i as u64]);
        let file = InstanceFile::new(seed, generate_one(args.problem, args.size, seed)?);
        let name = file_name(args.problem, args.size, i);
        write_file(&args.out_dir.join(&name), file.to_json())?;
        names.push(name);
    }
    let test = names.split_off(n_train.min(args.count));
    let mut warnings = Vec::new();
    if test.is_empty() {
        warnings.push("test split is empty".to_string());
    }
    if names.is_empty() {
        warnings.push("train split is empty".to_string());
    }
    let manifest = Manifest { problem: args.problem, size: args.size, seed: args.seed, train: names, test };
    let path = args.out_dir.join(MANIFEST_NAME);
    write_file(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    Ok(GenerateReport { manifest: path, train: manifest.train.len(), test: manifest.test.len(), warnings })
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join(MANIFEST_NAME)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(dir: &Path, count: usize) -> GenerateArgs {
        GenerateArgs {
            problem: ProblemKind::Fjsp,
            size: InstanceSize::Shop { jobs: 3, machines: 2 },
            count,
            seed: 5,
            out_dir: dir.to_path_buf(),
            train_fraction: 0.5,
        }
    }

    #[test]
    fn split_and_determinism() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let r = generate(&args(a.path(), 4)).unwrap();
        assert_eq!((r.train, r.test), (2, 2));
        generate(&args(b.path(), 4)).unwrap();
        for name in ["manifest.json", "fjsp_3j2m_0003.json"] {
            assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        }
        let one = generate(&args(a.path(), 1)).unwrap();
        assert_eq!((one.train, one.test), (1, 0));
        assert_eq!(one.warnings.len(), 1);
    }
}
