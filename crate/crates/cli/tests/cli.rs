use std::path::{Path, PathBuf};
use std::process::Command;

use modac_cli::bootstrap::{bootstrap, BootstrapArgs};
use modac_cli::evaluate::{evaluate, EvaluateArgs, MethodSpec};
use modac_cli::generate::{generate, GenerateArgs};
use modac_cli::manifest::{read_instance, resolve_instances, Split};
use modac_cli::profile::{profile, ProfileArgs};
use modac_cli::results::{aggregate, ResultTable};
use modac_cli::InstanceSize;
use modac_core::moea::RunSetup;
use modac_core::problems::ProblemKind;
use modac_core::{AlgorithmKind, ObjectiveSet};

fn setup() -> RunSetup {
    RunSetup::new(AlgorithmKind::Nsga2, ObjectiveSet::Bi, 12)
}

fn small_fjsp(dir: &Path, count: usize) -> PathBuf {
    let report = generate(&GenerateArgs {
        problem: ProblemKind::Fjsp,
        size: InstanceSize::Shop { jobs: 3, machines: 3 },
        count,
        seed: 1,
        out_dir: dir.to_path_buf(),
        train_fraction: 0.5,
    })
    .unwrap();
    report.manifest
}

fn all_paths(manifest: &Path, split: Split) -> Vec<PathBuf> {
    resolve_instances(std::slice::from_ref(&manifest.to_path_buf()), split).unwrap()
}

fn boot(paths: Vec<PathBuf>, force: bool) -> modac_cli::bootstrap::BootstrapReport {
    bootstrap(&BootstrapArgs { paths, setup: setup(), generations: 5, seed: 0, force }, |_, _, _, _| {}).unwrap()
}

#[test]
fn bootstrap_skips_matching_metadata_and_force_repairs_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_fjsp(dir.path(), 4);
    let paths = all_paths(&manifest, Split::All);
    assert_eq!(boot(paths.clone(), false).bootstrapped.len(), 4);
    assert_eq!(boot(paths.clone(), false).skipped.len(), 4);

    let victim = &paths[0];
    let mut raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(victim).unwrap()).unwrap();
    raw["meta"] = serde_json::json!({ "reference_point": "broken" });
    std::fs::write(victim, raw.to_string()).unwrap();
    let err = bootstrap(
        &BootstrapArgs { paths: vec![victim.clone()], setup: setup(), generations: 5, seed: 0, force: false },
        |_, _, _, _| {},
    )
    .unwrap_err();
    assert!(err.to_string().contains("--force"), "{err}");
    assert_eq!(boot(vec![victim.clone()], true).bootstrapped.len(), 1);
    assert!(read_instance(victim).unwrap().meta.is_some());
}

fn static_eval(paths: Vec<PathBuf>, methods: Vec<MethodSpec>) -> modac_cli::evaluate::Evaluation {
    evaluate(&EvaluateArgs {
        paths,
        methods,
        setup: setup(),
        generations: 5,
        runs: 3,
        seed: 4,
        igd: true,
        sample_actions: false,
    })
    .unwrap()
}

#[test]
fn identical_methods_score_identically_and_aggregates_follow_the_rows() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_fjsp(dir.path(), 6);
    boot(all_paths(&manifest, Split::All), false);
    let test = all_paths(&manifest, Split::Test);
    assert_eq!(test.len(), 3);

    let policy_dir = tempfile::tempdir().unwrap();
    let net = modac_core::PolicyNet::new(modac_core::PolicyConfig::new(2, 2), 0).unwrap();
    let ck = policy_dir.path().join("p.json");
    modac_core::neural::save_checkpoint(&net, None, &ck).unwrap();
    let result = static_eval(
        test.clone(),
        vec![
            MethodSpec::Static,
            MethodSpec::Policy { name: "a".into(), path: ck.clone() },
            MethodSpec::Policy { name: "b".into(), path: ck },
        ],
    );
    let rows = |m: &str| result.table.rows.iter().filter(|r| r.method == m).map(|r| r.hv).collect::<Vec<_>>();
    assert_eq!(rows("a"), rows("b"));
    assert_eq!(rows("static").len(), 9);

    for row in &result.table.rows {
        assert!(row.hv >= 0.0 && row.hv.is_finite());
        assert!(row.igd.unwrap() >= row.igd_plus.unwrap());
        assert!(row.nondominated >= 1);
    }
    for t in &result.traces {
        assert_eq!(t.hv_best.len(), 6);
        assert!(t.hv_best.windows(2).all(|w| w[0] <= w[1]));
    }

    let out = dir.path().join("eval");
    result.write(&out).unwrap();
    let parsed = ResultTable::rows_from_csv(&std::fs::read_to_string(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(parsed, result.table.rows);
    assert_eq!(aggregate(&parsed), result.table.aggregates);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("aggregates.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3);
}

#[test]
fn evaluation_refuses_instances_without_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_fjsp(dir.path(), 2);
    let err = evaluate(&EvaluateArgs {
        paths: all_paths(&manifest, Split::Test),
        methods: vec![MethodSpec::Static],
        setup: setup(),
        generations: 3,
        runs: 1,
        seed: 0,
        igd: false,
        sample_actions: false,
    })
    .unwrap_err();
    assert!(err.to_string().contains("bootstrap"), "{err}");
}

#[test]
fn profile_components_fit_within_the_total() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_fjsp(dir.path(), 2);
    let path = all_paths(&manifest, Split::All).remove(0);
    let before = std::fs::read(&path).unwrap();
    let args = |generations| ProfileArgs {
        instance: path.clone(),
        method: MethodSpec::Static,
        setup: setup(),
        generations,
        episodes: 2,
        seed: 0,
    };
    let report = profile(&args(8)).unwrap();
    assert!(report.components.sum() <= report.total * (1.0 + 1e-9));
    assert_eq!(report.ranking.len(), 5);
    assert!(report.components.generation > 0.0);
    // Profiling bootstraps in memory only.
    assert_eq!(std::fs::read(&path).unwrap(), before);

    let empty = profile(&args(0)).unwrap();
    assert!(empty.components.setup > 0.0);
    assert_eq!(empty.components.generation, 0.0);
}

fn modac(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_modac")).args(args).output().unwrap()
}

#[test]
fn binary_reports_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let gen = modac(&["generate", "--problem", "cvrp", "--size", "n20", "--count", "2", "--out", out]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));

    let penta = modac(&["bootstrap", out, "--objectives", "penta", "--algorithm", "mopso"]);
    assert!(!penta.status.success());
    let err: serde_json::Value = serde_json::from_slice(&penta.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().to_lowercase().contains("objective"), "{err}");

    let missing = modac(&[
        "evaluate",
        out,
        "--method",
        "gs=/nonexistent/policy.json",
        "--out",
        dir.path().join("eval").to_str().unwrap(),
    ]);
    assert!(!missing.status.success());
    let err: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert!(err["error"].is_string() && err["message"].is_string());
}
