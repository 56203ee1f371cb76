use std::fs;
use std::path::Path;
use std::process::Command;

use streampca::bench::read_trajectories;
use streampca::data::load_csv;
use streampca::solvers::Method;

fn streampca(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_streampca"))
        .args(args)
        .env_remove("STREAMPCA_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) {
    let out = streampca(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn trajectories(path: &Path) -> Vec<(Method, streampca::bench::Trajectory)> {
    read_trajectories(fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn generate_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["generate", "--out", out]);
    let data = load_csv(&dir.path().join("dataset.csv"), true).unwrap();
    assert_eq!((data.n(), data.dim()), (10_000, 32));
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("dataset.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["spectrum"].as_array().unwrap().len(), 32);
    assert_eq!(meta["basis_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn generate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&["generate", "--n", "10", "--d", "2", "--out", a.path().to_str().unwrap()]);
    ok(&["generate", "--n", "10", "--d", "2", "--out", b.path().to_str().unwrap()]);
    let bytes = fs::read(a.path().join("dataset.csv")).unwrap();
    assert_eq!(bytes, fs::read(b.path().join("dataset.csv")).unwrap());
    let data = load_csv(&a.path().join("dataset.csv"), true).unwrap();
    assert_eq!((data.n(), data.dim()), (10, 2));
}

#[test]
fn seed_env_var_overrides_default() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |dir: &Path, seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_streampca"));
        cmd.args(["generate", "--n", "5", "--d", "2", "--out", dir.to_str().unwrap()])
            .env_remove("STREAMPCA_SEED");
        if let Some(s) = seed {
            cmd.env("STREAMPCA_SEED", s);
        }
        assert!(cmd.status().unwrap().success());
        fs::read_to_string(dir.join("dataset.meta.json")).unwrap()
    };
    assert!(run(a.path(), Some("7")).contains("\"seed\": 7"));
    assert!(run(b.path(), None).contains("\"seed\": 42"));
}

#[test]
fn generated_file_feeds_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["generate", "--n", "400", "--d", "6", "--out", out]);
    let data = dir.path().join("dataset.csv");
    ok(&[
        "run",
        "--method",
        "power",
        "--k",
        "2",
        "--eta",
        "0.1",
        "--data",
        data.to_str().unwrap(),
        "--out",
        out,
    ]);
    let t = trajectories(&dir.path().join("power.csv"));
    assert_eq!(t[0].1.last().unwrap().iteration, 280);
}

#[test]
fn run_msg_writes_suboptimality() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "run",
        "--method",
        "msg",
        "--k",
        "4",
        "--n",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = fs::read_to_string(dir.path().join("msg.csv")).unwrap();
    assert!(text.starts_with("method,iteration,elapsed_s,objective,suboptimality,rank\n"));
    let t = trajectories(&dir.path().join("msg.csv"));
    assert!(t[0].1.last().unwrap().suboptimality.is_finite());
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["k"], 4);
    assert_eq!(manifest["args"]["experiment"]["synthetic"]["d"], 32);
    assert!(manifest["runs"][0]["eta0"].is_number());
}

#[test]
fn run_batch_has_one_record() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "run",
        "--method",
        "batch",
        "--n",
        "1000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let t = trajectories(&dir.path().join("batch.csv"));
    assert_eq!(t[0].1.len(), 1);
}

#[test]
fn run_capped_respects_cap() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "run",
        "--method",
        "capped_msg",
        "--k",
        "4",
        "--cap",
        "5",
        "--n",
        "3000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let t = trajectories(&dir.path().join("capped_msg.csv"));
    assert!(t[0].1.records.iter().map(|r| r.rank).max().unwrap() <= 5);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        streampca(&["run", "--method", "sgd", "--out", out]).status.code(),
        Some(2)
    );
    assert_eq!(
        streampca(&["run", "--method", "msg", "--k", "40", "--out", out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(streampca(&["compare", "--n", "3", "--out", out]).status.code(), Some(2));
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let res = streampca(&["generate", "--n", "5", "--d", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!res.stderr.is_empty());
}

#[test]
fn compare_has_five_blocks_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |dir: &Path| {
        vec!["compare", "--n", "2000", "--d", "12", "--clock", "off", "--out"]
            .into_iter()
            .map(str::to_owned)
            .chain([dir.to_str().unwrap().to_owned()])
            .collect::<Vec<_>>()
    };
    let run = |dir: &Path| {
        let a = args(dir);
        ok(&a.iter().map(String::as_str).collect::<Vec<_>>());
    };
    run(a.path());
    run(b.path());
    let t = trajectories(&a.path().join("compare.csv"));
    assert_eq!(t.iter().map(|(m, _)| *m).collect::<Vec<_>>(), Method::ALL.to_vec());
    assert_eq!(
        fs::read(a.path().join("compare.csv")).unwrap(),
        fs::read(b.path().join("compare.csv")).unwrap()
    );
}

#[test]
fn compare_with_inactive_cap_matches_msg() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "compare",
        "--methods",
        "msg,capped_msg",
        "--cap",
        "32",
        "--n",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let t = trajectories(&dir.path().join("compare.csv"));
    let (msg, capped) = (&t[0].1, &t[1].1);
    assert_eq!(msg.len(), capped.len());
    for (a, b) in msg.records.iter().zip(&capped.records) {
        assert_eq!(a.iteration, b.iteration);
        assert!((a.objective - b.objective).abs() <= 1e-10);
    }
}
