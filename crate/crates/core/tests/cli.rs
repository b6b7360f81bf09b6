use std::path::PathBuf;
use std::process::{Command, Output};

use mot_nll::report::ScoreReport;
use mot_nll::scenario::parse_scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mot-nll"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn score_human_table() {
    let path = fixture("example1.json");
    let o = run(&["score", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let m1 = text.lines().find(|l| l.starts_with("M1")).unwrap();
    let m2 = text.lines().find(|l| l.starts_with("M2")).unwrap();
    let gospa = |l: &str| l.split_whitespace().nth(5).unwrap().to_string();
    let nll = |l: &str| l.split_whitespace().nth(1).unwrap().to_string();
    assert_eq!(gospa(m1), gospa(m2));
    assert_ne!(nll(m1), nll(m2));
}

#[test]
fn infinite_nll_is_rendered() {
    let path = fixture("example2.json");
    let o = run(&["score", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let m2 = stdout(&o).lines().find(|l| l.starts_with("M2")).unwrap().to_string();
    assert_eq!(m2.split_whitespace().nth(1), Some("inf"));
}

#[test]
fn machine_output_to_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let path = fixture("example2.json");
    let o = run(&[
        "score", "--scenario", path.to_str().unwrap(), "--format", "machine", "--q", "3", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"Infinity\""));
    let report: ScoreReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.q, 3);
    assert_eq!(report.ranking_by_nll, ["M1", "M2"]);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let path = fixture("example1.json");
    let args = ["score", "--scenario", path.to_str().unwrap(), "--format", "machine", "--exact"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn oracle_matches_exact_score() {
    let path = fixture("example1.json");
    let o = run(&["oracle", "--scenario", path.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0));
    let report: ScoreReport = serde_json::from_str(&stdout(&o)).unwrap();
    let e = run(&["score", "--scenario", path.to_str().unwrap(), "--format", "machine", "--exact"]);
    let exact: ScoreReport = serde_json::from_str(&stdout(&e)).unwrap();
    assert_eq!(report.trackers, exact.trackers);
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn invalid_documents_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let doc = std::fs::read_to_string(fixture("example1.json")).unwrap().replacen("\"r\": 0.9", "\"r\": 1.2", 1);
    let bad = write_temp(&dir, "bad.json", &doc);
    let o = run(&["score", "--scenario", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trackers[0].posterior.hypotheses[0].bernoullis[0].r"), "{}", stderr(&o));

    let garbage = write_temp(&dir, "garbage.json", "{ not json");
    assert_eq!(run(&["score", "--scenario", &garbage]).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["score", "--scenario", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["score"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let path = fixture("example1.json");
    assert_eq!(run(&["score", "--scenario", path.to_str().unwrap(), "--q", "0"]).status.code(), Some(1));
}

#[test]
fn oracle_beyond_limit_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let truth: Vec<String> = (0..9).map(|i| format!("[{i}.0, 1.0]")).collect();
    let doc = format!(
        r#"{{"schemaVersion": 1, "name": "large", "dimension": 2, "groundTruth": [{}],
            "trackers": [{{"name": "ppp", "posterior": {{"type": "pmbm",
                "intensity": {{"kind": "uniform", "totalMass": 9, "lower": [-1, -1], "upper": [10, 10]}},
                "hypotheses": [{{"weight": 1, "bernoullis": []}}]}}}}]}}"#,
        truth.join(", ")
    );
    let path = write_temp(&dir, "large.json", &doc);
    let o = run(&["oracle", "--scenario", &path]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    // The approximate path handles the same scenario.
    assert_eq!(run(&["score", "--scenario", &path]).status.code(), Some(0));
}

#[test]
fn gen_writes_reproducible_valid_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&[
            "gen", "--seed", "42", "--max-objects", "4", "--max-bernoullis", "3", "--max-hypotheses", "2", "--dim",
            "3", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let s = parse_scenario(&text).unwrap();
    assert_eq!(s.dim(), 3);
    assert!(s.ground_truth.len() <= 4);
    let o = run(&["score", "--scenario", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn theorem1_sweep_and_construction() {
    let path = fixture("theorem1_demo.json");
    let o = run(&[
        "theorem1", "--rho", "0.6", "--volume", "50", "--dim", "2", "--seed", "3", "--trials", "200",
        "--construction", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let max_gap: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("max |lhs - rhs|: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(max_gap <= 1e-9);
    assert!(text.contains("construction"));

    assert_eq!(run(&["theorem1", "--rho", "1.5", "--volume", "50"]).status.code(), Some(1));
    assert_eq!(run(&["theorem1", "--rho", "0.5", "--volume", "-1"]).status.code(), Some(1));
}
