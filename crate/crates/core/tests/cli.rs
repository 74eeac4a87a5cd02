//! End-to-end runs of the `norden` binary.

use std::process::{Command, Output};

use norden::pointwise::random_point;
use norden::report::VerificationReport;

fn norden(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_norden"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn table1_passes_and_lists_every_row() {
    let out = norden(&["table1", "--seed", "3", "--dim", "4"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for row in [
        "almost complex",
        "natural",
        "canonical",
        "T is a 3-form",
        "symmetric",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(row)),
            "missing row {row}"
        );
    }
    for column in ["W1⊕W2⊕W3", "W1⊕W2", "W3"] {
        assert!(text.lines().next().unwrap().contains(column));
    }
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let args = [
        "suite",
        "--only",
        "pointwise,lemma",
        "--dim",
        "4,6",
        "--trials",
        "5",
        "--seed",
        "9",
        "--format",
        "json",
    ];
    let (a, b) = (norden(&args), norden(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let report: VerificationReport = serde_json::from_slice(&a.stdout).unwrap();
    assert!(!report.is_empty());
    assert!(report.all_pass());
}

#[test]
fn seed_changes_the_report() {
    let run = |seed: &str| {
        norden(&[
            "connections",
            "--seed",
            seed,
            "--trials",
            "2",
            "--pq",
            "0.2,0.1",
            "--format",
            "json",
        ])
        .stdout
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn empty_report_is_an_empty_array() {
    let out = norden(&[
        "suite", "--only", "w1", "--chart", "flat4", "--dim", "4", "--format", "json",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "[]");
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["suite", "--trials", "0"],
        vec!["suite", "--dim", "5"],
        vec!["suite", "--chart", "no-such-chart"],
        vec!["connections", "--params", "1,2"],
        vec!["connections", "--pq", "a,b"],
        vec!["curvature", "--chart", "conformal4", "--at", "0.1,0.2"],
        vec!["suite", "--only", "everything"],
        vec!["no-such-command"],
    ] {
        let out = norden(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn malformed_point_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("point.json");
    std::fs::write(&path, "{\"dim\": 4, \"g\": [1, 2]}").unwrap();
    let out = norden(&["classify", "--point", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn classify_reads_a_point_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let point = dir.path().join("point.json");
    let report = dir.path().join("report.json");
    let pt = random_point(17, 6).unwrap();
    std::fs::write(&point, serde_json::to_string(&pt).unwrap()).unwrap();
    let out = norden(&[
        "classify",
        "--point",
        point.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let parsed: VerificationReport =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed.all_pass());
}

#[test]
fn classify_round_trip_passes() {
    let out = norden(&["classify", "--seed", "5", "--dim", "6", "--trials", "4"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn distinguished_connections_pass_on_random_points() {
    for args in [
        ["--params", "0,0.125,0,-0.125"],
        ["--params", "0,0,0,0.25"],
        ["--pq", "0.3,-0.4"],
    ] {
        let mut full = vec!["connections", "--trials", "6", "--dim", "6"];
        full.extend(args);
        assert_eq!(code(&norden(&full)), 0, "{args:?}");
    }
}

#[test]
fn curvature_reports_the_failing_scalar_relations() {
    let out = norden(&[
        "curvature",
        "--chart",
        "conformal4",
        "--pq",
        "0.3,-0.2",
        "--at",
        "0.3,0.2,0.1,0.4",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 1);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let point = &value["points"][0];
    assert_eq!(point["class"], "W1");
    let checks = point["checks"].as_array().unwrap();
    let failing: Vec<&str> = checks
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert!(!failing.is_empty());
    assert!(
        failing.iter().all(|c| {
            ["dtau", "cauchy", "lie form", "modulus"]
                .iter()
                .any(|p| c.starts_with(p))
        }),
        "{failing:?}"
    );
}

#[test]
fn custom_chart_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chart.json");
    let u = "0.5*x1 + 0.2*x2*x4";
    std::fs::write(
        &path,
        format!(
            r#"{{"name": "tilted", "dim": 4,
               "g": [["exp(2*({u}))", "0", "0", "0"], ["exp(2*({u}))", "0", "0"],
                     ["-exp(2*({u}))", "0"], ["-exp(2*({u}))"]],
               "J": [0,0,-1,0, 0,0,0,-1, 1,0,0,0, 0,1,0,0],
               "domain": [[-1,1],[-1,1],[-1,1],[-1,1]]}}"#
        ),
    )
    .unwrap();
    let out = norden(&[
        "suite",
        "--only",
        "charts",
        "--chart",
        path.to_str().unwrap(),
        "--dim",
        "4",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let report: VerificationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!report.is_empty());
    assert!(report.checks.iter().all(|c| c.check.ends_with("[tilted]")));
}
