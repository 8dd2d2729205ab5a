use std::process::{Command, Output};

use serde_json::Value;

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .env("FINSLER_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 4] = ["--samples", "2", "--eta-samples", "2"];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(SMALL).collect()
}

#[test]
fn classify_writes_a_json_report() {
    let o = finsler(&with_small(&["classify", "--zoo", "antonelli_shimada"]));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["metric"], "antonelli_shimada");
    assert_eq!(v["sample_count"], 4);
    assert_eq!(v["lattice"]["generalized_berwald"], "holds");
    assert_eq!(v["lattice"]["kahler"], "fails");
    assert!(v["warnings"][0].as_str().unwrap().starts_with("convention:"));
    assert!(v["evidence"].as_str().unwrap().contains("sample-based"));
}

#[test]
fn classify_is_deterministic_across_thread_counts() {
    let args = with_small(&["classify", "--zoo", "randers", "--seed", "7"]);
    let a = finsler(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(&args)
        .env("FINSLER_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&a), stdout(&b));
    let c = finsler(&with_small(&["classify", "--zoo", "randers", "--seed", "8"]));
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn classify_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = finsler(&with_small(&[
        "classify",
        "--zoo",
        "flat",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("complex_berwald: holds"));
    let csv = std::fs::read_to_string(out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("predicate_id,sample_index,residual"));
    assert!(lines.any(|l| l.starts_with("kahler,3,")));
}

#[test]
fn check_reports_each_identity() {
    let o = finsler(&with_small(&["check", "lemma2.2", "--zoo", "antonelli_shimada"]));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("lemma2.2.iv"));
    assert!(text
        .lines()
        .any(|l| l.starts_with("lemma2.2.v.literal") && l.ends_with("info")));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = finsler(&with_small(&[
        "check",
        "eq1.3",
        "--zoo",
        "kropina",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["suite"], "eq1.3");
    assert!(v["identities"].as_array().unwrap().iter().all(|r| r["passed"] == true));
}

#[test]
fn check_fails_with_code_two_when_an_identity_fails() {
    // a tolerance below round-off makes some identity fail
    let o = finsler(&with_small(&[
        "check",
        "eq1.3",
        "--zoo",
        "antonelli_shimada",
        "--tol",
        "1e-300",
    ]));
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn metric_file_input_and_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let o = finsler(&[
        "export",
        "--zoo",
        "randers",
        "--b",
        "0.2,0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let exported: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(exported["kind"], "randers");
    let o = finsler(&with_small(&["classify", "--metric", path.to_str().unwrap()]));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["lattice"]["generalized_berwald"], "holds");
}

#[test]
fn dump_emits_the_bundle() {
    let o = finsler(&[
        "dump",
        "--zoo",
        "hermitian_nonkahler",
        "--sample",
        "0.1,-0.2,0.3,0,0.7,0.1,-0.4,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.get("g").is_some());
}

#[test]
fn errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"name":"x","dimension":2,"kind":"custom","L":"eta1*conj(eta1)+"}"#,
    )
    .unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["classify", "--metric", bad.to_str().unwrap()], "SyntaxError"),
        (vec!["classify", "--metric", "/nonexistent/m.json"], "IoError"),
        (vec!["classify", "--zoo", "nope"], "UnknownId"),
        (vec!["check", "lemma9", "--zoo", "flat"], "UnknownSuite"),
        (
            vec!["dump", "--zoo", "kropina", "--sample", "0,0,0,0,0,0,1,0"],
            "DomainError",
        ),
        (
            vec!["dump", "--zoo", "flat", "--sample", "0,0,0,0,0,0,0,0"],
            "DomainError",
        ),
        (vec!["dump", "--zoo", "flat", "--sample", "1,2,3"], ""),
        (vec!["classify", "--zoo", "kropina", "--b", "0,0"], "ValidationError"),
        (vec!["classify", "--zoo", "flat", "--tol", "-1"], "SchemaError"),
        (vec!["classify", "--zoo", "flat", "--samples", "0"], ""),
        (vec!["classify", "--zoo", "flat", "--metric", "m.json"], ""),
        (vec!["classify"], ""),
    ];
    for (args, kind) in cases {
        let o = finsler(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stdout(&o));
        assert!(stderr(&o).contains(kind), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_and_version_exit_zero() {
    for args in [["--help"], ["--version"]] {
        assert_eq!(finsler(&args).status.code(), Some(0));
    }
}

#[test]
fn inconsistent_classification_exits_with_code_two() {
    // Kropina over a Fubini-Study alpha: the two Cartan-derivative
    // characterizations disagree because beta = 0 is excluded from the fibre.
    let fs = finsler_core::zoo::file("hermitian_kahler_potential", &Default::default())
        .unwrap()
        .a
        .unwrap();
    let a = fs.iter().map(|r| r.join(",")).collect::<Vec<_>>().join(";");
    let o = finsler(&with_small(&["classify", "--zoo", "kropina", "--a", &a]));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("inconsistent: lemma3.1"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let split = v["crosschecks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["theorem"] == "lemma3.1")
        .unwrap();
    assert_eq!(split["consistent"], false);
}
