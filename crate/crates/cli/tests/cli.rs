use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_str().unwrap().to_string()
}

fn rls(args: &[&str]) -> Output {
    rls_stdin(args, "")
}

fn rls_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rls"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const RANK_ONE: &str = r#"{"rank":1,"punctures":["0","1"],"matrices":[[["-1"]],[["-1"]]]}"#;

#[test]
fn verify_examples_so7bis_matches() {
    let out = rls(&["verify-paper", "--case", "so7bis"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("so7bis_construction : PASS"));
    assert!(text.contains("inf: U(7) | 0: U(3),U(2),U(2) | 1: 1,-U(2),-U(2),-1,-1"));
}

#[test]
fn verify_examples_all_in_fixed_order() {
    let out = rls(&["verify-examples", "--json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cases: Vec<String> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["case"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        cases,
        ["dwork_sextic", "so7_obstruction", "so7bis_construction"]
    );
    assert_eq!(stdout(&out), stdout(&rls(&["verify-paper", "--json"])));
}

#[test]
fn verify_examples_reports_mismatch_and_bad_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    let expected = dir.path().join("so7bis_expected.json");
    let text = std::fs::read_to_string(&expected).unwrap();
    let changed = text.replacen(r#""size":3"#, r#""size":1},{"eigenvalue":"1","size":2"#, 1);
    assert_ne!(text, changed);
    std::fs::write(&expected, changed).unwrap();
    let dir_arg = dir.path().to_str().unwrap();
    assert_eq!(
        code(&rls(&[
            "verify-examples",
            "--case",
            "so7bis",
            "--fixtures-dir",
            dir_arg
        ])),
        1
    );

    std::fs::write(&expected, "{").unwrap();
    assert_eq!(
        code(&rls(&[
            "verify-examples",
            "--case",
            "so7bis",
            "--fixtures-dir",
            dir_arg
        ])),
        2
    );
    assert_eq!(
        code(&rls(&[
            "verify-examples",
            "--fixtures-dir",
            "/nonexistent/dir"
        ])),
        2
    );
}

#[test]
fn trivial_character_is_a_precondition_failure() {
    let out = rls_stdin(&["mc", "--lambda", "1"], RANK_ONE);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("TRIVIAL_CHARACTER"));
}

#[test]
fn malformed_input_exits_with_two() {
    assert_eq!(code(&rls_stdin(&["mc", "--lambda", "-1"], "{not json")), 2);
    assert_eq!(code(&rls_stdin(&["mc", "--lambda", "2"], RANK_ONE)), 2);
    assert_eq!(
        code(&rls(&[
            "rigidity",
            "--in",
            &fixture("dwork_sl4.json"),
            "--group",
            "XY4"
        ])),
        2
    );
    assert_eq!(code(&rls(&["jordan", "--in", "/nonexistent.json"])), 2);
    assert_eq!(
        code(&rls_stdin(&["twist", "--scalars", "[1]"], RANK_ONE)),
        2
    );
    let bad_convention = RANK_ONE.replace('}', r#","convention":"A1*A2*Ainf=I"}"#);
    assert_eq!(code(&rls_stdin(&["jordan"], &bad_convention)), 2);
}

#[test]
fn rigidity_of_the_sl4_profile() {
    let out = rls(&[
        "rigidity",
        "--in",
        &fixture("dwork_sl4.json"),
        "--group",
        "GL4",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["chi"], 2);
    assert_eq!(v["rigid"], true);
    let out = rls(&[
        "rigidity",
        "--in",
        &fixture("dwork_sp4.json"),
        "--group",
        "GL4",
    ]);
    assert_eq!(json(&out)["rigid"], false);
}

#[test]
fn producing_commands_compose() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    assert_eq!(
        code(&rls(&[
            "realize",
            "--in",
            &fixture("hypergeometric_g.json"),
            "--out",
            &p("g.json")
        ])),
        0
    );
    let out = rls(&["jordan", "--in", &p("g.json")]);
    assert_eq!(
        json(&out)["classes"][1],
        serde_json::json!([{"eigenvalue": "-1", "size": 2}])
    );

    assert_eq!(
        code(&rls(&["sym2", "--in", &p("g.json"), "--out", &p("s.json")])),
        0
    );
    assert_eq!(
        code(&rls(&[
            "mc",
            "--lambda",
            "-1",
            "--in",
            &p("s.json"),
            "--out",
            &p("m.json")
        ])),
        0
    );
    assert_eq!(
        code(&rls(&[
            "twist",
            "--scalars",
            r#"{"0":"-1"}"#,
            "--in",
            &p("m.json"),
            "--out",
            &p("t.json")
        ])),
        0
    );
    assert_eq!(
        code(&rls(&[
            "project",
            "--map",
            "sp4_so5",
            "--in",
            &p("t.json"),
            "--out",
            &p("so5.json")
        ])),
        0
    );
    let so5: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("so5.json")).unwrap()).unwrap();
    assert_eq!(so5["rank"], 5);

    assert_eq!(
        code(&rls(&[
            "tensor",
            "--in",
            &p("g.json"),
            "--with",
            &p("g.json"),
            "--out",
            &p("gg.json")
        ])),
        0
    );
    let lam = rls(&["lambda2", "--in", &p("g.json")]);
    assert_eq!(json(&lam)["rank"], 1);
    let out = rls(&["project", "--map", "sl4_so6", "--in", &p("g.json")]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("RANK_NOT_4"));
}

#[test]
fn reduce_replay_and_conjugate() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let out = rls(&[
        "reduce",
        "--in",
        &fixture("dwork_sl4.json"),
        "--plan",
        &p("plan.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(!json(&out)["steps"].as_array().unwrap().is_empty());
    assert_eq!(
        code(&rls(&[
            "replay",
            "--plan",
            &p("plan.json"),
            "--out",
            &p("a.json")
        ])),
        0
    );
    assert_eq!(
        code(&rls(&[
            "realize",
            "--in",
            &fixture("dwork_sl4.json"),
            "--out",
            &p("b.json")
        ])),
        0
    );
    let out = rls(&["conjugate", "--a", &p("a.json"), "--b", &p("b.json")]);
    assert_eq!(code(&out), 0);
    assert!(json(&out).is_array());

    assert_eq!(
        code(&rls(&[
            "realize",
            "--in",
            &fixture("hypergeometric_g.json"),
            "--out",
            &p("g.json")
        ])),
        0
    );
    let out = rls(&["conjugate", "--a", &p("a.json"), "--b", &p("g.json")]);
    assert_eq!(code(&out), 3);

    let out = rls(&["reduce", "--in", &fixture("dwork_sp4.json")]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("NOT_RIGID"));
}

#[test]
fn spin_lifts_both_signs() {
    let out = rls_stdin(
        &["spin", "--group", "SO5"],
        r#"[{"eigenvalue":"1","size":5}]"#,
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(
        v["candidates"][0],
        serde_json::json!([{"eigenvalue": "1", "size": 4}])
    );
    assert_eq!(
        v["candidates"][1],
        serde_json::json!([{"eigenvalue": "-1", "size": 4}])
    );
    let out = rls_stdin(
        &["spin", "--group", "SO6"],
        r#"[{"eigenvalue":"1","size":5},{"eigenvalue":"1","size":1}]"#,
    );
    assert_eq!(
        json(&out)["candidates"][0],
        serde_json::json!([{"eigenvalue": "1", "size": 4}])
    );
    assert_eq!(code(&rls_stdin(&["spin", "--group", "GL4"], "[]")), 2);
}
