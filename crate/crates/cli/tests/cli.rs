use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use amalgam::catalog::{cartwheel, cyclic_group, moebius};
use amalgam::dot::cayley_dot;
use amalgam::io::Artifact;
use amalgam::{RelStructure, Signature};
use serde_json::Value;
use tempfile::TempDir;

fn amalgam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amalgam")).args(args).output().unwrap()
}

fn amalgam_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amalgam")).args(args).env(key, val).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn outcome<'a>(v: &'a Value, name: &str) -> &'a str {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name} in {v}"))["outcome"]
        .as_str()
        .unwrap()
}

fn write(dir: &TempDir, name: &str, art: Artifact) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, art.to_json_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn edge_instance(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("inst.json");
    std::fs::write(
        &p,
        r#"{"structure":{"signature":[{"name":"R","arity":2}],"universe":[0,1],"relations":{"R":[[0,1]]}},
            "partials":[{"id":"p","pairs":[[0,1]],"inv":"pinv"},{"id":"pinv","pairs":[[1,0]],"inv":"p"}]}"#,
    )
    .unwrap();
    p
}

#[test]
fn moebius_is_coherent_but_not_strongly() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "m.json", Artifact::Pattern(moebius()));
    let o = amalgam(&["--json", "check", s(&p), "--coherent", "--strong"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(outcome(&v, "coherent"), "holds");
    assert_eq!(outcome(&v, "strong"), "fails");
    assert_eq!(v["inputs"][0]["kind"], "pattern");
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn cartwheel_fails_three_acyclicity_with_a_clique() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "w.json", Artifact::Hypergraph(cartwheel()));
    let o = amalgam(&["--json", "check", s(&p), "--hyp", "2,3"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(outcome(&v, "hyp:2"), "holds");
    assert_eq!(outcome(&v, "hyp:3"), "fails");
    assert_eq!(v["checks"][1]["witness"]["UncoveredClique"], serde_json::json!([0, 1, 2]));
}

#[test]
fn malformed_json_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"vertices\": [0,\n 1,, 2]}").unwrap();
    let o = amalgam(&["check", s(&p)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");

    let o = amalgam(&["--json", "check", s(&p)]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["exit_code"], 2);
}

#[test]
fn missing_file_and_wrong_flag_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = amalgam(&["check", s(&dir.path().join("nope.json"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));
    let p = write(&dir, "w.json", Artifact::Hypergraph(cartwheel()));
    assert_eq!(code(&amalgam(&["check", s(&p), "--coherent"])), 2);
    assert_eq!(code(&amalgam(&["check"])), 2);
}

#[test]
fn groupoid_reduce_then_check_realises() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(&dir, "w.json", Artifact::Hypergraph(cartwheel()));
    let view = dir.path().join("view.json");
    let g = dir.path().join("g.json");
    let r = dir.path().join("r.json");
    let c = dir.path().join("c.json");
    assert_eq!(code(&amalgam(&["build", "explode", s(&w), "-o", s(&view)])), 0);
    let o = amalgam(&["--json", "build", "groupoid", s(&view), "-n", "2", "--realising", "-o", s(&g)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(outcome(&json(&o), "round-trip"), "holds");
    assert_eq!(code(&amalgam(&["build", "reduce", s(&view), s(&g), "-o", s(&r)])), 0);

    let o = amalgam(&["--json", "check", s(&r), "--realises", s(&view), "--hyp", "2", "--fully-symmetric"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(outcome(&json(&o), "realises"), "holds");

    assert_eq!(code(&amalgam(&["build", "cover", s(&r), s(&w), "-o", s(&c)])), 0);
    let o = amalgam(&["--json", "check", s(&c)]);
    assert_eq!(outcome(&json(&o), "covering"), "holds");
}

#[test]
fn explode_then_quotient_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(&dir, "w.json", Artifact::Hypergraph(cartwheel()));
    let view = dir.path().join("view.json");
    let q = dir.path().join("q.json");
    assert_eq!(code(&amalgam(&["build", "explode", s(&w), "-o", s(&view)])), 0);
    let o = amalgam(&["--json", "build", "quotient", s(&view), "-o", s(&q)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(outcome(&v, "realises"), "holds");
    assert_eq!(v["outputs"][0], s(&q));
    let o = amalgam(&["check", s(&q), "--realises", s(&view)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn truncate_and_product_verify() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(&dir, "m.json", Artifact::Pattern(moebius()));
    let t = dir.path().join("t.json");
    let o = amalgam(&["--json", "build", "truncate", s(&m), "--k", "3", "-o", s(&t)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(outcome(&json(&o), "realises-interior"), "holds");
    assert_eq!(code(&amalgam(&["build", "product", s(&m), "-o", s(&t)])), 2);
}

#[test]
fn eppa_solve_then_check_solves() {
    let dir = tempfile::tempdir().unwrap();
    let inst = edge_instance(&dir);
    let sol = dir.path().join("sol.json");
    let o = amalgam(&["build", "eppa-solve", s(&inst), "-n", "2", "-o", s(&sol)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = amalgam(&["--json", "check", s(&sol), "--solves", s(&inst), "--fully-symmetric"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(outcome(&v, "solves"), "holds");
    assert_eq!(outcome(&v, "fully-symmetric"), "holds");
}

#[test]
fn eppa_solve_rejects_a_non_isomorphism() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("inst.json");
    std::fs::write(
        &p,
        r#"{"structure":{"signature":[{"name":"R","arity":2}],"universe":[0,1,2],"relations":{"R":[[0,1]]}},
            "partials":[{"id":"p","pairs":[[0,1],[1,2]],"inv":"pinv"},{"id":"pinv","pairs":[[1,0],[2,1]],"inv":"p"}]}"#,
    )
    .unwrap();
    let o = amalgam(&["build", "eppa-solve", s(&p), "-o", s(&dir.path().join("x.json"))]);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn cayley_export_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(&dir, "g.json", Artifact::Groupoid(cyclic_group(2)));
    let o = amalgam(&["export-dot", s(&g), "--view", "cayley"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), cayley_dot(&cyclic_group(2)));
    assert!(stdout(&o).contains("g0 -> g1 [label=\"e\"];"));

    let out = dir.path().join("g.dot");
    let o = amalgam(&["--json", "export-dot", s(&g), "--view", "cayley", "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), cayley_dot(&cyclic_group(2)));
    assert!(json(&o).get("document").is_none());

    let o = amalgam(&["--json", "export-dot", s(&g), "--view", "cayley"]);
    assert_eq!(json(&o)["document"], cayley_dot(&cyclic_group(2)));
    assert_eq!(code(&amalgam(&["export-dot", s(&g), "--view", "gaifman"])), 2);
}

#[test]
fn tiny_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(&dir, "w.json", Artifact::Hypergraph(cartwheel()));
    let view = dir.path().join("view.json");
    assert_eq!(code(&amalgam(&["build", "explode", s(&w), "-o", s(&view)])), 0);
    let g = dir.path().join("g.json");
    let o = amalgam_env(&["--json", "build", "groupoid", s(&view), "-n", "3", "-o", s(&g)], "AMALGAM_BUDGET", "3");
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(outcome(&v, "found"), "unknown");
    assert_eq!(v["budget"]["exhausted"], true);
    assert!(!g.exists());
}

#[test]
fn several_paths_report_in_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = (0..6)
        .map(|i| {
            if i % 2 == 0 {
                write(&dir, &format!("{i}.json"), Artifact::Pattern(moebius()))
            } else {
                write(&dir, &format!("{i}.json"), Artifact::Structure(RelStructure::new(Signature::empty(), [0, 1])))
            }
        })
        .collect();
    let mut args = vec!["--json", "check"];
    args.extend(paths.iter().map(|p| s(p)));
    let o = amalgam(&args);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&o);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    let want: Vec<String> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| format!("{}: {}", s(p), if i % 2 == 0 { "pattern" } else { "structure" }))
        .collect();
    assert_eq!(names, want);
    let inputs: Vec<&str> = v["inputs"].as_array().unwrap().iter().map(|i| i["path"].as_str().unwrap()).collect();
    assert_eq!(inputs, paths.iter().map(|p| s(p)).collect::<Vec<_>>());
}

#[test]
fn text_and_json_reports_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "m.json", Artifact::Pattern(moebius()));
    let args = ["check", s(&p), "--coherent", "--simple", "--strong", "--consistent"];
    let text = stdout(&amalgam(&args));
    let mut jargs = vec!["--json"];
    jargs.extend(args);
    let v = json(&amalgam(&jargs));
    for c in v["checks"].as_array().unwrap() {
        let want = [c["name"].as_str().unwrap(), c["outcome"].as_str().unwrap()];
        assert!(text.lines().any(|l| l.split_whitespace().take(2).eq(want)), "{text}");
    }
}

#[test]
fn fuzz_suites_hold_at_a_fixed_seed() {
    let o = amalgam(&["--json", "fuzz", "--count", "40"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&o);
    for name in ["hierarchy", "quotient", "acyclicity", "products"] {
        assert_eq!(outcome(&v, name), "holds");
    }
    let again = json(&amalgam(&["--json", "fuzz", "--count", "40"]));
    let notes = |v: &Value| v["checks"].as_array().unwrap().iter().map(|c| c["note"].clone()).collect::<Vec<_>>();
    assert_eq!(notes(&v), notes(&again));
}

#[test]
fn bench_times_every_operation() {
    let o = amalgam(&["--json", "bench", "--repeat", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["checks"].as_array().unwrap().len(), 8);
}
