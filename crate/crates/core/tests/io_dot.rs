mod common;

use amalgam::catalog::{cartwheel, cyclic_group, moebius, moebius_incidence};
use amalgam::dot::{atlas_dot, cayley_dot, covering_dot, gaifman_dot};
use amalgam::eppa::{solve, GroupSource};
use amalgam::hypergraph::{exploded_view_hyp, Hypergraph, HypergraphCovering};
use amalgam::io::{detect_kind, load_artifact, parse_artifact, parse_as, save, Artifact, ArtifactKind};
use amalgam::pattern::quotient;
use amalgam::Error;
use common::{budget, edge_instance};

fn samples() -> Vec<Artifact> {
    let inst = edge_instance();
    let sol = solve(&inst, 2, &GroupSource::default(), &mut budget()).unwrap();
    let view = exploded_view_hyp(&cartwheel()).unwrap();
    vec![
        Artifact::Structure(inst.base.clone()),
        Artifact::Incidence(moebius_incidence()),
        Artifact::Pattern(moebius()),
        Artifact::Groupoid(cyclic_group(3)),
        Artifact::Hypergraph(cartwheel()),
        Artifact::Realisation(quotient(&view.pattern).unwrap()),
        Artifact::Covering(HypergraphCovering::identity(&cartwheel())),
        Artifact::EppaInstance(inst),
        Artifact::EppaSolution(sol),
    ]
}

#[test]
fn every_kind_is_detected_and_round_trips() {
    let all = samples();
    assert_eq!(all.len(), 9);
    for a in all {
        let text = a.to_json_string();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(detect_kind(&v), Some(a.kind()), "{}", a.kind());
        let back = parse_artifact(&text).unwrap();
        assert_eq!(back.kind(), a.kind());
        assert_eq!(back.to_json_string(), text, "{}", a.kind());
    }
}

#[test]
fn unknown_objects_are_not_detected() {
    assert_eq!(detect_kind(&serde_json::json!({"foo": 1})), None);
    assert_eq!(detect_kind(&serde_json::json!([1, 2])), None);
    assert!(matches!(parse_artifact("{\"foo\": 1}"), Err(Error::Invalid(_))));
}

#[test]
fn parse_errors_carry_line_and_column() {
    let err = parse_artifact("{\n  \"vertices\": [0,\n  1,, 2]\n}").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("line 3"), "{msg}");
    assert!(msg.contains("column"), "{msg}");
}

#[test]
fn wrong_kind_is_rejected() {
    let text = Artifact::Hypergraph(cartwheel()).to_json_string();
    assert!(parse_as(&text, ArtifactKind::Groupoid).is_err());
    assert!(parse_as(&text, ArtifactKind::Hypergraph).is_ok());
}

#[test]
fn hypergraph_with_stray_vertex_fails_to_parse() {
    assert!(parse_artifact(r#"{"vertices":[0],"hyperedges":[[0,1]]}"#).is_err());
}

#[test]
fn save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    save(&path, &cartwheel()).unwrap();
    match load_artifact(&path).unwrap() {
        Artifact::Hypergraph(h) => assert_eq!(h, cartwheel()),
        other => panic!("loaded a {}", other.kind()),
    }
    assert!(matches!(load_artifact(dir.path().join("missing.json")), Err(Error::Io(_))));
}

#[test]
fn cayley_dot_of_the_two_element_group() {
    assert_eq!(
        cayley_dot(&cyclic_group(2)),
        "digraph cayley {\n  node [style=filled];\n  g0 [label=\"0 : 0→0\", fillcolor=lightblue];\n  g1 [label=\"1 : 0→0\", fillcolor=lightblue];\n  g0 -> g1 [label=\"e\"];\n  g0 -> g1 [label=\"einv\"];\n  g1 -> g0 [label=\"e\"];\n  g1 -> g0 [label=\"einv\"];\n}\n"
    );
}

#[test]
fn gaifman_dot_of_the_cartwheel() {
    let dot = gaifman_dot(&cartwheel());
    assert!(dot.starts_with("graph gaifman {\n"));
    assert_eq!(dot.matches(" -- ").count(), 6);
    assert_eq!(dot.matches("[label=").count(), 4);
    assert!(dot.contains("  v0 -- v3;\n"));
}

#[test]
fn atlas_dot_has_a_node_per_chart() {
    let h = cartwheel();
    let r = quotient(&exploded_view_hyp(&h).unwrap().pattern).unwrap();
    let dot = atlas_dot(&r);
    assert_eq!(dot.matches("[label=\"u").count(), r.charts().len());
    assert_eq!(dot.matches(" -- ").count(), 3);
}

#[test]
fn covering_dot_draws_dashed_fibres() {
    let h = Hypergraph::from_edges([vec![0, 1]]);
    let dot = covering_dot(&HypergraphCovering::identity(&h));
    assert_eq!(dot.matches("style=dashed").count(), 2);
    assert_eq!(dot.matches("subgraph cluster_").count(), 2);
    assert!(dot.contains("  x0 -- x1;\n"));
}
