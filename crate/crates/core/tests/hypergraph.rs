mod common;

use std::collections::BTreeSet;

use amalgam::catalog::{cartwheel, cycle_hypergraph, subsets};
use amalgam::fuzz::{random_hypergraph, rng};
use amalgam::groupoid::{search_groupoid_with, GroupoidSearch};
use amalgam::hypergraph::*;
use amalgam::pattern::{is_simple, is_strongly_coherent, quotient};
use amalgam::product::{atlas_hypergraph, reduced_product, verify_realisation};
use amalgam::{Elem, Verdict};
use common::{budget, set};
use rand::seq::SliceRandom;
use rand::Rng;

fn shifted(h: &Hypergraph, by: Elem) -> Vec<BTreeSet<Elem>> {
    h.edges().iter().map(|e| e.iter().map(|x| x + by).collect()).collect()
}

/// Every hypergraph whose edges are distinct nonempty subsets of `0..n`,
/// at most `m` of them.
fn all_hypergraphs(n: usize, m: usize) -> Vec<Hypergraph> {
    let subs: Vec<BTreeSet<Elem>> = subsets(n).collect();
    let mut out = Vec::new();
    let mut pick: Vec<usize> = Vec::new();
    fn rec(subs: &[BTreeSet<Elem>], m: usize, from: usize, pick: &mut Vec<usize>, out: &mut Vec<Hypergraph>) {
        if !pick.is_empty() {
            out.push(Hypergraph::from_edges(pick.iter().map(|&i| subs[i].clone())));
        }
        if pick.len() == m {
            return;
        }
        for i in from..subs.len() {
            pick.push(i);
            rec(subs, m, i + 1, pick, out);
            pick.pop();
        }
    }
    rec(&subs, m, 0, &mut pick, &mut out);
    out
}

#[test]
fn gaifman_of_cartwheel_is_k4() {
    let g = gaifman(&cartwheel());
    assert_eq!(g.edges().len(), 6);
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(g.adjacent(a, b), a != b);
        }
    }
}

#[test]
fn gaifman_of_one_edge_is_a_triangle() {
    let g = gaifman(&Hypergraph::from_edges([vec![0, 1, 2]]));
    assert_eq!(g.edges(), BTreeSet::from([(0, 1), (0, 2), (1, 2)]));
}

#[test]
fn gaifman_of_singletons_has_no_edges() {
    let g = gaifman(&Hypergraph::from_edges([vec![0], vec![1], vec![2]]));
    assert!(g.edges().is_empty());
    assert_eq!(g.vertices().count(), 3);
}

#[test]
fn hypergraph_rejects_stray_vertices() {
    assert!(Hypergraph::new(set(&[0, 1]), vec![set(&[0, 2])]).is_err());
    let h = Hypergraph::new(set(&[0, 1, 2]), vec![set(&[0, 1])]).unwrap();
    assert!(!h.validate().is_ok());
}

#[test]
fn duplicate_hyperedges_collapse() {
    let h = Hypergraph::from_edges([vec![1, 0], vec![0, 1]]);
    assert_eq!(h.edges(), &[set(&[0, 1])]);
}

#[test]
fn cartwheel_is_not_three_acyclic() {
    let v = n_acyclicity(&cartwheel(), 3);
    assert_eq!(v.witness(), Some(&AcyclicityWitness::UncoveredClique(vec![0, 1, 2])));
    assert!(is_chordal_up_to(&cartwheel(), 4).holds());
    assert!(is_n_acyclic_hyp(&cartwheel(), 2));
}

#[test]
fn single_hyperedge_is_acyclic_at_every_level() {
    let h = Hypergraph::from_edges([vec![0, 1, 2, 3, 4]]);
    for n in 2..8 {
        assert!(is_n_acyclic_hyp(&h, n));
    }
    assert!(is_acyclic(&h));
}

#[test]
fn four_cycle_has_a_chordless_witness() {
    let h = cycle_hypergraph(4);
    assert!(is_n_acyclic_hyp(&h, 3));
    let w = is_chordal_up_to(&h, 4);
    let c = w.witness().expect("4-cycle is not chordal");
    assert_eq!(c.iter().copied().collect::<BTreeSet<_>>(), set(&[0, 1, 2, 3]));
    let g = gaifman(&h);
    for i in 0..4 {
        assert!(g.adjacent(c[i], c[(i + 1) % 4]));
        assert!(!g.adjacent(c[i], c[(i + 2) % 4]));
    }
    assert!(matches!(n_acyclicity(&h, 4), Verdict::Fails(AcyclicityWitness::ChordlessCycle(_))));
}

#[test]
fn five_cycle_needs_n_five_to_fail() {
    let h = cycle_hypergraph(5);
    assert!(is_n_acyclic_hyp(&h, 4));
    assert!(!is_n_acyclic_hyp(&h, 5));
}

#[test]
fn graham_on_one_edge_removes_vertices_then_the_edge() {
    let r = graham(&Hypergraph::from_edges([vec![0, 1, 2]]));
    assert!(r.acyclic);
    assert!(r.residue.is_empty());
    let (vs, es) = r.trace.split_at(3);
    assert!(vs.iter().all(|s| matches!(s, GrahamStep::Vertex { edge: 0, .. })));
    assert_eq!(es, &[GrahamStep::Edge { edge: 0, into: None }]);
}

#[test]
fn graham_fails_on_the_cartwheel() {
    let r = graham(&cartwheel());
    assert!(!r.acyclic);
    assert_eq!(r.residue.len(), 3);
    assert!(r.trace.is_empty());
}

#[test]
fn graham_retracts_a_path() {
    let r = graham(&Hypergraph::from_edges([vec![0, 1], vec![1, 2]]));
    assert!(r.acyclic);
}

#[test]
fn tree_decomposition_of_two_overlapping_edges() {
    let h = Hypergraph::from_edges([vec![0, 1], vec![1, 2]]);
    let t = tree_decomposition(&h).unwrap();
    assert_eq!(t.nodes.len(), 2);
    assert_eq!(t.edges.len(), 1);
    assert!(tree_decomposition(&cartwheel()).is_none());
}

#[test]
fn tree_decomposition_validator_catches_broken_trees() {
    let h = Hypergraph::from_edges([vec![0, 1], vec![1, 2], vec![1, 3]]);
    let bad = TreeDecomposition {
        nodes: h.edges().to_vec(),
        edges: vec![(0, 1)],
    };
    assert!(!validate_tree_decomposition(&h, &bad).is_ok());
    let h = Hypergraph::from_edges([vec![0, 1], vec![1, 2], vec![2, 3]]);
    let disconnected = TreeDecomposition {
        nodes: h.edges().to_vec(),
        edges: vec![(0, 2), (2, 1)],
    };
    assert!(!validate_tree_decomposition(&h, &disconnected).is_ok());
}

#[test]
fn random_acyclic_hypergraphs_decompose() {
    let mut r = rng(11);
    let mut seen = 0;
    for _ in 0..400 {
        let h = random_hypergraph(&mut r, 7, 5);
        if let Some(t) = tree_decomposition(&h) {
            seen += 1;
            assert!(validate_tree_decomposition(&h, &t).is_ok());
        }
    }
    assert!(seen > 50);
}

#[test]
fn acyclicity_notions_agree_on_small_hypergraphs() {
    for h in all_hypergraphs(4, 4) {
        let g = graham(&h).acyclic;
        assert_eq!(g, tree_decomposition(&h).is_some(), "{h:?}");
        assert_eq!(g, is_acyclic(&h), "{h:?}");
    }
}

#[test]
fn n_acyclicity_matches_induced_subhypergraphs() {
    let mut r = rng(7);
    for _ in 0..150 {
        let h = random_hypergraph(&mut r, 7, 5);
        let verts: Vec<Elem> = h.vertices().iter().copied().collect();
        for n in 3..=verts.len().max(3) {
            let oracle = subsets(verts.len())
                .filter(|s| s.len() <= n)
                .all(|s| graham(&h.induced(&s.iter().map(|&i| verts[i as usize]).collect())).acyclic);
            assert_eq!(is_n_acyclic_hyp(&h, n), oracle, "{h:?} at {n}");
        }
    }
}

#[test]
fn graham_outcome_ignores_the_order() {
    let mut r = rng(3);
    for _ in 0..200 {
        let h = random_hypergraph(&mut r, 6, 5);
        let fixed = graham(&h).acyclic;
        for _ in 0..4 {
            let mut pick = rng(r.gen());
            let shuffled = graham_with_order(&h, |c| *c.choose(&mut pick).unwrap());
            assert_eq!(shuffled.acyclic, fixed, "{h:?}");
        }
    }
}

#[test]
fn exploded_view_of_disjoint_edges_has_no_links() {
    let v = exploded_view_hyp(&Hypergraph::from_edges([vec![0, 1], vec![2]])).unwrap();
    assert_eq!(v.pattern.incidence().link_count(), 0);
    assert_eq!(v.pattern.incidence().site_count(), 2);
}

#[test]
fn exploded_cartwheel_has_six_links() {
    let v = exploded_view_hyp(&cartwheel()).unwrap();
    assert_eq!(v.pattern.incidence().link_count(), 6);
}

#[test]
fn exploded_views_are_strongly_coherent_and_simple() {
    let mut r = rng(5);
    let mut hs = vec![cartwheel(), cycle_hypergraph(4), cycle_hypergraph(5)];
    hs.extend((0..40).map(|_| random_hypergraph(&mut r, 6, 4)));
    for h in hs {
        let v = exploded_view_hyp(&h).unwrap();
        assert!(is_strongly_coherent(&v.pattern).unwrap().holds(), "{h:?}");
        assert!(is_simple(&v.pattern).unwrap().holds(), "{h:?}");
    }
}

#[test]
fn quotient_of_exploded_view_is_the_identity_covering() {
    let mut r = rng(9);
    let mut hs = vec![cartwheel(), cycle_hypergraph(4)];
    hs.extend((0..30).map(|_| random_hypergraph(&mut r, 6, 4)));
    for h in hs {
        let v = exploded_view_hyp(&h).unwrap();
        let q = quotient(&v.pattern).unwrap();
        let c = covering_from_realisation(&q, &h).unwrap();
        assert!(verify_hyp_covering(&c).is_ok());
        let image: BTreeSet<Elem> = c.projection.values().copied().collect();
        assert_eq!(image.len(), c.projection.len(), "projection is injective");
        let pushed: BTreeSet<BTreeSet<Elem>> = c.upstairs.edges().iter().map(|u| c.image(u)).collect();
        assert_eq!(pushed, h.edges().iter().cloned().collect());
    }
}

#[test]
fn cartwheel_three_acyclic_covering_splits_the_centre() {
    let h = cartwheel();
    let v = exploded_view_hyp(&h).unwrap();
    let mut opts = GroupoidSearch::new(3, 2000);
    opts.realising_product = true;
    opts.acyclic_atlas = true;
    let g = search_groupoid_with(&v.pattern, &opts, &mut budget()).unwrap().found.remove(0);
    let rp = reduced_product(&v.pattern, &g).unwrap();
    assert!(verify_realisation(&rp.realisation, &v.pattern).unwrap().is_ok());
    let c = covering_from_realisation(&rp.realisation, &h).unwrap();
    assert!(verify_hyp_covering(&c).is_ok());
    assert!(is_n_acyclic_hyp(&c.upstairs, 3));
    assert_eq!(c.upstairs, atlas_hypergraph(&rp.realisation));
    assert!(c.fibre(3).len() >= 2);
}

#[test]
fn identity_covering_verifies() {
    assert!(verify_hyp_covering(&HypergraphCovering::identity(&cartwheel())).is_ok());
}

#[test]
fn two_disjoint_copies_cover() {
    let h = cartwheel();
    let mut edges = h.edges().to_vec();
    edges.extend(shifted(&h, 100));
    let up = Hypergraph::from_edges(edges);
    let projection = up.vertices().iter().map(|&x| (x, x % 100)).collect();
    let c = HypergraphCovering {
        upstairs: up,
        downstairs: h,
        projection,
    };
    assert!(verify_hyp_covering(&c).is_ok());
    assert_eq!(c.fibre(3), vec![3, 103]);
}

#[test]
fn missing_lift_is_named() {
    let down = Hypergraph::from_edges([vec![0, 1], vec![1, 2]]);
    let up = Hypergraph::from_edges([vec![0, 1], vec![10, 11], vec![11, 12]]);
    let projection = [(0, 0), (1, 1), (10, 0), (11, 1), (12, 2)].into_iter().collect();
    let c = HypergraphCovering {
        upstairs: up,
        downstairs: down,
        projection,
    };
    let r = verify_hyp_covering(&c);
    assert!(!r.is_ok());
    assert!(format!("{r:?}").contains("does not lift"));
}

#[test]
fn non_injective_projection_is_rejected() {
    let down = Hypergraph::from_edges([vec![0, 1]]);
    let up = Hypergraph::from_edges([vec![0, 1, 2]]);
    let projection = [(0, 0), (1, 1), (2, 1)].into_iter().collect();
    let c = HypergraphCovering {
        upstairs: up,
        downstairs: down,
        projection,
    };
    assert!(!verify_hyp_covering(&c).is_ok());
}

#[test]
fn hypergraph_json_round_trip() {
    let h = cartwheel();
    let s = serde_json::to_string(&h).unwrap();
    assert!(s.contains("\"hyperedges\""));
    let back: Hypergraph = serde_json::from_str(&s).unwrap();
    assert_eq!(back, h);
}
