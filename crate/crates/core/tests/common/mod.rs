//! Instance pools shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use amalgam::catalog::{
    binary_r, cartwheel, cycle_hypergraph, i_over_i, loop_pair, moebius, moebius_incidence, moebius_straight,
    rotation_pattern,
};
use amalgam::eppa::{instance_to_pattern, EppaInstance};
use amalgam::fuzz::{random_action_pattern, random_pattern, rng, PatternBounds};
use amalgam::groupoid::{groupoid_from_action_capped, search_groupoid, Groupoid};
use amalgam::hypergraph::{exploded_view_hyp, Hypergraph};
use amalgam::incidence::IncidencePattern;
use amalgam::pattern::{exploded_view, is_coherent, AmalgamationPattern};
use amalgam::{Budget, Elem, PartialMap, RelStructure};

pub fn budget() -> Budget {
    Budget::new(50_000_000)
}

pub fn set(xs: &[Elem]) -> BTreeSet<Elem> {
    xs.iter().copied().collect()
}

pub fn pm(pairs: &[(Elem, Elem)]) -> PartialMap {
    PartialMap::from_pairs(pairs.iter().copied()).unwrap()
}

/// A path `0 - 1 - 2` of sites with links in both directions.
pub fn path_incidence() -> IncidencePattern {
    IncidencePattern::from_spec(&[0, 1, 2], &[("a", 0, 1, "ar"), ("ar", 1, 0, "a"), ("b", 1, 2, "br"), ("br", 2, 1, "b")])
        .unwrap()
}

/// A directed `R`-edge `0 → 1` with the partial `0 ↦ 1`.
pub fn edge_instance() -> EppaInstance {
    let mut a = RelStructure::new(binary_r(), [0, 1]);
    a.add_tuple("R", vec![0, 1]).unwrap();
    EppaInstance::from_maps(a, vec![pm(&[(0, 1)])]).unwrap()
}

/// Named small patterns. The rotations and the EPPA pattern are not coherent;
/// everything else is.
pub fn patterns() -> Vec<(String, AmalgamationPattern)> {
    let mut out: Vec<(String, AmalgamationPattern)> = vec![
        ("moebius".into(), moebius()),
        ("moebius-straight".into(), moebius_straight()),
        ("i/i moebius".into(), i_over_i(&moebius_incidence())),
        ("i/i path".into(), i_over_i(&path_incidence())),
        ("i/i loop".into(), i_over_i(&loop_pair())),
        ("rotation 3".into(), rotation_pattern(3)),
        ("rotation 4".into(), rotation_pattern(4)),
        ("edge instance".into(), instance_to_pattern(&edge_instance()).unwrap()),
    ];
    let hyps: Vec<(&str, Hypergraph)> = vec![
        ("cartwheel", cartwheel()),
        ("4-cycle", cycle_hypergraph(4)),
        ("5-cycle", cycle_hypergraph(5)),
        ("two triangles", Hypergraph::from_edges([vec![0, 1, 2], vec![1, 2, 3]])),
    ];
    for (name, h) in hyps {
        out.push((format!("exploded {name}"), exploded_view_hyp(&h).unwrap().pattern));
    }
    let tri = RelStructure::symmetric_graph(0..3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let cover = [BTreeSet::from([0, 1]), BTreeSet::from([1, 2]), BTreeSet::from([0, 2])];
    out.push(("exploded triangle".into(), exploded_view(&tri, &cover).unwrap().pattern));
    let mut r = rng(0xfeed);
    let bounds = PatternBounds {
        max_sites: 2,
        max_elems: 5,
        max_links: 4,
    };
    let mut k = 0;
    while k < 6 {
        let h = random_pattern(&mut r, bounds);
        if h.incidence().link_count() > 0 && is_coherent(&h).unwrap().holds() {
            out.push((format!("fuzzed {k}"), h));
            k += 1;
        }
    }
    out
}

/// A pattern together with a groupoid over its incidence pattern.
pub struct Pair {
    pub name: String,
    pub h: AmalgamationPattern,
    pub g: Groupoid,
    pub coherent: bool,
    /// The acyclicity the search asked for, if the groupoid came from it.
    pub searched: Option<usize>,
}

/// Groupoids from `search_groupoid` at `N = 2, 3` and from random actions,
/// paired with each pattern of [`patterns`].
pub fn pairs() -> Vec<Pair> {
    let mut out = Vec::new();
    let mut r = rng(0xbeef);
    for (name, h) in patterns() {
        let coherent = is_coherent(&h).unwrap().holds();
        for n in [2, 3] {
            let found = search_groupoid(h.incidence(), &h, n, 300, &mut budget()).unwrap();
            if let Some(g) = found.found.into_iter().next() {
                out.push(Pair {
                    name: format!("{name} / search N={n}"),
                    h: h.clone(),
                    g,
                    coherent,
                    searched: Some(n),
                });
            }
        }
        for points in [2, 3] {
            let act = random_action_pattern(&mut r, h.incidence(), points);
            if let Some(g) = groupoid_from_action_capped(&act, 300).unwrap() {
                out.push(Pair {
                    name: format!("{name} / action {points}"),
                    h: h.clone(),
                    g,
                    coherent,
                    searched: None,
                });
            }
        }
    }
    out
}
