//! Small named instances used in tests, benchmarks and the command line.

use std::collections::BTreeSet;

use crate::groupoid::{groupoid_from_action, Groupoid};
use crate::hypergraph::Hypergraph;
use crate::incidence::IncidencePattern;
use crate::pattern::AmalgamationPattern;
use crate::structure::{Elem, PartialMap, RelStructure, RelationSymbol, Signature};

/// Signature with a single binary relation `R`.
pub fn binary_r() -> Signature {
    Signature::new(vec![RelationSymbol {
        name: "R".into(),
        arity: 2,
    }])
    .unwrap()
}

/// Sites labelled 1 and 2, with links `e1: 1 → 2` and `e2: 2 → 1` and their
/// reversals.
pub fn moebius_incidence() -> IncidencePattern {
    IncidencePattern::from_spec(
        &[1, 2],
        &[
            ("e1", 1, 2, "e1inv"),
            ("e1inv", 2, 1, "e1"),
            ("e2", 2, 1, "e2inv"),
            ("e2inv", 1, 2, "e2"),
        ],
    )
    .unwrap()
}

fn edge_site(a: Elem, b: Elem) -> RelStructure {
    let mut s = RelStructure::new(binary_r(), [a, b]);
    s.add_tuple("R", vec![a, b]).unwrap();
    s
}

fn two_edges(rho1: (Elem, Elem), rho2: (Elem, Elem)) -> AmalgamationPattern {
    let r1 = PartialMap::from_pairs([rho1]).unwrap();
    let r2 = PartialMap::from_pairs([rho2]).unwrap();
    AmalgamationPattern::from_sites(
        moebius_incidence(),
        vec![edge_site(0, 1), edge_site(2, 3)],
        vec![r1.clone(), r1.inverse(), r2.clone(), r2.inverse()],
    )
    .unwrap()
}

/// Two single `R`-edges `0 → 1` (site 1) and `2 → 3` (site 2) glued
/// cross-wise: `e1: 0 ↦ 3` and `e2: 2 ↦ 1`.
pub fn moebius() -> AmalgamationPattern {
    two_edges((0, 3), (2, 1))
}

/// The same edges glued straight: `e1: 0 ↦ 2` and `e2: 3 ↦ 1`.
pub fn moebius_straight() -> AmalgamationPattern {
    two_edges((0, 2), (3, 1))
}

/// The incidence pattern read as a pattern: site `s` holds the single
/// element `s`, and each link maps its source to its target.
pub fn i_over_i(inc: &IncidencePattern) -> AmalgamationPattern {
    let sites = inc.sites().map(|s| RelStructure::new(Signature::empty(), [s as Elem])).collect();
    let rho = inc
        .links()
        .iter()
        .map(|l| PartialMap::from_pairs([(l.src as Elem, l.tgt as Elem)]).unwrap())
        .collect();
    AmalgamationPattern::from_sites(inc.clone(), sites, rho).unwrap()
}

/// One site, link `e` and its reversal `einv`.
pub fn loop_pair() -> IncidencePattern {
    IncidencePattern::from_spec(&[0], &[("e", 0, 0, "einv"), ("einv", 0, 0, "e")]).unwrap()
}

/// One site and a single self-inverse link `t`.
pub fn self_inverse_loop() -> IncidencePattern {
    IncidencePattern::from_spec(&[0], &[("t", 0, 0, "t")]).unwrap()
}

/// The one-site pattern on `0..k` without relations, `e` acting as the
/// rotation `i ↦ i + 1 mod k`.
pub fn rotation_pattern(k: usize) -> AmalgamationPattern {
    let k = k.max(1) as Elem;
    let rot = PartialMap::from_pairs((0..k).map(|i| (i, (i + 1) % k))).unwrap();
    AmalgamationPattern::from_sites(
        loop_pair(),
        vec![RelStructure::new(Signature::empty(), 0..k)],
        vec![rot.clone(), rot.inverse()],
    )
    .unwrap()
}

/// The cyclic group of order `k` over [`loop_pair`], generated by `e`.
pub fn cyclic_group(k: usize) -> Groupoid {
    groupoid_from_action(&rotation_pattern(k)).expect("rotation pattern is complete")
}

/// Four vertices, the central one `3`, and three triangles around it.
pub fn cartwheel() -> Hypergraph {
    Hypergraph::from_edges([vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]])
}

/// The `n`-cycle as a hypergraph of its edges.
pub fn cycle_hypergraph(n: usize) -> Hypergraph {
    let n = n as Elem;
    Hypergraph::from_edges((0..n).map(|i| vec![i, (i + 1) % n]))
}

/// The complete symmetric graph on `0..k` without loops.
pub fn complete_graph(k: usize) -> RelStructure {
    let k = k as Elem;
    let edges: Vec<(Elem, Elem)> = (0..k).flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    RelStructure::graph(0..k, &edges).unwrap()
}

/// All nonempty subsets of `0..n`, ordered by their bitmask.
pub fn subsets(n: usize) -> impl Iterator<Item = BTreeSet<Elem>> {
    (1u32..(1 << n)).map(move |m| (0..n as Elem).filter(|&i| m & (1 << i) != 0).collect())
}
