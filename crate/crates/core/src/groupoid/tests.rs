use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::catalog::{cyclic_group, i_over_i, loop_pair, moebius, moebius_incidence, rotation_pattern, self_inverse_loop};
use crate::fuzz::{random_action_pattern, random_pattern, rng, PatternBounds};
use crate::incidence::{concat_walks, walks_up_to};
use crate::pattern::{is_coherent, pattern_symmetries, PatternSymmetry};
use crate::report::Verdict;
use crate::search::Budget;

fn budget() -> Budget {
    Budget::new(10_000_000)
}

/// A simple graph: a path `0 - 1 - 2` with both directions.
fn path_incidence() -> IncidencePattern {
    IncidencePattern::from_spec(&[0, 1, 2], &[("a", 0, 1, "ar"), ("ar", 1, 0, "a"), ("b", 1, 2, "br"), ("br", 2, 1, "b")])
        .unwrap()
}

/// One site with two loop pairs `a` and `b`.
fn two_loops() -> IncidencePattern {
    IncidencePattern::from_spec(&[0], &[("a", 0, 0, "ainv"), ("ainv", 0, 0, "a"), ("b", 0, 0, "binv"), ("binv", 0, 0, "b")])
        .unwrap()
}

/// `Z6` over [`two_loops`] with `a = +1` and `b = +2`.
fn z6_one_two() -> Groupoid {
    let rot = |k: Elem| PartialMap::from_pairs((0..6).map(|i| (i, (i + k) % 6))).unwrap();
    let h = AmalgamationPattern::from_sites(
        two_loops(),
        vec![RelStructure::new(Signature::empty(), 0..6)],
        vec![rot(1), rot(5), rot(2), rot(4)],
    )
    .unwrap();
    groupoid_from_action(&h).unwrap()
}

/// Groupoids from random permutation actions over a few incidence patterns.
pub(crate) fn pool() -> Vec<Groupoid> {
    let mut r = rng(7);
    let incs = [loop_pair(), self_inverse_loop(), moebius_incidence(), path_incidence(), two_loops()];
    let mut out: Vec<Groupoid> = incs.iter().map(site_pair_groupoid).collect();
    out.extend((1..=5).map(cyclic_group));
    for inc in &incs {
        for _ in 0..6 {
            let points = r.gen_range(1..=4);
            let h = random_action_pattern(&mut r, inc, points);
            if let Some(g) = groupoid_from_action_capped(&h, 60).unwrap() {
                out.push(g);
            }
        }
    }
    out
}

/// Checks conditions (i) and (ii) of a coset cycle using [`coset`] only.
fn is_coset_cycle(g: &Groupoid, c: &CosetCycle) -> bool {
    let n = c.len();
    let inter = |a: &[LinkId], b: &[LinkId]| -> Vec<LinkId> { a.iter().copied().filter(|e| b.contains(e)).collect() };
    (0..n).all(|i| {
        let (gi, ai) = (&c.steps[i].0, &c.steps[i].1);
        let (gn, an) = (&c.steps[(i + 1) % n].0, &c.steps[(i + 1) % n].1);
        let ap = &c.steps[(i + n - 1) % n].1;
        let step = coset(g, *gi, ai).unwrap().contains(gn);
        let left = coset(g, *gi, &inter(ai, ap)).unwrap();
        let right = coset(g, *gn, &inter(ai, an)).unwrap();
        step && left.is_disjoint(&right)
    })
}

/// Inverse-closed nonempty link sets, as unions of atoms.
fn alphas(inc: &IncidencePattern) -> Vec<Vec<LinkId>> {
    let atoms = inc.link_atoms();
    (1u32..1 << atoms.len())
        .map(|m| {
            let mut v: Vec<LinkId> = (0..atoms.len()).filter(|i| m & (1 << i) != 0).flat_map(|i| atoms[i].clone()).collect();
            v.sort();
            v
        })
        .collect()
}

/// `G[α] ∩ G[β] = G[α ∩ β]` for all pairs, by direct computation.
fn two_acyclic_by_intersections(g: &Groupoid) -> bool {
    let all = alphas(g.incidence());
    all.iter().all(|a| {
        all.iter().all(|b| {
            let ab: Vec<LinkId> = a.iter().copied().filter(|e| b.contains(e)).collect();
            let lhs: BTreeSet<GElem> = subgroupoid(g, a).unwrap().intersection(&subgroupoid(g, b).unwrap()).copied().collect();
            lhs == subgroupoid(g, &ab).unwrap()
        })
    })
}

#[test]
fn site_pair_groupoid_of_simple_graph_is_valid_and_simple() {
    let g = site_pair_groupoid(&path_incidence());
    assert!(validate_groupoid(&g.to_table()).is_ok());
    assert_eq!(g.len(), 9);
    assert!(is_simple_groupoid(&g));
}

#[test]
fn site_pair_groupoid_of_multigraph_is_not_simple() {
    let g = site_pair_groupoid(&moebius_incidence());
    assert!(validate_groupoid(&g.to_table()).is_ok());
    assert!(!is_simple_groupoid(&g));
}

#[test]
fn unit_valued_loop_generator_is_not_simple() {
    let g = site_pair_groupoid(&loop_pair());
    assert_eq!(g.len(), 1);
    assert!(g.is_unit(g.generator(0)));
    assert!(!is_simple_groupoid(&g));
}

#[test]
fn broken_associativity_is_named() {
    let mut t = cyclic_group(3).to_table();
    let cell = t.compose.iter_mut().find(|c| c.0 != t.units[0] && c.1 != t.units[0] && c.2 != t.units[0]).unwrap();
    cell.2 = t.units[0];
    let r = validate_groupoid(&t);
    assert!(!r.is_ok());
    assert!(r.errors.iter().any(|e| e.contains("associativ")), "{:?}", r.errors);
}

#[test]
fn generators_on_units_with_wrong_sorts_are_rejected() {
    let mut t = site_pair_groupoid(&path_incidence()).to_table();
    t.generators[0] = t.units[0];
    assert!(!validate_groupoid(&t).is_ok());
}

#[test]
fn table_round_trip() {
    for g in pool().into_iter().take(12) {
        let back = Groupoid::from_table(&g.to_table()).unwrap();
        assert!(isomorphism(&g, &back).is_some());
        let j = GroupoidTable::from_json(&g.to_table().to_json()).unwrap();
        assert_eq!(j, g.to_table());
    }
}

#[test]
fn eval_of_empty_walk_and_backtrack() {
    let g = cyclic_group(4);
    let inc = g.incidence();
    assert_eq!(g.eval_walk(&inc.empty_walk(0)).unwrap(), g.unit(0));
    let w = inc.walk_by_names(0, &["e", "einv"]).unwrap();
    assert_eq!(g.eval_walk(&w).unwrap(), g.unit(0));
    let w = inc.walk_by_names(0, &["e", "e", "e", "e"]).unwrap();
    assert_eq!(g.eval_walk(&w).unwrap(), g.unit(0));
}

#[test]
fn eval_in_site_pair_groupoid_has_walk_sorts() {
    for inc in [moebius_incidence(), path_incidence()] {
        let g = site_pair_groupoid(&inc);
        for w in walks_up_to(&inc, 5) {
            let x = g.eval_walk(&w).unwrap();
            assert_eq!((g.src(x), g.tgt(x)), (w.start, w.end));
        }
    }
}

#[test]
fn word_for_evaluates_back() {
    for g in pool() {
        for x in 0..g.len() {
            assert_eq!(g.eval_walk(&g.word_for(x)).unwrap(), x);
        }
    }
}

#[test]
fn cayley_patterns_are_complete() {
    for g in pool() {
        let c = cayley_pattern(&g);
        assert!(c.is_complete());
        for s in g.incidence().sites() {
            assert_eq!(c.site_elements(s).len(), g.elements_to(s).len());
        }
    }
}

#[test]
fn cayley_of_cyclic_group_is_the_rotation() {
    let g = cyclic_group(5);
    let c = cayley_pattern(&g);
    let e = g.generator(0);
    for h in 0..5 {
        assert_eq!(c.rho(0).get(h as Elem), Some(g.mul(h, e) as Elem));
    }
    assert!(isomorphism(&groupoid_from_action(&c).unwrap(), &g).is_some());
}

#[test]
fn cayley_of_unit_valued_generator_has_loop_links() {
    let g = site_pair_groupoid(&loop_pair());
    let c = cayley_pattern(&g);
    assert_eq!(c.site_elements(0).len(), 1);
    assert!(c.rho(0).is_sub_identity() && c.rho(0).len() == 1);
}

#[test]
fn action_of_cayley_pattern_recovers_the_groupoid() {
    for g in pool().into_iter().filter(|g| g.len() <= 24) {
        let back = groupoid_from_action(&cayley_pattern(&g)).unwrap();
        assert!(isomorphism(&g, &back).is_some(), "|G| = {}", g.len());
    }
}

#[test]
fn action_of_i_over_i_is_the_site_pair_groupoid() {
    for inc in [moebius_incidence(), path_incidence(), loop_pair()] {
        let g = groupoid_from_action(&i_over_i(&inc)).unwrap();
        assert!(isomorphism(&g, &site_pair_groupoid(&inc)).is_some());
    }
}

#[test]
fn fixed_point_free_involution_gives_two_element_group() {
    let t = PartialMap::from_pairs([(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
    let h = AmalgamationPattern::from_sites(self_inverse_loop(), vec![RelStructure::new(Signature::empty(), 0..4)], vec![t])
        .unwrap();
    let g = groupoid_from_action(&h).unwrap();
    assert_eq!(g.len(), 2);
    let x = g.generator(0);
    assert!(!g.is_unit(x));
    assert_eq!(g.mul(x, x), g.unit(0));
    assert_eq!(g.inverse(x), x);
}

#[test]
fn action_rejects_incomplete_patterns() {
    assert!(matches!(groupoid_from_action(&moebius()), Err(Error::Precondition(_))));
}

#[test]
fn action_cap_is_reported() {
    assert!(groupoid_from_action_capped(&rotation_pattern(10), 5).unwrap().is_none());
}

#[test]
fn subgroupoid_extremes() {
    for g in pool() {
        let inc = g.incidence();
        let units: BTreeSet<GElem> = inc.sites().map(|s| g.unit(s)).collect();
        assert_eq!(subgroupoid(&g, &[]).unwrap(), units);
        let all: Vec<LinkId> = (0..inc.link_count()).collect();
        assert_eq!(subgroupoid(&g, &all).unwrap().len(), g.len());
    }
}

#[test]
fn subgroupoid_of_site_pair_groupoid_is_reachability() {
    let inc = path_incidence();
    let g = site_pair_groupoid(&inc);
    for alpha in alphas(&inc) {
        let mut allowed = vec![false; inc.link_count()];
        for &e in &alpha {
            allowed[e] = true;
        }
        let expect: BTreeSet<GElem> = (0..g.len())
            .filter(|&x| crate::incidence::reachable(&inc, g.src(x), Some(&allowed))[g.tgt(x)])
            .collect();
        assert_eq!(subgroupoid(&g, &alpha).unwrap(), expect);
    }
}

#[test]
fn subgroupoid_rejects_unclosed_sets() {
    assert!(subgroupoid(&cyclic_group(3), &[0]).is_err());
}

#[test]
fn cosets_partition_each_source_fibre() {
    for g in pool() {
        let inc = g.incidence();
        for alpha in alphas(inc).into_iter().chain([vec![]]) {
            for s in inc.sites() {
                let fibre: BTreeSet<GElem> = g.elements_from(s).iter().copied().collect();
                let mut seen = BTreeSet::new();
                for &x in &fibre {
                    let c = coset(&g, x, &alpha).unwrap();
                    assert!(c.contains(&x) && c.is_subset(&fibre));
                    for &y in &c {
                        assert_eq!(coset(&g, y, &alpha).unwrap(), c);
                    }
                    seen.extend(c);
                }
                assert_eq!(seen, fibre);
            }
            if alpha.is_empty() {
                assert!((0..g.len()).all(|x| coset(&g, x, &alpha).unwrap() == BTreeSet::from([x])));
            }
        }
    }
}

#[test]
fn unit_coset_of_everything_is_the_source_fibre() {
    let g = site_pair_groupoid(&path_incidence());
    let all: Vec<LinkId> = (0..4).collect();
    for s in 0..3 {
        let expect: BTreeSet<GElem> = g.elements_from(s).iter().copied().collect();
        assert_eq!(coset(&g, g.unit(s), &all).unwrap(), expect);
    }
}

#[test]
fn cyclic_groups_have_no_two_cycles() {
    for k in 2..=6 {
        let g = cyclic_group(k);
        assert!(two_acyclicity_violation(&g).is_none());
        let out = find_coset_cycles_of_length(&GroupoidCosets::new(&g), 2, 10, &mut budget());
        assert!(out.found.is_empty() && out.exhaustive);
    }
}

#[test]
fn overlapping_subgroups_give_a_two_cycle() {
    let g = z6_one_two();
    assert_eq!(g.len(), 6);
    assert!(!two_acyclic_by_intersections(&g));
    let c = two_acyclicity_violation(&g).expect("G[a] ∩ G[b] is larger than the units");
    assert_eq!(c.len(), 2);
    assert!(is_coset_cycle(&g, &c));
    assert!(is_n_acyclic(&g, 2, &mut budget()).unwrap().fails());
}

#[test]
fn two_cycle_criterion_agrees_with_search_on_pool() {
    for g in pool() {
        let by_criterion = two_acyclicity_violation(&g).is_none();
        let out = find_coset_cycles_of_length(&GroupoidCosets::new(&g), 2, 50, &mut budget());
        assert!(out.exhaustive || !out.found.is_empty());
        assert_eq!(by_criterion, out.found.is_empty(), "|G| = {}", g.len());
        assert_eq!(by_criterion, two_acyclic_by_intersections(&g));
        for c in &out.found {
            assert!(is_coset_cycle(&g, c));
        }
    }
}

#[test]
fn found_cycles_satisfy_the_definition() {
    for g in pool().into_iter().filter(|g| g.len() <= 30) {
        let out = find_coset_cycles(&g, 3, &mut budget()).unwrap();
        for c in &out.found {
            assert!((2..=3).contains(&c.len()));
            assert!(is_coset_cycle(&g, c), "{c}");
        }
    }
}

#[test]
fn n_acyclicity_is_monotone() {
    for g in pool().into_iter().filter(|g| g.len() <= 30) {
        let two = is_n_acyclic(&g, 2, &mut budget()).unwrap();
        let three = is_n_acyclic(&g, 3, &mut budget()).unwrap();
        if three.holds() {
            assert!(two.holds());
        }
        if two.fails() {
            assert!(three.fails());
        }
    }
}

#[test]
fn free_truncation_sizes() {
    assert_eq!(FreeTruncation::new(&moebius_incidence(), 0).len(), 2);
    let ft = FreeTruncation::new(&loop_pair(), 2);
    assert_eq!(ft.len(), 1 + 2 + 2);
    assert_eq!(FreeTruncation::new(&loop_pair(), 3).len(), 7);
}

#[test]
fn free_truncation_cancels_backtracks() {
    let inc = moebius_incidence();
    let ft = FreeTruncation::new(&inc, 4);
    for w in walks_up_to(&inc, 4) {
        let x = ft.element_of(&w).expect("walks within the radius are represented");
        assert_eq!(ft.word(x), &inc.reduce(&w));
        let is_unit = x == CosetSpace::unit(&ft, w.start);
        assert_eq!(is_unit, inc.reduce(&w).is_empty());
    }
    let w = inc.walk_by_names(0, &["e1", "e1inv"]).unwrap();
    assert_eq!(ft.element_of(&w), Some(CosetSpace::unit(&ft, 0)));
}

#[test]
fn free_truncation_has_no_short_cycles() {
    for inc in [loop_pair(), moebius_incidence(), two_loops()] {
        let ft = FreeTruncation::new(&inc, 6);
        for n in 2..=3 {
            let out = find_coset_cycles_of_length(&ft, n, 5, &mut budget());
            assert!(out.found.is_empty(), "{:?}", out.found);
        }
    }
}

#[test]
fn moebius_is_compatible_with_the_site_pair_groupoid() {
    let g = site_pair_groupoid(&moebius_incidence());
    assert!(is_compatible(&g, &moebius()).unwrap().holds());
}

#[test]
fn incoherent_pattern_gives_a_loop_witness() {
    let t = PartialMap::from_pairs([(0, 1), (1, 0)]).unwrap();
    let h = AmalgamationPattern::from_sites(self_inverse_loop(), vec![RelStructure::new(Signature::empty(), 0..2)], vec![t])
        .unwrap();
    assert!(is_coherent(&h).unwrap().fails());
    let g = site_pair_groupoid(&self_inverse_loop());
    let Verdict::Fails(w) = is_compatible(&g, &h).unwrap() else {
        panic!("expected a witness");
    };
    assert!(g.is_unit(g.eval_walk(&w).unwrap()));
    assert!(!crate::pattern::rho_of_walk(&h, &w).unwrap().is_sub_identity());
    assert!(is_compatible(&groupoid_from_action(&h).unwrap(), &h).unwrap().holds());
}

#[test]
fn compatibility_needs_matching_incidence() {
    assert!(is_compatible(&cyclic_group(3), &moebius()).is_err());
}

/// Groupoids over `inc` from random actions, together with `G(I)`.
fn pool_over(inc: &IncidencePattern, seed: u64) -> Vec<Groupoid> {
    let mut r = rng(seed);
    let mut out = vec![site_pair_groupoid(inc)];
    for points in [1, 2, 2, 3, 3, 4] {
        let h = random_action_pattern(&mut r, inc, points);
        if let Some(g) = groupoid_from_action_capped(&h, 200).unwrap() {
            out.push(g);
        }
    }
    out
}

#[test]
fn coherence_and_compatibility_agree_on_fuzzed_patterns() {
    let mut r = rng(0xc0de);
    for i in 0..150 {
        let h = random_pattern(&mut r, PatternBounds::default());
        let coherent = is_coherent(&h).unwrap().holds();
        let gi = is_compatible(&site_pair_groupoid(h.incidence()), &h).unwrap().holds();
        let all = pool_over(h.incidence(), i).iter().all(|g| is_compatible(g, &h).unwrap().holds());
        assert_eq!(coherent, gi);
        assert_eq!(coherent, all);
    }
}

#[test]
fn tilde_groupoid_over_site_pairs() {
    let h = AmalgamationPattern::from_sites(
        moebius_incidence(),
        vec![RelStructure::new(Signature::empty(), 0..2), RelStructure::new(Signature::empty(), 2..4)],
        vec![
            PartialMap::from_pairs([(0, 2), (1, 3)]).unwrap(),
            PartialMap::from_pairs([(2, 0), (3, 1)]).unwrap(),
            PartialMap::from_pairs([(2, 1), (3, 0)]).unwrap(),
            PartialMap::from_pairs([(1, 2), (0, 3)]).unwrap(),
        ],
    )
    .unwrap();
    let g = groupoid_from_action(&h).unwrap();
    assert!(is_simple_groupoid(&g));
    let ghat = site_pair_groupoid(&cayley_incidence(&g));
    assert!(is_simple_groupoid(&ghat));
    let t = tilde_groupoid(&g, &ghat).unwrap();
    assert_eq!(t.incidence(), g.incidence());
    assert!(validate_groupoid(&t.to_table()).is_ok());
    assert!(is_simple_groupoid(&t));
    let inc = g.incidence();
    for w in walks_up_to(inc, 5) {
        let in_t = t.is_unit(t.eval_walk(&w).unwrap());
        let gw = g.eval_walk(&w).unwrap();
        let loops_at = |x: GElem| g.mul(x, gw) == x;
        let starts = g.elements_to(w.start);
        assert_eq!(in_t, starts.iter().all(|&x| loops_at(x)));
        assert_eq!(in_t, starts.iter().any(|&x| loops_at(x)));
    }
}

#[test]
fn tilde_groupoid_rejects_wrong_interface() {
    let g = cyclic_group(3);
    assert!(tilde_groupoid(&g, &cyclic_group(3)).is_err());
}

#[test]
fn search_finds_a_two_acyclic_groupoid_for_moebius() {
    let h = moebius();
    let out = search_groupoid(h.incidence(), &h, 2, 16, &mut budget()).unwrap();
    let g = out.found.first().expect("a groupoid within 16 elements");
    assert!(g.len() <= 16);
    assert!(validate_groupoid(&g.to_table()).is_ok());
    assert!(is_simple_groupoid(g));
    assert!(is_compatible(g, &h).unwrap().holds());
    let cycles = find_coset_cycles(g, 2, &mut budget()).unwrap();
    assert!(cycles.found.is_empty() && cycles.exhaustive);
}

#[test]
fn cyclic_group_of_order_three_qualifies_for_a_loop_pair() {
    let h = rotation_pattern(3);
    let g = cyclic_group(3);
    assert!(is_simple_groupoid(&g));
    assert!(is_compatible(&g, &h).unwrap().holds());
    assert!(two_acyclic_by_intersections(&g));
    assert!(is_n_acyclic(&g, 2, &mut budget()).unwrap().holds());
    let out = search_groupoid(h.incidence(), &h, 2, 16, &mut budget()).unwrap();
    let found = out.found.first().unwrap();
    assert!(found.len() >= 3);
    assert!(is_compatible(found, &h).unwrap().holds());
}

#[test]
fn search_without_room_finds_nothing() {
    let h = moebius();
    let out = search_groupoid(h.incidence(), &h, 3, 2, &mut budget()).unwrap();
    assert!(out.found.is_empty());
}

#[test]
fn search_respects_the_budget() {
    let h = moebius();
    let out = search_groupoid(h.incidence(), &h, 3, 1000, &mut Budget::new(10)).unwrap();
    assert!(out.found.is_empty() && !out.exhaustive);
}

/// A rigid pattern: the directed path `0 → 1 → 2` with `e: 0 ↦ 1`.
fn rigid_loop_pattern() -> AmalgamationPattern {
    let site = RelStructure::graph(0..3, &[(0, 1), (1, 2)]).unwrap();
    let m = PartialMap::from_pairs([(0, 1)]).unwrap();
    AmalgamationPattern::from_sites(loop_pair(), vec![site], vec![m.clone(), m.inverse()]).unwrap()
}

#[test]
fn full_symmetry_is_vacuous_without_symmetries() {
    let h = rigid_loop_pattern();
    let syms = pattern_symmetries(&h, false, &mut budget()).unwrap();
    assert!(syms.found.iter().all(PatternSymmetry::is_identity));
    assert!(is_fully_symmetric_over(&cyclic_group(4), &h, &mut budget()).unwrap().holds());
}

#[test]
fn site_pair_groupoid_is_fully_symmetric() {
    for inc in [moebius_incidence(), path_incidence(), two_loops()] {
        let g = site_pair_groupoid(&inc);
        assert!(is_fully_symmetric_over_incidence(&g, &mut budget()).unwrap().holds());
    }
    let g = site_pair_groupoid(&moebius_incidence());
    assert!(is_fully_symmetric_over(&g, &moebius(), &mut budget()).unwrap().holds());
}

#[test]
fn unequal_generator_orders_break_a_link_swap() {
    let g = z6_one_two();
    let id = PartialMap::identity([0]);
    let h = AmalgamationPattern::from_sites(two_loops(), vec![RelStructure::new(Signature::empty(), [0])], vec![id; 4])
        .unwrap();
    let Verdict::Fails(sym) = is_fully_symmetric_over(&g, &h, &mut budget()).unwrap() else {
        panic!("the swap of a and b cannot extend");
    };
    assert!(sym.is_symmetry_of(&h));
    assert!(!sym.is_identity());
    assert!(is_fully_symmetric_over_incidence(&g, &mut budget()).unwrap().fails());
}

#[test]
fn every_moebius_action_groupoid_extends_the_site_swap() {
    let mut r = rng(11);
    let inc = moebius_incidence();
    for points in 1..=4 {
        for _ in 0..8 {
            let g = groupoid_from_action(&random_action_pattern(&mut r, &inc, points)).unwrap();
            assert!(is_fully_symmetric_over(&g, &moebius(), &mut budget()).unwrap().holds());
        }
    }
}

/// `h ↦ g'g⁻¹h` on `G[ι1(g), *]`, its inverse on `G[ι1(g'), *]`, identity
/// elsewhere, as a symmetry of the Cayley pattern.
fn left_translation(g: &Groupoid, a: GElem, b: GElem) -> PatternSymmetry {
    let (sa, sb) = (g.src(a), g.src(b));
    let t = g.mul(b, g.inverse(a));
    let ti = g.inverse(t);
    let elems = (0..g.len())
        .map(|h| {
            let img = if g.src(h) == sa {
                g.mul(t, h)
            } else if g.src(h) == sb {
                g.mul(ti, h)
            } else {
                h
            };
            (h as Elem, img as Elem)
        })
        .collect();
    PatternSymmetry {
        sites: g.incidence().sites().collect(),
        links: (0..g.incidence().link_count()).collect(),
        elems,
    }
}

#[test]
fn left_translations_are_cayley_symmetries() {
    for g in pool().into_iter().filter(|g| g.len() <= 30) {
        let c = cayley_pattern(&g);
        for s in g.incidence().sites() {
            let fibre = g.elements_to(s);
            for &a in &fibre {
                for &b in &fibre {
                    let sym = left_translation(&g, a, b);
                    assert!(sym.is_symmetry_of(&c));
                    assert_eq!(sym.elems[&(a as Elem)], b as Elem);
                }
            }
        }
    }
}

fn arb_groupoid() -> impl Strategy<Value = Groupoid> {
    let pool = pool();
    (0..pool.len()).prop_map(move |i| pool[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_respects_concatenation(g in arb_groupoid(), i in 0usize..10_000, j in 0usize..10_000) {
        let walks = walks_up_to(g.incidence(), 4);
        let w = &walks[i % walks.len()];
        let cont: Vec<&Walk> = walks.iter().filter(|v| v.start == w.end).collect();
        let v = cont[j % cont.len()];
        let wv = concat_walks(w, v).unwrap();
        prop_assert_eq!(g.eval_walk(&wv).unwrap(), g.mul(g.eval_walk(w).unwrap(), g.eval_walk(v).unwrap()));
    }

    #[test]
    fn inverses_evaluate_reversed_walks(g in arb_groupoid(), i in 0usize..10_000) {
        let walks = walks_up_to(g.incidence(), 4);
        let w = &walks[i % walks.len()];
        let x = g.eval_walk(w).unwrap();
        prop_assert_eq!(g.eval_walk(&g.incidence().reverse(w)).unwrap(), g.inverse(x));
    }
}
