use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::groupoid::GElem;
use crate::incidence::SiteId;
use crate::pattern::{pattern_symmetries, AmalgamationPattern, PatternSymmetry};
use crate::report::Verdict;
use crate::search::{Budget, SearchOutcome};
use crate::structure::{Elem, PartialMap};

use super::{Realisation, ReducedProduct};

/// The automorphism of a reduced product induced by the groupoid bijection
/// that swaps `G[ι1(from), *]` and `G[ι1(to), *]` by left multiplication,
/// sending `u[from]` to `u[to]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidSymmetry {
    pub site: SiteId,
    pub from: GElem,
    pub to: GElem,
    pub map: PartialMap,
}

#[derive(Clone, Debug)]
pub struct RigidSymmetries {
    pub symmetries: Vec<RigidSymmetry>,
    /// Per site: the symmetries move some chart onto every chart of `U_s`.
    pub transitive: Vec<bool>,
}

/// The left-multiplication bijection of `G` moving `g` to `g2`: `h ↦ g2·g⁻¹·h`
/// on `G[ι1(g), *]`, `h ↦ g·g2⁻¹·h` on `G[ι1(g2), *]`, identity elsewhere.
pub(crate) fn swap_translation(gr: &crate::groupoid::Groupoid, g: GElem, g2: GElem) -> Vec<GElem> {
    let fwd = gr.mul(g2, gr.inverse(g));
    let back = gr.inverse(fwd);
    let (s1, s2) = (gr.src(g), gr.src(g2));
    (0..gr.len())
        .map(|h| {
            if gr.src(h) == s1 {
                gr.mul(fwd, h)
            } else if gr.src(h) == s2 {
                gr.mul(back, h)
            } else {
                h
            }
        })
        .collect()
}

/// For each site `s`, descends the translations moving the first element of
/// `G[*, s]` to every other one, verifies that each is an automorphism of the
/// structure preserving the chart coordinates, and records transitivity.
pub fn rigid_symmetries(rp: &ReducedProduct) -> Result<RigidSymmetries> {
    let g = &rp.groupoid;
    let r = &rp.realisation;
    let inc = g.incidence();
    let mut symmetries = Vec::new();
    let mut transitive = Vec::with_capacity(inc.site_count());
    for s in inc.sites() {
        let over = g.elements_to(s);
        let Some(&g0) = over.first() else {
            transitive.push(false);
            continue;
        };
        let mut reached: BTreeSet<usize> = BTreeSet::from([rp.chart_of[g0]]);
        for &g2 in over.iter().skip(1) {
            let phi = swap_translation(g, g0, g2);
            let mut sigma: BTreeMap<Elem, Elem> = BTreeMap::new();
            for (&p, &(a, x)) in &rp.product.provenance {
                let from = rp.class_of[&p];
                let to = rp.class(a, phi[x]).expect("translated pair exists");
                if sigma.insert(from, to).is_some_and(|prev| prev != to) {
                    return Err(Error::Internal(format!(
                        "translation {g0} → {g2} is not well defined on the quotient"
                    )));
                }
            }
            let map = PartialMap::from_pairs(sigma)
                .map_err(|_| Error::Internal(format!("translation {g0} → {g2} is not injective")))?;
            if !r.structure().is_automorphism(&map) {
                return Err(Error::Internal(format!("translation {g0} → {g2} is not an automorphism")));
            }
            for x in 0..g.len() {
                let (c, d) = (r.chart(rp.chart_of[x]), r.chart(rp.chart_of[phi[x]]));
                let moved = map.then(&d.map);
                if c.site != d.site || moved.restrict(r.chart_domain(rp.chart_of[x])) != c.map {
                    return Err(Error::Internal(format!(
                        "translation {g0} → {g2} does not preserve chart coordinates"
                    )));
                }
            }
            reached.insert(rp.chart_of[g2]);
            symmetries.push(RigidSymmetry {
                site: s,
                from: g0,
                to: g2,
                map,
            });
        }
        let all: BTreeSet<usize> = r.charts_at(s).into_iter().collect();
        transitive.push(reached == all);
    }
    Ok(RigidSymmetries {
        symmetries,
        transitive,
    })
}

#[derive(Clone)]
struct SymState {
    sigma: BTreeMap<Elem, Elem>,
    used: BTreeSet<Elem>,
    chart_img: Vec<Option<usize>>,
    chart_used: Vec<bool>,
}

struct SymSearch<'a> {
    r: &'a Realisation,
    sym: &'a PartialMap,
    sites: &'a [SiteId],
}

impl SymSearch<'_> {
    /// Maps chart `c` onto chart `d`, extending `σ`. `None` on conflict.
    fn assign(&self, st: &SymState, c: usize, d: usize) -> Option<SymState> {
        let (cc, dc) = (self.r.chart(c), self.r.chart(d));
        if st.chart_used[d] || dc.site != self.sites[cc.site] {
            return None;
        }
        let back = dc.map.inverse();
        let mut st = st.clone();
        for &(y, a) in cc.map.pairs() {
            let t = back.get(self.sym.get(a)?)?;
            match st.sigma.get(&y) {
                Some(&prev) if prev != t => return None,
                Some(_) => {}
                None => {
                    if !st.used.insert(t) {
                        return None;
                    }
                    st.sigma.insert(y, t);
                }
            }
        }
        st.chart_img[c] = Some(d);
        st.chart_used[d] = true;
        Some(st)
    }

    fn candidates(&self, st: &SymState, c: usize) -> Vec<usize> {
        let dom = self.r.chart_domain(c);
        match dom.iter().find_map(|y| st.sigma.get(y)) {
            Some(&t) => self.r.charts_containing(t).to_vec(),
            None => (0..self.r.charts().len()).collect(),
        }
    }

    fn next_chart(&self, st: &SymState) -> Option<usize> {
        let n = self.r.charts().len();
        let touching = (0..n).find(|&c| {
            st.chart_img[c].is_none() && self.r.chart_domain(c).iter().any(|y| st.sigma.contains_key(y))
        });
        touching.or_else(|| (0..n).find(|&c| st.chart_img[c].is_none()))
    }

    fn dfs(&self, st: SymState, budget: &mut Budget, exhausted: &mut bool) -> Option<PartialMap> {
        if !budget.tick() {
            *exhausted = true;
            return None;
        }
        let Some(c) = self.next_chart(&st) else {
            let map = PartialMap::from_pairs(st.sigma).ok()?;
            let total = map.len() == self.r.structure().len();
            return (total && self.r.structure().is_automorphism(&map)).then_some(map);
        };
        for d in self.candidates(&st, c) {
            if let Some(next) = self.assign(&st, c, d) {
                if let Some(m) = self.dfs(next, budget, exhausted) {
                    return Some(m);
                }
                if *exhausted {
                    return None;
                }
            }
        }
        None
    }
}

/// An automorphism `σ` of the structure that maps charts onto charts over
/// the symmetry `sym` of the pattern: for every chart `u` some chart `v` onto
/// the image site has `π_v ∘ σ = sym ∘ π_u`. With `start = (c, d)`, chart `c`
/// is required to go to chart `d`.
pub fn find_realisation_symmetry(
    r: &Realisation,
    sym: &PatternSymmetry,
    start: Option<(usize, usize)>,
    budget: &mut Budget,
) -> Result<SearchOutcome<PartialMap>> {
    let elems = PartialMap::from_pairs(sym.elems.iter().map(|(&a, &b)| (a, b)))?;
    let search = SymSearch {
        r,
        sym: &elems,
        sites: &sym.sites,
    };
    let n = r.charts().len();
    let st = SymState {
        sigma: BTreeMap::new(),
        used: BTreeSet::new(),
        chart_img: vec![None; n],
        chart_used: vec![false; n],
    };
    let before = budget.used();
    let mut exhausted = false;
    let found = match start {
        Some((c, d)) => match search.assign(&st, c, d) {
            Some(st) => search.dfs(st, budget, &mut exhausted),
            None => None,
        },
        None => search.dfs(st, budget, &mut exhausted),
    };
    Ok(SearchOutcome {
        found: found.into_iter().collect(),
        exhaustive: !exhausted,
        steps: budget.used() - before,
    })
}

/// Why a realisation fails to be fully symmetric.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum RealisationAsymmetry {
    /// A symmetry of the pattern with no extension.
    Symmetry(PatternSymmetry),
    /// No automorphism preserving coordinates moves the first chart of `U_s`
    /// onto `chart`.
    Intransitive { site: SiteId, chart: usize },
}

/// Every symmetry of `h` extends to `r`, and the coordinate-preserving
/// automorphisms act transitively on each `U_s`.
pub fn is_fully_symmetric_realisation(
    r: &Realisation,
    h: &AmalgamationPattern,
    budget: &mut Budget,
) -> Result<Verdict<RealisationAsymmetry>> {
    let syms = pattern_symmetries(h, false, budget)?;
    let mut unknown = !syms.exhaustive;
    for sym in syms.found.into_iter().filter(|s| !s.is_identity()) {
        let out = find_realisation_symmetry(r, &sym, None, budget)?;
        if out.found.is_empty() {
            if !out.exhaustive {
                return Ok(Verdict::Unknown);
            }
            return Ok(Verdict::Fails(RealisationAsymmetry::Symmetry(sym)));
        }
    }
    let id = PatternSymmetry::identity(h);
    for s in h.incidence().sites() {
        let charts = r.charts_at(s);
        let Some(&c0) = charts.first() else { continue };
        for &c in &charts[1..] {
            let out = find_realisation_symmetry(r, &id, Some((c0, c)), budget)?;
            if out.found.is_empty() {
                if !out.exhaustive {
                    unknown = true;
                    continue;
                }
                return Ok(Verdict::Fails(RealisationAsymmetry::Intransitive { site: s, chart: c }));
            }
        }
    }
    Ok(if unknown { Verdict::Unknown } else { Verdict::Holds })
}
