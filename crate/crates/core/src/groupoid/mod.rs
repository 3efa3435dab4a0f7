//! Finite groupoids over incidence patterns.

mod action;
mod compat;
mod cosets;
mod free;
mod search;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::{IncidenceJson, IncidencePattern, Link, LinkId, SiteId, Walk};
use crate::pattern::AmalgamationPattern;
use crate::report::ValidationReport;
use crate::structure::{Elem, PartialMap, RelStructure, Signature};

pub use action::{groupoid_from_action, groupoid_from_action_capped, tilde_groupoid};
pub use compat::{incidence_symmetries, is_compatible, is_fully_symmetric_over, is_fully_symmetric_over_incidence};
pub use cosets::{
    find_coset_cycles, find_coset_cycles_of_length, is_n_acyclic, two_acyclicity_violation, CosetCycle,
    CosetSpace, GroupoidCosets, MAX_REPORTED_CYCLES,
};
pub use free::FreeTruncation;
pub use search::{search_groupoid, search_groupoid_with, GroupoidSearch};

/// Index of an element within a [`Groupoid`].
pub type GElem = usize;

/// A validated finite groupoid over an incidence pattern.
///
/// The composition table is stored per row: `table[g]` lists `g·h` for the
/// elements `h` with `ι1(h) = ι2(g)`, in the order of [`Groupoid::elements_from`].
/// Products of non-matching pairs have no cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Groupoid {
    incidence: IncidencePattern,
    labels: Vec<u32>,
    src: Vec<SiteId>,
    tgt: Vec<SiteId>,
    units: Vec<GElem>,
    inverse: Vec<GElem>,
    generators: Vec<GElem>,
    out: Vec<Vec<GElem>>,
    pos: Vec<usize>,
    table: Vec<Vec<GElem>>,
}

impl Groupoid {
    /// Builds a groupoid from sort data and a composition function, assuming
    /// the laws hold. Used by constructors whose output is correct by
    /// construction; tables from outside go through [`Groupoid::from_table`].
    pub(crate) fn from_dense(
        incidence: IncidencePattern,
        src: Vec<SiteId>,
        tgt: Vec<SiteId>,
        units: Vec<GElem>,
        generators: Vec<GElem>,
        mut compose: impl FnMut(GElem, GElem) -> GElem,
    ) -> Self {
        let n = src.len();
        let mut out = vec![Vec::new(); incidence.site_count()];
        let mut pos = vec![0; n];
        for g in 0..n {
            pos[g] = out[src[g]].len();
            out[src[g]].push(g);
        }
        let table: Vec<Vec<GElem>> = (0..n)
            .map(|g| out[tgt[g]].iter().map(|&h| compose(g, h)).collect())
            .collect();
        let inverse = (0..n)
            .map(|g| {
                out[tgt[g]]
                    .iter()
                    .copied()
                    .find(|&h| table[g][pos[h]] == units[src[g]])
                    .expect("every element has an inverse")
            })
            .collect();
        Self {
            incidence,
            labels: (0..n as u32).collect(),
            src,
            tgt,
            units,
            inverse,
            generators,
            out,
            pos,
            table,
        }
    }

    pub fn from_table(t: &GroupoidTable) -> Result<Self> {
        validate_groupoid(t).into_result()?;
        let ix: HashMap<u32, GElem> = t.elements.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
        let cells: HashMap<(GElem, GElem), GElem> = t
            .compose
            .iter()
            .map(|&(a, b, c)| ((ix[&a], ix[&b]), ix[&c]))
            .collect();
        let mut g = Self::from_dense(
            t.incidence.clone(),
            t.elements.iter().map(|e| e.1).collect(),
            t.elements.iter().map(|e| e.2).collect(),
            t.units.iter().map(|u| ix[u]).collect(),
            t.generators.iter().map(|x| ix[x]).collect(),
            |a, b| cells[&(a, b)],
        );
        g.labels = t.elements.iter().map(|e| e.0).collect();
        Ok(g)
    }

    pub fn to_table(&self) -> GroupoidTable {
        let mut compose = Vec::new();
        for g in 0..self.len() {
            for &h in &self.out[self.tgt[g]] {
                compose.push((self.labels[g], self.labels[h], self.labels[self.mul(g, h)]));
            }
        }
        GroupoidTable {
            incidence: self.incidence.clone(),
            elements: (0..self.len()).map(|g| (self.labels[g], self.src[g], self.tgt[g])).collect(),
            units: self.units.iter().map(|&u| self.labels[u]).collect(),
            compose,
            generators: self.generators.iter().map(|&g| self.labels[g]).collect(),
        }
    }

    pub fn incidence(&self) -> &IncidencePattern {
        &self.incidence
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    pub fn label(&self, g: GElem) -> u32 {
        self.labels[g]
    }

    pub fn src(&self, g: GElem) -> SiteId {
        self.src[g]
    }

    pub fn tgt(&self, g: GElem) -> SiteId {
        self.tgt[g]
    }

    pub fn unit(&self, s: SiteId) -> GElem {
        self.units[s]
    }

    pub fn is_unit(&self, g: GElem) -> bool {
        self.units[self.src[g]] == g
    }

    pub fn inverse(&self, g: GElem) -> GElem {
        self.inverse[g]
    }

    pub fn generator(&self, e: LinkId) -> GElem {
        self.generators[e]
    }

    pub fn generators(&self) -> &[GElem] {
        &self.generators
    }

    /// Elements `h` with `ι1(h) = s`, ascending.
    pub fn elements_from(&self, s: SiteId) -> &[GElem] {
        &self.out[s]
    }

    /// Elements `h` with `ι2(h) = s`, ascending.
    pub fn elements_to(&self, s: SiteId) -> Vec<GElem> {
        (0..self.len()).filter(|&g| self.tgt[g] == s).collect()
    }

    /// `g·h` when `ι2(g) = ι1(h)`.
    pub fn compose(&self, g: GElem, h: GElem) -> Option<GElem> {
        (self.tgt[g] == self.src[h]).then(|| self.table[g][self.pos[h]])
    }

    /// `g·h`; panics on a sort mismatch.
    pub fn mul(&self, g: GElem, h: GElem) -> GElem {
        assert_eq!(self.tgt[g], self.src[h], "composing elements with mismatched sorts");
        self.table[g][self.pos[h]]
    }

    /// `w^G`, the product of the generators along `w`.
    pub fn eval_walk(&self, w: &Walk) -> Result<GElem> {
        let checked = self.incidence.walk(w.start, w.links.clone())?;
        let mut g = self.units[checked.start];
        for &e in &checked.links {
            g = self.mul(g, self.generators[e]);
        }
        Ok(g)
    }

    /// A shortest walk `w` with `w^G = g`, breadth-first from the unit.
    pub fn word_for(&self, g: GElem) -> Walk {
        let s = self.src[g];
        let mut parent: Vec<Option<(GElem, LinkId)>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        seen[self.units[s]] = true;
        let mut queue = VecDeque::from([self.units[s]]);
        while let Some(x) = queue.pop_front() {
            if x == g {
                break;
            }
            for &e in self.incidence.outgoing(self.tgt[x]) {
                let y = self.mul(x, self.generators[e]);
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    queue.push_back(y);
                }
            }
        }
        let mut links = Vec::new();
        let mut x = g;
        while let Some((p, e)) = parent[x] {
            links.push(e);
            x = p;
        }
        links.reverse();
        self.incidence.walk(s, links).expect("generator walks compose")
    }
}

/// Raw composition data as read from a file, before validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidTable {
    pub incidence: IncidencePattern,
    /// `(label, ι1, ι2)` with sites as indices.
    pub elements: Vec<(u32, SiteId, SiteId)>,
    /// Unit label per site index.
    pub units: Vec<u32>,
    /// `(g, h, g·h)` by label.
    pub compose: Vec<(u32, u32, u32)>,
    /// Generator label per link index.
    pub generators: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementJson {
    pub id: u32,
    pub src: u32,
    pub tgt: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupoidJson {
    pub incidence: IncidenceJson,
    pub elements: Vec<ElementJson>,
    pub units: BTreeMap<String, u32>,
    pub compose: Vec<[u32; 3]>,
    pub generators: BTreeMap<String, u32>,
}

impl GroupoidTable {
    pub fn from_json(j: &GroupoidJson) -> Result<Self> {
        let inc = IncidencePattern::from_json(&j.incidence)?;
        let site = |l: u32| inc.site_by_label(l).ok_or_else(|| Error::UnknownId(format!("site {l}")));
        let elements = j
            .elements
            .iter()
            .map(|e| Ok((e.id, site(e.src)?, site(e.tgt)?)))
            .collect::<Result<Vec<_>>>()?;
        let units = inc
            .sites()
            .map(|s| {
                let key = inc.site_label(s).to_string();
                j.units
                    .get(&key)
                    .copied()
                    .ok_or_else(|| Error::Invalid(format!("no unit given for site {key}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let generators = inc
            .links()
            .iter()
            .map(|l| {
                j.generators
                    .get(&l.name)
                    .copied()
                    .ok_or_else(|| Error::Invalid(format!("no generator given for link `{}`", l.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            compose: j.compose.iter().map(|c| (c[0], c[1], c[2])).collect(),
            incidence: inc,
            elements,
            units,
            generators,
        })
    }

    pub fn to_json(&self) -> GroupoidJson {
        let inc = &self.incidence;
        GroupoidJson {
            incidence: inc.to_json(),
            elements: self
                .elements
                .iter()
                .map(|&(id, s, t)| ElementJson {
                    id,
                    src: inc.site_label(s),
                    tgt: inc.site_label(t),
                })
                .collect(),
            units: inc
                .sites()
                .zip(&self.units)
                .map(|(s, &u)| (inc.site_label(s).to_string(), u))
                .collect(),
            compose: self.compose.iter().map(|&(a, b, c)| [a, b, c]).collect(),
            generators: inc
                .links()
                .iter()
                .zip(&self.generators)
                .map(|(l, &g)| (l.name.clone(), g))
                .collect(),
        }
    }
}

impl Serialize for Groupoid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_table().to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Groupoid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GroupoidJson::deserialize(d)?;
        GroupoidTable::from_json(&j)
            .and_then(|t| Groupoid::from_table(&t))
            .map_err(serde::de::Error::custom)
    }
}

const MAX_LAW_REPORTS: usize = 20;

/// Checks the groupoid laws on a raw table: a total composition exactly on
/// sort-matching pairs, associativity, units, inverses, the generator map and
/// generation. Each violated law is listed with a witness.
pub fn validate_groupoid(t: &GroupoidTable) -> ValidationReport {
    let mut r = ValidationReport::new();
    let inc = &t.incidence;
    r.extend("incidence: ", inc.validate());
    let n = t.elements.len();
    let mut ix: HashMap<u32, GElem> = HashMap::new();
    for (i, &(id, s, tg)) in t.elements.iter().enumerate() {
        if ix.insert(id, i).is_some() {
            r.error(format!("element id {id} occurs twice"));
        }
        if s >= inc.site_count() || tg >= inc.site_count() {
            r.error(format!("element {id} has a sort outside the incidence pattern"));
        }
    }
    if !r.is_ok() {
        return r;
    }
    let src: Vec<SiteId> = t.elements.iter().map(|e| e.1).collect();
    let tgt: Vec<SiteId> = t.elements.iter().map(|e| e.2).collect();
    let lab = |g: GElem| t.elements[g].0;

    let mut cells: HashMap<(GElem, GElem), GElem> = HashMap::new();
    for &(a, b, c) in &t.compose {
        let (Some(&ga), Some(&gb), Some(&gc)) = (ix.get(&a), ix.get(&b), ix.get(&c)) else {
            r.error(format!("composition entry [{a},{b},{c}] names an unknown element"));
            continue;
        };
        if tgt[ga] != src[gb] {
            r.error(format!("composition defined on non-matching pair ({a},{b})"));
            continue;
        }
        if let Some(&prev) = cells.get(&(ga, gb)) {
            if prev != gc {
                r.error(format!("composition of ({a},{b}) given twice with different results"));
            }
        }
        cells.insert((ga, gb), gc);
    }
    for g in 0..n {
        for h in 0..n {
            if tgt[g] == src[h] && !cells.contains_key(&(g, h)) {
                r.error(format!("composition of ({},{}) is missing", lab(g), lab(h)));
            }
        }
    }
    if t.units.len() != inc.site_count() {
        r.error("wrong number of units");
    }
    if t.generators.len() != inc.link_count() {
        r.error("wrong number of generators");
    }
    let units: Vec<Option<GElem>> = t.units.iter().map(|u| ix.get(u).copied()).collect();
    let gens: Vec<Option<GElem>> = t.generators.iter().map(|u| ix.get(u).copied()).collect();
    if units.iter().chain(&gens).any(|u| u.is_none()) {
        r.error("a unit or generator names an unknown element");
    }
    if !r.is_ok() {
        return r;
    }
    let units: Vec<GElem> = units.into_iter().flatten().collect();
    let gens: Vec<GElem> = gens.into_iter().flatten().collect();
    let c = |g: GElem, h: GElem| cells[&(g, h)];

    let mut reports = 0;
    let mut law = |r: &mut ValidationReport, msg: String| {
        if reports < MAX_LAW_REPORTS {
            r.error(msg);
        }
        reports += 1;
    };
    for g in 0..n {
        for h in (0..n).filter(|&h| tgt[g] == src[h]) {
            let gh = c(g, h);
            if src[gh] != src[g] || tgt[gh] != tgt[h] {
                law(&mut r, format!("product {}·{} = {} has the wrong sorts", lab(g), lab(h), lab(gh)));
            }
        }
    }
    if !r.is_ok() {
        return r;
    }
    for g in 0..n {
        for h in (0..n).filter(|&h| tgt[g] == src[h]) {
            let gh = c(g, h);
            for k in (0..n).filter(|&k| tgt[h] == src[k]) {
                if c(gh, k) != c(g, c(h, k)) {
                    law(&mut r, format!("associativity fails on ({}, {}, {})", lab(g), lab(h), lab(k)));
                }
            }
        }
    }
    for (s, &u) in units.iter().enumerate() {
        if src[u] != s || tgt[u] != s {
            law(&mut r, format!("unit {} of site {} has the wrong sorts", lab(u), inc.site_label(s)));
            continue;
        }
        for g in 0..n {
            if tgt[g] == s && c(g, u) != g {
                law(&mut r, format!("right unit law fails: {}·{} ≠ {}", lab(g), lab(u), lab(g)));
            }
            if src[g] == s && c(u, g) != g {
                law(&mut r, format!("left unit law fails: {}·{} ≠ {}", lab(u), lab(g), lab(g)));
            }
        }
    }
    if !r.is_ok() {
        return r;
    }
    let mut inverse = vec![None; n];
    for g in 0..n {
        inverse[g] = (0..n).find(|&h| {
            tgt[g] == src[h] && tgt[h] == src[g] && c(g, h) == units[src[g]] && c(h, g) == units[tgt[g]]
        });
        if inverse[g].is_none() {
            law(&mut r, format!("element {} has no inverse", lab(g)));
        }
    }
    for (e, l) in inc.links().iter().enumerate() {
        let g = gens[e];
        if src[g] != l.src || tgt[g] != l.tgt {
            law(&mut r, format!("generator {} of `{}` has the wrong sorts", lab(g), l.name));
        } else if inverse[g].is_some_and(|i| i != gens[l.inv]) {
            law(
                &mut r,
                format!("generator of `{}` is not the inverse of the generator of `{}`", inc.link(l.inv).name, l.name),
            );
        }
    }
    if !r.is_ok() {
        return r;
    }
    let mut seen = vec![false; n];
    let mut stack: Vec<GElem> = units.clone();
    for &u in &units {
        seen[u] = true;
    }
    while let Some(g) = stack.pop() {
        for &e in inc.outgoing(tgt[g]) {
            let h = c(g, gens[e]);
            if !seen[h] {
                seen[h] = true;
                stack.push(h);
            }
        }
    }
    for g in 0..n {
        if !seen[g] {
            law(&mut r, format!("element {} is not generated", lab(g)));
        }
    }
    if reports > MAX_LAW_REPORTS {
        r.error(format!("{} further law violations omitted", reports - MAX_LAW_REPORTS));
    }
    r
}

/// Generators pairwise distinct and none of them a unit.
pub fn is_simple_groupoid(g: &Groupoid) -> bool {
    let gens = g.generators();
    let distinct = gens.iter().collect::<BTreeSet<_>>().len() == gens.len();
    distinct && gens.iter().all(|&x| !g.is_unit(x))
}

/// The groupoid with one element per ordered pair of sites joined by a walk.
pub fn site_pair_groupoid(inc: &IncidencePattern) -> Groupoid {
    let n = inc.site_count();
    let mut id = HashMap::new();
    let (mut src, mut tgt) = (Vec::new(), Vec::new());
    for s in 0..n {
        let reach = crate::incidence::reachable(inc, s, None);
        for t in 0..n {
            if reach[t] {
                id.insert((s, t), src.len());
                src.push(s);
                tgt.push(t);
            }
        }
    }
    let units = (0..n).map(|s| id[&(s, s)]).collect();
    let generators = inc.links().iter().map(|l| id[&(l.src, l.tgt)]).collect();
    let (s2, t2) = (src.clone(), tgt.clone());
    Groupoid::from_dense(inc.clone(), src, tgt, units, generators, |a, b| id[&(s2[a], t2[b])])
}

/// The incidence pattern of the Cayley graph of `g`: one site per element and
/// a link `e[h]` from `h` to `h·e^G` whenever `ι2(h) = ι1(e)`.
pub fn cayley_incidence(g: &Groupoid) -> IncidencePattern {
    let inc = g.incidence();
    let mut index: HashMap<(LinkId, GElem), usize> = HashMap::new();
    let mut raw: Vec<(LinkId, GElem)> = Vec::new();
    for h in 0..g.len() {
        for &e in inc.outgoing(g.tgt(h)) {
            index.insert((e, h), raw.len());
            raw.push((e, h));
        }
    }
    let links = raw
        .iter()
        .map(|&(e, h)| {
            let next = g.mul(h, g.generator(e));
            Link {
                name: format!("{}[{}]", inc.link(e).name, g.label(h)),
                src: h,
                tgt: next,
                inv: index[&(inc.inv(e), next)],
            }
        })
        .collect();
    IncidencePattern::new((0..g.len()).map(|h| g.label(h)).collect(), links).expect("Cayley incidence is well formed")
}

/// The Cayley graph as a pattern over `g`'s incidence pattern: site `s`
/// holds `G[*, s]` and `ρ_e` is right multiplication by `e^G`.
pub fn cayley_pattern(g: &Groupoid) -> AmalgamationPattern {
    let inc = g.incidence();
    let carrier = RelStructure::new(Signature::empty(), (0..g.len()).map(|x| x as Elem));
    let site_of = (0..g.len()).map(|x| (x as Elem, g.tgt(x))).collect();
    let rho = (0..inc.link_count())
        .map(|e| {
            g.elements_to(inc.src(e))
                .into_iter()
                .map(|h| (h as Elem, g.mul(h, g.generator(e)) as Elem))
                .collect::<PartialMap>()
        })
        .collect();
    AmalgamationPattern::new(inc.clone(), carrier, site_of, rho).expect("Cayley pattern is valid")
}

fn check_alpha(inc: &IncidencePattern, alpha: &[LinkId]) -> Result<Vec<bool>> {
    let mut mask = vec![false; inc.link_count()];
    for &e in alpha {
        if e >= inc.link_count() {
            return Err(Error::Invalid(format!("link index {e} out of range")));
        }
        mask[e] = true;
    }
    if let Some(e) = (0..mask.len()).find(|&e| mask[e] && !mask[inc.inv(e)]) {
        return Err(Error::Invalid(format!(
            "link set is not closed under reversal: contains `{}` but not `{}`",
            inc.link(e).name,
            inc.link(inc.inv(e)).name
        )));
    }
    Ok(mask)
}

fn subgroupoid_mask(g: &Groupoid, allowed: &[bool]) -> Vec<bool> {
    let mut member = vec![false; g.len()];
    let mut stack: Vec<GElem> = (0..g.incidence().site_count()).map(|s| g.unit(s)).collect();
    for &u in &stack {
        member[u] = true;
    }
    while let Some(x) = stack.pop() {
        for &e in g.incidence().outgoing(g.tgt(x)) {
            if !allowed[e] {
                continue;
            }
            let y = g.mul(x, g.generator(e));
            if !member[y] {
                member[y] = true;
                stack.push(y);
            }
        }
    }
    member
}

/// `G[α]`: products along walks using only links in `α` (units included).
pub fn subgroupoid(g: &Groupoid, alpha: &[LinkId]) -> Result<BTreeSet<GElem>> {
    let mask = check_alpha(g.incidence(), alpha)?;
    let member = subgroupoid_mask(g, &mask);
    Ok((0..g.len()).filter(|&x| member[x]).collect())
}

/// The left coset `x·G[α] = {x·h : h ∈ G[α], ι1(h) = ι2(x)}`.
pub fn coset(g: &Groupoid, x: GElem, alpha: &[LinkId]) -> Result<BTreeSet<GElem>> {
    let sub = subgroupoid(g, alpha)?;
    Ok(g.elements_from(g.tgt(x))
        .iter()
        .filter(|h| sub.contains(h))
        .map(|&h| g.mul(x, h))
        .collect())
}

/// A bijection `φ: g → other` with `φ(1_s) = 1_{sites[s]}` and
/// `φ(x·e^G) = φ(x)·links[e]^{other}`, if one exists. With identity site and
/// link maps this is a generator-preserving isomorphism; with a symmetry of
/// the incidence pattern it is the extension of that symmetry.
pub fn extend_along_generators(
    g: &Groupoid,
    other: &Groupoid,
    sites: &[SiteId],
    links: &[LinkId],
) -> Option<Vec<GElem>> {
    if g.len() != other.len() {
        return None;
    }
    let inc = g.incidence();
    let mut phi: Vec<Option<GElem>> = vec![None; g.len()];
    let mut used = vec![false; other.len()];
    let mut queue = VecDeque::new();
    for s in inc.sites() {
        let (a, b) = (g.unit(s), other.unit(sites[s]));
        if used[b] {
            return None;
        }
        phi[a] = Some(b);
        used[b] = true;
        queue.push_back(a);
    }
    while let Some(x) = queue.pop_front() {
        let px = phi[x].unwrap();
        for &e in inc.outgoing(g.tgt(x)) {
            let y = g.mul(x, g.generator(e));
            let py = other.compose(px, other.generator(links[e]))?;
            match phi[y] {
                Some(prev) if prev != py => return None,
                Some(_) => {}
                None => {
                    if used[py] {
                        return None;
                    }
                    phi[y] = Some(py);
                    used[py] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    phi.into_iter().collect()
}

/// Generator-preserving isomorphism between two groupoids over the same
/// incidence pattern.
pub fn isomorphism(g: &Groupoid, other: &Groupoid) -> Option<Vec<GElem>> {
    if g.incidence() != other.incidence() {
        return None;
    }
    let sites: Vec<SiteId> = g.incidence().sites().collect();
    let links: Vec<LinkId> = (0..g.incidence().link_count()).collect();
    extend_along_generators(g, other, &sites, &links)
}

#[cfg(test)]
pub(crate) mod tests;
