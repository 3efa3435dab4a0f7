//! Amalgamation patterns: site structures over an incidence pattern with
//! partial isomorphisms along the links.

mod closure;
mod consistency;
mod multisorted;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::{IncidenceJson, IncidencePattern, Link, LinkId, SiteId, Walk};
use crate::report::ValidationReport;
use crate::structure::{partial_isomorphism_violation, Elem, PartialMap, RelStructure, Signature};
use crate::unionfind::UnionFind;

pub use closure::{
    closure, is_coherent, is_simple, is_strongly_coherent, ClosureEntry, SimplicityWitness, WalkMapClosure,
    DEFAULT_CLOSURE_CAP,
};
pub use consistency::{is_globally_consistent, quotient, Inconsistency};
pub use multisorted::{pattern_from_multisorted, pattern_symmetries, pattern_to_multisorted, PatternSymmetry};

/// A disjoint union of site structures `A_s` together with link maps
/// `ρ_e: A_{ι1(e)} ⇀ A_{ι2(e)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamationPattern {
    incidence: IncidencePattern,
    carrier: RelStructure,
    site_of: BTreeMap<Elem, SiteId>,
    site_elems: Vec<Vec<Elem>>,
    rho: Vec<PartialMap>,
}

impl AmalgamationPattern {
    /// Assembles a pattern without checking its invariants; see
    /// [`validate_pattern`].
    pub fn from_parts_unchecked(
        incidence: IncidencePattern,
        carrier: RelStructure,
        site_of: BTreeMap<Elem, SiteId>,
        rho: Vec<PartialMap>,
    ) -> Self {
        let mut site_elems = vec![Vec::new(); incidence.site_count()];
        for (&a, &s) in &site_of {
            if s < site_elems.len() {
                site_elems[s].push(a);
            }
        }
        Self {
            incidence,
            carrier,
            site_of,
            site_elems,
            rho,
        }
    }

    /// Assembles and validates a pattern.
    pub fn new(
        incidence: IncidencePattern,
        carrier: RelStructure,
        site_of: BTreeMap<Elem, SiteId>,
        rho: Vec<PartialMap>,
    ) -> Result<Self> {
        let p = Self::from_parts_unchecked(incidence, carrier, site_of, rho);
        validate_pattern(&p).into_result()?;
        Ok(p)
    }

    /// Builds a pattern from one structure per site (with pairwise disjoint
    /// universes) and one map per link.
    pub fn from_sites(incidence: IncidencePattern, sites: Vec<RelStructure>, rho: Vec<PartialMap>) -> Result<Self> {
        if sites.len() != incidence.site_count() {
            return Err(Error::Invalid(format!(
                "{} site structures given for {} sites",
                sites.len(),
                incidence.site_count()
            )));
        }
        let signature = sites
            .first()
            .map(|s| s.signature().clone())
            .unwrap_or_else(Signature::empty);
        let mut carrier = RelStructure::new(signature.clone(), []);
        let mut site_of = BTreeMap::new();
        for (s, st) in sites.iter().enumerate() {
            if st.signature() != &signature {
                return Err(Error::Invalid("site structures use different signatures".into()));
            }
            for &a in st.universe() {
                if site_of.insert(a, s).is_some() {
                    return Err(Error::Invalid(format!("element {a} appears in two sites")));
                }
                carrier.add_element(a);
            }
            for (name, tuples) in st.relations() {
                for t in tuples {
                    carrier.add_tuple(name, t.clone())?;
                }
            }
        }
        Self::new(incidence, carrier, site_of, rho)
    }

    pub fn incidence(&self) -> &IncidencePattern {
        &self.incidence
    }

    pub fn carrier(&self) -> &RelStructure {
        &self.carrier
    }

    pub fn signature(&self) -> &Signature {
        self.carrier.signature()
    }

    pub fn site_of(&self, a: Elem) -> Option<SiteId> {
        self.site_of.get(&a).copied()
    }

    pub fn site_assignment(&self) -> &BTreeMap<Elem, SiteId> {
        &self.site_of
    }

    /// Elements of `A_s`, ascending.
    pub fn site_elements(&self, s: SiteId) -> &[Elem] {
        &self.site_elems[s]
    }

    pub fn site_structure(&self, s: SiteId) -> RelStructure {
        self.carrier.restrict(&self.site_elems[s].iter().copied().collect())
    }

    pub fn rho(&self, e: LinkId) -> &PartialMap {
        &self.rho[e]
    }

    pub fn links(&self) -> &[PartialMap] {
        &self.rho
    }

    /// Whether every link map is a bijection between its full sites.
    pub fn complete_violation(&self) -> Option<LinkId> {
        (0..self.rho.len()).find(|&e| {
            let inc = &self.incidence;
            self.rho[e].len() != self.site_elems[inc.src(e)].len()
                || self.rho[e].len() != self.site_elems[inc.tgt(e)].len()
        })
    }

    pub fn is_complete(&self) -> bool {
        self.complete_violation().is_none()
    }

    pub fn to_json(&self) -> PatternJson {
        let inc = &self.incidence;
        PatternJson {
            incidence: inc.to_json(),
            sites: inc
                .sites()
                .map(|s| (inc.site_label(s).to_string(), self.site_structure(s)))
                .collect(),
            links: inc
                .links()
                .iter()
                .enumerate()
                .map(|(e, l)| (l.name.clone(), self.rho[e].pairs().to_vec()))
                .collect(),
        }
    }

    pub fn from_json(j: &PatternJson) -> Result<Self> {
        let inc = IncidencePattern::from_json(&j.incidence)?;
        let mut sites = Vec::with_capacity(inc.site_count());
        for s in inc.sites() {
            let label = inc.site_label(s).to_string();
            let st = j
                .sites
                .get(&label)
                .ok_or_else(|| Error::Invalid(format!("no structure given for site {label}")))?;
            sites.push(st.clone());
        }
        for key in j.sites.keys() {
            if !inc.site_labels().iter().any(|l| l.to_string() == *key) {
                return Err(Error::UnknownId(format!("site {key}")));
            }
        }
        let mut given: Vec<Option<PartialMap>> = vec![None; inc.link_count()];
        for (name, pairs) in &j.links {
            let e = inc.link_by_name(name).ok_or_else(|| Error::UnknownId(name.clone()))?;
            given[e] = Some(PartialMap::from_pairs(pairs.iter().copied())?);
        }
        let mut rho = Vec::with_capacity(inc.link_count());
        for e in 0..inc.link_count() {
            let i = inc.inv(e);
            let m = match (&given[e], &given[i]) {
                (Some(m), Some(r)) => {
                    if *r != m.inverse() {
                        return Err(Error::Invalid(format!(
                            "maps given for `{}` and its reversal `{}` are not mutually inverse",
                            inc.link(e).name,
                            inc.link(i).name
                        )));
                    }
                    m.clone()
                }
                (Some(m), None) => m.clone(),
                (None, Some(r)) => r.inverse(),
                (None, None) => PartialMap::empty(),
            };
            rho.push(m);
        }
        Self::from_sites(inc, sites, rho)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatternJson {
    pub incidence: IncidenceJson,
    pub sites: BTreeMap<String, RelStructure>,
    #[serde(default)]
    pub links: BTreeMap<String, Vec<(Elem, Elem)>>,
}

impl Serialize for AmalgamationPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AmalgamationPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PatternJson::deserialize(d)?;
        AmalgamationPattern::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Lists every violated pattern invariant.
pub fn validate_pattern(h: &AmalgamationPattern) -> ValidationReport {
    let mut r = ValidationReport::new();
    let inc = &h.incidence;
    r.extend("incidence: ", inc.validate());
    r.extend("carrier: ", h.carrier.validate());
    if h.rho.len() != inc.link_count() {
        r.error(format!("{} link maps for {} links", h.rho.len(), inc.link_count()));
        return r;
    }
    for &a in h.carrier.universe() {
        match h.site_of.get(&a) {
            None => r.error(format!("element {a} has no site")),
            Some(&s) if s >= inc.site_count() => r.error(format!("element {a} is assigned to a missing site")),
            _ => {}
        }
    }
    for &a in h.site_of.keys() {
        if !h.carrier.contains(a) {
            r.error(format!("site assignment mentions {a}, which is not in the carrier"));
        }
    }
    for s in inc.sites() {
        if h.site_elems[s].is_empty() {
            r.error(format!("site {} is empty", inc.site_label(s)));
        }
    }
    for (name, tuples) in h.carrier.relations() {
        for t in tuples {
            let sites: BTreeSet<_> = t.iter().filter_map(|a| h.site_of.get(a)).collect();
            if sites.len() > 1 {
                r.error(format!("tuple {t:?} of `{name}` crosses sites"));
            }
        }
    }
    for (e, l) in inc.links().iter().enumerate() {
        let m = &h.rho[e];
        for &(a, b) in m.pairs() {
            if h.site_of.get(&a) != Some(&l.src) {
                r.error(format!("ρ_{} maps {a}, which is not in its source site", l.name));
            }
            if h.site_of.get(&b) != Some(&l.tgt) {
                r.error(format!("ρ_{} hits {b}, which is not in its target site", l.name));
            }
        }
        match partial_isomorphism_violation(&h.carrier, &h.carrier, m) {
            Ok(Some((rel, t))) => r.error(format!("ρ_{} is not a partial isomorphism: `{rel}` on {t:?}", l.name)),
            Ok(None) => {}
            Err(err) => r.error(format!("ρ_{}: {err}", l.name)),
        }
        if l.inv < h.rho.len() && h.rho[l.inv] != m.inverse() {
            r.error(format!(
                "ρ_{} is not the inverse of ρ_{}",
                inc.link(l.inv).name,
                l.name
            ));
        }
    }
    r
}

/// `ρ_w`, the composition of the link maps along `w` (identity on `A_s` for
/// the empty walk at `s`).
pub fn rho_of_walk(h: &AmalgamationPattern, w: &Walk) -> Result<PartialMap> {
    let inc = &h.incidence;
    let checked = inc.walk(w.start, w.links.clone())?;
    if checked.end != w.end {
        return Err(Error::SortMismatch(format!(
            "walk claims to end at site {} but ends at {}",
            w.end, checked.end
        )));
    }
    let mut m = PartialMap::identity(h.site_elems[w.start].iter().copied());
    for &e in &w.links {
        m = m.then(&h.rho[e]);
    }
    Ok(m)
}

/// The partition of the carrier generated by `a ≈ ρ_e(a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxPartition {
    /// Classes ordered by least element, each sorted ascending.
    pub classes: Vec<Vec<Elem>>,
    pub class_of: BTreeMap<Elem, usize>,
}

pub fn approx(h: &AmalgamationPattern) -> ApproxPartition {
    let elems: Vec<Elem> = h.carrier.universe().iter().copied().collect();
    let ix: BTreeMap<Elem, usize> = elems.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut uf = UnionFind::new(elems.len());
    for m in &h.rho {
        for &(a, b) in m.pairs() {
            uf.union(ix[&a], ix[&b]);
        }
    }
    let classes: Vec<Vec<Elem>> = uf
        .classes()
        .into_iter()
        .map(|c| c.into_iter().map(|i| elems[i]).collect())
        .collect();
    let class_of = classes
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.iter().map(move |&a| (a, k)))
        .collect();
    ApproxPartition { classes, class_of }
}

/// The exploded view of a structure with respect to a cover, together with
/// the original element behind each carrier element.
#[derive(Clone, Debug)]
pub struct ExplodedView {
    pub pattern: AmalgamationPattern,
    /// Carrier element ↦ (original element, cover index).
    pub origin: BTreeMap<Elem, (Elem, usize)>,
}

/// Disjoint copies of `a↾cover[i]`, linked by the identity on the overlap of
/// every intersecting ordered pair of distinct members.
pub fn exploded_view(a: &RelStructure, cover: &[BTreeSet<Elem>]) -> Result<ExplodedView> {
    for (i, c) in cover.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::Invalid(format!("cover member {i} is empty")));
        }
        if let Some(x) = c.iter().find(|x| !a.contains(**x)) {
            return Err(Error::Invalid(format!("cover member {i} mentions {x}, not in the structure")));
        }
    }
    for &x in a.universe() {
        if !cover.iter().any(|c| c.contains(&x)) {
            return Err(Error::Precondition(format!("element {x} is not covered")));
        }
    }
    for (name, tuples) in a.relations() {
        for t in tuples {
            if !cover.iter().any(|c| t.iter().all(|x| c.contains(x))) {
                return Err(Error::Precondition(format!("tuple {t:?} of `{name}` lies in no cover member")));
            }
        }
    }

    let mut next: Elem = 0;
    let mut copy: Vec<BTreeMap<Elem, Elem>> = Vec::with_capacity(cover.len());
    let mut origin = BTreeMap::new();
    let mut sites = Vec::with_capacity(cover.len());
    for (i, c) in cover.iter().enumerate() {
        let mut m = BTreeMap::new();
        for &x in c {
            m.insert(x, next);
            origin.insert(next, (x, i));
            next += 1;
        }
        let f: PartialMap = m.iter().map(|(&x, &y)| (x, y)).collect();
        sites.push(a.restrict(c).rename(&f)?);
        copy.push(m);
    }

    let mut pairs = Vec::new();
    for i in 0..cover.len() {
        for j in 0..cover.len() {
            if i != j && !cover[i].is_disjoint(&cover[j]) {
                pairs.push((i, j));
            }
        }
    }
    let pos: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let links: Vec<Link> = pairs
        .iter()
        .map(|&(i, j)| Link {
            name: format!("x{i}_{j}"),
            src: i,
            tgt: j,
            inv: pos[&(j, i)],
        })
        .collect();
    let rho: Vec<PartialMap> = pairs
        .iter()
        .map(|&(i, j)| {
            cover[i]
                .intersection(&cover[j])
                .map(|x| (copy[i][x], copy[j][x]))
                .collect()
        })
        .collect();
    let labels = (0..cover.len() as u32).collect();
    let inc = IncidencePattern::new(labels, links)?;
    let pattern = AmalgamationPattern::from_sites(inc, sites, rho)?;
    Ok(ExplodedView { pattern, origin })
}
