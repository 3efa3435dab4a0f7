use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::SiteId;
use crate::pattern::{closure, AmalgamationPattern, WalkMapClosure, DEFAULT_CLOSURE_CAP};
use crate::report::ValidationReport;
use crate::structure::{partial_isomorphism_violation, Elem, PartialMap, RelStructure};

/// A chart `π_{u,s}: A↾u → A_s`, stored as a map from structure elements to
/// carrier elements of the pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    /// Index into [`Realisation::domains`].
    pub domain: usize,
    /// Site index in the pattern's incidence pattern.
    pub site: SiteId,
    pub map: PartialMap,
}

/// A structure together with an atlas of charts onto the sites of a pattern.
/// Equal co-ordinate domains are stored once; several charts may share one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realisation {
    structure: RelStructure,
    domains: Vec<BTreeSet<Elem>>,
    charts: Vec<Chart>,
    charts_of: BTreeMap<Elem, Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RealisationJson {
    structure: RelStructure,
    domains: Vec<BTreeSet<Elem>>,
    charts: Vec<Chart>,
}

impl Realisation {
    pub fn new(structure: RelStructure, domains: Vec<BTreeSet<Elem>>, charts: Vec<Chart>) -> Result<Self> {
        for (i, c) in charts.iter().enumerate() {
            let dom = domains
                .get(c.domain)
                .ok_or_else(|| Error::Invalid(format!("chart {i} names domain {} which does not exist", c.domain)))?;
            if &c.map.domain_set() != dom {
                return Err(Error::Invalid(format!("chart {i} is not defined exactly on its domain")));
            }
        }
        if let Some(x) = domains.iter().flatten().find(|x| !structure.contains(**x)) {
            return Err(Error::Invalid(format!("domain element {x} is not in the structure")));
        }
        let mut charts_of: BTreeMap<Elem, Vec<usize>> = BTreeMap::new();
        for (i, c) in charts.iter().enumerate() {
            for &x in &domains[c.domain] {
                charts_of.entry(x).or_default().push(i);
            }
        }
        Ok(Self {
            structure,
            domains,
            charts,
            charts_of,
        })
    }

    /// Builds the atlas from `(domain, site, map)` triples, merging equal
    /// domains in order of first appearance.
    pub fn from_charts(structure: RelStructure, charts: Vec<(BTreeSet<Elem>, SiteId, PartialMap)>) -> Self {
        let mut domains: Vec<BTreeSet<Elem>> = Vec::new();
        let mut index: HashMap<BTreeSet<Elem>, usize> = HashMap::new();
        let mut out = Vec::with_capacity(charts.len());
        for (dom, site, map) in charts {
            let d = *index.entry(dom.clone()).or_insert_with(|| {
                domains.push(dom);
                domains.len() - 1
            });
            out.push(Chart { domain: d, site, map });
        }
        Self::new(structure, domains, out).expect("charts are defined on their domains")
    }

    pub fn structure(&self) -> &RelStructure {
        &self.structure
    }

    pub fn domains(&self) -> &[BTreeSet<Elem>] {
        &self.domains
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, i: usize) -> &Chart {
        &self.charts[i]
    }

    pub fn chart_domain(&self, i: usize) -> &BTreeSet<Elem> {
        &self.domains[self.charts[i].domain]
    }

    /// Charts whose domain contains `x`, ascending.
    pub fn charts_containing(&self, x: Elem) -> &[usize] {
        self.charts_of.get(&x).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Charts onto site `s`, ascending.
    pub fn charts_at(&self, s: SiteId) -> Vec<usize> {
        (0..self.charts.len()).filter(|&i| self.charts[i].site == s).collect()
    }

    /// Indices of charts whose domain meets chart `i`'s, excluding `i`.
    pub fn overlapping(&self, i: usize) -> BTreeSet<usize> {
        self.chart_domain(i)
            .iter()
            .flat_map(|&x| self.charts_containing(x).iter().copied())
            .filter(|&j| j != i)
            .collect()
    }

    /// `π_j ∘ π_i^{-1}` on `π_i(u_i ∩ u_j)`.
    pub fn transition(&self, i: usize, j: usize) -> PartialMap {
        self.charts[i].map.inverse().then(&self.charts[j].map)
    }

    /// The same realisation without chart `i`; domains left without charts
    /// are dropped.
    pub fn without_chart(&self, i: usize) -> Self {
        let kept: Vec<(BTreeSet<Elem>, SiteId, PartialMap)> = self
            .charts
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(k, c)| (self.chart_domain(k).clone(), c.site, c.map.clone()))
            .collect();
        Self::from_charts(self.structure.clone(), kept)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("realisation serializes")
    }
}

impl Serialize for Realisation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RealisationJson {
            structure: self.structure.clone(),
            domains: self.domains.clone(),
            charts: self.charts.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Realisation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = RealisationJson::deserialize(d)?;
        Realisation::new(j.structure, j.domains, j.charts).map_err(serde::de::Error::custom)
    }
}

/// Checks that `r` realises `h`: charts are isomorphisms onto the sites,
/// every site is charted, the atlas covers all elements and tuples, and
/// conditions (i) and (ii) hold. Condition (i) is checked for every chart.
pub fn verify_realisation(r: &Realisation, h: &AmalgamationPattern) -> Result<ValidationReport> {
    let all = vec![true; r.charts().len()];
    verify_realisation_on(r, h, &all)
}

/// As [`verify_realisation`], checking condition (i) only for the charts
/// flagged in `extend`. Used for truncated realisations whose boundary charts
/// lack some neighbours.
pub fn verify_realisation_on(r: &Realisation, h: &AmalgamationPattern, extend: &[bool]) -> Result<ValidationReport> {
    let c = closure(h, DEFAULT_CLOSURE_CAP)?;
    Ok(verify_with_closure(r, h, &c, extend))
}

pub(crate) fn verify_with_closure(
    r: &Realisation,
    h: &AmalgamationPattern,
    cl: &WalkMapClosure,
    extend: &[bool],
) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let inc = h.incidence();
    let a = r.structure();
    if a.signature() != h.signature() {
        rep.error("structure and pattern use different signatures");
        return rep;
    }
    for (i, ch) in r.charts().iter().enumerate() {
        if ch.site >= inc.site_count() {
            rep.error(format!("chart {i} targets unknown site {}", ch.site));
            continue;
        }
        let site: BTreeSet<Elem> = h.site_elements(ch.site).iter().copied().collect();
        if ch.map.image() != site || ch.map.len() != site.len() {
            rep.error(format!(
                "chart {i} is not a bijection onto site {}",
                inc.site_label(ch.site)
            ));
            continue;
        }
        match partial_isomorphism_violation(a, h.carrier(), &ch.map) {
            Ok(None) => {}
            Ok(Some((rel, t))) => rep.error(format!("chart {i} breaks `{rel}` at {t:?}")),
            Err(e) => rep.error(format!("chart {i}: {e}")),
        }
    }
    if !rep.is_ok() {
        return rep;
    }
    for s in inc.sites() {
        if !r.charts().iter().any(|c| c.site == s) {
            rep.error(format!("no chart onto site {}", inc.site_label(s)));
        }
    }
    for &x in a.universe() {
        if r.charts_containing(x).is_empty() {
            rep.error(format!("element {x} lies in no co-ordinate domain"));
        }
    }
    for (name, tuples) in a.relations() {
        for t in tuples {
            if !r.domains().iter().any(|d| t.iter().all(|x| d.contains(x))) {
                rep.error(format!("tuple {t:?} of `{name}` lies in no co-ordinate domain"));
            }
        }
    }

    // (i): every link is realised at every chart by some neighbouring chart.
    for (i, ch) in r.charts().iter().enumerate() {
        if !extend.get(i).copied().unwrap_or(true) {
            continue;
        }
        for &e in inc.outgoing(ch.site) {
            let rho = h.rho(e);
            let target = inc.tgt(e);
            let candidates: Vec<usize> = match rho.pairs().first() {
                Some(&(p, _)) => {
                    let x = ch.map.inverse().get(p).expect("chart is onto its site");
                    r.charts_containing(x).to_vec()
                }
                None => (0..r.charts().len()).collect(),
            };
            let ok = candidates
                .into_iter()
                .any(|j| r.chart(j).site == target && &r.transition(i, j) == rho);
            if !ok {
                rep.error(format!(
                    "condition (i) fails at chart {i} for link `{}`",
                    inc.link(e).name
                ));
            }
        }
    }

    // (ii): every overlap is induced by a walk.
    for i in 0..r.charts().len() {
        for j in r.overlapping(i) {
            let m = r.transition(i, j);
            let (s, t) = (r.chart(i).site, r.chart(j).site);
            if cl.lookup(s, t, &m).is_none() {
                rep.error(format!("condition (ii) fails for charts ({i}, {j}): overlap {m} is not a walk map"));
            }
        }
    }
    rep
}
