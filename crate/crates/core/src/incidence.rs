//! Incidence patterns (sites, links, reversal) and walks over them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// Index of a site within an [`IncidencePattern`].
pub type SiteId = usize;
/// Index of a link within an [`IncidencePattern`].
pub type LinkId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Link {
    pub name: String,
    pub src: SiteId,
    pub tgt: SiteId,
    /// Index of the reversed link.
    pub inv: LinkId,
}

/// A finite directed multigraph with an involutive edge reversal.
///
/// Sites carry integer labels for serialization; links carry string names.
/// Construction does not enforce the reversal laws so that invalid inputs can
/// be reported by [`IncidencePattern::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidencePattern {
    site_labels: Vec<u32>,
    links: Vec<Link>,
    outgoing: Vec<Vec<LinkId>>,
}

impl IncidencePattern {
    pub fn new(site_labels: Vec<u32>, links: Vec<Link>) -> Result<Self> {
        let n = site_labels.len();
        for l in &links {
            if l.src >= n || l.tgt >= n {
                return Err(Error::Invalid(format!("link `{}` has an endpoint out of range", l.name)));
            }
            if l.inv >= links.len() {
                return Err(Error::Invalid(format!("link `{}` has a reversal out of range", l.name)));
            }
        }
        let mut outgoing = vec![Vec::new(); n];
        for (i, l) in links.iter().enumerate() {
            outgoing[l.src].push(i);
        }
        Ok(Self {
            site_labels,
            links,
            outgoing,
        })
    }

    /// Builds a pattern from `(name, src label, tgt label, reversal name)`
    /// tuples. Unknown names and labels are errors.
    pub fn from_spec(sites: &[u32], links: &[(&str, u32, u32, &str)]) -> Result<Self> {
        let site_ix: BTreeMap<u32, usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        if site_ix.len() != sites.len() {
            return Err(Error::Invalid("duplicate site label".into()));
        }
        let link_ix: BTreeMap<&str, usize> = links.iter().enumerate().map(|(i, l)| (l.0, i)).collect();
        if link_ix.len() != links.len() {
            return Err(Error::Invalid("duplicate link name".into()));
        }
        let site = |s: u32| site_ix.get(&s).copied().ok_or_else(|| Error::UnknownId(s.to_string()));
        let mut out = Vec::with_capacity(links.len());
        for &(name, src, tgt, inv) in links {
            out.push(Link {
                name: name.to_string(),
                src: site(src)?,
                tgt: site(tgt)?,
                inv: *link_ix.get(inv).ok_or_else(|| Error::UnknownId(inv.to_string()))?,
            });
        }
        Self::new(sites.to_vec(), out)
    }

    /// A single site labelled 0 with no links.
    pub fn single_site() -> Self {
        Self::new(vec![0], vec![]).unwrap()
    }

    pub fn site_count(&self) -> usize {
        self.site_labels.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn sites(&self) -> std::ops::Range<SiteId> {
        0..self.site_labels.len()
    }

    pub fn site_labels(&self) -> &[u32] {
        &self.site_labels
    }

    pub fn site_label(&self, s: SiteId) -> u32 {
        self.site_labels[s]
    }

    pub fn site_by_label(&self, label: u32) -> Option<SiteId> {
        self.site_labels.iter().position(|&l| l == label)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, e: LinkId) -> &Link {
        &self.links[e]
    }

    pub fn link_by_name(&self, name: &str) -> Option<LinkId> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn src(&self, e: LinkId) -> SiteId {
        self.links[e].src
    }

    pub fn tgt(&self, e: LinkId) -> SiteId {
        self.links[e].tgt
    }

    pub fn inv(&self, e: LinkId) -> LinkId {
        self.links[e].inv
    }

    pub fn outgoing(&self, s: SiteId) -> &[LinkId] {
        &self.outgoing[s]
    }

    /// The classes `{e, e⁻¹}`, each listed with its smaller id first and
    /// ordered by that id.
    pub fn link_atoms(&self) -> Vec<Vec<LinkId>> {
        let mut seen = vec![false; self.links.len()];
        let mut out = Vec::new();
        for e in 0..self.links.len() {
            if seen[e] {
                continue;
            }
            let i = self.inv(e);
            seen[e] = true;
            seen[i] = true;
            if i == e {
                out.push(vec![e]);
            } else {
                out.push(vec![e.min(i), e.max(i)]);
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        let mut labels = BTreeSet::new();
        for &l in &self.site_labels {
            if !labels.insert(l) {
                r.error(format!("site label {l} occurs twice"));
            }
        }
        let mut names = BTreeSet::new();
        for l in &self.links {
            if !names.insert(l.name.as_str()) {
                r.error(format!("link name `{}` occurs twice", l.name));
            }
        }
        for (e, l) in self.links.iter().enumerate() {
            let i = &self.links[l.inv];
            if i.inv != e {
                r.error(format!(
                    "reversal is not an involution: `{}`⁻¹ = `{}` but `{}`⁻¹ = `{}`",
                    l.name, i.name, i.name, self.links[i.inv].name
                ));
            }
            if i.src != l.tgt || i.tgt != l.src {
                r.error(format!(
                    "reversal of `{}` does not swap its endpoints (`{}` runs {}→{})",
                    l.name,
                    i.name,
                    self.site_labels[i.src],
                    self.site_labels[i.tgt]
                ));
            }
            if l.inv == e {
                r.warn(format!("link `{}` is its own reversal", l.name));
            }
        }
        r
    }

    /// A walk starting at `start` following `links`, checked for composability.
    pub fn walk(&self, start: SiteId, links: Vec<LinkId>) -> Result<Walk> {
        if start >= self.site_count() {
            return Err(Error::Invalid(format!("site index {start} out of range")));
        }
        let mut at = start;
        for (i, &e) in links.iter().enumerate() {
            if e >= self.links.len() {
                return Err(Error::Invalid(format!("link index {e} out of range")));
            }
            if self.src(e) != at {
                return Err(Error::SortMismatch(format!(
                    "step {i} uses `{}` from site {} but the walk is at site {}",
                    self.links[e].name,
                    self.site_labels[self.src(e)],
                    self.site_labels[at]
                )));
            }
            at = self.tgt(e);
        }
        Ok(Walk {
            start,
            end: at,
            links,
        })
    }

    /// A walk given by link names.
    pub fn walk_by_names(&self, start: SiteId, names: &[&str]) -> Result<Walk> {
        let links = names
            .iter()
            .map(|n| self.link_by_name(n).ok_or_else(|| Error::UnknownId((*n).to_string())))
            .collect::<Result<Vec<_>>>()?;
        self.walk(start, links)
    }

    /// Walk following `links` from the source of the first one.
    pub fn walk_from_links(&self, links: Vec<LinkId>) -> Result<Walk> {
        let start = *links
            .first()
            .ok_or_else(|| Error::Invalid("empty link list has no anchor site".into()))?;
        self.walk(self.src(start), links)
    }

    pub fn empty_walk(&self, s: SiteId) -> Walk {
        Walk {
            start: s,
            end: s,
            links: vec![],
        }
    }

    pub fn reverse(&self, w: &Walk) -> Walk {
        Walk {
            start: w.end,
            end: w.start,
            links: w.links.iter().rev().map(|&e| self.inv(e)).collect(),
        }
    }

    /// Cancels adjacent `e e⁻¹` factors.
    pub fn reduce(&self, w: &Walk) -> Walk {
        let mut out: Vec<LinkId> = Vec::with_capacity(w.links.len());
        for &e in &w.links {
            if out.last().is_some_and(|&l| self.inv(l) == e) {
                out.pop();
            } else {
                out.push(e);
            }
        }
        Walk {
            start: w.start,
            end: w.end,
            links: out,
        }
    }

    pub fn is_reduced(&self, w: &Walk) -> bool {
        w.links.windows(2).all(|p| self.inv(p[0]) != p[1])
    }

    pub fn format_walk(&self, w: &Walk) -> String {
        if w.links.is_empty() {
            format!("λ_{}", self.site_labels[w.start])
        } else {
            w.links
                .iter()
                .map(|&e| self.links[e].name.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }

    pub fn to_json(&self) -> IncidenceJson {
        IncidenceJson {
            sites: self.site_labels.clone(),
            links: self
                .links
                .iter()
                .map(|l| LinkJson {
                    id: l.name.clone(),
                    src: self.site_labels[l.src],
                    tgt: self.site_labels[l.tgt],
                    inv: self.links[l.inv].name.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &IncidenceJson) -> Result<Self> {
        let specs: Vec<(&str, u32, u32, &str)> = j
            .links
            .iter()
            .map(|l| (l.id.as_str(), l.src, l.tgt, l.inv.as_str()))
            .collect();
        Self::from_spec(&j.sites, &specs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkJson {
    pub id: String,
    pub src: u32,
    pub tgt: u32,
    pub inv: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceJson {
    pub sites: Vec<u32>,
    pub links: Vec<LinkJson>,
}

impl Serialize for IncidencePattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IncidencePattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = IncidenceJson::deserialize(d)?;
        IncidencePattern::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// A composable link sequence with explicit endpoints, so that empty walks at
/// different sites are distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Walk {
    pub start: SiteId,
    pub end: SiteId,
    pub links: Vec<LinkId>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.links.is_empty() {
            write!(f, "λ@{}", self.start)
        } else {
            let parts: Vec<String> = self.links.iter().map(|e| e.to_string()).collect();
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// `w · w'`, without cancellation.
pub fn concat_walks(w: &Walk, w2: &Walk) -> Result<Walk> {
    if w.end != w2.start {
        return Err(Error::SortMismatch(format!(
            "first walk ends at site {} but second starts at site {}",
            w.end, w2.start
        )));
    }
    let mut links = w.links.clone();
    links.extend_from_slice(&w2.links);
    Ok(Walk {
        start: w.start,
        end: w2.end,
        links,
    })
}

/// All walks of length at most `max_len`, ordered by length, then start
/// site, then link ids lexicographically.
pub fn walks_up_to(inc: &IncidencePattern, max_len: usize) -> Vec<Walk> {
    let mut out: Vec<Walk> = inc.sites().map(|s| inc.empty_walk(s)).collect();
    let mut frontier_start = 0;
    for _ in 0..max_len {
        let frontier_end = out.len();
        for i in frontier_start..frontier_end {
            for &e in inc.outgoing(out[i].end) {
                let mut w = out[i].clone();
                w.links.push(e);
                w.end = inc.tgt(e);
                out.push(w);
            }
        }
        frontier_start = frontier_end;
    }
    out
}

/// Sites reachable from `s`, using only links in `allowed` when given.
pub fn reachable(inc: &IncidencePattern, s: SiteId, allowed: Option<&[bool]>) -> Vec<bool> {
    let mut seen = vec![false; inc.site_count()];
    seen[s] = true;
    let mut stack = vec![s];
    while let Some(x) = stack.pop() {
        for &e in inc.outgoing(x) {
            if allowed.is_some_and(|a| !a[e]) {
                continue;
            }
            let y = inc.tgt(e);
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn loop_pair() -> IncidencePattern {
        IncidencePattern::from_spec(&[0], &[("e", 0, 0, "einv"), ("einv", 0, 0, "e")]).unwrap()
    }

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

    #[test]
    fn loop_pair_is_valid() {
        assert!(loop_pair().validate().is_ok());
    }

    #[test]
    fn broken_involution_is_reported() {
        let inc = IncidencePattern::from_spec(
            &[0],
            &[("a", 0, 0, "b"), ("b", 0, 0, "c"), ("c", 0, 0, "a")],
        )
        .unwrap();
        let r = inc.validate();
        assert!(!r.is_ok());
        assert!(r.errors.iter().any(|e| e.contains("not an involution")));
    }

    #[test]
    fn endpoint_swap_is_checked() {
        let inc = IncidencePattern::from_spec(&[0, 1], &[("a", 0, 1, "b"), ("b", 0, 1, "a")]).unwrap();
        assert!(inc.validate().errors.iter().any(|e| e.contains("swap")));
    }

    #[test]
    fn self_inverse_link_warns() {
        let inc = IncidencePattern::from_spec(&[0], &[("t", 0, 0, "t")]).unwrap();
        let r = inc.validate();
        assert!(r.is_ok());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn moebius_incidence_is_valid() {
        assert!(moebius_incidence().validate().is_ok());
    }

    #[test]
    fn empty_walk_is_a_unit_for_concatenation() {
        let inc = moebius_incidence();
        let w = inc.walk_by_names(0, &["e1", "e2"]).unwrap();
        assert_eq!(concat_walks(&inc.empty_walk(0), &w).unwrap(), w);
        assert_eq!(concat_walks(&w, &inc.empty_walk(0)).unwrap(), w);
    }

    #[test]
    fn no_cancellation_at_walk_level() {
        let inc = moebius_incidence();
        let a = inc.walk_by_names(0, &["e1"]).unwrap();
        let b = inc.walk_by_names(1, &["e1inv"]).unwrap();
        let w = concat_walks(&a, &b).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!((w.start, w.end), (0, 0));
        assert_eq!(inc.reduce(&w).len(), 0);
    }

    #[test]
    fn mismatched_concatenation_fails() {
        let inc = moebius_incidence();
        let a = inc.walk_by_names(0, &["e1"]).unwrap();
        assert!(matches!(concat_walks(&a, &a), Err(Error::SortMismatch(_))));
    }

    #[test]
    fn walk_counts() {
        let inc = loop_pair();
        assert_eq!(walks_up_to(&inc, 0).len(), 1);
        assert_eq!(walks_up_to(&inc, 2).len(), 1 + 2 + 4);
        assert_eq!(walks_up_to(&moebius_incidence(), 1).len(), 2 + 4);
    }

    #[test]
    fn unknown_reversal_name_is_an_error() {
        assert!(IncidencePattern::from_spec(&[0], &[("a", 0, 0, "zz")]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let inc = moebius_incidence();
        let s = serde_json::to_string(&inc).unwrap();
        let back: IncidencePattern = serde_json::from_str(&s).unwrap();
        assert_eq!(inc, back);
    }
}
