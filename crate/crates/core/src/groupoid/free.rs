use std::collections::HashMap;

use crate::incidence::{IncidencePattern, LinkId, SiteId, Walk};

use super::cosets::{atom_count, CosetSpace};
use super::GElem;

/// Reduced walks of length at most `radius`, standing for the free groupoid
/// over an incidence pattern truncated to a ball around the units. Products
/// are defined whenever the reduced concatenation stays inside the ball.
#[derive(Clone, Debug)]
pub struct FreeTruncation {
    incidence: IncidencePattern,
    radius: usize,
    words: Vec<Walk>,
    index: HashMap<(SiteId, Vec<LinkId>), GElem>,
    atom_of: Vec<usize>,
}

impl FreeTruncation {
    pub fn new(incidence: &IncidencePattern, radius: usize) -> Self {
        let inc = incidence.clone();
        let mut words: Vec<Walk> = inc.sites().map(|s| inc.empty_walk(s)).collect();
        let mut frontier: Vec<GElem> = (0..words.len()).collect();
        for _ in 0..radius {
            let mut next = Vec::new();
            for &w in &frontier {
                let last = words[w].links.last().copied();
                for &e in inc.outgoing(words[w].end) {
                    if last.is_some_and(|l| inc.inv(l) == e) {
                        continue;
                    }
                    let mut v = words[w].clone();
                    v.links.push(e);
                    v.end = inc.tgt(e);
                    next.push(words.len());
                    words.push(v);
                }
            }
            frontier = next;
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| ((w.start, w.links.clone()), i))
            .collect();
        let mut atom_of = vec![0; inc.link_count()];
        for (i, a) in inc.link_atoms().iter().enumerate() {
            for &e in a {
                atom_of[e] = i;
            }
        }
        atom_count(&inc);
        Self {
            incidence: inc,
            radius,
            words,
            index,
            atom_of,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, g: GElem) -> &Walk {
        &self.words[g]
    }

    pub fn element_of(&self, w: &Walk) -> Option<GElem> {
        let r = self.incidence.reduce(w);
        self.index.get(&(r.start, r.links)).copied()
    }

    fn reduced_product(&self, a: &Walk, b: &Walk) -> Walk {
        let mut links = a.links.clone();
        for &e in &b.links {
            if links.last().is_some_and(|&l| self.incidence.inv(l) == e) {
                links.pop();
            } else {
                links.push(e);
            }
        }
        Walk {
            start: a.start,
            end: b.end,
            links,
        }
    }

    /// `reduce(g⁻¹·h)` as a link sequence, for `g`, `h` with the same source.
    fn quotient(&self, g: GElem, h: GElem) -> Walk {
        let inv = self.incidence.reverse(&self.words[g]);
        self.reduced_product(&inv, &self.words[h])
    }

    fn uses_only(&self, links: &[LinkId], mask: u64) -> bool {
        links.iter().all(|&e| mask >> self.atom_of[e] & 1 == 1)
    }
}

impl CosetSpace for FreeTruncation {
    fn incidence(&self) -> &IncidencePattern {
        &self.incidence
    }

    fn element_count(&self) -> usize {
        self.words.len()
    }

    fn unit(&self, s: SiteId) -> GElem {
        s
    }

    fn src(&self, g: GElem) -> SiteId {
        self.words[g].start
    }

    fn inverse(&self, g: GElem) -> GElem {
        let r = self.incidence.reverse(&self.words[g]);
        self.index[&(r.start, r.links)]
    }

    fn compose(&self, g: GElem, h: GElem) -> Option<GElem> {
        if self.words[g].end != self.words[h].start {
            return None;
        }
        let w = self.reduced_product(&self.words[g], &self.words[h]);
        self.index.get(&(w.start, w.links)).copied()
    }

    fn coset_members(&self, g: GElem, mask: u64) -> Vec<GElem> {
        let s = self.src(g);
        (0..self.words.len())
            .filter(|&h| self.words[h].start == s && self.uses_only(&self.quotient(g, h).links, mask))
            .collect()
    }

    fn in_coset(&self, g: GElem, mask: u64, h: GElem) -> bool {
        self.src(g) == self.src(h) && self.uses_only(&self.quotient(g, h).links, mask)
    }

    fn cosets_meet(&self, g: GElem, b: u64, h: GElem, c: u64) -> bool {
        // g·x = h·y with x over b, y over c iff reduce(h⁻¹g) splits as y·x⁻¹
        if self.src(g) != self.src(h) {
            return false;
        }
        let d = self.quotient(h, g).links;
        (0..=d.len()).any(|k| self.uses_only(&d[..k], c) && self.uses_only(&d[k..], b))
    }
}
