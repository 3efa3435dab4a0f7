use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::incidence::{LinkId, SiteId, Walk};
use crate::report::Verdict;
use crate::structure::PartialMap;

use super::AmalgamationPattern;

/// Default bound on the number of closure entries.
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// A sorted walk map `(s, s', ρ_w)` with a shortest witness walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureEntry {
    pub src: SiteId,
    pub tgt: SiteId,
    pub map: PartialMap,
    pub witness: Walk,
}

/// All walk-induced maps of a pattern, keyed by their sort pair and map.
#[derive(Clone, Debug)]
pub struct WalkMapClosure {
    entries: Vec<ClosureEntry>,
    index: HashMap<(SiteId, SiteId, PartialMap), usize>,
    by_pair: HashMap<(SiteId, SiteId), Vec<usize>>,
}

impl WalkMapClosure {
    pub fn entries(&self) -> &[ClosureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, src: SiteId, tgt: SiteId, map: &PartialMap) -> Option<&ClosureEntry> {
        self.index
            .get(&(src, tgt, map.clone()))
            .map(|&i| &self.entries[i])
    }

    /// Entries with the given sorts, in discovery order.
    pub fn at(&self, src: SiteId, tgt: SiteId) -> impl Iterator<Item = &ClosureEntry> {
        self.by_pair
            .get(&(src, tgt))
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }

    pub fn sort_pairs(&self) -> Vec<(SiteId, SiteId)> {
        let mut v: Vec<_> = self.by_pair.keys().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn max_witness_len(&self) -> usize {
        self.entries.iter().map(|e| e.witness.len()).max().unwrap_or(0)
    }

    /// A loop entry that moves some point.
    pub fn coherence_violation(&self) -> Option<&ClosureEntry> {
        self.entries
            .iter()
            .find(|e| e.src == e.tgt && !e.map.is_sub_identity())
    }

    pub fn simplicity_violation(&self, h: &AmalgamationPattern) -> Option<SimplicityWitness> {
        let inc = h.incidence();
        for e in 0..inc.link_count() {
            for entry in self.at(inc.src(e), inc.tgt(e)) {
                if !entry.map.is_subset_of(h.rho(e)) {
                    return Some(SimplicityWitness {
                        link: e,
                        walk: entry.witness.clone(),
                    });
                }
            }
        }
        None
    }

    /// Two entries at one sort pair with no common extension among entries.
    pub fn strong_coherence_violation(&self) -> Option<(&ClosureEntry, &ClosureEntry)> {
        for pair in self.sort_pairs() {
            let ids = &self.by_pair[&pair];
            let top = ids
                .iter()
                .copied()
                .max_by_key(|&i| (self.entries[i].map.len(), std::cmp::Reverse(i)))
                .unwrap();
            let top_map = &self.entries[top].map;
            if let Some(&bad) = ids.iter().find(|&&i| !self.entries[i].map.is_subset_of(top_map)) {
                return Some((&self.entries[top], &self.entries[bad]));
            }
        }
        None
    }
}

/// Breadth-first fixpoint of sorted walk maps, starting from the identities
/// `(s, s, id_{A_s})` and extending by every link. Each entry keeps the
/// shortlex-least walk that produces it.
pub fn closure(h: &AmalgamationPattern, cap: usize) -> Result<WalkMapClosure> {
    let inc = h.incidence();
    let mut out = WalkMapClosure {
        entries: Vec::new(),
        index: HashMap::new(),
        by_pair: HashMap::new(),
    };
    let mut queue = VecDeque::new();
    let push = |out: &mut WalkMapClosure, queue: &mut VecDeque<usize>, entry: ClosureEntry| -> Result<()> {
        let key = (entry.src, entry.tgt, entry.map.clone());
        if out.index.contains_key(&key) {
            return Ok(());
        }
        if out.entries.len() >= cap {
            return Err(Error::CapExceeded {
                cap,
                entries: out.entries.len(),
            });
        }
        let i = out.entries.len();
        out.index.insert(key, i);
        out.by_pair.entry((entry.src, entry.tgt)).or_default().push(i);
        out.entries.push(entry);
        queue.push_back(i);
        Ok(())
    };
    for s in inc.sites() {
        let entry = ClosureEntry {
            src: s,
            tgt: s,
            map: PartialMap::identity(h.site_elements(s).iter().copied()),
            witness: inc.empty_walk(s),
        };
        push(&mut out, &mut queue, entry)?;
    }
    while let Some(i) = queue.pop_front() {
        let (src, tgt) = (out.entries[i].src, out.entries[i].tgt);
        for &e in inc.outgoing(tgt) {
            let map = out.entries[i].map.then(h.rho(e));
            let t2 = inc.tgt(e);
            if out.index.contains_key(&(src, t2, map.clone())) {
                continue;
            }
            let mut witness = out.entries[i].witness.clone();
            witness.links.push(e);
            witness.end = t2;
            push(
                &mut out,
                &mut queue,
                ClosureEntry {
                    src,
                    tgt: t2,
                    map,
                    witness,
                },
            )?;
        }
    }
    Ok(out)
}

/// A walk whose map is not contained in `ρ_link`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SimplicityWitness {
    pub link: LinkId,
    pub walk: Walk,
}

/// Every loop walk induces a restriction of the identity. The witness is a
/// loop walk moving some point.
pub fn is_coherent(h: &AmalgamationPattern) -> Result<Verdict<Walk>> {
    let c = closure(h, DEFAULT_CLOSURE_CAP)?;
    Ok(match c.coherence_violation() {
        Some(e) => Verdict::Fails(e.witness.clone()),
        None => Verdict::Holds,
    })
}

/// Every walk map between `ι1(e)` and `ι2(e)` is contained in `ρ_e`.
pub fn is_simple(h: &AmalgamationPattern) -> Result<Verdict<SimplicityWitness>> {
    let c = closure(h, DEFAULT_CLOSURE_CAP)?;
    Ok(match c.simplicity_violation(h) {
        Some(w) => Verdict::Fails(w),
        None => Verdict::Holds,
    })
}

/// Any two walk maps with the same sorts have a common walk-map extension.
/// The witness is a pair of walks without one.
pub fn is_strongly_coherent(h: &AmalgamationPattern) -> Result<Verdict<(Walk, Walk)>> {
    let c = closure(h, DEFAULT_CLOSURE_CAP)?;
    Ok(match c.strong_coherence_violation() {
        Some((a, b)) => Verdict::Fails((a.witness.clone(), b.witness.clone())),
        None => Verdict::Holds,
    })
}
