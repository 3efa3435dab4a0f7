use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::incidence::{IncidencePattern, LinkId, SiteId, Walk};
use crate::pattern::{pattern_symmetries, AmalgamationPattern, PatternSymmetry, DEFAULT_CLOSURE_CAP};
use crate::report::Verdict;
use crate::search::{find_symmetries, Budget, FunctionDecl, MultiSortedInstance, SearchOutcome, SortDecl};
use crate::structure::{Elem, PartialMap};

use super::{extend_along_generators, GElem, Groupoid};

/// Every walk `w` with `w^G` a unit has `ρ_w ⊆ id`. Explores pairs
/// `(w^G, ρ_w)` breadth-first; the witness is a shortest offending walk.
pub fn is_compatible(g: &Groupoid, h: &AmalgamationPattern) -> Result<Verdict<Walk>> {
    if g.incidence() != h.incidence() {
        return Err(Error::Precondition("groupoid and pattern use different incidence patterns".into()));
    }
    let inc = h.incidence();
    let mut index: HashMap<(GElem, PartialMap), usize> = HashMap::new();
    let mut states: Vec<(GElem, PartialMap, Option<(usize, LinkId)>)> = Vec::new();
    let mut queue = VecDeque::new();
    for s in inc.sites() {
        let st = (g.unit(s), PartialMap::identity(h.site_elements(s).iter().copied()));
        index.insert(st.clone(), states.len());
        queue.push_back(states.len());
        states.push((st.0, st.1, None));
    }
    while let Some(i) = queue.pop_front() {
        let (x, map) = (states[i].0, states[i].1.clone());
        if g.is_unit(x) && !map.is_sub_identity() {
            let mut links = Vec::new();
            let mut k = i;
            while let Some((p, e)) = states[k].2 {
                links.push(e);
                k = p;
            }
            links.reverse();
            return Ok(Verdict::Fails(inc.walk(g.src(x), links)?));
        }
        for &e in inc.outgoing(g.tgt(x)) {
            let key = (g.mul(x, g.generator(e)), map.then(h.rho(e)));
            if index.contains_key(&key) {
                continue;
            }
            if states.len() >= DEFAULT_CLOSURE_CAP {
                return Err(Error::CapExceeded {
                    cap: DEFAULT_CLOSURE_CAP,
                    entries: states.len(),
                });
            }
            index.insert(key.clone(), states.len());
            queue.push_back(states.len());
            states.push((key.0, key.1, Some((i, e))));
        }
    }
    Ok(Verdict::Holds)
}

/// Symmetries of an incidence pattern as `(site permutation, link permutation)`.
pub fn incidence_symmetries(
    inc: &IncidencePattern,
    budget: &mut Budget,
) -> Result<SearchOutcome<(Vec<SiteId>, Vec<LinkId>)>> {
    let on_links = |f: &dyn Fn(LinkId) -> usize| -> BTreeMap<Elem, Elem> {
        (0..inc.link_count()).map(|e| (e as Elem, f(e) as Elem)).collect()
    };
    let m = MultiSortedInstance {
        sorts: vec![
            SortDecl {
                name: "S".into(),
                elements: inc.sites().map(|s| s as Elem).collect(),
            },
            SortDecl {
                name: "E".into(),
                elements: (0..inc.link_count() as Elem).collect(),
            },
        ],
        functions: vec![
            FunctionDecl {
                name: "iota1".into(),
                domain: 1,
                codomain: 0,
                map: on_links(&|e| inc.src(e)),
            },
            FunctionDecl {
                name: "iota2".into(),
                domain: 1,
                codomain: 0,
                map: on_links(&|e| inc.tgt(e)),
            },
            FunctionDecl {
                name: "rev".into(),
                domain: 1,
                codomain: 1,
                map: on_links(&|e| inc.inv(e)),
            },
        ],
        relations: vec![],
    };
    let out = find_symmetries(&m, &[], budget)?;
    Ok(SearchOutcome {
        found: out
            .found
            .into_iter()
            .map(|s| {
                (
                    inc.sites().map(|x| s.maps[0][&(x as Elem)] as SiteId).collect(),
                    (0..inc.link_count()).map(|e| s.maps[1][&(e as Elem)] as LinkId).collect(),
                )
            })
            .collect(),
        exhaustive: out.exhaustive,
        steps: out.steps,
    })
}

/// Every symmetry of the incidence pattern extends to an automorphism of `g`
/// sending `e^G` to `π(e)^G`. The witness is a symmetry that does not.
pub fn is_fully_symmetric_over_incidence(
    g: &Groupoid,
    budget: &mut Budget,
) -> Result<Verdict<(Vec<SiteId>, Vec<LinkId>)>> {
    let syms = incidence_symmetries(g.incidence(), budget)?;
    for (sites, links) in syms.found {
        if extend_along_generators(g, g, &sites, &links).is_none() {
            return Ok(Verdict::Fails((sites, links)));
        }
    }
    Ok(if syms.exhaustive { Verdict::Holds } else { Verdict::Unknown })
}

/// Every symmetry of `h` extends, on its incidence part, to an automorphism
/// of `g`. The witness is a symmetry that does not.
pub fn is_fully_symmetric_over(
    g: &Groupoid,
    h: &AmalgamationPattern,
    budget: &mut Budget,
) -> Result<Verdict<PatternSymmetry>> {
    if g.incidence() != h.incidence() {
        return Err(Error::Precondition("groupoid and pattern use different incidence patterns".into()));
    }
    let syms = pattern_symmetries(h, false, budget)?;
    for sym in syms.found {
        if extend_along_generators(g, g, &sym.sites, &sym.links).is_none() {
            return Ok(Verdict::Fails(sym));
        }
    }
    Ok(if syms.exhaustive { Verdict::Holds } else { Verdict::Unknown })
}
