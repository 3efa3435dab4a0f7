use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::incidence::{IncidencePattern, Link, LinkId, SiteId};
use crate::search::{find_symmetries, Budget, FunctionDecl, MultiSortedInstance, RelationDecl, SearchOutcome, SortDecl};
use crate::structure::{Elem, PartialMap, RelStructure, RelationSymbol, Signature};

use super::AmalgamationPattern;

const SORT_S: usize = 0;
const SORT_E: usize = 1;
const SORT_H: usize = 2;
const SORT_P: usize = 3;
const REL_PREFIX: &str = "sigma:";

/// Encodes a pattern with sorts `S` (site indices), `E` (link indices), `H`
/// (carrier elements) and `P` (one element per link-map pair), functions
/// `iota1`, `iota2`, `rev`, `delta`, `eta1`, `eta2`, `link`, the carrier
/// relations prefixed by `sigma:`, and a ternary `pair(e, a, b)` relation that
/// mirrors `P` and lets symmetry search prune early.
pub fn pattern_to_multisorted(h: &AmalgamationPattern) -> MultiSortedInstance {
    let inc = h.incidence();
    let mut pairs: Vec<(LinkId, Elem, Elem)> = Vec::new();
    for e in 0..inc.link_count() {
        for &(a, b) in h.rho(e).pairs() {
            pairs.push((e, a, b));
        }
    }
    let sorts = vec![
        SortDecl {
            name: "S".into(),
            elements: inc.sites().map(|s| s as Elem).collect(),
        },
        SortDecl {
            name: "E".into(),
            elements: (0..inc.link_count() as Elem).collect(),
        },
        SortDecl {
            name: "H".into(),
            elements: h.carrier().universe().iter().copied().collect(),
        },
        SortDecl {
            name: "P".into(),
            elements: (0..pairs.len() as Elem).collect(),
        },
    ];
    let links = inc.links();
    let on_links = |f: &dyn Fn(&Link) -> usize| -> BTreeMap<Elem, Elem> {
        links
            .iter()
            .enumerate()
            .map(|(e, l)| (e as Elem, f(l) as Elem))
            .collect()
    };
    let functions = vec![
        FunctionDecl {
            name: "iota1".into(),
            domain: SORT_E,
            codomain: SORT_S,
            map: on_links(&|l| l.src),
        },
        FunctionDecl {
            name: "iota2".into(),
            domain: SORT_E,
            codomain: SORT_S,
            map: on_links(&|l| l.tgt),
        },
        FunctionDecl {
            name: "rev".into(),
            domain: SORT_E,
            codomain: SORT_E,
            map: on_links(&|l| l.inv),
        },
        FunctionDecl {
            name: "delta".into(),
            domain: SORT_H,
            codomain: SORT_S,
            map: h
                .site_assignment()
                .iter()
                .map(|(&a, &s)| (a, s as Elem))
                .collect(),
        },
        FunctionDecl {
            name: "eta1".into(),
            domain: SORT_P,
            codomain: SORT_H,
            map: pairs.iter().enumerate().map(|(i, p)| (i as Elem, p.1)).collect(),
        },
        FunctionDecl {
            name: "eta2".into(),
            domain: SORT_P,
            codomain: SORT_H,
            map: pairs.iter().enumerate().map(|(i, p)| (i as Elem, p.2)).collect(),
        },
        FunctionDecl {
            name: "link".into(),
            domain: SORT_P,
            codomain: SORT_E,
            map: pairs
                .iter()
                .enumerate()
                .map(|(i, p)| (i as Elem, p.0 as Elem))
                .collect(),
        },
    ];
    let mut relations: Vec<RelationDecl> = h
        .signature()
        .symbols()
        .iter()
        .map(|sym| RelationDecl {
            name: format!("{REL_PREFIX}{}", sym.name),
            sorts: vec![SORT_H; sym.arity],
            tuples: h.carrier().relation(&sym.name).cloned().unwrap_or_default(),
        })
        .collect();
    relations.push(RelationDecl {
        name: "pair".into(),
        sorts: vec![SORT_E, SORT_H, SORT_H],
        tuples: pairs.iter().map(|&(e, a, b)| vec![e as Elem, a, b]).collect(),
    });
    MultiSortedInstance {
        sorts,
        functions,
        relations,
    }
}

/// Decodes an instance produced by [`pattern_to_multisorted`]. Site labels
/// are the `S` ids and link names are generated as `e<id>`.
pub fn pattern_from_multisorted(m: &MultiSortedInstance) -> Result<AmalgamationPattern> {
    let func = |name: &str| {
        m.functions
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::Invalid(format!("missing function `{name}`")))
    };
    let sort = |name: &str| {
        m.sort_index(name)
            .ok_or_else(|| Error::Invalid(format!("missing sort `{name}`")))
    };
    let s_sort = &m.sorts[sort("S")?].elements;
    let e_sort = &m.sorts[sort("E")?].elements;
    let h_sort = &m.sorts[sort("H")?].elements;
    let site_ix: BTreeMap<Elem, usize> = s_sort.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let link_ix: BTreeMap<Elem, usize> = e_sort.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let (i1, i2, rev) = (func("iota1")?, func("iota2")?, func("rev")?);
    let links = e_sort
        .iter()
        .map(|e| Link {
            name: format!("e{e}"),
            src: site_ix[&i1.map[e]],
            tgt: site_ix[&i2.map[e]],
            inv: link_ix[&rev.map[e]],
        })
        .collect();
    let inc = IncidencePattern::new(s_sort.to_vec(), links)?;

    let mut symbols = Vec::new();
    for r in &m.relations {
        if let Some(name) = r.name.strip_prefix(REL_PREFIX) {
            symbols.push(RelationSymbol {
                name: name.to_string(),
                arity: r.sorts.len(),
            });
        }
    }
    let mut carrier = RelStructure::new(Signature::new(symbols)?, h_sort.iter().copied());
    for r in &m.relations {
        if let Some(name) = r.name.strip_prefix(REL_PREFIX) {
            for t in &r.tuples {
                carrier.add_tuple(name, t.clone())?;
            }
        }
    }
    let delta = func("delta")?;
    let site_of = delta.map.iter().map(|(&a, s)| (a, site_ix[s])).collect();
    let (eta1, eta2, lk) = (func("eta1")?, func("eta2")?, func("link")?);
    let mut rho_pairs: Vec<Vec<(Elem, Elem)>> = vec![Vec::new(); e_sort.len()];
    for p in lk.map.keys() {
        rho_pairs[link_ix[&lk.map[p]]].push((eta1.map[p], eta2.map[p]));
    }
    let rho = rho_pairs
        .into_iter()
        .map(PartialMap::from_pairs)
        .collect::<Result<Vec<_>>>()?;
    AmalgamationPattern::new(inc, carrier, site_of, rho)
}

/// A symmetry of a pattern: permutations of sites, links and carrier
/// elements that commute with `ι`, reversal, `δ`, the link maps and the
/// carrier relations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct PatternSymmetry {
    pub sites: Vec<SiteId>,
    pub links: Vec<LinkId>,
    pub elems: BTreeMap<Elem, Elem>,
}

impl PatternSymmetry {
    pub fn identity(h: &AmalgamationPattern) -> Self {
        Self {
            sites: h.incidence().sites().collect(),
            links: (0..h.incidence().link_count()).collect(),
            elems: h.carrier().universe().iter().map(|&a| (a, a)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sites.iter().enumerate().all(|(i, &s)| i == s)
            && self.links.iter().enumerate().all(|(i, &e)| i == e)
            && self.elems.iter().all(|(a, b)| a == b)
    }

    /// Checks the defining commuting conditions directly.
    pub fn is_symmetry_of(&self, h: &AmalgamationPattern) -> bool {
        let inc = h.incidence();
        let perm = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>().len() == v.len();
        if self.sites.len() != inc.site_count() || self.links.len() != inc.link_count() || !perm(&self.sites) || !perm(&self.links) {
            return false;
        }
        let Ok(pe) = PartialMap::from_pairs(self.elems.iter().map(|(&a, &b)| (a, b))) else {
            return false;
        };
        if !h.carrier().is_automorphism(&pe) {
            return false;
        }
        for (e, &f) in self.links.iter().enumerate() {
            if inc.src(f) != self.sites[inc.src(e)]
                || inc.tgt(f) != self.sites[inc.tgt(e)]
                || inc.inv(f) != self.links[inc.inv(e)]
            {
                return false;
            }
            let moved: Option<PartialMap> = PartialMap::from_pairs(
                h.rho(e).pairs().iter().map(|&(a, b)| (self.elems[&a], self.elems[&b])),
            )
            .ok();
            if moved.as_ref() != Some(h.rho(f)) {
                return false;
            }
        }
        h.site_assignment()
            .iter()
            .all(|(a, &s)| h.site_of(self.elems[a]) == Some(self.sites[s]))
    }
}

/// Symmetries of `h`; with `rigid`, only those acting trivially on sites and
/// links.
pub fn pattern_symmetries(
    h: &AmalgamationPattern,
    rigid: bool,
    budget: &mut Budget,
) -> Result<SearchOutcome<PatternSymmetry>> {
    let m = pattern_to_multisorted(h);
    let rigid_sorts: &[&str] = if rigid { &["S", "E"] } else { &[] };
    let out = find_symmetries(&m, rigid_sorts, budget)?;
    let found = out
        .found
        .into_iter()
        .map(|sym| PatternSymmetry {
            sites: (0..h.incidence().site_count())
                .map(|s| sym.maps[SORT_S][&(s as Elem)] as usize)
                .collect(),
            links: (0..h.incidence().link_count())
                .map(|e| sym.maps[SORT_E][&(e as Elem)] as usize)
                .collect(),
            elems: sym.maps[SORT_H].clone(),
        })
        .collect();
    Ok(SearchOutcome {
        found,
        exhaustive: out.exhaustive,
        steps: out.steps,
    })
}
