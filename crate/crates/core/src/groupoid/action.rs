use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::incidence::SiteId;
use crate::pattern::AmalgamationPattern;
use crate::structure::{Elem, PartialMap, RelStructure, Signature};

use super::{cayley_incidence, GElem, Groupoid};

/// The groupoid generated by the link maps of a complete pattern, acting as
/// bijections between sites. Elements are `(ι1, ι2, permutation)` triples
/// numbered in breadth-first discovery order from the units.
pub fn groupoid_from_action(h: &AmalgamationPattern) -> Result<Groupoid> {
    groupoid_from_action_capped(h, usize::MAX)?
        .ok_or_else(|| Error::Internal("unbounded action groupoid reported overflow".into()))
}

/// As [`groupoid_from_action`], giving `None` once more than `max_size`
/// elements appear.
pub fn groupoid_from_action_capped(h: &AmalgamationPattern, max_size: usize) -> Result<Option<Groupoid>> {
    if let Some(e) = h.complete_violation() {
        return Err(Error::Precondition(format!(
            "link `{}` is not a bijection between its sites",
            h.incidence().link(e).name
        )));
    }
    let inc = h.incidence();
    let pos: HashMap<Elem, u32> = inc
        .sites()
        .flat_map(|s| h.site_elements(s).iter().enumerate().map(|(i, &a)| (a, i as u32)))
        .collect();
    let rho_ix: Vec<Vec<u32>> = (0..inc.link_count())
        .map(|e| {
            h.site_elements(inc.src(e))
                .iter()
                .map(|&a| pos[&h.rho(e).get(a).expect("complete link")])
                .collect()
        })
        .collect();

    type Key = (SiteId, SiteId, Vec<u32>);
    let mut index: HashMap<Key, GElem> = HashMap::new();
    let mut elems: Vec<Key> = Vec::new();
    for s in inc.sites() {
        let key = (s, s, (0..h.site_elements(s).len() as u32).collect());
        index.insert(key.clone(), elems.len());
        elems.push(key);
    }
    let mut i = 0;
    while i < elems.len() {
        let (s, t, perm) = elems[i].clone();
        for &e in inc.outgoing(t) {
            let next: Vec<u32> = perm.iter().map(|&x| rho_ix[e][x as usize]).collect();
            let key = (s, inc.tgt(e), next);
            if !index.contains_key(&key) {
                if elems.len() >= max_size {
                    return Ok(None);
                }
                index.insert(key.clone(), elems.len());
                elems.push(key);
            }
        }
        i += 1;
    }

    let units: Vec<GElem> = inc.sites().collect();
    let generators: Vec<GElem> = (0..inc.link_count())
        .map(|e| {
            let s = inc.src(e);
            index[&(s, inc.tgt(e), rho_ix[e].clone())]
        })
        .collect();
    let src = elems.iter().map(|k| k.0).collect();
    let tgt = elems.iter().map(|k| k.1).collect();
    let g = Groupoid::from_dense(inc.clone(), src, tgt, units, generators, |a, b| {
        let (s, _, pa) = &elems[a];
        let (_, t, pb) = &elems[b];
        let perm: Vec<u32> = pa.iter().map(|&x| pb[x as usize]).collect();
        index[&(*s, *t, perm)]
    });
    Ok(Some(g))
}

/// The groupoid over `G`'s incidence pattern induced by a groupoid `Ĝ` over
/// the Cayley incidence of `G`: site `s` carries every `Ĝ[*, g]` with
/// `ι2(g) = s`, and link `e` acts by `ĝ ↦ ĝ·e[g]^Ĝ` on `Ĝ[*, g]`.
pub fn tilde_groupoid(g: &Groupoid, ghat: &Groupoid) -> Result<Groupoid> {
    let cay = cayley_incidence(g);
    if ghat.incidence() != &cay {
        return Err(Error::Precondition(
            "second groupoid is not over the Cayley incidence of the first".into(),
        ));
    }
    let inc = g.incidence();
    let mut site_of = BTreeMap::new();
    for x in 0..ghat.len() {
        site_of.insert(x as Elem, g.tgt(ghat.tgt(x)));
    }
    let carrier = RelStructure::new(Signature::empty(), (0..ghat.len()).map(|x| x as Elem));
    let mut rho_pairs: Vec<Vec<(Elem, Elem)>> = vec![Vec::new(); inc.link_count()];
    let mut k = 0;
    for h in 0..g.len() {
        for &e in inc.outgoing(g.tgt(h)) {
            for x in ghat.elements_to(h) {
                rho_pairs[e].push((x as Elem, ghat.mul(x, ghat.generator(k)) as Elem));
            }
            k += 1;
        }
    }
    let rho = rho_pairs
        .into_iter()
        .map(PartialMap::from_pairs)
        .collect::<Result<Vec<_>>>()?;
    let coarse = AmalgamationPattern::new(inc.clone(), carrier, site_of, rho)?;
    groupoid_from_action(&coarse)
}
