//! Seeded random generators for patterns, complete patterns and hypergraphs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hypergraph::Hypergraph;
use crate::incidence::{IncidencePattern, Link, SiteId};
use crate::pattern::AmalgamationPattern;
use crate::structure::{partial_isomorphism_violation, Elem, PartialMap, RelStructure, Signature};

pub const DEFAULT_SEED: u64 = 0x5eed;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size bounds for [`random_pattern`].
#[derive(Clone, Copy, Debug)]
pub struct PatternBounds {
    pub max_sites: usize,
    pub max_elems: usize,
    pub max_links: usize,
}

impl Default for PatternBounds {
    fn default() -> Self {
        Self {
            max_sites: 3,
            max_elems: 8,
            max_links: 6,
        }
    }
}

/// Random link layout: `(src, tgt, self_inverse)` per reversal class, with at
/// most `max_links` links in total.
fn random_links(rng: &mut impl Rng, sites: usize, max_links: usize) -> Vec<(SiteId, SiteId, bool)> {
    let target = rng.gen_range(0..=max_links);
    let mut out = Vec::new();
    let mut count = 0;
    let mut tries = 0;
    while count < target && tries < 4 * max_links + 4 {
        tries += 1;
        let (s, t) = (rng.gen_range(0..sites), rng.gen_range(0..sites));
        if s == t && rng.gen_bool(0.4) {
            out.push((s, t, true));
            count += 1;
        } else if count + 2 <= target {
            out.push((s, t, false));
            count += 2;
        }
    }
    out
}

fn assemble(
    sites: Vec<RelStructure>,
    layout: &[(SiteId, SiteId, bool)],
    maps: Vec<PartialMap>,
) -> AmalgamationPattern {
    let mut links = Vec::new();
    let mut rho = Vec::new();
    for (k, (&(s, t, selfinv), m)) in layout.iter().zip(maps).enumerate() {
        let e = links.len();
        if selfinv {
            links.push(Link {
                name: format!("l{k}"),
                src: s,
                tgt: t,
                inv: e,
            });
            rho.push(m);
        } else {
            links.push(Link {
                name: format!("l{k}"),
                src: s,
                tgt: t,
                inv: e + 1,
            });
            links.push(Link {
                name: format!("l{k}r"),
                src: t,
                tgt: s,
                inv: e,
            });
            rho.push(m.clone());
            rho.push(m.inverse());
        }
    }
    let inc = IncidencePattern::new((0..sites.len() as u32).collect(), links).expect("generated links are in range");
    AmalgamationPattern::from_sites(inc, sites, rho).expect("generated pattern is valid")
}

fn random_graph(rng: &mut impl Rng, elems: &[Elem], density: f64) -> RelStructure {
    let mut s = RelStructure::new(Signature::graph(), elems.iter().copied());
    for &a in elems {
        for &b in elems {
            if a != b && rng.gen_bool(density) {
                s.add_tuple("E", vec![a, b]).unwrap();
            }
        }
    }
    s
}

fn is_partial_iso(a: &RelStructure, b: &RelStructure, pairs: &BTreeMap<Elem, Elem>) -> bool {
    let Ok(m) = PartialMap::from_pairs(pairs.iter().map(|(&x, &y)| (x, y))) else {
        return false;
    };
    matches!(partial_isomorphism_violation(a, b, &m), Ok(None))
}

/// A random partial isomorphism from `a` to `b`, grown pair by pair.
fn random_partial_iso(rng: &mut impl Rng, a: &RelStructure, b: &RelStructure, keep: f64) -> PartialMap {
    let mut dom: Vec<Elem> = a.universe().iter().copied().collect();
    dom.shuffle(rng);
    let mut pairs = BTreeMap::new();
    let mut used = BTreeSet::new();
    for x in dom {
        if !rng.gen_bool(keep) {
            continue;
        }
        let mut cands: Vec<Elem> = b.universe().iter().copied().filter(|y| !used.contains(y)).collect();
        cands.shuffle(rng);
        for y in cands {
            pairs.insert(x, y);
            if is_partial_iso(a, b, &pairs) {
                used.insert(y);
                break;
            }
            pairs.remove(&x);
        }
    }
    PartialMap::from_pairs(pairs).unwrap()
}

/// A random partial isomorphism of `a` that is its own inverse.
fn random_partial_involution(rng: &mut impl Rng, a: &RelStructure, keep: f64) -> PartialMap {
    let mut dom: Vec<Elem> = a.universe().iter().copied().collect();
    dom.shuffle(rng);
    let mut pairs: BTreeMap<Elem, Elem> = BTreeMap::new();
    for &x in &dom {
        if pairs.contains_key(&x) || !rng.gen_bool(keep) {
            continue;
        }
        let mut cands: Vec<Elem> = dom.iter().copied().filter(|y| !pairs.contains_key(y)).collect();
        cands.shuffle(rng);
        for y in cands {
            pairs.insert(x, y);
            pairs.insert(y, x);
            if is_partial_iso(a, a, &pairs) {
                break;
            }
            pairs.remove(&x);
            pairs.remove(&y);
        }
    }
    PartialMap::from_pairs(pairs).unwrap()
}

/// A random pattern of directed graphs: between one and `max_sites` nonempty
/// sites holding at most `max_elems` elements together, and at most
/// `max_links` links carrying random partial isomorphisms.
pub fn random_pattern(rng: &mut impl Rng, bounds: PatternBounds) -> AmalgamationPattern {
    let max_sites = bounds.max_sites.clamp(1, bounds.max_elems.max(1));
    let k = rng.gen_range(1..=max_sites);
    let total = rng.gen_range(k..=bounds.max_elems.max(k));
    let mut sizes = vec![1usize; k];
    for _ in k..total {
        sizes[rng.gen_range(0..k)] += 1;
    }
    let density = *[0.0, 0.2, 0.4].choose(rng).unwrap();
    let keep = *[0.5, 0.8, 1.0].choose(rng).unwrap();
    let mut next = 0;
    let sites: Vec<RelStructure> = sizes
        .iter()
        .map(|&n| {
            let elems: Vec<Elem> = (next..next + n as Elem).collect();
            next += n as Elem;
            random_graph(rng, &elems, density)
        })
        .collect();
    let layout = random_links(rng, k, bounds.max_links);
    let maps = layout
        .iter()
        .map(|&(s, t, selfinv)| {
            if selfinv {
                random_partial_involution(rng, &sites[s], keep)
            } else {
                random_partial_iso(rng, &sites[s], &sites[t], keep)
            }
        })
        .collect();
    assemble(sites, &layout, maps)
}

/// A random complete pattern: `sites` copies of an `n`-element structure
/// that is either edgeless or a directed cycle, with link maps that are
/// isomorphisms between the copies.
pub fn random_complete_pattern(rng: &mut impl Rng, sites: usize, n: usize, max_links: usize) -> AmalgamationPattern {
    let sites = sites.max(1);
    let n = n.max(1);
    let cyclic = n >= 3 && rng.gen_bool(0.5);
    let copies: Vec<RelStructure> = (0..sites)
        .map(|s| {
            let base = (s * n) as Elem;
            let elems: Vec<Elem> = (base..base + n as Elem).collect();
            if cyclic {
                let edges: Vec<(Elem, Elem)> = (0..n).map(|i| (elems[i], elems[(i + 1) % n])).collect();
                RelStructure::graph(elems, &edges).unwrap()
            } else {
                RelStructure::new(Signature::graph(), elems)
            }
        })
        .collect();
    let layout = random_links(rng, sites, max_links);
    let maps = layout
        .iter()
        .map(|&(s, t, selfinv)| {
            let (bs, bt) = ((s * n) as Elem, (t * n) as Elem);
            let perm: Vec<usize> = if cyclic {
                let shifts: Vec<usize> = if selfinv {
                    if n.is_multiple_of(2) {
                        vec![0, n / 2]
                    } else {
                        vec![0]
                    }
                } else {
                    (0..n).collect()
                };
                let k = *shifts.choose(rng).unwrap();
                (0..n).map(|i| (i + k) % n).collect()
            } else if selfinv {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(rng);
                let mut p: Vec<usize> = (0..n).collect();
                for pair in idx.chunks(2) {
                    if pair.len() == 2 && rng.gen_bool(0.7) {
                        p[pair[0]] = pair[1];
                        p[pair[1]] = pair[0];
                    }
                }
                p
            } else {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                p
            };
            PartialMap::from_pairs((0..n).map(|i| (bs + i as Elem, bt + perm[i] as Elem))).unwrap()
        })
        .collect();
    assemble(copies, &layout, maps)
}

/// A random hypergraph on `0..v` for `v ≤ max_vertices`, with at most
/// `max_edges` nonempty hyperedges covering every vertex.
pub fn random_hypergraph(rng: &mut impl Rng, max_vertices: usize, max_edges: usize) -> Hypergraph {
    let v = rng.gen_range(1..=max_vertices.max(1)) as Elem;
    let m = rng.gen_range(1..=max_edges.max(1));
    let mut edges: Vec<BTreeSet<Elem>> = (0..m)
        .map(|_| {
            let size = rng.gen_range(1..=v.min(4));
            let mut all: Vec<Elem> = (0..v).collect();
            all.shuffle(rng);
            all.into_iter().take(size as usize).collect()
        })
        .collect();
    for x in 0..v {
        if !edges.iter().any(|e| e.contains(&x)) {
            let i = rng.gen_range(0..edges.len());
            edges[i].insert(x);
        }
    }
    Hypergraph::new((0..v).collect(), edges).expect("edges lie in the vertex set")
}

/// A random complete pattern over `inc` without relations: every site holds
/// `points` fresh elements and every link a random bijection, inverse to the
/// map of its reversal. Self-inverse links get involutions.
pub fn random_action_pattern(rng: &mut impl Rng, inc: &IncidencePattern, points: usize) -> AmalgamationPattern {
    let points = points.max(1);
    let base = |s: SiteId| (s * points) as Elem;
    let sites = inc
        .sites()
        .map(|s| RelStructure::new(Signature::empty(), base(s)..base(s) + points as Elem))
        .collect();
    let mut rho: Vec<Option<PartialMap>> = vec![None; inc.link_count()];
    for e in 0..inc.link_count() {
        if rho[e].is_some() {
            continue;
        }
        let mut p: Vec<usize> = (0..points).collect();
        if inc.inv(e) == e {
            let mut idx = p.clone();
            idx.shuffle(rng);
            for pair in idx.chunks(2) {
                if pair.len() == 2 && rng.gen_bool(0.7) {
                    p.swap(pair[0], pair[1]);
                }
            }
        } else {
            p.shuffle(rng);
        }
        let (bs, bt) = (base(inc.src(e)), base(inc.tgt(e)));
        let m = PartialMap::from_pairs((0..points).map(|i| (bs + i as Elem, bt + p[i] as Elem))).unwrap();
        rho[inc.inv(e)] = Some(m.inverse());
        rho[e] = Some(m);
    }
    AmalgamationPattern::from_sites(inc.clone(), sites, rho.into_iter().map(Option::unwrap).collect())
        .expect("action pattern is valid")
}
