use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hypergraph::is_n_acyclic_hyp;
use crate::incidence::{IncidencePattern, LinkId};
use crate::pattern::{closure, AmalgamationPattern, DEFAULT_CLOSURE_CAP};
use crate::product::{atlas_hypergraph, direct_product, reduced_product};
use crate::report::Verdict;
use crate::search::{Budget, SearchOutcome};
use crate::structure::{Elem, PartialMap, RelStructure, Signature};

use super::{groupoid_from_action_capped, is_compatible, is_n_acyclic, is_simple_groupoid, Groupoid};

/// Parameters for [`search_groupoid_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidSearch {
    /// Required acyclicity `N`.
    pub acyclicity: usize,
    /// Candidates with more elements are discarded.
    pub max_size: usize,
    /// Largest number of free points per site in the permutation component.
    pub max_points: usize,
    /// Also require `H⊗G` to be simple and strongly coherent.
    pub realising_product: bool,
    /// Also require the atlas of the reduced product to be `N`-acyclic.
    pub acyclic_atlas: bool,
}

impl GroupoidSearch {
    pub fn new(acyclicity: usize, max_size: usize) -> Self {
        Self {
            acyclicity,
            max_size,
            max_points: 4,
            realising_product: false,
            acyclic_atlas: false,
        }
    }
}

/// Simple, `H`-compatible, `N`-acyclic groupoid over `inc` with at most
/// `max_size` elements; see [`search_groupoid_with`].
pub fn search_groupoid(
    inc: &IncidencePattern,
    h: &AmalgamationPattern,
    n: usize,
    max_size: usize,
    budget: &mut Budget,
) -> Result<SearchOutcome<Groupoid>> {
    if inc != h.incidence() {
        return Err(Error::Precondition("pattern is not over the given incidence pattern".into()));
    }
    search_groupoid_with(h, &GroupoidSearch::new(n, max_size), budget)
}

fn permutations(m: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..m as u32).collect();
    fn rec(k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out.sort();
    out
}

fn is_involution(p: &[u32]) -> bool {
    p.iter().enumerate().all(|(i, &j)| p[j as usize] == i as u32)
}

/// Builds complete patterns over `h`'s incidence pattern as actions on a
/// disjoint union of
/// * optionally, `h`'s sites padded to a common size, with each link map
///   extended to a bijection (fixing the remaining points of self-inverse
///   links), and
/// * `m` fresh points per site permuted independently per link pair.
///
/// The padded component makes every candidate compatible with `h`.
struct Candidates<'a> {
    h: &'a AmalgamationPattern,
    atoms: Vec<Vec<LinkId>>,
    pad: usize,
}

impl<'a> Candidates<'a> {
    fn new(h: &'a AmalgamationPattern) -> Self {
        let inc = h.incidence();
        Self {
            h,
            atoms: inc.link_atoms(),
            pad: inc.sites().map(|s| h.site_elements(s).len()).max().unwrap_or(0),
        }
    }

    fn completion(&self, e: LinkId) -> Vec<u32> {
        let inc = self.h.incidence();
        let pos = |s, a: Elem| self.h.site_elements(s).iter().position(|&x| x == a).unwrap() as u32;
        let mut perm = vec![u32::MAX; self.pad];
        let mut hit = vec![false; self.pad];
        for &(a, b) in self.h.rho(e).pairs() {
            let (i, j) = (pos(inc.src(e), a), pos(inc.tgt(e), b));
            perm[i as usize] = j;
            hit[j as usize] = true;
        }
        let free_src = (0..self.pad).filter(|&i| perm[i] == u32::MAX).collect::<Vec<_>>();
        let free_tgt = (0..self.pad as u32).filter(|&j| !hit[j as usize]);
        for (i, j) in free_src.into_iter().zip(free_tgt) {
            perm[i] = j;
        }
        perm
    }

    fn build(&self, with_completion: bool, m: usize, choice: &[&Vec<u32>]) -> AmalgamationPattern {
        let inc = self.h.incidence();
        let base = if with_completion { self.pad } else { 0 };
        let width = (base + m) as Elem;
        let point = |s: usize, i: u32| s as Elem * width + i;
        let carrier = RelStructure::new(Signature::empty(), (0..inc.site_count() as Elem * width).collect::<Vec<_>>());
        let site_of: BTreeMap<Elem, usize> = inc
            .sites()
            .flat_map(|s| (0..width).map(move |i| (point(s, i), s)))
            .collect();
        let mut rho = vec![PartialMap::empty(); inc.link_count()];
        for (k, atom) in self.atoms.iter().enumerate() {
            let e = atom[0];
            let mut perm: Vec<u32> = Vec::with_capacity(base + m);
            if with_completion {
                perm.extend(self.completion(e));
            }
            perm.extend(choice[k].iter().map(|&j| j + base as u32));
            let fwd: PartialMap = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (point(inc.src(e), i as u32), point(inc.tgt(e), j)))
                .collect();
            for &f in atom {
                rho[f] = if f == e { fwd.clone() } else { fwd.inverse() };
            }
        }
        AmalgamationPattern::from_parts_unchecked(inc.clone(), carrier, site_of, rho)
    }
}

/// Deterministic search over action groupoids. Candidates are taken in order
/// of the number `m` of fresh points (`0..=max_points`), first without and then
/// with the padded copy of `h`, and within that in lexicographic order of the
/// chosen permutations. A candidate is accepted when its groupoid is simple,
/// compatible with `h`, `N`-acyclic, and meets the optional realisation goals.
pub fn search_groupoid_with(
    h: &AmalgamationPattern,
    opts: &GroupoidSearch,
    budget: &mut Budget,
) -> Result<SearchOutcome<Groupoid>> {
    let start = budget.used();
    let cands = Candidates::new(h);
    let mut exhaustive = true;
    let finish = |found: Option<Groupoid>, exhaustive: bool, budget: &Budget| SearchOutcome {
        found: found.into_iter().collect(),
        exhaustive,
        steps: budget.used() - start,
    };
    for m in 0..=opts.max_points {
        let all = permutations(m);
        let invs: Vec<Vec<u32>> = all.iter().filter(|p| is_involution(p)).cloned().collect();
        let choices: Vec<&Vec<Vec<u32>>> = cands
            .atoms
            .iter()
            .map(|a| if a.len() == 1 { &invs } else { &all })
            .collect();
        for with_completion in [false, true] {
            if m == 0 && !with_completion {
                continue;
            }
            let mut idx = vec![0usize; choices.len()];
            loop {
                if !budget.tick() {
                    return Ok(finish(None, false, budget));
                }
                let choice: Vec<&Vec<u32>> = idx.iter().zip(&choices).map(|(&i, c)| &c[i]).collect();
                let pattern = cands.build(with_completion, m, &choice);
                match accept(h, &pattern, opts, budget)? {
                    Verdict::Holds => {
                        let g = groupoid_from_action_capped(&pattern, opts.max_size)?.expect("accepted candidate fits");
                        return Ok(finish(Some(g), exhaustive, budget));
                    }
                    Verdict::Unknown => exhaustive = false,
                    Verdict::Fails(()) => {}
                }
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < choices[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
    }
    Ok(finish(None, exhaustive, budget))
}

fn accept(
    h: &AmalgamationPattern,
    pattern: &AmalgamationPattern,
    opts: &GroupoidSearch,
    budget: &mut Budget,
) -> Result<Verdict<()>> {
    let Some(g) = groupoid_from_action_capped(pattern, opts.max_size)? else {
        return Ok(Verdict::Fails(()));
    };
    if !is_simple_groupoid(&g) || is_compatible(&g, h)?.fails() {
        return Ok(Verdict::Fails(()));
    }
    match is_n_acyclic(&g, opts.acyclicity, budget)? {
        Verdict::Holds => {}
        Verdict::Fails(_) => return Ok(Verdict::Fails(())),
        Verdict::Unknown => return Ok(Verdict::Unknown),
    }
    if opts.realising_product || opts.acyclic_atlas {
        let dp = direct_product(h, &g)?;
        let c = match closure(&dp.pattern, DEFAULT_CLOSURE_CAP) {
            Ok(c) => c,
            Err(Error::CapExceeded { .. }) => return Ok(Verdict::Unknown),
            Err(e) => return Err(e),
        };
        if c.simplicity_violation(&dp.pattern).is_some() || c.strong_coherence_violation().is_some() {
            return Ok(Verdict::Fails(()));
        }
    }
    if opts.acyclic_atlas {
        let rp = reduced_product(h, &g)?;
        if !is_n_acyclic_hyp(&atlas_hypergraph(&rp.realisation), opts.acyclicity) {
            return Ok(Verdict::Fails(()));
        }
    }
    Ok(Verdict::Holds)
}
