use std::collections::BTreeSet;
use std::fmt;

use crate::error::Result;
use crate::incidence::{IncidencePattern, LinkId, SiteId};
use crate::report::Verdict;
use crate::search::{Budget, SearchOutcome};

use super::{subgroupoid_mask, GElem, Groupoid};

/// Upper bound on the number of distinct cycles [`find_coset_cycles`] lists.
pub const MAX_REPORTED_CYCLES: usize = 64;

/// A coset cycle `(g_i, α_i)` for `i < n`, with each `α_i` given as a sorted
/// list of links closed under reversal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct CosetCycle {
    pub steps: Vec<(GElem, Vec<LinkId>)>,
}

impl CosetCycle {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for CosetCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(|(g, a)| format!("({g}, {a:?})")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// The operations needed to search for coset cycles. Link sets are bitmasks
/// over the atoms `{e, e⁻¹}` of the incidence pattern.
pub trait CosetSpace {
    fn incidence(&self) -> &IncidencePattern;
    fn element_count(&self) -> usize;
    fn unit(&self, s: SiteId) -> GElem;
    fn src(&self, g: GElem) -> SiteId;
    fn inverse(&self, g: GElem) -> GElem;
    /// `g·h` when defined and representable.
    fn compose(&self, g: GElem, h: GElem) -> Option<GElem>;
    /// Elements of `g·G[mask]`, ascending.
    fn coset_members(&self, g: GElem, mask: u64) -> Vec<GElem>;
    fn in_coset(&self, g: GElem, mask: u64, h: GElem) -> bool;
    /// Whether `g·G[b]` and `h·G[c]` intersect.
    fn cosets_meet(&self, g: GElem, b: u64, h: GElem, c: u64) -> bool;
}

pub(crate) fn atom_links(inc: &IncidencePattern, mask: u64) -> Vec<LinkId> {
    let mut v: Vec<LinkId> = inc
        .link_atoms()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .flat_map(|(_, a)| a)
        .collect();
    v.sort_unstable();
    v
}

pub(crate) fn atom_count(inc: &IncidencePattern) -> usize {
    let k = inc.link_atoms().len();
    assert!(k < 63, "coset search supports at most 62 link pairs");
    k
}

/// Precomputed subgroupoids `G[α]` for every set of atoms.
pub struct GroupoidCosets<'a> {
    g: &'a Groupoid,
    /// `member[mask][x]`: `x ∈ G[mask]`.
    member: Vec<Vec<bool>>,
}

impl<'a> GroupoidCosets<'a> {
    pub fn new(g: &'a Groupoid) -> Self {
        let inc = g.incidence();
        let atoms = inc.link_atoms();
        let k = atom_count(inc);
        let member = (0u64..1 << k)
            .map(|mask| {
                let mut allowed = vec![false; inc.link_count()];
                for (i, a) in atoms.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        for &e in a {
                            allowed[e] = true;
                        }
                    }
                }
                subgroupoid_mask(g, &allowed)
            })
            .collect();
        Self { g, member }
    }
}

impl CosetSpace for GroupoidCosets<'_> {
    fn incidence(&self) -> &IncidencePattern {
        self.g.incidence()
    }

    fn element_count(&self) -> usize {
        self.g.len()
    }

    fn unit(&self, s: SiteId) -> GElem {
        self.g.unit(s)
    }

    fn src(&self, g: GElem) -> SiteId {
        self.g.src(g)
    }

    fn inverse(&self, g: GElem) -> GElem {
        self.g.inverse(g)
    }

    fn compose(&self, g: GElem, h: GElem) -> Option<GElem> {
        self.g.compose(g, h)
    }

    fn coset_members(&self, x: GElem, mask: u64) -> Vec<GElem> {
        let m = &self.member[mask as usize];
        let mut v: Vec<GElem> = self
            .g
            .elements_from(self.g.tgt(x))
            .iter()
            .filter(|&&h| m[h])
            .map(|&h| self.g.mul(x, h))
            .collect();
        v.sort_unstable();
        v
    }

    fn in_coset(&self, x: GElem, mask: u64, y: GElem) -> bool {
        self.g.src(x) == self.g.src(y) && self.member[mask as usize][self.g.mul(self.g.inverse(x), y)]
    }

    fn cosets_meet(&self, x: GElem, b: u64, y: GElem, c: u64) -> bool {
        // x·G[b] ∩ y·G[c] ≠ ∅ iff y⁻¹x ∈ G[c]·G[b]
        if self.g.src(x) != self.g.src(y) {
            return false;
        }
        let d = self.g.mul(self.g.inverse(y), x);
        let (mb, mc) = (&self.member[b as usize], &self.member[c as usize]);
        self.g
            .elements_from(self.g.tgt(y))
            .iter()
            .any(|&u| mc[u] && self.g.compose(self.g.inverse(u), d).is_some_and(|v| mb[v]))
    }
}

struct CycleSearch<'s, C: CosetSpace> {
    space: &'s C,
    n: usize,
    masks: Vec<u64>,
    limit: usize,
    found: BTreeSet<Vec<(GElem, u64)>>,
    gs: Vec<GElem>,
    alphas: Vec<u64>,
    exhausted: bool,
}

impl<C: CosetSpace> CycleSearch<'_, C> {
    /// Condition (ii) fails at a step with neighbouring link sets `prev`, `next`.
    fn meets_at(&self, prev: u64, cur: u64, next: u64, gi: GElem, gnext: GElem) -> bool {
        self.space.cosets_meet(gi, cur & prev, gnext, cur & next)
    }

    fn run(&mut self, budget: &mut Budget) {
        let inc = self.space.incidence();
        for s in inc.sites() {
            self.gs = vec![self.space.unit(s)];
            self.alphas.clear();
            self.dfs(budget);
            if self.done() {
                return;
            }
        }
    }

    fn done(&self) -> bool {
        self.exhausted || self.found.len() >= self.limit
    }

    fn dfs(&mut self, budget: &mut Budget) {
        if !budget.tick() {
            self.exhausted = true;
            return;
        }
        let i = self.alphas.len();
        let n = self.n;
        let gi = self.gs[i];
        for mi in 0..self.masks.len() {
            let a = self.masks[mi];
            if i >= 1 && a == self.alphas[i - 1] {
                continue;
            }
            if i >= 2 {
                let (gp, ap, app) = (self.gs[i - 1], self.alphas[i - 1], self.alphas[i - 2]);
                if self.meets_at(app, ap, a, gp, gi) {
                    continue;
                }
            }
            if i == n - 1 {
                let (g0, a0) = (self.gs[0], self.alphas[0]);
                if a == a0 || !self.space.in_coset(gi, a, g0) || g0 == gi {
                    continue;
                }
                let ap = self.alphas[i - 1];
                if self.meets_at(ap, a, a0, gi, g0) {
                    continue;
                }
                let a1 = if n == 2 { a } else { self.alphas[1] };
                let g1 = self.gs[1];
                if self.meets_at(a, a0, a1, g0, g1) {
                    continue;
                }
                self.alphas.push(a);
                let key = canonical(self.space, &self.gs, &self.alphas);
                self.alphas.pop();
                self.found.insert(key);
                if self.done() {
                    return;
                }
                continue;
            }
            for gnext in self.space.coset_members(gi, a) {
                if gnext == gi {
                    continue;
                }
                self.alphas.push(a);
                self.gs.push(gnext);
                self.dfs(budget);
                self.gs.pop();
                self.alphas.pop();
                if self.done() {
                    return;
                }
            }
        }
    }
}

/// Least rotation of the cycle, each rotation translated so that its first
/// element is a unit.
fn canonical<C: CosetSpace>(space: &C, gs: &[GElem], alphas: &[u64]) -> Vec<(GElem, u64)> {
    let n = gs.len();
    let mut best: Option<Vec<(GElem, u64)>> = None;
    for j in 0..n {
        let t = space.inverse(gs[j]);
        let rotated: Option<Vec<(GElem, u64)>> = (0..n)
            .map(|k| {
                let idx = (j + k) % n;
                space.compose(t, gs[idx]).map(|g| (g, alphas[idx]))
            })
            .collect();
        if let Some(r) = rotated {
            if best.as_ref().is_none_or(|b| r < *b) {
                best = Some(r);
            }
        }
    }
    best.unwrap_or_else(|| gs.iter().copied().zip(alphas.iter().copied()).collect())
}

fn usable_masks(k: usize) -> Vec<u64> {
    (1u64..1 << k).collect()
}

/// Coset cycles of length exactly `n`, in canonical form, up to `limit`
/// distinct ones. Cycles start at a unit; the search never uses an empty link
/// set, since `α_i = ∅` forces `g_{i+1} = g_i` and then the cosets in (ii)
/// share `g_i`.
pub fn find_coset_cycles_of_length<C: CosetSpace>(
    space: &C,
    n: usize,
    limit: usize,
    budget: &mut Budget,
) -> SearchOutcome<CosetCycle> {
    let inc = space.incidence();
    let k = atom_count(inc);
    if n < 2 || k == 0 {
        return SearchOutcome {
            found: Vec::new(),
            exhaustive: true,
            steps: 0,
        };
    }
    let start = budget.used();
    let mut search = CycleSearch {
        space,
        n,
        masks: usable_masks(k),
        limit,
        found: BTreeSet::new(),
        gs: Vec::new(),
        alphas: Vec::new(),
        exhausted: false,
    };
    search.run(budget);
    let exhaustive = !search.exhausted && search.found.len() < limit;
    SearchOutcome {
        found: search
            .found
            .into_iter()
            .map(|c| CosetCycle {
                steps: c.into_iter().map(|(g, m)| (g, atom_links(inc, m))).collect(),
            })
            .collect(),
        exhaustive,
        steps: budget.used() - start,
    }
}

/// Two-cycles via `G[α] ∩ G[β] = G[α ∩ β]`: a failure at `h ∈ G[α] ∩ G[β]`
/// outside `G[α ∩ β]` gives the cycle `(1, α), (h, β)`.
pub fn two_acyclicity_violation(g: &Groupoid) -> Option<CosetCycle> {
    let space = GroupoidCosets::new(g);
    two_cycle_in(&space)
}

fn two_cycle_in(space: &GroupoidCosets<'_>) -> Option<CosetCycle> {
    let g = space.g;
    let inc = g.incidence();
    let k = atom_count(inc);
    for a in 1u64..1 << k {
        for b in (a + 1)..1 << k {
            if a & b == a || a & b == b {
                continue;
            }
            let (ma, mb, mab) = (
                &space.member[a as usize],
                &space.member[b as usize],
                &space.member[(a & b) as usize],
            );
            if let Some(h) = (0..g.len()).find(|&h| ma[h] && mb[h] && !mab[h]) {
                let u = g.unit(g.src(h));
                let key = canonical(space, &[u, h], &[a, b]);
                return Some(CosetCycle {
                    steps: key.into_iter().map(|(x, m)| (x, atom_links(inc, m))).collect(),
                });
            }
        }
    }
    None
}

/// Coset cycles of lengths `2..=n`, shortest first, at most
/// [`MAX_REPORTED_CYCLES`] in total. Empty with `exhaustive` set exactly when
/// `g` is `n`-acyclic.
pub fn find_coset_cycles(g: &Groupoid, n: usize, budget: &mut Budget) -> Result<SearchOutcome<CosetCycle>> {
    let space = GroupoidCosets::new(g);
    let start = budget.used();
    let mut found = Vec::new();
    let mut exhaustive = true;
    for len in 2..=n {
        let left = MAX_REPORTED_CYCLES - found.len();
        let out = find_coset_cycles_of_length(&space, len, left, budget);
        exhaustive &= out.exhaustive;
        found.extend(out.found);
        if found.len() >= MAX_REPORTED_CYCLES || budget.is_exhausted() {
            exhaustive = false;
            break;
        }
    }
    Ok(SearchOutcome {
        found,
        exhaustive,
        steps: budget.used() - start,
    })
}

/// `n`-acyclicity, stopping at the first cycle. Two-cycles are decided by
/// the subgroupoid intersection criterion; longer ones by search.
pub fn is_n_acyclic(g: &Groupoid, n: usize, budget: &mut Budget) -> Result<Verdict<CosetCycle>> {
    let space = GroupoidCosets::new(g);
    if n >= 2 {
        if let Some(c) = two_cycle_in(&space) {
            return Ok(Verdict::Fails(c));
        }
    }
    for len in 3..=n {
        let out = find_coset_cycles_of_length(&space, len, 1, budget);
        if let Some(c) = out.found.into_iter().next() {
            return Ok(Verdict::Fails(c));
        }
        if !out.exhaustive {
            return Ok(Verdict::Unknown);
        }
    }
    Ok(Verdict::Holds)
}
