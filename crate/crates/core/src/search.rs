//! Budgeted backtracking: homomorphisms between relational structures and
//! symmetries of multi-sorted instances.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{Elem, RelStructure};

/// Default limit on assignment attempts.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Environment variable that overrides [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "AMALGAM_BUDGET";

/// Cooperative step counter with an optional cancellation flag.
#[derive(Clone, Debug)]
pub struct Budget {
    limit: u64,
    used: u64,
    cancel: Option<Arc<AtomicBool>>,
}

impl Default for Budget {
    fn default() -> Self {
        Self::new(DEFAULT_BUDGET)
    }
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self {
            limit,
            used: 0,
            cancel: None,
        }
    }

    /// Reads the limit from `AMALGAM_BUDGET`, falling back to the default.
    pub fn from_env() -> Self {
        let limit = std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_BUDGET);
        Self::new(limit)
    }

    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.limit.saturating_sub(self.used)
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.limit || self.is_cancelled()
    }

    fn is_cancelled(&self) -> bool {
        self.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed))
    }

    /// Consumes one step; `false` once the budget is spent or cancelled.
    pub fn tick(&mut self) -> bool {
        if self.is_exhausted() {
            return false;
        }
        self.used += 1;
        true
    }

    /// Consumes one step or fails with the matching error.
    pub fn step(&mut self) -> Result<()> {
        if self.tick() {
            Ok(())
        } else if self.is_cancelled() {
            Err(Error::Cancelled)
        } else {
            Err(Error::BudgetExhausted(self.limit))
        }
    }
}

/// Results of an enumeration together with whether it ran to completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome<T> {
    pub found: Vec<T>,
    pub exhaustive: bool,
    pub steps: u64,
}

pub type Homomorphism = BTreeMap<Elem, Elem>;

/// All homomorphisms `x → a` in lexicographic order of their value vectors
/// (domain elements ascending, candidates ascending).
pub fn find_homomorphisms(x: &RelStructure, a: &RelStructure, budget: &mut Budget) -> SearchOutcome<Homomorphism> {
    find_homomorphisms_limited(x, a, budget, usize::MAX)
}

/// As [`find_homomorphisms`] but stops after `limit` results. Stopping at the
/// limit leaves `exhaustive` false unless the search space was also finished.
pub fn find_homomorphisms_limited(
    x: &RelStructure,
    a: &RelStructure,
    budget: &mut Budget,
    limit: usize,
) -> SearchOutcome<Homomorphism> {
    let start = budget.used();
    let dom: Vec<Elem> = x.universe().iter().copied().collect();
    let cod: Vec<Elem> = a.universe().iter().copied().collect();
    let pos: BTreeMap<Elem, usize> = dom.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    // Each tuple is checked once its last-assigned position is filled.
    let mut checks: Vec<Vec<(&str, &Vec<Elem>)>> = vec![Vec::new(); dom.len()];
    for (name, tuples) in x.relations() {
        for t in tuples {
            if let Some(last) = t.iter().map(|v| pos[v]).max() {
                checks[last].push((name, t));
            }
        }
    }

    let mut found = Vec::new();
    let mut assign: Vec<Elem> = Vec::with_capacity(dom.len());
    let mut truncated = false;

    fn rec(
        depth: usize,
        dom: &[Elem],
        cod: &[Elem],
        pos: &BTreeMap<Elem, usize>,
        checks: &[Vec<(&str, &Vec<Elem>)>],
        a: &RelStructure,
        assign: &mut Vec<Elem>,
        found: &mut Vec<Homomorphism>,
        budget: &mut Budget,
        limit: usize,
        truncated: &mut bool,
    ) {
        if depth == dom.len() {
            found.push(dom.iter().copied().zip(assign.iter().copied()).collect());
            return;
        }
        for &c in cod {
            if found.len() >= limit {
                *truncated = true;
                return;
            }
            if !budget.tick() {
                *truncated = true;
                return;
            }
            assign.push(c);
            let ok = checks[depth].iter().all(|(name, t)| {
                let img: Vec<Elem> = t.iter().map(|v| assign[pos[v]]).collect();
                a.holds(name, &img)
            });
            if ok {
                rec(depth + 1, dom, cod, pos, checks, a, assign, found, budget, limit, truncated);
            }
            assign.pop();
            if *truncated {
                return;
            }
        }
    }

    rec(
        0, &dom, &cod, &pos, &checks, a, &mut assign, &mut found, budget, limit, &mut truncated,
    );
    SearchOutcome {
        found,
        exhaustive: !truncated,
        steps: budget.used() - start,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortDecl {
    pub name: String,
    pub elements: Vec<Elem>,
}

/// A total function between two sorts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub name: String,
    pub domain: usize,
    pub codomain: usize,
    pub map: BTreeMap<Elem, Elem>,
}

/// A relation whose `i`-th column ranges over `sorts[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDecl {
    pub name: String,
    pub sorts: Vec<usize>,
    pub tuples: BTreeSet<Vec<Elem>>,
}

/// Named sorts with functions and relations between them. Element ids are
/// scoped per sort.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiSortedInstance {
    pub sorts: Vec<SortDecl>,
    pub functions: Vec<FunctionDecl>,
    pub relations: Vec<RelationDecl>,
}

/// One permutation per sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symmetry {
    pub maps: Vec<BTreeMap<Elem, Elem>>,
}

impl Symmetry {
    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|m| m.iter().all(|(a, b)| a == b))
    }

    pub fn apply(&self, sort: usize, x: Elem) -> Elem {
        self.maps[sort][&x]
    }
}

impl MultiSortedInstance {
    pub fn sort_index(&self, name: &str) -> Option<usize> {
        self.sorts.iter().position(|s| s.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let sets: Vec<BTreeSet<Elem>> = self
            .sorts
            .iter()
            .map(|s| s.elements.iter().copied().collect())
            .collect();
        for (s, set) in self.sorts.iter().zip(&sets) {
            if set.len() != s.elements.len() {
                return Err(Error::Invalid(format!("sort `{}` repeats an element", s.name)));
            }
        }
        for f in &self.functions {
            if f.domain >= sets.len() || f.codomain >= sets.len() {
                return Err(Error::Invalid(format!("function `{}` names an unknown sort", f.name)));
            }
            if f.map.keys().copied().collect::<BTreeSet<_>>() != sets[f.domain] {
                return Err(Error::Invalid(format!("function `{}` is not total on its domain", f.name)));
            }
            if f.map.values().any(|v| !sets[f.codomain].contains(v)) {
                return Err(Error::Invalid(format!("function `{}` leaves its codomain", f.name)));
            }
        }
        for r in &self.relations {
            for t in &r.tuples {
                if t.len() != r.sorts.len()
                    || t.iter().zip(&r.sorts).any(|(x, &s)| !sets.get(s).is_some_and(|set| set.contains(x)))
                {
                    return Err(Error::Invalid(format!("relation `{}` has an ill-sorted tuple {t:?}", r.name)));
                }
            }
        }
        Ok(())
    }

    /// Applies a symmetry, producing the transformed instance.
    pub fn apply(&self, sym: &Symmetry) -> MultiSortedInstance {
        let sorts = self
            .sorts
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut elements: Vec<Elem> = s.elements.iter().map(|x| sym.maps[i][x]).collect();
                elements.sort_unstable();
                SortDecl {
                    name: s.name.clone(),
                    elements,
                }
            })
            .collect();
        let functions = self
            .functions
            .iter()
            .map(|f| FunctionDecl {
                name: f.name.clone(),
                domain: f.domain,
                codomain: f.codomain,
                map: f
                    .map
                    .iter()
                    .map(|(x, y)| (sym.maps[f.domain][x], sym.maps[f.codomain][y]))
                    .collect(),
            })
            .collect();
        let relations = self
            .relations
            .iter()
            .map(|r| RelationDecl {
                name: r.name.clone(),
                sorts: r.sorts.clone(),
                tuples: r
                    .tuples
                    .iter()
                    .map(|t| t.iter().zip(&r.sorts).map(|(x, &s)| sym.maps[s][x]).collect())
                    .collect(),
            })
            .collect();
        MultiSortedInstance {
            sorts,
            functions,
            relations,
        }
    }

    /// Same instance with each sort's element list sorted, for comparisons.
    pub fn normalized(&self) -> MultiSortedInstance {
        let mut out = self.clone();
        for s in &mut out.sorts {
            s.elements.sort_unstable();
        }
        out
    }
}

/// All symmetries of `m` that fix every sort in `rigid_sorts` pointwise.
///
/// Elements are assigned sort by sort in declaration order; function values
/// are propagated eagerly, so declaring "upstream" sorts first keeps the
/// search narrow. Results are in lexicographic order of assignment.
pub fn find_symmetries(
    m: &MultiSortedInstance,
    rigid_sorts: &[&str],
    budget: &mut Budget,
) -> Result<SearchOutcome<Symmetry>> {
    m.validate()?;
    let mut rigid = vec![false; m.sorts.len()];
    for name in rigid_sorts {
        let i = m
            .sort_index(name)
            .ok_or_else(|| Error::UnknownId((*name).to_string()))?;
        rigid[i] = true;
    }
    let start = budget.used();
    let search = SymSearch::new(m);
    let mut base = search.empty_state();
    for (s, sort) in m.sorts.iter().enumerate() {
        if rigid[s] {
            for &x in &sort.elements {
                if !search.assign(&mut base, s, x, x) {
                    return Ok(SearchOutcome {
                        found: vec![],
                        exhaustive: true,
                        steps: 0,
                    });
                }
            }
        }
    }
    let mut found = Vec::new();
    let mut truncated = false;
    search.run(base, budget, &mut found, &mut truncated);
    Ok(SearchOutcome {
        found,
        exhaustive: !truncated,
        steps: budget.used() - start,
    })
}

struct SymSearch<'a> {
    m: &'a MultiSortedInstance,
    order: Vec<(usize, Elem)>,
    index: Vec<BTreeMap<Elem, usize>>,
    funcs_from: Vec<Vec<usize>>,
    rels_of: Vec<Vec<usize>>,
}

#[derive(Clone)]
struct SymState {
    fwd: Vec<Vec<Option<Elem>>>,
    used: Vec<Vec<bool>>,
}

impl<'a> SymSearch<'a> {
    fn new(m: &'a MultiSortedInstance) -> Self {
        let index = m
            .sorts
            .iter()
            .map(|s| s.elements.iter().enumerate().map(|(i, &x)| (x, i)).collect())
            .collect();
        let order = m
            .sorts
            .iter()
            .enumerate()
            .flat_map(|(i, s)| {
                let mut e = s.elements.clone();
                e.sort_unstable();
                e.into_iter().map(move |x| (i, x))
            })
            .collect();
        let mut funcs_from = vec![Vec::new(); m.sorts.len()];
        for (i, f) in m.functions.iter().enumerate() {
            funcs_from[f.domain].push(i);
        }
        let mut rels_of = vec![Vec::new(); m.sorts.len()];
        for (i, r) in m.relations.iter().enumerate() {
            for &s in &r.sorts {
                if !rels_of[s].contains(&i) {
                    rels_of[s].push(i);
                }
            }
        }
        Self {
            m,
            order,
            index,
            funcs_from,
            rels_of,
        }
    }

    fn empty_state(&self) -> SymState {
        SymState {
            fwd: self.m.sorts.iter().map(|s| vec![None; s.elements.len()]).collect(),
            used: self.m.sorts.iter().map(|s| vec![false; s.elements.len()]).collect(),
        }
    }

    /// Sets `x ↦ y` in sort `s` and propagates along functions. Returns
    /// `false` on conflict.
    fn assign(&self, st: &mut SymState, s: usize, x: Elem, y: Elem) -> bool {
        let mut queue = vec![(s, x, y)];
        while let Some((s, x, y)) = queue.pop() {
            let Some(&xi) = self.index[s].get(&x) else { return false };
            let Some(&yi) = self.index[s].get(&y) else { return false };
            match st.fwd[s][xi] {
                Some(prev) if prev == y => continue,
                Some(_) => return false,
                None => {}
            }
            if st.used[s][yi] {
                return false;
            }
            st.fwd[s][xi] = Some(y);
            st.used[s][yi] = true;
            for &fi in &self.funcs_from[s] {
                let f = &self.m.functions[fi];
                queue.push((f.codomain, f.map[&x], f.map[&y]));
            }
            for &ri in &self.rels_of[s] {
                if !self.relation_ok(st, ri) {
                    return false;
                }
            }
        }
        true
    }

    fn image(&self, st: &SymState, s: usize, x: Elem) -> Option<Elem> {
        st.fwd[s][self.index[s][&x]]
    }

    fn relation_ok(&self, st: &SymState, ri: usize) -> bool {
        let r = &self.m.relations[ri];
        r.tuples.iter().all(|t| {
            let img: Option<Vec<Elem>> = t
                .iter()
                .zip(&r.sorts)
                .map(|(&x, &s)| self.image(st, s, x))
                .collect();
            img.is_none_or(|img| r.tuples.contains(&img))
        })
    }

    fn run(&self, st: SymState, budget: &mut Budget, found: &mut Vec<Symmetry>, truncated: &mut bool) {
        let next = self
            .order
            .iter()
            .find(|&&(s, x)| self.image(&st, s, x).is_none());
        let Some(&(s, x)) = next else {
            let maps = self
                .m
                .sorts
                .iter()
                .enumerate()
                .map(|(i, sort)| {
                    sort.elements
                        .iter()
                        .map(|&e| (e, self.image(&st, i, e).unwrap()))
                        .collect()
                })
                .collect();
            found.push(Symmetry { maps });
            return;
        };
        let mut candidates = self.m.sorts[s].elements.clone();
        candidates.sort_unstable();
        for y in candidates {
            if st.used[s][self.index[s][&y]] {
                continue;
            }
            if !budget.tick() {
                *truncated = true;
                return;
            }
            let mut next = st.clone();
            if self.assign(&mut next, s, x, y) {
                self.run(next, budget, found, truncated);
                if *truncated {
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn directed_cycle(n: u32) -> RelStructure {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        RelStructure::graph(0..n, &edges).unwrap()
    }

    #[test]
    fn single_vertex_maps_everywhere() {
        let x = RelStructure::graph([0], &[]).unwrap();
        let a = directed_cycle(5);
        let out = find_homomorphisms(&x, &a, &mut Budget::default());
        assert_eq!(out.found.len(), 5);
        assert!(out.exhaustive);
    }

    #[test]
    fn directed_triangle_has_three_endomorphisms() {
        let c = directed_cycle(3);
        let out = find_homomorphisms(&c, &c, &mut Budget::default());
        assert_eq!(out.found.len(), 3);
        // lexicographic: the image of 0 ascends
        let firsts: Vec<_> = out.found.iter().map(|h| h[&0]).collect();
        assert_eq!(firsts, vec![0, 1, 2]);
    }

    #[test]
    fn edge_into_edgeless_structure() {
        let x = RelStructure::graph([0, 1], &[(0, 1)]).unwrap();
        let a = RelStructure::graph([0, 1], &[]).unwrap();
        let out = find_homomorphisms(&x, &a, &mut Budget::default());
        assert!(out.found.is_empty() && out.exhaustive);
    }

    #[test]
    fn tiny_budget_truncates() {
        let c = directed_cycle(4);
        let out = find_homomorphisms(&c, &c, &mut Budget::new(3));
        assert!(!out.exhaustive);
    }

    fn two_cycle_instance() -> MultiSortedInstance {
        // sort V = {0,1,2}, relation E = directed 3-cycle, sort L = {0} with a
        // function to V
        MultiSortedInstance {
            sorts: vec![
                SortDecl { name: "V".into(), elements: vec![0, 1, 2] },
                SortDecl { name: "L".into(), elements: vec![7] },
            ],
            functions: vec![],
            relations: vec![RelationDecl {
                name: "E".into(),
                sorts: vec![0, 0],
                tuples: [vec![0, 1], vec![1, 2], vec![2, 0]].into_iter().collect(),
            }],
        }
    }

    #[test]
    fn symmetries_of_directed_triangle() {
        let m = two_cycle_instance();
        let out = find_symmetries(&m, &[], &mut Budget::default()).unwrap();
        assert_eq!(out.found.len(), 3);
        assert!(out.found[0].is_identity());
        for s in &out.found {
            assert_eq!(m.apply(s).normalized(), m.normalized());
        }
        let rigid = find_symmetries(&m, &["V"], &mut Budget::default()).unwrap();
        assert_eq!(rigid.found.len(), 1);
    }

    #[test]
    fn functions_constrain_symmetries() {
        // two points, each with a tag; tags distinguished by a unary relation
        let m = MultiSortedInstance {
            sorts: vec![
                SortDecl { name: "P".into(), elements: vec![0, 1] },
                SortDecl { name: "T".into(), elements: vec![0, 1] },
            ],
            functions: vec![FunctionDecl {
                name: "tag".into(),
                domain: 0,
                codomain: 1,
                map: [(0, 0), (1, 1)].into_iter().collect(),
            }],
            relations: vec![RelationDecl {
                name: "U".into(),
                sorts: vec![1],
                tuples: [vec![0]].into_iter().collect(),
            }],
        };
        let out = find_symmetries(&m, &[], &mut Budget::default()).unwrap();
        assert_eq!(out.found.len(), 1);
    }
}
