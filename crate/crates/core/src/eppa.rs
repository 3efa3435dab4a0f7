//! Extension problems for partial automorphisms: instances, solutions built
//! from reduced products, verification, universality and forbidden classes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{is_compatible, is_n_acyclic, is_simple_groupoid, search_groupoid_with, Groupoid, GroupoidSearch};
use crate::hypergraph::{tree_decomposition, Hypergraph};
use crate::incidence::{IncidencePattern, Link, LinkId, SiteId};
use crate::pattern::{closure, AmalgamationPattern, PatternSymmetry, WalkMapClosure, DEFAULT_CLOSURE_CAP};
use crate::product::{find_realisation_symmetry, reduced_product, verify_with_closure, Realisation};
use crate::report::{ValidationReport, Verdict};
use crate::search::{find_homomorphisms_limited, Budget, Homomorphism};
use crate::structure::{homomorphism_violation, partial_isomorphism_violation, Elem, PartialMap, RelStructure};

/// A named partial isomorphism of the base structure and the name of its
/// inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partial {
    pub id: String,
    pub map: PartialMap,
    pub inv: String,
}

#[derive(Serialize, Deserialize)]
struct PartialJson {
    id: String,
    pairs: Vec<(Elem, Elem)>,
    inv: String,
}

/// A base structure with an inverse-closed family of partial isomorphisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EppaInstance {
    pub base: RelStructure,
    pub partials: Vec<Partial>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    structure: RelStructure,
    partials: Vec<PartialJson>,
}

impl EppaInstance {
    pub fn new(base: RelStructure, partials: Vec<Partial>) -> Result<Self> {
        let inst = Self { base, partials };
        inst.validate().into_result()?;
        Ok(inst)
    }

    /// Closes `maps` under inverses, naming them `p0, p1, …` and the added
    /// inverses `p<i>inv`. Maps equal to their own inverse are self-inverse.
    pub fn from_maps(base: RelStructure, maps: Vec<PartialMap>) -> Result<Self> {
        let mut partials: Vec<Partial> = Vec::new();
        for (i, m) in maps.into_iter().enumerate() {
            if partials.iter().any(|p| p.map == m) {
                continue;
            }
            let id = format!("p{i}");
            let inv = m.inverse();
            if inv == m {
                partials.push(Partial { id: id.clone(), map: m, inv: id });
            } else if let Some(k) = partials.iter().position(|p| p.map == inv) {
                let other = partials[k].id.clone();
                partials[k].inv = id.clone();
                partials.push(Partial { id, map: m, inv: other });
            } else {
                let inv_id = format!("{id}inv");
                partials.push(Partial {
                    id: id.clone(),
                    map: m,
                    inv: inv_id.clone(),
                });
                partials.push(Partial {
                    id: inv_id,
                    map: inv,
                    inv: id,
                });
            }
        }
        Self::new(base, partials)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        r.extend("structure: ", self.base.validate());
        let ids: BTreeMap<&str, usize> = self.partials.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
        if ids.len() != self.partials.len() {
            r.error("partial ids are not unique");
        }
        for p in &self.partials {
            match partial_isomorphism_violation(&self.base, &self.base, &p.map) {
                Ok(None) => {}
                Ok(Some((rel, t))) => r.error(format!("`{}` is not a partial isomorphism: breaks `{rel}` at {t:?}", p.id)),
                Err(e) => r.error(format!("`{}`: {e}", p.id)),
            }
            match ids.get(p.inv.as_str()) {
                None => r.error(format!("inverse `{}` of `{}` is missing", p.inv, p.id)),
                Some(&k) => {
                    let q = &self.partials[k];
                    if q.map != p.map.inverse() {
                        r.error(format!("`{}` is not the inverse of `{}`", q.id, p.id));
                    }
                    if q.inv != p.id {
                        r.error(format!("inverse of `{}` does not point back to `{}`", q.id, p.id));
                    }
                }
            }
        }
        r
    }

    pub fn partial(&self, id: &str) -> Option<&Partial> {
        self.partials.iter().find(|p| p.id == id)
    }
}

impl Serialize for EppaInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceJson {
            structure: self.base.clone(),
            partials: self
                .partials
                .iter()
                .map(|p| PartialJson {
                    id: p.id.clone(),
                    pairs: p.map.pairs().to_vec(),
                    inv: p.inv.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EppaInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = InstanceJson::deserialize(d)?;
        let partials = j
            .partials
            .into_iter()
            .map(|p| {
                Ok(Partial {
                    id: p.id,
                    map: PartialMap::from_pairs(p.pairs)?,
                    inv: p.inv,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        EppaInstance::new(j.structure, partials).map_err(serde::de::Error::custom)
    }
}

/// The pattern over one site carrying the base, with one link per partial.
pub fn instance_to_pattern(inst: &EppaInstance) -> Result<AmalgamationPattern> {
    inst.validate().into_result()?;
    let pos: BTreeMap<&str, usize> = inst.partials.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    let links = inst
        .partials
        .iter()
        .map(|p| Link {
            name: p.id.clone(),
            src: 0,
            tgt: 0,
            inv: pos[p.inv.as_str()],
        })
        .collect();
    let inc = IncidencePattern::new(vec![0], links)?;
    let site_of = inst.base.universe().iter().map(|&a| (a, 0)).collect();
    let rho = inst.partials.iter().map(|p| p.map.clone()).collect();
    AmalgamationPattern::new(inc, inst.base.clone(), site_of, rho)
}

/// A structure containing the base via the chart `u0`, with an automorphism
/// extending each partial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EppaSolution {
    pub realisation: Realisation,
    /// Chart index of the distinguished copy of the base.
    pub u0: usize,
    /// Total permutations of the structure, by partial id.
    pub automorphisms: BTreeMap<String, PartialMap>,
}

#[derive(Serialize, Deserialize)]
struct SolutionJson {
    realisation: Realisation,
    u0: usize,
    /// Images of the universe in ascending order.
    automorphisms: BTreeMap<String, Vec<Elem>>,
}

impl EppaSolution {
    /// A solution with a single chart: `embedding` maps the base into
    /// `structure`, and `automorphisms` are given by partial id.
    pub fn from_extension(
        structure: RelStructure,
        embedding: &PartialMap,
        automorphisms: BTreeMap<String, PartialMap>,
    ) -> Result<Self> {
        let chart = embedding.inverse();
        let realisation = Realisation::from_charts(structure, vec![(chart.domain_set(), 0, chart)]);
        Ok(Self {
            realisation,
            u0: 0,
            automorphisms,
        })
    }

    pub fn structure(&self) -> &RelStructure {
        self.realisation.structure()
    }

    /// `π0⁻¹`: the base into the structure.
    pub fn embedding(&self) -> PartialMap {
        self.realisation.chart(self.u0).map.inverse()
    }
}

impl Serialize for EppaSolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let universe: Vec<Elem> = self.structure().universe().iter().copied().collect();
        SolutionJson {
            realisation: self.realisation.clone(),
            u0: self.u0,
            automorphisms: self
                .automorphisms
                .iter()
                .map(|(k, m)| (k.clone(), universe.iter().map(|&x| m.get(x).unwrap_or(x)).collect()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EppaSolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SolutionJson::deserialize(d)?;
        let universe: Vec<Elem> = j.realisation.structure().universe().iter().copied().collect();
        let mut automorphisms = BTreeMap::new();
        for (k, images) in j.automorphisms {
            if images.len() != universe.len() {
                return Err(serde::de::Error::custom(format!(
                    "automorphism `{k}` has {} images for {} elements",
                    images.len(),
                    universe.len()
                )));
            }
            let m = PartialMap::from_pairs(universe.iter().copied().zip(images)).map_err(serde::de::Error::custom)?;
            automorphisms.insert(k, m);
        }
        if j.u0 >= j.realisation.charts().len() {
            return Err(serde::de::Error::custom("u0 is not a chart"));
        }
        Ok(EppaSolution {
            realisation: j.realisation,
            u0: j.u0,
            automorphisms,
        })
    }
}

/// Where [`solve`] takes its group from.
#[derive(Clone, Debug)]
pub enum GroupSource {
    /// A group over the instance's incidence pattern, checked before use.
    Supplied(Box<Groupoid>),
    /// [`search_groupoid_with`] with these bounds, also asking for a
    /// realising product and an `N`-acyclic atlas.
    Search { max_size: usize, max_points: usize },
}

impl Default for GroupSource {
    fn default() -> Self {
        GroupSource::Search {
            max_size: 512,
            max_points: 4,
        }
    }
}

/// Builds a solution from the reduced product with a suitable group `G`:
/// `u0 = u[1]`, and the automorphism for `p` is the descent of left
/// multiplication by `(p^G)⁻¹`, which maps `u[p^G]` onto `u0`.
pub fn solve(inst: &EppaInstance, n: usize, source: &GroupSource, budget: &mut Budget) -> Result<EppaSolution> {
    let h = instance_to_pattern(inst)?;
    let g = match source {
        GroupSource::Supplied(g) => {
            if g.incidence() != h.incidence() {
                return Err(Error::Precondition("supplied group is not over the instance's links".into()));
            }
            if !is_simple_groupoid(g) {
                return Err(Error::Precondition("supplied group is not simple".into()));
            }
            if let Verdict::Fails(w) = is_compatible(g, &h)? {
                return Err(Error::Precondition(format!(
                    "supplied group is not compatible: {}",
                    h.incidence().format_walk(&w)
                )));
            }
            match is_n_acyclic(g, n, budget)? {
                Verdict::Holds => {}
                Verdict::Fails(c) => {
                    return Err(Error::Precondition(format!("supplied group has the coset cycle {c}")))
                }
                Verdict::Unknown => return Err(Error::BudgetExhausted(budget.limit())),
            }
            (**g).clone()
        }
        GroupSource::Search { max_size, max_points } => {
            let opts = GroupoidSearch {
                acyclicity: n,
                max_size: *max_size,
                max_points: *max_points,
                realising_product: true,
                acyclic_atlas: true,
            };
            let out = search_groupoid_with(&h, &opts, budget)?;
            match out.found.into_iter().next() {
                Some(g) => g,
                None if !out.exhaustive => return Err(Error::BudgetExhausted(budget.limit())),
                None => {
                    return Err(Error::NoGroupoid(format!(
                        "no {n}-acyclic group with at most {max_size} elements among the candidates"
                    )))
                }
            }
        }
    };
    let rp = reduced_product(&h, &g)?;
    let cl = closure(&h, DEFAULT_CLOSURE_CAP)?;
    let rep = verify_with_closure(&rp.realisation, &h, &cl, &vec![true; rp.realisation.charts().len()]);
    if !rep.is_ok() {
        return Err(Error::Internal(format!("reduced product is not a realisation:\n{rep}")));
    }
    let u0 = rp.chart_of[g.unit(0)];
    let mut automorphisms = BTreeMap::new();
    for (e, p) in inst.partials.iter().enumerate() {
        let shift = g.inverse(g.generator(e));
        let mut pairs = BTreeMap::new();
        for (&x, &(a, k)) in &rp.product.provenance {
            let to = rp.class(a, g.mul(shift, k)).expect("translate stays in the product");
            pairs.insert(rp.class_of[&x], to);
        }
        let map = PartialMap::from_pairs(pairs)
            .map_err(|_| Error::Internal(format!("translation for `{}` is not injective", p.id)))?;
        automorphisms.insert(p.id.clone(), map);
    }
    let sol = EppaSolution {
        realisation: rp.realisation,
        u0,
        automorphisms,
    };
    let rep = verify_solution(inst, &sol);
    if !rep.is_ok() {
        return Err(Error::Internal(format!("solver output does not verify:\n{rep}")));
    }
    Ok(sol)
}

/// Checks that `π0` is an isomorphism from the structure restricted to `u0`
/// onto the base, and that each automorphism is an automorphism extending
/// `π0⁻¹ ∘ p ∘ π0`.
pub fn verify_solution(inst: &EppaInstance, sol: &EppaSolution) -> ValidationReport {
    let mut r = ValidationReport::new();
    let a = sol.structure();
    if sol.u0 >= sol.realisation.charts().len() {
        r.error("u0 is not a chart");
        return r;
    }
    let pi0 = &sol.realisation.chart(sol.u0).map;
    if pi0.image() != *inst.base.universe() {
        r.error("π0 is not onto the base");
        return r;
    }
    match partial_isomorphism_violation(a, &inst.base, pi0) {
        Ok(None) => {}
        Ok(Some((rel, t))) => r.error(format!("π0 breaks `{rel}` at {t:?}")),
        Err(e) => r.error(format!("π0: {e}")),
    }
    let emb = pi0.inverse();
    for p in &inst.partials {
        let Some(sigma) = sol.automorphisms.get(&p.id) else {
            r.error(format!("no automorphism for `{}`", p.id));
            continue;
        };
        if sigma.len() != a.len() || sigma.image() != *a.universe() || sigma.domain_set() != *a.universe() {
            r.error(format!("map for `{}` is not a permutation of the structure", p.id));
            continue;
        }
        if !a.is_automorphism(sigma) {
            r.error(format!("map for `{}` is not an automorphism", p.id));
        }
        for &(x, y) in p.map.pairs() {
            let (ex, ey) = (emb.get(x).unwrap(), emb.get(y).unwrap());
            if sigma.get(ex) != Some(ey) {
                r.error(format!("map for `{}` does not extend it at {x} ↦ {y}", p.id));
            }
        }
    }
    r
}

/// Why a solution is not fully symmetric.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SolutionAsymmetry {
    /// No chart-preserving automorphism moves `u0` onto this chart.
    Intransitive { chart: usize },
    /// The overlap of two charts is not a composition of partials.
    Overlap { charts: (usize, usize), map: PartialMap },
}

/// (i) automorphisms preserving chart coordinates act transitively on the
/// charts; (ii) every overlap transition `π_{u'} ∘ π_u⁻¹` equals, domain
/// included, a composition of partials.
pub fn is_fully_symmetric_solution(
    inst: &EppaInstance,
    sol: &EppaSolution,
    budget: &mut Budget,
) -> Result<Verdict<SolutionAsymmetry>> {
    let h = instance_to_pattern(inst)?;
    let r = &sol.realisation;
    let cl = closure(&h, DEFAULT_CLOSURE_CAP)?;
    for i in 0..r.charts().len() {
        for j in r.overlapping(i) {
            let m = r.transition(i, j);
            if cl.lookup(0, 0, &m).is_none() {
                return Ok(Verdict::Fails(SolutionAsymmetry::Overlap { charts: (i, j), map: m }));
            }
        }
    }
    let id = PatternSymmetry::identity(&h);
    let mut unknown = false;
    for c in 0..r.charts().len() {
        if c == sol.u0 {
            continue;
        }
        let out = find_realisation_symmetry(r, &id, Some((sol.u0, c)), budget)?;
        if out.found.is_empty() {
            if out.exhaustive {
                return Ok(Verdict::Fails(SolutionAsymmetry::Intransitive { chart: c }));
            }
            unknown = true;
        }
    }
    Ok(if unknown { Verdict::Unknown } else { Verdict::Holds })
}

/// A structure with charts that can be navigated along links, as needed to
/// build homomorphisms chart by chart.
pub trait ChartTarget {
    type Chart: Clone;
    fn structure(&self) -> &RelStructure;
    /// Some chart onto `site`.
    fn root(&self, site: SiteId) -> Option<Self::Chart>;
    /// A chart `c'` with `π_{c'} ∘ π_c⁻¹ ⊇ ρ_e`.
    fn follow(&self, c: &Self::Chart, e: LinkId) -> Option<Self::Chart>;
    /// `π_c⁻¹(a)`.
    fn preimage(&self, c: &Self::Chart, a: Elem) -> Option<Elem>;
}

/// A realisation navigated by condition (i).
pub struct RealisationTarget<'a> {
    pub realisation: &'a Realisation,
    pub pattern: &'a AmalgamationPattern,
}

impl ChartTarget for RealisationTarget<'_> {
    type Chart = usize;

    fn structure(&self) -> &RelStructure {
        self.realisation.structure()
    }

    fn root(&self, site: SiteId) -> Option<usize> {
        self.realisation.charts_at(site).first().copied()
    }

    fn follow(&self, &c: &usize, e: LinkId) -> Option<usize> {
        let inc = self.pattern.incidence();
        let rho = self.pattern.rho(e);
        (0..self.realisation.charts().len()).find(|&d| {
            self.realisation.chart(d).site == inc.tgt(e) && rho.is_subset_of(&self.realisation.transition(c, d))
        })
    }

    fn preimage(&self, &c: &usize, a: Elem) -> Option<Elem> {
        self.realisation.chart(c).map.inverse().get(a)
    }
}

/// A solution navigated through its automorphisms: the chart `σ` is
/// `π0 ∘ σ⁻¹` on `σ(u0)`, and following `p` from `σ` gives `σ ∘ σ_p⁻¹`.
pub struct SolutionTarget<'a> {
    pub instance: &'a EppaInstance,
    pub solution: &'a EppaSolution,
}

impl ChartTarget for SolutionTarget<'_> {
    type Chart = PartialMap;

    fn structure(&self) -> &RelStructure {
        self.solution.structure()
    }

    fn root(&self, site: SiteId) -> Option<PartialMap> {
        (site == 0).then(|| PartialMap::identity(self.structure().universe().iter().copied()))
    }

    fn follow(&self, c: &PartialMap, e: LinkId) -> Option<PartialMap> {
        let id = &self.instance.partials.get(e)?.id;
        let sp = self.solution.automorphisms.get(id)?;
        Some(sp.inverse().then(c))
    }

    fn preimage(&self, c: &PartialMap, a: Elem) -> Option<Elem> {
        let x = self.solution.embedding().get(a)?;
        c.get(x)
    }
}

/// A homomorphism from `r` restricted to `d` into `target`, built along a
/// tree decomposition of the traces of the co-ordinate domains on `d`: the
/// root trace maps through a root chart, and each child follows the
/// closure witness walk of its overlap with the parent.
pub fn universal_hom<T: ChartTarget>(
    r: &Realisation,
    h: &AmalgamationPattern,
    d: &BTreeSet<Elem>,
    target: &T,
) -> Result<Homomorphism> {
    let cl = closure(h, DEFAULT_CLOSURE_CAP)?;
    universal_hom_with(r, &cl, d, target)
}

/// [`universal_hom`] with the pattern's closure computed once by the caller.
pub fn universal_hom_with<T: ChartTarget>(
    r: &Realisation,
    cl: &WalkMapClosure,
    d: &BTreeSet<Elem>,
    target: &T,
) -> Result<Homomorphism> {
    if let Some(x) = d.iter().find(|x| !r.structure().contains(**x)) {
        return Err(Error::Precondition(format!("{x} is not in the realisation")));
    }
    if d.is_empty() {
        return Ok(Homomorphism::new());
    }
    let mut rep: BTreeMap<BTreeSet<Elem>, usize> = BTreeMap::new();
    for c in 0..r.charts().len() {
        let trace: BTreeSet<Elem> = r.chart_domain(c).intersection(d).copied().collect();
        if !trace.is_empty() {
            rep.entry(trace).or_insert(c);
        }
    }
    let hyp = Hypergraph::new(d.clone(), rep.keys().cloned().collect())?;
    if !hyp.validate().is_ok() {
        return Err(Error::Precondition("some element lies in no co-ordinate domain".into()));
    }
    let td = tree_decomposition(&hyp)
        .ok_or_else(|| Error::Precondition("traces of the co-ordinate domains are not acyclic".into()))?;
    let chart_of: Vec<usize> = td.nodes.iter().map(|t| rep[t]).collect();
    let n = td.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &td.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut image: Vec<Option<T::Chart>> = vec![None; n];
    let mut hom = Homomorphism::new();
    let place = |node: usize, tc: &T::Chart, hom: &mut Homomorphism| -> Result<()> {
        let c = r.chart(chart_of[node]);
        for &x in &td.nodes[node] {
            let a = c.map.get(x).expect("trace lies in the chart");
            let y = target
                .preimage(tc, a)
                .ok_or_else(|| Error::Internal(format!("target chart misses coordinate {a}")))?;
            if hom.insert(x, y).is_some_and(|prev| prev != y) {
                return Err(Error::Internal(format!("element {x} is sent to two places")));
            }
        }
        Ok(())
    };
    let root_site = r.chart(chart_of[0]).site;
    let root = target
        .root(root_site)
        .ok_or_else(|| Error::Precondition(format!("target has no chart onto site {root_site}")))?;
    place(0, &root, &mut hom)?;
    image[0] = Some(root);
    let mut queue = VecDeque::from([0usize]);
    while let Some(p) = queue.pop_front() {
        for &q in &adj[p] {
            if image[q].is_some() {
                continue;
            }
            let (cp, cq) = (chart_of[p], chart_of[q]);
            let m = r.transition(cp, cq);
            let tc = if m.is_empty() {
                target.root(r.chart(cq).site)
            } else {
                let entry = cl
                    .lookup(r.chart(cp).site, r.chart(cq).site, &m)
                    .ok_or_else(|| Error::Precondition(format!("overlap of charts {cp} and {cq} is not a walk map")))?;
                let mut cur = image[p].clone().unwrap();
                for &e in &entry.witness.links {
                    cur = target
                        .follow(&cur, e)
                        .ok_or_else(|| Error::Precondition("target cannot follow a link".into()))?;
                }
                Some(cur)
            }
            .ok_or_else(|| Error::Precondition("target has no chart onto a needed site".into()))?;
            place(q, &tc, &mut hom)?;
            image[q] = Some(tc);
            queue.push_back(q);
        }
    }
    let sub = r.structure().restrict(d);
    if let Some((rel, t)) = homomorphism_violation(&sub, target.structure(), &hom) {
        return Err(Error::Internal(format!("constructed map breaks `{rel}` at {t:?}")));
    }
    Ok(hom)
}

/// No member of `forbidden` maps homomorphically into `a`. The witness is
/// the index of a member and a homomorphism.
pub fn check_forbidden_class(
    a: &RelStructure,
    forbidden: &[RelStructure],
    budget: &mut Budget,
) -> Verdict<(usize, Homomorphism)> {
    let mut unknown = false;
    for (i, x) in forbidden.iter().enumerate() {
        let out = find_homomorphisms_limited(x, a, budget, 1);
        if let Some(hom) = out.found.into_iter().next() {
            return Verdict::Fails((i, hom));
        }
        unknown |= !out.exhaustive;
    }
    if unknown {
        Verdict::Unknown
    } else {
        Verdict::Holds
    }
}
