//! Hypergraphs, graded acyclicity, Graham reduction, tree decompositions and
//! coverings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{exploded_view, ExplodedView};
use crate::product::Realisation;
use crate::report::{ValidationReport, Verdict};
use crate::structure::{Elem, RelStructure, Signature};

/// A vertex set with a set of hyperedges. Hyperedges are kept sorted and
/// without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    vertices: BTreeSet<Elem>,
    edges: Vec<BTreeSet<Elem>>,
}

#[derive(Serialize, Deserialize)]
struct HypergraphJson {
    vertices: Vec<Elem>,
    hyperedges: Vec<Vec<Elem>>,
}

impl Hypergraph {
    /// Fails when a hyperedge mentions a vertex outside `vertices`.
    pub fn new(vertices: BTreeSet<Elem>, edges: Vec<BTreeSet<Elem>>) -> Result<Self> {
        if let Some(x) = edges.iter().flatten().find(|x| !vertices.contains(x)) {
            return Err(Error::Invalid(format!("hyperedge vertex {x} is not a vertex")));
        }
        let edges: BTreeSet<BTreeSet<Elem>> = edges.into_iter().collect();
        Ok(Self {
            vertices,
            edges: edges.into_iter().collect(),
        })
    }

    /// The hypergraph on the union of the given hyperedges.
    pub fn from_edges<I, E>(edges: I) -> Self
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = Elem>,
    {
        let edges: Vec<BTreeSet<Elem>> = edges.into_iter().map(|e| e.into_iter().collect()).collect();
        let vertices = edges.iter().flatten().copied().collect();
        Self::new(vertices, edges).expect("vertices are the union of the edges")
    }

    pub fn vertices(&self) -> &BTreeSet<Elem> {
        &self.vertices
    }

    pub fn edges(&self) -> &[BTreeSet<Elem>] {
        &self.edges
    }

    /// Every vertex lies in a hyperedge and no hyperedge is empty.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        if self.edges.iter().any(BTreeSet::is_empty) {
            r.error("empty hyperedge");
        }
        for v in &self.vertices {
            if !self.edges.iter().any(|e| e.contains(v)) {
                r.error(format!("vertex {v} lies in no hyperedge"));
            }
        }
        r
    }

    /// The induced sub-hypergraph on `subset`: traces of hyperedges, without
    /// the empty one.
    pub fn induced(&self, subset: &BTreeSet<Elem>) -> Hypergraph {
        let vertices: BTreeSet<Elem> = self.vertices.intersection(subset).copied().collect();
        let edges = self
            .edges
            .iter()
            .map(|e| e.intersection(subset).copied().collect::<BTreeSet<_>>())
            .filter(|e| !e.is_empty())
            .collect();
        Hypergraph::new(vertices, edges).expect("traces stay inside the subset")
    }

    /// The index of a hyperedge containing `set`, if any.
    pub fn edge_containing(&self, set: &BTreeSet<Elem>) -> Option<usize> {
        self.edges.iter().position(|e| set.is_subset(e))
    }

    /// The hypergraph of a structure: its universe with one hyperedge per
    /// tuple, plus singletons for elements in no tuple.
    pub fn of_structure(a: &RelStructure) -> Self {
        let mut edges: Vec<BTreeSet<Elem>> = a
            .relations()
            .flat_map(|(_, ts)| ts.iter().map(|t| t.iter().copied().collect()))
            .collect();
        for &x in a.universe() {
            if !edges.iter().any(|e| e.contains(&x)) {
                edges.push(BTreeSet::from([x]));
            }
        }
        Hypergraph::new(a.universe().clone(), edges).expect("tuples lie in the universe")
    }
}

impl Serialize for Hypergraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HypergraphJson {
            vertices: self.vertices.iter().copied().collect(),
            hyperedges: self.edges.iter().map(|e| e.iter().copied().collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hypergraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = HypergraphJson::deserialize(d)?;
        Hypergraph::new(
            j.vertices.into_iter().collect(),
            j.hyperedges.into_iter().map(|e| e.into_iter().collect()).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// A simple undirected graph given by adjacency sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub adj: BTreeMap<Elem, BTreeSet<Elem>>,
}

impl Graph {
    pub fn vertices(&self) -> impl Iterator<Item = Elem> + '_ {
        self.adj.keys().copied()
    }

    /// Edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> BTreeSet<(Elem, Elem)> {
        self.adj
            .iter()
            .flat_map(|(&a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn adjacent(&self, a: Elem, b: Elem) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }
}

/// The union of the cliques on the hyperedges.
pub fn gaifman(h: &Hypergraph) -> Graph {
    let mut adj: BTreeMap<Elem, BTreeSet<Elem>> = h.vertices().iter().map(|&v| (v, BTreeSet::new())).collect();
    for e in h.edges() {
        for &a in e {
            for &b in e {
                if a != b {
                    adj.get_mut(&a).unwrap().insert(b);
                }
            }
        }
    }
    Graph { adj }
}

/// A chordless cycle of the Gaifman graph of length `4..=n`, found by
/// depth-first search over induced paths from each least vertex.
pub fn chordless_cycle(h: &Hypergraph, n: usize) -> Option<Vec<Elem>> {
    let g = gaifman(h);
    for len in 4..=n {
        for &start in h.vertices() {
            let mut path = vec![start];
            if let Some(c) = extend_induced(&g, &mut path, len) {
                return Some(c);
            }
        }
    }
    None
}

fn extend_induced(g: &Graph, path: &mut Vec<Elem>, len: usize) -> Option<Vec<Elem>> {
    if path.len() == len {
        return Some(path.clone());
    }
    let (start, last, k) = (path[0], *path.last().unwrap(), path.len());
    for &next in &g.adj[&last] {
        // the start is the least vertex on the cycle
        if next <= start || path.contains(&next) {
            continue;
        }
        if k > 2 && path[1..k - 1].iter().any(|&p| g.adjacent(p, next)) {
            continue;
        }
        let closes = g.adjacent(start, next);
        if k > 1 && closes != (k == len - 1) {
            continue;
        }
        path.push(next);
        if let Some(c) = extend_induced(g, path, len) {
            return Some(c);
        }
        path.pop();
    }
    None
}

/// A clique of the Gaifman graph of size at most `n` inside no hyperedge,
/// of least size (hence minimal).
pub fn uncovered_clique(h: &Hypergraph, n: usize) -> Option<Vec<Elem>> {
    let g = gaifman(h);
    let verts: Vec<Elem> = h.vertices().iter().copied().collect();
    for size in 3..=n.min(verts.len()) {
        let mut clique = Vec::new();
        if let Some(c) = clique_search(&g, h, &verts, 0, size, &mut clique) {
            return Some(c);
        }
    }
    None
}

fn clique_search(
    g: &Graph,
    h: &Hypergraph,
    verts: &[Elem],
    from: usize,
    size: usize,
    clique: &mut Vec<Elem>,
) -> Option<Vec<Elem>> {
    if clique.len() == size {
        let set: BTreeSet<Elem> = clique.iter().copied().collect();
        return h.edge_containing(&set).is_none().then(|| clique.clone());
    }
    for i in from..verts.len() {
        let v = verts[i];
        if clique.iter().all(|&c| g.adjacent(c, v)) {
            clique.push(v);
            if let Some(c) = clique_search(g, h, verts, i + 1, size, clique) {
                return Some(c);
            }
            clique.pop();
        }
    }
    None
}

/// No chordless Gaifman cycle of length `4..=n`.
pub fn is_chordal_up_to(h: &Hypergraph, n: usize) -> Verdict<Vec<Elem>> {
    match chordless_cycle(h, n) {
        Some(c) => Verdict::Fails(c),
        None => Verdict::Holds,
    }
}

/// Every Gaifman clique of size at most `n` lies in a hyperedge.
pub fn is_conformal_up_to(h: &Hypergraph, n: usize) -> Verdict<Vec<Elem>> {
    match uncovered_clique(h, n) {
        Some(c) => Verdict::Fails(c),
        None => Verdict::Holds,
    }
}

/// Why a hypergraph fails to be `N`-acyclic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AcyclicityWitness {
    ChordlessCycle(Vec<Elem>),
    UncoveredClique(Vec<Elem>),
}

/// Chordal and conformal up to `n`. Every hypergraph is 2-acyclic.
pub fn n_acyclicity(h: &Hypergraph, n: usize) -> Verdict<AcyclicityWitness> {
    if let Some(c) = uncovered_clique(h, n) {
        return Verdict::Fails(AcyclicityWitness::UncoveredClique(c));
    }
    if let Some(c) = chordless_cycle(h, n) {
        return Verdict::Fails(AcyclicityWitness::ChordlessCycle(c));
    }
    Verdict::Holds
}

pub fn is_n_acyclic_hyp(h: &Hypergraph, n: usize) -> bool {
    n_acyclicity(h, n).holds()
}

/// Acyclic: chordal and conformal without a size bound.
pub fn is_acyclic(h: &Hypergraph) -> bool {
    is_n_acyclic_hyp(h, h.vertices().len().max(2))
}

/// One step of Graham's reduction. Hyperedges are referred to by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrahamStep {
    /// Delete a vertex lying in exactly one hyperedge.
    Vertex { vertex: Elem, edge: usize },
    /// Delete a hyperedge that is empty or contained in another.
    Edge { edge: usize, into: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrahamResult {
    pub acyclic: bool,
    pub trace: Vec<GrahamStep>,
    /// Hyperedges (as left at the fixpoint) that could not be removed.
    pub residue: Vec<BTreeSet<Elem>>,
}

/// Graham's reduction with a fixed order: the least vertex in exactly one
/// hyperedge first; otherwise the lowest-index hyperedge that is empty or
/// contained in another (lowest-index container).
pub fn graham(h: &Hypergraph) -> GrahamResult {
    graham_with_order(h, |c| c[0])
}

/// Graham's reduction, picking among the enabled steps with `choose`.
/// Exposed to test that the outcome does not depend on the order.
pub fn graham_with_order(h: &Hypergraph, mut choose: impl FnMut(&[GrahamStep]) -> GrahamStep) -> GrahamResult {
    let mut live: Vec<Option<BTreeSet<Elem>>> = h.edges().iter().cloned().map(Some).collect();
    let mut trace = Vec::new();
    loop {
        let mut enabled = Vec::new();
        let mut count: BTreeMap<Elem, Vec<usize>> = BTreeMap::new();
        for (i, e) in live.iter().enumerate() {
            if let Some(e) = e {
                for &v in e {
                    count.entry(v).or_default().push(i);
                }
            }
        }
        for (&v, es) in &count {
            if es.len() == 1 {
                enabled.push(GrahamStep::Vertex { vertex: v, edge: es[0] });
            }
        }
        for (i, e) in live.iter().enumerate() {
            let Some(e) = e else { continue };
            if e.is_empty() {
                enabled.push(GrahamStep::Edge { edge: i, into: None });
                continue;
            }
            let container = live.iter().enumerate().find(|(j, f)| {
                *j != i && f.as_ref().is_some_and(|f| e.is_subset(f) && (e != f || *j < i))
            });
            if let Some((j, _)) = container {
                enabled.push(GrahamStep::Edge { edge: i, into: Some(j) });
            }
        }
        if enabled.is_empty() {
            break;
        }
        let step = choose(&enabled);
        match &step {
            GrahamStep::Vertex { vertex, edge } => {
                live[*edge].as_mut().unwrap().remove(vertex);
            }
            GrahamStep::Edge { edge, .. } => live[*edge] = None,
        }
        trace.push(step);
    }
    let residue: Vec<BTreeSet<Elem>> = live.into_iter().flatten().collect();
    GrahamResult {
        acyclic: residue.is_empty(),
        trace,
        residue,
    }
}

/// A tree on the hyperedges in which the nodes containing any given vertex
/// form a connected subtree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeDecomposition {
    /// Node `i` is labelled by hyperedge `i`.
    pub nodes: Vec<BTreeSet<Elem>>,
    pub edges: Vec<(usize, usize)>,
}

/// Checks that `t` is a tree whose labels are exactly the hyperedges of `h`
/// and that every vertex occupies a connected set of nodes.
pub fn validate_tree_decomposition(h: &Hypergraph, t: &TreeDecomposition) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = t.nodes.len();
    let labels: BTreeSet<&BTreeSet<Elem>> = t.nodes.iter().collect();
    let edges: BTreeSet<&BTreeSet<Elem>> = h.edges().iter().collect();
    if labels != edges {
        r.error("node labels are not exactly the hyperedges");
    }
    if n > 0 && t.edges.len() != n - 1 {
        r.error(format!("{} tree edges for {n} nodes", t.edges.len()));
    }
    if t.edges.iter().any(|&(a, b)| a >= n || b >= n || a == b) {
        r.error("tree edge with a bad endpoint");
        return r;
    }
    let connected = |keep: &dyn Fn(usize) -> bool| -> bool {
        let members: Vec<usize> = (0..n).filter(|&i| keep(i)).collect();
        let Some(&first) = members.first() else { return true };
        let mut seen = BTreeSet::from([first]);
        let mut stack = vec![first];
        while let Some(x) = stack.pop() {
            for &(a, b) in &t.edges {
                for (p, q) in [(a, b), (b, a)] {
                    if p == x && keep(q) && seen.insert(q) {
                        stack.push(q);
                    }
                }
            }
        }
        seen.len() == members.len()
    };
    if !connected(&|_| true) {
        r.error("the tree is not connected");
    }
    for &v in h.vertices() {
        if !connected(&|i| t.nodes[i].contains(&v)) {
            r.error(format!("nodes containing vertex {v} are not connected"));
        }
    }
    r
}

/// A tree decomposition built by replaying Graham's reduction backwards:
/// each hyperedge, in reverse order of removal, is attached to the
/// lowest-index placed node containing its intersection with the vertices
/// placed so far. `None` when `h` is not acyclic.
pub fn tree_decomposition(h: &Hypergraph) -> Option<TreeDecomposition> {
    let g = graham(h);
    if !g.acyclic {
        return None;
    }
    let order: Vec<usize> = g
        .trace
        .iter()
        .rev()
        .filter_map(|s| match s {
            GrahamStep::Edge { edge, .. } => Some(*edge),
            GrahamStep::Vertex { .. } => None,
        })
        .collect();
    let nodes = h.edges().to_vec();
    let mut placed: Vec<usize> = Vec::new();
    let mut seen: BTreeSet<Elem> = BTreeSet::new();
    let mut edges = Vec::new();
    for &u in &order {
        if !placed.is_empty() {
            let meet: BTreeSet<Elem> = nodes[u].intersection(&seen).copied().collect();
            let parent = placed
                .iter()
                .copied()
                .filter(|&p| meet.is_subset(&nodes[p]))
                .min()?;
            edges.push((parent, u));
        }
        placed.push(u);
        seen.extend(nodes[u].iter().copied());
    }
    let t = TreeDecomposition { nodes, edges };
    validate_tree_decomposition(h, &t).is_ok().then_some(t)
}

/// The exploded view `H(B, S)`: one site per hyperedge (labelled by its
/// index) and identity links on the overlaps of intersecting hyperedges.
pub fn exploded_view_hyp(h: &Hypergraph) -> Result<ExplodedView> {
    let a = RelStructure::new(Signature::empty(), h.vertices().iter().copied());
    exploded_view(&a, h.edges())
}

/// A vertex map from an upstairs onto a downstairs hypergraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergraphCovering {
    pub upstairs: Hypergraph,
    pub downstairs: Hypergraph,
    pub projection: BTreeMap<Elem, Elem>,
}

impl HypergraphCovering {
    pub fn identity(h: &Hypergraph) -> Self {
        Self {
            upstairs: h.clone(),
            downstairs: h.clone(),
            projection: h.vertices().iter().map(|&v| (v, v)).collect(),
        }
    }

    pub fn image(&self, u: &BTreeSet<Elem>) -> BTreeSet<Elem> {
        u.iter().map(|x| self.projection[x]).collect()
    }

    /// Upstairs vertices over `b`.
    pub fn fibre(&self, b: Elem) -> Vec<Elem> {
        self.projection.iter().filter(|(_, &y)| y == b).map(|(&x, _)| x).collect()
    }
}

/// The covering of `h` induced by a realisation of its exploded view: each
/// element goes to the vertex behind its coordinate in any chart. The
/// upstairs hypergraph is the atlas hypergraph.
pub fn covering_from_realisation(r: &Realisation, h: &Hypergraph) -> Result<HypergraphCovering> {
    let view = exploded_view_hyp(h)?;
    let mut projection: BTreeMap<Elem, Elem> = BTreeMap::new();
    for c in r.charts() {
        for &(x, a) in c.map.pairs() {
            let (b, _) = *view
                .origin
                .get(&a)
                .ok_or_else(|| Error::Precondition(format!("chart coordinate {a} is not in the exploded view")))?;
            if projection.insert(x, b).is_some_and(|prev| prev != b) {
                return Err(Error::Internal(format!("element {x} projects to two vertices")));
            }
        }
    }
    Ok(HypergraphCovering {
        upstairs: crate::product::atlas_hypergraph(r),
        downstairs: h.clone(),
        projection,
    })
}

/// Checks bijectivity on hyperedges, surjectivity, and the lifting of every
/// overlap `π(u) ∩ s'` to some `u'` over `s'` with `π(u ∩ u') = π(u) ∩ s'`.
pub fn verify_hyp_covering(c: &HypergraphCovering) -> ValidationReport {
    let mut r = ValidationReport::new();
    let (up, down) = (&c.upstairs, &c.downstairs);
    for v in up.vertices() {
        match c.projection.get(v) {
            None => r.error(format!("vertex {v} has no image")),
            Some(b) if !down.vertices().contains(b) => r.error(format!("vertex {v} maps outside the base")),
            _ => {}
        }
    }
    if !r.is_ok() {
        return r;
    }
    let images: Vec<BTreeSet<Elem>> = up.edges().iter().map(|u| c.image(u)).collect();
    for (i, u) in up.edges().iter().enumerate() {
        if images[i].len() != u.len() {
            r.error(format!("projection is not injective on hyperedge {u:?}"));
        }
        if !down.edges().contains(&images[i]) {
            r.error(format!("hyperedge {u:?} does not map onto a hyperedge"));
        }
    }
    for s in down.edges() {
        if !images.contains(s) {
            r.error(format!("hyperedge {s:?} has no preimage"));
        }
    }
    for b in down.vertices() {
        if !c.projection.values().any(|y| y == b) {
            r.error(format!("vertex {b} has no preimage"));
        }
    }
    if !r.is_ok() {
        return r;
    }
    for (i, u) in up.edges().iter().enumerate() {
        for s2 in down.edges() {
            let want: BTreeSet<Elem> = images[i].intersection(s2).copied().collect();
            if want.is_empty() || s2 == &images[i] {
                continue;
            }
            let ok = up.edges().iter().enumerate().any(|(j, u2)| {
                &images[j] == s2 && c.image(&u.intersection(u2).copied().collect()) == want
            });
            if !ok {
                r.error(format!("overlap of {u:?} with {s2:?} below does not lift"));
            }
        }
    }
    r
}
