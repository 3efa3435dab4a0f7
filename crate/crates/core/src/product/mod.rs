//! Direct and reduced products with groupoids, pattern coverings and
//! realisations.

mod realisation;
mod symmetry;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::groupoid::{cayley_incidence, FreeTruncation, GElem, Groupoid};
use crate::hypergraph::Hypergraph;
use crate::incidence::{IncidencePattern, Link, LinkId, SiteId, Walk};
use crate::pattern::{
    approx, closure, is_globally_consistent, quotient, AmalgamationPattern, DEFAULT_CLOSURE_CAP,
};
use crate::report::{ValidationReport, Verdict};
use crate::structure::{Elem, PartialMap, RelStructure};

pub use realisation::{verify_realisation, verify_realisation_on, Chart, Realisation};
pub(crate) use realisation::verify_with_closure;
pub use symmetry::{
    find_realisation_symmetry, is_fully_symmetric_realisation, rigid_symmetries, RealisationAsymmetry,
    RigidSymmetries, RigidSymmetry,
};

/// `H⊗G` with the pair `(a, g)` behind each carrier element.
#[derive(Clone, Debug)]
pub struct DirectProduct {
    pub pattern: AmalgamationPattern,
    pub provenance: BTreeMap<Elem, (Elem, GElem)>,
    index: HashMap<(Elem, GElem), Elem>,
}

impl DirectProduct {
    /// The carrier element for `(a, g)`.
    pub fn element(&self, a: Elem, g: GElem) -> Option<Elem> {
        self.index.get(&(a, g)).copied()
    }
}

/// The direct product over the Cayley incidence of `g`: site `g` carries a
/// copy of `A_{ι2(g)}` and link `e[g]` maps `(a, g)` to `(ρ_e(a), g·e^G)`.
/// Elements are numbered by group element, then by carrier element.
pub fn direct_product(h: &AmalgamationPattern, g: &Groupoid) -> Result<DirectProduct> {
    if h.incidence() != g.incidence() {
        return Err(Error::Precondition("pattern and groupoid use different incidence patterns".into()));
    }
    let inc = h.incidence();
    let hat = cayley_incidence(g);
    let mut carrier = RelStructure::new(h.signature().clone(), []);
    let mut site_of = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    let mut index = HashMap::new();
    let mut next: Elem = 0;
    for x in 0..g.len() {
        for &a in h.site_elements(g.tgt(x)) {
            carrier.add_element(next);
            site_of.insert(next, x);
            provenance.insert(next, (a, x));
            index.insert((a, x), next);
            next += 1;
        }
    }
    for (name, tuples) in h.carrier().relations() {
        for t in tuples {
            let s = h.site_of(t[0]).expect("tuples lie in sites");
            for x in g.elements_to(s) {
                carrier.add_tuple(name, t.iter().map(|a| index[&(*a, x)]).collect())?;
            }
        }
    }
    let mut rho = Vec::with_capacity(hat.link_count());
    for x in 0..g.len() {
        for &e in inc.outgoing(g.tgt(x)) {
            let y = g.mul(x, g.generator(e));
            rho.push(
                h.rho(e)
                    .pairs()
                    .iter()
                    .map(|&(a, b)| (index[&(a, x)], index[&(b, y)]))
                    .collect::<PartialMap>(),
            );
        }
    }
    let pattern = AmalgamationPattern::new(hat, carrier, site_of, rho)?;
    Ok(DirectProduct {
        pattern,
        provenance,
        index,
    })
}

/// A homomorphism from an upstairs pattern onto a downstairs pattern, given
/// sort by sort.
#[derive(Clone, Debug)]
pub struct PatternCovering {
    pub upstairs: AmalgamationPattern,
    pub downstairs: AmalgamationPattern,
    pub sites: Vec<SiteId>,
    pub links: Vec<LinkId>,
    pub elems: BTreeMap<Elem, Elem>,
}

/// `H⊗G → H`, `(a, g) ↦ a`, `g ↦ ι2(g)`, `e[g] ↦ e`.
pub fn projection_covering(h: &AmalgamationPattern, g: &Groupoid) -> Result<PatternCovering> {
    let dp = direct_product(h, g)?;
    let inc = h.incidence();
    let mut links = Vec::new();
    for x in 0..g.len() {
        links.extend(inc.outgoing(g.tgt(x)).iter().copied());
    }
    Ok(PatternCovering {
        sites: (0..g.len()).map(|x| g.tgt(x)).collect(),
        links,
        elems: dp.provenance.iter().map(|(&p, &(a, _))| (p, a)).collect(),
        upstairs: dp.pattern,
        downstairs: h.clone(),
    })
}

pub fn identity_covering(h: &AmalgamationPattern) -> PatternCovering {
    PatternCovering {
        upstairs: h.clone(),
        downstairs: h.clone(),
        sites: h.incidence().sites().collect(),
        links: (0..h.incidence().link_count()).collect(),
        elems: h.carrier().universe().iter().map(|&a| (a, a)).collect(),
    }
}

/// Checks the covering conditions: surjectivity on every sort, commuting
/// incidence and site maps, isomorphic restriction to each site, commuting
/// link maps, and lifting of every link at every upstairs site.
pub fn verify_pattern_covering(c: &PatternCovering) -> ValidationReport {
    let mut r = ValidationReport::new();
    let (up, down) = (&c.upstairs, &c.downstairs);
    let (ui, di) = (up.incidence(), down.incidence());
    if c.sites.len() != ui.site_count() || c.links.len() != ui.link_count() {
        r.error("projection does not cover every upstairs site and link");
        return r;
    }
    if c.sites.iter().any(|&s| s >= di.site_count()) || c.links.iter().any(|&e| e >= di.link_count()) {
        r.error("projection leaves the downstairs incidence pattern");
        return r;
    }
    if let Some(a) = up.carrier().universe().iter().find(|a| !c.elems.contains_key(a)) {
        r.error(format!("element {a} has no image"));
        return r;
    }
    let hit_sites: BTreeSet<SiteId> = c.sites.iter().copied().collect();
    for s in di.sites().filter(|s| !hit_sites.contains(s)) {
        r.error(format!("site {} has no preimage", di.site_label(s)));
    }
    let hit_links: BTreeSet<LinkId> = c.links.iter().copied().collect();
    for e in (0..di.link_count()).filter(|e| !hit_links.contains(e)) {
        r.error(format!("link `{}` has no preimage", di.link(e).name));
    }
    let hit_elems: BTreeSet<Elem> = c.elems.values().copied().collect();
    for a in down.carrier().universe().iter().filter(|a| !hit_elems.contains(a)) {
        r.error(format!("element {a} has no preimage"));
    }
    for (e, l) in ui.links().iter().enumerate() {
        let f = c.links[e];
        if di.src(f) != c.sites[l.src] || di.tgt(f) != c.sites[l.tgt] {
            r.error(format!("link `{}` is not mapped compatibly with its endpoints", l.name));
        }
        if di.inv(f) != c.links[l.inv] {
            r.error(format!("link `{}` is not mapped compatibly with reversal", l.name));
        }
    }
    for s in ui.sites() {
        let map: PartialMap = match PartialMap::from_pairs(up.site_elements(s).iter().map(|a| (*a, c.elems[a]))) {
            Ok(m) => m,
            Err(_) => {
                r.error(format!("restriction to site {} is not injective", ui.site_label(s)));
                continue;
            }
        };
        let target: BTreeSet<Elem> = down.site_elements(c.sites[s]).iter().copied().collect();
        if map.image() != target {
            r.error(format!("restriction to site {} is not onto its image site", ui.site_label(s)));
            continue;
        }
        if let Ok(Some((rel, t))) = crate::structure::partial_isomorphism_violation(up.carrier(), down.carrier(), &map)
        {
            r.error(format!("restriction to site {} breaks `{rel}` at {t:?}", ui.site_label(s)));
        }
    }
    for (e, l) in ui.links().iter().enumerate() {
        let moved = PartialMap::from_pairs(up.rho(e).pairs().iter().map(|(a, b)| (c.elems[a], c.elems[b])));
        if moved.as_ref().ok() != Some(down.rho(c.links[e])) {
            r.error(format!("link map of `{}` does not project onto that of `{}`", l.name, di.link(c.links[e]).name));
        }
    }
    for s in ui.sites() {
        for &f in di.outgoing(c.sites[s]) {
            if !ui.outgoing(s).iter().any(|&e| c.links[e] == f) {
                r.error(format!(
                    "link `{}` does not lift at site {}",
                    di.link(f).name,
                    ui.site_label(s)
                ));
            }
        }
    }
    r
}

/// The quotient of `H⊗G` by `≈` with its atlas `u[g]`.
#[derive(Clone, Debug)]
pub struct ReducedProduct {
    pub realisation: Realisation,
    pub product: DirectProduct,
    pub groupoid: Groupoid,
    /// Product element ↦ element of the quotient.
    pub class_of: BTreeMap<Elem, Elem>,
    /// `g` ↦ index of the chart `u[g]`.
    pub chart_of: Vec<usize>,
}

impl ReducedProduct {
    /// `[(a, g)]`.
    pub fn class(&self, a: Elem, g: GElem) -> Option<Elem> {
        self.product.element(a, g).map(|p| self.class_of[&p])
    }
}

/// Quotient of `H⊗G` by `≈` with charts `[(a, g)] ↦ a` on `u[g]`.
pub fn reduced_product(h: &AmalgamationPattern, g: &Groupoid) -> Result<ReducedProduct> {
    let dp = direct_product(h, g)?;
    if let Verdict::Fails(w) = is_globally_consistent(&dp.pattern)? {
        return Err(Error::Precondition(format!("direct product is not globally consistent: {w}")));
    }
    let q = quotient(&dp.pattern)?;
    let part = approx(&dp.pattern);
    let class_of: BTreeMap<Elem, Elem> = part.class_of.iter().map(|(&p, &k)| (p, k as Elem)).collect();
    let charts = q
        .charts()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let map: PartialMap = c.map.pairs().iter().map(|&(x, p)| (x, dp.provenance[&p].0)).collect();
            (q.chart_domain(i).clone(), g.tgt(c.site), map)
        })
        .collect();
    let realisation = Realisation::from_charts(q.structure().clone(), charts);
    Ok(ReducedProduct {
        realisation,
        product: dp,
        groupoid: g.clone(),
        class_of,
        chart_of: (0..g.len()).collect(),
    })
}

/// The realisation of the downstairs pattern induced by a covering whose
/// upstairs pattern is simple and strongly coherent: the upstairs quotient,
/// with each chart composed with the projection.
pub fn realisation_from_covering(c: &PatternCovering) -> Result<Realisation> {
    let cl = closure(&c.upstairs, DEFAULT_CLOSURE_CAP)?;
    if cl.simplicity_violation(&c.upstairs).is_some() {
        return Err(Error::Precondition("upstairs pattern is not simple".into()));
    }
    if cl.strong_coherence_violation().is_some() {
        return Err(Error::Precondition("upstairs pattern is not strongly coherent".into()));
    }
    let q = quotient(&c.upstairs)?;
    let charts = q
        .charts()
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let map: PartialMap = ch.map.pairs().iter().map(|&(x, p)| (x, c.elems[&p])).collect();
            (q.chart_domain(i).clone(), c.sites[ch.site], map)
        })
        .collect();
    Ok(Realisation::from_charts(q.structure().clone(), charts))
}

/// A finite piece of the canonical realisation: the reduced product with
/// reduced walks of bounded length.
#[derive(Clone, Debug)]
pub struct TruncatedRealisation {
    pub realisation: Realisation,
    /// The reduced walk behind each chart.
    pub words: Vec<Walk>,
    /// Charts all of whose one-link extensions stay inside the truncation.
    pub interior: Vec<bool>,
}

impl TruncatedRealisation {
    pub fn verify(&self, h: &AmalgamationPattern) -> Result<ValidationReport> {
        verify_realisation_on(&self.realisation, h, &self.interior)
    }
}

/// Copies `A_{ι2(w)} × {w}` for reduced walks `w` of length at most `k`,
/// glued along `(a, w) ≈ (ρ_e(a), reduce(w e))` whenever the reduced walk
/// stays within length `k`.
pub fn canonical_truncated(h: &AmalgamationPattern, k: usize) -> Result<TruncatedRealisation> {
    let inc = h.incidence();
    let free = FreeTruncation::new(inc, k);
    let words: Vec<Walk> = (0..free.len()).map(|i| free.word(i).clone()).collect();
    let mut index: HashMap<(Elem, usize), Elem> = HashMap::new();
    let mut provenance: BTreeMap<Elem, (Elem, usize)> = BTreeMap::new();
    let mut carrier = RelStructure::new(h.signature().clone(), []);
    let mut site_of = BTreeMap::new();
    let mut next: Elem = 0;
    for (w, word) in words.iter().enumerate() {
        for &a in h.site_elements(word.end) {
            carrier.add_element(next);
            site_of.insert(next, w);
            provenance.insert(next, (a, w));
            index.insert((a, w), next);
            next += 1;
        }
    }
    for (name, tuples) in h.carrier().relations() {
        for t in tuples {
            let s = h.site_of(t[0]).expect("tuples lie in sites");
            for (w, word) in words.iter().enumerate() {
                if word.end == s {
                    carrier.add_tuple(name, t.iter().map(|a| index[&(*a, w)]).collect())?;
                }
            }
        }
    }
    let mut links: Vec<Link> = Vec::new();
    let mut raw: Vec<(usize, LinkId, usize)> = Vec::new();
    let mut interior = vec![true; words.len()];
    for (w, word) in words.iter().enumerate() {
        for &e in inc.outgoing(word.end) {
            let mut ext = word.clone();
            ext.links.push(e);
            ext.end = inc.tgt(e);
            match free.element_of(&ext) {
                Some(v) => raw.push((w, e, v)),
                None => interior[w] = false,
            }
        }
    }
    let pos: HashMap<(usize, LinkId), usize> = raw.iter().enumerate().map(|(i, &(w, e, _))| ((w, e), i)).collect();
    for &(w, e, v) in &raw {
        links.push(Link {
            name: format!("{}[{}]", inc.link(e).name, w),
            src: w,
            tgt: v,
            inv: pos[&(v, inc.inv(e))],
        });
    }
    let rho: Vec<PartialMap> = raw
        .iter()
        .map(|&(w, e, v)| {
            h.rho(e)
                .pairs()
                .iter()
                .map(|&(a, b)| (index[&(a, w)], index[&(b, v)]))
                .collect()
        })
        .collect();
    let big = IncidencePattern::new((0..words.len() as u32).collect(), links)?;
    let pattern = AmalgamationPattern::new(big, carrier, site_of, rho)?;
    let q = quotient(&pattern)?;
    let charts = q
        .charts()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let map: PartialMap = c.map.pairs().iter().map(|&(x, p)| (x, provenance[&p].0)).collect();
            (q.chart_domain(i).clone(), words[c.site].end, map)
        })
        .collect();
    Ok(TruncatedRealisation {
        realisation: Realisation::from_charts(q.structure().clone(), charts),
        words,
        interior,
    })
}

/// The hypergraph of co-ordinate domains on the realisation's universe.
pub fn atlas_hypergraph(r: &Realisation) -> Hypergraph {
    Hypergraph::new(r.structure().universe().clone(), r.domains().to_vec())
        .expect("co-ordinate domains lie in the universe")
}
