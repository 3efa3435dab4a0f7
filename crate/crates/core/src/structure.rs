//! Finite relational structures and partial bijections between them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// Opaque element identifier, scoped to the structure that owns it.
pub type Elem = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// A finite relational signature. Names are unique and arities positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<RelationSymbol>", into = "Vec<RelationSymbol>")]
pub struct Signature {
    symbols: Vec<RelationSymbol>,
}

impl Signature {
    pub fn new(symbols: Vec<RelationSymbol>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if s.arity == 0 {
                return Err(Error::Invalid(format!("relation `{}` has arity 0", s.name)));
            }
            if !seen.insert(s.name.clone()) {
                return Err(Error::Invalid(format!("relation `{}` declared twice", s.name)));
            }
        }
        Ok(Self { symbols })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Signature with a single binary relation `E`.
    pub fn graph() -> Self {
        Self {
            symbols: vec![RelationSymbol {
                name: "E".into(),
                arity: 2,
            }],
        }
    }

    pub fn symbols(&self) -> &[RelationSymbol] {
        &self.symbols
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.iter().find(|s| s.name == name).map(|s| s.arity)
    }
}

impl TryFrom<Vec<RelationSymbol>> for Signature {
    type Error = Error;
    fn try_from(v: Vec<RelationSymbol>) -> Result<Self> {
        Signature::new(v)
    }
}

impl From<Signature> for Vec<RelationSymbol> {
    fn from(s: Signature) -> Self {
        s.symbols
    }
}

/// A finite relational structure over a [`Signature`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawStructure", into = "RawStructure")]
pub struct RelStructure {
    signature: Signature,
    universe: BTreeSet<Elem>,
    relations: BTreeMap<String, BTreeSet<Vec<Elem>>>,
}

#[derive(Serialize, Deserialize)]
struct RawStructure {
    signature: Signature,
    universe: Vec<Elem>,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<Elem>>>,
}

impl TryFrom<RawStructure> for RelStructure {
    type Error = Error;
    fn try_from(raw: RawStructure) -> Result<Self> {
        let mut s = RelStructure::new(raw.signature, raw.universe);
        for (name, tuples) in raw.relations {
            for t in tuples {
                s.add_tuple(&name, t)?;
            }
        }
        Ok(s)
    }
}

impl From<RelStructure> for RawStructure {
    fn from(s: RelStructure) -> Self {
        RawStructure {
            universe: s.universe.into_iter().collect(),
            relations: s
                .relations
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
            signature: s.signature,
        }
    }
}

impl RelStructure {
    pub fn new(signature: Signature, universe: impl IntoIterator<Item = Elem>) -> Self {
        let relations = signature
            .symbols()
            .iter()
            .map(|s| (s.name.clone(), BTreeSet::new()))
            .collect();
        Self {
            signature,
            universe: universe.into_iter().collect(),
            relations,
        }
    }

    /// A graph on `universe` with the given directed `E`-edges.
    pub fn graph(universe: impl IntoIterator<Item = Elem>, edges: &[(Elem, Elem)]) -> Result<Self> {
        let mut s = Self::new(Signature::graph(), universe);
        for &(a, b) in edges {
            s.add_tuple("E", vec![a, b])?;
        }
        Ok(s)
    }

    /// A graph with both orientations of every listed edge.
    pub fn symmetric_graph(
        universe: impl IntoIterator<Item = Elem>,
        edges: &[(Elem, Elem)],
    ) -> Result<Self> {
        let mut s = Self::new(Signature::graph(), universe);
        for &(a, b) in edges {
            s.add_tuple("E", vec![a, b])?;
            s.add_tuple("E", vec![b, a])?;
        }
        Ok(s)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn universe(&self) -> &BTreeSet<Elem> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.universe.contains(&x)
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<Elem>>> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &BTreeSet<Vec<Elem>>)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(|t| t.len()).sum()
    }

    pub fn holds(&self, name: &str, tuple: &[Elem]) -> bool {
        self.relations.get(name).is_some_and(|t| t.contains(tuple))
    }

    pub fn add_element(&mut self, x: Elem) {
        self.universe.insert(x);
    }

    pub fn add_tuple(&mut self, name: &str, tuple: Vec<Elem>) -> Result<()> {
        let arity = self
            .signature
            .arity(name)
            .ok_or_else(|| Error::UnknownId(name.to_string()))?;
        if tuple.len() != arity {
            return Err(Error::Invalid(format!(
                "tuple {tuple:?} for `{name}` has length {}, expected {arity}",
                tuple.len()
            )));
        }
        if let Some(x) = tuple.iter().find(|x| !self.universe.contains(x)) {
            return Err(Error::Invalid(format!(
                "tuple {tuple:?} for `{name}` mentions {x}, which is not in the universe"
            )));
        }
        self.relations.entry(name.to_string()).or_default().insert(tuple);
        Ok(())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        for (name, tuples) in &self.relations {
            let Some(arity) = self.signature.arity(name) else {
                r.error(format!("relation `{name}` is not in the signature"));
                continue;
            };
            for t in tuples {
                if t.len() != arity {
                    r.error(format!("tuple {t:?} of `{name}` has wrong length"));
                }
                if t.iter().any(|x| !self.universe.contains(x)) {
                    r.error(format!("tuple {t:?} of `{name}` leaves the universe"));
                }
            }
        }
        r
    }

    /// Induced substructure on `subset ∩ universe`.
    pub fn restrict(&self, subset: &BTreeSet<Elem>) -> RelStructure {
        let universe: BTreeSet<Elem> = self.universe.intersection(subset).copied().collect();
        let relations = self
            .relations
            .iter()
            .map(|(k, ts)| {
                let kept = ts
                    .iter()
                    .filter(|t| t.iter().all(|x| universe.contains(x)))
                    .cloned()
                    .collect();
                (k.clone(), kept)
            })
            .collect();
        RelStructure {
            signature: self.signature.clone(),
            universe,
            relations,
        }
    }

    /// Image of the structure under an injective renaming defined on the
    /// whole universe.
    pub fn rename(&self, f: &PartialMap) -> Result<RelStructure> {
        let mut out = RelStructure::new(self.signature.clone(), []);
        for &x in &self.universe {
            let y = f
                .get(x)
                .ok_or_else(|| Error::Invalid(format!("renaming undefined on {x}")))?;
            out.universe.insert(y);
        }
        for (k, ts) in &self.relations {
            let dst = out.relations.entry(k.clone()).or_default();
            for t in ts {
                dst.insert(t.iter().map(|&x| f.get(x).unwrap()).collect());
            }
        }
        Ok(out)
    }

    /// Whether a permutation of the universe preserves every relation.
    pub fn is_automorphism(&self, f: &PartialMap) -> bool {
        f.len() == self.universe.len()
            && self.universe.iter().all(|&x| f.get(x).is_some_and(|y| self.contains(y)))
            && is_partial_isomorphism(self, self, f).unwrap_or(false)
    }
}

/// An injective finite partial function, stored as pairs sorted by source.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Elem, Elem)>", into = "Vec<(Elem, Elem)>")]
pub struct PartialMap {
    pairs: Vec<(Elem, Elem)>,
}

impl TryFrom<Vec<(Elem, Elem)>> for PartialMap {
    type Error = Error;
    fn try_from(v: Vec<(Elem, Elem)>) -> Result<Self> {
        PartialMap::from_pairs(v)
    }
}

impl From<PartialMap> for Vec<(Elem, Elem)> {
    fn from(p: PartialMap) -> Self {
        p.pairs
    }
}

impl PartialMap {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn identity(domain: impl IntoIterator<Item = Elem>) -> Self {
        let mut pairs: Vec<_> = domain.into_iter().map(|x| (x, x)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        Self { pairs }
    }

    /// Builds a map, rejecting non-functional or non-injective pair sets.
    /// Repeated identical pairs are accepted.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Elem, Elem)>) -> Result<Self> {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Invalid(format!(
                    "partial map sends {} to both {} and {}",
                    w[0].0, w[0].1, w[1].1
                )));
            }
        }
        let mut targets: Vec<Elem> = pairs.iter().map(|p| p.1).collect();
        targets.sort_unstable();
        for w in targets.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invalid(format!(
                    "partial map is not injective: {} has two preimages",
                    w[0]
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(Elem, Elem)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, x: Elem) -> Option<Elem> {
        self.pairs
            .binary_search_by_key(&x, |p| p.0)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn domain(&self) -> impl Iterator<Item = Elem> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn image(&self) -> BTreeSet<Elem> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn domain_set(&self) -> BTreeSet<Elem> {
        self.domain().collect()
    }

    pub fn inverse(&self) -> PartialMap {
        let mut pairs: Vec<_> = self.pairs.iter().map(|&(a, b)| (b, a)).collect();
        pairs.sort_unstable();
        PartialMap { pairs }
    }

    /// `self` followed by `next`, i.e. `next ∘ self`.
    pub fn then(&self, next: &PartialMap) -> PartialMap {
        let pairs = self
            .pairs
            .iter()
            .filter_map(|&(a, b)| next.get(b).map(|c| (a, c)))
            .collect();
        PartialMap { pairs }
    }

    pub fn is_subset_of(&self, other: &PartialMap) -> bool {
        self.pairs.iter().all(|&(a, b)| other.get(a) == Some(b))
    }

    /// Whether the map is a restriction of the identity.
    pub fn is_sub_identity(&self) -> bool {
        self.pairs.iter().all(|&(a, b)| a == b)
    }

    pub fn restrict(&self, domain: &BTreeSet<Elem>) -> PartialMap {
        PartialMap {
            pairs: self
                .pairs
                .iter()
                .filter(|p| domain.contains(&p.0))
                .copied()
                .collect(),
        }
    }

    /// Union of two maps if it is again an injective partial function.
    pub fn union(&self, other: &PartialMap) -> Option<PartialMap> {
        PartialMap::from_pairs(self.pairs.iter().chain(other.pairs.iter()).copied()).ok()
    }

    pub fn to_btree(&self) -> BTreeMap<Elem, Elem> {
        self.pairs.iter().copied().collect()
    }
}

impl fmt::Display for PartialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}→{b}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<(Elem, Elem)> for PartialMap {
    /// Panics if the pairs are not functional and injective.
    fn from_iter<T: IntoIterator<Item = (Elem, Elem)>>(iter: T) -> Self {
        PartialMap::from_pairs(iter).expect("pairs form an injective partial map")
    }
}

/// `ρ1` followed by `ρ2`: the pairs `(x, ρ2(ρ1(x)))` wherever defined.
pub fn compose_partial(rho1: &PartialMap, rho2: &PartialMap) -> PartialMap {
    rho1.then(rho2)
}

/// Whether `rho` is a partial isomorphism from `a` to `b`.
///
/// Returns an error, not `false`, when `rho` mentions elements outside the
/// universes or the signatures differ.
pub fn is_partial_isomorphism(a: &RelStructure, b: &RelStructure, rho: &PartialMap) -> Result<bool> {
    Ok(partial_isomorphism_violation(a, b, rho)?.is_none())
}

/// Like [`is_partial_isomorphism`] but returns the offending relation tuple.
pub fn partial_isomorphism_violation(
    a: &RelStructure,
    b: &RelStructure,
    rho: &PartialMap,
) -> Result<Option<(String, Vec<Elem>)>> {
    if a.signature != b.signature {
        return Err(Error::Invalid("structures have different signatures".into()));
    }
    for &(x, y) in rho.pairs() {
        if !a.contains(x) {
            return Err(Error::Invalid(format!("source {x} is not in the domain structure")));
        }
        if !b.contains(y) {
            return Err(Error::Invalid(format!("target {y} is not in the codomain structure")));
        }
    }
    let inv = rho.inverse();
    for (name, tuples) in a.relations() {
        for t in tuples {
            let img: Option<Vec<Elem>> = t.iter().map(|&x| rho.get(x)).collect();
            if let Some(img) = img {
                if !b.holds(name, &img) {
                    return Ok(Some((name.to_string(), t.clone())));
                }
            }
        }
    }
    for (name, tuples) in b.relations() {
        for t in tuples {
            let pre: Option<Vec<Elem>> = t.iter().map(|&y| inv.get(y)).collect();
            if let Some(pre) = pre {
                if !a.holds(name, &pre) {
                    return Ok(Some((name.to_string(), pre)));
                }
            }
        }
    }
    Ok(None)
}

/// Whether a total map `h` on `x`'s universe is a homomorphism into `a`.
/// Returns the first tuple whose image is missing.
pub fn homomorphism_violation(
    x: &RelStructure,
    a: &RelStructure,
    h: &BTreeMap<Elem, Elem>,
) -> Option<(String, Vec<Elem>)> {
    for &v in x.universe() {
        match h.get(&v) {
            Some(w) if a.contains(*w) => {}
            _ => return Some(("<universe>".into(), vec![v])),
        }
    }
    for (name, tuples) in x.relations() {
        for t in tuples {
            let img: Vec<Elem> = t.iter().map(|v| h[v]).collect();
            if !a.holds(name, &img) {
                return Some((name.to_string(), t.clone()));
            }
        }
    }
    None
}
