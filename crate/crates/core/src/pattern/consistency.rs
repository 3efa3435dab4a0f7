use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::incidence::SiteId;
use crate::product::Realisation;
use crate::report::Verdict;
use crate::structure::{partial_isomorphism_violation, Elem, PartialMap, RelStructure};

use super::{approx, AmalgamationPattern};

/// Why the quotient by `≈` is not charted isomorphically by the sites.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Inconsistency {
    /// Two distinct elements of one site are identified.
    SharedSite { site: SiteId, a: Elem, b: Elem },
    /// A tuple in the quotient, contributed by another site, has no
    /// counterpart in this site.
    ChartBroken {
        site: SiteId,
        relation: String,
        tuple: Vec<Elem>,
    },
}

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inconsistency::SharedSite { site, a, b } => {
                write!(f, "elements {a} and {b} of site {site} are identified")
            }
            Inconsistency::ChartBroken { site, relation, tuple } => {
                write!(f, "chart of site {site} breaks `{relation}` on {tuple:?}")
            }
        }
    }
}

fn build_quotient(h: &AmalgamationPattern) -> Result<std::result::Result<Realisation, Inconsistency>> {
    let inc = h.incidence();
    let part = approx(h);
    for s in inc.sites() {
        let mut seen: BTreeMap<usize, Elem> = BTreeMap::new();
        for &a in h.site_elements(s) {
            if let Some(&b) = seen.get(&part.class_of[&a]) {
                return Ok(Err(Inconsistency::SharedSite { site: s, a: b, b: a }));
            }
            seen.insert(part.class_of[&a], a);
        }
    }
    let mut structure = RelStructure::new(h.signature().clone(), 0..part.classes.len() as Elem);
    for (name, tuples) in h.carrier().relations() {
        for t in tuples {
            structure.add_tuple(name, t.iter().map(|a| part.class_of[a] as Elem).collect())?;
        }
    }
    let mut charts = Vec::with_capacity(inc.site_count());
    for s in inc.sites() {
        let map: PartialMap = h
            .site_elements(s)
            .iter()
            .map(|&a| (part.class_of[&a] as Elem, a))
            .collect();
        let domain: BTreeSet<Elem> = map.domain().collect();
        if let Some((relation, tuple)) = partial_isomorphism_violation(&structure, h.carrier(), &map)? {
            return Ok(Err(Inconsistency::ChartBroken { site: s, relation, tuple }));
        }
        charts.push((domain, s, map));
    }
    Ok(Ok(Realisation::from_charts(structure, charts)))
}

/// Each `≈`-class meets each site at most once and every natural chart
/// `A_s/≈ → A_s` is an isomorphism of the quotient's induced substructure.
pub fn is_globally_consistent(h: &AmalgamationPattern) -> Result<Verdict<Inconsistency>> {
    Ok(match build_quotient(h)? {
        Ok(_) => Verdict::Holds,
        Err(w) => Verdict::Fails(w),
    })
}

/// The quotient `H/≈` as a realisation with one chart per site. Element `k`
/// of the quotient is the `k`-th class of [`approx`].
pub fn quotient(h: &AmalgamationPattern) -> Result<Realisation> {
    build_quotient(h)?.map_err(|w| Error::Precondition(format!("pattern is not globally consistent: {w}")))
}
