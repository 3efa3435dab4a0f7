//! Reading and writing the JSON artifacts, with the artifact kind inferred
//! from the top-level keys.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::eppa::{EppaInstance, EppaSolution};
use crate::error::{Error, Result};
use crate::groupoid::Groupoid;
use crate::hypergraph::{Hypergraph, HypergraphCovering};
use crate::incidence::IncidencePattern;
use crate::pattern::AmalgamationPattern;
use crate::product::Realisation;
use crate::structure::RelStructure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArtifactKind {
    Structure,
    Incidence,
    Pattern,
    Groupoid,
    Hypergraph,
    Realisation,
    Covering,
    EppaInstance,
    EppaSolution,
}

impl ArtifactKind {
    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::Structure => "structure",
            ArtifactKind::Incidence => "incidence",
            ArtifactKind::Pattern => "pattern",
            ArtifactKind::Groupoid => "groupoid",
            ArtifactKind::Hypergraph => "hypergraph",
            ArtifactKind::Realisation => "realisation",
            ArtifactKind::Covering => "covering",
            ArtifactKind::EppaInstance => "eppa-instance",
            ArtifactKind::EppaSolution => "eppa-solution",
        }
    }
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Any of the JSON artifacts.
#[derive(Clone, Debug)]
pub enum Artifact {
    Structure(RelStructure),
    Incidence(IncidencePattern),
    Pattern(AmalgamationPattern),
    Groupoid(Groupoid),
    Hypergraph(Hypergraph),
    Realisation(Realisation),
    Covering(HypergraphCovering),
    EppaInstance(EppaInstance),
    EppaSolution(EppaSolution),
}

impl Artifact {
    pub fn kind(&self) -> ArtifactKind {
        match self {
            Artifact::Structure(_) => ArtifactKind::Structure,
            Artifact::Incidence(_) => ArtifactKind::Incidence,
            Artifact::Pattern(_) => ArtifactKind::Pattern,
            Artifact::Groupoid(_) => ArtifactKind::Groupoid,
            Artifact::Hypergraph(_) => ArtifactKind::Hypergraph,
            Artifact::Realisation(_) => ArtifactKind::Realisation,
            Artifact::Covering(_) => ArtifactKind::Covering,
            Artifact::EppaInstance(_) => ArtifactKind::EppaInstance,
            Artifact::EppaSolution(_) => ArtifactKind::EppaSolution,
        }
    }

    pub fn to_json_string(&self) -> String {
        let r = match self {
            Artifact::Structure(x) => serde_json::to_string_pretty(x),
            Artifact::Incidence(x) => serde_json::to_string_pretty(x),
            Artifact::Pattern(x) => serde_json::to_string_pretty(x),
            Artifact::Groupoid(x) => serde_json::to_string_pretty(x),
            Artifact::Hypergraph(x) => serde_json::to_string_pretty(x),
            Artifact::Realisation(x) => serde_json::to_string_pretty(x),
            Artifact::Covering(x) => serde_json::to_string_pretty(x),
            Artifact::EppaInstance(x) => serde_json::to_string_pretty(x),
            Artifact::EppaSolution(x) => serde_json::to_string_pretty(x),
        };
        r.expect("artifacts serialize")
    }
}

/// The artifact kind a JSON object most likely encodes, by its keys.
pub fn detect_kind(v: &Value) -> Option<ArtifactKind> {
    let o = v.as_object()?;
    let has = |k: &str| o.contains_key(k);
    Some(if has("partials") {
        ArtifactKind::EppaInstance
    } else if has("u0") && has("automorphisms") {
        ArtifactKind::EppaSolution
    } else if has("charts") && has("domains") {
        ArtifactKind::Realisation
    } else if has("upstairs") && has("projection") {
        ArtifactKind::Covering
    } else if has("compose") {
        ArtifactKind::Groupoid
    } else if has("hyperedges") {
        ArtifactKind::Hypergraph
    } else if has("incidence") && has("sites") {
        ArtifactKind::Pattern
    } else if has("sites") && has("links") {
        ArtifactKind::Incidence
    } else if has("signature") && has("universe") {
        ArtifactKind::Structure
    } else {
        return None;
    })
}

/// Parses `text` as an artifact of the detected kind. Errors keep the line
/// and column reported by the JSON parser.
pub fn parse_artifact(text: &str) -> Result<Artifact> {
    let v: Value = serde_json::from_str(text)?;
    let kind = detect_kind(&v).ok_or_else(|| Error::Invalid("unrecognised artifact: no known top-level keys".into()))?;
    parse_as(text, kind)
}

/// Parses `text` as an artifact of the given kind.
pub fn parse_as(text: &str, kind: ArtifactKind) -> Result<Artifact> {
    Ok(match kind {
        ArtifactKind::Structure => Artifact::Structure(serde_json::from_str(text)?),
        ArtifactKind::Incidence => Artifact::Incidence(serde_json::from_str(text)?),
        ArtifactKind::Pattern => Artifact::Pattern(serde_json::from_str(text)?),
        ArtifactKind::Groupoid => Artifact::Groupoid(serde_json::from_str(text)?),
        ArtifactKind::Hypergraph => Artifact::Hypergraph(serde_json::from_str(text)?),
        ArtifactKind::Realisation => Artifact::Realisation(serde_json::from_str(text)?),
        ArtifactKind::Covering => Artifact::Covering(serde_json::from_str(text)?),
        ArtifactKind::EppaInstance => Artifact::EppaInstance(serde_json::from_str(text)?),
        ArtifactKind::EppaSolution => Artifact::EppaSolution(serde_json::from_str(text)?),
    })
}

pub fn load_artifact(path: impl AsRef<Path>) -> Result<Artifact> {
    parse_artifact(&std::fs::read_to_string(path)?)
}

pub fn load<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn save<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
