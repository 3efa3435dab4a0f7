//! Amalgamation patterns over incidence patterns, finite groupoids acting on
//! them, and the constructions that turn locally specified overlaps into
//! globally consistent finite structures: quotients, reduced products,
//! hypergraph coverings and solutions to extension problems for partial
//! automorphisms.
//!
//! Every decision procedure returns a witness alongside its verdict, and every
//! search takes an explicit [`Budget`] so that truncated searches are reported
//! as such rather than as negative answers.

pub mod catalog;
pub mod dot;
pub mod eppa;
pub mod error;
pub mod fuzz;
pub mod groupoid;
pub mod hypergraph;
pub mod incidence;
pub mod io;
pub mod pattern;
pub mod product;
pub mod report;
pub mod search;
pub mod structure;
mod unionfind;

pub use error::{Error, Result};
pub use report::{ValidationReport, Verdict};
pub use search::{Budget, SearchOutcome};
pub use structure::{Elem, PartialMap, RelStructure, RelationSymbol, Signature};
