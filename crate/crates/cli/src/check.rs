use std::path::{Path, PathBuf};
use std::time::Instant;

use amalgam::eppa::{is_fully_symmetric_solution, verify_solution, EppaInstance};
use amalgam::groupoid::{is_compatible, is_n_acyclic};
use amalgam::hypergraph::{n_acyclicity, verify_hyp_covering};
use amalgam::io::{parse_artifact, parse_as, Artifact, ArtifactKind};
use amalgam::pattern::{
    is_coherent, is_globally_consistent, is_simple, is_strongly_coherent, validate_pattern, AmalgamationPattern,
};
use amalgam::product::{atlas_hypergraph, is_fully_symmetric_realisation, verify_realisation};
use amalgam::{Budget, Error, Result, ValidationReport};
use clap::Args;

use crate::report::{CommandReport, InputDigest, Outcome};

#[derive(Args, Clone, Debug, Default)]
pub struct CheckArgs {
    /// Artifacts to check; several are checked in parallel and reported in order.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Pattern well-formedness.
    #[arg(long)]
    pub pattern: bool,
    #[arg(long)]
    pub coherent: bool,
    #[arg(long)]
    pub simple: bool,
    /// Strong coherence.
    #[arg(long)]
    pub strong: bool,
    /// Global consistency.
    #[arg(long)]
    pub consistent: bool,
    /// Groupoid axioms.
    #[arg(long)]
    pub groupoid: bool,
    /// Coset N-acyclicity of a groupoid.
    #[arg(long, value_name = "N", value_delimiter = ',')]
    pub acyclic: Vec<usize>,
    /// Compatibility of a groupoid with this pattern.
    #[arg(long, value_name = "PATTERN")]
    pub compatible: Option<PathBuf>,
    /// N-acyclicity of a hypergraph, or of a realisation's atlas.
    #[arg(long, value_name = "N", value_delimiter = ',')]
    pub hyp: Vec<usize>,
    /// The realisation realises this pattern.
    #[arg(long, value_name = "PATTERN")]
    pub realises: Option<PathBuf>,
    /// The EPPA solution solves this instance.
    #[arg(long, value_name = "INSTANCE")]
    pub solves: Option<PathBuf>,
    /// Full symmetry; needs --realises or --solves.
    #[arg(long)]
    pub fully_symmetric: bool,
}

impl CheckArgs {
    fn any_selected(&self) -> bool {
        self.pattern
            || self.coherent
            || self.simple
            || self.strong
            || self.consistent
            || self.groupoid
            || !self.acyclic.is_empty()
            || self.compatible.is_some()
            || !self.hyp.is_empty()
            || self.realises.is_some()
            || self.solves.is_some()
            || self.fully_symmetric
    }
}

/// Reads and parses an artifact of any kind.
pub fn load(path: &Path) -> Result<(Artifact, InputDigest)> {
    let text = read(path)?;
    let art = parse_artifact(&text).map_err(|e| in_file(path, e))?;
    let digest = InputDigest::new(path, art.kind().name(), &text);
    Ok((art, digest))
}

/// Reads and parses an artifact that must be of `kind`.
pub fn load_kind(path: &Path, kind: ArtifactKind) -> Result<(Artifact, InputDigest)> {
    let text = read(path)?;
    let art = parse_as(&text, kind).map_err(|e| in_file(path, e))?;
    Ok((art, InputDigest::new(path, kind.name(), &text)))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Json(j) => Error::Invalid(format!("{}: {j}", path.display())),
        other => other,
    }
}

pub fn load_pattern(path: &Path) -> Result<(AmalgamationPattern, InputDigest)> {
    match load_kind(path, ArtifactKind::Pattern)? {
        (Artifact::Pattern(h), d) => Ok((h, d)),
        _ => unreachable!("parse_as returns the requested kind"),
    }
}

fn load_instance(path: &Path) -> Result<(EppaInstance, InputDigest)> {
    match load_kind(path, ArtifactKind::EppaInstance)? {
        (Artifact::EppaInstance(i), d) => Ok((i, d)),
        _ => unreachable!("parse_as returns the requested kind"),
    }
}

fn report_check(rep: &mut CommandReport, name: &str, r: ValidationReport) {
    let ok = r.is_ok();
    let c = rep.flag(name, ok);
    if !ok {
        c.witness = serde_json::to_value(&r).ok();
    }
}

fn wrong_kind(flag: &str, wants: &str, got: ArtifactKind) -> Error {
    Error::Precondition(format!("--{flag} applies to {wants}, not to a {got}"))
}

pub fn check_one(path: &Path, a: &CheckArgs) -> Result<CommandReport> {
    let start = Instant::now();
    let (art, digest) = load(path)?;
    let kind = art.kind();
    let mut rep = CommandReport::new(format!("check {}", path.display()));
    rep.inputs.push(digest);
    let mut budget = Budget::from_env();

    if let Artifact::Pattern(h) = &art {
        if a.pattern {
            report_check(&mut rep, "pattern", validate_pattern(h));
        }
        if a.coherent {
            rep.verdict("coherent", &is_coherent(h)?);
        }
        if a.simple {
            rep.verdict("simple", &is_simple(h)?);
        }
        if a.strong {
            rep.verdict("strong", &is_strongly_coherent(h)?);
        }
        if a.consistent {
            rep.verdict("consistent", &is_globally_consistent(h)?);
        }
    } else {
        for (on, flag) in [
            (a.pattern, "pattern"),
            (a.coherent, "coherent"),
            (a.simple, "simple"),
            (a.strong, "strong"),
            (a.consistent, "consistent"),
        ] {
            if on {
                return Err(wrong_kind(flag, "patterns", kind));
            }
        }
    }

    if let Artifact::Groupoid(g) = &art {
        if a.groupoid {
            rep.flag("groupoid", true).note = Some(format!("{} elements", g.len()));
        }
        for &n in &a.acyclic {
            rep.verdict(format!("acyclic:{n}"), &is_n_acyclic(g, n, &mut budget)?);
        }
        if let Some(p) = &a.compatible {
            let (h, d) = load_pattern(p)?;
            rep.inputs.push(d);
            rep.verdict("compatible", &is_compatible(g, &h)?);
        }
    } else if a.groupoid || !a.acyclic.is_empty() || a.compatible.is_some() {
        return Err(wrong_kind("groupoid/--acyclic/--compatible", "groupoids", kind));
    }

    for &n in &a.hyp {
        let h = match &art {
            Artifact::Hypergraph(h) => h.clone(),
            Artifact::Realisation(r) => atlas_hypergraph(r),
            _ => return Err(wrong_kind("hyp", "hypergraphs and realisations", kind)),
        };
        rep.verdict(format!("hyp:{n}"), &n_acyclicity(&h, n));
    }

    match (&art, &a.realises, &a.solves) {
        (Artifact::Realisation(r), Some(p), None) => {
            let (h, d) = load_pattern(p)?;
            rep.inputs.push(d);
            report_check(&mut rep, "realises", verify_realisation(r, &h)?);
            if a.fully_symmetric {
                rep.verdict("fully-symmetric", &is_fully_symmetric_realisation(r, &h, &mut budget)?);
            }
        }
        (Artifact::EppaSolution(sol), None, Some(p)) => {
            let (inst, d) = load_instance(p)?;
            rep.inputs.push(d);
            report_check(&mut rep, "solves", verify_solution(&inst, sol));
            if a.fully_symmetric {
                rep.verdict("fully-symmetric", &is_fully_symmetric_solution(&inst, sol, &mut budget)?);
            }
        }
        (_, None, None) if a.fully_symmetric => {
            return Err(Error::Precondition("--fully-symmetric needs --realises or --solves".into()));
        }
        (_, None, None) => {}
        (_, Some(_), _) => return Err(wrong_kind("realises", "realisations", kind)),
        (_, _, Some(_)) => return Err(wrong_kind("solves", "EPPA solutions", kind)),
    }

    if !a.any_selected() {
        default_checks(&art, &mut rep);
    }
    rep.budget.absorb(&budget);
    rep.set_elapsed(start.elapsed());
    Ok(rep)
}

/// Well-formedness of whatever was loaded.
fn default_checks(art: &Artifact, rep: &mut CommandReport) {
    match art {
        Artifact::Structure(s) => report_check(rep, "structure", s.validate()),
        Artifact::Incidence(i) => report_check(rep, "incidence", i.validate()),
        Artifact::Pattern(h) => report_check(rep, "pattern", validate_pattern(h)),
        Artifact::Groupoid(g) => rep.flag("groupoid", true).note = Some(format!("{} elements", g.len())),
        Artifact::Hypergraph(h) => report_check(rep, "hypergraph", h.validate()),
        Artifact::Realisation(r) => {
            rep.push("parsed", Outcome::Holds).note = Some(format!("{} charts", r.charts().len()));
        }
        Artifact::Covering(c) => report_check(rep, "covering", verify_hyp_covering(c)),
        Artifact::EppaInstance(i) => report_check(rep, "instance", i.validate()),
        Artifact::EppaSolution(s) => {
            rep.push("parsed", Outcome::Holds).note = Some(format!("{} elements", s.structure().len()));
        }
    }
}

pub fn run(a: &CheckArgs) -> Result<CommandReport> {
    if let [one] = a.paths.as_slice() {
        return check_one(one, a);
    }
    let start = Instant::now();
    let results: Vec<Result<CommandReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = a.paths.iter().map(|p| s.spawn(move || check_one(p, a))).collect();
        handles.into_iter().map(|h| h.join().expect("check worker panicked")).collect()
    });
    let mut rep = CommandReport::new(format!("check ({} inputs)", a.paths.len()));
    for (p, r) in a.paths.iter().zip(results) {
        rep.merge(&format!("{}: ", p.display()), r?);
    }
    rep.set_elapsed(start.elapsed());
    Ok(rep)
}
