use std::path::{Path, PathBuf};
use std::time::Instant;

use amalgam::eppa::{solve, verify_solution, GroupSource};
use amalgam::groupoid::{is_compatible, is_n_acyclic, search_groupoid_with, Groupoid, GroupoidSearch};
use amalgam::hypergraph::{covering_from_realisation, exploded_view_hyp, verify_hyp_covering};
use amalgam::io::{parse_as, Artifact, ArtifactKind};
use amalgam::pattern::{is_simple, is_strongly_coherent, quotient, validate_pattern, AmalgamationPattern};
use amalgam::product::{canonical_truncated, direct_product, reduced_product, verify_realisation, Realisation};
use amalgam::{Budget, Error, Result, ValidationReport};
use clap::{Args, ValueEnum};

use crate::check::load_kind;
use crate::report::{CommandReport, Outcome};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuildKind {
    /// PATTERN GROUPOID: the direct product pattern.
    Product,
    /// PATTERN GROUPOID: the reduced product realisation.
    Reduce,
    /// PATTERN: the quotient realisation.
    Quotient,
    /// HYPERGRAPH: the exploded view pattern.
    Explode,
    /// REALISATION HYPERGRAPH: the covering of the hypergraph.
    Cover,
    /// PATTERN: the canonical realisation truncated at radius --k.
    Truncate,
    /// INSTANCE: an EPPA solution, from --group or a search.
    EppaSolve,
    /// PATTERN: a simple, compatible, N-acyclic groupoid found by search.
    Groupoid,
}

impl BuildKind {
    fn name(self) -> &'static str {
        match self {
            BuildKind::Product => "product",
            BuildKind::Reduce => "reduce",
            BuildKind::Quotient => "quotient",
            BuildKind::Explode => "explode",
            BuildKind::Cover => "cover",
            BuildKind::Truncate => "truncate",
            BuildKind::EppaSolve => "eppa-solve",
            BuildKind::Groupoid => "groupoid",
        }
    }

    fn inputs(self) -> &'static [ArtifactKind] {
        use ArtifactKind::*;
        match self {
            BuildKind::Product | BuildKind::Reduce => &[Pattern, Groupoid],
            BuildKind::Quotient | BuildKind::Truncate | BuildKind::Groupoid => &[Pattern],
            BuildKind::Explode => &[Hypergraph],
            BuildKind::Cover => &[Realisation, Hypergraph],
            BuildKind::EppaSolve => &[EppaInstance],
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct BuildArgs {
    pub kind: BuildKind,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Truncation radius.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Required acyclicity for searched groupoids.
    #[arg(short, long, default_value_t = 2)]
    pub n: usize,
    /// Group to use for eppa-solve instead of searching.
    #[arg(long, value_name = "GROUPOID")]
    pub group: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub max_size: usize,
    #[arg(long, default_value_t = 4)]
    pub max_points: usize,
    /// Make the groupoid search also ask for a realising product with an
    /// N-acyclic atlas.
    #[arg(long)]
    pub realising: bool,
}

fn report_check(rep: &mut CommandReport, name: &str, r: ValidationReport) {
    let ok = r.is_ok();
    let c = rep.flag(name, ok);
    if !ok {
        c.witness = serde_json::to_value(&r).ok();
    }
}

fn realisation_note(r: &Realisation) -> String {
    format!("{} elements, {} charts", r.structure().len(), r.charts().len())
}

/// Writes `art`, reads it back and compares the re-serialised text.
fn write_and_reread(rep: &mut CommandReport, out: &Path, art: &Artifact) -> Result<()> {
    let text = art.to_json_string();
    std::fs::write(out, format!("{text}\n"))?;
    let back = parse_as(&std::fs::read_to_string(out)?, art.kind())?;
    rep.flag("round-trip", back.to_json_string() == text);
    rep.outputs.push(out.display().to_string());
    Ok(())
}

pub fn run(a: &BuildArgs) -> Result<CommandReport> {
    let start = Instant::now();
    let kinds = a.kind.inputs();
    if a.inputs.len() != kinds.len() {
        return Err(Error::Invalid(format!(
            "{} takes {} input(s): {}",
            a.kind.name(),
            kinds.len(),
            kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
        )));
    }
    let mut rep = CommandReport::new(format!("build {}", a.kind.name()));
    let mut arts = Vec::new();
    for (p, &k) in a.inputs.iter().zip(kinds) {
        let (art, d) = load_kind(p, k)?;
        rep.inputs.push(d);
        arts.push(art);
    }
    let mut budget = Budget::from_env();
    let built = construct(a, arts, &mut rep, &mut budget)?;
    rep.budget.absorb(&budget);
    if let Some(art) = built {
        if rep.exit_code() == 0 {
            write_and_reread(&mut rep, &a.out, &art)?;
        }
    }
    rep.set_elapsed(start.elapsed());
    Ok(rep)
}

fn construct(
    a: &BuildArgs,
    arts: Vec<Artifact>,
    rep: &mut CommandReport,
    budget: &mut Budget,
) -> Result<Option<Artifact>> {
    let mut it = arts.into_iter();
    let mut next = || it.next().expect("input count checked");
    Ok(Some(match (a.kind, next()) {
        (BuildKind::Product, Artifact::Pattern(h)) => {
            let Artifact::Groupoid(g) = next() else { unreachable!() };
            let dp = direct_product(&h, &g)?;
            report_check(rep, "pattern", validate_pattern(&dp.pattern));
            Artifact::Pattern(dp.pattern)
        }
        (BuildKind::Reduce, Artifact::Pattern(h)) => {
            let Artifact::Groupoid(g) = next() else { unreachable!() };
            let rp = reduced_product(&h, &g)?;
            report_check(rep, "realises", verify_realisation(&rp.realisation, &h)?);
            rep.checks.last_mut().unwrap().note = Some(realisation_note(&rp.realisation));
            Artifact::Realisation(rp.realisation)
        }
        (BuildKind::Quotient, Artifact::Pattern(h)) => {
            let r = quotient(&h)?;
            report_check(rep, "realises", verify_realisation(&r, &h)?);
            rep.checks.last_mut().unwrap().note = Some(realisation_note(&r));
            Artifact::Realisation(r)
        }
        (BuildKind::Truncate, Artifact::Pattern(h)) => {
            let t = canonical_truncated(&h, a.k)?;
            report_check(rep, "realises-interior", t.verify(&h)?);
            rep.checks.last_mut().unwrap().note = Some(realisation_note(&t.realisation));
            Artifact::Realisation(t.realisation)
        }
        (BuildKind::Explode, Artifact::Hypergraph(hy)) => {
            let v = exploded_view_hyp(&hy)?;
            rep.verdict("strong", &is_strongly_coherent(&v.pattern)?);
            rep.verdict("simple", &is_simple(&v.pattern)?);
            Artifact::Pattern(v.pattern)
        }
        (BuildKind::Cover, Artifact::Realisation(r)) => {
            let Artifact::Hypergraph(hy) = next() else { unreachable!() };
            let c = covering_from_realisation(&r, &hy)?;
            report_check(rep, "covering", verify_hyp_covering(&c));
            Artifact::Covering(c)
        }
        (BuildKind::EppaSolve, Artifact::EppaInstance(inst)) => {
            let source = match &a.group {
                Some(p) => {
                    let (Artifact::Groupoid(g), d) = load_kind(p, ArtifactKind::Groupoid)? else { unreachable!() };
                    rep.inputs.push(d);
                    GroupSource::Supplied(Box::new(g))
                }
                None => GroupSource::Search {
                    max_size: a.max_size,
                    max_points: a.max_points,
                },
            };
            let sol = solve(&inst, a.n, &source, budget)?;
            report_check(rep, "solves", verify_solution(&inst, &sol));
            rep.checks.last_mut().unwrap().note = Some(format!("{} elements", sol.structure().len()));
            Artifact::EppaSolution(sol)
        }
        (BuildKind::Groupoid, Artifact::Pattern(h)) => {
            let opts = GroupoidSearch {
                max_points: a.max_points,
                realising_product: a.realising,
                acyclic_atlas: a.realising,
                ..GroupoidSearch::new(a.n, a.max_size)
            };
            let out = search_groupoid_with(&h, &opts, budget)?;
            let Some(g) = out.found.into_iter().next() else {
                let c = rep.push("found", if out.exhaustive { Outcome::Fails } else { Outcome::Unknown });
                c.note = Some(format!("{} candidates tried", out.steps));
                return Ok(None);
            };
            rep.flag("found", true).note = Some(format!("{} elements", g.len()));
            verify_groupoid(rep, &g, &h, a.n, budget)?;
            Artifact::Groupoid(g)
        }
        (k, art) => unreachable!("{k:?} loaded a {}", art.kind()),
    }))
}

fn verify_groupoid(
    rep: &mut CommandReport,
    g: &Groupoid,
    h: &AmalgamationPattern,
    n: usize,
    budget: &mut Budget,
) -> Result<()> {
    rep.verdict("compatible", &is_compatible(g, h)?);
    rep.verdict(format!("acyclic:{n}"), &is_n_acyclic(g, n, budget)?);
    Ok(())
}
