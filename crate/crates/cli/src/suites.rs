use std::path::PathBuf;
use std::time::Instant;

use amalgam::catalog::{cartwheel, moebius};
use amalgam::dot::{atlas_dot, cayley_dot, covering_dot, gaifman_dot};
use amalgam::eppa::{solve, EppaInstance, GroupSource};
use amalgam::fuzz::{random_hypergraph, random_pattern, rng, PatternBounds, DEFAULT_SEED};
use amalgam::groupoid::{search_groupoid_with, GroupoidSearch};
use amalgam::hypergraph::{
    covering_from_realisation, exploded_view_hyp, graham, is_acyclic, n_acyclicity, tree_decomposition,
    verify_hyp_covering,
};
use amalgam::io::Artifact;
use amalgam::pattern::{
    closure, is_coherent, is_globally_consistent, is_simple, is_strongly_coherent, quotient, DEFAULT_CLOSURE_CAP,
};
use amalgam::product::{atlas_hypergraph, reduced_product, verify_realisation};
use amalgam::{Budget, Error, PartialMap, RelStructure, Result, Verdict};
use clap::{Args, ValueEnum};

use crate::check::load;
use crate::report::{CommandReport, Outcome};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Strong coherence implies consistency implies coherence.
    Hierarchy,
    /// Quotients of strongly coherent simple patterns realise them.
    Quotient,
    /// Graham reduction, tree decompositions and the clique/cycle test agree.
    Acyclicity,
    /// Reduced products over exploded views realise and give coverings.
    Products,
    All,
}

#[derive(Args, Clone, Debug)]
pub struct FuzzArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Random inputs per suite.
    #[arg(long, default_value_t = 200)]
    pub count: usize,
}

fn bounds() -> PatternBounds {
    PatternBounds {
        max_sites: 3,
        max_elems: 8,
        max_links: 6,
    }
}

/// The verdict, or `None` when the closure outgrows its cap.
fn uncapped<W>(r: Result<Verdict<W>>) -> Result<Option<bool>> {
    match r {
        Err(Error::CapExceeded { .. }) => Ok(None),
        r => Ok(Some(r?.holds())),
    }
}

fn hierarchy(a: &FuzzArgs, rep: &mut CommandReport) -> Result<()> {
    let mut r = rng(a.seed);
    let (mut strong, mut capped, mut bad) = (0, 0, 0);
    for _ in 0..a.count {
        let h = random_pattern(&mut r, bounds());
        let verdicts = (uncapped(is_strongly_coherent(&h))?, uncapped(is_globally_consistent(&h))?, uncapped(is_coherent(&h))?);
        let (Some(s), Some(cons), Some(coh)) = verdicts else {
            capped += 1;
            continue;
        };
        strong += usize::from(s);
        bad += usize::from((s && !cons) || (cons && !coh));
    }
    rep.flag("hierarchy", bad == 0).note = Some(format!(
        "{} patterns, {strong} strongly coherent, {capped} over the closure cap, {bad} violations",
        a.count
    ));
    Ok(())
}

fn quotients(a: &FuzzArgs, rep: &mut CommandReport) -> Result<()> {
    let mut r = rng(a.seed ^ 1);
    let (mut tried, mut bad) = (0, 0);
    for _ in 0..a.count {
        let h = random_pattern(&mut r, bounds());
        if uncapped(is_strongly_coherent(&h))? == Some(true) && uncapped(is_simple(&h))? == Some(true) {
            tried += 1;
            bad += usize::from(!verify_realisation(&quotient(&h)?, &h)?.is_ok());
        }
    }
    rep.flag("quotient", bad == 0).note = Some(format!("{tried} eligible of {} patterns, {bad} failures", a.count));
    Ok(())
}

fn acyclicity(a: &FuzzArgs, rep: &mut CommandReport) {
    let mut r = rng(a.seed ^ 2);
    let (mut acyclic, mut bad) = (0, 0);
    for _ in 0..a.count {
        let h = random_hypergraph(&mut r, 6, 7);
        let g = graham(&h).acyclic;
        acyclic += usize::from(g);
        bad += usize::from(g != tree_decomposition(&h).is_some() || g != is_acyclic(&h));
    }
    rep.flag("acyclicity", bad == 0).note = Some(format!("{} hypergraphs, {acyclic} acyclic, {bad} discrepancies", a.count));
}

fn products(a: &FuzzArgs, rep: &mut CommandReport) -> Result<()> {
    let mut r = rng(a.seed ^ 3);
    let (mut built, mut skipped, mut bad) = (0, 0, 0);
    let mut opts = GroupoidSearch::new(2, 300);
    opts.realising_product = true;
    opts.acyclic_atlas = true;
    for _ in 0..a.count {
        let h = random_hypergraph(&mut r, 5, 3);
        let view = exploded_view_hyp(&h)?;
        let out = search_groupoid_with(&view.pattern, &opts, &mut Budget::new(200_000))?;
        let Some(g) = out.found.first() else {
            skipped += 1;
            continue;
        };
        built += 1;
        let real = reduced_product(&view.pattern, g)?.realisation;
        let ok = verify_realisation(&real, &view.pattern)?.is_ok()
            && n_acyclicity(&atlas_hypergraph(&real), 2).holds()
            && verify_hyp_covering(&covering_from_realisation(&real, &h)?).is_ok();
        bad += usize::from(!ok);
    }
    rep.flag("products", bad == 0).note = Some(format!("{built} reduced products, {skipped} searches without a groupoid, {bad} failures"));
    Ok(())
}

pub fn fuzz(a: &FuzzArgs) -> Result<CommandReport> {
    let start = Instant::now();
    let mut rep = CommandReport::new(format!("fuzz {:?} seed {} count {}", a.suite, a.seed, a.count).to_lowercase());
    let all = a.suite == Suite::All;
    if all || a.suite == Suite::Hierarchy {
        hierarchy(a, &mut rep)?;
    }
    if all || a.suite == Suite::Quotient {
        quotients(a, &mut rep)?;
    }
    if all || a.suite == Suite::Acyclicity {
        acyclicity(a, &mut rep);
    }
    if all || a.suite == Suite::Products {
        products(a, &mut rep)?;
    }
    rep.set_elapsed(start.elapsed());
    Ok(rep)
}

#[derive(Args, Clone, Debug)]
pub struct BenchArgs {
    /// Runs per operation; the note reports the fastest and the mean.
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
}

fn time<T>(rep: &mut CommandReport, name: &str, repeat: usize, mut f: impl FnMut() -> Result<T>) -> Result<()> {
    let mut runs = Vec::with_capacity(repeat);
    for _ in 0..repeat.max(1) {
        let t = Instant::now();
        std::hint::black_box(f()?);
        runs.push(t.elapsed().as_secs_f64() * 1e3);
    }
    let best = runs.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = runs.iter().sum::<f64>() / runs.len() as f64;
    rep.push(name, Outcome::Holds).note = Some(format!("best {best:.3} ms, mean {mean:.3} ms"));
    Ok(())
}

pub fn bench(a: &BenchArgs) -> Result<CommandReport> {
    let start = Instant::now();
    let mut rep = CommandReport::new(format!("bench ({} runs each)", a.repeat));
    let n = a.repeat;
    let h = moebius();
    let wheel = cartwheel();
    let view = exploded_view_hyp(&wheel)?.pattern;
    let mut opts = GroupoidSearch::new(2, 500);
    opts.realising_product = true;
    let g = search_groupoid_with(&view, &opts, &mut Budget::new(u64::MAX))?
        .found
        .into_iter()
        .next()
        .ok_or_else(|| Error::NoGroupoid("cartwheel view, N=2".into()))?;
    let mut base = RelStructure::graph([0, 1], &[(0, 1)])?;
    base.add_tuple("E", vec![1, 0])?;
    let inst = EppaInstance::from_maps(base, vec![PartialMap::from_pairs([(0, 1)])?])?;

    time(&mut rep, "closure moebius", n, || closure(&h, DEFAULT_CLOSURE_CAP))?;
    time(&mut rep, "strong coherence moebius", n, || is_strongly_coherent(&h))?;
    time(&mut rep, "exploded view cartwheel", n, || exploded_view_hyp(&wheel))?;
    time(&mut rep, "quotient cartwheel view", n, || quotient(&view))?;
    time(&mut rep, "n-acyclicity cartwheel", n, || Ok(n_acyclicity(&wheel, 3)))?;
    time(&mut rep, "groupoid search cartwheel N=2", n, || {
        search_groupoid_with(&view, &opts, &mut Budget::new(u64::MAX))
    })?;
    time(&mut rep, "reduced product cartwheel", n, || reduced_product(&view, &g))?;
    time(&mut rep, "eppa solve edge N=2", n, || solve(&inst, 2, &GroupSource::default(), &mut Budget::new(u64::MAX)))?;
    rep.set_elapsed(start.elapsed());
    Ok(rep)
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum View {
    /// Cayley graph of a groupoid.
    Cayley,
    /// Gaifman graph of a hypergraph.
    Gaifman,
    /// Chart overlaps of a realisation.
    Atlas,
    /// A hypergraph covering with its projection.
    Covering,
}

#[derive(Args, Clone, Debug)]
pub struct DotArgs {
    pub path: PathBuf,
    #[arg(long, value_enum)]
    pub view: View,
    /// Write here instead of standard output.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// Renders the requested view, writing it to `--out` when given.
pub fn export_dot(a: &DotArgs) -> Result<(String, CommandReport)> {
    let start = Instant::now();
    let (art, digest) = load(&a.path)?;
    let dot = match (a.view, &art) {
        (View::Cayley, Artifact::Groupoid(g)) => cayley_dot(g),
        (View::Gaifman, Artifact::Hypergraph(h)) => gaifman_dot(h),
        (View::Gaifman, Artifact::Realisation(r)) => gaifman_dot(&atlas_hypergraph(r)),
        (View::Atlas, Artifact::Realisation(r)) => atlas_dot(r),
        (View::Covering, Artifact::Covering(c)) => covering_dot(c),
        (v, art) => {
            return Err(Error::Precondition(format!(
                "the {} view does not apply to a {}",
                format!("{v:?}").to_lowercase(),
                art.kind()
            )))
        }
    };
    let mut rep = CommandReport::new(format!("export-dot {}", a.path.display()));
    rep.inputs.push(digest);
    if let Some(out) = &a.out {
        std::fs::write(out, &dot)?;
        rep.outputs.push(out.display().to_string());
    }
    rep.set_elapsed(start.elapsed());
    Ok((dot, rep))
}
