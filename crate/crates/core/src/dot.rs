//! Graphviz DOT renderings. Nodes and edges are emitted in index order so
//! that output is stable across runs.

use std::fmt::Write;

use crate::groupoid::Groupoid;
use crate::hypergraph::{gaifman, Hypergraph, HypergraphCovering};
use crate::product::Realisation;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

const PALETTE: [&str; 8] = [
    "lightblue",
    "lightpink",
    "palegreen",
    "khaki",
    "plum",
    "lightsalmon",
    "lightcyan",
    "wheat",
];

/// The Cayley graph: one node per element, filled by the colour of the site
/// it lies over, and an edge `h → h·e` labelled `e` for every link `e`
/// leaving the target of `h`.
pub fn cayley_dot(g: &Groupoid) -> String {
    let inc = g.incidence();
    let mut out = String::from("digraph cayley {\n  node [style=filled];\n");
    for h in 0..g.len() {
        let site = |s| inc.site_label(s);
        writeln!(
            out,
            "  g{h} [label=\"{} : {}→{}\", fillcolor={}];",
            g.label(h),
            site(g.src(h)),
            site(g.tgt(h)),
            PALETTE[g.tgt(h) % PALETTE.len()]
        )
        .unwrap();
    }
    for h in 0..g.len() {
        for &e in inc.outgoing(g.tgt(h)) {
            let k = g.mul(h, g.generator(e));
            writeln!(out, "  g{h} -> g{k} [label=\"{}\"];", escape(&inc.link(e).name)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// The Gaifman graph of a hypergraph.
pub fn gaifman_dot(h: &Hypergraph) -> String {
    let gr = gaifman(h);
    let mut out = String::from("graph gaifman {\n");
    for v in gr.vertices() {
        writeln!(out, "  v{v} [label=\"{v}\"];").unwrap();
    }
    for (a, b) in gr.edges() {
        writeln!(out, "  v{a} -- v{b};").unwrap();
    }
    out.push_str("}\n");
    out
}

/// One node per chart, labelled by its site, and an edge between charts
/// whose domains meet, labelled by the size of the overlap.
pub fn atlas_dot(r: &Realisation) -> String {
    let mut out = String::from("graph atlas {\n");
    for (i, c) in r.charts().iter().enumerate() {
        let dom: Vec<String> = r.chart_domain(i).iter().map(|x| x.to_string()).collect();
        writeln!(out, "  u{i} [label=\"u{i} @ {}\\n{{{}}}\"];", c.site, dom.join(",")).unwrap();
    }
    for i in 0..r.charts().len() {
        for j in r.overlapping(i).into_iter().filter(|&j| j > i) {
            let k = r.chart_domain(i).intersection(r.chart_domain(j)).count();
            writeln!(out, "  u{i} -- u{j} [label=\"{k}\"];").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// Upstairs vertices clustered by their image and joined by the upstairs
/// Gaifman edges, with dashed fibre edges to boxed base vertices.
pub fn covering_dot(c: &HypergraphCovering) -> String {
    let mut out = String::from("graph covering {\n");
    for &b in c.downstairs.vertices() {
        writeln!(out, "  subgraph cluster_{b} {{\n    label=\"{b}\";").unwrap();
        for x in c.fibre(b) {
            writeln!(out, "    x{x} [label=\"{x}\"];").unwrap();
        }
        out.push_str("  }\n");
    }
    for (a, b) in gaifman(&c.upstairs).edges() {
        writeln!(out, "  x{a} -- x{b};").unwrap();
    }
    for (&x, &b) in &c.projection {
        writeln!(out, "  x{x} -- b{b} [style=dashed];").unwrap();
    }
    for &b in c.downstairs.vertices() {
        writeln!(out, "  b{b} [label=\"{b}\", shape=box];").unwrap();
    }
    out.push_str("}\n");
    out
}
