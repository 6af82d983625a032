//! Report envelopes, certificate files and text/DOT renderings.
//!
//! Every JSON document written by the tool carries `"schema": 1` at the top
//! level. Serialization only touches ordered containers, so equal inputs
//! give byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use ucover_core::cover::{CoverBall, CoverReport};
use ucover_core::tower::{describe_ml, TowerReport, TrivialityFinding};
use ucover_core::{Budget, Chain, FiniteSpace, HomotopyCertificate};

pub const SCHEMA: u32 = 1;

/// The outer object of every report.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub input: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<&'a [f64]>,
    pub budget: Budget,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, input: &'a str, ladder: Option<&'a [f64]>, budget: Budget, result: T) -> Self {
        Envelope { schema: SCHEMA, command, input, ladder, budget, result }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// What a certificate is claimed to establish.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    /// The start chain is homotopic to the end chain.
    Homotopy,
    /// The start chain from `x` to `y` is homotopic to the edge `[x, y]`.
    Short { x: usize, y: usize },
    /// As `Short`, for a chain valid at a finer scale.
    Join { x: usize, y: usize, fine: Option<f64>, target: Option<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub schema: u32,
    pub claim: Claim,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    pub certificate: HomotopyCertificate,
}

impl CertificateFile {
    pub fn new(claim: Claim, space: Option<&FiniteSpace>, certificate: HomotopyCertificate) -> Self {
        let labels = space.map(|s| s.labels().to_vec()).unwrap_or_default();
        CertificateFile { schema: SCHEMA, claim, labels, certificate }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        fs::write(path, self.to_json()).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    /// Replays the moves and checks the claim; returns the final chain.
    pub fn verify(&self) -> anyhow::Result<Chain> {
        anyhow::ensure!(self.schema == SCHEMA, "unsupported certificate schema {}", self.schema);
        let end = self.certificate.replay()?;
        match self.claim {
            Claim::Homotopy => {}
            Claim::Short { x, y } | Claim::Join { x, y, .. } => {
                let start = &self.certificate.start;
                anyhow::ensure!(start.first() == x && start.last() == y, "start chain does not run from {x} to {y}");
                let edge: &[usize] = if x == y { &[x] } else { &[x, y] };
                anyhow::ensure!(end.seq() == edge, "certificate does not end at the edge [{x}, {y}]");
            }
        }
        Ok(end)
    }
}

/// Parses and verifies a certificate file.
pub fn replay_file(path: &Path) -> anyhow::Result<(CertificateFile, Chain)> {
    let text = fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    let file: CertificateFile = serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))?;
    let end = file.verify()?;
    Ok((file, end))
}

fn fmt_threshold(t: Option<f64>) -> String {
    t.map_or_else(|| String::from("-"), |t| format!("{t}"))
}

/// Per-scale table followed by bondings and per-scale findings.
pub fn tower_text(space_name: &str, space: &FiniteSpace, report: &TowerReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "space {space_name} ({} points), basepoint {}", space.len(), space.labels()[report.basepoint]);
    let _ = writeln!(out, "{:>5} {:>12} {:>7} {:>9} {:>5} {:>5}  h1", "scale", "threshold", "edges", "triangles", "comps", "gens");
    for s in &report.scales {
        let _ = writeln!(
            out,
            "{:>5} {:>12} {:>7} {:>9} {:>5} {:>5}  {}",
            s.index,
            fmt_threshold(s.threshold),
            s.edges,
            s.triangles,
            s.components,
            s.generators,
            s.group
        );
    }
    for b in &report.bondings {
        let smith: Vec<String> = b.smith.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "bonding {} -> {}: smith [{}]", b.fine, b.coarse, smith.join(", "));
    }
    for (a, (ml, tr)) in report.ml.iter().zip(&report.trivial).enumerate() {
        let tr = match tr {
            TrivialityFinding::TrivialAt { b } => format!("trivial_at {b}"),
            TrivialityFinding::NotWithinLadder => String::from("not trivial within ladder"),
        };
        let _ = writeln!(out, "scale {a}: {}; {tr}", describe_ml(ml));
    }
    let _ = writeln!(out, "note: {}", report.caveat);
    out
}

pub fn cover_text(name: &str, report: &CoverReport) -> String {
    let mut out = String::new();
    let yn = |b: bool| if b { "yes" } else { "no" };
    let _ = writeln!(out, "map {name}");
    let _ = writeln!(out, "{:>5} {:>6} {:>10} {:>10} {:>7} {:>9}", "scale", "evenly", "simplicial", "transverse", "unique", "generates");
    for s in &report.scales {
        let _ = writeln!(
            out,
            "{:>5} {:>6} {:>10} {:>10} {:>7} {:>9}",
            s.index,
            yn(s.evenly_covers.holds),
            yn(s.simplicial_cover.holds),
            yn(s.transverse.holds),
            yn(s.uniqueness_of_lifts.holds),
            s.generates_with.map_or_else(|| String::from("-"), |j| j.to_string())
        );
    }
    for p in &report.pairs {
        let c2 = if p.c2.is_refuted() { "refuted" } else { "not refuted" };
        let _ = writeln!(out, "pair {} / {}: chain lifting {}, c3 {}, c2 {c2}", p.coarse, p.fine, yn(p.chain_lifting.holds), yn(p.c3.holds));
    }
    let _ = writeln!(out, "uniform covering: {}", yn(report.uniform_covering));
    let _ = writeln!(out, "generalized covering: {}", yn(report.generalized_covering));
    if !report.failing.is_empty() {
        let _ = writeln!(out, "failing: {}", report.failing.join(", "));
    }
    let _ = writeln!(out, "note: {}", report.caveat);
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: one node per class, labelled by endpoint and depth.
pub fn ball_dot(space: &FiniteSpace, ball: &CoverBall) -> String {
    let mut out = String::from("graph cover_ball {\n");
    let _ = writeln!(out, "  // basepoint {}, radius {}, approximate {}", dot_escape(&space.labels()[ball.basepoint]), ball.radius, ball.approximate);
    for (i, v) in ball.vertices.iter().enumerate() {
        let _ = writeln!(out, "  v{i} [label=\"{}\\n{}\"];", dot_escape(&space.labels()[v.endpoint]), v.depth);
    }
    for &(u, v) in &ball.edges {
        let _ = writeln!(out, "  v{u} -- v{v};");
    }
    out.push_str("}\n");
    out
}
