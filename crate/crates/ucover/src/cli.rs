//! Subcommands and the exit-code contract: 0 success, 1 negative verdict,
//! 2 invalid input, 3 certificate failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use ucover_core::chain::{is_short, validate_chain, Verdict};
use ucover_core::cover::{build_cover_ball, uniform_cover_verdict};
use ucover_core::gallery::{self, GalleryName};
use ucover_core::homology::Scale;
use ucover_core::tower::{describe_ml, joinability_witness, uniform_joinability_audit, verify_obstruction, Tower, UjAudit};
use ucover_core::{Budget, Comparison, Entourage, FiniteSpace, Presentation};

use crate::io::{self, LoadedSpace};
use crate::report::{self, CertificateFile, Claim, Envelope};
use crate::runner::RayonRunner;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_CERTIFICATE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ucover", version, about = "Discrete homotopy, scale towers and covering checks on finite metric spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Worker threads for scale-parallel work; 0 picks the machine default.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relate points at distance strictly below the threshold.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Search states per homotopy decision.
    #[arg(long, global = true, default_value_t = 50_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_states: u64,
    /// Longest chain explored; defaults to four times the point count.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_len: Option<u64>,
    /// Bound on free class coordinates in joinability searches.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub class_norm: u64,
}

impl Common {
    pub fn budget(&self) -> Budget {
        Budget { max_states: self.max_states as usize, max_len: self.max_len.map(|l| l as usize), class_norm: self.class_norm }
    }

    fn comparison(&self) -> Comparison {
        if self.strict {
            Comparison::Strict
        } else {
            Comparison::Closed
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Debug, Args)]
pub struct SpaceInput {
    /// Space file (.json, or .csv with points or a distance matrix).
    #[arg(long, conflicts_with = "gallery")]
    pub space: Option<PathBuf>,
    /// Gallery space such as `polygon:12,1`, `hexagon_ex72` or `solenoid:2`.
    #[arg(long)]
    pub gallery: Option<String>,
}

impl SpaceInput {
    fn load(&self) -> anyhow::Result<LoadedSpace> {
        io::load_space_or_gallery(self.space.as_deref(), self.gallery.as_deref())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale tower, bonding maps and stabilization findings.
    Analyze {
        #[command(flatten)]
        input: SpaceInput,
        /// `auto`, `t1,t2,...` (decreasing) or `count:hi..lo`.
        #[arg(long, default_value = "auto")]
        ladder: String,
        #[arg(long)]
        basepoint: Option<String>,
        /// Also audit joinability between every pair of scales.
        #[arg(long)]
        audit: bool,
        /// Write per-scale presentations of the edge-path group here.
        #[arg(long)]
        dump_skeleton: Option<PathBuf>,
    },
    /// Covering predicates for a map across a ladder.
    Cover {
        #[arg(long, conflicts_with = "gallery_map")]
        map: Option<PathBuf>,
        /// `double_cover`, `fold` or `identity`.
        #[arg(long)]
        gallery_map: Option<String>,
        #[arg(long, default_value = "auto")]
        ladder: String,
    },
    /// Whether a pair at the target scale is joined by a short fine chain.
    Join {
        #[command(flatten)]
        input: SpaceInput,
        /// Two points as labels, distinguished names or indices.
        #[arg(long)]
        pair: String,
        #[arg(long)]
        target: f64,
        #[arg(long)]
        fine: f64,
        /// Certificate file written on a positive verdict.
        #[arg(long, default_value = "join.cert.json")]
        cert: PathBuf,
    },
    /// Whether a chain is homotopic to the edge between its endpoints.
    Short {
        #[command(flatten)]
        input: SpaceInput,
        /// `{"chain": [..]}` with labels or indices.
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        scale: f64,
        #[arg(long, default_value = "short.cert.json")]
        cert: PathBuf,
    },
    /// Re-check a certificate file move by move.
    Replay { file: PathBuf },
    /// Bounded ball of homotopy classes of chains from a basepoint.
    Ball {
        #[command(flatten)]
        input: SpaceInput,
        #[arg(long)]
        scale: f64,
        #[arg(long)]
        basepoint: Option<String>,
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
    /// Dump a gallery space or map with its recommended ladder.
    Gallery {
        /// Space spec such as `polygon:12,1`, or a map name.
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Certificate(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Certificate(_) => EXIT_CERTIFICATE,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(e) => write!(f, "invalid input: {e:#}"),
            Failure::Certificate(e) => write!(f, "certificate rejected: {e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.into())
    }
}

type Outcome = Result<u8, Failure>;

fn emit(common: &Common, json: String, text: impl FnOnce() -> String, dot: Option<String>) -> anyhow::Result<()> {
    let body = match common.format {
        Format::Json => json,
        Format::Text => text(),
        Format::Dot => dot.ok_or_else(|| anyhow::anyhow!("--format dot is only available for `ball`"))?,
    };
    match &common.out {
        Some(p) => fs::write(p, body).map_err(|e| anyhow::anyhow!("{}: {e}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn entourage_at(space: &FiniteSpace, eps: f64, cmp: Comparison) -> anyhow::Result<Entourage> {
    anyhow::ensure!(eps.is_finite() && eps >= 0.0, "scale must be finite and nonnegative, got {eps}");
    Ok(space.entourage_at(eps, cmp)?)
}

fn basepoint(space: &FiniteSpace, token: Option<&str>) -> anyhow::Result<usize> {
    match token {
        Some(t) => io::resolve_point(space, t),
        None => Ok(space.point("x0").unwrap_or(0)),
    }
}

#[derive(Serialize)]
struct SpaceSummary<'a> {
    name: &'a str,
    points: usize,
    diameter: f64,
    connectivity_threshold: f64,
}

impl<'a> SpaceSummary<'a> {
    fn of(loaded: &'a LoadedSpace) -> Self {
        SpaceSummary {
            name: &loaded.name,
            points: loaded.space.len(),
            diameter: loaded.space.diameter(),
            connectivity_threshold: loaded.space.connectivity_threshold(),
        }
    }
}

#[derive(Serialize)]
struct SkeletonDump {
    index: usize,
    threshold: f64,
    edges: Vec<(usize, usize)>,
    triangles: Vec<[usize; 3]>,
    presentation: Presentation,
}

#[derive(Serialize)]
struct AnalyzeResult<'a> {
    space: SpaceSummary<'a>,
    tower: &'a ucover_core::tower::TowerReport,
    findings: Vec<String>,
    /// Per scale: the edge-path group is provably cyclic.
    cyclic: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<UjAudit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skeleton_file: Option<String>,
}

fn analyze(
    common: &Common,
    input: &SpaceInput,
    ladder: &str,
    base: Option<&str>,
    audit: bool,
    dump: Option<&Path>,
) -> Outcome {
    let loaded = input.load()?;
    let ladder = io::parse_ladder(ladder, loaded.ladder.as_deref())?;
    let x0 = basepoint(&loaded.space, base)?;
    let runner = RayonRunner::new(common.threads)?;
    let ents = ladder.iter().map(|&t| entourage_at(&loaded.space, t, common.comparison())).collect::<anyhow::Result<Vec<_>>>()?;
    let tower = Tower::from_entourages(&ents, Some(&ladder), x0, &runner)?;
    let budget = common.budget();
    let audit = if audit { Some(uniform_joinability_audit(&tower, &budget, &runner)?) } else { None };
    if let Some(path) = dump {
        let mut dumps = Vec::new();
        for (i, s) in tower.scales.iter().enumerate() {
            let skel = s.skeleton();
            dumps.push(SkeletonDump {
                index: i,
                threshold: ladder[i],
                edges: skel.edges().to_vec(),
                triangles: skel.triangles().to_vec(),
                presentation: skel.presentation(x0)?,
            });
        }
        let json = Envelope::new("skeleton", &loaded.name, Some(&ladder), budget, dumps).to_json();
        fs::write(path, json).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    }
    let result = AnalyzeResult {
        space: SpaceSummary::of(&loaded),
        tower: &tower.report,
        findings: tower.report.ml.iter().map(describe_ml).collect(),
        cyclic: tower.scales.iter().map(|s| s.skeleton().has_cyclic_fundamental_group()).collect(),
        audit,
        skeleton_file: dump.map(|p| p.display().to_string()),
    };
    let json = Envelope::new("analyze", &loaded.name, Some(&ladder), budget, &result).to_json();
    emit(common, json, || report::tower_text(&loaded.name, &loaded.space, &tower.report), None)?;
    Ok(EXIT_OK)
}

fn cover(common: &Common, map: Option<&Path>, gallery_map: Option<&str>, ladder: &str) -> Outcome {
    let loaded = io::load_map_or_gallery(map, gallery_map)?;
    let ladder = io::parse_ladder(ladder, loaded.ladder.as_deref())?;
    let ents = ladder
        .iter()
        .map(|&t| entourage_at(&loaded.map.source, t, common.comparison()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let budget = common.budget();
    let report = uniform_cover_verdict(&loaded.map, &ents, &budget)?;
    let json = Envelope::new("cover", &loaded.name, Some(&ladder), budget, &report).to_json();
    emit(common, json, || report::cover_text(&loaded.name, &report), None)?;
    Ok(if report.uniform_covering { EXIT_OK } else { EXIT_NEGATIVE })
}

fn verdict_code<T>(v: &Verdict<T>) -> u8 {
    if v.is_yes() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

#[derive(Serialize)]
struct JoinResult<'a> {
    x: &'a str,
    y: &'a str,
    target: f64,
    fine: f64,
    abelian_complete: bool,
    #[serde(flatten)]
    verdict: &'a Verdict<ucover_core::tower::JoinWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    obstruction_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate_file: Option<String>,
}

fn verdict_text(label: &str, cert: Option<&str>) -> String {
    match cert {
        Some(c) => format!("verdict {label}; certificate written to {c}\n"),
        None => format!("verdict {label}\n"),
    }
}

fn join(common: &Common, input: &SpaceInput, pair: &str, target: f64, fine: f64, cert: &Path) -> Outcome {
    let loaded = input.load()?;
    let space = &loaded.space;
    let (a, b) = pair.split_once(',').ok_or_else(|| anyhow::anyhow!("--pair expects `x,y`"))?;
    let (x, y) = (io::resolve_point(space, a)?, io::resolve_point(space, b)?);
    let cmp = common.comparison();
    let ts = Scale::new(&entourage_at(space, target, cmp)?);
    let fs_ = Scale::new(&entourage_at(space, fine, cmp)?);
    let budget = common.budget();
    let verdict = joinability_witness(&ts, &fs_, x, y, &budget)?;
    let certificate_file = match &verdict.verdict {
        Verdict::Yes { witness } => {
            let claim = Claim::Join { x, y, fine: Some(fine), target: Some(target) };
            CertificateFile::new(claim, Some(space), witness.certificate.clone()).write(cert)?;
            Some(cert.display().to_string())
        }
        _ => None,
    };
    let obstruction_verified = verdict.verdict.obstruction().map(|o| verify_obstruction(&ts, &fs_, o));
    let labels = space.labels();
    let result = JoinResult {
        x: &labels[x],
        y: &labels[y],
        target,
        fine,
        abelian_complete: verdict.abelian_complete,
        verdict: &verdict.verdict,
        obstruction_verified,
        certificate_file,
    };
    let json = Envelope::new("join", &loaded.name, None, budget, &result).to_json();
    emit(common, json, || verdict_text(verdict.verdict.label(), result.certificate_file.as_deref()), None)?;
    Ok(verdict_code(&verdict.verdict))
}

#[derive(Serialize)]
struct ShortResult<'a> {
    chain: &'a [usize],
    scale: f64,
    #[serde(flatten)]
    verdict: &'a ucover_core::Trivalue,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate_file: Option<String>,
}

fn short(common: &Common, input: &SpaceInput, chain: &Path, scale: f64, cert: &Path) -> Outcome {
    let loaded = input.load()?;
    let space = &loaded.space;
    let seq = io::load_chain(chain, space)?;
    let e = entourage_at(space, scale, common.comparison())?;
    let c = validate_chain(space, &e, seq)?;
    let budget = common.budget();
    let verdict = is_short(&Scale::new(&e), &c, &budget)?;
    let certificate_file = match &verdict {
        Verdict::Yes { witness } => {
            let claim = Claim::Short { x: c.first(), y: c.last() };
            CertificateFile::new(claim, Some(space), witness.clone()).write(cert)?;
            Some(cert.display().to_string())
        }
        _ => None,
    };
    let result = ShortResult { chain: c.seq(), scale, verdict: &verdict, certificate_file };
    let json = Envelope::new("short", &loaded.name, None, budget, &result).to_json();
    emit(common, json, || verdict_text(verdict.label(), result.certificate_file.as_deref()), None)?;
    Ok(verdict_code(&verdict))
}

#[derive(Serialize)]
struct ReplayResult<'a> {
    file: String,
    claim: &'a Claim,
    moves: usize,
    end: &'a [usize],
    valid: bool,
}

fn replay(common: &Common, file: &Path) -> Outcome {
    if !file.is_file() {
        return Err(Failure::Invalid(anyhow::anyhow!("{}: no such file", file.display())));
    }
    let (cert, end) = report::replay_file(file).map_err(Failure::Certificate)?;
    let result = ReplayResult { file: file.display().to_string(), claim: &cert.claim, moves: cert.certificate.moves.len(), end: end.seq(), valid: true };
    let name = file.display().to_string();
    let json = Envelope::new("replay", &name, None, common.budget(), &result).to_json();
    emit(common, json, || format!("certificate {name} replays ({} moves)\n", result.moves), None)?;
    Ok(EXIT_OK)
}

fn ball(common: &Common, input: &SpaceInput, scale: f64, base: Option<&str>, radius: usize) -> Outcome {
    let loaded = input.load()?;
    let x0 = basepoint(&loaded.space, base)?;
    let e = entourage_at(&loaded.space, scale, common.comparison())?;
    let budget = common.budget();
    let ball = build_cover_ball(&Scale::new(&e), x0, radius, &budget)?;
    let json = Envelope::new("ball", &loaded.name, None, budget, &ball).to_json();
    let text = || {
        format!(
            "{} classes, {} edges within radius {radius}{}\n",
            ball.vertices.len(),
            ball.edges.len(),
            if ball.approximate { " (approximate)" } else { "" }
        )
    };
    emit(common, json, text, Some(report::ball_dot(&loaded.space, &ball)))?;
    Ok(EXIT_OK)
}

const GALLERY_SPACES: &[&str] = &[
    "polygon[:n,radius]",
    "hexagon_ex72[:densify]",
    "hexagon_ex73[:densify]",
    "solenoid[:stages,samples_per_winding,major,minor]",
    "hawaiian[:circles,samples]",
];
const GALLERY_MAPS: &[&str] = &["double_cover", "fold", "identity"];

fn points_csv(space: &FiniteSpace) -> String {
    let mut out = String::new();
    match space.coords() {
        Some(coords) => {
            let dim = coords.first().map_or(0, Vec::len);
            out.push_str("label");
            for k in 0..dim {
                out.push_str(&format!(",x{k}"));
            }
            out.push('\n');
            for (l, p) in space.labels().iter().zip(coords) {
                out.push_str(l);
                for v in p {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
        None => {
            for l in space.labels() {
                out.push(',');
                out.push_str(l);
            }
            out.push('\n');
            for (l, row) in space.labels().iter().zip(space.dist_matrix()) {
                out.push_str(l);
                for v in row {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
    }
    out
}

fn gallery_cmd(common: &Common, name: Option<&str>, list: bool) -> Outcome {
    if list || name.is_none() {
        let text = format!("spaces:\n  {}\nmaps:\n  {}\n", GALLERY_SPACES.join("\n  "), GALLERY_MAPS.join("\n  "));
        #[derive(Serialize)]
        struct Listing<'a> {
            schema: u32,
            spaces: &'a [&'a str],
            maps: &'a [&'a str],
        }
        let mut json = serde_json::to_string_pretty(&Listing { schema: report::SCHEMA, spaces: GALLERY_SPACES, maps: GALLERY_MAPS })?;
        json.push('\n');
        emit(common, json, || text, None)?;
        return Ok(EXIT_OK);
    }
    let name = name.unwrap_or_default();
    let budget = common.budget();
    if GALLERY_MAPS.contains(&name) {
        let g = gallery::map_by_name(name)?;
        let json = Envelope::new("gallery", name, Some(&g.ladder), budget, &g).to_json();
        emit(common, json, || points_csv(&g.map.source), None)?;
    } else {
        let g = GalleryName::parse(name)?.build()?;
        let json = Envelope::new("gallery", name, Some(&g.ladder), budget, &g).to_json();
        emit(common, json, || points_csv(&g.space), None)?;
    }
    Ok(EXIT_OK)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let common = &cli.common;
    let outcome = match &cli.command {
        Command::Analyze { input, ladder, basepoint, audit, dump_skeleton } => {
            analyze(common, input, ladder, basepoint.as_deref(), *audit, dump_skeleton.as_deref())
        }
        Command::Cover { map, gallery_map, ladder } => cover(common, map.as_deref(), gallery_map.as_deref(), ladder),
        Command::Join { input, pair, target, fine, cert } => join(common, input, pair, *target, *fine, cert),
        Command::Short { input, chain, scale, cert } => short(common, input, chain, *scale, cert),
        Command::Replay { file } => replay(common, file),
        Command::Ball { input, scale, basepoint, radius } => ball(common, input, *scale, basepoint.as_deref(), *radius),
        Command::Gallery { name, list } => gallery_cmd(common, name.as_deref(), *list),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}
