//! Loading spaces, maps and chains from disk.
//!
//! Spaces come as JSON (`labels` plus `coords` or `dist`), as CSV points
//! (header `label,x1,x2,...`) or as a CSV distance matrix (header row of
//! labels, then the square matrix, optionally with a label column under an
//! empty corner cell). Parse failures carry line and column.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use ucover_core::gallery::{self, GalleryName};
use ucover_core::{FiniteSpace, SpaceMap};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: u64, column: u64, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{0}")]
    Core(#[from] ucover_core::Error),
}

fn parse_err(path: &Path, line: u64, column: u64, message: impl Into<String>) -> InputError {
    InputError::Parse { path: path.to_path_buf(), line, column, message: message.into() }
}

fn invalid(path: &Path, message: impl Into<String>) -> InputError {
    InputError::Invalid { path: path.to_path_buf(), message: message.into() }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|err| InputError::Io { path: path.to_path_buf(), err })
}

fn json_err(path: &Path, e: serde_json::Error) -> InputError {
    parse_err(path, e.line() as u64, e.column() as u64, e.to_string())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PointRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default, alias = "points")]
    coords: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    dist: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    distinguished: BTreeMap<String, PointRef>,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn space_from_file(path: &Path, f: SpaceFile) -> Result<FiniteSpace, InputError> {
    let mut space = match (f.coords, f.dist) {
        (Some(coords), dist) => {
            let labels = f.labels.unwrap_or_else(|| default_labels(coords.len()));
            let space = FiniteSpace::from_points(labels, coords)?;
            if let Some(dist) = dist {
                let n = space.len();
                let agrees = dist.len() == n
                    && dist.iter().enumerate().all(|(i, row)| {
                        row.len() == n && row.iter().enumerate().all(|(j, &d)| (d - space.dist(i, j)).abs() <= 1e-9 * d.abs().max(1.0))
                    });
                if !agrees {
                    return Err(invalid(path, "`dist` disagrees with the distances of `coords`"));
                }
            }
            space
        }
        (None, Some(dist)) => {
            let labels = f.labels.unwrap_or_else(|| default_labels(dist.len()));
            FiniteSpace::from_matrix(labels, dist)?
        }
        (None, None) => return Err(invalid(path, "one of `coords` and `dist` is required")),
    };
    for (name, point) in f.distinguished {
        let idx = match point {
            PointRef::Index(i) => i,
            PointRef::Label(label) => space
                .index_of(&label)
                .ok_or_else(|| invalid(path, format!("distinguished point `{name}` names unknown label `{label}`")))?,
        };
        space = space.with_distinguished(&name, idx)?;
    }
    Ok(space)
}

fn parse_f64(path: &Path, rec: &csv::StringRecord, line: u64, col: usize) -> Result<f64, InputError> {
    let cell = rec.get(col).unwrap_or("").trim();
    cell.parse::<f64>().map_err(|_| parse_err(path, line, col as u64 + 1, format!("`{cell}` is not a number")))
}

fn space_from_csv(path: &Path, text: &str) -> Result<FiniteSpace, InputError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| parse_err(path, 1, 1, e.to_string()))?.clone();
    let first = header.get(0).unwrap_or("");
    // plain matrices have no label column
    let labelled = first.is_empty() || first.eq_ignore_ascii_case("label");
    let skip = usize::from(labelled);
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, 1, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_err(path, line, rec.len() as u64 + 1, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        if labelled {
            labels.push(rec.get(0).unwrap_or("").to_string());
        }
        let row = (skip..rec.len()).map(|c| parse_f64(path, &rec, line, c)).collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if first.eq_ignore_ascii_case("label") {
        return Ok(FiniteSpace::from_points(labels, rows)?);
    }
    let names: Vec<String> = header.iter().skip(skip).map(str::to_string).collect();
    if rows.len() != names.len() {
        return Err(parse_err(path, 1, 1, format!("matrix has {} labels but {} rows", names.len(), rows.len())));
    }
    if labelled && names != labels {
        return Err(parse_err(path, 1, 2, "header labels must match the row labels in order"));
    }
    Ok(FiniteSpace::from_matrix(names, rows)?)
}

/// Loads a space; the format follows the file extension.
pub fn load_space(path: &Path) -> Result<FiniteSpace, InputError> {
    let text = read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => space_from_csv(path, &text),
        _ => {
            let f: SpaceFile = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
            space_from_file(path, f)
        }
    }
}

/// A space by file or gallery name, with its recommended ladder if any.
pub struct LoadedSpace {
    pub name: String,
    pub space: FiniteSpace,
    pub ladder: Option<Vec<f64>>,
}

pub fn load_space_or_gallery(file: Option<&Path>, gallery_name: Option<&str>) -> anyhow::Result<LoadedSpace> {
    match (file, gallery_name) {
        (Some(p), None) => Ok(LoadedSpace { name: p.display().to_string(), space: load_space(p)?, ladder: None }),
        (None, Some(g)) => {
            let built = GalleryName::parse(g)?.build()?;
            Ok(LoadedSpace { name: built.name, space: built.space, ladder: Some(built.ladder) })
        }
        _ => anyhow::bail!("give exactly one of --space and --gallery"),
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SpaceRef {
    Gallery { gallery: String },
    File { file: PathBuf },
    Inline(Box<SpaceFile>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Assignment {
    Indices(Vec<usize>),
    Labels(Vec<String>),
    ByLabel(BTreeMap<String, String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    source: SpaceRef,
    target: SpaceRef,
    assign: Assignment,
    #[serde(default)]
    ladder: Option<Vec<f64>>,
}

fn resolve_ref(base: &Path, r: SpaceRef) -> Result<FiniteSpace, InputError> {
    match r {
        SpaceRef::Gallery { gallery: g } => Ok(GalleryName::parse(&g)?.build()?.space),
        SpaceRef::File { file } => {
            let p = if file.is_absolute() { file } else { base.parent().unwrap_or(Path::new(".")).join(file) };
            load_space(&p)
        }
        SpaceRef::Inline(f) => space_from_file(base, *f),
    }
}

/// A map with an optional ladder for its source.
pub struct LoadedMap {
    pub name: String,
    pub map: SpaceMap,
    pub ladder: Option<Vec<f64>>,
}

/// Loads a map file: `{"source": .., "target": .., "assign": .., "ladder": [..]}`
/// where spaces are `{"gallery": name}`, `{"file": path}` or inline, and
/// `assign` is a list of target indices or labels, or a label-to-label object.
pub fn load_map(path: &Path) -> Result<LoadedMap, InputError> {
    let text = read(path)?;
    let f: MapFile = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    let source = resolve_ref(path, f.source)?;
    let target = resolve_ref(path, f.target)?;
    let n = source.len();
    let lookup = |label: &str| target.index_of(label).ok_or_else(|| invalid(path, format!("unknown target label `{label}`")));
    let assign: Vec<usize> = match f.assign {
        Assignment::Indices(v) => v,
        Assignment::Labels(v) => v.iter().map(|l| lookup(l)).collect::<Result<_, _>>()?,
        Assignment::ByLabel(m) => {
            let mut out = vec![usize::MAX; n];
            for (from, to) in &m {
                let i = source.index_of(from).ok_or_else(|| invalid(path, format!("unknown source label `{from}`")))?;
                out[i] = lookup(to)?;
            }
            if let Some(i) = out.iter().position(|&v| v == usize::MAX) {
                return Err(invalid(path, format!("assignment is not total: `{}` has no image", source.labels()[i])));
            }
            out
        }
    };
    if assign.len() != n {
        return Err(invalid(path, format!("assignment is not total: {} images for {n} source points", assign.len())));
    }
    let map = SpaceMap::new(source, target, assign)?;
    Ok(LoadedMap { name: path.display().to_string(), map, ladder: f.ladder })
}

pub fn load_map_or_gallery(file: Option<&Path>, name: Option<&str>) -> anyhow::Result<LoadedMap> {
    match (file, name) {
        (Some(p), None) => Ok(load_map(p)?),
        (None, Some(n)) => {
            let g = gallery::map_by_name(n)?;
            Ok(LoadedMap { name: g.name, map: g.map, ladder: Some(g.ladder) })
        }
        _ => anyhow::bail!("give exactly one of --map and --gallery-map"),
    }
}

/// Resolves a point given as a label, a distinguished name or an index.
pub fn resolve_point(space: &FiniteSpace, token: &str) -> anyhow::Result<usize> {
    let token = token.trim();
    if let Some(i) = space.index_of(token).or_else(|| space.point(token)) {
        return Ok(i);
    }
    match token.parse::<usize>() {
        Ok(i) if i < space.len() => Ok(i),
        _ => anyhow::bail!("`{token}` is neither a label nor a point index of a {}-point space", space.len()),
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ChainEntry {
    Index(usize),
    Label(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    chain: Vec<ChainEntry>,
}

/// Loads `{"chain": [..]}` with labels or indices.
pub fn load_chain(path: &Path, space: &FiniteSpace) -> anyhow::Result<Vec<usize>> {
    let text = read(path)?;
    let f: ChainFile = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    f.chain
        .iter()
        .map(|c| match c {
            ChainEntry::Index(i) if *i < space.len() => Ok(*i),
            ChainEntry::Index(i) => Err(invalid(path, format!("point index {i} out of range")).into()),
            ChainEntry::Label(l) => resolve_point(space, l),
        })
        .collect()
}

/// Parses `auto`, `t1,t2,...` or `count:hi..lo` (geometric spacing).
pub fn parse_ladder(spec: &str, recommended: Option<&[f64]>) -> anyhow::Result<Vec<f64>> {
    let spec = spec.trim();
    let ladder: Vec<f64> = if spec == "auto" {
        recommended.map(<[f64]>::to_vec).ok_or_else(|| anyhow::anyhow!("`--ladder auto` needs a gallery input or a map file with a ladder"))?
    } else if let Some((count, range)) = spec.split_once(':') {
        let count: usize = count.parse().map_err(|_| anyhow::anyhow!("bad ladder count `{count}`"))?;
        let (hi, lo) = range.split_once("..").ok_or_else(|| anyhow::anyhow!("ladder range must look like `hi..lo`"))?;
        let (hi, lo): (f64, f64) = (hi.parse()?, lo.parse()?);
        anyhow::ensure!(count >= 2 && hi > lo && lo > 0.0, "ladder range needs count >= 2 and hi > lo > 0");
        let ratio = (lo / hi).powf(1.0 / (count - 1) as f64);
        (0..count).map(|k| if k + 1 == count { lo } else { hi * ratio.powi(k as i32) }).collect()
    } else {
        spec.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow::anyhow!("`{t}` is not a threshold")))
            .collect::<anyhow::Result<_>>()?
    };
    anyhow::ensure!(!ladder.is_empty(), "empty ladder");
    anyhow::ensure!(ladder.iter().all(|t| t.is_finite() && *t >= 0.0), "thresholds must be finite and nonnegative");
    if let Some(i) = ladder.windows(2).position(|w| w[1] >= w[0]) {
        anyhow::bail!("ladder must be strictly decreasing (entry {} is not below entry {})", i + 1, i);
    }
    Ok(ladder)
}
