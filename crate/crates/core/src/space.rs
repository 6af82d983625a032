//! Finite dissimilarity spaces, maps between them and scale ladders.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::entourage::{Entourage, ImageEntourage};
use crate::error::{Error, Result};

/// Relative tolerance for symmetry and coordinate consistency checks.
pub const SPACE_RTOL: f64 = 1e-9;

/// Slack used when thresholding distances, relative to `max(1, eps)`.
/// Sampled coordinates put nominally equal distances on both sides of the
/// threshold by one ulp; without slack, "at most 1" would depend on rounding.
pub const THRESHOLD_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// `dist <= eps`.
    #[default]
    Closed,
    /// `dist < eps`.
    Strict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Vec<f64>>>,
    dist: Vec<Vec<f64>>,
    #[serde(default)]
    distinguished: BTreeMap<String, usize>,
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

impl FiniteSpace {
    /// Space from per-point coordinates; distances are Euclidean.
    pub fn from_points(labels: Vec<String>, coords: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != coords.len() {
            return Err(Error::InvalidSpace(format!(
                "{} labels for {} points",
                labels.len(),
                coords.len()
            )));
        }
        if let Some(first) = coords.first() {
            let d = first.len();
            if let Some((i, _)) = coords.iter().enumerate().find(|(_, c)| c.len() != d) {
                return Err(Error::InvalidSpace(format!(
                    "point {i} has dimension {} but point 0 has {d}",
                    coords[i].len()
                )));
            }
        }
        if coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpace("non-finite coordinate".into()));
        }
        let dist = coords
            .iter()
            .map(|a| coords.iter().map(|b| euclid(a, b)).collect())
            .collect();
        let space = FiniteSpace { labels, coords: Some(coords), dist, distinguished: BTreeMap::new() };
        space.check_labels()?;
        Ok(space)
    }

    /// Space from a full dissimilarity matrix.
    pub fn from_matrix(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let space = FiniteSpace { labels, coords: None, dist, distinguished: BTreeMap::new() };
        space.validate()?;
        Ok(space)
    }

    pub fn with_distinguished(mut self, name: &str, index: usize) -> Result<Self> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange { index, len: self.len() });
        }
        self.distinguished.insert(name.into(), index);
        Ok(self)
    }

    fn check_labels(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(j) = seen.insert(l.as_str(), i) {
                return Err(Error::InvalidSpace(format!("duplicate label `{l}` at {j} and {i}")));
            }
        }
        Ok(())
    }

    /// Re-checks every invariant. Used after deserialization.
    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        self.check_labels()?;
        if self.dist.len() != n || self.dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace(format!("distance matrix is not {n}x{n}")));
        }
        for i in 0..n {
            if self.dist[i][i] != 0.0 {
                return Err(Error::InvalidSpace(format!(
                    "nonzero diagonal entry {} at {i}",
                    self.dist[i][i]
                )));
            }
            for j in 0..n {
                let d = self.dist[i][j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidSpace(format!("negative or non-finite entry {d} at ({i}, {j})")));
                }
                let e = self.dist[j][i];
                if (d - e).abs() > SPACE_RTOL * d.max(e).max(1.0) {
                    return Err(Error::InvalidSpace(format!(
                        "asymmetric entries ({i}, {j}) = {d} vs ({j}, {i}) = {e}"
                    )));
                }
            }
        }
        if let Some(coords) = &self.coords {
            if coords.len() != n {
                return Err(Error::InvalidSpace("coordinate count does not match labels".into()));
            }
            for i in 0..n {
                for j in 0..n {
                    let e = euclid(&coords[i], &coords[j]);
                    if (self.dist[i][j] - e).abs() > SPACE_RTOL * e.max(1.0) {
                        return Err(Error::InvalidSpace(format!(
                            "distance ({i}, {j}) disagrees with coordinates"
                        )));
                    }
                }
            }
        }
        for (name, &idx) in &self.distinguished {
            if idx >= n {
                return Err(Error::InvalidSpace(format!("distinguished `{name}` out of range")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn dist_matrix(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub fn distinguished(&self) -> &BTreeMap<String, usize> {
        &self.distinguished
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// A distinguished point by name, falling back to a label lookup.
    pub fn point(&self, name: &str) -> Option<usize> {
        self.distinguished.get(name).copied().or_else(|| self.index_of(name))
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// The entourage of pairs at distance at most (or below) `eps`.
    pub fn entourage_at(&self, eps: f64, cmp: Comparison) -> Result<Entourage> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("threshold must be finite and >= 0, got {eps}")));
        }
        let slack = THRESHOLD_RTOL * eps.max(1.0);
        Ok(Entourage::from_fn(self.len(), |i, j| {
            let d = self.dist[i][j];
            match cmp {
                Comparison::Closed => d <= eps + slack,
                Comparison::Strict => d < eps - slack,
            }
        }))
    }

    /// The smallest threshold at which the space is chain connected.
    pub fn connectivity_threshold(&self) -> f64 {
        // Prim on the complete graph; the answer is the longest MST edge.
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mut best = alloc::vec![f64::INFINITY; n];
        let mut done = alloc::vec![false; n];
        best[0] = 0.0;
        let mut longest: f64 = 0.0;
        for _ in 0..n {
            let v = (0..n)
                .filter(|&v| !done[v])
                .min_by(|&a, &b| best[a].total_cmp(&best[b]))
                .expect("unvisited point");
            done[v] = true;
            longest = longest.max(best[v]);
            for w in 0..n {
                if !done[w] && self.dist[v][w] < best[w] {
                    best[w] = self.dist[v][w];
                }
            }
        }
        longest
    }
}

/// A map between finite spaces given by a point assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceMap {
    pub source: FiniteSpace,
    pub target: FiniteSpace,
    pub assign: Vec<usize>,
}

impl SpaceMap {
    pub fn new(source: FiniteSpace, target: FiniteSpace, assign: Vec<usize>) -> Result<Self> {
        let map = SpaceMap { source, target, assign };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.target.validate()?;
        if self.assign.len() != self.source.len() {
            return Err(Error::InvalidParameter(format!(
                "assignment covers {} of {} source points",
                self.assign.len(),
                self.source.len()
            )));
        }
        if let Some(&bad) = self.assign.iter().find(|&&a| a >= self.target.len()) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.target.len() });
        }
        Ok(())
    }

    pub fn identity(space: FiniteSpace) -> Self {
        let assign = (0..space.len()).collect();
        SpaceMap { source: space.clone(), target: space, assign }
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.assign[x]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = alloc::vec![false; self.target.len()];
        self.assign.iter().all(|&a| !core::mem::replace(&mut seen[a], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = alloc::vec![false; self.target.len()];
        for &a in &self.assign {
            seen[a] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// `f(E)` for an entourage on the source.
    pub fn image(&self, e: &Entourage) -> Result<ImageEntourage> {
        e.image_under(&self.assign, self.target.len())
    }

    /// Source points over each target point.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); self.target.len()];
        for (x, &a) in self.assign.iter().enumerate() {
            out[a].push(x);
        }
        out
    }
}

/// A finite, nested approximation of the entourage filter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleLadder {
    /// Strictly decreasing thresholds, coarsest first.
    Thresholds(Vec<f64>),
    /// Explicit entourages, each contained in the previous one.
    Explicit(Vec<Entourage>),
}

impl ScaleLadder {
    pub fn len(&self) -> usize {
        match self {
            ScaleLadder::Thresholds(t) => t.len(),
            ScaleLadder::Explicit(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn thresholds(&self) -> Option<&[f64]> {
        match self {
            ScaleLadder::Thresholds(t) => Some(t),
            ScaleLadder::Explicit(_) => None,
        }
    }

    /// The ladder's entourages on `space`, coarsest first.
    pub fn resolve(&self, space: &FiniteSpace, cmp: Comparison) -> Result<Vec<Entourage>> {
        let ents = match self {
            ScaleLadder::Thresholds(ts) => {
                for (i, w) in ts.windows(2).enumerate() {
                    if !(w[1] < w[0]) {
                        return Err(Error::NotNested { index: i + 1 });
                    }
                }
                ts.iter().map(|&t| space.entourage_at(t, cmp)).collect::<Result<Vec<_>>>()?
            }
            ScaleLadder::Explicit(es) => {
                if let Some(e) = es.iter().find(|e| e.n() != space.len()) {
                    return Err(Error::CarrierMismatch { expected: space.len(), found: e.n() });
                }
                es.clone()
            }
        };
        check_nested(&ents)?;
        Ok(ents)
    }
}

pub fn check_nested(ents: &[Entourage]) -> Result<()> {
    for (i, w) in ents.windows(2).enumerate() {
        if !w[1].is_subset(&w[0]) {
            return Err(Error::NotNested { index: i + 1 });
        }
    }
    Ok(())
}

/// Whether a nested ladder is the base of a uniform structure on its own:
/// every entry contains the square of some entry of the ladder. On a
/// finite ladder this forces the finest entry to be transitive.
pub fn is_uniform_base(ents: &[Entourage]) -> bool {
    ents.iter().all(|e| ents.iter().any(|f| f.square().is_subset(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn euclidean_from_points() {
        let s = FiniteSpace::from_points(labels(3), vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]])
            .unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.dist(0, 1) - libm::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let err = FiniteSpace::from_matrix(labels(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidSpace(ref m) if m.contains("asymmetric")), "{err}");
    }

    #[test]
    fn negative_and_diagonal_rejected() {
        assert!(FiniteSpace::from_matrix(labels(2), vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(FiniteSpace::from_matrix(labels(2), vec![vec![0.5, 1.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn eps_zero_is_identity() {
        let s = FiniteSpace::from_points(labels(3), vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert!(s.entourage_at(0.0, Comparison::Closed).unwrap().is_identity());
        let e = s.entourage_at(1.0, Comparison::Closed).unwrap();
        assert!(e.contains(0, 1) && !e.contains(1, 2));
        assert!(!s.entourage_at(1.0, Comparison::Strict).unwrap().contains(0, 1));
        assert!(s.entourage_at(-1.0, Comparison::Closed).is_err());
    }

    #[test]
    fn ladder_must_decrease() {
        let s = FiniteSpace::from_points(labels(2), vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(ScaleLadder::Thresholds(vec![1.0, 1.0]).resolve(&s, Comparison::Closed).is_err());
        assert_eq!(ScaleLadder::Thresholds(vec![2.0, 0.5]).resolve(&s, Comparison::Closed).unwrap().len(), 2);
    }

    #[test]
    fn map_validation() {
        let s = FiniteSpace::from_points(labels(2), vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(SpaceMap::new(s.clone(), s.clone(), vec![0]).is_err());
        assert!(SpaceMap::new(s.clone(), s.clone(), vec![0, 2]).is_err());
        let f = SpaceMap::new(s.clone(), s, vec![1, 1]).unwrap();
        assert!(!f.is_injective() && !f.is_surjective());
    }

    #[test]
    fn connectivity_threshold_is_longest_mst_edge() {
        let s = FiniteSpace::from_points(labels(4), vec![vec![0.0], vec![1.0], vec![3.0], vec![3.5]]).unwrap();
        assert_eq!(s.connectivity_threshold(), 2.0);
    }
}
