//! Generators for the example spaces and maps.
//!
//! Every generator returns the sampled space, a recommended threshold
//! ladder (coarsest first) and, where meaningful, distinguished points.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{euclid, FiniteSpace, SpaceMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GallerySpace {
    pub name: String,
    pub space: FiniteSpace,
    pub ladder: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryMap {
    pub name: String,
    pub map: SpaceMap,
    pub ladder: Vec<f64>,
}

/// A parsed gallery request such as `polygon:12,1` or `solenoid:2`.
#[derive(Clone, Debug, PartialEq)]
pub enum GalleryName {
    Polygon { n: usize, radius: f64 },
    HexagonEx72 { densify: usize },
    HexagonEx73 { densify: usize },
    Solenoid { stages: u32, samples_per_winding: usize, major: f64, minor: f64 },
    Hawaiian { circles: usize, samples: usize },
}

impl GalleryName {
    /// Parses `name[:p1,p2,...]`; omitted trailing parameters take defaults.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n, p),
            None => (spec, ""),
        };
        let params: Vec<&str> = params.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            match params.get(i) {
                None => Ok(default),
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("`{s}` is not a number in `{spec}`"))),
            }
        };
        let int = |i: usize, default: usize| -> Result<usize> {
            match params.get(i) {
                None => Ok(default),
                Some(s) => s
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParameter(format!("`{s}` is not a count in `{spec}`"))),
            }
        };
        let max_params = match name {
            "polygon" | "hawaiian" => 2,
            "hexagon_ex72" | "hexagon_ex73" => 1,
            "solenoid" => 4,
            _ => return Err(Error::UnknownGallery(name.to_string())),
        };
        if params.len() > max_params {
            return Err(Error::InvalidParameter(format!("too many parameters in `{spec}`")));
        }
        Ok(match name {
            "polygon" => GalleryName::Polygon { n: int(0, 12)?, radius: num(1, 1.0)? },
            "hexagon_ex72" => GalleryName::HexagonEx72 { densify: int(0, 0)? },
            "hexagon_ex73" => GalleryName::HexagonEx73 { densify: int(0, 0)? },
            "solenoid" => GalleryName::Solenoid {
                stages: int(0, 2)? as u32,
                samples_per_winding: int(1, 64)?,
                major: num(2, 4.0)?,
                minor: num(3, 1.0)?,
            },
            "hawaiian" => GalleryName::Hawaiian { circles: int(0, 3)?, samples: int(1, 24)? },
            _ => unreachable!(),
        })
    }

    pub fn build(&self) -> Result<GallerySpace> {
        match *self {
            GalleryName::Polygon { n, radius } => polygon(n, radius),
            GalleryName::HexagonEx72 { densify } => hexagon_ex72(densify),
            GalleryName::HexagonEx73 { densify } => hexagon_ex73(densify),
            GalleryName::Solenoid { stages, samples_per_winding, major, minor } => {
                solenoid(stages, samples_per_winding, major, minor)
            }
            GalleryName::Hawaiian { circles, samples } => hawaiian(circles, samples),
        }
    }
}

fn chord(n: usize, radius: f64, steps: usize) -> f64 {
    2.0 * radius * libm::sin(PI * steps as f64 / n as f64)
}

fn polygon_points(n: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            vec![radius * libm::cos(t), radius * libm::sin(t)]
        })
        .collect()
}

/// Regular `n`-gon of circumradius `radius`, vertex `p0` at `(radius, 0)`.
pub fn polygon(n: usize, radius: f64) -> Result<GallerySpace> {
    if n < 3 || !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("polygon needs n >= 3 and radius > 0, got ({n}, {radius})")));
    }
    let labels = (0..n).map(|k| format!("p{k}")).collect();
    let space = FiniteSpace::from_points(labels, polygon_points(n, radius))?.with_distinguished("x0", 0)?;
    let one = 0.5 * (chord(n, radius, 1) + chord(n, radius, 2));
    let ladder = if n >= 7 {
        // two-step and one-step scales both read the circle
        vec![0.5 * (chord(n, radius, 2) + chord(n, radius, 3)), one]
    } else {
        vec![one, 0.5 * chord(n, radius, 1)]
    };
    Ok(GallerySpace { name: format!("polygon:{n},{radius}"), space, ladder })
}

const HEX_LABELS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn hex_vertex(m: usize) -> [f64; 2] {
    let t = PI / 3.0 * m as f64;
    [libm::cos(t), libm::sin(t)]
}

/// Equally spaced interior samples of segment `p -> q`.
fn interior_samples(p: &[f64], q: &[f64], k: usize) -> Vec<Vec<f64>> {
    (1..=k)
        .map(|s| {
            let t = s as f64 / (k + 1) as f64;
            p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
        })
        .collect()
}

/// The unit-side regular hexagon with side `ab` removed, sampled at its
/// vertices plus `densify` interior points per retained side.
pub fn hexagon_ex72(densify: usize) -> Result<GallerySpace> {
    let mut labels: Vec<String> = HEX_LABELS.iter().map(|s| s.to_string()).collect();
    let mut coords: Vec<Vec<f64>> = (0..6).map(|m| hex_vertex(m).to_vec()).collect();
    // retained sides: b-c, c-d, d-e, e-f, f-a
    for m in 1..6 {
        let (p, q) = (hex_vertex(m), hex_vertex((m + 1) % 6));
        for (s, pt) in interior_samples(&p, &q, densify).into_iter().enumerate() {
            labels.push(format!("{}{}.{}", HEX_LABELS[m], HEX_LABELS[(m + 1) % 6], s + 1));
            coords.push(pt);
        }
    }
    let space = FiniteSpace::from_points(labels, coords)?
        .with_distinguished("a", 0)?
        .with_distinguished("b", 1)?;
    let mut ladder = vec![3.0, 1.0];
    if densify > 0 {
        ladder.push(1.0 / (densify + 1) as f64);
    }
    Ok(GallerySpace { name: format!("hexagon_ex72:{densify}"), space, ladder })
}

/// The hexagon of [`hexagon_ex72`] plus its center `c` and a vertical
/// unit-side hexagon standing on segment `a–c` (in the plane through `a`, `c`
/// and the z-axis) whose bottom side is left unsampled.
///
/// Planar vertices are `a`, `b`, `h2`..`h5`, the center is `c`, the upper
/// vertical vertices are `w1`..`w4`.
pub fn hexagon_ex73(densify: usize) -> Result<GallerySpace> {
    let r3 = libm::sqrt(3.0);
    let planar_labels = ["a", "b", "h2", "h3", "h4", "h5"];
    let mut labels: Vec<String> = planar_labels.iter().map(|s| s.to_string()).collect();
    let mut coords: Vec<Vec<f64>> = (0..6)
        .map(|m| {
            let [x, y] = hex_vertex(m);
            vec![x, y, 0.0]
        })
        .collect();
    labels.push("c".into());
    coords.push(vec![0.0, 0.0, 0.0]);
    let vertical = [
        ("w1", [1.5, 0.0, r3 / 2.0]),
        ("w2", [1.0, 0.0, r3]),
        ("w3", [0.0, 0.0, r3]),
        ("w4", [-0.5, 0.0, r3 / 2.0]),
    ];
    for (l, p) in vertical {
        labels.push(l.into());
        coords.push(p.to_vec());
    }
    let mut sides: Vec<(usize, usize)> = (1..6).map(|m| (m, (m + 1) % 6)).collect();
    // vertical arc a -> w1 -> w2 -> w3 -> w4 -> c
    sides.extend([(0, 7), (7, 8), (8, 9), (9, 10), (10, 6)]);
    for (p, q) in sides {
        let (pp, qq) = (coords[p].clone(), coords[q].clone());
        for (s, pt) in interior_samples(&pp, &qq, densify).into_iter().enumerate() {
            labels.push(format!("{}-{}.{}", labels[p], labels[q], s + 1));
            coords.push(pt);
        }
    }
    let space = FiniteSpace::from_points(labels, coords)?
        .with_distinguished("a", 0)?
        .with_distinguished("b", 1)?
        .with_distinguished("c", 6)?;
    let mut ladder = vec![1.5, 1.0];
    if densify > 0 {
        ladder.push(1.0 / (densify + 1) as f64);
    }
    Ok(GallerySpace { name: format!("hexagon_ex73:{densify}"), space, ladder })
}

/// Meridional offset radii of the nested stages, summing to `minor`.
fn stage_radii(stages: u32, minor: f64) -> Vec<f64> {
    let ratio = 3.0 / 7.0;
    let raw: Vec<f64> = (0..stages).map(|k| libm::pow(ratio, k as f64)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| minor * w / total).collect()
}

/// Stage-`stages` approximation of the dyadic solenoid: a closed curve
/// winding `2^stages` times around a torus (major radius `major`, minor
/// radius `minor`), sampled `samples_per_winding` times per turn.
///
/// Stage `k` offsets the curve in the meridional disc by radius `r_k` at
/// angle `theta / 2^k`, so strands pair up stage by stage. Threshold `j` of
/// the recommended ladder (coarsest first) merges exactly the strands of
/// the stage-`j` circle.
pub fn solenoid(stages: u32, samples_per_winding: usize, major: f64, minor: f64) -> Result<GallerySpace> {
    if stages == 0 || stages > 8 || samples_per_winding < 8 || !(minor > 0.0) || !(major > minor) {
        return Err(Error::InvalidParameter(format!(
            "solenoid needs 1 <= K <= 8, samples >= 8 and 0 < r < R, got ({stages}, {samples_per_winding}, {major}, {minor})"
        )));
    }
    let windings = 1usize << stages;
    let total = windings * samples_per_winding;
    let radii = stage_radii(stages, minor);
    let coords: Vec<Vec<f64>> = (0..total)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / samples_per_winding as f64;
            let (mut radial, mut height) = (0.0, 0.0);
            for (k, r) in radii.iter().enumerate() {
                let phi = theta / (1u64 << (k + 1)) as f64;
                radial += r * libm::cos(phi);
                height += r * libm::sin(phi);
            }
            let rho = major + radial;
            vec![rho * libm::cos(theta), rho * libm::sin(theta), height]
        })
        .collect();

    // Level j identifies points whose indices differ by a multiple of
    // 2^j * samples_per_winding. `fill` is the largest distance needed to
    // link a point to its level-j partners and their curve neighbours;
    // `gap` is the smallest distance to anything outside a short window
    // of the same level-j sheet.
    let window = (samples_per_winding / 8).max(2);
    let mut ladder = Vec::with_capacity(stages as usize + 1);
    let mut prev = f64::INFINITY;
    for j in 0..=stages {
        let period = (1usize << j) * samples_per_winding;
        let mut fill: f64 = 0.0;
        let mut gap = f64::INFINITY;
        for i in 0..total {
            for a in 0..total / period {
                for delta in [total - 1, 0, 1] {
                    let k = (i + a * period + delta) % total;
                    fill = fill.max(euclid(&coords[i], &coords[k]));
                }
            }
            if j > 0 {
                for k in 0..total {
                    let r = (k + total - i) % period;
                    if r.min(period - r) > window {
                        gap = gap.min(euclid(&coords[i], &coords[k]));
                    }
                }
            }
        }
        let t = if j == 0 { fill * 1.1 } else { 0.5 * (fill + gap) };
        if j > 0 && !(fill < gap) || !(t < prev) {
            return Err(Error::InvalidParameter(format!(
                "solenoid sampling too coarse to separate stage {j} (fill {fill:.4}, gap {gap:.4})"
            )));
        }
        ladder.push(t);
        prev = t;
    }
    let labels = (0..total).map(|i| format!("s{i}")).collect();
    let space = FiniteSpace::from_points(labels, coords)?.with_distinguished("x0", 0)?;
    Ok(GallerySpace {
        name: format!("solenoid:{stages},{samples_per_winding},{major},{minor}"),
        space,
        ladder,
    })
}

/// `circles` circles of radii `1, 1/2, ..., 1/m` tangent at the wedge point
/// `w` (the origin), each sampled at `samples` points including `w`.
pub fn hawaiian(circles: usize, samples: usize) -> Result<GallerySpace> {
    if circles == 0 || samples < 4 {
        return Err(Error::InvalidParameter(format!(
            "hawaiian needs m >= 1 and samples >= 4, got ({circles}, {samples})"
        )));
    }
    let mut labels = vec![String::from("w")];
    let mut coords = vec![vec![0.0, 0.0]];
    for k in 1..=circles {
        let r = 1.0 / k as f64;
        for s in 1..samples {
            let t = PI + 2.0 * PI * s as f64 / samples as f64;
            labels.push(format!("h{k}.{s}"));
            coords.push(vec![r + r * libm::cos(t), r * libm::sin(t)]);
        }
    }
    let spacing = chord(samples, 1.0, 1);
    let mut ladder: Vec<f64> = (1..=circles).map(|k| 1.8 / k as f64).filter(|&t| t > 1.2 * spacing).collect();
    ladder.push(1.2 * spacing);
    let space = FiniteSpace::from_points(labels, coords)?.with_distinguished("x0", 0)?;
    Ok(GallerySpace { name: format!("hawaiian:{circles},{samples}"), space, ladder })
}

/// The antipodal quotient of the 12-gon onto the 6-gon, `p_k -> q_(k mod 6)`.
pub fn double_cover() -> Result<GalleryMap> {
    let up = polygon(12, 1.0)?;
    let down = FiniteSpace::from_points((0..6).map(|k| format!("q{k}")).collect(), polygon_points(6, 1.0))?;
    let assign = (0..12).map(|k| k % 6).collect();
    Ok(GalleryMap { name: "double_cover".into(), map: SpaceMap::new(up.space, down, assign)?, ladder: up.ladder })
}

/// The reflection quotient of the hexagon onto a 4-point path,
/// `p_k -> q_min(k, 6-k)`.
pub fn fold_map() -> Result<GalleryMap> {
    let up = polygon(6, 1.0)?;
    let pts = polygon_points(6, 1.0);
    let down = FiniteSpace::from_points((0..4).map(|k| format!("q{k}")).collect(), pts[..4].to_vec())?;
    let assign = (0..6).map(|k: usize| k.min(6 - k)).collect();
    // two-step and one-step scales of the hexagon
    Ok(GalleryMap { name: "fold".into(), map: SpaceMap::new(up.space, down, assign)?, ladder: vec![1.8, 1.2] })
}

/// The identity of the 12-gon.
pub fn identity_map() -> Result<GalleryMap> {
    let up = polygon(12, 1.0)?;
    Ok(GalleryMap { name: "identity".into(), map: SpaceMap::identity(up.space), ladder: up.ladder })
}

pub fn map_by_name(name: &str) -> Result<GalleryMap> {
    match name {
        "double_cover" => double_cover(),
        "fold" => fold_map(),
        "identity" => identity_map(),
        other => Err(Error::UnknownGallery(other.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Comparison;

    #[test]
    fn hexagon_ex72_geometry() {
        let g = hexagon_ex72(0).unwrap();
        let s = &g.space;
        assert_eq!(s.len(), 6);
        let (a, b) = (s.point("a").unwrap(), s.point("b").unwrap());
        assert!((s.dist(a, b) - 1.0).abs() < 1e-9);
        assert!((s.diameter() - 2.0).abs() < 1e-9);
        assert_eq!(s.coords().unwrap()[a], vec![1.0, 0.0]);
        assert_eq!(g.ladder, vec![3.0, 1.0]);
    }

    #[test]
    fn hexagon_ex72_scales() {
        let s = hexagon_ex72(0).unwrap().space;
        assert_eq!(s.entourage_at(3.0, Comparison::Closed).unwrap().pair_count(), 15);
        let e1 = s.entourage_at(1.0, Comparison::Closed).unwrap();
        assert_eq!(e1.pair_count(), 6);
        assert!(e1.contains(0, 1));
        for x in 0..6 {
            assert_eq!(e1.ball(x).unwrap().len(), 3);
        }
    }

    #[test]
    fn densified_hexagon_spacing() {
        let g = hexagon_ex72(3).unwrap();
        assert_eq!(g.space.len(), 6 + 5 * 3);
        let fine = g.space.entourage_at(0.25, Comparison::Closed).unwrap();
        // a path through 21 points, with a-b unlinked
        assert_eq!(fine.pair_count(), 20);
        assert!(!fine.contains(0, 1));
        assert!(fine.is_chain_connected());
    }

    #[test]
    fn hexagon_ex73_geometry() {
        let g = hexagon_ex73(0).unwrap();
        let s = &g.space;
        assert_eq!(s.len(), 11);
        let c = s.point("c").unwrap();
        for p in 0..6 {
            assert!((s.dist(p, c) - 1.0).abs() < 1e-9);
        }
        let w = ["w1", "w2", "w3", "w4"].map(|l| s.index_of(l).unwrap());
        let arc = [0, w[0], w[1], w[2], w[3], c];
        for pair in arc.windows(2) {
            assert!((s.dist(pair[0], pair[1]) - 1.0).abs() < 1e-9);
        }
        assert!(g.ladder.contains(&1.0));
    }

    #[test]
    fn polygon_square() {
        let s = polygon(4, 1.0).unwrap().space;
        for k in 0..4 {
            assert!((s.dist(k, (k + 1) % 4) - libm::sqrt(2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn solenoid_size_and_ladder() {
        let g = solenoid(2, 64, 4.0, 1.0).unwrap();
        assert_eq!(g.space.len(), 256);
        assert_eq!(g.ladder.len(), 3);
        assert!(g.ladder.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn hawaiian_shape() {
        let g = hawaiian(3, 12).unwrap();
        assert_eq!(g.space.len(), 1 + 3 * 11);
        assert!(g.space.entourage_at(*g.ladder.last().unwrap(), Comparison::Closed).unwrap().is_chain_connected());
    }

    #[test]
    fn parse_names() {
        assert_eq!(GalleryName::parse("solenoid:2").unwrap(), GalleryName::Solenoid {
            stages: 2,
            samples_per_winding: 64,
            major: 4.0,
            minor: 1.0
        });
        assert_eq!(GalleryName::parse("polygon:4,1").unwrap(), GalleryName::Polygon { n: 4, radius: 1.0 });
        assert!(matches!(GalleryName::parse("torus"), Err(Error::UnknownGallery(_))));
        assert!(GalleryName::parse("polygon:x").is_err());
        assert!(polygon(2, 1.0).is_err());
    }

    #[test]
    fn fixtures_are_valid_maps() {
        let dc = double_cover().unwrap();
        assert!(dc.map.is_surjective() && !dc.map.is_injective());
        let fold = fold_map().unwrap();
        assert_eq!(fold.map.assign, vec![0, 1, 2, 3, 2, 1]);
    }
}
