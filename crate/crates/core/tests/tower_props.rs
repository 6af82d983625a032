mod common;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use proptest::prelude::*;
use ucover_core::gallery;
use ucover_core::homology::inclusion_h1_map;
use ucover_core::lattice::Lattice;
use ucover_core::tower::{
    g_entourage, uniform_joinability_audit, MlFinding, Sequential, Tower, TrivialityFinding,
};
use ucover_core::{Budget, Comparison, Entourage, FiniteSpace};

fn tower_of(space: &FiniteSpace, ladder: &[f64]) -> Tower {
    let ents: Vec<Entourage> = ladder.iter().map(|&t| space.entourage_at(t, Comparison::Closed).unwrap()).collect();
    Tower::from_entourages(&ents, Some(ladder), 0, &Sequential).unwrap()
}

fn lattice(t: &Tower, target: usize, source: usize) -> Lattice {
    let dim = t.scales[target].group().dim();
    Lattice::from_generators(dim, t.report.image(target, source).unwrap().basis.iter().cloned())
}

fn cloud() -> impl Strategy<Value = (FiniteSpace, Vec<f64>)> {
    (
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3..9),
        proptest::collection::vec(0.3f64..2.5, 3),
    )
        .prop_filter_map("distinct thresholds", |(pts, mut ts)| {
            ts.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if ts.windows(2).any(|w| w[0] - w[1] < 1e-3) {
                return None;
            }
            let space = FiniteSpace::from_points(common::labels(pts.len()), pts.iter().map(|&(x, y)| vec![x, y]).collect()).ok()?;
            Some((space, ts))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn composites_and_nesting((space, ladder) in cloud()) {
        let t = tower_of(&space, &ladder);
        let k = t.scales.len();
        for a in 0..k {
            for c in a..k {
                let direct = inclusion_h1_map(&t.scales[c], &t.scales[a]).unwrap();
                let mut via = t.map(c, a).unwrap();
                for row in via.matrix.iter_mut() {
                    for (x, d) in row.iter_mut().zip(&via.codomain.torsion) {
                        *x = x.mod_floor(d);
                    }
                }
                let mut direct = direct;
                for row in direct.matrix.iter_mut() {
                    for (x, d) in row.iter_mut().zip(&direct.codomain.torsion) {
                        *x = x.mod_floor(d);
                    }
                }
                prop_assert_eq!(via, direct);
            }
        }
        for a in 0..k - 1 {
            for c in a + 1..k - 1 {
                prop_assert!(lattice(&t, a, c + 1).is_subset(&lattice(&t, a, c)));
            }
        }
    }

    #[test]
    fn audited_pairs_realize_finer_images((space, ladder) in cloud()) {
        let t = tower_of(&space, &ladder);
        let k = t.scales.len();
        let audit = uniform_joinability_audit(&t, &Budget::default(), &Sequential).unwrap();
        for entry in &audit.entries {
            if entry.witnessed == entry.pairs && entry.fine < k - 1 {
                let finest = lattice(&t, entry.coarse, k - 1);
                prop_assert!(lattice(&t, entry.coarse, entry.fine).is_subset(&finest));
            }
        }
    }
}

#[test]
fn circle_tower_stabilizes() {
    let g = gallery::polygon(12, 1.0).unwrap();
    let t = tower_of(&g.space, &g.ladder);
    assert_eq!(t.report.scales[0].group.rank, 1);
    assert_eq!(t.report.scales[1].group.rank, 1);
    assert_eq!(t.report.bondings[0].map.matrix[0][0].abs(), BigInt::from(1));
    assert!(matches!(t.report.ml[0], MlFinding::StabilizedAt { b: 1, .. }));
    assert_eq!(t.report.trivial[0], TrivialityFinding::NotWithinLadder);
    let audit = uniform_joinability_audit(&t, &Budget::default(), &Sequential).unwrap();
    assert_eq!(audit.supported, vec![true]);
}

#[test]
fn complete_scales_are_trivial() {
    let n = 5;
    let ents = vec![Entourage::complete(n), Entourage::complete(n), Entourage::complete(n)];
    let t = Tower::from_entourages(&ents, None, 0, &Sequential).unwrap();
    assert!(t.report.scales.iter().all(|s| s.group.is_trivial()));
    assert_eq!(t.report.trivial[0], TrivialityFinding::TrivialAt { b: 1 });
    assert!(matches!(t.report.ml[0], MlFinding::StabilizedAt { b: 1, .. }));
}

#[test]
fn filled_cycle_kills_finer_loops() {
    // octagon plus its center: the center fills the loop at the coarse scale
    let mut pts = gallery::polygon(8, 1.0).unwrap().space.coords().unwrap().to_vec();
    pts.push(vec![0.0, 0.0]);
    let space = FiniteSpace::from_points(common::labels(9), pts).unwrap();
    let t = tower_of(&space, &[1.0, 0.8]);
    assert!(t.report.scales[0].group.is_trivial());
    assert_eq!(t.report.scales[1].group.rank, 1);
    assert_eq!(t.report.trivial[0], TrivialityFinding::TrivialAt { b: 1 });
}

#[test]
fn first_hexagon_audit() {
    let g = gallery::hexagon_ex72(0).unwrap();
    let t = tower_of(&g.space, &g.ladder);
    let audit = uniform_joinability_audit(&t, &Budget::default(), &Sequential).unwrap();
    let entry = &audit.entries[0];
    assert_eq!((entry.coarse, entry.fine, entry.pairs), (0, 1, 6));
    assert_eq!(entry.witnessed, 6);
}

#[test]
fn identity_scale_gives_diagonal() {
    let n = 4;
    let id = Entourage::identity(n);
    let scale = ucover_core::homology::Scale::new(&id);
    let ge = g_entourage(&scale, &scale, 0, &Budget::default(), &Sequential).unwrap();
    assert!(ge.entourage.is_identity());
    assert!(ge.pairs.is_empty());
}
