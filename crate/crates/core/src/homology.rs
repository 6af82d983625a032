//! First homology of Rips 2-skeleta in Smith coordinates, classes of loops,
//! and inclusion-induced maps between scales.
//!
//! The relation matrix is first thinned by unimodular sparse elimination
//! (pivoting only on `±1` entries, which is exact); the small dense remainder
//! goes through [`crate::snf::smith`]. Every generator keeps its class vector,
//! so the class of any 1-cycle is a sum of per-letter vectors.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::entourage::Entourage;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rips::RipsSkeleton;
use crate::snf::smith;

/// `Z^rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_k` with `d_1 | d_2 | ...`, each `d_i >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub rank: usize,
    #[serde(with = "crate::bigint_serde::vec")]
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup { rank, torsion: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Number of coordinates: torsion coordinates first, then free ones.
    pub fn dim(&self) -> usize {
        self.torsion.len() + self.rank
    }

    /// Modulus of coordinate `k`, `None` for a free coordinate.
    pub fn modulus(&self, k: usize) -> Option<&BigInt> {
        self.torsion.get(k)
    }

    /// Reduces torsion coordinates into `[0, d)`.
    pub fn reduce(&self, v: &mut [BigInt]) {
        for (x, d) in v.iter_mut().zip(&self.torsion) {
            *x = x.mod_floor(d);
        }
    }

    /// The relation lattice `⊕ d_i Z ⊕ 0` inside `Z^dim`.
    pub fn relation_lattice(&self) -> Lattice {
        let dim = self.dim();
        let gens = self.torsion.iter().enumerate().map(|(i, d)| {
            let mut v = vec![BigInt::zero(); dim];
            v[i] = d.clone();
            v
        });
        Lattice::from_generators(dim, gens)
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("0");
        }
        let mut first = true;
        if self.rank > 0 {
            write!(f, "Z")?;
            if self.rank > 1 {
                write!(f, "^{}", self.rank)?;
            }
            first = false;
        }
        for d in &self.torsion {
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "Z/{d}")?;
            first = false;
        }
        Ok(())
    }
}

type SparseRow = Vec<(usize, BigInt)>;

/// `a + factor * b` on rows sorted by column.
fn axpy(a: &[(usize, BigInt)], factor: &BigInt, b: &[(usize, BigInt)]) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, factor * &b[j].1));
            j += 1;
        } else {
            let x = &a[i].1 + factor * &b[j].1;
            if !x.is_zero() {
                out.push((a[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Homology of a presentation `Z^g / <relations>` in Smith coordinates.
#[derive(Clone, Debug)]
pub struct Homology {
    group: AbelianGroup,
    /// Class vector of each generator (torsion coordinates reduced).
    gen_class: Vec<Vec<BigInt>>,
    /// Representative cycle of each coordinate, as a sparse generator vector.
    basis: Vec<SparseRow>,
}

impl Homology {
    /// Homology of the 2-skeleton: generators are non-forest edges, one
    /// relation per triangle.
    pub fn of_skeleton(skel: &RipsSkeleton) -> Self {
        let rows = skel
            .triangles()
            .iter()
            .map(|&[i, j, k]| {
                [(i, j), (j, k), (k, i)]
                    .iter()
                    .filter_map(|&(u, v)| skel.step_letter(u, v))
                    .map(|(g, s)| (g, i64::from(s)))
                    .collect::<Vec<_>>()
            })
            .collect();
        Self::from_relations(skel.generator_count(), rows)
    }

    pub fn from_relations(generators: usize, relations: Vec<Vec<(usize, i64)>>) -> Self {
        let mut rows: Vec<Option<SparseRow>> = relations
            .into_iter()
            .map(|r| {
                let mut acc: alloc::collections::BTreeMap<usize, BigInt> = Default::default();
                for (g, c) in r {
                    *acc.entry(g).or_default() += c;
                }
                let row: SparseRow = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                (!row.is_empty()).then_some(row)
            })
            .collect();
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); generators];
        for (r, row) in rows.iter().enumerate() {
            for (g, _) in row.iter().flatten() {
                col_rows[*g].insert(r);
            }
        }
        let mut alive = vec![true; generators];
        let mut eliminated: Vec<(usize, SparseRow)> = Vec::new();

        loop {
            let mut progress = false;
            for r in 0..rows.len() {
                let Some(row) = rows[r].as_ref() else { continue };
                let pivot = row
                    .iter()
                    .filter(|(_, c)| c.abs().is_one())
                    .min_by_key(|(g, _)| (col_rows[*g].len(), *g))
                    .map(|(g, c)| (*g, c.clone()));
                let Some((g, u)) = pivot else { continue };
                let row = rows[r].take().unwrap();
                for (h, _) in &row {
                    col_rows[*h].remove(&r);
                }
                // u*g + sum a_h h = 0, so g = -u * sum a_h h
                let expr: SparseRow = row.iter().filter(|(h, _)| *h != g).map(|(h, a)| (*h, -(&u * a))).collect();
                let others: Vec<usize> = col_rows[g].iter().copied().collect();
                for r2 in others {
                    let old = rows[r2].take().unwrap();
                    let c = old.iter().find(|(h, _)| *h == g).map(|(_, c)| c.clone()).unwrap();
                    let factor = -(&c * &u);
                    let new = axpy(&old, &factor, &row);
                    for (h, _) in &old {
                        col_rows[*h].remove(&r2);
                    }
                    for (h, _) in &new {
                        col_rows[*h].insert(r2);
                    }
                    rows[r2] = (!new.is_empty()).then_some(new);
                }
                debug_assert!(col_rows[g].is_empty());
                alive[g] = false;
                eliminated.push((g, expr));
                progress = true;
            }
            if !progress {
                break;
            }
        }

        let survivors: Vec<usize> = (0..generators).filter(|&g| alive[g]).collect();
        let mut pos = vec![usize::MAX; generators];
        for (k, &g) in survivors.iter().enumerate() {
            pos[g] = k;
        }
        let s = survivors.len();
        let dense: Vec<Vec<BigInt>> = rows
            .into_iter()
            .flatten()
            .map(|row| {
                let mut d = vec![BigInt::zero(); s];
                for (g, c) in row {
                    d[pos[g]] = c;
                }
                d
            })
            .collect();
        let snf = smith(dense, s);

        // coordinate k <- Smith column cols[k]; unit invariants are dropped
        let r = snf.invariants.len();
        let mut cols = Vec::new();
        let mut torsion = Vec::new();
        for (i, d) in snf.invariants.iter().enumerate() {
            if !d.is_one() {
                cols.push(i);
                torsion.push(d.clone());
            }
        }
        cols.extend(r..s);
        let group = AbelianGroup { rank: s - r, torsion };

        let mut gen_class = vec![Vec::new(); generators];
        for (k, &g) in survivors.iter().enumerate() {
            let mut v: Vec<BigInt> = cols.iter().map(|&c| snf.v[k][c].clone()).collect();
            group.reduce(&mut v);
            gen_class[g] = v;
        }
        let dim = group.dim();
        for (g, expr) in eliminated.iter().rev() {
            let mut v = vec![BigInt::zero(); dim];
            for (h, a) in expr {
                for (x, y) in v.iter_mut().zip(&gen_class[*h]) {
                    *x += a * y;
                }
            }
            group.reduce(&mut v);
            gen_class[*g] = v;
        }
        let basis = cols
            .iter()
            .map(|&c| {
                snf.v_inv[c]
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(k, x)| (survivors[k], x.clone()))
                    .collect()
            })
            .collect();
        Homology { group, gen_class, basis }
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn generator_class(&self, g: usize) -> &[BigInt] {
        &self.gen_class[g]
    }

    /// Class of a 1-cycle given by its generator coefficients.
    pub fn class_of_raw(&self, raw: &[(usize, BigInt)]) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.group.dim()];
        for (g, a) in raw {
            for (x, y) in v.iter_mut().zip(&self.gen_class[*g]) {
                *x += a * y;
            }
        }
        self.group.reduce(&mut v);
        v
    }

    /// Generator coefficients of a cycle representing coordinate `k`.
    pub fn basis_cycle(&self, k: usize) -> &[(usize, BigInt)] {
        &self.basis[k]
    }
}

/// An entourage with its skeleton and homology: everything a per-scale
/// question needs.
#[derive(Clone, Debug)]
pub struct Scale {
    skeleton: RipsSkeleton,
    homology: Homology,
}

impl Scale {
    pub fn new(e: &Entourage) -> Self {
        let skeleton = RipsSkeleton::from_entourage(e);
        let homology = Homology::of_skeleton(&skeleton);
        Scale { skeleton, homology }
    }

    pub fn entourage(&self) -> &Entourage {
        self.skeleton.entourage()
    }

    pub fn n(&self) -> usize {
        self.skeleton.n()
    }

    pub fn skeleton(&self) -> &RipsSkeleton {
        &self.skeleton
    }

    pub fn homology(&self) -> &Homology {
        &self.homology
    }

    pub fn group(&self) -> &AbelianGroup {
        self.homology.group()
    }

    /// Adds the class of the step `u -> v` to `acc` (unreduced).
    pub fn add_step(&self, acc: &mut [BigInt], u: usize, v: usize, times: &BigInt) {
        if let Some((g, s)) = self.skeleton.step_letter(u, v) {
            let t = if s > 0 { times.clone() } else { -times };
            for (x, y) in acc.iter_mut().zip(self.homology.generator_class(g)) {
                *x += &t * y;
            }
        }
    }

    /// Class of a walk whose links are assumed related; not necessarily closed.
    pub fn walk_class(&self, seq: &[usize]) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.group().dim()];
        let one = BigInt::one();
        for w in seq.windows(2) {
            self.add_step(&mut v, w[0], w[1], &one);
        }
        self.group().reduce(&mut v);
        v
    }

    /// Homology class of a closed chain valid at this scale.
    pub fn h1_class(&self, seq: &[usize]) -> Result<Vec<BigInt>> {
        validate_walk(self.entourage(), seq)?;
        if seq.first() != seq.last() {
            return Err(Error::NotClosed);
        }
        Ok(self.walk_class(seq))
    }
}

pub(crate) fn validate_walk(e: &Entourage, seq: &[usize]) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::EmptyChain);
    }
    if let Some(&bad) = seq.iter().find(|&&x| x >= e.n()) {
        return Err(Error::IndexOutOfRange { index: bad, len: e.n() });
    }
    if let Some(position) = seq.windows(2).position(|w| !e.contains(w[0], w[1])) {
        return Err(Error::InvalidLink { position, from: seq[position], to: seq[position + 1] });
    }
    Ok(())
}

/// A homomorphism between abelian groups in their Smith coordinates;
/// `matrix[r][c]` is the image of domain coordinate `c` in codomain
/// coordinate `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H1Map {
    pub domain: AbelianGroup,
    pub codomain: AbelianGroup,
    #[serde(with = "crate::bigint_serde::matrix")]
    pub matrix: Vec<Vec<BigInt>>,
}

impl H1Map {
    pub fn identity(g: &AbelianGroup) -> Self {
        let d = g.dim();
        let matrix = (0..d).map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
        H1Map { domain: g.clone(), codomain: g.clone(), matrix }
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut y: Vec<BigInt> = self
            .matrix
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        self.codomain.reduce(&mut y);
        y
    }

    /// Image of domain coordinate `c`.
    pub fn column(&self, c: usize) -> Vec<BigInt> {
        self.matrix.iter().map(|row| row[c].clone()).collect()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &H1Map) -> Result<H1Map> {
        if self.codomain != next.domain {
            return Err(Error::Precondition("composed maps do not match".into()));
        }
        let cols: Vec<Vec<BigInt>> = (0..self.domain.dim()).map(|c| next.apply(&self.column(c))).collect();
        let matrix = (0..next.codomain.dim()).map(|r| cols.iter().map(|col| col[r].clone()).collect()).collect();
        Ok(H1Map { domain: self.domain.clone(), codomain: next.codomain.clone(), matrix })
    }

    /// Image subgroup in the codomain, as a lattice containing the relations.
    pub fn image(&self) -> Lattice {
        let gens = (0..self.domain.dim()).map(|c| self.column(c));
        Lattice::from_generators(self.codomain.dim(), gens).join(&self.codomain.relation_lattice())
    }

    /// Smith invariants of the matrix (nonzero diagonal entries).
    pub fn smith_invariants(&self) -> Vec<BigInt> {
        smith(self.matrix.clone(), self.domain.dim()).invariants
    }
}

/// The map `H1(fine) -> H1(coarse)` induced by the identity on vertices.
pub fn inclusion_h1_map(fine: &Scale, coarse: &Scale) -> Result<H1Map> {
    if fine.n() != coarse.n() {
        return Err(Error::CarrierMismatch { expected: coarse.n(), found: fine.n() });
    }
    if !fine.entourage().is_subset(coarse.entourage()) {
        return Err(Error::NotNested { index: 0 });
    }
    let dim = coarse.group().dim();
    let one = BigInt::one();
    // potential: coarse class of the fine forest path root -> v
    let fs = fine.skeleton();
    let mut potential: Vec<Vec<BigInt>> = vec![Vec::new(); fs.n()];
    for &v in fs.bfs_order() {
        potential[v] = match fs.parent()[v] {
            None => vec![BigInt::zero(); dim],
            Some(p) => {
                let mut acc = potential[p].clone();
                coarse.add_step(&mut acc, p, v, &one);
                acc
            }
        };
    }
    let fundamental: Vec<Vec<BigInt>> = (0..fs.generator_count())
        .map(|g| {
            let (u, v) = fs.generator_edge(g);
            let mut acc = potential[u].clone();
            coarse.add_step(&mut acc, u, v, &one);
            for (x, y) in acc.iter_mut().zip(&potential[v]) {
                *x -= y;
            }
            acc
        })
        .collect();
    let fd = fine.group().dim();
    let mut matrix = vec![vec![BigInt::zero(); fd]; dim];
    for c in 0..fd {
        let mut col = vec![BigInt::zero(); dim];
        for (g, a) in fine.homology().basis_cycle(c) {
            for (x, y) in col.iter_mut().zip(&fundamental[*g]) {
                *x += a * y;
            }
        }
        coarse.group().reduce(&mut col);
        for (r, x) in col.into_iter().enumerate() {
            matrix[r][c] = x;
        }
    }
    Ok(H1Map { domain: fine.group().clone(), codomain: coarse.group().clone(), matrix })
}
