//! Integer lattices in Hermite normal form; subgroups of finitely
//! generated abelian groups are lattices containing the relation lattice.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// A sublattice of `Z^dim`, stored as its row-style Hermite normal form:
/// pivot columns strictly increase, pivots are positive, and entries above
/// a pivot are reduced into `[0, pivot)`. The form is canonical, so two
/// lattices are equal iff their bases are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn zero(dim: usize) -> Self {
        Lattice { dim, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn from_generators(dim: usize, gens: impl IntoIterator<Item = Vec<BigInt>>) -> Self {
        let mut rows: Vec<Vec<BigInt>> = gens.into_iter().filter(|g| g.iter().any(|x| !x.is_zero())).collect();
        debug_assert!(rows.iter().all(|r| r.len() == dim));
        let mut basis = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..dim {
            // gcd-reduce the column among the remaining rows
            loop {
                let mut nonzero: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
                if nonzero.len() <= 1 {
                    break;
                }
                nonzero.sort_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
                let p = nonzero[0];
                for &i in &nonzero[1..] {
                    let q = rows[i][col].div_floor(&rows[p][col]);
                    let prow = rows[p].clone();
                    for (x, y) in rows[i].iter_mut().zip(&prow) {
                        *x -= &q * y;
                    }
                }
            }
            if let Some(i) = (0..rows.len()).find(|&i| !rows[i][col].is_zero()) {
                let mut row = rows.swap_remove(i);
                if row[col].is_negative() {
                    row.iter_mut().for_each(|x| *x = -&*x);
                }
                basis.push(row);
                pivots.push(col);
            }
            rows.retain(|r| r.iter().any(|x| !x.is_zero()));
        }
        let mut lat = Lattice { dim, basis, pivots };
        lat.reduce_above();
        lat
    }

    fn reduce_above(&mut self) {
        for k in 0..self.basis.len() {
            let col = self.pivots[k];
            let piv = self.basis[k][col].clone();
            let pivot_row = self.basis[k].clone();
            for i in 0..k {
                let q = self.basis[i][col].div_floor(&piv);
                if !q.is_zero() {
                    for (x, y) in self.basis[i].iter_mut().zip(&pivot_row) {
                        *x -= &q * y;
                    }
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        let mut v: Vec<BigInt> = v.to_vec();
        for (row, &col) in self.basis.iter().zip(&self.pivots) {
            if v[col].is_zero() {
                continue;
            }
            let (q, r) = v[col].div_rem(&row[col]);
            if !r.is_zero() {
                return false;
            }
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
        v.iter().all(Zero::is_zero)
    }

    pub fn is_subset(&self, other: &Lattice) -> bool {
        self.dim == other.dim && self.basis.iter().all(|b| other.contains(b))
    }

    pub fn join(&self, other: &Lattice) -> Lattice {
        Lattice::from_generators(self.dim, self.basis.iter().chain(&other.basis).cloned())
    }
}
