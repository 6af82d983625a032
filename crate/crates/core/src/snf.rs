//! Smith normal form over the integers with the column transform tracked.
//!
//! Only column operations are recorded: for a relation matrix `A` whose rows
//! span the relations of `Z^s / rowspace(A)`, the transform `V` gives new
//! coordinates `y = x V` in which the relations become `d_i e_i`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// Nonzero invariant factors, positive, each dividing the next.
    pub invariants: Vec<BigInt>,
    /// Column transform `V` (`s x s`), unimodular.
    pub v: Vec<Vec<BigInt>>,
    /// `V^-1`. Row `j` expresses new basis vector `j` in old coordinates.
    pub v_inv: Vec<Vec<BigInt>>,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

struct Work {
    a: Vec<Vec<BigInt>>,
    v: Vec<Vec<BigInt>>,
    v_inv: Vec<Vec<BigInt>>,
}

impl Work {
    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(i, j);
        }
        self.v_inv.swap(i, j);
    }

    /// `col_j -= q * col_i`.
    fn sub_col(&mut self, j: usize, i: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            if !row[i].is_zero() {
                let t = &row[i] * q;
                row[j] -= t;
            }
        }
        // V^-1 gets the inverse row operation: row_i += q * row_j
        let (ri, rj) = pick_two(&mut self.v_inv, i, j);
        for (x, y) in ri.iter_mut().zip(rj.iter()) {
            if !y.is_zero() {
                *x += q * y;
            }
        }
    }

    /// `row_k -= q * row_t`; rows are not tracked.
    fn sub_row(&mut self, k: usize, t: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        let (rk, rt) = pick_two(&mut self.a, k, t);
        for (x, y) in rk.iter_mut().zip(rt.iter()) {
            if !y.is_zero() {
                *x -= q * y;
            }
        }
    }
}

fn pick_two<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (lo, hi) = v.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}

/// Smith normal form of an `m x cols` integer matrix given by rows.
pub fn smith(rows: Vec<Vec<BigInt>>, cols: usize) -> SmithForm {
    let m = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == cols));
    let mut w = Work { a: rows, v: identity(cols), v_inv: identity(cols) };
    let mut invariants = Vec::new();
    let mut t = 0;
    while t < m.min(cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..cols {
                let x = &w.a[i][j];
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < w.a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        w.a.swap(t, pi);
        w.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if !w.a[i][t].is_zero() {
                    let q = w.a[i][t].div_floor(&w.a[t][t]);
                    w.sub_row(i, t, &q);
                    clean &= w.a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !w.a[t][j].is_zero() {
                    let q = w.a[t][j].div_floor(&w.a[t][t]);
                    w.sub_col(j, t, &q);
                    clean &= w.a[t][j].is_zero();
                }
            }
            if !clean {
                // a remainder smaller than the pivot survived; move it in
                let mut best = (t, t);
                for i in t + 1..m {
                    if !w.a[i][t].is_zero() && w.a[i][t].abs() < w.a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !w.a[t][j].is_zero() && w.a[t][j].abs() < w.a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                w.a.swap(t, best.0);
                w.swap_cols(t, best.1);
                continue;
            }
            // the pivot must divide the whole trailing block
            let p = w.a[t][t].clone();
            let bad = (t + 1..m).find(|&i| (t + 1..cols).any(|j| !w.a[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    w.sub_row(t, i, &minus_one);
                }
                None => break,
            }
        }
        invariants.push(w.a[t][t].abs());
        t += 1;
    }
    SmithForm { invariants, v: w.v, v_inv: w.v_inv }
}

/// Multiplies a row vector by a square matrix.
pub fn row_times(x: &[BigInt], m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![BigInt::zero(); cols];
    for (xi, row) in x.iter().zip(m) {
        if xi.is_zero() {
            continue;
        }
        for (o, r) in out.iter_mut().zip(row) {
            if !r.is_zero() {
                *o += xi * r;
            }
        }
    }
    out
}
