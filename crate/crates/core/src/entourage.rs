//! Bit-matrix relations on `{0..n}` and the entourage algebra built on them.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

/// An arbitrary binary relation on `{0..n}`, stored row-major as bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(WORD).max(1);
        Relation { n, words, bits: vec![0; words * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = Relation::empty(n);
        for i in 0..n {
            r.insert(i, i);
        }
        r
    }

    pub fn complete(n: usize) -> Self {
        let mut r = Relation::empty(n);
        for i in 0..n {
            for j in 0..n {
                r.insert(i, j);
            }
        }
        r
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut r = Relation::empty(n);
        for i in 0..n {
            for j in 0..n {
                if f(i, j) {
                    r.insert(i, j);
                }
            }
        }
        r
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n);
        self.bits[i * self.words + j / WORD] >> (j % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / WORD] |= 1 << (j % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / WORD] &= !(1 << (j % WORD));
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Points related to `i`, ascending.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            core::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let tz = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * WORD + tz)
            })
        })
    }

    fn check_carrier(&self, other: &Relation) -> Result<()> {
        if self.n != other.n {
            return Err(Error::CarrierMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// `(i, k)` related iff there is `j` with `self(i, j)` and `other(j, k)`.
    pub fn compose(&self, other: &Relation) -> Result<Relation> {
        self.check_carrier(other)?;
        let mut out = Relation::empty(self.n);
        for i in 0..self.n {
            for j in self.successors(i) {
                let src = j * self.words;
                let dst = i * self.words;
                for w in 0..self.words {
                    out.bits[dst + w] |= other.bits[src + w];
                }
            }
        }
        Ok(out)
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.check_carrier(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        Ok(Relation { n: self.n, words: self.words, bits })
    }

    pub fn intersection(&self, other: &Relation) -> Result<Relation> {
        self.check_carrier(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect();
        Ok(Relation { n: self.n, words: self.words, bits })
    }

    pub fn transpose(&self) -> Relation {
        let mut out = Relation::empty(self.n);
        for i in 0..self.n {
            for j in self.successors(i) {
                out.insert(j, i);
            }
        }
        out
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|i| self.contains(i, i))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.successors(i).all(|j| self.contains(j, i)))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.n {
            for j in self.successors(i) {
                list.entry(&(i, j));
            }
        }
        list.finish()
    }
}

/// A reflexive, symmetric relation on the points of a finite space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Entourage(Relation);

impl Entourage {
    pub fn identity(n: usize) -> Self {
        Entourage(Relation::identity(n))
    }

    pub fn complete(n: usize) -> Self {
        Entourage(Relation::complete(n))
    }

    /// Symmetric closure of `pairs` plus the diagonal.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut r = Relation::identity(n);
        for (i, j) in pairs {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, len: n });
                }
            }
            r.insert(i, j);
            r.insert(j, i);
        }
        Ok(Entourage(r))
    }

    /// `f` is queried for `i < j` only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut r = Relation::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                if f(i, j) {
                    r.insert(i, j);
                    r.insert(j, i);
                }
            }
        }
        Entourage(r)
    }

    /// Checks the entourage invariants on an arbitrary relation.
    pub fn try_from_relation(r: Relation) -> Result<Self> {
        if !r.is_reflexive() {
            return Err(Error::Precondition("relation is not reflexive".into()));
        }
        if !r.is_symmetric() {
            return Err(Error::Precondition("relation is not symmetric".into()));
        }
        Ok(Entourage(r))
    }

    /// Symmetric reflexive closure.
    pub fn closure_of(r: &Relation) -> Self {
        let mut out = r.union(&r.transpose()).expect("same carrier");
        for i in 0..out.n() {
            out.insert(i, i);
        }
        Entourage(out)
    }

    pub fn relation(&self) -> &Relation {
        &self.0
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.0.contains(i, j)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.successors(i)
    }

    /// `B(x, E)`: every `y` with `(x, y)` in the entourage. Always contains `x`.
    pub fn ball(&self, x: usize) -> Result<Vec<usize>> {
        if x >= self.n() {
            return Err(Error::IndexOutOfRange { index: x, len: self.n() });
        }
        Ok(self.0.successors(x).collect())
    }

    /// Relational composition `E ∘ F`, symmetrized. For `E = F` the
    /// composition is already symmetric and nothing is added.
    pub fn compose(&self, other: &Entourage) -> Result<Entourage> {
        let r = self.0.compose(&other.0)?;
        if r.is_symmetric() {
            Ok(Entourage(r))
        } else {
            Ok(Entourage::closure_of(&r))
        }
    }

    pub fn square(&self) -> Entourage {
        Entourage(self.0.compose(&self.0).expect("same carrier"))
    }

    pub fn power(&self, k: usize) -> Entourage {
        let mut out = Entourage::identity(self.n());
        for _ in 0..k {
            out = Entourage(out.0.compose(&self.0).expect("same carrier"));
        }
        out
    }

    pub fn intersection(&self, other: &Entourage) -> Result<Entourage> {
        Ok(Entourage(self.0.intersection(&other.0)?))
    }

    pub fn union(&self, other: &Entourage) -> Result<Entourage> {
        Ok(Entourage(self.0.union(&other.0)?))
    }

    pub fn is_subset(&self, other: &Entourage) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n()).all(|i| self.0.successors(i).all(|j| j == i))
    }

    /// Off-diagonal pairs `(i, j)` with `i < j`, lexicographic.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| self.0.successors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    pub fn pair_count(&self) -> usize {
        (self.0.len() - self.n()) / 2
    }

    /// Component label per point of the graph `(points, E-edges)`; labels are
    /// the smallest point index in each component.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut stack = Vec::new();
        for root in 0..n {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = root;
            stack.push(root);
            while let Some(v) = stack.pop() {
                for w in self.neighbors(v) {
                    if label[w] == usize::MAX {
                        label[w] = root;
                        stack.push(w);
                    }
                }
            }
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().iter().enumerate().filter(|(i, &l)| *i == l).count()
    }

    /// Whether the graph `(points, E-edges)` is connected.
    pub fn is_chain_connected(&self) -> bool {
        self.n() == 0 || self.component_count() == 1
    }

    /// Image `f(E)` under a point assignment into `target_n` points.
    pub fn image_under(&self, assign: &[usize], target_n: usize) -> Result<ImageEntourage> {
        if assign.len() != self.n() {
            return Err(Error::CarrierMismatch { expected: self.n(), found: assign.len() });
        }
        let mut rel = Relation::empty(target_n);
        let mut in_image = vec![false; target_n];
        for (i, &a) in assign.iter().enumerate() {
            if a >= target_n {
                return Err(Error::IndexOutOfRange { index: a, len: target_n });
            }
            in_image[a] = true;
            for j in self.neighbors(i) {
                rel.insert(a, assign[j]);
            }
        }
        let padded: Vec<usize> = (0..target_n).filter(|&b| !in_image[b]).collect();
        for &b in &padded {
            rel.insert(b, b);
        }
        Ok(ImageEntourage { entourage: Entourage(rel), in_image, padded })
    }

    pub(crate) fn to_pair_list(&self) -> Vec<(usize, usize)> {
        self.pairs().collect()
    }
}

impl fmt::Debug for Entourage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Entourage")
            .field("n", &self.n())
            .field("pairs", &self.to_pair_list())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct EntourageRepr {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl Serialize for Entourage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        EntourageRepr { n: self.n(), pairs: self.to_pair_list() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Entourage {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let repr = EntourageRepr::deserialize(d)?;
        Entourage::from_pairs(repr.n, repr.pairs).map_err(serde::de::Error::custom)
    }
}

/// `f(E)` together with the true image of `f`. Target points outside the
/// image get only their diagonal pair so the result is a legal entourage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageEntourage {
    pub entourage: Entourage,
    pub in_image: Vec<bool>,
    /// Target points whose diagonal pair was added without a preimage.
    pub padded: Vec<usize>,
}
