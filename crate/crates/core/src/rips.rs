//! Rips 2-skeleta and their edge-path presentations.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use crate::entourage::Entourage;
use crate::error::{Error, Result};
use crate::space::FiniteSpace;

/// Edges, triangles and a BFS spanning forest of the clique complex of an
/// entourage. Edges and triangles are sorted lexicographically.
#[derive(Clone, Debug)]
pub struct RipsSkeleton {
    entourage: Entourage,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    triangles: Vec<[usize; 3]>,
    parent: Vec<Option<usize>>,
    /// Vertices in BFS order; every parent precedes its children.
    order: Vec<usize>,
    root: Vec<usize>,
    /// `generator[e]` is the generator index of edge `e`, if not a forest edge.
    generator: Vec<Option<usize>>,
    generators: Vec<usize>,
}

/// One generator per non-forest edge and one relator per triangle. A letter
/// `(g, s)` is generator `g` raised to `s = ±1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub basepoint: usize,
    pub generators: Vec<(usize, usize)>,
    pub relators: Vec<Vec<(usize, i8)>>,
}

impl RipsSkeleton {
    pub fn build(space: &FiniteSpace, e: &Entourage) -> Result<Self> {
        if space.len() != e.n() {
            return Err(Error::CarrierMismatch { expected: space.len(), found: e.n() });
        }
        Ok(Self::from_entourage(e))
    }

    pub fn from_entourage(e: &Entourage) -> Self {
        let n = e.n();
        let edges: Vec<(usize, usize)> = e.pairs().collect();
        let edge_index: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let mut triangles = Vec::new();
        for &(i, j) in &edges {
            for k in e.neighbors(j).filter(|&k| k > j) {
                if e.contains(i, k) {
                    triangles.push([i, j, k]);
                }
            }
        }

        let mut parent = vec![None; n];
        let mut root = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut forest = vec![false; edges.len()];
        let mut queue = VecDeque::new();
        for r in 0..n {
            if root[r] != usize::MAX {
                continue;
            }
            root[r] = r;
            queue.push_back(r);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for v in e.neighbors(u) {
                    if root[v] == usize::MAX {
                        root[v] = r;
                        parent[v] = Some(u);
                        forest[edge_index[&(u.min(v), u.max(v))]] = true;
                        queue.push_back(v);
                    }
                }
            }
        }

        let mut generator = vec![None; edges.len()];
        let mut generators = Vec::new();
        for (k, &is_forest) in forest.iter().enumerate() {
            if !is_forest {
                generator[k] = Some(generators.len());
                generators.push(k);
            }
        }
        RipsSkeleton { entourage: e.clone(), edges, edge_index, triangles, parent, order, root, generator, generators }
    }

    pub fn entourage(&self) -> &Entourage {
        &self.entourage
    }

    pub fn n(&self) -> usize {
        self.entourage.n()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn parent(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Root of the forest component containing `v` (its lowest index).
    pub fn root(&self, v: usize) -> usize {
        self.root[v]
    }

    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    pub fn component_count(&self) -> usize {
        (0..self.n()).filter(|&v| self.root[v] == v).count()
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// Endpoints of generator `g`.
    pub fn generator_edge(&self, g: usize) -> (usize, usize) {
        self.edges[self.generators[g]]
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    /// Signed generator traversed by the step `u -> v`, if any.
    /// Forest edges and stationary steps contribute nothing.
    pub fn step_letter(&self, u: usize, v: usize) -> Option<(usize, i8)> {
        if u == v {
            return None;
        }
        let g = self.generator[self.edge_id(u, v)?]?;
        Some((g, if u < v { 1 } else { -1 }))
    }

    /// Path from the component root down the forest to `v`.
    pub fn tree_path(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// The loop `root -> u -> v -> root` closing generator `g` through the forest.
    pub fn fundamental_loop(&self, g: usize) -> Vec<usize> {
        let (u, v) = self.generator_edge(g);
        let mut walk = self.tree_path(u);
        let mut back = self.tree_path(v);
        back.reverse();
        walk.extend(back);
        walk
    }

    /// Sound but incomplete test that every component's edge-path group is
    /// cyclic: relators that shrink to one or two letters kill or identify
    /// generators until nothing changes.
    pub fn has_cyclic_fundamental_group(&self) -> bool {
        let m = self.generator_count();
        let mut uf = SignedUnionFind::new(m);
        let relators: Vec<Vec<(usize, i8)>> = self
            .triangles
            .iter()
            .map(|&[i, j, k]| [(i, j), (j, k), (k, i)].iter().filter_map(|&(u, v)| self.step_letter(u, v)).collect())
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for r in &relators {
                let mut word: Vec<(usize, i8)> = Vec::with_capacity(3);
                for &(g, s) in r {
                    let (root, t) = uf.find(g);
                    if uf.killed[root] {
                        continue;
                    }
                    let letter = (root, s * t);
                    if word.last().is_some_and(|&(h, u)| h == letter.0 && u == -letter.1) {
                        word.pop();
                    } else {
                        word.push(letter);
                    }
                }
                while word.len() >= 2 && word[0].0 == word[word.len() - 1].0 && word[0].1 == -word[word.len() - 1].1 {
                    word.pop();
                    word.remove(0);
                }
                changed |= match word.as_slice() {
                    [(g, _)] => uf.kill(*g),
                    // g^s h^t = 1 gives g = h^(-t/s)
                    [(g, s), (h, t)] if g != h => uf.union(*g, *h, -s * t),
                    _ => false,
                };
            }
        }
        let mut alive = vec![0usize; self.n()];
        for g in 0..m {
            let (root, _) = uf.find(g);
            if root == g && !uf.killed[g] {
                let c = self.root[self.generator_edge(g).0];
                alive[c] += 1;
                if alive[c] > 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn presentation(&self, basepoint: usize) -> Result<Presentation> {
        if basepoint >= self.n() {
            return Err(Error::IndexOutOfRange { index: basepoint, len: self.n() });
        }
        let relators = self
            .triangles
            .iter()
            .map(|&[i, j, k]| [(i, j), (j, k), (k, i)].iter().filter_map(|&(u, v)| self.step_letter(u, v)).collect())
            .collect();
        let generators = self.generators.iter().map(|&k| self.edges[k]).collect();
        Ok(Presentation { basepoint, generators, relators })
    }
}

/// Union-find over generators where each node stores its sign relative to
/// its parent: `g = parent^sign`.
struct SignedUnionFind {
    parent: Vec<usize>,
    sign: Vec<i8>,
    killed: Vec<bool>,
}

impl SignedUnionFind {
    fn new(m: usize) -> Self {
        SignedUnionFind { parent: (0..m).collect(), sign: vec![1; m], killed: vec![false; m] }
    }

    fn find(&mut self, g: usize) -> (usize, i8) {
        let p = self.parent[g];
        if p == g {
            return (g, 1);
        }
        let (root, s) = self.find(p);
        self.parent[g] = root;
        self.sign[g] *= s;
        (root, self.sign[g])
    }

    fn kill(&mut self, g: usize) -> bool {
        let (root, _) = self.find(g);
        !core::mem::replace(&mut self.killed[root], true)
    }

    /// Records `g = h^sign`.
    fn union(&mut self, g: usize, h: usize, sign: i8) -> bool {
        let (rg, sg) = self.find(g);
        let (rh, sh) = self.find(h);
        if rg == rh {
            return false;
        }
        // rg^sg = rh^(sh*sign)
        self.parent[rg] = rh;
        self.sign[rg] = sg * sh * sign;
        self.killed[rh] |= self.killed[rg];
        true
    }
}
