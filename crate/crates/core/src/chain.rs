//! Chains, insert/delete moves, replayable homotopy certificates and the
//! three-valued homotopy deciders.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use alloc::format;

use hashbrown::HashMap;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::entourage::Entourage;
use crate::error::{Error, Result};
use crate::homology::{validate_walk, Scale};
use crate::space::FiniteSpace;

/// A nonempty point sequence. Validity is relative to an entourage and is
/// checked by the constructors that take one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chain {
    seq: Vec<usize>,
}

impl Chain {
    pub fn new(e: &Entourage, seq: Vec<usize>) -> Result<Self> {
        validate_walk(e, &seq)?;
        Ok(Chain { seq })
    }

    pub fn constant(x: usize) -> Self {
        Chain { seq: vec![x] }
    }

    pub(crate) fn from_vec(seq: Vec<usize>) -> Self {
        debug_assert!(!seq.is_empty());
        Chain { seq }
    }

    pub fn seq(&self) -> &[usize] {
        &self.seq
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> usize {
        self.seq[0]
    }

    pub fn last(&self) -> usize {
        self.seq[self.seq.len() - 1]
    }

    pub fn is_closed(&self) -> bool {
        self.first() == self.last()
    }

    pub fn is_valid_at(&self, e: &Entourage) -> bool {
        validate_walk(e, &self.seq).is_ok()
    }

    /// `self * other`; the shared endpoint appears once.
    pub fn concat(&self, other: &Chain) -> Result<Chain> {
        if self.last() != other.first() {
            return Err(Error::EndpointMismatch);
        }
        let mut seq = self.seq.clone();
        seq.extend_from_slice(&other.seq[1..]);
        Ok(Chain { seq })
    }

    pub fn reverse(&self) -> Chain {
        let mut seq = self.seq.clone();
        seq.reverse();
        Chain { seq }
    }

    /// Collapses runs of equal consecutive points.
    pub fn canonical(&self) -> Chain {
        let mut seq = self.seq.clone();
        seq.dedup();
        Chain { seq }
    }
}

/// Checks a sequence against a space and an entourage on it.
pub fn validate_chain(space: &FiniteSpace, e: &Entourage, seq: Vec<usize>) -> Result<Chain> {
    if space.len() != e.n() {
        return Err(Error::CarrierMismatch { expected: space.len(), found: e.n() });
    }
    Chain::new(e, seq)
}

/// An elementary homotopy. Positions index the chain before the move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Move {
    Insert { pos: usize, vertex: usize },
    Delete { pos: usize },
}

impl Move {
    /// The move undoing `self` when applied to `before`.
    pub fn inverse(&self, before: &[usize]) -> Move {
        match *self {
            Move::Insert { pos, .. } => Move::Delete { pos },
            Move::Delete { pos } => Move::Insert { pos, vertex: before[pos] },
        }
    }

    fn apply_unchecked(&self, seq: &mut Vec<usize>) {
        match *self {
            Move::Insert { pos, vertex } => seq.insert(pos, vertex),
            Move::Delete { pos } => {
                seq.remove(pos);
            }
        }
    }
}

/// Applies `m` in place after checking it.
///
/// Besides interior moves, a point may be doubled (`[x] -> [x, x]`) or a
/// doubled point halved (`[x, x] -> [x]`); no other move touches an endpoint.
pub fn apply_move_in_place(e: &Entourage, seq: &mut Vec<usize>, m: Move) -> Result<()> {
    let len = seq.len();
    match m {
        Move::Insert { pos, vertex } => {
            if vertex >= e.n() {
                return Err(Error::IndexOutOfRange { index: vertex, len: e.n() });
            }
            if len == 1 && pos == 1 && vertex == seq[0] {
                seq.push(vertex);
                return Ok(());
            }
            if pos == 0 || pos >= len {
                return Err(Error::IllegalMove(format!("insert at {pos} would move an endpoint of a chain of length {len}")));
            }
            let (p, q) = (seq[pos - 1], seq[pos]);
            if !(e.contains(p, vertex) && e.contains(vertex, q) && e.contains(p, q)) {
                return Err(Error::IllegalMove(format!("{{{p}, {vertex}, {q}}} is not a simplex")));
            }
        }
        Move::Delete { pos } => {
            if len == 2 && pos == 1 && seq[0] == seq[1] {
                seq.pop();
                return Ok(());
            }
            if pos == 0 || pos + 1 >= len {
                return Err(Error::IllegalMove(format!("delete at {pos} would move an endpoint of a chain of length {len}")));
            }
            let (p, q) = (seq[pos - 1], seq[pos + 1]);
            if !e.contains(p, q) {
                return Err(Error::IllegalMove(format!("({p}, {q}) not related after deleting position {pos}")));
            }
        }
    }
    m.apply_unchecked(seq);
    Ok(())
}

pub fn apply_move(e: &Entourage, c: &Chain, m: Move) -> Result<Chain> {
    validate_walk(e, &c.seq)?;
    let mut seq = c.seq.clone();
    apply_move_in_place(e, &mut seq, m)?;
    Ok(Chain { seq })
}

/// A move sequence transforming `start` into `end` at `entourage`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomotopyCertificate {
    pub entourage: Entourage,
    pub start: Chain,
    pub end: Chain,
    pub moves: Vec<Move>,
}

impl HomotopyCertificate {
    /// Re-checks every move; returns the final chain.
    pub fn replay(&self) -> Result<Chain> {
        validate_walk(&self.entourage, &self.start.seq)?;
        let mut seq = self.start.seq.clone();
        for (k, &m) in self.moves.iter().enumerate() {
            apply_move_in_place(&self.entourage, &mut seq, m)
                .map_err(|err| Error::IllegalMove(format!("move {k}: {err}")))?;
        }
        if seq != self.end.seq {
            return Err(Error::IllegalMove(String::from("replay does not end at the claimed chain")));
        }
        Ok(Chain { seq })
    }

    pub fn reversed(&self) -> HomotopyCertificate {
        HomotopyCertificate {
            entourage: self.entourage.clone(),
            start: self.end.clone(),
            end: self.start.clone(),
            moves: invert_moves(&self.start.seq, &self.moves),
        }
    }
}

impl HomotopyCertificate {
    /// `self` followed by `next`; the end of `self` must be the start of `next`.
    pub fn then(&self, next: &HomotopyCertificate) -> Result<HomotopyCertificate> {
        if self.end != next.start || self.entourage != next.entourage {
            return Err(Error::Precondition(String::from("certificates do not compose")));
        }
        let mut moves = self.moves.clone();
        moves.extend_from_slice(&next.moves);
        Ok(HomotopyCertificate { entourage: self.entourage.clone(), start: self.start.clone(), end: next.end.clone(), moves })
    }

    /// Cancels backtracks `p, q, p` and repeated points of a chain valid
    /// at `e`. The result is the reduced chain; reduced chains are unique
    /// within a class of backtrack cancellations.
    pub fn free_reduction(e: &Entourage, c: &Chain) -> Result<HomotopyCertificate> {
        validate_walk(e, &c.seq)?;
        let (mut moves, mut s) = collapse_moves(&c.seq);
        while let Some(pos) = (1..s.len().saturating_sub(1)).find(|&i| s[i - 1] == s[i + 1]) {
            let mut buf = Vec::new();
            let mut t = s.clone();
            Move::Delete { pos }.apply_unchecked(&mut t);
            buf.push(Move::Delete { pos });
            let (more, reduced) = collapse_moves(&t);
            buf.extend(more);
            moves.extend(buf);
            s = reduced;
        }
        let cert = HomotopyCertificate { entourage: e.clone(), start: c.clone(), end: Chain { seq: s }, moves };
        cert.replay()?;
        Ok(cert)
    }
}

/// Moves undoing `moves` (applied from `start`), in order.
fn invert_moves(start: &[usize], moves: &[Move]) -> Vec<Move> {
    let mut seq = start.to_vec();
    let mut inv = Vec::with_capacity(moves.len());
    for m in moves {
        inv.push(m.inverse(&seq));
        m.apply_unchecked(&mut seq);
    }
    inv.reverse();
    inv
}

/// Shortens a collapsed chain by coning: a window `s[i..=j]` whose points
/// share a common neighbour `z` is replaced by `s[i], z, s[j]`, and a point
/// whose neighbours are related is deleted. Returns legal moves and the
/// collapsed result.
fn cone_moves(e: &Entourage, seq: &[usize]) -> (Vec<Move>, Vec<usize>) {
    let n = e.n();
    let (mut moves, mut s) = collapse_moves(seq);
    let mut common = vec![false; n];
    'outer: loop {
        for i in 0..s.len().saturating_sub(2) {
            // longest window from i with a common neighbour
            common.iter_mut().for_each(|c| *c = false);
            for z in e.neighbors(s[i]) {
                common[z] = true;
            }
            let mut j = i;
            let mut hub = None;
            while j + 1 < s.len() {
                let next: Vec<usize> = e.neighbors(s[j + 1]).filter(|&z| common[z]).collect();
                if next.is_empty() {
                    break;
                }
                common.iter_mut().for_each(|c| *c = false);
                for &z in &next {
                    common[z] = true;
                }
                hub = next.first().copied();
                j += 1;
            }
            let mut buf = Vec::new();
            if j >= i + 3 {
                let z = hub.expect("window has a hub");
                for t in (i..j).rev() {
                    buf.push(Move::Insert { pos: t + 1, vertex: z });
                }
                // s[i] z s[i+1] z ... z s[j]: remove the old interior points
                for k in (1..j - i).rev() {
                    buf.push(Move::Delete { pos: i + 2 * k });
                }
            } else if j == i + 2 && e.contains(s[i], s[i + 2]) {
                buf.push(Move::Delete { pos: i + 1 });
            } else {
                continue;
            }
            for m in &buf {
                m.apply_unchecked(&mut s);
            }
            moves.extend(buf);
            let (more, reduced) = collapse_moves(&s);
            moves.extend(more);
            s = reduced;
            continue 'outer;
        }
        break;
    }
    (moves, s)
}

/// Legal moves collapsing consecutive duplicates, and the collapsed chain.
fn collapse_moves(seq: &[usize]) -> (Vec<Move>, Vec<usize>) {
    let mut s = seq.to_vec();
    let mut moves = Vec::new();
    while let Some(i) = s.windows(2).position(|w| w[0] == w[1]) {
        let m = if i + 2 < s.len() {
            Move::Delete { pos: i + 1 }
        } else if i > 0 {
            Move::Delete { pos: i }
        } else {
            Move::Delete { pos: 1 }
        };
        m.apply_unchecked(&mut s);
        moves.push(m);
    }
    (moves, s)
}

/// Search limits. `max_len` defaults to four times the point count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_states: usize,
    pub max_len: Option<usize>,
    /// Max-norm bound on class vectors in joinability searches.
    pub class_norm: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_states: 50_000, max_len: None, class_norm: 8 }
    }
}

impl Budget {
    pub fn max_len_for(&self, n: usize) -> usize {
        self.max_len.unwrap_or(4 * n).max(1)
    }
}

/// A sound reason for a negative verdict; each variant can be re-checked
/// from its fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    /// `closed_loop` has this nonzero class in H1 of the scale. Complete only
    /// when H1 captures the fundamental group; see `abelian_complete`.
    Homology {
        closed_loop: Vec<usize>,
        #[serde(with = "crate::bigint_serde::vec")]
        class: Vec<BigInt>,
    },
    /// The endpoints `(x, y)` are not related at the scale in question.
    EndpointsUnrelated { x: usize, y: usize },
    /// `y` cannot be reached from `x` by chains at the fine scale.
    Unreachable { x: usize, y: usize },
    /// No fine chain from `x` to `y` has the class needed for shortness:
    /// `required` is not in `offset + lattice`, where `lattice` is spanned by
    /// the listed fine loops.
    ClassUnattainable {
        x: usize,
        y: usize,
        #[serde(with = "crate::bigint_serde::vec")]
        required: Vec<BigInt>,
        #[serde(with = "crate::bigint_serde::vec")]
        offset: Vec<BigInt>,
        #[serde(with = "crate::bigint_serde::matrix")]
        lattice: Vec<Vec<BigInt>>,
    },
}

/// What a search spent before giving up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spent {
    pub states: usize,
    pub max_states: usize,
    pub max_len: usize,
    /// The whole move graph within `max_len` was explored.
    pub exhausted: bool,
}

/// `Yes` with a witness, `No` with an obstruction, or `Unknown`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict<T> {
    Yes { witness: T },
    No { obstruction: Obstruction },
    Unknown { spent: Spent },
}

pub type Trivalue = Verdict<HomotopyCertificate>;

impl<T> Verdict<T> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Yes { .. } => "yes",
            Verdict::No { .. } => "no",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    pub fn witness(&self) -> Option<&T> {
        match self {
            Verdict::Yes { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn obstruction(&self) -> Option<&Obstruction> {
        match self {
            Verdict::No { obstruction } => Some(obstruction),
            _ => None,
        }
    }
}

struct Node {
    state: Vec<usize>,
    parent: usize,
    moves: Vec<Move>,
}

struct Tree {
    nodes: Vec<Node>,
    index: HashMap<Vec<usize>, usize>,
    layer: Vec<usize>,
}

impl Tree {
    fn rooted(state: Vec<usize>) -> Self {
        let mut index = HashMap::new();
        index.insert(state.clone(), 0);
        Tree { nodes: vec![Node { state, parent: usize::MAX, moves: Vec::new() }], index, layer: vec![0] }
    }

    /// Moves from the root to node `k`.
    fn path(&self, mut k: usize) -> Vec<Move> {
        let mut parts = Vec::new();
        while k != 0 {
            parts.push(&self.nodes[k].moves);
            k = self.nodes[k].parent;
        }
        parts.into_iter().rev().flatten().copied().collect()
    }
}

/// Collapsed chains one elementary step from the collapsed chain `s`,
/// with the legal moves reaching each of them.
pub(crate) fn neighbors(e: &Entourage, s: &[usize], max_len: usize, out: &mut Vec<(Vec<usize>, Vec<Move>)>) {
    out.clear();
    let len = s.len();
    for pos in 1..len.saturating_sub(1) {
        let (p, q) = (s[pos - 1], s[pos + 1]);
        if !e.contains(p, q) {
            continue;
        }
        let mut t = s.to_vec();
        t.remove(pos);
        let mut moves = vec![Move::Delete { pos }];
        if p == q {
            // t now holds p twice at pos - 1 and pos
            let m = if pos + 1 < t.len() {
                Move::Delete { pos }
            } else if pos > 1 {
                Move::Delete { pos: pos - 1 }
            } else {
                Move::Delete { pos: 1 }
            };
            m.apply_unchecked(&mut t);
            moves.push(m);
        }
        out.push((t, moves));
    }
    if len == 1 {
        if 3 <= max_len {
            let x = s[0];
            for v in e.neighbors(x).filter(|&v| v != x) {
                out.push((vec![x, v, x], vec![Move::Insert { pos: 1, vertex: x }, Move::Insert { pos: 1, vertex: v }]));
            }
        }
        return;
    }
    if len < max_len {
        for pos in 1..len {
            let (p, q) = (s[pos - 1], s[pos]);
            for v in e.neighbors(p).filter(|&v| v != p && v != q && e.contains(v, q)) {
                let mut t = s.to_vec();
                t.insert(pos, v);
                out.push((t, vec![Move::Insert { pos, vertex: v }]));
            }
        }
    }
}

/// Decides whether `c` and `d` are homotopic rel endpoints in the Rips
/// complex of `scale`.
pub fn decide_homotopic(scale: &Scale, c: &Chain, d: &Chain, budget: &Budget) -> Result<Trivalue> {
    let e = scale.entourage();
    validate_walk(e, &c.seq)?;
    validate_walk(e, &d.seq)?;
    if c.first() != d.first() || c.last() != d.last() {
        return Err(Error::EndpointMismatch);
    }
    let loop_chain = c.concat(&d.reverse())?;
    let class = scale.walk_class(loop_chain.seq());
    if class.iter().any(|x| !x.is_zero()) {
        return Ok(Verdict::No { obstruction: Obstruction::Homology { closed_loop: loop_chain.seq, class } });
    }

    let (collapse_c, canon_c) = cone_moves(e, &c.seq);
    let (collapse_d, canon_d) = cone_moves(e, &d.seq);
    let max_len = budget.max_len_for(e.n());
    // search from the smaller root so swapping c and d runs the same search
    let swapped = canon_d < canon_c;
    let (root_a, root_b) = if swapped { (canon_d.clone(), canon_c.clone()) } else { (canon_c.clone(), canon_d.clone()) };
    let meeting = bidirectional(e, root_a, root_b, max_len, budget.max_states);
    let (path_a, path_b) = match meeting {
        Ok(paths) => paths,
        Err(spent) => return Ok(Verdict::Unknown { spent }),
    };
    let (path_c, path_d) = if swapped { (path_b, path_a) } else { (path_a, path_b) };

    let mut moves = collapse_c;
    moves.extend(path_c);
    moves.extend(invert_moves(&canon_d, &path_d));
    moves.extend(invert_moves(&d.seq, &collapse_d));
    let cert = HomotopyCertificate { entourage: e.clone(), start: c.clone(), end: d.clone(), moves };
    cert.replay()?;
    Ok(Verdict::Yes { witness: cert })
}

/// Bidirectional BFS between two collapsed chains. On success returns the
/// move paths from each root to a common chain.
fn bidirectional(
    e: &Entourage,
    root_a: Vec<usize>,
    root_b: Vec<usize>,
    max_len: usize,
    max_states: usize,
) -> core::result::Result<(Vec<Move>, Vec<Move>), Spent> {
    if root_a == root_b {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut trees = [Tree::rooted(root_a), Tree::rooted(root_b)];
    let mut expanded = 0;
    let mut buf = Vec::new();
    loop {
        let side = match (trees[0].layer.is_empty(), trees[1].layer.is_empty()) {
            (true, true) => return Err(Spent { states: expanded, max_states, max_len, exhausted: true }),
            (false, true) => 0,
            (true, false) => 1,
            (false, false) => usize::from(trees[1].layer.len() < trees[0].layer.len()),
        };
        let [ref mut first, ref mut second] = trees;
        let (this, other) = if side == 0 { (first, &*second) } else { (second, &*first) };
        let layer = core::mem::take(&mut this.layer);
        let mut next = Vec::new();
        for k in layer {
            if expanded >= max_states {
                return Err(Spent { states: expanded, max_states, max_len, exhausted: false });
            }
            expanded += 1;
            let state = this.nodes[k].state.clone();
            neighbors(e, &state, max_len, &mut buf);
            for (t, moves) in buf.drain(..) {
                if this.index.contains_key(&t) {
                    continue;
                }
                let id = this.nodes.len();
                let hit = other.index.get(&t).copied();
                this.index.insert(t.clone(), id);
                this.nodes.push(Node { state: t, parent: k, moves });
                if let Some(o) = hit {
                    let here = this.path(id);
                    let there = other.path(o);
                    return Ok(if side == 0 { (here, there) } else { (there, here) });
                }
                next.push(id);
            }
        }
        this.layer = next;
    }
}

/// Endpoint-relaxed homotopy: `c` against `e(x_c, x_d) * d * e(y_d, y_c)`.
pub fn e_homotopic(scale: &Scale, c: &Chain, d: &Chain, budget: &Budget) -> Result<Trivalue> {
    let e = scale.entourage();
    validate_walk(e, &c.seq)?;
    validate_walk(e, &d.seq)?;
    for (x, y) in [(c.first(), d.first()), (d.last(), c.last())] {
        if !e.contains(x, y) {
            return Ok(Verdict::No { obstruction: Obstruction::EndpointsUnrelated { x, y } });
        }
    }
    let mut seq = Vec::with_capacity(d.len() + 2);
    seq.push(c.first());
    seq.extend_from_slice(&d.seq);
    seq.push(c.last());
    decide_homotopic(scale, c, &Chain { seq }, budget)
}

/// `c` is short at the scale: its endpoints are related and it is
/// homotopic to the edge between them.
pub fn is_short(scale: &Scale, c: &Chain, budget: &Budget) -> Result<Trivalue> {
    let e = scale.entourage();
    validate_walk(e, &c.seq)?;
    let (x, y) = (c.first(), c.last());
    if !e.contains(x, y) {
        return Ok(Verdict::No { obstruction: Obstruction::EndpointsUnrelated { x, y } });
    }
    let edge = if x == y { Chain::constant(x) } else { Chain { seq: vec![x, y] } };
    decide_homotopic(scale, c, &edge, budget)
}

/// For pointwise `E`-close chains `c`, `d` with common endpoints, the
/// interleaving `x0, y0, x1, y1, ..., xk` gives a homotopy at `E^2`.
pub fn close_chains_certificate(e: &Entourage, c: &Chain, d: &Chain) -> Result<HomotopyCertificate> {
    validate_walk(e, &c.seq)?;
    validate_walk(e, &d.seq)?;
    if c.len() != d.len() {
        return Err(Error::Precondition(format!("chain lengths differ: {} vs {}", c.len(), d.len())));
    }
    if c.first() != d.first() || c.last() != d.last() {
        return Err(Error::EndpointMismatch);
    }
    if let Some(i) = (0..c.len()).find(|&i| !e.contains(c.seq[i], d.seq[i])) {
        return Err(Error::Precondition(format!("points at position {i} are not close")));
    }
    let e2 = e.square();
    let mut moves = Vec::new();
    if c != d {
        let k = c.len() - 1;
        for i in 0..k {
            moves.push(Move::Insert { pos: 2 * i + 1, vertex: d.seq[i] });
        }
        for i in (1..k).rev() {
            moves.push(Move::Delete { pos: 2 * i });
        }
        moves.push(Move::Delete { pos: 1 });
    }
    let cert = HomotopyCertificate { entourage: e2, start: c.clone(), end: d.clone(), moves };
    cert.replay()?;
    Ok(cert)
}
