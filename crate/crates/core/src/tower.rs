//! Homology towers along a ladder, Mittag-Leffler and triviality
//! diagnostics, joinability witnesses and the `G(E)` entourage.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chain::{is_short, Budget, Chain, HomotopyCertificate, Obstruction, Spent, Verdict};
use crate::entourage::Entourage;
use crate::error::{Error, Result};
use crate::homology::{inclusion_h1_map, AbelianGroup, H1Map, Scale};
use crate::lattice::Lattice;

/// Runs independent jobs `0..n`; results are returned in index order.
pub trait Runner: Sync {
    fn run<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T>;
}

/// Runs jobs one after another.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Runner for Sequential {
    fn run<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T> {
        (0..n).map(f).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSummary {
    pub index: usize,
    pub threshold: Option<f64>,
    pub edges: usize,
    pub triangles: usize,
    pub components: usize,
    pub generators: usize,
    pub group: AbelianGroup,
}

/// `H1(fine) -> H1(coarse)` for adjacent ladder scales.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bonding {
    pub fine: usize,
    pub coarse: usize,
    pub map: H1Map,
    /// Smith invariants of the bonding matrix.
    #[serde(with = "crate::bigint_serde::vec")]
    pub smith: Vec<BigInt>,
}

/// The image of `H1(source) -> H1(target)` as a lattice in the target's
/// coordinates, containing the target's relation lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageLattice {
    pub target: usize,
    pub source: usize,
    #[serde(with = "crate::bigint_serde::matrix")]
    pub basis: Vec<Vec<BigInt>>,
    /// The image is the zero subgroup.
    pub zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum MlFinding {
    /// Images into the scale are constant from `b` to the finest scale.
    /// `vacuous` when `b` is the finest scale and nothing finer was observed.
    StabilizedAt { b: usize, vacuous: bool, caveat: String },
    /// The image still shrinks at the last observed step.
    NotStabilizedWithinLadder { last_drop: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum TrivialityFinding {
    TrivialAt { b: usize },
    NotWithinLadder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerReport {
    pub basepoint: usize,
    pub scales: Vec<ScaleSummary>,
    pub bondings: Vec<Bonding>,
    pub images: Vec<ImageLattice>,
    pub ml: Vec<MlFinding>,
    pub trivial: Vec<TrivialityFinding>,
    pub caveat: String,
}

impl TowerReport {
    pub fn image(&self, target: usize, source: usize) -> Option<&ImageLattice> {
        self.images.iter().find(|im| im.target == target && im.source == source)
    }
}

const FINITE_DEPTH: &str =
    "stabilization within a finite ladder is necessary but not sufficient for the condition on the full entourage filter";

/// A ladder of scales (coarsest first) with their homology.
#[derive(Clone, Debug)]
pub struct Tower {
    pub scales: Vec<Scale>,
    pub report: TowerReport,
}

impl Tower {
    pub fn from_entourages(ladder: &[Entourage], thresholds: Option<&[f64]>, basepoint: usize, runner: &impl Runner) -> Result<Tower> {
        let scales = runner.run(ladder.len(), |i| Scale::new(&ladder[i]));
        Tower::from_scales(scales, thresholds, basepoint)
    }

    pub fn from_scales(scales: Vec<Scale>, thresholds: Option<&[f64]>, basepoint: usize) -> Result<Tower> {
        let k = scales.len();
        if k < 2 {
            return Err(Error::LadderTooShort { len: k });
        }
        let n = scales[0].n();
        if basepoint >= n {
            return Err(Error::IndexOutOfRange { index: basepoint, len: n });
        }
        let ents: Vec<Entourage> = scales.iter().map(|s| s.entourage().clone()).collect();
        crate::space::check_nested(&ents)?;

        let summaries = scales
            .iter()
            .enumerate()
            .map(|(i, s)| ScaleSummary {
                index: i,
                threshold: thresholds.and_then(|t| t.get(i).copied()),
                edges: s.skeleton().edges().len(),
                triangles: s.skeleton().triangles().len(),
                components: s.skeleton().component_count(),
                generators: s.skeleton().generator_count(),
                group: s.group().clone(),
            })
            .collect();
        let mut bondings = Vec::with_capacity(k - 1);
        for i in 0..k - 1 {
            let map = inclusion_h1_map(&scales[i + 1], &scales[i])?;
            let smith = map.smith_invariants();
            bondings.push(Bonding { fine: i + 1, coarse: i, map, smith });
        }
        // maps[a][c] = H1(c) -> H1(a)
        let mut images = Vec::new();
        let mut lattices: Vec<Vec<Lattice>> = vec![Vec::new(); k];
        for a in 0..k - 1 {
            let mut m = bondings[a].map.clone();
            for c in a + 1..k {
                if c > a + 1 {
                    m = bondings[c - 1].map.then(&m)?;
                }
                let lat = m.image();
                let zero = lat == scales[a].group().relation_lattice();
                images.push(ImageLattice { target: a, source: c, basis: lat.basis().to_vec(), zero });
                lattices[a].push(lat);
            }
        }
        let mut report = TowerReport {
            basepoint,
            scales: summaries,
            bondings,
            images,
            ml: Vec::new(),
            trivial: Vec::new(),
            caveat: String::from(FINITE_DEPTH),
        };
        for a in 0..k - 1 {
            report.ml.push(ml_diagnostic(&report, a)?);
            report.trivial.push(triviality_diagnostic(&report, a)?);
        }
        Ok(Tower { scales, report })
    }

    /// Direct composite map `H1(c) -> H1(a)`.
    pub fn map(&self, c: usize, a: usize) -> Result<H1Map> {
        let k = self.scales.len();
        if a >= k || c >= k || a > c {
            return Err(Error::IndexOutOfRange { index: c.max(a), len: k });
        }
        if a == c {
            return Ok(H1Map::identity(self.scales[a].group()));
        }
        let mut m = self.report.bondings[c - 1].map.clone();
        for b in (a..c - 1).rev() {
            m = m.then(&self.report.bondings[b].map)?;
        }
        Ok(m)
    }
}

fn finer_count(report: &TowerReport, a: usize) -> Result<usize> {
    let k = report.scales.len();
    if a + 1 >= k {
        return Err(Error::IndexOutOfRange { index: a, len: k.saturating_sub(1) });
    }
    Ok(k)
}

/// Smallest `b > a` whose image into `a` equals that of every finer observed
/// scale. A drop at the last step (after the first finer scale) counts as
/// not stabilized.
pub fn ml_diagnostic(report: &TowerReport, a: usize) -> Result<MlFinding> {
    let k = finer_count(report, a)?;
    let img = |c: usize| &report.image(a, c).expect("image computed for every pair").basis;
    let last = k - 1;
    if last - 1 > a && img(last - 1) != img(last) {
        return Ok(MlFinding::NotStabilizedWithinLadder { last_drop: last });
    }
    let b = (a + 1..k).find(|&b| img(b) == img(last)).unwrap_or(last);
    Ok(MlFinding::StabilizedAt { b, vacuous: b == last && last > a + 1, caveat: String::from(FINITE_DEPTH) })
}

/// Smallest `b > a` with zero image into `a`.
pub fn triviality_diagnostic(report: &TowerReport, a: usize) -> Result<TrivialityFinding> {
    let k = finer_count(report, a)?;
    Ok(match (a + 1..k).find(|&b| report.image(a, b).is_some_and(|im| im.zero)) {
        Some(b) => TrivialityFinding::TrivialAt { b },
        None => TrivialityFinding::NotWithinLadder,
    })
}

/// A fine chain from `x` to `y` with a certificate that it is short at
/// the target scale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinWitness {
    pub witness: Chain,
    pub certificate: HomotopyCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinabilityVerdict {
    pub x: usize,
    pub y: usize,
    /// The edge-path group of the target scale is provably cyclic, so
    /// homology obstructions are complete.
    pub abelian_complete: bool,
    pub verdict: Verdict<JoinWitness>,
}

fn norm_ok(v: &[BigInt], group: &AbelianGroup, bound: u64) -> bool {
    v.iter().skip(group.torsion.len()).all(|x| x.abs().to_u64().is_some_and(|m| m <= bound))
}

fn fine_walk(fine: &Scale, x: usize, y: usize) -> Vec<usize> {
    let mut walk = fine.skeleton().tree_path(x);
    walk.reverse();
    walk.extend_from_slice(&fine.skeleton().tree_path(y)[1..]);
    walk
}

/// Classes at `target` of the fundamental loops of the fine component of `x`.
fn component_loop_classes(target: &Scale, fine: &Scale, x: usize) -> Vec<Vec<BigInt>> {
    let fs = fine.skeleton();
    let root = fs.root(x);
    (0..fs.generator_count())
        .filter(|&g| fs.root(fs.generator_edge(g).0) == root)
        .map(|g| target.walk_class(&fs.fundamental_loop(g)))
        .collect()
}

/// Searches fine chains from `x` to `y` that are short at `target`.
pub fn joinability_witness(target: &Scale, fine: &Scale, x: usize, y: usize, budget: &Budget) -> Result<JoinabilityVerdict> {
    let n = target.n();
    if fine.n() != n {
        return Err(Error::CarrierMismatch { expected: n, found: fine.n() });
    }
    for p in [x, y] {
        if p >= n {
            return Err(Error::IndexOutOfRange { index: p, len: n });
        }
    }
    if !fine.entourage().is_subset(target.entourage()) {
        return Err(Error::Precondition(String::from("the fine scale must be contained in the target scale")));
    }
    let abelian_complete = target.skeleton().has_cyclic_fundamental_group();
    let verdict = join_search(target, fine, x, y, budget)?;
    Ok(JoinabilityVerdict { x, y, abelian_complete, verdict })
}

fn join_search(target: &Scale, fine: &Scale, x: usize, y: usize, budget: &Budget) -> Result<Verdict<JoinWitness>> {
    let e = target.entourage();
    if !e.contains(x, y) {
        return Ok(Verdict::No { obstruction: Obstruction::EndpointsUnrelated { x, y } });
    }
    let fs = fine.skeleton();
    if fs.root(x) != fs.root(y) {
        return Ok(Verdict::No { obstruction: Obstruction::Unreachable { x, y } });
    }
    let group = target.group();
    let dim = group.dim();
    // a fine chain c is short only if class(c * [y, x]) = 0; these classes
    // form the coset offset + lattice
    let mut closing = fine_walk(fine, x, y);
    closing.push(x);
    let offset = target.walk_class(&closing);
    let loops = component_loop_classes(target, fine, x);
    let lattice = Lattice::from_generators(dim, loops.iter().cloned()).join(&group.relation_lattice());
    if !lattice.contains(&offset) {
        return Ok(Verdict::No {
            obstruction: Obstruction::ClassUnattainable {
                x,
                y,
                required: vec![BigInt::zero(); dim],
                offset,
                lattice: loops,
            },
        });
    }

    // BFS over (point, class of the chain so far)
    let one = BigInt::one();
    let mut goal = vec![BigInt::zero(); dim];
    target.add_step(&mut goal, x, y, &one);
    group.reduce(&mut goal);
    let mut index: HashMap<(usize, Vec<BigInt>), usize> = HashMap::new();
    let mut nodes: Vec<(usize, Vec<BigInt>, usize)> = vec![(x, vec![BigInt::zero(); dim], usize::MAX)];
    index.insert((x, nodes[0].1.clone()), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut found = None;
    while let Some(k) = queue.pop_front() {
        let (p, cls, _) = nodes[k].clone();
        if p == y && cls == goal {
            found = Some(k);
            break;
        }
        if nodes.len() >= budget.max_states {
            break;
        }
        for q in fine.entourage().neighbors(p).filter(|&q| q != p) {
            let mut next = cls.clone();
            target.add_step(&mut next, p, q, &one);
            group.reduce(&mut next);
            if !norm_ok(&next, group, budget.class_norm) {
                continue;
            }
            let key = (q, next);
            if index.contains_key(&key) {
                continue;
            }
            index.insert(key.clone(), nodes.len());
            queue.push_back(nodes.len());
            nodes.push((key.0, key.1, k));
        }
    }
    let spent = |exhausted| Spent {
        states: nodes.len(),
        max_states: budget.max_states,
        max_len: budget.max_len_for(e.n()),
        exhausted,
    };
    let Some(mut k) = found else {
        let exhausted = queue.is_empty() && nodes.len() < budget.max_states;
        return Ok(Verdict::Unknown { spent: spent(exhausted) });
    };
    let mut seq = Vec::new();
    while k != usize::MAX {
        seq.push(nodes[k].0);
        k = nodes[k].2;
    }
    seq.reverse();
    let witness = Chain::new(fine.entourage(), seq)?;
    match is_short(target, &witness, budget)? {
        Verdict::Yes { witness: certificate } => Ok(Verdict::Yes { witness: JoinWitness { witness, certificate } }),
        Verdict::No { obstruction } => Ok(Verdict::No { obstruction }),
        Verdict::Unknown { spent } => Ok(Verdict::Unknown { spent }),
    }
}

/// Re-checks an obstruction produced for the pair `(x, y)` at `target`
/// with fine scale `fine`. Returns true when it holds.
pub fn verify_obstruction(target: &Scale, fine: &Scale, obstruction: &Obstruction) -> bool {
    match obstruction {
        Obstruction::EndpointsUnrelated { x, y } => !target.entourage().contains(*x, *y),
        Obstruction::Unreachable { x, y } => fine.entourage().components()[*x] != fine.entourage().components()[*y],
        Obstruction::Homology { closed_loop, class } => {
            target.h1_class(closed_loop).is_ok_and(|c| &c == class && c.iter().any(|v| !v.is_zero()))
        }
        Obstruction::ClassUnattainable { x, y, required, offset, lattice } => {
            let group = target.group();
            let dim = group.dim();
            if fine.skeleton().root(*x) != fine.skeleton().root(*y) {
                return false;
            }
            let mut closing = fine_walk(fine, *x, *y);
            closing.push(*x);
            if &target.walk_class(&closing) != offset || required.len() != dim {
                return false;
            }
            // the listed loops must span the fine loops of the component
            let actual = Lattice::from_generators(dim, component_loop_classes(target, fine, *x)).join(&group.relation_lattice());
            let listed = Lattice::from_generators(dim, lattice.iter().cloned()).join(&group.relation_lattice());
            let diff: Vec<BigInt> = required.iter().zip(offset).map(|(r, o)| r - o).collect();
            listed == actual && !listed.contains(&diff)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub coarse: usize,
    pub fine: usize,
    pub pairs: usize,
    pub witnessed: usize,
    pub refuted: usize,
    pub undecided: usize,
    /// Pairs of the finer scale (`x < y`) with each verdict label.
    pub matrix: Vec<(usize, usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UjAudit {
    /// Ladder index of the scale whose chains serve as witnesses.
    pub witness_scale: usize,
    pub entries: Vec<AuditEntry>,
    /// `supported[i]`: some finer scale has every pair witnessed at scale `i`.
    pub supported: Vec<bool>,
    pub supported_at_depth: Option<usize>,
}

/// For every scale `E` and strictly finer `F`, looks for witnesses of all
/// `F`-pairs at `E` using chains of the finest scale.
pub fn uniform_joinability_audit(tower: &Tower, budget: &Budget, runner: &impl Runner) -> Result<UjAudit> {
    let k = tower.scales.len();
    if k < 2 {
        return Err(Error::LadderTooShort { len: k });
    }
    let finest = &tower.scales[k - 1];
    let mut entries = Vec::new();
    for i in 0..k - 1 {
        for j in i + 1..k {
            let pairs: Vec<(usize, usize)> = tower.scales[j].entourage().pairs().collect();
            let target = &tower.scales[i];
            let verdicts = runner.run(pairs.len(), |p| joinability_witness(target, finest, pairs[p].0, pairs[p].1, budget));
            let mut entry = AuditEntry { coarse: i, fine: j, pairs: pairs.len(), witnessed: 0, refuted: 0, undecided: 0, matrix: Vec::new() };
            for (&(x, y), v) in pairs.iter().zip(verdicts) {
                let v = v?;
                match v.verdict {
                    Verdict::Yes { .. } => entry.witnessed += 1,
                    Verdict::No { .. } => entry.refuted += 1,
                    Verdict::Unknown { .. } => entry.undecided += 1,
                }
                entry.matrix.push((x, y, String::from(v.verdict.label())));
            }
            entries.push(entry);
        }
    }
    let supported: Vec<bool> = (0..k - 1)
        .map(|i| entries.iter().any(|en| en.coarse == i && en.witnessed == en.pairs))
        .collect();
    let supported_at_depth = supported.iter().all(|&s| s).then_some(k);
    Ok(UjAudit { witness_scale: k - 1, entries, supported, supported_at_depth })
}

/// Chains from the basepoint to `x` and `y` whose combination is short.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GWitness {
    pub to_x: Chain,
    pub to_y: Chain,
    /// Transforms `to_x^-1 * to_y` into the edge `[x, y]` at the target scale.
    pub certificate: HomotopyCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GPair {
    pub x: usize,
    pub y: usize,
    pub verdict: Verdict<GWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GEntourage {
    pub basepoint: usize,
    /// Certified pairs plus the diagonal.
    pub entourage: Entourage,
    pub pairs: Vec<GPair>,
}

fn g_pair(target: &Scale, fine: &Scale, x0: usize, x: usize, y: usize, budget: &Budget) -> Result<Verdict<GWitness>> {
    let components = fine.skeleton();
    for p in [x, y] {
        if components.root(p) != components.root(x0) {
            return Ok(Verdict::No { obstruction: Obstruction::Unreachable { x: x0, y: p } });
        }
    }
    let join = joinability_witness(target, fine, x, y, budget)?;
    let w = match join.verdict {
        Verdict::Yes { witness } => witness,
        Verdict::No { obstruction } => return Ok(Verdict::No { obstruction }),
        Verdict::Unknown { spent } => return Ok(Verdict::Unknown { spent }),
    };
    let to_x = Chain::new(fine.entourage(), fine_walk(fine, x0, x))?;
    let to_y = to_x.concat(&w.witness)?;
    // to_x^-1 * to_x * w reduces to the reduced form of w
    let e = target.entourage();
    let combined = to_x.reverse().concat(&to_y)?;
    let down = HomotopyCertificate::free_reduction(e, &combined)?;
    let up = HomotopyCertificate::free_reduction(e, &w.witness)?.reversed();
    let certificate = down.then(&up)?.then(&w.certificate)?;
    certificate.replay()?;
    Ok(Verdict::Yes { witness: GWitness { to_x, to_y, certificate } })
}

/// Pairs of `target` joined through the basepoint by fine chains whose
/// combination is short at `target`.
pub fn g_entourage(target: &Scale, fine: &Scale, basepoint: usize, budget: &Budget, runner: &impl Runner) -> Result<GEntourage> {
    let n = target.n();
    if basepoint >= n {
        return Err(Error::IndexOutOfRange { index: basepoint, len: n });
    }
    if fine.n() != n {
        return Err(Error::CarrierMismatch { expected: n, found: fine.n() });
    }
    let pairs: Vec<(usize, usize)> = target.entourage().pairs().collect();
    let verdicts = runner.run(pairs.len(), |p| g_pair(target, fine, basepoint, pairs[p].0, pairs[p].1, budget));
    let mut out = Vec::with_capacity(pairs.len());
    for (&(x, y), v) in pairs.iter().zip(verdicts) {
        out.push(GPair { x, y, verdict: v? });
    }
    let entourage = Entourage::from_pairs(n, out.iter().filter(|p| p.verdict.is_yes()).map(|p| (p.x, p.y)))?;
    Ok(GEntourage { basepoint, entourage, pairs: out })
}

/// Human-readable form of a finding.
pub fn describe_ml(f: &MlFinding) -> String {
    match f {
        MlFinding::StabilizedAt { b, vacuous: false, .. } => format!("stabilized_at {b}"),
        MlFinding::StabilizedAt { b, vacuous: true, .. } => format!("stabilized_at {b} (only at the finest scale)"),
        MlFinding::NotStabilizedWithinLadder { .. } => String::from("not_stabilized_within_ladder"),
    }
}
