//! Words over the union of the subgroups `K_i`, the triple relation sets
//! `R_i`, rewriting moves with their filling charges, and Steinberg sorting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    steinberg_commutator, AlgebraError, MatrixSpace, RelationCheck, Ring, RingElement,
    SquareMatrix,
};
use crate::complex::{CosetComplex, Vertex};
use crate::expansion::p_poly;
use crate::groups::{ElementId, Group, Subgroup};

#[derive(Debug, Error)]
pub enum PresentationError {
    #[error("element {element} is not in K_{subgroup}")]
    BadLetter { subgroup: usize, element: ElementId },
    #[error("relation does not match the word at position {at}")]
    NoMatch { at: usize },
    #[error("consecutive path vertices {at} and {next} do not meet")]
    PathBroken { at: usize, next: usize },
    #[error("path is too short")]
    ShortPath,
    #[error("trace invalid at move {index}: {reason}")]
    TraceInvalid { index: usize, reason: String },
    #[error("word does not evaluate to the identity")]
    NotTrivial,
    #[error("path is not the boundary of a triangle")]
    NotATriangle,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, PresentationError>;

/// A letter `g ∈ K_i`. Inverse letters are the inverse elements, so there is
/// no separate inverse flag. The identity is allowed as a letter because path
/// words may contain it until an identity reduction removes it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub subgroup: usize,
    pub element: ElementId,
}

impl Letter {
    pub fn new(subgroups: &[Subgroup], subgroup: usize, element: ElementId) -> Result<Letter> {
        if subgroup >= subgroups.len() || !subgroups[subgroup].contains(element) {
            return Err(PresentationError::BadLetter { subgroup, element });
        }
        Ok(Letter { subgroup, element })
    }

    pub fn inverse(&self, group: &Group) -> Letter {
        Letter {
            subgroup: self.subgroup,
            element: group.inverse(self.element),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Word {
        Word { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn evaluate(&self, group: &Group) -> ElementId {
        group.product(self.letters.iter().map(|l| l.element))
    }

    pub fn is_trivial(&self, group: &Group) -> bool {
        self.evaluate(group) == group.identity()
    }

    pub fn inverse(&self, group: &Group) -> Word {
        Word::new(self.letters.iter().rev().map(|l| l.inverse(group)).collect())
    }
}

/// `R_i`: all `(g1, g2, g3)` in `K_i \ {e}` with `g1 g2 g3 = e`.
#[derive(Clone, Debug)]
pub struct RelationSet {
    pub triples: Vec<Vec<(ElementId, ElementId, ElementId)>>,
}

impl RelationSet {
    pub fn sizes(&self) -> Vec<usize> {
        self.triples.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.triples.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, i: usize, t: (ElementId, ElementId, ElementId)) -> bool {
        self.triples
            .get(i)
            .is_some_and(|r| r.binary_search(&t).is_ok())
    }
}

pub fn relations_from_tables(group: &Group, subgroups: &[Subgroup]) -> RelationSet {
    let e = group.identity();
    let triples = subgroups
        .iter()
        .map(|k| {
            let mut out = Vec::new();
            for &a in k.members() {
                for &b in k.members() {
                    if a == e || b == e {
                        continue;
                    }
                    let c = group.inverse(group.mul(a, b));
                    if c == e {
                        continue;
                    }
                    assert_eq!(group.product([a, b, c]), e, "relation triple does not close");
                    out.push((a, b, c));
                }
            }
            out.sort_unstable();
            out
        })
        .collect();
    RelationSet { triples }
}

/// One rewriting move on a word over `∪ K_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    /// Drop a letter equal to `e`.
    Identity { at: usize },
    /// Drop `s s^{-1}` at positions `at, at+1`.
    Free { at: usize },
    /// Relation move 1: replace `g g'` by their product, both in `K_subgroup`.
    Merge { at: usize, subgroup: usize },
    /// Relation move 2: replace `g` by `left (left^{-1} g)`, all in `K_subgroup`.
    Split {
        at: usize,
        subgroup: usize,
        left: ElementId,
    },
}

impl Move {
    /// Charge at current word length `m`.
    pub fn charge(&self, m: usize) -> u64 {
        let m = m as u64;
        match self {
            Move::Identity { .. } | Move::Merge { .. } => 4 + 2 * (m - 1),
            Move::Free { .. } => 6 + 4 * (m - 1),
            Move::Split { .. } => 2,
        }
    }

    pub fn is_relation(&self) -> bool {
        matches!(self, Move::Merge { .. } | Move::Split { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargedMove {
    #[serde(flatten)]
    pub step: Move,
    pub length: usize,
    pub charge: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub relation_applications: u64,
    pub free_reductions: u64,
    pub identity_reductions: u64,
    pub sfill1_upper: u64,
    pub area_upper: u64,
    pub trace: Vec<ChargedMove>,
}

impl CostLedger {
    fn record(&mut self, step: Move, length: usize) {
        let charge = step.charge(length);
        match step {
            Move::Identity { .. } => self.identity_reductions += 1,
            Move::Free { .. } => self.free_reductions += 1,
            Move::Merge { .. } | Move::Split { .. } => {
                self.relation_applications += 1;
                self.area_upper += 1;
            }
        }
        self.sfill1_upper += charge;
        self.trace.push(ChargedMove {
            step,
            length,
            charge,
        });
    }
}

fn member(subgroups: &[Subgroup], i: usize, g: ElementId) -> bool {
    i < subgroups.len() && subgroups[i].contains(g)
}

/// Applies `step` in place; returns a description of why it does not apply.
fn apply_move(
    group: &Group,
    subgroups: &[Subgroup],
    w: &mut Vec<Letter>,
    step: &Move,
) -> std::result::Result<(), String> {
    let before = if cfg!(debug_assertions) {
        Some(group.product(w.iter().map(|l| l.element)))
    } else {
        None
    };
    let e = group.identity();
    match *step {
        Move::Identity { at } => {
            let l = w.get(at).ok_or("position out of range")?;
            if l.element != e {
                return Err("letter is not the identity".into());
            }
            w.remove(at);
        }
        Move::Free { at } => {
            if at + 1 >= w.len() {
                return Err("position out of range".into());
            }
            if group.mul(w[at].element, w[at + 1].element) != e {
                return Err("letters do not cancel".into());
            }
            w.drain(at..at + 2);
        }
        Move::Merge { at, subgroup } => {
            if at + 1 >= w.len() {
                return Err("position out of range".into());
            }
            let (a, b) = (w[at].element, w[at + 1].element);
            if !member(subgroups, subgroup, a) || !member(subgroups, subgroup, b) {
                return Err(format!("letters are not both in K_{subgroup}"));
            }
            w[at] = Letter {
                subgroup,
                element: group.mul(a, b),
            };
            w.remove(at + 1);
        }
        Move::Split {
            at,
            subgroup,
            left,
        } => {
            let g = w.get(at).ok_or("position out of range")?.element;
            if !member(subgroups, subgroup, g) || !member(subgroups, subgroup, left) {
                return Err(format!("letters are not both in K_{subgroup}"));
            }
            let right = group.mul(group.inverse(left), g);
            w[at] = Letter {
                subgroup,
                element: left,
            };
            w.insert(
                at + 1,
                Letter {
                    subgroup,
                    element: right,
                },
            );
        }
    }
    if let Some(b) = before {
        debug_assert_eq!(b, group.product(w.iter().map(|l| l.element)));
    }
    Ok(())
}

/// Cancels adjacent inverse pairs until none remain.
pub fn free_reduce(group: &Group, w: &Word) -> (Word, CostLedger) {
    let mut ledger = CostLedger::default();
    let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
    // Lengths are tracked for the charges: a cancellation against the stack
    // top happens in the word made of the stack plus the unread suffix.
    for (idx, &l) in w.letters.iter().enumerate() {
        match stack.last() {
            Some(top) if group.mul(top.element, l.element) == group.identity() => {
                let length = stack.len() + (w.len() - idx);
                ledger.record(
                    Move::Free {
                        at: stack.len() - 1,
                    },
                    length,
                );
                stack.pop();
            }
            _ => stack.push(l),
        }
    }
    (Word::new(stack), ledger)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `g1 g2 → g3^{-1}`.
    Forward,
    /// `g3^{-1} → g1 g2`.
    Backward,
}

pub fn apply_relation(
    group: &Group,
    relations: &RelationSet,
    w: &Word,
    at: usize,
    subgroup: usize,
    rel: (ElementId, ElementId, ElementId),
    orientation: Orientation,
) -> Result<Word> {
    if !relations.contains(subgroup, rel) {
        return Err(PresentationError::NoMatch { at });
    }
    let (g1, g2, g3) = rel;
    let mut letters = w.letters.clone();
    match orientation {
        Orientation::Forward => {
            if at + 1 >= letters.len() || letters[at].element != g1 || letters[at + 1].element != g2 {
                return Err(PresentationError::NoMatch { at });
            }
            letters[at] = Letter {
                subgroup,
                element: group.inverse(g3),
            };
            letters.remove(at + 1);
        }
        Orientation::Backward => {
            if at >= letters.len() || letters[at].element != group.inverse(g3) {
                return Err(PresentationError::NoMatch { at });
            }
            letters[at] = Letter {
                subgroup,
                element: g1,
            };
            letters.insert(
                at + 1,
                Letter {
                    subgroup,
                    element: g2,
                },
            );
        }
    }
    let out = Word::new(letters);
    debug_assert_eq!(out.evaluate(group), w.evaluate(group));
    Ok(out)
}

/// Result of replaying a reduction trace with the homotopy-move charges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfillBound {
    pub word: Word,
    pub m: usize,
    /// Relation moves in the trace.
    pub d: u64,
    pub trace_bound: u64,
    pub ceiling: u64,
    pub within_ceiling: bool,
    pub ledger: CostLedger,
}

/// Replays `trace` on the trivial word `w`, charging each move at the current
/// length, and adds 1 for the final word of length at most 2.
pub fn sfill1_upper(
    group: &Group,
    subgroups: &[Subgroup],
    w: &Word,
    trace: &[Move],
) -> Result<SfillBound> {
    if !w.is_trivial(group) {
        return Err(PresentationError::NotTrivial);
    }
    let mut letters = w.letters.clone();
    let mut ledger = CostLedger::default();
    for (index, step) in trace.iter().enumerate() {
        let length = letters.len();
        apply_move(group, subgroups, &mut letters, step)
            .map_err(|reason| PresentationError::TraceInvalid { index, reason })?;
        ledger.record(step.clone(), length);
    }
    if letters.len() > 2 {
        return Err(PresentationError::TraceInvalid {
            index: trace.len(),
            reason: format!("final length {} exceeds 2", letters.len()),
        });
    }
    ledger.sfill1_upper += 1;
    let d = ledger.relation_applications;
    let ceiling = p_poly(w.len() as u64, d);
    Ok(SfillBound {
        word: w.clone(),
        m: w.len(),
        d,
        trace_bound: ledger.sfill1_upper,
        ceiling,
        within_ceiling: ledger.sfill1_upper <= ceiling,
        ledger,
    })
}

/// Word of a closed path, normalized by a translation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathWord {
    /// `g` with `g · path[j] = g_1 ⋯ g_j K_{i_j}`.
    pub translation: ElementId,
    pub word: Word,
}

fn coset_members(cc: &CosetComplex, v: Vertex) -> &[ElementId] {
    let (i, c) = cc.coset_of_vertex(v);
    cc.partitions[i].members(c)
}

fn least_common(cc: &CosetComplex, a: Vertex, b: Vertex) -> Option<ElementId> {
    let (ib, cb) = cc.coset_of_vertex(b);
    coset_members(cc, a)
        .iter()
        .copied()
        .filter(|&g| cc.partitions[ib].coset_of(g) == cb)
        .min()
}

/// Translates a closed path (a cyclic vertex list) so that it starts at a
/// subgroup, then reads off letters `g_j = c_{j-1}^{-1} c_j` from the least
/// common elements `c_j` of consecutive cosets. The translation is the one
/// giving the lexicographically least vertex sequence, so a path and any of
/// its translates produce the same word.
pub fn path_to_word(cc: &CosetComplex, path: &[Vertex]) -> Result<PathWord> {
    let m = path.len();
    if m < 2 {
        return Err(PresentationError::ShortPath);
    }
    let group = &cc.group;
    for j in 0..m {
        if least_common(cc, path[j], path[(j + 1) % m]).is_none() {
            return Err(PresentationError::PathBroken {
                at: j,
                next: (j + 1) % m,
            });
        }
    }
    let mut best: Option<(Vec<Vertex>, ElementId)> = None;
    for &y in coset_members(cc, path[0]) {
        let yi = group.inverse(y);
        let moved: Vec<Vertex> = path.iter().map(|&v| cc.act(yi, v)).collect();
        if best.as_ref().is_none_or(|(b, _)| moved < *b) {
            best = Some((moved, y));
        }
    }
    let (t, y) = best.expect("cosets are nonempty");
    let c: Vec<ElementId> = (0..m)
        .map(|j| least_common(cc, t[j], t[(j + 1) % m]).expect("translates of meeting cosets meet"))
        .collect();
    let letters = (0..m)
        .map(|j| {
            let prev = c[(j + m - 1) % m];
            Letter {
                subgroup: cc.coset_of_vertex(t[j]).0,
                element: group.mul(group.inverse(prev), c[j]),
            }
        })
        .collect();
    let translation = group.inverse(group.mul(y, c[m - 1]));
    let out = PathWord {
        translation,
        word: Word::new(letters),
    };
    debug_assert!(replay_path(cc, path, &out));
    Ok(out)
}

/// Checks that the word is trivial, its letters lie in the right subgroups,
/// and the translated path visits `g_1 ⋯ g_j K_{i_j}`.
pub fn replay_path(cc: &CosetComplex, path: &[Vertex], pw: &PathWord) -> bool {
    let group = &cc.group;
    if pw.word.len() != path.len() || !pw.word.is_trivial(group) {
        return false;
    }
    let mut prefix = group.identity();
    for (j, l) in pw.word.letters.iter().enumerate() {
        let (i, _) = cc.coset_of_vertex(path[j]);
        if l.subgroup != i || !cc.subgroups[i].contains(l.element) {
            return false;
        }
        prefix = group.mul(prefix, l.element);
        if cc.vertex_of(i, prefix) != cc.act(pw.translation, path[j]) {
            return false;
        }
    }
    true
}

fn common_subgroup(subgroups: &[Subgroup], a: ElementId, b: ElementId) -> Option<usize> {
    (0..subgroups.len()).find(|&i| subgroups[i].contains(a) && subgroups[i].contains(b))
}

/// A reduction trace for the word of a triangle `(K_{i0}, g0 K_{i1}, g0 g1 K_{i2})`
/// through a common element `z` of the three cosets: split `g0 = z (z^{-1} g0)`,
/// then merge twice down to `z z^{-1}`.
pub fn triangle_trace(cc: &CosetComplex, w: &Word) -> Result<Vec<Move>> {
    let group = &cc.group;
    let subgroups = &cc.subgroups;
    let e = group.identity();
    let mut letters = w.letters.clone();
    let mut trace = Vec::new();
    let mut push = |letters: &mut Vec<Letter>, step: Move| -> Result<()> {
        apply_move(group, subgroups, letters, &step).map_err(|reason| {
            PresentationError::TraceInvalid {
                index: trace.len(),
                reason,
            }
        })?;
        trace.push(step);
        Ok(())
    };
    if letters.len() != 3 {
        return Err(PresentationError::NotATriangle);
    }
    let types: Vec<usize> = letters.iter().map(|l| l.subgroup).collect();
    let (h0, h1) = (letters[0].element, letters[1].element);
    let c1 = cc.partitions[types[1]].coset_of(h0);
    let c2 = cc.partitions[types[2]].coset_of(group.mul(h0, h1));
    let z = subgroups[types[0]]
        .members()
        .iter()
        .copied()
        .filter(|&z| {
            cc.partitions[types[1]].coset_of(z) == c1 && cc.partitions[types[2]].coset_of(z) == c2
        })
        .min()
        .ok_or(PresentationError::NotATriangle)?;
    while let Some(at) = letters.iter().position(|l| l.element == e) {
        push(&mut letters, Move::Identity { at })?;
    }
    if letters.len() <= 2 {
        return Ok(trace);
    }
    if z != h0 {
        push(
            &mut letters,
            Move::Split {
                at: 0,
                subgroup: types[0],
                left: z,
            },
        )?;
    }
    while letters.len() > 2 {
        let (a, b) = (letters[1].element, letters[2].element);
        if group.mul(a, b) == e {
            push(&mut letters, Move::Free { at: 1 })?;
        } else {
            let subgroup = common_subgroup(subgroups, a, b).ok_or(PresentationError::NotATriangle)?;
            push(&mut letters, Move::Merge { at: 1, subgroup })?;
        }
    }
    Ok(trace)
}

/// Elementary letter `e_{i,j}(a)` with 1-based root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elementary {
    pub root: (usize, usize),
    pub coeff: RingElement,
}

impl fmt::Display for Elementary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{},{}({})", self.root.0, self.root.1, self.coeff)
    }
}

impl Elementary {
    pub fn new(i: usize, j: usize, coeff: RingElement) -> Elementary {
        Elementary {
            root: (i, j),
            coeff,
        }
    }

    pub fn inverse(&self) -> Elementary {
        Elementary::new(self.root.0, self.root.1, self.coeff.neg())
    }

    pub fn matrix(&self, space: &MatrixSpace) -> Result<SquareMatrix> {
        Ok(space.elementary(self.root.0, self.root.1, &self.coeff)?)
    }
}

pub fn evaluate_elementary(space: &MatrixSpace, w: &[Elementary]) -> Result<SquareMatrix> {
    let mut acc = space.identity();
    for l in w {
        acc = acc.mul(&l.matrix(space)?)?;
    }
    Ok(acc)
}

pub fn inverse_elementary(w: &[Elementary]) -> Vec<Elementary> {
    w.iter().rev().map(Elementary::inverse).collect()
}

/// `x y = y x [x, y]` with `[x, y] = x^{-1} y^{-1} x y`; returns the
/// replacement of the pair `x y`.
fn commute(x: &Elementary, y: &Elementary) -> Result<Vec<Elementary>> {
    let mut out = vec![y.clone(), x.clone()];
    if let Some((root, c)) = steinberg_commutator(x.root, &x.coeff, y.root, &y.coeff)? {
        out.push(Elementary::new(root.0, root.1, c));
    }
    Ok(out)
}

fn steinberg_record(ledger: &mut CostLedger) {
    ledger.relation_applications += 1;
    ledger.area_upper += 1;
}

/// Sorts a word of elementary letters into `∏ e_{i,j}(a_{i,j})` in the order
/// `(1,2) < (1,3) < … < (n,n+1)`. For each root in turn, its leftmost
/// occurrence is bubbled to the front of the unsorted part, each swap being
/// one commutator relation, and merged into the sorted tail by one additive
/// relation. Letters with zero coefficient are dropped at one relation each.
pub fn steinberg_normal_form(w: &[Elementary]) -> Result<(Vec<Elementary>, CostLedger)> {
    let mut ledger = CostLedger::default();
    let mut rest: Vec<Elementary> = Vec::with_capacity(w.len());
    for l in w {
        if l.coeff.is_zero() {
            steinberg_record(&mut ledger);
        } else {
            rest.push(l.clone());
        }
    }
    let mut sorted: Vec<Elementary> = Vec::new();
    // Commutators created while sorting root r have roots > r, so a later
    // root can appear that was absent from the input.
    let mut cursor: Option<(usize, usize)> = None;
    loop {
        let next = rest
            .iter()
            .map(|l| l.root)
            .filter(|&r| cursor.is_none_or(|c| r >= c))
            .min();
        let Some(r) = next else { break };
        cursor = Some(r);
        while let Some(t) = rest.iter().position(|l| l.root == r) {
            for s in (1..=t).rev() {
                let pair = commute(&rest[s - 1], &rest[s])?;
                steinberg_record(&mut ledger);
                rest.splice(s - 1..s + 1, pair);
            }
            let y = rest.remove(0);
            match sorted.last_mut() {
                Some(last) if last.root == r => {
                    last.coeff = last.coeff.add(&y.coeff)?;
                    steinberg_record(&mut ledger);
                    if last.coeff.is_zero() {
                        sorted.pop();
                        steinberg_record(&mut ledger);
                    }
                }
                _ => sorted.push(y),
            }
        }
        debug_assert!(rest.iter().all(|l| l.root > r));
    }
    Ok((sorted, ledger))
}

/// Same normal form under a random schedule: repeatedly picks any adjacent
/// out-of-order pair, equal-root pair, or zero letter and rewrites it.
pub fn steinberg_normal_form_random(
    w: &[Elementary],
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Elementary>, CostLedger)> {
    let mut ledger = CostLedger::default();
    let mut word: Vec<Elementary> = w.to_vec();
    loop {
        let mut sites = Vec::new();
        for (t, l) in word.iter().enumerate() {
            if l.coeff.is_zero() {
                sites.push((t, true));
            } else if t + 1 < word.len() && word[t].root >= word[t + 1].root {
                sites.push((t, false));
            }
        }
        if sites.is_empty() {
            break;
        }
        let (t, zero) = sites[rng.random_range(0..sites.len())];
        steinberg_record(&mut ledger);
        if zero {
            word.remove(t);
        } else if word[t].root == word[t + 1].root {
            let c = word[t].coeff.add(&word[t + 1].coeff)?;
            word[t].coeff = c;
            word.remove(t + 1);
        } else {
            let pair = commute(&word[t], &word[t + 1])?;
            word.splice(t..t + 2, pair);
        }
    }
    Ok((word, ledger))
}

/// All letters `e_{i,j}(a)`, `a ≠ 0`, over `F_q` for `(n+1) x (n+1)` matrices.
pub fn field_alphabet(q: u32, n: usize) -> Result<Vec<Elementary>> {
    let ring = Ring::field(q)?;
    let mut out = Vec::new();
    for i in 1..=n + 1 {
        for j in i + 1..=n + 1 {
            for a in ring.elements_up_to_degree(0) {
                if !a.is_zero() {
                    out.push(Elementary::new(i, j, a));
                }
            }
        }
    }
    Ok(out)
}

/// Upper estimate of `Dehn(m)` from sampled trivial words under the fixed
/// sorting strategy. Never an exact value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DehnEstimate {
    pub m: usize,
    pub samples: usize,
    pub max_area: u64,
    pub worst_word: Vec<String>,
    pub estimated: bool,
}

pub fn dehn_estimate(
    alphabet: &[Elementary],
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<DehnEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots: BTreeSet<(usize, usize)> = alphabet.iter().map(|l| l.root).collect();
    let room = m.saturating_sub(roots.len()).max(1);
    let mut best = DehnEstimate {
        m,
        samples,
        max_area: 0,
        worst_word: Vec::new(),
        estimated: true,
    };
    if alphabet.is_empty() {
        return Ok(best);
    }
    for _ in 0..samples {
        let r = rng.random_range(1..=room);
        let u: Vec<Elementary> = (0..r)
            .map(|_| alphabet[rng.random_range(0..alphabet.len())].clone())
            .collect();
        let (nf, _) = steinberg_normal_form(&u)?;
        let mut w = u;
        w.extend(inverse_elementary(&nf));
        if w.len() > m {
            continue;
        }
        let (rest, ledger) = steinberg_normal_form(&w)?;
        if !rest.is_empty() {
            return Err(PresentationError::NotTrivial);
        }
        if ledger.area_upper > best.max_area {
            best.max_area = ledger.area_upper;
            best.worst_word = w.iter().map(ToString::to_string).collect();
        }
    }
    Ok(best)
}

/// Trivial words of the residual relations for `(n+1) x (n+1)` matrices over
/// `F_q`, keyed by shape, one word per admissible coefficient pair.
pub fn residual_words(q: u32, n: usize) -> Result<BTreeMap<String, Vec<Vec<Elementary>>>> {
    let ring = Ring::field(q)?;
    let nonzero: Vec<RingElement> = ring
        .elements_up_to_degree(0)
        .into_iter()
        .filter(|a| !a.is_zero())
        .collect();
    let top = n + 1;
    let comm = |x: Elementary, y: Elementary| -> Vec<Elementary> {
        vec![x.inverse(), y.inverse(), x, y]
    };
    let mut out: BTreeMap<String, Vec<Vec<Elementary>>> = BTreeMap::new();
    for a in &nonzero {
        for b in &nonzero {
            let ab = a.mul(b)?;
            let sum = a.add(b)?;
            for j in 2..=n {
                for i in 2..top {
                    if i != j {
                        out.entry(format!("commute_1{j}_{i}{top}")).or_default().push(comm(
                            Elementary::new(1, j, a.clone()),
                            Elementary::new(i, top, b.clone()),
                        ));
                    }
                }
            }
            for j in 2..top {
                let mut w = comm(
                    Elementary::new(1, j, a.clone()),
                    Elementary::new(j, top, b.clone()),
                );
                w.push(Elementary::new(1, top, ab.neg()));
                out.entry(format!("corner_from_1{j}_{j}{top}")).or_default().push(w);
            }
            for i in 1..=top {
                for j in i + 1..=top {
                    out.entry(format!("central_{i}{j}")).or_default().push(comm(
                        Elementary::new(i, j, a.clone()),
                        Elementary::new(1, top, b.clone()),
                    ));
                }
            }
            if !sum.is_zero() {
                out.entry("corner_additive".into()).or_default().push(vec![
                    Elementary::new(1, top, a.clone()),
                    Elementary::new(1, top, b.clone()),
                    Elementary::new(1, top, sum.neg()),
                ]);
            }
        }
        let mut w = comm(
            Elementary::new(1, n, ring.one()),
            Elementary::new(n, top, a.clone()),
        );
        w.push(Elementary::new(1, top, a.neg()));
        out.entry("corner_definition".into()).or_default().push(w);
    }
    Ok(out)
}

/// Per shape, the set of application counts seen for each `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeCounts {
    pub shape: String,
    pub counts: BTreeMap<u32, BTreeSet<u64>>,
    pub equal: bool,
}

pub fn q_independence(n: usize, qs: &[u32]) -> Result<Vec<ShapeCounts>> {
    let mut table: BTreeMap<String, BTreeMap<u32, BTreeSet<u64>>> = BTreeMap::new();
    for &q in qs {
        for (shape, words) in residual_words(q, n)? {
            let entry = table.entry(shape).or_default().entry(q).or_default();
            for w in words {
                let (nf, ledger) = steinberg_normal_form(&w)?;
                if !nf.is_empty() {
                    return Err(PresentationError::NotTrivial);
                }
                entry.insert(ledger.relation_applications);
            }
        }
    }
    Ok(table
        .into_iter()
        .map(|(shape, counts)| {
            let mut sets = counts.values();
            let first = sets.next();
            let equal = counts.len() == qs.len() && sets.all(|s| Some(s) == first);
            ShapeCounts {
                shape,
                counts,
                equal,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Field,
    Polynomial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub q: u32,
    pub relation: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub family: Family,
    pub n: usize,
    pub entries: Vec<ResidualEntry>,
    pub passed: bool,
}

struct Residual<'a> {
    space: MatrixSpace,
    ring: Ring,
    n: usize,
    coeffs: &'a [RingElement],
    poly: bool,
}

impl Residual<'_> {
    fn e(&self, i: usize, j: usize, a: &RingElement, k: usize) -> Result<SquareMatrix> {
        let c = a.mul(&self.ring.monomial(1, k)?)?;
        Ok(self.space.elementary(i, j, &c)?)
    }

    /// The corner letter through its commutator definition.
    fn corner(&self, a: &RingElement, k: usize) -> Result<SquareMatrix> {
        let n = self.n;
        let one = self.ring.one();
        if k < n {
            Ok(self.e(1, n, &one, k)?.commutator(&self.e(n, n + 1, a, 0)?)?)
        } else {
            Ok(self.e(1, n, &one, k - 1)?.commutator(&self.e(n, n + 1, a, 1)?)?)
        }
    }

    fn degrees(&self, top: usize) -> std::ops::RangeInclusive<usize> {
        if self.poly {
            0..=top
        } else {
            0..=0
        }
    }

    fn run(&self) -> Result<Vec<(String, RelationCheck)>> {
        let n = self.n;
        let top = n + 1;
        let id = self.space.identity();
        let mut def = RelationCheck::default();
        let mut t1 = RelationCheck::default();
        let mut t2 = RelationCheck::default();
        let mut t3 = RelationCheck::default();
        let mut t4 = RelationCheck::default();
        for a in self.coeffs {
            for k in self.degrees(n) {
                let direct = self.e(1, top, a, k)?;
                def.record(self.corner(a, k)? == direct, || format!("corner({a}, t^{k})"));
            }
            for b in self.coeffs {
                for j in 2..=n {
                    for i in 2..top {
                        if i == j {
                            continue;
                        }
                        for k1 in self.degrees(j - 1) {
                            for k2 in self.degrees(top - i) {
                                let c = self.e(1, j, a, k1)?.commutator(&self.e(i, top, b, k2)?)?;
                                t1.record(c == id, || format!("[e1{j}({a}t^{k1}), e{i}{top}({b}t^{k2})]"));
                            }
                        }
                    }
                }
                for j in 2..top {
                    for k1 in self.degrees(j - 1) {
                        for k2 in self.degrees(top - j) {
                            let c = self.e(1, j, a, k1)?.commutator(&self.e(j, top, b, k2)?)?;
                            let ab = a.mul(b)?;
                            let rhs = self.corner(&ab, k1 + k2)?;
                            t2.record(c == rhs, || format!("[e1{j}({a}t^{k1}), e{j}{top}({b}t^{k2})]"));
                        }
                    }
                }
                for i in 1..=top {
                    for j in i + 1..=top {
                        for k1 in self.degrees(j - i) {
                            for k2 in self.degrees(n) {
                                let c = self.e(i, j, a, k1)?.commutator(&self.corner(b, k2)?)?;
                                t3.record(c == id, || format!("[e{i}{j}({a}t^{k1}), corner({b}t^{k2})]"));
                            }
                        }
                    }
                }
                for k in self.degrees(n) {
                    let lhs = self.corner(a, k)?.mul(&self.corner(b, k)?)?;
                    let rhs = self.corner(&a.add(b)?, k)?;
                    t4.record(lhs == rhs, || format!("corner({a}t^{k}) corner({b}t^{k})"));
                }
            }
        }
        Ok(vec![
            ("corner_definition".into(), def),
            ("commutation".into(), t1),
            ("commutator_to_corner".into(), t2),
            ("corner_centrality".into(), t3),
            ("corner_additivity".into(), t4),
        ])
    }
}

/// Checks the residual relations and the corner definition as matrix
/// identities for every `q` and every coefficient in `F_q`.
pub fn verify_residual_relations(family: Family, n: usize, qs: &[u32]) -> Result<ResidualReport> {
    let mut entries = Vec::new();
    for &q in qs {
        let (ring, space) = match family {
            Family::Field => {
                let ring = Ring::field(q)?;
                (ring, MatrixSpace::new(ring, n + 1))
            }
            Family::Polynomial => {
                let ring = Ring::polynomial(q, n)?;
                (ring, MatrixSpace::constrained(ring, n + 1))
            }
        };
        let coeffs = ring.elements_up_to_degree(0);
        let residual = Residual {
            space,
            ring,
            n,
            coeffs: &coeffs,
            poly: family == Family::Polynomial,
        };
        for (relation, check) in residual.run()? {
            entries.push(ResidualEntry {
                q,
                relation,
                checked: check.checked,
                failures: check.failures,
            });
        }
    }
    let passed = !entries.is_empty() && entries.iter().all(|e| e.failures.is_empty() && e.checked > 0);
    Ok(ResidualReport {
        family,
        n,
        entries,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_coset_complex;
    use crate::groups::Construction;
    use std::sync::Arc;

    fn unip(q: u32) -> CosetComplex {
        let c = Construction::UnipFq { n: 3, q };
        let g = Arc::new(c.build(1 << 22).unwrap());
        let subs = c.subgroups(&g).unwrap();
        build_coset_complex(g, subs).unwrap()
    }

    fn letter(cc: &CosetComplex, i: usize, g: ElementId) -> Letter {
        Letter::new(&cc.subgroups, i, g).unwrap()
    }

    fn nontrivial(cc: &CosetComplex, i: usize) -> Vec<ElementId> {
        let e = cc.group.identity();
        cc.subgroups[i].members().iter().copied().filter(|&g| g != e).collect()
    }

    #[test]
    fn relation_set_sizes_match_direct_count() {
        let cc = unip(2);
        let rs = relations_from_tables(&cc.group, &cc.subgroups);
        for (i, k) in cc.subgroups.iter().enumerate() {
            let m = k.order();
            assert_eq!(rs.sizes()[i], (m - 1) * (m - 2));
        }
        let trivial = Subgroup::trivial(&cc.group);
        assert_eq!(relations_from_tables(&cc.group, &[trivial]).total(), 0);
    }

    #[test]
    fn free_reduction_counts() {
        let cc = unip(2);
        let g = &cc.group;
        let k0 = nontrivial(&cc, 0);
        let k1 = nontrivial(&cc, 1);
        let s = letter(&cc, 0, k0[0]);
        let t1 = k1.iter().copied().find(|&x| !cc.subgroups[0].contains(x)).unwrap();
        let t = letter(&cc, 1, t1);
        let w = Word::new(vec![s, s.inverse(g)]);
        let (r, l) = free_reduce(g, &w);
        assert!(r.is_empty());
        assert_eq!(l.free_reductions, 1);
        let w = Word::new(vec![s, t, t.inverse(g), s.inverse(g)]);
        let (r, l) = free_reduce(g, &w);
        assert!(r.is_empty());
        assert_eq!(l.free_reductions, 2);
        let w = Word::new(vec![s, t]);
        let (r, l) = free_reduce(g, &w);
        assert_eq!(r, w);
        assert_eq!(l.free_reductions, 0);
    }

    #[test]
    fn relation_round_trip() {
        let cc = unip(2);
        let g = &cc.group;
        let rs = relations_from_tables(g, &cc.subgroups);
        let (a, b, c) = rs.triples[0][0];
        let w = Word::new(vec![letter(&cc, 0, a), letter(&cc, 0, b)]);
        let v = apply_relation(g, &rs, &w, 0, 0, (a, b, c), Orientation::Forward).unwrap();
        assert_eq!(v.letters, vec![letter(&cc, 0, g.inverse(c))]);
        let back = apply_relation(g, &rs, &v, 0, 0, (a, b, c), Orientation::Backward).unwrap();
        assert_eq!(back, w);
        assert!(matches!(
            apply_relation(g, &rs, &v, 0, 0, (a, b, c), Orientation::Forward),
            Err(PresentationError::NoMatch { .. })
        ));
    }

    #[test]
    fn synthetic_traces_charge_exactly() {
        let cc = unip(2);
        let g = &cc.group;
        let e = g.identity();
        let k0 = nontrivial(&cc, 0);
        let s = letter(&cc, 0, k0[0]);
        let t = letter(&cc, 0, k0[1]);
        // length 2, no moves
        let w = Word::new(vec![s, s.inverse(g)]);
        assert_eq!(sfill1_upper(g, &cc.subgroups, &w, &[]).unwrap().trace_bound, 1);
        // free reduction at m = 4
        let w = Word::new(vec![s, t, t.inverse(g), s.inverse(g)]);
        let b = sfill1_upper(g, &cc.subgroups, &w, &[Move::Free { at: 1 }]).unwrap();
        assert_eq!(b.trace_bound, 6 + 4 * 3 + 1);
        // identity reduction at m = 3
        let w = Word::new(vec![s, letter(&cc, 1, e), s.inverse(g)]);
        let b = sfill1_upper(g, &cc.subgroups, &w, &[Move::Identity { at: 1 }]).unwrap();
        assert_eq!(b.trace_bound, 4 + 2 * 2 + 1);
        // merge at m = 3
        let st = g.mul(s.element, t.element);
        let w = Word::new(vec![s, t, letter(&cc, 0, g.inverse(st))]);
        let b = sfill1_upper(g, &cc.subgroups, &w, &[Move::Merge { at: 0, subgroup: 0 }]).unwrap();
        assert_eq!(b.trace_bound, 4 + 2 * 2 + 1);
        // split at m = 2 then two merges
        let w = Word::new(vec![letter(&cc, 0, st), letter(&cc, 0, g.inverse(st))]);
        let trace = [
            Move::Split {
                at: 0,
                subgroup: 0,
                left: s.element,
            },
            Move::Merge { at: 0, subgroup: 0 },
        ];
        let b = sfill1_upper(g, &cc.subgroups, &w, &trace).unwrap();
        assert_eq!(b.trace_bound, 2 + (4 + 2 * 2) + 1);
        assert_eq!(b.d, 2);
        // invalid
        assert!(matches!(
            sfill1_upper(g, &cc.subgroups, &w, &[Move::Free { at: 0 }, Move::Free { at: 0 }]),
            Err(PresentationError::TraceInvalid { .. })
        ));
        let long = Word::new(vec![s, t, t.inverse(g), s.inverse(g)]);
        assert!(matches!(
            sfill1_upper(g, &cc.subgroups, &long, &[]),
            Err(PresentationError::TraceInvalid { index: 0, .. })
        ));
    }

    #[test]
    fn path_words_replay_and_ignore_translation() {
        let cc = unip(3);
        let g = &cc.group;
        let tri = cc.complex.faces(2);
        for (idx, f) in tri.iter().enumerate().step_by(97).take(12) {
            let path: Vec<Vertex> = f.vertices().to_vec();
            let pw = path_to_word(&cc, &path).unwrap();
            assert!(replay_path(&cc, &path, &pw));
            let h = (idx as u32 * 31) % g.len() as u32;
            let moved: Vec<Vertex> = path.iter().map(|&v| cc.act(h, v)).collect();
            assert_eq!(path_to_word(&cc, &moved).unwrap().word, pw.word);
            let trace = triangle_trace(&cc, &pw.word).unwrap();
            let b = sfill1_upper(g, &cc.subgroups, &pw.word, &trace).unwrap();
            assert!(b.within_ceiling);
        }
        let edge = cc.complex.faces(1)[5].vertices();
        let pw = path_to_word(&cc, edge).unwrap();
        assert_eq!(pw.word.len(), 2);
        assert!(pw.word.is_trivial(g));
    }

    #[test]
    fn broken_path_rejected() {
        let cc = unip(2);
        let v0 = cc.vertex_of(0, 0);
        let far = (0..cc.complex.count(0) as u32)
            .find(|&v| v != v0 && cc.coset_of_vertex(v).0 == 0)
            .unwrap();
        assert!(matches!(
            path_to_word(&cc, &[v0, far]),
            Err(PresentationError::PathBroken { .. })
        ));
    }

    #[test]
    fn steinberg_two_letter_example() {
        let ring = Ring::field(5).unwrap();
        let a = ring.constant(2);
        let b = ring.constant(3);
        let w = vec![Elementary::new(2, 3, b.clone()), Elementary::new(1, 2, a.clone())];
        let (nf, ledger) = steinberg_normal_form(&w).unwrap();
        let roots: Vec<_> = nf.iter().map(|l| l.root).collect();
        assert_eq!(roots, vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(nf[1].coeff, a.mul(&b).unwrap().neg());
        assert_eq!(ledger.relation_applications, 2);
        let space = MatrixSpace::new(ring, 3);
        assert_eq!(evaluate_elementary(&space, &w).unwrap(), evaluate_elementary(&space, &nf).unwrap());
        let (again, l2) = steinberg_normal_form(&nf).unwrap();
        assert_eq!(again, nf);
        assert_eq!(l2.relation_applications, 0);
    }

    #[test]
    fn steinberg_schedules_agree() {
        let alphabet = field_alphabet(3, 3).unwrap();
        let space = MatrixSpace::new(Ring::field(3).unwrap(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let len = rng.random_range(0..12);
            let w: Vec<Elementary> = (0..len)
                .map(|_| alphabet[rng.random_range(0..alphabet.len())].clone())
                .collect();
            let (a, _) = steinberg_normal_form(&w).unwrap();
            let (b, _) = steinberg_normal_form_random(&w, &mut rng).unwrap();
            assert_eq!(a, b);
            assert_eq!(evaluate_elementary(&space, &w).unwrap(), evaluate_elementary(&space, &a).unwrap());
        }
    }

    #[test]
    fn residual_relations_hold() {
        let r = verify_residual_relations(Family::Field, 3, &[2, 3, 5]).unwrap();
        assert!(r.passed, "{:?}", r.entries);
        let r = verify_residual_relations(Family::Polynomial, 3, &[2]).unwrap();
        assert!(r.passed, "{:?}", r.entries);
    }

    #[test]
    fn counts_do_not_depend_on_q() {
        for s in q_independence(3, &[3, 5, 7]).unwrap() {
            assert!(s.equal, "{s:?}");
        }
    }

    #[test]
    fn dehn_estimate_is_deterministic() {
        let alphabet = field_alphabet(3, 3).unwrap();
        let a = dehn_estimate(&alphabet, 15, 50, 7).unwrap();
        let b = dehn_estimate(&alphabet, 15, 50, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.max_area > 0 && a.estimated);
    }
}
