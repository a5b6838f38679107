//! Exact coboundary and cosystolic expansion constants, graph Cheeger
//! constants, and lower-bound certificates.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;
use crate::complex::{binomial, weights, ComplexError, SimplicialComplex, Vertex, WeightTable};
use crate::homology::{face_coboundary, gray_span, space_basis, ChainVector, Echelon, Extended, Space};
use crate::rational::Rational;
use crate::spectral::{certified_lambda2, SpectralError, WeightedGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("{what} needs 2^{log2} steps, above the budget of 2^{budget_log2}")]
    SearchSpaceTooLarge {
        what: &'static str,
        log2: usize,
        budget_log2: u32,
    },
    #[error("graph has {0} vertices; exhaustive cuts allow at most {MAX_CHEEGER_VERTICES}")]
    TooManyVertices(usize),
    #[error("graph is not edge-transitive (h = {h}, diameter = {diameter})")]
    NotEdgeTransitive { h: Rational, diameter: u32 },
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
    #[error("subgroups do not generate the group")]
    NotGenerating,
    #[error("graph is disconnected")]
    Disconnected,
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

pub type Result<T> = std::result::Result<T, ExpansionError>;

pub const MAX_CHEEGER_VERTICES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub classes_log2: u32,
    pub inner_log2: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            classes_log2: 20,
            inner_log2: 20,
        }
    }
}

/// Minimum ratio over the nonzero classes of `C^k / S`, with its witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientMin {
    pub value: Rational,
    pub witness: ChainVector,
    pub classes: u64,
}

#[derive(Clone)]
struct Candidate {
    num: u64,
    den: u64,
    witness: Bits,
}

impl Candidate {
    fn cmp(&self, other: &Candidate) -> Ordering {
        let a = self.num as u128 * other.den as u128;
        let b = other.num as u128 * self.den as u128;
        a.cmp(&b).then_with(|| self.witness.lex_cmp(&other.witness))
    }
}

fn weighted(bits: &Bits, counts: &[u64]) -> u64 {
    bits.iter_ones().map(|i| counts[i]).sum()
}

/// Least weight in `phi + span(basis)`, lexicographically least among ties.
fn class_min(phi: &Bits, basis: &[Bits], counts: &[u64]) -> (u64, Bits) {
    let mut cur = phi.clone();
    let mut w = weighted(&cur, counts);
    let mut best = (w, cur.clone());
    let d = basis.len();
    for step in 1u64..(1u64 << d) {
        let b = &basis[step.trailing_zeros() as usize];
        for i in b.iter_ones() {
            if cur.get(i) {
                w -= counts[i];
            } else {
                w += counts[i];
            }
        }
        cur.xor_assign(b);
        if w < best.0 || (w == best.0 && cur.lex_cmp(&best.1).is_lt()) {
            best = (w, cur.clone());
        }
    }
    best
}

fn quotient_min(
    x: &SimplicialComplex,
    w: &WeightTable,
    k: isize,
    subspace: &[ChainVector],
    budget: Budget,
) -> Result<Option<QuotientMin>> {
    let len = x.count(k);
    let mut ech = Echelon::new(len);
    for v in subspace {
        ech.insert(&v.bits);
    }
    let basis: Vec<Bits> = ech.rows().to_vec();
    let pivots: HashSet<usize> = ech.pivots().iter().copied().collect();
    let free: Vec<usize> = (0..len).filter(|i| !pivots.contains(i)).collect();
    if free.is_empty() {
        return Ok(None);
    }
    if free.len() > budget.classes_log2 as usize {
        return Err(ExpansionError::SearchSpaceTooLarge {
            what: "class enumeration",
            log2: free.len(),
            budget_log2: budget.classes_log2,
        });
    }
    if basis.len() > budget.inner_log2 as usize {
        return Err(ExpansionError::SearchSpaceTooLarge {
            what: "coset scan",
            log2: basis.len(),
            budget_log2: budget.inner_log2,
        });
    }
    let dcols: Vec<Bits> = free.iter().map(|&i| face_coboundary(x, k, i)).collect();
    let up_counts: Vec<u64> = if k < x.top_dim() {
        w.numerators(k + 1).to_vec()
    } else {
        Vec::new()
    };
    let counts = w.numerators(k);
    // d vanishes on the subspace, so w(dφ) is constant on classes
    for b in &basis {
        let mut db = Bits::zeros(up_counts.len());
        for i in b.iter_ones() {
            db.xor_assign(&face_coboundary(x, k, i));
        }
        assert!(db.is_zero(), "subspace is not inside the cocycles");
    }
    let f = free.len();
    let high = f.min(10);
    let low = f - high;
    let best = (0u64..(1u64 << high))
        .into_par_iter()
        .filter_map(|h| {
            let mut phi = Bits::zeros(len);
            let mut dphi = Bits::zeros(up_counts.len());
            for b in 0..high {
                if h >> b & 1 == 1 {
                    phi.flip(free[low + b]);
                    dphi.xor_assign(&dcols[low + b]);
                }
            }
            let mut best: Option<Candidate> = None;
            for step in 0u64..(1u64 << low) {
                if step > 0 {
                    let b = step.trailing_zeros() as usize;
                    phi.flip(free[b]);
                    dphi.xor_assign(&dcols[b]);
                } else if h == 0 {
                    continue;
                }
                let num = weighted(&dphi, &up_counts);
                let (den, witness) = class_min(&phi, &basis, counts);
                if cfg!(debug_assertions) && step < 4 {
                    let mut dw = Bits::zeros(up_counts.len());
                    for i in witness.iter_ones() {
                        dw.xor_assign(&face_coboundary(x, k, i));
                    }
                    debug_assert_eq!(weighted(&dw, &up_counts), num, "class constancy");
                }
                let c = Candidate { num, den, witness };
                if best.as_ref().is_none_or(|b| c.cmp(b).is_lt()) {
                    best = Some(c);
                }
            }
            best
        })
        .min_by(|a, b| a.cmp(b))
        .expect("at least one nonzero class");
    // w(dφ)/w(φ) = (num / D_{k+1}) / (den / D_k)
    let dk = w.denominator(k) as i64;
    let dk1 = if k < x.top_dim() { w.denominator(k + 1) as i64 } else { 1 };
    let value = Rational::new(best.num as i64 * dk, best.den as i64 * dk1);
    Ok(Some(QuotientMin {
        value,
        witness: ChainVector {
            dim: k,
            bits: best.witness,
        },
        classes: (1u64 << f) - 1,
    }))
}

/// `Exp^k_b`; `None` when `C^k = B^k`.
pub fn exp_b(x: &SimplicialComplex, k: isize, budget: Budget) -> Result<Option<QuotientMin>> {
    let w = weights(x)?;
    let b = space_basis(x, Space::Coboundaries, k);
    quotient_min(x, &w, k, &b.basis, budget)
}

/// `Exp^k_b` straight from the definition: every cochain is compared with
/// every coboundary. Only for complexes with at most 16 faces in `X(k)`.
pub fn exp_b_by_definition(x: &SimplicialComplex, k: isize) -> Result<Option<Rational>> {
    let len = x.count(k);
    if len > 16 {
        return Err(ExpansionError::SearchSpaceTooLarge {
            what: "definitional scan",
            log2: len,
            budget_log2: 16,
        });
    }
    let w = weights(x)?;
    let basis: Vec<Bits> = space_basis(x, Space::Coboundaries, k)
        .basis
        .into_iter()
        .map(|c| c.bits)
        .collect();
    let mut coboundaries = Vec::new();
    gray_span(&basis, len, |v, _| coboundaries.push(v.clone()));
    let mut best: Option<Rational> = None;
    for mask in 1u64..(1u64 << len) {
        let phi = Bits::from_mask(len, mask);
        let dist = coboundaries
            .iter()
            .map(|b| w.set_weight(k, &phi.xor(b)))
            .min()
            .expect("zero is a coboundary");
        if dist == Rational::from_integer(0) {
            continue;
        }
        let num = if k < x.top_dim() {
            let mut dphi = Bits::zeros(x.count(k + 1));
            for i in phi.iter_ones() {
                dphi.xor_assign(&face_coboundary(x, k, i));
            }
            w.set_weight(k + 1, &dphi)
        } else {
            Rational::from_integer(0)
        };
        let r = num / dist;
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    }
    Ok(best)
}

/// `Exp^k_z`; `None` when `C^k = Z^k`.
pub fn exp_z(x: &SimplicialComplex, k: isize, budget: Budget) -> Result<Option<QuotientMin>> {
    let w = weights(x)?;
    let z = space_basis(x, Space::Cocycles, k);
    quotient_min(x, &w, k, &z.basis, budget)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightValue {
    Finite(#[serde(with = "crate::rational::text")] Rational),
    Infinite,
}

/// `Sys^k`: least weight of a cocycle that is not a coboundary.
pub fn cosys_weight(x: &SimplicialComplex, k: isize, budget: Budget) -> Result<(WeightValue, Option<ChainVector>)> {
    let w = weights(x)?;
    let z = space_basis(x, Space::Cocycles, k);
    let b = space_basis(x, Space::Coboundaries, k).echelon();
    if z.dim() == b.rank() {
        return Ok((WeightValue::Infinite, None));
    }
    let limit = budget.classes_log2 + budget.inner_log2;
    if z.dim() > limit as usize {
        return Err(ExpansionError::SearchSpaceTooLarge {
            what: "cocycle scan",
            log2: z.dim(),
            budget_log2: limit,
        });
    }
    let len = x.count(k);
    let counts = w.numerators(k);
    let basis: Vec<Bits> = z.basis.iter().map(|c| c.bits.clone()).collect();
    let residues: Vec<Bits> = basis.iter().map(|v| b.reduce(v).0).collect();
    let mut res = Bits::zeros(len);
    let mut last = 0u64;
    let mut best: Option<(u64, Bits)> = None;
    gray_span(&basis, len, |v, code| {
        let changed = code ^ last;
        last = code;
        if changed != 0 {
            res.xor_assign(&residues[changed.trailing_zeros() as usize]);
        }
        if res.is_zero() {
            return;
        }
        let wt = weighted(v, counts);
        if best
            .as_ref()
            .is_none_or(|(bw, bv)| wt < *bw || (wt == *bw && v.lex_cmp(bv).is_lt()))
        {
            best = Some((wt, v.clone()));
        }
    });
    let (wt, v) = best.expect("nontrivial class");
    Ok((
        WeightValue::Finite(Rational::new(wt as i64, w.denominator(k) as i64)),
        Some(ChainVector { dim: k, bits: v }),
    ))
}

/// `h(X)` with the witness side `A` (vertex ids).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cheeger {
    #[serde(with = "crate::rational::text")]
    pub h: Rational,
    pub witness: Vec<Vertex>,
    pub cut: u64,
    pub side_weight: u64,
}

fn lex_mask_cmp(a: u64, b: u64) -> Ordering {
    let d = a ^ b;
    if d == 0 {
        Ordering::Equal
    } else if a >> d.trailing_zeros() & 1 == 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Exact Cheeger constant over all cuts; `w(U)` is the degree sum of `U`.
pub fn cheeger_graph(g: &SimplicialComplex) -> Result<Cheeger> {
    let ids = g.vertex_ids();
    let n = ids.len();
    if n > MAX_CHEEGER_VERTICES {
        return Err(ExpansionError::TooManyVertices(n));
    }
    if n < 2 {
        return Err(ExpansionError::Disconnected);
    }
    let adj = g.adjacency();
    let masks: Vec<u64> = adj
        .iter()
        .map(|l| l.iter().fold(0u64, |m, &v| m | 1 << v))
        .collect();
    let deg: Vec<u64> = adj.iter().map(|l| l.len() as u64).collect();
    let total: u64 = deg.iter().sum();
    // vertex 0 stays outside A; A ranges over nonempty subsets of 1..n
    let free = n - 1;
    let high = free.min(8);
    let low = free - high;
    let better = |a: &(u64, u64, u64), b: &(u64, u64, u64)| {
        let x = a.0 as u128 * b.1 as u128;
        let y = b.0 as u128 * a.1 as u128;
        x.cmp(&y).then_with(|| lex_mask_cmp(a.2, b.2))
    };
    let best = (0u64..(1u64 << high))
        .into_par_iter()
        .filter_map(|h| {
            let mut set = 0u64;
            let mut cut = 0u64;
            let mut wa = 0u64;
            let toggle = |v: usize, set: &mut u64, cut: &mut u64, wa: &mut u64| {
                let inside = (masks[v] & *set).count_ones() as u64;
                if *set >> v & 1 == 1 {
                    *set &= !(1 << v);
                    *cut = *cut + 2 * inside - deg[v];
                    *wa -= deg[v];
                } else {
                    *cut = *cut + deg[v] - 2 * inside;
                    *set |= 1 << v;
                    *wa += deg[v];
                }
            };
            for b in 0..high {
                if h >> b & 1 == 1 {
                    toggle(1 + low + b, &mut set, &mut cut, &mut wa);
                }
            }
            let mut best: Option<(u64, u64, u64)> = None;
            for step in 0u64..(1u64 << low) {
                if step > 0 {
                    toggle(1 + step.trailing_zeros() as usize, &mut set, &mut cut, &mut wa);
                }
                if set == 0 {
                    continue;
                }
                let den = wa.min(total - wa);
                if den == 0 {
                    continue;
                }
                let c = (cut, den, set);
                if best.as_ref().is_none_or(|b| better(&c, b).is_lt()) {
                    best = Some(c);
                }
            }
            best
        })
        .min_by(|a, b| better(a, b))
        .ok_or(ExpansionError::Disconnected)?;
    Ok(Cheeger {
        h: Rational::new(best.0 as i64, best.1 as i64),
        witness: (0..n).filter(|&i| best.2 >> i & 1 == 1).map(|i| ids[i]).collect(),
        cut: best.0,
        side_weight: best.1,
    })
}

/// Graph diameter of the 1-skeleton.
pub fn diameter(g: &SimplicialComplex) -> Result<u32> {
    crate::cones::radius_and_diameter(g)
        .map(|(_, d)| d)
        .ok_or(ExpansionError::Disconnected)
}

/// Whether the group generated by `perms` (vertex-index permutations) is
/// transitive on edges.
pub fn edge_transitive_under(g: &SimplicialComplex, perms: &[Vec<usize>]) -> bool {
    let edges: HashSet<(usize, usize)> = edge_list(g).into_iter().collect();
    let Some(&first) = edges.iter().min() else {
        return true;
    };
    let mut seen = HashSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some((a, b)) = queue.pop_front() {
        for p in perms {
            let (x, y) = (p[a], p[b]);
            let e = (x.min(y), x.max(y));
            if !edges.contains(&e) {
                return false;
            }
            if seen.insert(e) {
                queue.push_back(e);
            }
        }
    }
    seen.len() == edges.len()
}

fn edge_list(g: &SimplicialComplex) -> Vec<(usize, usize)> {
    let adj = g.adjacency();
    let mut out = Vec::new();
    for (a, l) in adj.iter().enumerate() {
        for &b in l {
            if a < b {
                out.push((a, b));
            }
        }
    }
    out
}

/// Searches for an automorphism sending edge `(a, b)` to `(c, d)` in that orientation.
pub fn find_edge_automorphism(adj: &[Vec<usize>], from: (usize, usize), to: (usize, usize)) -> Option<Vec<usize>> {
    let n = adj.len();
    let sets: Vec<HashSet<usize>> = adj.iter().map(|l| l.iter().copied().collect()).collect();
    // order: breadth-first from `from.0`, then anything left
    let mut order = vec![from.0, from.1];
    let mut placed = vec![false; n];
    placed[from.0] = true;
    placed[from.1] = true;
    let mut i = 0;
    while order.len() < n {
        if i < order.len() {
            for &v in &adj[order[i]] {
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
            i += 1;
        } else {
            let v = (0..n).find(|&v| !placed[v]).unwrap();
            placed[v] = true;
            order.push(v);
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        pos: usize,
        order: &[usize],
        adj: &[Vec<usize>],
        sets: &[HashSet<usize>],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        fixed: (usize, usize),
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        let candidates: Vec<usize> = match pos {
            0 => vec![fixed.0],
            1 => vec![fixed.1],
            _ => (0..adj.len()).filter(|&c| !used[c]).collect(),
        };
        for c in candidates {
            if used[c] || adj[c].len() != adj[v].len() {
                continue;
            }
            let ok = order[..pos].iter().all(|&u| sets[v].contains(&u) == sets[c].contains(&map[u]));
            if !ok {
                continue;
            }
            map[v] = c;
            used[c] = true;
            if rec(pos + 1, order, adj, sets, map, used, fixed) {
                return true;
            }
            used[c] = false;
            map[v] = usize::MAX;
        }
        false
    }
    rec(0, &order, adj, &sets, &mut map, &mut used, to).then_some(map)
}

/// Edge-transitivity of the full automorphism group.
pub fn is_edge_transitive(g: &SimplicialComplex) -> bool {
    let adj = g.adjacency();
    let edges = edge_list(g);
    let Some(&first) = edges.first() else {
        return true;
    };
    let key = |(a, b): (usize, usize)| {
        let (x, y) = (adj[a].len(), adj[b].len());
        (x.min(y), x.max(y))
    };
    if edges.iter().any(|&e| key(e) != key(first)) {
        return false;
    }
    edges.par_iter().all(|&(c, d)| {
        find_edge_automorphism(&adj, first, (c, d)).is_some()
            || find_edge_automorphism(&adj, first, (d, c)).is_some()
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChungReport {
    #[serde(with = "crate::rational::text")]
    pub h: Rational,
    pub diameter: u32,
    #[serde(with = "crate::rational::text")]
    pub bound: Rational,
    pub holds: bool,
}

/// `h(X) ≥ 1/(2D)` on an edge-transitive graph; `perms` may supply the action.
pub fn verify_chung_bound(g: &SimplicialComplex, perms: Option<&[Vec<usize>]>) -> Result<ChungReport> {
    let c = cheeger_graph(g)?;
    let d = diameter(g)?;
    let transitive = match perms {
        Some(p) => edge_transitive_under(g, p),
        None => is_edge_transitive(g),
    };
    if !transitive {
        return Err(ExpansionError::NotEdgeTransitive { h: c.h, diameter: d });
    }
    let bound = Rational::new(1, 2 * d.max(1) as i64);
    Ok(ChungReport {
        h: c.h,
        diameter: d,
        bound,
        holds: c.h >= bound,
    })
}

/// `p(x, y) = 16y² + 6x² + 20xy + 24y + 10x + 1`.
pub fn p_poly(x: u64, y: u64) -> u64 {
    16 * y * y + 6 * x * x + 20 * x * y + 24 * y + 10 * x + 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub theorem: String,
    pub k: isize,
    #[serde(with = "crate::rational::text")]
    pub value: Rational,
    pub hypotheses: BTreeMap<String, String>,
    /// Compared against the exact value or a certified lower bound on it.
    pub holds: Option<bool>,
}

/// What is known about an expansion constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Known {
    Exact(#[serde(with = "crate::rational::text")] Rational),
    /// A certified interval `[lower, upper]`.
    Bracket {
        #[serde(with = "crate::rational::text")]
        lower: Rational,
        #[serde(with = "crate::rational::text")]
        upper: Rational,
    },
    NotDefined,
    Unknown,
}

impl Known {
    /// Whether `bound ≤ value` is established.
    pub fn dominates(&self, bound: Rational) -> Option<bool> {
        match self {
            Known::Exact(v) => Some(*v >= bound),
            Known::Bracket { lower, upper } => {
                if *lower >= bound {
                    Some(true)
                } else if *upper < bound {
                    Some(false)
                } else {
                    None
                }
            }
            Known::NotDefined | Known::Unknown => None,
        }
    }
}

/// `Exp^k_b ≥ 1 / (C(n+1, k+1) · Crad_k)`.
pub fn certificate_theorem_crad(
    n: isize,
    k: isize,
    strongly_symmetric: bool,
    crad_upper: Extended,
    known: &Known,
) -> Result<BoundRecord> {
    if !strongly_symmetric {
        return Err(ExpansionError::HypothesisUnmet(
            "no group action transitive on top faces".into(),
        ));
    }
    let c = binomial((n + 1) as u64, (k + 1) as u64) as i64;
    let value = match crad_upper {
        Extended::Finite(v) if v > 0 => Rational::new(1, c * v as i64),
        Extended::Finite(_) => Rational::from_integer(0),
        Extended::Infinite => Rational::from_integer(0),
    };
    let mut hypotheses = BTreeMap::new();
    hypotheses.insert("strongly_symmetric".into(), "certified".into());
    hypotheses.insert("crad_upper".into(), crad_upper.to_string());
    Ok(BoundRecord {
        theorem: "crad".into(),
        k,
        value,
        hypotheses,
        holds: known.dominates(value),
    })
}

/// Bounds for `k = 0` and `k = 1` from `N₀′` and a Dehn estimate at `m = 2N₀′ + 1`.
pub fn certificate_theorem_n0n1(
    n: isize,
    bounded_generation: Option<u32>,
    dehn_estimate: Option<(u64, bool)>,
    known0: &Known,
    known1: &Known,
) -> Result<Vec<BoundRecord>> {
    let diam = bounded_generation.ok_or(ExpansionError::NotGenerating)?;
    let n0p = diam as u64 + 1;
    let mut h0 = BTreeMap::new();
    h0.insert("bounded_generation_diameter".into(), diam.to_string());
    h0.insert("n0_prime".into(), n0p.to_string());
    let v0 = Rational::new(1, ((n + 1) as u64 * n0p) as i64);
    let mut out = vec![BoundRecord {
        theorem: "n0".into(),
        k: 0,
        value: v0,
        hypotheses: h0,
        holds: known0.dominates(v0),
    }];
    let m = 2 * n0p + 1;
    let mut h1 = BTreeMap::new();
    h1.insert("n0_prime".into(), n0p.to_string());
    h1.insert("m".into(), m.to_string());
    match dehn_estimate {
        Some((y, exact)) => {
            h1.insert("dehn".into(), y.to_string());
            h1.insert("dehn_status".into(), if exact { "exact" } else { "estimated" }.into());
            let p = p_poly(m, y);
            h1.insert("p".into(), p.to_string());
            let c = binomial((n + 1) as u64, 2);
            let v1 = Rational::new(1, (c * p) as i64);
            out.push(BoundRecord {
                theorem: "n1".into(),
                k: 1,
                value: v1,
                hypotheses: h1,
                holds: known1.dominates(v1),
            });
        }
        None => {
            h1.insert("dehn_status".into(), "unavailable".into());
        }
    }
    Ok(out)
}

/// Exact value within budget, else a certified bracket for `k = 0`.
pub fn exp0_known(x: &SimplicialComplex, budget: Budget) -> Result<Known> {
    match exp_b(x, 0, budget) {
        Ok(Some(q)) => Ok(Known::Exact(q.value)),
        Ok(None) => Ok(Known::NotDefined),
        Err(ExpansionError::SearchSpaceTooLarge { .. }) => Ok(match exp0_bracket(x)? {
            Some(b) => Known::Bracket {
                lower: b.lower,
                upper: b.upper,
            },
            None => Known::Unknown,
        }),
        Err(e) => Err(e),
    }
}

/// Interval for `Exp^0_b` from a certified walk eigenvalue bound (lower)
/// and an explicit cut (upper).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exp0Bracket {
    #[serde(with = "crate::rational::text")]
    pub lower: Rational,
    #[serde(with = "crate::rational::text")]
    pub upper: Rational,
    #[serde(with = "crate::rational::text")]
    pub mu: Rational,
    pub lambda2: f64,
    pub cut: Vec<Vertex>,
}

/// `Exp^0_b = 2 h_W` for the 1-skeleton weighted by top-face counts, and
/// `h_W ≥ (1 − λ₂)/2`.
pub fn exp0_bracket(x: &SimplicialComplex) -> Result<Option<Exp0Bracket>> {
    let g = WeightedGraph::from_complex(x);
    let Some(cert) = certified_lambda2(&g)? else {
        return Ok(None);
    };
    let (upper, cut) = best_cut(&g)?;
    Ok(Some(Exp0Bracket {
        lower: Rational::from_integer(1) - cert.mu,
        upper,
        mu: cert.mu,
        lambda2: cert.lambda2_float,
        cut,
    }))
}

/// `2 W(A, Ā) / min(D(A), D(Ā))` for a set given by vertex indices.
pub fn cut_ratio(g: &WeightedGraph, side: &[bool]) -> Option<Rational> {
    let d = g.degrees();
    let da: u64 = (0..g.len()).filter(|&i| side[i]).map(|i| d[i]).sum();
    let total: u64 = d.iter().sum();
    let den = da.min(total - da);
    if den == 0 {
        return None;
    }
    let cut: u64 = g.edges.iter().filter(|e| side[e.0] != side[e.1]).map(|e| e.2).sum();
    Some(Rational::new(2 * cut as i64, den as i64))
}

/// Sweep cut along the second eigenvector, then single-vertex moves.
fn best_cut(g: &WeightedGraph) -> Result<(Rational, Vec<Vertex>)> {
    let m = g.normalized()?;
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let d = g.degrees();
    let n = g.len();
    let mut best: Option<(Rational, Vec<bool>)> = None;
    let consider = |side: Vec<bool>, best: &mut Option<(Rational, Vec<bool>)>| {
        if let Some(r) = cut_ratio(g, &side) {
            if best.as_ref().is_none_or(|(b, _)| r < *b) {
                *best = Some((r, side));
            }
        }
    };
    for &col in idx.iter().skip(1).take(4) {
        let f: Vec<f64> = (0..n)
            .map(|i| eig.eigenvectors[(i, col)] / (d[i] as f64).sqrt())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
        let mut side = vec![false; n];
        for &v in order.iter().take(n - 1) {
            side[v] = true;
            consider(side.clone(), &mut best);
        }
    }
    let (mut r, mut side) = best.ok_or(ExpansionError::Disconnected)?;
    loop {
        let mut improved = false;
        for v in 0..n {
            side[v] = !side[v];
            match cut_ratio(g, &side) {
                Some(s) if s < r => {
                    r = s;
                    improved = true;
                }
                _ => side[v] = !side[v],
            }
        }
        if !improved {
            break;
        }
    }
    let cut = (0..n).filter(|&i| side[i]).map(|i| g.vertices[i]).collect();
    Ok((r, cut))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkExpansion {
    pub face: Vec<Vertex>,
    pub k: isize,
    pub status: String,
    #[serde(with = "crate::rational::opt_text")]
    pub exp_b: Option<Rational>,
    pub meets_epsilon: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checklist {
    pub n: isize,
    pub full_scale: bool,
    pub lambda: f64,
    #[serde(with = "crate::rational::text")]
    pub epsilon_prime: Rational,
    pub local_spectral: crate::spectral::SweepReport,
    pub local_spectral_holds: bool,
    pub links: Vec<LinkExpansion>,
    /// `Some(true)` only when every link was decided and meets `ε′`.
    pub coboundary_links_hold: Option<bool>,
}

/// Hypotheses of the cosystolic expansion criterion: λ-local spectral
/// expansion and ε′-coboundary expansion of every proper link.
pub fn cosystolic_checklist(x: &SimplicialComplex, epsilon_prime: Rational, lambda: f64, budget: Budget) -> Checklist {
    let n = x.top_dim();
    let sweep = crate::spectral::local_spectral_sweep(x, lambda);
    let faces: Vec<_> = (0..=n - 2).flat_map(|d| x.faces(d).iter().cloned()).collect();
    let links: Vec<LinkExpansion> = faces
        .par_iter()
        .flat_map_iter(|s| {
            let link = x.link(s).expect("face");
            (0..link.top_dim())
                .map(|k| {
                    let r = exp_b(&link, k, budget);
                    let (status, v) = match r {
                        Ok(Some(q)) => ("exact".to_string(), Some(q.value)),
                        Ok(None) => ("not_defined".to_string(), None),
                        Err(ExpansionError::SearchSpaceTooLarge { .. }) => ("unknown".to_string(), None),
                        Err(e) => (format!("error: {e}"), None),
                    };
                    LinkExpansion {
                        face: s.vertices().to_vec(),
                        k,
                        status,
                        exp_b: v,
                        meets_epsilon: v.map(|v| v >= epsilon_prime),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let coboundary_links_hold = if links.iter().any(|l| l.meets_epsilon == Some(false)) {
        Some(false)
    } else if links.iter().all(|l| l.meets_epsilon == Some(true)) {
        Some(true)
    } else {
        None
    };
    Checklist {
        n,
        full_scale: n >= 3,
        lambda,
        epsilon_prime,
        local_spectral_holds: sweep.local_spectral_expander,
        local_spectral: sweep,
        links,
        coboundary_links_hold,
    }
}

/// Report for one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub k: isize,
    #[serde(with = "crate::rational::opt_text")]
    pub exp_b: Option<Rational>,
    #[serde(with = "crate::rational::opt_text")]
    pub exp_z: Option<Rational>,
    pub sys_weight: Option<WeightValue>,
    pub witness: Option<Vec<Vec<Vertex>>>,
    pub status: String,
    pub bounds: Vec<BoundRecord>,
}

pub fn expansion_report(x: &SimplicialComplex, k: isize, budget: Budget) -> Result<ExpansionReport> {
    let b = exp_b(x, k, budget);
    let (exp_b_v, witness, status) = match b {
        Ok(Some(q)) => (
            Some(q.value),
            Some(q.witness.faces(x).map(|s| s.vertices().to_vec()).collect()),
            "exact".to_string(),
        ),
        Ok(None) => (None, None, "not_defined".to_string()),
        Err(ExpansionError::SearchSpaceTooLarge { .. }) => (None, None, "too_large".to_string()),
        Err(e) => return Err(e),
    };
    let exp_z_v = match exp_z(x, k, budget) {
        Ok(Some(q)) => Some(q.value),
        _ => None,
    };
    if let (Some(b), Some(z)) = (exp_b_v, exp_z_v) {
        if b > Rational::from_integer(0) {
            assert_eq!(b, z, "positive coboundary expansion forces Z^k = B^k");
        }
    }
    let sys_weight = cosys_weight(x, k, budget).ok().map(|r| r.0);
    Ok(ExpansionReport {
        k,
        exp_b: exp_b_v,
        exp_z: exp_z_v,
        sys_weight,
        witness,
        status,
        bounds: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{complete_graph, cycle_graph, graph, tetrahedron_boundary, torus7};

    #[test]
    fn cheeger_small() {
        assert_eq!(cheeger_graph(&complete_graph(4)).unwrap().h, Rational::new(2, 3));
        assert_eq!(cheeger_graph(&graph(2, &[(0, 1)])).unwrap().h, Rational::from_integer(1));
        assert_eq!(cheeger_graph(&cycle_graph(6)).unwrap().h, Rational::new(1, 3));
    }

    #[test]
    fn edge_exp_is_twice_cheeger() {
        let e = graph(2, &[(0, 1)]);
        let q = exp_b(&e, 0, Budget::default()).unwrap().unwrap();
        assert_eq!(q.value, Rational::from_integer(2));
        let c6 = cycle_graph(6);
        let q = exp_b(&c6, 0, Budget::default()).unwrap().unwrap();
        assert_eq!(q.value, Rational::new(2, 3));
    }

    #[test]
    fn sphere_expansion() {
        let x = tetrahedron_boundary();
        let q = exp_b(&x, 0, Budget::default()).unwrap().unwrap();
        let z = exp_z(&x, 0, Budget::default()).unwrap().unwrap();
        assert_eq!(q.value, z.value);
        assert!(q.value > Rational::from_integer(0));
        assert_eq!(cosys_weight(&x, 1, Budget::default()).unwrap().0, WeightValue::Infinite);
    }

    #[test]
    fn torus_cosystoles() {
        let t = torus7();
        let b = exp_b(&t, 1, Budget::default()).unwrap().unwrap();
        assert_eq!(b.value, Rational::from_integer(0));
        let z = exp_z(&t, 1, Budget::default()).unwrap().unwrap();
        assert!(z.value > Rational::from_integer(0));
        let (s, _) = cosys_weight(&t, 1, Budget::default()).unwrap();
        assert!(matches!(s, WeightValue::Finite(_)));
    }

    #[test]
    fn polynomial() {
        assert_eq!(p_poly(1, 1), 77);
    }

    #[test]
    fn chung() {
        let r = verify_chung_bound(&cycle_graph(6), None).unwrap();
        assert_eq!((r.h, r.diameter, r.holds), (Rational::new(1, 3), 3, true));
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert!(is_edge_transitive(&path));
        let star_plus = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]);
        assert!(matches!(
            verify_chung_bound(&star_plus, None),
            Err(ExpansionError::NotEdgeTransitive { .. })
        ));
    }
}
