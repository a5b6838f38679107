//! F2 chains, boundary and coboundary maps, cycle and boundary spaces,
//! systoles and minimal fillings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;
use crate::complex::{Simplex, SimplicialComplex};

/// Default bound on exhaustively scanned vectors.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("chain of dimension {got} where {expected} was expected")]
    DimMismatch { expected: isize, got: isize },
    #[error("search over 2^{dim} vectors exceeds the budget of {budget}")]
    SearchSpaceTooLarge { dim: usize, budget: u64 },
    #[error("chain is not a boundary")]
    NoFilling,
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("dimension {0} is out of range")]
    OutOfRange(isize),
}

pub type Result<T> = std::result::Result<T, HomologyError>;

/// A k-chain or k-cochain over the sorted face list of `X(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainVector {
    pub dim: isize,
    pub bits: Bits,
}

impl ChainVector {
    pub fn zero(x: &SimplicialComplex, dim: isize) -> ChainVector {
        ChainVector {
            dim,
            bits: Bits::zeros(x.count(dim)),
        }
    }

    pub fn from_indices(x: &SimplicialComplex, dim: isize, idx: impl IntoIterator<Item = usize>) -> ChainVector {
        ChainVector {
            dim,
            bits: Bits::from_indices(x.count(dim), idx),
        }
    }

    pub fn from_faces<'a>(x: &SimplicialComplex, dim: isize, faces: impl IntoIterator<Item = &'a Simplex>) -> ChainVector {
        let idx = faces
            .into_iter()
            .map(|s| x.index_of(s).expect("face of the complex"));
        Self::from_indices(x, dim, idx)
    }

    pub fn face(x: &SimplicialComplex, s: &Simplex) -> ChainVector {
        Self::from_faces(x, s.dim(), [s])
    }

    pub fn all(x: &SimplicialComplex, dim: isize) -> ChainVector {
        ChainVector {
            dim,
            bits: Bits::ones(x.count(dim)),
        }
    }

    pub fn size(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn add(&self, other: &ChainVector) -> ChainVector {
        assert_eq!(self.dim, other.dim);
        ChainVector {
            dim: self.dim,
            bits: self.bits.xor(&other.bits),
        }
    }

    pub fn add_assign(&mut self, other: &ChainVector) {
        assert_eq!(self.dim, other.dim);
        self.bits.xor_assign(&other.bits);
    }

    /// φ(A) for a cochain φ and a chain A of the same dimension.
    pub fn eval(&self, chain: &ChainVector) -> bool {
        assert_eq!(self.dim, chain.dim);
        self.bits.dot(&chain.bits)
    }

    pub fn faces<'a>(&'a self, x: &'a SimplicialComplex) -> impl Iterator<Item = &'a Simplex> + 'a {
        let fs = x.faces(self.dim);
        self.bits.iter_ones().map(move |i| &fs[i])
    }
}

fn check_dim(v: &ChainVector, k: isize) -> Result<()> {
    if v.dim != k {
        return Err(HomologyError::DimMismatch {
            expected: k,
            got: v.dim,
        });
    }
    Ok(())
}

/// `∂_k`; `∂_0` sends every vertex to the ∅-face and `∂_{-1} = 0`.
pub fn boundary(x: &SimplicialComplex, k: isize, a: &ChainVector) -> Result<ChainVector> {
    check_dim(a, k)?;
    let mut out = ChainVector::zero(x, k - 1);
    if k <= -1 {
        return Ok(out);
    }
    for i in a.bits.iter_ones() {
        for &f in x.facet_indices(k, i) {
            out.bits.flip(f);
        }
    }
    Ok(out)
}

/// `d_k`; `(d_k φ)(σ)` is the parity of φ over the facets of σ.
pub fn coboundary(x: &SimplicialComplex, k: isize, phi: &ChainVector) -> Result<ChainVector> {
    check_dim(phi, k)?;
    let mut out = ChainVector::zero(x, k + 1);
    if k == -1 {
        if phi.bits.get(0) {
            out.bits = Bits::ones(x.count(0));
        }
        return Ok(out);
    }
    for i in phi.bits.iter_ones() {
        for &c in x.cofacet_indices(k, i) {
            out.bits.flip(c);
        }
    }
    Ok(out)
}

/// Boundary of a single face, by index.
pub fn face_boundary(x: &SimplicialComplex, k: isize, i: usize) -> Bits {
    let mut out = Bits::zeros(x.count(k - 1));
    if k >= 0 {
        for &f in x.facet_indices(k, i) {
            out.flip(f);
        }
    }
    out
}

/// Coboundary of a single face indicator, by index.
pub fn face_coboundary(x: &SimplicialComplex, k: isize, i: usize) -> Bits {
    let mut out = Bits::zeros(x.count(k + 1));
    if k == -1 {
        return Bits::ones(x.count(0));
    }
    for &c in x.cofacet_indices(k, i) {
        out.flip(c);
    }
    out
}

/// Column images `∂_k e_i` for all `i`.
pub fn boundary_columns(x: &SimplicialComplex, k: isize) -> Vec<Bits> {
    (0..x.count(k)).map(|i| face_boundary(x, k, i)).collect()
}

pub fn coboundary_columns(x: &SimplicialComplex, k: isize) -> Vec<Bits> {
    (0..x.count(k)).map(|i| face_coboundary(x, k, i)).collect()
}

/// A reduced echelon basis; every row has a distinct pivot (its lowest set
/// bit) that is zero in every other row. Rows may carry the combination of
/// inserted vectors that produced them.
#[derive(Clone, Debug)]
pub struct Echelon {
    len: usize,
    rows: Vec<Bits>,
    combos: Vec<Bits>,
    pivots: Vec<usize>,
    inserted: usize,
    track: Option<usize>,
}

impl Echelon {
    pub fn new(len: usize) -> Echelon {
        Echelon {
            len,
            rows: Vec::new(),
            combos: Vec::new(),
            pivots: Vec::new(),
            inserted: 0,
            track: None,
        }
    }

    /// Track combinations over `count` inserted vectors.
    pub fn tracking(len: usize, count: usize) -> Echelon {
        Echelon {
            track: Some(count),
            ..Echelon::new(len)
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Bits] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduces `v` against the rows; returns the residual and the
    /// combination of inserted vectors that was added.
    pub fn reduce(&self, v: &Bits) -> (Bits, Option<Bits>) {
        let mut r = v.clone();
        let mut c = self.track.map(Bits::zeros);
        for (i, &p) in self.pivots.iter().enumerate() {
            if r.get(p) {
                r.xor_assign(&self.rows[i]);
                if let Some(c) = c.as_mut() {
                    c.xor_assign(&self.combos[i]);
                }
            }
        }
        (r, c)
    }

    pub fn contains(&self, v: &Bits) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Inserts `v`; returns the dependency (a kernel combination) when `v`
    /// already lies in the span and combinations are tracked.
    pub fn insert(&mut self, v: &Bits) -> Insert {
        let (r, c) = self.reduce(v);
        let id = self.inserted;
        self.inserted += 1;
        let c = c.map(|mut c| {
            c.flip(id);
            c
        });
        let Some(p) = r.first_one() else {
            return Insert::Dependent(c);
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if row.get(p) {
                row.xor_assign(&r);
                if let Some(c) = &c {
                    self.combos[i].xor_assign(c);
                }
            }
        }
        self.rows.push(r);
        if let Some(c) = c {
            self.combos.push(c);
        }
        self.pivots.push(p);
        Insert::Independent
    }

    /// Combination of inserted vectors summing to `v`, when `v` is in the span.
    pub fn solve(&self, v: &Bits) -> Option<Bits> {
        let (r, c) = self.reduce(v);
        if r.is_zero() {
            c
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub enum Insert {
    Independent,
    Dependent(Option<Bits>),
}

/// Image and kernel of the linear map with the given column images.
pub struct LinearMap {
    pub image: Echelon,
    pub kernel: Vec<Bits>,
}

pub fn analyze(columns: &[Bits], target_len: usize) -> LinearMap {
    let mut image = Echelon::tracking(target_len, columns.len());
    let mut kernel = Vec::new();
    for c in columns {
        if let Insert::Dependent(Some(k)) = image.insert(c) {
            kernel.push(k);
        }
    }
    LinearMap { image, kernel }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// `B_k`
    Boundaries,
    /// `Z_k`
    Cycles,
    /// `B^k`
    Coboundaries,
    /// `Z^k`
    Cocycles,
}

#[derive(Clone, Debug)]
pub struct SpaceBasis {
    pub which: Space,
    pub k: isize,
    pub basis: Vec<ChainVector>,
}

impl SpaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn echelon(&self) -> Echelon {
        let len = self.basis.first().map(|b| b.bits.len()).unwrap_or(0);
        let mut e = Echelon::new(len);
        for b in &self.basis {
            e.insert(&b.bits);
        }
        e
    }
}

fn chains(k: isize, v: Vec<Bits>) -> Vec<ChainVector> {
    v.into_iter().map(|bits| ChainVector { dim: k, bits }).collect()
}

pub fn space_basis(x: &SimplicialComplex, which: Space, k: isize) -> SpaceBasis {
    let basis = match which {
        Space::Boundaries => {
            let cols = boundary_columns(x, k + 1);
            chains(k, analyze(&cols, x.count(k)).image.rows().to_vec())
        }
        Space::Cycles => {
            let cols = boundary_columns(x, k);
            chains(k, analyze(&cols, x.count(k - 1)).kernel)
        }
        Space::Coboundaries => {
            let cols = if k >= 0 { coboundary_columns(x, k - 1) } else { Vec::new() };
            chains(k, analyze(&cols, x.count(k)).image.rows().to_vec())
        }
        Space::Cocycles => {
            let cols = coboundary_columns(x, k);
            chains(k, analyze(&cols, x.count(k + 1)).kernel)
        }
    };
    SpaceBasis { which, k, basis }
}

/// `dim H̃_k` over F2.
pub fn betti(x: &SimplicialComplex, k: isize) -> usize {
    space_basis(x, Space::Cycles, k).dim() - space_basis(x, Space::Boundaries, k).dim()
}

/// `dim H̃^k` over F2.
pub fn cobetti(x: &SimplicialComplex, k: isize) -> usize {
    space_basis(x, Space::Cocycles, k).dim() - space_basis(x, Space::Coboundaries, k).dim()
}

/// Either a finite size or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Extended {
    Finite(u64),
    Infinite,
}

impl Extended {
    pub fn finite(self) -> Option<u64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// Visits every vector of the span of `basis` (including 0) in Gray-code order.
pub fn gray_span(basis: &[Bits], len: usize, mut visit: impl FnMut(&Bits, u64)) {
    let mut cur = Bits::zeros(len);
    visit(&cur, 0);
    let d = basis.len();
    let mut code = 0u64;
    for step in 1u64..(1u64 << d) {
        let bit = step.trailing_zeros() as usize;
        cur.xor_assign(&basis[bit]);
        code ^= 1 << bit;
        visit(&cur, code);
    }
}

fn check_budget(dim: usize, budget: u64) -> Result<()> {
    if dim >= 63 || (1u64 << dim) > budget {
        return Err(HomologyError::SearchSpaceTooLarge { dim, budget });
    }
    Ok(())
}

/// `Sys_k`: least size of a k-cycle that is not a boundary.
pub fn sys_cardinality(x: &SimplicialComplex, k: isize, budget: u64) -> Result<(Extended, Option<ChainVector>)> {
    if k < 0 || k > x.top_dim() - 1 {
        return Err(HomologyError::OutOfRange(k));
    }
    if k == 0 {
        // a 0-cycle is nonbounding iff it meets two components an odd number of times
        let adj = x.adjacency();
        if adj.is_empty() {
            return Ok((Extended::Infinite, None));
        }
        let mut comp = vec![usize::MAX; adj.len()];
        let mut stack = vec![0usize];
        comp[0] = 0;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = 0;
                    stack.push(v);
                }
            }
        }
        return Ok(match comp.iter().position(|&c| c == usize::MAX) {
            None => (Extended::Infinite, None),
            Some(v) => (Extended::Finite(2), Some(ChainVector::from_indices(x, 0, [0, v]))),
        });
    }
    let z = space_basis(x, Space::Cycles, k);
    let b = space_basis(x, Space::Boundaries, k).echelon();
    if z.dim() == b.rank() {
        return Ok((Extended::Infinite, None));
    }
    check_budget(z.dim(), budget)?;
    let len = x.count(k);
    let basis: Vec<Bits> = z.basis.iter().map(|c| c.bits.clone()).collect();
    let residues: Vec<Bits> = basis.iter().map(|v| b.reduce(v).0).collect();
    let mut res = Bits::zeros(len);
    let mut best: Option<Bits> = None;
    let mut last = 0u64;
    gray_span(&basis, len, |v, code| {
        let changed = code ^ last;
        last = code;
        if changed != 0 {
            res.xor_assign(&residues[changed.trailing_zeros() as usize]);
        }
        if res.is_zero() {
            return;
        }
        let better = match &best {
            None => true,
            Some(cur) => {
                let (a, c) = (v.count_ones(), cur.count_ones());
                a < c || (a == c && v.lex_cmp(cur).is_lt())
            }
        };
        if better {
            best = Some(v.clone());
        }
    });
    let best = best.expect("nontrivial class exists");
    Ok((
        Extended::Finite(best.count_ones() as u64),
        Some(ChainVector { dim: k, bits: best }),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillMode {
    /// Exhaustive over the kernel; errors above budget.
    Exact,
    /// Exact within budget, local descent above.
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filling {
    pub chain: ChainVector,
    pub size: usize,
    pub optimal: bool,
}

/// Precomputed data for repeated fillings of k-cycles by (k+1)-chains.
pub struct Filler {
    k: isize,
    image: Echelon,
    kernel: Vec<Bits>,
    up_len: usize,
}

impl Filler {
    pub fn new(x: &SimplicialComplex, k: isize) -> Filler {
        let cols = boundary_columns(x, k + 1);
        let m = analyze(&cols, x.count(k));
        // reduce the kernel basis so descent sees sparse vectors
        let mut e = Echelon::new(cols.len());
        for v in &m.kernel {
            e.insert(v);
        }
        Filler {
            k,
            image: m.image,
            kernel: e.rows().to_vec(),
            up_len: cols.len(),
        }
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    pub fn fill(&self, b: &ChainVector, mode: FillMode, budget: u64) -> Result<Filling> {
        check_dim(b, self.k)?;
        let Some(particular) = self.image.solve(&b.bits) else {
            return Err(HomologyError::NoFilling);
        };
        let exhaustive = check_budget(self.kernel.len(), budget);
        let (best, optimal) = match (exhaustive, mode) {
            (Ok(()), _) => (min_in_coset(&particular, &self.kernel, self.up_len), true),
            (Err(e), FillMode::Exact) => return Err(e),
            (Err(_), FillMode::Greedy) => (descend(particular, &self.kernel), false),
        };
        Ok(Filling {
            size: best.count_ones(),
            chain: ChainVector {
                dim: self.k + 1,
                bits: best,
            },
            optimal,
        })
    }
}

/// Least-weight element of `p + span(kernel)`, lexicographically least among ties.
pub fn min_in_coset(p: &Bits, kernel: &[Bits], len: usize) -> Bits {
    let mut best = p.clone();
    let mut best_w = p.count_ones();
    gray_span(kernel, len, |v, _| {
        let c = v.xor(p);
        let w = c.count_ones();
        if w < best_w || (w == best_w && c.lex_cmp(&best).is_lt()) {
            best_w = w;
            best = c;
        }
    });
    best
}

/// Repeatedly adds single kernel vectors while the weight drops.
pub fn descend(mut cur: Bits, kernel: &[Bits]) -> Bits {
    let mut w = cur.count_ones();
    loop {
        let mut improved = false;
        for k in kernel {
            let c = cur.xor(k);
            let cw = c.count_ones();
            if cw < w {
                cur = c;
                w = cw;
                improved = true;
            }
        }
        if !improved {
            return cur;
        }
    }
}

/// `Fill_k(B)`: a least chain with boundary `b`.
pub fn fill(x: &SimplicialComplex, k: isize, b: &ChainVector, mode: FillMode, budget: u64) -> Result<Filling> {
    check_dim(b, k)?;
    if !boundary(x, k, b)?.is_zero() {
        return Err(HomologyError::NotACycle);
    }
    Filler::new(x, k).fill(b, mode, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{cycle_graph, tetrahedron_boundary, torus7};

    #[test]
    fn edge_boundary() {
        let x = tetrahedron_boundary();
        let e = Simplex::new(vec![1, 3]);
        let b = boundary(&x, 1, &ChainVector::face(&x, &e)).unwrap();
        let expect = ChainVector::from_faces(&x, 0, &[Simplex::vertex(1), Simplex::vertex(3)]);
        assert_eq!(b, expect);
        let v = boundary(&x, 0, &ChainVector::face(&x, &Simplex::vertex(2))).unwrap();
        assert_eq!(v, ChainVector::all(&x, -1));
    }

    #[test]
    fn sphere_ranks() {
        let x = tetrahedron_boundary();
        assert_eq!(space_basis(&x, Space::Cycles, 1).dim(), 3);
        assert_eq!(space_basis(&x, Space::Boundaries, 1).dim(), 3);
        assert_eq!(betti(&x, 1), 0);
        assert_eq!(betti(&x, 2), 1);
        assert_eq!(betti(&x, 0), 0);
        assert_eq!(space_basis(&x, Space::Coboundaries, 0).dim(), 1);
        let all = ChainVector::all(&x, 2);
        assert!(boundary(&x, 2, &all).unwrap().is_zero());
    }

    #[test]
    fn torus_systole() {
        let t = torus7();
        assert_eq!(betti(&t, 1), 2);
        assert_eq!(cobetti(&t, 1), 2);
        let (s, w) = sys_cardinality(&t, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(s, Extended::Finite(3));
        assert!(boundary(&t, 1, &w.unwrap()).unwrap().is_zero());
        let sphere = tetrahedron_boundary();
        assert_eq!(sys_cardinality(&sphere, 1, DEFAULT_BUDGET).unwrap().0, Extended::Infinite);
        assert!(matches!(
            sys_cardinality(&cycle_graph(6), 1, DEFAULT_BUDGET),
            Err(HomologyError::OutOfRange(1))
        ));
    }

    #[test]
    fn fills() {
        let x = tetrahedron_boundary();
        let tri = x.faces(2)[0].clone();
        let b = boundary(&x, 2, &ChainVector::face(&x, &tri)).unwrap();
        let f = fill(&x, 1, &b, FillMode::Exact, DEFAULT_BUDGET).unwrap();
        assert_eq!(f.size, 1);
        assert!(f.optimal);
        let z = fill(&x, 1, &ChainVector::zero(&x, 1), FillMode::Exact, DEFAULT_BUDGET).unwrap();
        assert_eq!(z.size, 0);
        let t = torus7();
        let (_, w) = sys_cardinality(&t, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            fill(&t, 1, &w.unwrap(), FillMode::Exact, DEFAULT_BUDGET),
            Err(HomologyError::NoFilling)
        );
    }

    #[test]
    fn budget_error() {
        let x = torus7();
        let b = ChainVector::zero(&x, 1);
        assert!(matches!(
            Filler::new(&x, 1).fill(&b, FillMode::Exact, 0),
            Err(HomologyError::SearchSpaceTooLarge { .. })
        ));
        let g = Filler::new(&x, 1).fill(&b, FillMode::Greedy, 0).unwrap();
        assert!(!g.optimal);
        assert_eq!(g.size, 0);
    }
}
