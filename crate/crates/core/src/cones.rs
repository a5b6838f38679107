//! Cone functions built by iterated filling, their volumes, cone radii and
//! the filling constants `M_k`.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;
use crate::complex::{CosetComplex, Simplex, SimplicialComplex, Vertex};
use crate::groups::ElementId;
use crate::homology::{
    betti, boundary, cobetti, space_basis, sys_cardinality, ChainVector, Extended, FillMode, Filler,
    HomologyError, Space,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConeError {
    #[error("apex {0} is not a vertex")]
    BadApex(Vertex),
    #[error("cone dimension {k} exceeds the complex dimension {n}")]
    DimTooLarge { k: isize, n: isize },
    #[error("no symmetry group is attached to this complex")]
    NoGroupAttached,
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

pub type Result<T> = std::result::Result<T, ConeError>;

/// `τ ↦ Cone(τ)` for all faces of dimension `-1..=max_dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeFunction {
    pub apex: Vertex,
    pub max_dim: isize,
    /// `tables[j + 1][i]` is the cone of face `i` of dimension `j`.
    pub tables: Vec<Vec<ChainVector>>,
    /// Whether every filling was certified minimal.
    pub minimal: bool,
}

/// The cycle `τ + Cone(∂τ)` had no filling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    pub dim: isize,
    pub face: Simplex,
    pub witness: ChainVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConeOutcome {
    Built(ConeFunction),
    Obstructed(Obstruction),
}

impl ConeOutcome {
    pub fn cone(self) -> Option<ConeFunction> {
        match self {
            ConeOutcome::Built(c) => Some(c),
            ConeOutcome::Obstructed(_) => None,
        }
    }
}

impl ConeFunction {
    pub fn table(&self, j: isize) -> &[ChainVector] {
        &self.tables[(j + 1) as usize]
    }

    /// Cone of face `i` of dimension `j`.
    pub fn of_face(&self, j: isize, i: usize) -> &ChainVector {
        &self.tables[(j + 1) as usize][i]
    }

    /// Linear extension to a chain.
    pub fn of_chain(&self, x: &SimplicialComplex, a: &ChainVector) -> ChainVector {
        let mut out = ChainVector::zero(x, a.dim + 1);
        for i in a.bits.iter_ones() {
            out.add_assign(self.of_face(a.dim, i));
        }
        out
    }

    /// Largest cone chain in dimension `j`.
    pub fn vol_at(&self, j: isize) -> usize {
        self.table(j).iter().map(|c| c.size()).max().unwrap_or(0)
    }

    pub fn vol(&self) -> usize {
        self.vol_at(self.max_dim)
    }

    pub fn to_json(&self, x: &SimplicialComplex) -> serde_json::Value {
        let mut dims = BTreeMap::new();
        for j in -1..=self.max_dim {
            let faces = x.faces(j);
            let entries: Vec<serde_json::Value> = self
                .table(j)
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let chain: Vec<&[Vertex]> = c.faces(x).map(|s| s.vertices()).collect();
                    serde_json::json!({ "face": faces[i].vertices(), "cone": chain })
                })
                .collect();
            dims.insert(j.to_string(), entries);
        }
        serde_json::json!({ "apex": self.apex, "max_dim": self.max_dim, "tables": dims })
    }
}

/// Parent pointers of a breadth-first search from `root`, visiting neighbors
/// in increasing order.
pub fn bfs_tree(adj: &[Vec<usize>], root: usize) -> (Vec<Option<usize>>, Vec<Option<u32>>) {
    let mut parent = vec![None; adj.len()];
    let mut dist = vec![None; adj.len()];
    dist[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    (parent, dist)
}

fn zero_cone(x: &SimplicialComplex, apex_idx: usize) -> std::result::Result<Vec<ChainVector>, Obstruction> {
    let adj = x.adjacency();
    let (parent, dist) = bfs_tree(&adj, apex_idx);
    let ids = x.vertex_ids();
    let mut out = Vec::with_capacity(ids.len());
    for v in 0..ids.len() {
        if dist[v].is_none() {
            let witness = ChainVector::from_indices(x, 0, [v, apex_idx]);
            return Err(Obstruction {
                dim: 0,
                face: Simplex::vertex(ids[v]),
                witness,
            });
        }
        let mut edges = Vec::new();
        let mut cur = v;
        while let Some(p) = parent[cur] {
            edges.push(Simplex::new(vec![ids[cur], ids[p]]));
            cur = p;
        }
        out.push(ChainVector::from_faces(x, 1, &edges));
    }
    Ok(out)
}

/// Builds `Cone_j` for `j ≤ k` with apex `apex`. Fillers are passed in so
/// several apexes can share them; `fillers[j]` fills j-cycles.
pub fn build_cone_with(
    x: &SimplicialComplex,
    apex: Vertex,
    k: isize,
    fillers: &[Filler],
    mode: FillMode,
    budget: u64,
) -> Result<ConeOutcome> {
    let apex_idx = x
        .index_of(&Simplex::vertex(apex))
        .ok_or(ConeError::BadApex(apex))?;
    if k > x.top_dim() {
        return Err(ConeError::DimTooLarge { k, n: x.top_dim() });
    }
    let mut tables = vec![vec![ChainVector::from_indices(x, 0, [apex_idx])]];
    let mut minimal = true;
    if k >= 0 {
        match zero_cone(x, apex_idx) {
            Ok(t) => tables.push(t),
            Err(o) => return Ok(ConeOutcome::Obstructed(o)),
        }
    }
    for j in 1..=k {
        let prev = &tables[j as usize];
        let filler = &fillers[j as usize];
        let results: Vec<std::result::Result<(ChainVector, bool), std::result::Result<ChainVector, HomologyError>>> =
            (0..x.count(j))
                .into_par_iter()
                .map(|i| {
                    let mut b = ChainVector::from_indices(x, j, [i]);
                    for &f in x.facet_indices(j, i) {
                        b.add_assign(&prev[f]);
                    }
                    match filler.fill(&b, mode, budget) {
                        Ok(f) => Ok((f.chain, f.optimal)),
                        Err(HomologyError::NoFilling) => Err(Ok(b)),
                        Err(e) => Err(Err(e)),
                    }
                })
                .collect();
        let mut table = Vec::with_capacity(results.len());
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok((c, opt)) => {
                    minimal &= opt;
                    table.push(c);
                }
                Err(Ok(witness)) => {
                    return Ok(ConeOutcome::Obstructed(Obstruction {
                        dim: j,
                        face: x.faces(j)[i].clone(),
                        witness,
                    }))
                }
                Err(Err(e)) => return Err(e.into()),
            }
        }
        tables.push(table);
    }
    Ok(ConeOutcome::Built(ConeFunction {
        apex,
        max_dim: k,
        tables,
        minimal,
    }))
}

/// Fillers for dimensions `0..=k` (entry 0 is unused by cone building).
pub fn fillers(x: &SimplicialComplex, k: isize) -> Vec<Filler> {
    (0..=k.max(0)).map(|j| Filler::new(x, j)).collect()
}

pub fn build_cone(x: &SimplicialComplex, apex: Vertex, k: isize, mode: FillMode, budget: u64) -> Result<ConeOutcome> {
    let f = fillers(x, k);
    build_cone_with(x, apex, k, &f, mode, budget)
}

/// First face (dimension, face) where the cone equation fails.
pub fn verify_cone(x: &SimplicialComplex, cone: &ConeFunction) -> std::result::Result<(), (isize, Simplex)> {
    for j in -1..=cone.max_dim {
        for (i, c) in cone.table(j).iter().enumerate() {
            let lhs = boundary(x, j + 1, c).expect("cone chains have matching dimension");
            let mut rhs = ChainVector::from_indices(x, j, [i]);
            if j >= 0 {
                for &f in x.facet_indices(j, i) {
                    rhs.add_assign(cone.of_face(j - 1, f));
                }
            }
            if lhs != rhs {
                return Err((j, x.faces(j)[i].clone()));
            }
        }
    }
    Ok(())
}

/// `(ι φ)(τ) = φ(Cone(τ))`; `φ` has dimension `j + 1` and the result dimension `j`.
pub fn contract_with_cone(x: &SimplicialComplex, cone: &ConeFunction, phi: &ChainVector) -> Result<ChainVector> {
    let j = phi.dim - 1;
    if j < -1 || j > cone.max_dim {
        return Err(HomologyError::DimMismatch {
            expected: cone.max_dim + 1,
            got: phi.dim,
        }
        .into());
    }
    let bits = Bits::from_indices(
        x.count(j),
        cone.table(j)
            .iter()
            .enumerate()
            .filter(|(_, c)| phi.eval(c))
            .map(|(i, _)| i),
    );
    Ok(ChainVector { dim: j, bits })
}

/// `(ρ(g).Cone)(A) = g.Cone(g⁻¹.A)`, with `perm` and `inv` the vertex
/// permutations of `g` and `g⁻¹` indexed by vertex index.
pub fn act_with_permutation(x: &SimplicialComplex, cone: &ConeFunction, perm: &[Vertex], inv: &[Vertex]) -> ConeFunction {
    let map_chain = |c: &ChainVector| {
        ChainVector::from_indices(
            x,
            c.dim,
            c.faces(x).map(|s| x.index_of(&x.image(s, perm)).expect("automorphism")),
        )
    };
    let mut tables = Vec::new();
    for j in -1..=cone.max_dim {
        let table = x
            .faces(j)
            .iter()
            .map(|a| {
                let pre = x.index_of(&x.image(a, inv)).expect("automorphism");
                map_chain(cone.of_face(j, pre))
            })
            .collect();
        tables.push(table);
    }
    let apex_idx = x.index_of(&Simplex::vertex(cone.apex)).unwrap();
    ConeFunction {
        apex: perm[apex_idx],
        max_dim: cone.max_dim,
        tables,
        minimal: cone.minimal,
    }
}

pub fn act_on_cone(cc: Option<&CosetComplex>, g: ElementId, cone: &ConeFunction) -> Result<ConeFunction> {
    let cc = cc.ok_or(ConeError::NoGroupAttached)?;
    let perm = cc.permutation(g);
    let inv = cc.permutation(cc.group.inverse(g));
    Ok(act_with_permutation(&cc.complex, cone, &perm, &inv))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConeReport {
    pub k: isize,
    /// Volume per attempted apex (`None` when obstructed).
    pub vols: Vec<(Vertex, Option<usize>)>,
    pub crad_upper: Extended,
    pub best_apex: Option<Vertex>,
    /// `exists[j + 1]`: a j-cone was built at some apex.
    pub exists: Vec<bool>,
    /// All fillings were certified minimal.
    pub minimal: bool,
    pub m_constants: Option<MConstants>,
}

/// Upper bound on `Crad_k`: the least volume among cones built at `apexes`.
pub fn crad_upper(x: &SimplicialComplex, k: isize, apexes: &[Vertex], mode: FillMode, budget: u64) -> Result<ConeReport> {
    let f = fillers(x, k);
    let mut vols = Vec::new();
    let mut exists = vec![false; (k + 2) as usize];
    let mut best: Option<(usize, Vertex)> = None;
    let mut minimal = true;
    for &a in apexes {
        match build_cone_with(x, a, k, &f, mode, budget)? {
            ConeOutcome::Built(c) => {
                exists.iter_mut().for_each(|e| *e = true);
                minimal &= c.minimal;
                let v = c.vol();
                vols.push((a, Some(v)));
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, a));
                }
            }
            ConeOutcome::Obstructed(o) => {
                for e in exists.iter_mut().take((o.dim + 1) as usize) {
                    *e = true;
                }
                vols.push((a, None));
            }
        }
    }
    Ok(ConeReport {
        k,
        vols,
        crad_upper: best.map_or(Extended::Infinite, |(v, _)| Extended::Finite(v as u64)),
        best_apex: best.map(|(_, a)| a),
        exists,
        minimal,
        m_constants: None,
    })
}

/// Graph radius and diameter of the 1-skeleton (`None` when disconnected).
pub fn radius_and_diameter(x: &SimplicialComplex) -> Option<(u32, u32)> {
    let adj = x.adjacency();
    let ecc: Option<Vec<u32>> = (0..adj.len())
        .into_par_iter()
        .map(|v| {
            let (_, d) = bfs_tree(&adj, v);
            d.into_iter().try_fold(0, |m, d| d.map(|d| m.max(d)))
        })
        .collect();
    let ecc = ecc?;
    Some((*ecc.iter().min()?, *ecc.iter().max()?))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MConstants {
    /// `m[j + 1] = M_j`.
    pub m: Vec<Extended>,
    /// `sys[j] = Sys_j`.
    pub sys: Vec<Extended>,
    /// `Sys_j > (j+1) M_{j-1} + 1`.
    pub hypothesis: Vec<bool>,
    pub all_hold: bool,
}

fn add_ext(a: Extended, b: u64) -> Extended {
    match a {
        Extended::Finite(v) => Extended::Finite(v + b),
        Extended::Infinite => Extended::Infinite,
    }
}

fn mul_ext(a: Extended, b: u64) -> Extended {
    match a {
        Extended::Finite(v) => Extended::Finite(v * b),
        Extended::Infinite => Extended::Infinite,
    }
}

fn binom_sum(n: u64, m: u64) -> u64 {
    let mut total = 0u64;
    let mut c = 1u64;
    for i in 0..=m.min(n) {
        total = total.saturating_add(c);
        c = c.saturating_mul(n - i) / (i + 1);
    }
    total
}

/// `Fill_j(m)`: the largest least filling over j-cycles with at most `m` faces.
pub fn fill_constant(x: &SimplicialComplex, j: isize, m: u64, budget: u64) -> Result<Extended> {
    if j == 0 {
        // cycles of at most two vertices are pairs, filled by shortest paths
        if m < 2 {
            return Ok(Extended::Finite(0));
        }
        if m < 4 {
            return Ok(match radius_and_diameter(x) {
                Some((_, d)) => Extended::Finite(d as u64),
                None => Extended::Infinite,
            });
        }
    }
    let filler = Filler::new(x, j);
    let n = x.count(j);
    let z = space_basis(x, Space::Cycles, j);
    let mut worst = Extended::Finite(0);
    let mut visit = |b: &Bits| -> Result<bool> {
        let c = ChainVector { dim: j, bits: b.clone() };
        match filler.fill(&c, FillMode::Exact, budget) {
            Ok(f) => worst = worst.max(Extended::Finite(f.size as u64)),
            Err(HomologyError::NoFilling) => {
                worst = Extended::Infinite;
                return Ok(false);
            }
            Err(e) => return Err(e.into()),
        }
        Ok(true)
    };
    let by_span = z.dim() < 63 && (1u64 << z.dim()) <= budget;
    let by_subsets = binom_sum(n as u64, m) <= budget;
    if by_span && (!by_subsets || (1u64 << z.dim()) <= binom_sum(n as u64, m)) {
        let basis: Vec<Bits> = z.basis.iter().map(|c| c.bits.clone()).collect();
        let mut found = Vec::new();
        crate::homology::gray_span(&basis, n, |v, _| {
            if v.count_ones() as u64 <= m {
                found.push(v.clone());
            }
        });
        for b in found {
            if !visit(&b)? {
                break;
            }
        }
    } else if by_subsets {
        let mut stack: Vec<usize> = Vec::new();
        let mut cur = Bits::zeros(n);
        let mut bd = Bits::zeros(x.count(j - 1));
        let cols: Vec<Bits> = crate::homology::boundary_columns(x, j);
        // depth-first over increasing index sets of size ≤ m
        fn rec(
            start: usize,
            depth: u64,
            m: u64,
            cols: &[Bits],
            cur: &mut Bits,
            bd: &mut Bits,
            stack: &mut Vec<usize>,
            visit: &mut dyn FnMut(&Bits) -> Result<bool>,
        ) -> Result<bool> {
            if bd.is_zero() && !visit(cur)? {
                return Ok(false);
            }
            if depth == m {
                return Ok(true);
            }
            for i in start..cols.len() {
                cur.flip(i);
                bd.xor_assign(&cols[i]);
                stack.push(i);
                let go = rec(i + 1, depth + 1, m, cols, cur, bd, stack, visit)?;
                stack.pop();
                cur.flip(i);
                bd.xor_assign(&cols[i]);
                if !go {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        rec(0, 0, m, &cols, &mut cur, &mut bd, &mut stack, &mut visit)?;
    } else {
        return Err(HomologyError::SearchSpaceTooLarge {
            dim: z.dim(),
            budget,
        }
        .into());
    }
    Ok(worst)
}

/// `M_{-1} = 1`, `M_j = Fill_j((j+1) M_{j-1} + 1)`, with the systole hypotheses.
pub fn m_constants(x: &SimplicialComplex, k: isize, budget: u64) -> Result<MConstants> {
    let mut m = vec![Extended::Finite(1)];
    let mut sys = Vec::new();
    let mut hypothesis = Vec::new();
    for j in 0..=k {
        let prev = *m.last().unwrap();
        let bound = add_ext(mul_ext(prev, (j + 1) as u64), 1);
        let s = sys_cardinality(x, j, budget)?.0;
        hypothesis.push(s > bound);
        sys.push(s);
        let next = match bound {
            Extended::Finite(b) => fill_constant(x, j, b, budget)?,
            Extended::Infinite => Extended::Infinite,
        };
        m.push(next);
    }
    let all_hold = hypothesis.iter().all(|&h| h);
    Ok(MConstants {
        m,
        sys,
        hypothesis,
        all_hold,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceVerdict {
    pub k: isize,
    pub homology_vanishes: bool,
    pub first_nonvanishing: Option<isize>,
    pub cone_built: bool,
    pub obstruction: Option<Obstruction>,
    /// The obstruction witness is a cycle that is not a boundary.
    pub witness_nonbounding: bool,
    pub consistent: bool,
}

/// Checks that a k-cone exists exactly when `H̃_j = H̃^j = 0` for `0 ≤ j ≤ k`.
pub fn existence_equivalence_test(x: &SimplicialComplex, k: isize, budget: u64) -> Result<EquivalenceVerdict> {
    let first_nonvanishing = (0..=k).find(|&j| betti(x, j) != 0 || cobetti(x, j) != 0);
    let homology_vanishes = first_nonvanishing.is_none();
    let apex = *x.vertex_ids().first().ok_or(ConeError::BadApex(0))?;
    let outcome = build_cone(x, apex, k, FillMode::Greedy, budget)?;
    let (cone_built, obstruction, witness_nonbounding) = match outcome {
        ConeOutcome::Built(c) => {
            let ok = verify_cone(x, &c).is_ok();
            (ok, None, false)
        }
        ConeOutcome::Obstructed(o) => {
            let is_cycle = boundary(x, o.dim, &o.witness)?.is_zero();
            let bounds = space_basis(x, Space::Boundaries, o.dim).echelon();
            let nonbounding = is_cycle && !bounds.contains(&o.witness.bits);
            (false, Some(o), nonbounding)
        }
    };
    let consistent = if homology_vanishes {
        cone_built
    } else {
        !cone_built && witness_nonbounding
    };
    Ok(EquivalenceVerdict {
        k,
        homology_vanishes,
        first_nonvanishing,
        cone_built,
        obstruction,
        witness_nonbounding,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{cycle_graph, graph, tetrahedron_boundary, torus7};
    use crate::homology::DEFAULT_BUDGET;

    #[test]
    fn sphere_cones() {
        let x = tetrahedron_boundary();
        let c = build_cone(&x, 0, 1, FillMode::Exact, DEFAULT_BUDGET).unwrap().cone().unwrap();
        assert!(verify_cone(&x, &c).is_ok());
        assert_eq!(c.vol_at(0), 1);
        assert_eq!(c.vol_at(-1), 1);
        let o = build_cone(&x, 0, 2, FillMode::Exact, DEFAULT_BUDGET).unwrap();
        assert!(matches!(o, ConeOutcome::Obstructed(Obstruction { dim: 2, .. })));
    }

    #[test]
    fn corrupted_cone_fails() {
        let x = tetrahedron_boundary();
        let mut c = build_cone(&x, 0, 1, FillMode::Exact, DEFAULT_BUDGET).unwrap().cone().unwrap();
        c.tables[2][3].bits.flip(0);
        let (dim, face) = verify_cone(&x, &c).unwrap_err();
        assert_eq!(dim, 1);
        assert_eq!(face, x.faces(1)[3]);
    }

    #[test]
    fn disconnected() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        let o = build_cone(&g, 0, 0, FillMode::Exact, DEFAULT_BUDGET).unwrap();
        assert!(matches!(o, ConeOutcome::Obstructed(Obstruction { dim: 0, .. })));
        let v = existence_equivalence_test(&g, 0, DEFAULT_BUDGET).unwrap();
        assert!(!v.homology_vanishes && v.consistent);
    }

    #[test]
    fn radius() {
        let c6 = cycle_graph(6);
        let r = crad_upper(&c6, 0, &c6.vertex_ids(), FillMode::Exact, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.crad_upper, Extended::Finite(3));
        assert_eq!(radius_and_diameter(&c6), Some((3, 3)));
    }

    #[test]
    fn contraction_identity() {
        let x = tetrahedron_boundary();
        let c = build_cone(&x, 2, 1, FillMode::Exact, DEFAULT_BUDGET).unwrap().cone().unwrap();
        for mask in 0u64..16 {
            let phi = ChainVector { dim: 0, bits: Bits::from_mask(4, mask) };
            let dphi = crate::homology::coboundary(&x, 0, &phi).unwrap();
            let lhs = contract_with_cone(&x, &c, &dphi).unwrap();
            let iphi = contract_with_cone(&x, &c, &phi).unwrap();
            let rhs = phi.add(&crate::homology::coboundary(&x, -1, &iphi).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn m_constants_sphere() {
        let x = tetrahedron_boundary();
        let m = m_constants(&x, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(m.m[0], Extended::Finite(1));
        assert_eq!(m.m[1], Extended::Finite(1));
        assert_eq!(m.m[2], Extended::Finite(1));
        assert!(m.all_hold);
        let t = torus7();
        let mt = m_constants(&t, 1, DEFAULT_BUDGET).unwrap();
        assert!(!mt.hypothesis[1]);
    }
}
