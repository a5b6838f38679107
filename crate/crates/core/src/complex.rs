//! Simplicial complexes, clique closure, links, weights and coset complexes.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{enumerate_cosets, CosetPartition, ElementId, Group, GroupError, Subgroup};
use crate::rational::Rational;

pub type Vertex = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("not a face: {0:?}")]
    NotAFace(Vec<Vertex>),
    #[error("complex is not pure")]
    NotPure,
    #[error("face list is not downward closed: {0:?} is missing")]
    NotClosed(Vec<Vertex>),
    #[error("malformed complex file: {0}")]
    Format(String),
    #[error("coset complex needs at least two subgroups")]
    TooFewSubgroups,
    #[error("permutation is not an automorphism")]
    NotAutomorphism,
    #[error(transparent)]
    Group(#[from] GroupError),
}

pub type Result<T> = std::result::Result<T, ComplexError>;

/// A sorted vertex tuple; the empty tuple is the face of dimension -1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Simplex(Vec<Vertex>);

impl Simplex {
    pub fn new(mut v: Vec<Vertex>) -> Simplex {
        v.sort_unstable();
        v.dedup();
        Simplex(v)
    }

    pub fn empty() -> Simplex {
        Simplex(Vec::new())
    }

    pub fn vertex(v: Vertex) -> Simplex {
        Simplex(vec![v])
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn dim(&self) -> isize {
        self.0.len() as isize - 1
    }

    /// Codimension-one faces, in the order of the removed vertex.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.0.len()).map(move |i| {
            let mut v = self.0.clone();
            v.remove(i);
            Simplex(v)
        })
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        Simplex::new(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn minus(&self, other: &Simplex) -> Simplex {
        Simplex(self.0.iter().copied().filter(|v| !other.contains(*v)).collect())
    }

    pub fn is_disjoint(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| !other.contains(*v))
    }

    pub fn map(&self, f: impl Fn(Vertex) -> Vertex) -> Simplex {
        Simplex::new(self.0.iter().map(|&v| f(v)).collect())
    }

    /// All subsets, including the empty one and the simplex itself.
    pub fn subsets(&self) -> Vec<Simplex> {
        let n = self.0.len();
        (0..1u64 << n)
            .map(|mask| {
                Simplex(
                    (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| self.0[i])
                        .collect(),
                )
            })
            .collect()
    }
}

/// A finite simplicial complex with per-dimension sorted face lists.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    faces: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    vertex_types: Option<Vec<usize>>,
    facets: Vec<Vec<Vec<usize>>>,
    cofacets: Vec<Vec<Vec<usize>>>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.faces == other.faces && self.vertex_types == other.vertex_types
    }
}

impl SimplicialComplex {
    /// Downward closure of the given faces.
    pub fn from_maximal(faces: impl IntoIterator<Item = Simplex>) -> SimplicialComplex {
        let mut all: HashSet<Simplex> = HashSet::new();
        all.insert(Simplex::empty());
        for f in faces {
            if all.contains(&f) {
                continue;
            }
            for s in f.subsets() {
                all.insert(s);
            }
        }
        Self::assemble(all.into_iter().collect(), None)
    }

    /// Faces that are already downward closed; checked.
    pub fn from_closed(faces: Vec<Simplex>, vertex_types: Option<Vec<usize>>) -> Result<SimplicialComplex> {
        let mut set: HashSet<Simplex> = faces.into_iter().collect();
        set.insert(Simplex::empty());
        for f in &set {
            for g in f.facets() {
                if !set.contains(&g) {
                    return Err(ComplexError::NotClosed(g.0));
                }
            }
        }
        let x = Self::assemble(set.into_iter().collect(), None);
        match vertex_types {
            None => Ok(x),
            Some(t) => x.with_types(t),
        }
    }

    fn assemble(mut all: Vec<Simplex>, vertex_types: Option<Vec<usize>>) -> SimplicialComplex {
        all.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.cmp(b)));
        let top = all.last().map(|s| s.0.len()).unwrap_or(0);
        let mut faces: Vec<Vec<Simplex>> = vec![Vec::new(); top + 1];
        for s in all {
            let d = s.0.len();
            faces[d].push(s);
        }
        let index: Vec<HashMap<Simplex, usize>> = faces
            .iter()
            .map(|fs| fs.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())
            .collect();
        let mut facets: Vec<Vec<Vec<usize>>> = vec![Vec::new(); faces.len()];
        let mut cofacets: Vec<Vec<Vec<usize>>> =
            faces.iter().map(|fs| vec![Vec::new(); fs.len()]).collect();
        for d in 1..faces.len() {
            facets[d] = faces[d]
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let fs: Vec<usize> = s.facets().map(|f| index[d - 1][&f]).collect();
                    for &f in &fs {
                        cofacets[d - 1][f].push(i);
                    }
                    fs
                })
                .collect();
        }
        facets[0] = vec![Vec::new(); faces[0].len()];
        SimplicialComplex {
            faces,
            index,
            vertex_types,
            facets,
            cofacets,
        }
    }

    /// Attach side labels, one per vertex in sorted vertex order.
    pub fn with_types(mut self, types: Vec<usize>) -> Result<SimplicialComplex> {
        if types.len() != self.count(0) {
            return Err(ComplexError::Format("vertex_types length".into()));
        }
        self.vertex_types = Some(types);
        Ok(self)
    }

    /// Top dimension `n`; `-1` for the complex `{∅}`.
    pub fn top_dim(&self) -> isize {
        self.faces.len() as isize - 2
    }

    pub fn faces(&self, k: isize) -> &[Simplex] {
        match self.faces.get((k + 1) as usize) {
            Some(f) if k >= -1 => f,
            _ => &[],
        }
    }

    pub fn count(&self, k: isize) -> usize {
        self.faces(k).len()
    }

    pub fn total_faces(&self) -> usize {
        self.faces.iter().map(|f| f.len()).sum()
    }

    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.index.get((s.dim() + 1) as usize)?.get(s).copied()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index_of(s).is_some()
    }

    /// Indices (in dimension `k - 1`) of the facets of face `i` of dimension `k`.
    pub fn facet_indices(&self, k: isize, i: usize) -> &[usize] {
        if k <= 0 {
            return if k == 0 { &[0] } else { &[] };
        }
        &self.facets[(k + 1) as usize][i]
    }

    /// Indices (in dimension `k + 1`) of faces having face `i` of dimension `k` as a facet.
    pub fn cofacet_indices(&self, k: isize, i: usize) -> &[usize] {
        match self.cofacets.get((k + 1) as usize) {
            Some(c) => &c[i],
            None => &[],
        }
    }

    pub fn vertex_ids(&self) -> Vec<Vertex> {
        self.faces(0).iter().map(|s| s.0[0]).collect()
    }

    pub fn vertex_types(&self) -> Option<&[usize]> {
        self.vertex_types.as_deref()
    }

    pub fn vertex_type(&self, v: Vertex) -> Option<usize> {
        let i = self.index_of(&Simplex::vertex(v))?;
        self.vertex_types.as_ref().map(|t| t[i])
    }

    /// Neighbor lists of the 1-skeleton, by vertex index.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.count(0)];
        for e in self.faces(1) {
            let a = self.index_of(&Simplex::vertex(e.0[0])).unwrap();
            let b = self.index_of(&Simplex::vertex(e.0[1])).unwrap();
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
        }
        adj
    }

    /// Number of top faces containing each face, per dimension.
    pub fn top_counts(&self) -> Vec<Vec<u64>> {
        let mut counts: Vec<Vec<u64>> = self.faces.iter().map(|f| vec![0; f.len()]).collect();
        let n = self.top_dim();
        for s in self.faces(n) {
            for t in s.subsets() {
                let d = t.0.len();
                counts[d][self.index[d][&t]] += 1;
            }
        }
        counts
    }

    pub fn is_pure(&self) -> bool {
        self.top_counts().iter().all(|c| c.iter().all(|&x| x > 0))
    }

    /// Every top face has exactly one vertex of each type.
    pub fn is_partite(&self) -> bool {
        let Some(types) = &self.vertex_types else {
            return false;
        };
        let n = self.top_dim();
        self.faces(n).iter().all(|s| {
            let mut seen: Vec<usize> = s
                .0
                .iter()
                .map(|&v| types[self.index_of(&Simplex::vertex(v)).unwrap()])
                .collect();
            seen.sort_unstable();
            seen == (0..s.0.len()).collect::<Vec<_>>()
        })
    }

    /// Faces of dimension at most `k`.
    pub fn skeleton(&self, k: isize) -> SimplicialComplex {
        let faces: Vec<Simplex> = (-1..=k.min(self.top_dim()))
            .flat_map(|d| self.faces(d).iter().cloned())
            .collect();
        let mut x = Self::assemble(faces, None);
        x.vertex_types = self.vertex_types.clone();
        x
    }

    /// The link `{η : η ∪ τ ∈ X, η ∩ τ = ∅}`.
    pub fn link(&self, tau: &Simplex) -> Result<SimplicialComplex> {
        let start = self
            .index_of(tau)
            .ok_or_else(|| ComplexError::NotAFace(tau.0.clone()))?;
        let mut found: Vec<Simplex> = Vec::new();
        let mut seen: HashSet<(isize, usize)> = HashSet::new();
        let mut queue = VecDeque::from([(tau.dim(), start)]);
        seen.insert((tau.dim(), start));
        while let Some((d, i)) = queue.pop_front() {
            found.push(self.faces(d)[i].minus(tau));
            let up: Vec<usize> = if d == -1 {
                (0..self.count(0)).collect()
            } else {
                self.cofacet_indices(d, i).to_vec()
            };
            for j in up {
                if seen.insert((d + 1, j)) {
                    queue.push_back((d + 1, j));
                }
            }
        }
        let mut x = Self::assemble(found, None);
        if let Some(types) = &self.vertex_types {
            let t: Vec<usize> = x
                .faces(0)
                .iter()
                .map(|s| types[self.index_of(s).unwrap()])
                .collect();
            x.vertex_types = Some(t);
        }
        Ok(x)
    }

    /// Relabel vertices by `perm` (indexed by vertex index, valued in vertex ids).
    pub fn image(&self, s: &Simplex, perm: &[Vertex]) -> Simplex {
        s.map(|v| perm[self.index_of(&Simplex::vertex(v)).unwrap()])
    }

    /// Whether a vertex permutation (by index) maps faces onto faces.
    pub fn is_automorphism(&self, perm: &[Vertex]) -> bool {
        if perm.len() != self.count(0) {
            return false;
        }
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != self.vertex_ids() {
            return false;
        }
        (0..=self.top_dim()).all(|d| self.faces(d).iter().all(|s| self.contains(&self.image(s, perm))))
    }

    /// Size of the orbit of the first top face under the group generated by `perms`.
    pub fn top_face_orbit(&self, perms: &[Vec<Vertex>]) -> usize {
        let n = self.top_dim();
        let Some(first) = self.faces(n).first() else {
            return 0;
        };
        let mut seen: HashSet<Simplex> = HashSet::from([first.clone()]);
        let mut queue = VecDeque::from([first.clone()]);
        while let Some(s) = queue.pop_front() {
            for p in perms {
                let t = self.image(&s, p);
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
        }
        seen.len()
    }

    pub fn to_file(&self) -> ComplexFile {
        let mut faces = BTreeMap::new();
        for d in 0..=self.top_dim() {
            faces.insert(
                d.to_string(),
                self.faces(d).iter().map(|s| s.0.clone()).collect(),
            );
        }
        ComplexFile {
            top_dim: self.top_dim(),
            vertex_types: self.vertex_types.clone(),
            faces,
        }
    }

    pub fn from_file(file: &ComplexFile) -> Result<SimplicialComplex> {
        let mut all = Vec::new();
        for (d, list) in &file.faces {
            let d: isize = d
                .parse()
                .map_err(|_| ComplexError::Format(format!("dimension key {d}")))?;
            for f in list {
                let s = Simplex::new(f.clone());
                if s.dim() != d || s.0.len() != f.len() {
                    return Err(ComplexError::Format(format!("face {f:?} under key {d}")));
                }
                all.push(s);
            }
        }
        let x = SimplicialComplex::from_closed(all, file.vertex_types.clone())?;
        if x.top_dim() != file.top_dim {
            return Err(ComplexError::Format("top_dim disagrees with faces".into()));
        }
        Ok(x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("complex serializes")
    }

    pub fn from_json(text: &str) -> Result<SimplicialComplex> {
        let file: ComplexFile =
            serde_json::from_str(text).map_err(|e| ComplexError::Format(e.to_string()))?;
        Self::from_file(&file)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComplexFile {
    pub top_dim: isize,
    pub vertex_types: Option<Vec<usize>>,
    pub faces: BTreeMap<String, Vec<Vec<Vertex>>>,
}

/// All cliques with at most `max_dim + 1` vertices of the 1-skeleton.
pub fn clique_closure(one_skeleton: &SimplicialComplex, max_dim: isize) -> SimplicialComplex {
    assert!(one_skeleton.top_dim() <= 1, "clique closure takes a graph");
    let ids = one_skeleton.vertex_ids();
    let adj = one_skeleton.adjacency();
    let sets: Vec<HashSet<usize>> = adj.iter().map(|l| l.iter().copied().collect()).collect();
    let mut all: Vec<Simplex> = vec![Simplex::empty()];
    // cliques as sorted vertex-index lists
    let mut layer: Vec<Vec<usize>> = (0..ids.len()).map(|i| vec![i]).collect();
    let mut d = 0;
    while !layer.is_empty() && d <= max_dim {
        all.extend(layer.iter().map(|c| Simplex::new(c.iter().map(|&i| ids[i]).collect())));
        if d == max_dim {
            break;
        }
        let mut next = Vec::new();
        for c in &layer {
            let last = *c.last().unwrap();
            for &v in &adj[c[0]] {
                if v > last && c[1..].iter().all(|u| sets[*u].contains(&v)) {
                    let mut e = c.clone();
                    e.push(v);
                    next.push(e);
                }
            }
        }
        layer = next;
        d += 1;
    }
    let mut x = SimplicialComplex::assemble(all, None);
    x.vertex_types = one_skeleton.vertex_types.clone();
    x
}

/// Per-face weights `w(τ) = #{top faces ⊇ τ} / (C(n+1,k+1) |X(n)|)` kept as
/// integer numerators over a per-dimension denominator.
#[derive(Clone, Debug)]
pub struct WeightTable {
    counts: Vec<Vec<u64>>,
    denominators: Vec<u64>,
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

impl WeightTable {
    pub fn numerators(&self, k: isize) -> &[u64] {
        &self.counts[(k + 1) as usize]
    }

    pub fn denominator(&self, k: isize) -> u64 {
        self.denominators[(k + 1) as usize]
    }

    pub fn weight(&self, k: isize, i: usize) -> Rational {
        Rational::new(
            self.numerators(k)[i] as i64,
            self.denominator(k) as i64,
        )
    }

    /// Numerator of the weight of a set of faces.
    pub fn set_numerator(&self, k: isize, set: &crate::bits::Bits) -> u64 {
        let c = self.numerators(k);
        set.iter_ones().map(|i| c[i]).sum()
    }

    pub fn set_weight(&self, k: isize, set: &crate::bits::Bits) -> Rational {
        Rational::new(
            self.set_numerator(k, set) as i64,
            self.denominator(k) as i64,
        )
    }

    pub fn total(&self, k: isize) -> Rational {
        Rational::new(
            self.numerators(k).iter().sum::<u64>() as i64,
            self.denominator(k) as i64,
        )
    }
}

pub fn weights(x: &SimplicialComplex) -> Result<WeightTable> {
    let counts = x.top_counts();
    if counts.iter().any(|c| c.iter().any(|&v| v == 0)) {
        return Err(ComplexError::NotPure);
    }
    let n = x.top_dim();
    let top = x.count(n) as u64;
    let denominators = (-1..=n)
        .map(|k| binomial((n + 1) as u64, (k + 1) as u64) * top)
        .collect();
    Ok(WeightTable {
        counts,
        denominators,
    })
}

/// A coset complex together with the group data that produced it.
#[derive(Clone, Debug)]
pub struct CosetComplex {
    pub group: Arc<Group>,
    pub subgroups: Vec<Subgroup>,
    pub partitions: Vec<CosetPartition>,
    offsets: Vec<u32>,
    pub complex: SimplicialComplex,
}

impl CosetComplex {
    /// Vertex id of the coset with the given index in side `i`.
    pub fn vertex(&self, i: usize, coset: u32) -> Vertex {
        self.offsets[i] + coset
    }

    /// Vertex `g K_i`.
    pub fn vertex_of(&self, i: usize, g: ElementId) -> Vertex {
        self.vertex(i, self.partitions[i].coset_of(g))
    }

    /// (type, coset index) of a vertex.
    pub fn coset_of_vertex(&self, v: Vertex) -> (usize, u32) {
        let i = self.offsets.partition_point(|&o| o <= v) - 1;
        (i, v - self.offsets[i])
    }

    pub fn representative(&self, v: Vertex) -> ElementId {
        let (i, c) = self.coset_of_vertex(v);
        self.partitions[i].representative(c)
    }

    /// `g · (x K_i) = (g x) K_i`.
    pub fn act(&self, g: ElementId, v: Vertex) -> Vertex {
        let (i, c) = self.coset_of_vertex(v);
        let x = self.partitions[i].representative(c);
        self.vertex_of(i, self.group.mul(g, x))
    }

    /// The vertex permutation of `g`, indexed by vertex id.
    pub fn permutation(&self, g: ElementId) -> Vec<Vertex> {
        (0..self.complex.count(0) as u32).map(|v| self.act(g, v)).collect()
    }

    /// The base top face `{K_0, K_1, ...}` when it exists.
    pub fn base_face(&self) -> Simplex {
        Simplex::new((0..self.subgroups.len()).map(|i| self.vertex_of(i, 0)).collect())
    }
}

pub fn build_coset_complex(group: Arc<Group>, subgroups: Vec<Subgroup>) -> Result<CosetComplex> {
    if subgroups.len() < 2 {
        return Err(ComplexError::TooFewSubgroups);
    }
    let partitions: Vec<CosetPartition> = subgroups
        .iter()
        .enumerate()
        .map(|(i, k)| enumerate_cosets(&group, k, i))
        .collect::<std::result::Result<_, _>>()?;
    let mut offsets = vec![0u32];
    for p in &partitions {
        offsets.push(offsets.last().unwrap() + p.count() as u32);
    }
    let total = *offsets.last().unwrap();
    let mut edges: HashSet<(Vertex, Vertex)> = HashSet::new();
    for g in group.elements() {
        for i in 0..partitions.len() {
            let a = offsets[i] + partitions[i].coset_of(g);
            for j in i + 1..partitions.len() {
                let b = offsets[j] + partitions[j].coset_of(g);
                edges.insert((a, b));
            }
        }
    }
    let mut faces: Vec<Simplex> = vec![Simplex::empty()];
    faces.extend((0..total).map(Simplex::vertex));
    faces.extend(edges.into_iter().map(|(a, b)| Simplex::new(vec![a, b])));
    let types: Vec<usize> = (0..partitions.len())
        .flat_map(|i| std::iter::repeat_n(i, partitions[i].count()))
        .collect();
    let graph = SimplicialComplex::assemble(faces, Some(types));
    let complex = clique_closure(&graph, subgroups.len() as isize - 1);
    offsets.pop();
    Ok(CosetComplex {
        group,
        subgroups,
        partitions,
        offsets,
        complex,
    })
}

/// Outcome of the two transitivity computations on top faces.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SymmetryCertificate {
    pub criterion_holds: bool,
    /// `(τ, i)` pairs where `K_τ K_i ≠ ∩_{j∈τ} K_j K_i`.
    pub criterion_failures: Vec<(Vec<usize>, usize)>,
    pub orbit_size: usize,
    pub top_faces: usize,
    pub transitive: bool,
    pub agree: bool,
}

fn product_set(group: &Group, a: &[ElementId], b: &[ElementId]) -> Vec<u64> {
    let mut out = vec![0u64; group.len().div_ceil(64)];
    for &x in a {
        for &y in b {
            let z = group.mul(x, y);
            out[z as usize / 64] |= 1 << (z % 64);
        }
    }
    out
}

/// Evaluates `K_τ K_i = ∩_{j∈τ} K_j K_i` for all `τ ⊊ I`, `i ∉ τ`, and the
/// orbit of the group on top faces.
pub fn check_strong_symmetry(cc: &CosetComplex) -> SymmetryCertificate {
    let g = &cc.group;
    let m = cc.subgroups.len();
    let full = vec![u64::MAX; g.len().div_ceil(64)];
    let mask_len = g.len();
    let trim = |mut v: Vec<u64>| {
        if mask_len % 64 != 0 {
            let last = v.len() - 1;
            v[last] &= (1u64 << (mask_len % 64)) - 1;
        }
        v
    };
    let mut pair: HashMap<(usize, usize), Vec<u64>> = HashMap::new();
    for j in 0..m {
        for i in 0..m {
            if i != j {
                pair.insert(
                    (j, i),
                    product_set(g, cc.subgroups[j].members(), cc.subgroups[i].members()),
                );
            }
        }
    }
    let mut failures = Vec::new();
    for tau_mask in 0u32..(1 << m) - 1 {
        let tau: Vec<usize> = (0..m).filter(|b| tau_mask >> b & 1 == 1).collect();
        if tau.is_empty() {
            continue;
        }
        let mut k_tau = cc.subgroups[tau[0]].clone();
        for &j in &tau[1..] {
            k_tau = k_tau.intersect(&cc.subgroups[j]);
        }
        for i in (0..m).filter(|i| !tau.contains(i)) {
            let lhs = product_set(g, k_tau.members(), cc.subgroups[i].members());
            let mut rhs = trim(full.clone());
            for &j in &tau {
                for (r, p) in rhs.iter_mut().zip(&pair[&(j, i)]) {
                    *r &= p;
                }
            }
            if lhs != rhs {
                failures.push((tau.clone(), i));
            }
        }
    }
    let perms: Vec<Vec<Vertex>> = g.generators().iter().map(|&s| cc.permutation(s)).collect();
    let orbit = cc.complex.top_face_orbit(&perms);
    let top = cc.complex.count(cc.complex.top_dim());
    let criterion_holds = failures.is_empty();
    let transitive = orbit == top;
    SymmetryCertificate {
        criterion_holds,
        criterion_failures: failures,
        orbit_size: orbit,
        top_faces: top,
        transitive,
        agree: criterion_holds == transitive,
    }
}

/// Boundary of the tetrahedron.
pub fn tetrahedron_boundary() -> SimplicialComplex {
    SimplicialComplex::from_maximal((0..4u32).map(|skip| {
        Simplex::new((0..4).filter(|&v| v != skip).collect())
    }))
}

/// Boundary of the octahedron on vertices `0..6`, antipodal pairs `(0,1), (2,3), (4,5)`.
pub fn octahedron() -> SimplicialComplex {
    let mut faces = Vec::new();
    for a in [0, 1] {
        for b in [2, 3] {
            for c in [4, 5] {
                faces.push(Simplex::new(vec![a, b, c]));
            }
        }
    }
    SimplicialComplex::from_maximal(faces)
}

/// The 7-vertex triangulated torus (14 triangles `{i, i+1, i+3}`, `{i, i+2, i+3}` mod 7).
pub fn torus7() -> SimplicialComplex {
    let mut faces = Vec::new();
    for i in 0..7u32 {
        faces.push(Simplex::new(vec![i, (i + 1) % 7, (i + 3) % 7]));
        faces.push(Simplex::new(vec![i, (i + 2) % 7, (i + 3) % 7]));
    }
    SimplicialComplex::from_maximal(faces)
}

/// A graph as a 1-dimensional complex (isolated vertices allowed).
pub fn graph(vertices: u32, edges: &[(u32, u32)]) -> SimplicialComplex {
    let mut faces: Vec<Simplex> = (0..vertices).map(Simplex::vertex).collect();
    faces.extend(edges.iter().map(|&(a, b)| Simplex::new(vec![a, b])));
    SimplicialComplex::from_maximal(faces)
}

pub fn cycle_graph(n: u32) -> SimplicialComplex {
    let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph(n, &edges)
}

pub fn complete_graph(n: u32) -> SimplicialComplex {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b));
        }
    }
    graph(n, &edges)
}

pub fn petersen_graph() -> SimplicialComplex {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    graph(10, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{Construction, DEFAULT_SIZE_CAP};

    fn unip_complex(q: u32) -> CosetComplex {
        let c = Construction::UnipFq { n: 3, q };
        let g = Arc::new(c.build(DEFAULT_SIZE_CAP).unwrap());
        let ks = c.subgroups(&g).unwrap();
        build_coset_complex(g, ks).unwrap()
    }

    #[test]
    fn simplex_ops() {
        let s = Simplex::new(vec![3, 1, 2]);
        assert_eq!(s.vertices(), &[1, 2, 3]);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.facets().count(), 3);
        assert_eq!(Simplex::empty().dim(), -1);
        assert_eq!(s.subsets().len(), 8);
    }

    #[test]
    fn clique_basics() {
        let tri = clique_closure(&cycle_graph(3), 2);
        assert_eq!(tri.count(2), 1);
        let sq = clique_closure(&cycle_graph(4), 2);
        assert_eq!(sq.count(2), 0);
        let k5 = clique_closure(&complete_graph(5), 2);
        assert_eq!(k5.count(2), 10);
        assert_eq!(k5.top_dim(), 2);
    }

    #[test]
    fn links() {
        let x = tetrahedron_boundary();
        for v in 0..4 {
            let l = x.link(&Simplex::vertex(v)).unwrap();
            assert_eq!(l.count(0), 3);
            assert_eq!(l.count(1), 3);
            assert_eq!(l.top_dim(), 1);
        }
        let top = x.faces(2)[0].clone();
        let l = x.link(&top).unwrap();
        assert_eq!(l.top_dim(), -1);
        assert_eq!(l.count(-1), 1);
        assert_eq!(x.link(&Simplex::empty()).unwrap(), x);
        assert!(matches!(
            x.link(&Simplex::new(vec![0, 9])),
            Err(ComplexError::NotAFace(_))
        ));
    }

    #[test]
    fn tetrahedron_weights() {
        let x = tetrahedron_boundary();
        let w = weights(&x).unwrap();
        for i in 0..4 {
            assert_eq!(w.weight(0, i), Rational::new(1, 4));
        }
        for k in -1..=2 {
            assert_eq!(w.total(k), Rational::from_integer(1));
        }
        for i in 0..4 {
            assert_eq!(w.weight(2, i), Rational::new(1, 4));
        }
        let not_pure = graph(3, &[(0, 1)]);
        assert_eq!(weights(&not_pure).unwrap_err(), ComplexError::NotPure);
    }

    #[test]
    fn standard_complexes() {
        assert_eq!(octahedron().count(2), 8);
        assert_eq!(octahedron().count(1), 12);
        let t = torus7();
        assert_eq!((t.count(0), t.count(1), t.count(2)), (7, 21, 14));
        assert!(t.is_pure());
        let p = petersen_graph();
        assert_eq!(p.count(1), 15);
        assert!(p.adjacency().iter().all(|a| a.len() == 3));
    }

    #[test]
    fn json_round_trip() {
        let x = torus7();
        let y = SimplicialComplex::from_json(&x.to_json()).unwrap();
        assert_eq!(x, y);
        let bad = r#"{"top_dim":1,"vertex_types":null,"faces":{"0":[[0]],"1":[[0,1]]}}"#;
        assert!(matches!(
            SimplicialComplex::from_json(bad),
            Err(ComplexError::NotClosed(_))
        ));
    }

    #[test]
    fn unip_coset_complex_counts() {
        let cc = unip_complex(2);
        let x = &cc.complex;
        assert_eq!(x.count(0), 8 + 16 + 8);
        assert!(x.is_pure());
        assert!(x.is_partite());
        let triple = cc.subgroups[0]
            .intersect(&cc.subgroups[1])
            .intersect(&cc.subgroups[2]);
        assert_eq!(x.count(2), cc.group.len() / triple.order());
        let cert = check_strong_symmetry(&cc);
        assert!(cert.criterion_holds && cert.transitive && cert.agree);
    }

    #[test]
    fn edge_lemma() {
        let cc = unip_complex(2);
        let g = &cc.group;
        let x = &cc.complex;
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            for a in g.elements().step_by(5) {
                for b in g.elements().step_by(7) {
                    let va = cc.vertex_of(i, a);
                    let vb = cc.vertex_of(j, b);
                    let edge = x.contains(&Simplex::new(vec![va, vb]));
                    let lemma = cc.subgroups[j]
                        .members()
                        .iter()
                        .any(|&h| cc.vertex_of(i, g.mul(b, h)) == va);
                    assert_eq!(edge, lemma);
                }
            }
        }
    }

    #[test]
    fn action_is_simplicial() {
        let cc = unip_complex(2);
        for g in cc.group.elements().step_by(9) {
            assert!(cc.complex.is_automorphism(&cc.permutation(g)));
        }
    }
}
