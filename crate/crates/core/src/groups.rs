//! Finite matrix groups by generator closure, subgroups, cosets and
//! factorization lengths over unions of subgroups.

use std::hash::BuildHasher;
use std::path::Path;
use std::sync::OnceLock;

use hashbrown::hash_table::HashTable;
use hashbrown::DefaultHashBuilder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{mul_raw, AlgebraError, MatrixSpace, Ring, RingMode, SquareMatrix};

pub type ElementId = u32;

pub const DEFAULT_SIZE_CAP: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group exceeds the size cap {cap} ({reached} elements after {layers} complete layers)")]
    GroupTooLarge {
        cap: usize,
        reached: usize,
        layers: usize,
    },
    #[error("element is not in the group")]
    ForeignElement,
    #[error("element {0} is not generated by the alphabet")]
    Unreachable(ElementId),
    #[error("subgroups do not generate the group ({unreachable} elements unreachable)")]
    NotGenerating { unreachable: usize },
    #[error("peel pattern does not apply: {0}")]
    ShapeMismatch(String),
    #[error("coset count {cosets} times subgroup order {order} differs from group order {group}")]
    Lagrange {
        cosets: usize,
        order: usize,
        group: usize,
    },
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, GroupError>;

/// Bit-packing of matrix coefficient data into short keys.
#[derive(Clone, Copy, Debug)]
struct Codec {
    digits: usize,
    bits: usize,
    key_len: usize,
}

impl Codec {
    fn new(space: &MatrixSpace) -> Codec {
        let q = space.ring.base().order();
        let bits = (32 - (q - 1).leading_zeros()) as usize;
        let digits = space.size * space.size * space.ring.width();
        Codec {
            digits,
            bits,
            key_len: (digits * bits).div_ceil(8),
        }
    }

    fn pack(&self, raw: &[u8], out: &mut [u8]) {
        out.fill(0);
        let mut pos = 0;
        for &d in raw {
            let mut v = d as u32;
            let mut left = self.bits;
            while left > 0 {
                let byte = pos / 8;
                let off = pos % 8;
                let take = left.min(8 - off);
                out[byte] |= ((v & ((1 << take) - 1)) as u8) << off;
                v >>= take;
                left -= take;
                pos += take;
            }
        }
    }

    fn unpack(&self, key: &[u8], out: &mut [u8]) {
        let mut pos = 0;
        for d in out.iter_mut().take(self.digits) {
            let mut v = 0u32;
            let mut got = 0;
            while got < self.bits {
                let byte = pos / 8;
                let off = pos % 8;
                let take = (self.bits - got).min(8 - off);
                v |= (((key[byte] >> off) as u32) & ((1 << take) - 1)) << got;
                got += take;
                pos += take;
            }
            *d = v as u8;
        }
    }
}

/// An interned finite matrix group. Element 0 is the identity; ids follow
/// breadth-first insertion order from the sorted generators.
pub struct Group {
    space: MatrixSpace,
    codec: Codec,
    keys: Vec<u8>,
    index: HashTable<u32>,
    hasher: DefaultHashBuilder,
    generators: Vec<ElementId>,
    layer_starts: Vec<usize>,
    inverses: OnceLock<Vec<ElementId>>,
}

impl std::fmt::Debug for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Group")
            .field("space", &self.space)
            .field("order", &self.len())
            .field("generators", &self.generators.len())
            .finish()
    }
}

impl Group {
    fn empty(space: MatrixSpace) -> Group {
        Group {
            space,
            codec: Codec::new(&space),
            keys: Vec::new(),
            index: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
            generators: Vec::new(),
            layer_starts: vec![0],
            inverses: OnceLock::new(),
        }
    }

    fn key(&self, id: ElementId) -> &[u8] {
        let l = self.codec.key_len;
        &self.keys[id as usize * l..(id as usize + 1) * l]
    }

    fn find_key(&self, key: &[u8]) -> Option<ElementId> {
        let h = self.hasher.hash_one(key);
        let l = self.codec.key_len;
        let keys = &self.keys;
        self.index
            .find(h, |&i| &keys[i as usize * l..(i as usize + 1) * l] == key)
            .copied()
    }

    /// Insert a key; returns (id, fresh).
    fn intern_key(&mut self, key: &[u8]) -> (ElementId, bool) {
        if let Some(id) = self.find_key(key) {
            return (id, false);
        }
        let id = self.len() as u32;
        self.keys.extend_from_slice(key);
        let h = self.hasher.hash_one(key);
        let l = self.codec.key_len;
        let keys = &self.keys;
        let hasher = &self.hasher;
        self.index.insert_unique(h, id, |&i| {
            hasher.hash_one(&keys[i as usize * l..(i as usize + 1) * l])
        });
        (id, true)
    }

    pub fn space(&self) -> MatrixSpace {
        self.space
    }

    pub fn ring(&self) -> Ring {
        self.space.ring
    }

    pub fn len(&self) -> usize {
        self.keys.len() / self.codec.key_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn identity(&self) -> ElementId {
        0
    }

    pub fn generators(&self) -> &[ElementId] {
        &self.generators
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> {
        0..self.len() as u32
    }

    /// Number of completed breadth-first layers (word length in the generators).
    pub fn layer_count(&self) -> usize {
        self.layer_starts.len() - 1
    }

    /// Generator word length of an element, read off the closure layers.
    pub fn generator_length(&self, id: ElementId) -> usize {
        self.layer_starts.partition_point(|&s| s <= id as usize) - 1
    }

    pub fn raw(&self, id: ElementId) -> Vec<u8> {
        let mut out = vec![0u8; self.codec.digits];
        self.codec.unpack(self.key(id), &mut out);
        out
    }

    pub fn matrix(&self, id: ElementId) -> SquareMatrix {
        SquareMatrix::from_raw(self.space.ring, self.space.size, self.raw(id))
            .expect("stored data is well formed")
    }

    pub fn lookup_raw(&self, raw: &[u8]) -> Option<ElementId> {
        let mut key = vec![0u8; self.codec.key_len];
        self.codec.pack(raw, &mut key);
        self.find_key(&key)
    }

    pub fn lookup(&self, m: &SquareMatrix) -> Option<ElementId> {
        if m.ring() != self.space.ring || m.size() != self.space.size {
            return None;
        }
        self.lookup_raw(m.raw())
    }

    pub fn mul(&self, a: ElementId, b: ElementId) -> ElementId {
        let mut out = vec![0u8; self.codec.digits];
        mul_raw(self.space.ring, self.space.size, &self.raw(a), &self.raw(b), &mut out)
            .expect("product of group elements stays in the ring");
        self.lookup_raw(&out).expect("group is closed under products")
    }

    /// Product of a sequence of elements.
    pub fn product(&self, ids: impl IntoIterator<Item = ElementId>) -> ElementId {
        ids.into_iter().fold(0, |acc, x| self.mul(acc, x))
    }

    fn compute_inverse(&self, id: ElementId) -> ElementId {
        let m = self.matrix(id);
        if let Ok(inv) = m.inverse() {
            return self.lookup(&inv).expect("group is closed under inverses");
        }
        let mut prev = 0;
        let mut cur = id;
        while cur != 0 {
            prev = cur;
            cur = self.mul(cur, id);
        }
        prev
    }

    pub fn inverse(&self, id: ElementId) -> ElementId {
        if let Some(t) = self.inverses.get() {
            return t[id as usize];
        }
        self.compute_inverse(id)
    }

    /// Fill the inverse table so later `inverse` calls are lookups.
    pub fn cache_inverses(&self) {
        self.inverses.get_or_init(|| {
            let mut t = vec![u32::MAX; self.len()];
            for g in self.elements() {
                if t[g as usize] == u32::MAX {
                    let h = self.compute_inverse(g);
                    t[g as usize] = h;
                    t[h as usize] = g;
                }
            }
            t
        });
    }

    /// `g^{-1} h^{-1} g h`.
    pub fn commutator(&self, g: ElementId, h: ElementId) -> ElementId {
        self.product([self.inverse(g), self.inverse(h), g, h])
    }

    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let file = CacheFile {
            version: CACHE_VERSION,
            q: self.space.ring.base().order(),
            mode: mode_tag(self.space.ring.mode()),
            size: self.space.size,
            degree_constrained: self.space.degree_constrained,
            generators: self.generators.clone(),
            layer_starts: self.layer_starts.clone(),
            key_len: self.codec.key_len,
            keys: hex(&self.keys),
        };
        let text = serde_json::to_string(&file).map_err(|e| GroupError::Cache(e.to_string()))?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| GroupError::Cache(e.to_string()))?;
        }
        std::fs::write(path, text).map_err(|e| GroupError::Cache(e.to_string()))
    }

    /// Load a cache written by [`Group::save_cache`] for the same matrix space.
    pub fn load_cache(path: &Path, space: MatrixSpace) -> Result<Group> {
        let text = std::fs::read_to_string(path).map_err(|e| GroupError::Cache(e.to_string()))?;
        let file: CacheFile =
            serde_json::from_str(&text).map_err(|e| GroupError::Cache(e.to_string()))?;
        if file.version != CACHE_VERSION
            || file.q != space.ring.base().order()
            || file.mode != mode_tag(space.ring.mode())
            || file.size != space.size
            || file.degree_constrained != space.degree_constrained
        {
            return Err(GroupError::Cache("cache does not match the requested group".into()));
        }
        let mut g = Group::empty(space);
        if file.key_len != g.codec.key_len {
            return Err(GroupError::Cache("key length mismatch".into()));
        }
        let keys = unhex(&file.keys).ok_or_else(|| GroupError::Cache("bad hex".into()))?;
        for key in keys.chunks(g.codec.key_len) {
            let (_, fresh) = g.intern_key(key);
            if !fresh {
                return Err(GroupError::Cache("duplicate element".into()));
            }
        }
        g.generators = file.generators;
        g.layer_starts = file.layer_starts;
        Ok(g)
    }
}

const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    q: u32,
    mode: String,
    size: usize,
    degree_constrained: bool,
    generators: Vec<ElementId>,
    layer_starts: Vec<usize>,
    key_len: usize,
    keys: String,
}

fn mode_tag(mode: RingMode) -> String {
    match mode {
        RingMode::Field => "field".into(),
        RingMode::Polynomial { max_degree } => format!("poly{max_degree}"),
        RingMode::Truncated { s } => format!("trunc{s}"),
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn unhex(s: &str) -> Option<Vec<u8>> {
    if s.len() % 2 != 0 {
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).ok())
        .collect()
}

const CHUNK: usize = 1 << 15;

/// Breadth-first closure of `generators` under right multiplication.
pub fn generate_closure(
    space: MatrixSpace,
    generators: &[SquareMatrix],
    size_cap: usize,
) -> Result<Group> {
    let mut g = Group::empty(space);
    for m in generators {
        if m.ring() != space.ring || m.size() != space.size {
            return Err(AlgebraError::RingMismatch.into());
        }
    }
    let id = space.identity();
    let mut gen_keys: Vec<Vec<u8>> = generators
        .iter()
        .filter(|m| !m.is_identity())
        .map(|m| {
            let mut k = vec![0u8; g.codec.key_len];
            g.codec.pack(m.raw(), &mut k);
            k
        })
        .collect();
    gen_keys.sort();
    gen_keys.dedup();
    let mut key = vec![0u8; g.codec.key_len];
    g.codec.pack(id.raw(), &mut key);
    g.intern_key(&key);
    g.layer_starts = vec![0, 1];

    let gen_raw: Vec<Vec<u8>> = gen_keys
        .iter()
        .map(|k| {
            let mut r = vec![0u8; g.codec.digits];
            g.codec.unpack(k, &mut r);
            r
        })
        .collect();
    let too_large = |g: &Group| GroupError::GroupTooLarge {
        cap: size_cap,
        reached: g.len(),
        layers: g.layer_count(),
    };
    if g.len() > size_cap {
        return Err(too_large(&g));
    }

    let mut layer_begin = 0usize;
    loop {
        let layer_end = g.len();
        if layer_begin == layer_end {
            break;
        }
        let mut start = layer_begin;
        while start < layer_end {
            let stop = (start + CHUNK).min(layer_end);
            let codec = g.codec;
            let ring = space.ring;
            let size = space.size;
            let keys_ref = &g.keys;
            let products: Vec<Vec<u8>> = (start..stop)
                .into_par_iter()
                .map(|e| {
                    let l = codec.key_len;
                    let mut a = vec![0u8; codec.digits];
                    codec.unpack(&keys_ref[e * l..(e + 1) * l], &mut a);
                    let mut prod = vec![0u8; codec.digits];
                    let mut out = vec![0u8; l * gen_raw.len()];
                    for (j, s) in gen_raw.iter().enumerate() {
                        mul_raw(ring, size, &a, s, &mut prod)
                            .expect("generator products stay in the ring");
                        codec.pack(&prod, &mut out[j * l..(j + 1) * l]);
                    }
                    out
                })
                .collect();
            for block in &products {
                for k in block.chunks(g.codec.key_len) {
                    g.intern_key(k);
                    if g.len() > size_cap {
                        return Err(too_large(&g));
                    }
                }
            }
            start = stop;
        }
        layer_begin = layer_end;
        if g.len() > layer_end {
            g.layer_starts.push(g.len());
        }
    }
    g.generators = gen_keys
        .iter()
        .map(|k| g.find_key(k).expect("generators are interned"))
        .collect();
    Ok(g)
}

/// A subgroup given by its member set.
#[derive(Clone, Debug)]
pub struct Subgroup {
    generators: Vec<ElementId>,
    members: Vec<ElementId>,
    mask: Vec<u64>,
}

impl Subgroup {
    fn from_members(generators: Vec<ElementId>, mut members: Vec<ElementId>, n: usize) -> Subgroup {
        members.sort_unstable();
        members.dedup();
        let mut mask = vec![0u64; n.div_ceil(64)];
        for &m in &members {
            mask[m as usize / 64] |= 1 << (m % 64);
        }
        Subgroup {
            generators,
            members,
            mask,
        }
    }

    pub fn whole(group: &Group) -> Subgroup {
        Subgroup::from_members(group.generators.clone(), group.elements().collect(), group.len())
    }

    pub fn trivial(group: &Group) -> Subgroup {
        Subgroup::from_members(Vec::new(), vec![0], group.len())
    }

    pub fn generators(&self) -> &[ElementId] {
        &self.generators
    }

    pub fn members(&self) -> &[ElementId] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn contains(&self, id: ElementId) -> bool {
        (id as usize / 64) < self.mask.len() && self.mask[id as usize / 64] >> (id % 64) & 1 == 1
    }

    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        let members: Vec<ElementId> = self
            .members
            .iter()
            .copied()
            .filter(|&m| other.contains(m))
            .collect();
        Subgroup::from_members(members.clone(), members, self.mask.len() * 64)
    }

    /// Membership closure under products (used as an invariant check).
    pub fn is_closed(&self, group: &Group) -> bool {
        self.contains(0)
            && self
                .members
                .iter()
                .all(|&a| self.members.iter().all(|&b| self.contains(group.mul(a, b))))
    }
}

pub fn subgroup_closure(group: &Group, generators: &[ElementId]) -> Result<Subgroup> {
    let n = group.len();
    if generators.iter().any(|&g| g as usize >= n) {
        return Err(GroupError::ForeignElement);
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut members = vec![0];
    let mut head = 0;
    while head < members.len() {
        let a = members[head];
        head += 1;
        for &s in generators {
            let b = group.mul(a, s);
            if !seen[b as usize] {
                seen[b as usize] = true;
                members.push(b);
            }
        }
    }
    Ok(Subgroup::from_members(generators.to_vec(), members, n))
}

/// Subgroup generated by matrices, which must lie in the group.
pub fn subgroup_from_matrices(group: &Group, gens: &[SquareMatrix]) -> Result<Subgroup> {
    let ids = gens
        .iter()
        .map(|m| group.lookup(m).ok_or(GroupError::ForeignElement))
        .collect::<Result<Vec<_>>>()?;
    subgroup_closure(group, &ids)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CosetId {
    pub subgroup_index: usize,
    pub representative: ElementId,
}

/// Left cosets `gK`, indexed in order of their least element.
#[derive(Clone, Debug)]
pub struct CosetPartition {
    pub subgroup_index: usize,
    coset_of: Vec<u32>,
    members: Vec<Vec<ElementId>>,
}

impl CosetPartition {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn coset_of(&self, g: ElementId) -> u32 {
        self.coset_of[g as usize]
    }

    pub fn members(&self, coset: u32) -> &[ElementId] {
        &self.members[coset as usize]
    }

    pub fn representative(&self, coset: u32) -> ElementId {
        self.members[coset as usize][0]
    }

    pub fn coset_id(&self, g: ElementId) -> CosetId {
        CosetId {
            subgroup_index: self.subgroup_index,
            representative: self.representative(self.coset_of(g)),
        }
    }
}

pub fn enumerate_cosets(
    group: &Group,
    k: &Subgroup,
    subgroup_index: usize,
) -> Result<CosetPartition> {
    let n = group.len();
    let mut coset_of = vec![u32::MAX; n];
    let mut members: Vec<Vec<ElementId>> = Vec::new();
    let ring = group.space.ring;
    let size = group.space.size;
    let k_raw: Vec<Vec<u8>> = k.members.iter().map(|&h| group.raw(h)).collect();
    let mut prod = vec![0u8; group.codec.digits];
    for g in group.elements() {
        if coset_of[g as usize] != u32::MAX {
            continue;
        }
        let c = members.len() as u32;
        let a = group.raw(g);
        let mut list = Vec::with_capacity(k.order());
        for h in &k_raw {
            mul_raw(ring, size, &a, h, &mut prod)?;
            let x = group.lookup_raw(&prod).ok_or(GroupError::ForeignElement)?;
            coset_of[x as usize] = c;
            list.push(x);
        }
        list.sort_unstable();
        members.push(list);
    }
    if members.len() * k.order() != n {
        return Err(GroupError::Lagrange {
            cosets: members.len(),
            order: k.order(),
            group: n,
        });
    }
    Ok(CosetPartition {
        subgroup_index,
        coset_of,
        members,
    })
}

/// Shortest lengths of every element as a product of letters from the union
/// of the subgroups (identity excluded). `u32::MAX` marks unreachable elements.
///
/// Right multiplication by a letter of `K_i` stays inside the left coset `gK_i`,
/// so each coset is expanded once per subgroup.
pub fn factorization_lengths(group: &Group, partitions: &[CosetPartition]) -> Vec<u32> {
    let n = group.len();
    let mut dist = vec![u32::MAX; n];
    if n == 0 {
        return dist;
    }
    let mut expanded: Vec<Vec<bool>> = partitions.iter().map(|p| vec![false; p.count()]).collect();
    dist[0] = 0;
    let mut queue = std::collections::VecDeque::from([0u32]);
    while let Some(g) = queue.pop_front() {
        let d = dist[g as usize];
        for (p, done) in partitions.iter().zip(expanded.iter_mut()) {
            let c = p.coset_of(g);
            if done[c as usize] {
                continue;
            }
            done[c as usize] = true;
            for &h in p.members(c) {
                if dist[h as usize] == u32::MAX {
                    dist[h as usize] = d + 1;
                    queue.push_back(h);
                }
            }
        }
    }
    dist
}

pub fn partitions_for(group: &Group, subgroups: &[Subgroup]) -> Result<Vec<CosetPartition>> {
    subgroups
        .iter()
        .enumerate()
        .map(|(i, k)| enumerate_cosets(group, k, i))
        .collect()
}

pub fn min_factorization_length(
    group: &Group,
    g: ElementId,
    subgroups: &[Subgroup],
) -> Result<u32> {
    if g as usize >= group.len() {
        return Err(GroupError::ForeignElement);
    }
    let dist = factorization_lengths(group, &partitions_for(group, subgroups)?);
    match dist[g as usize] {
        u32::MAX => Err(GroupError::Unreachable(g)),
        d => Ok(d),
    }
}

/// Max over the group of the shortest factorization length.
pub fn bounded_generation_diameter(group: &Group, subgroups: &[Subgroup]) -> Result<u32> {
    let dist = factorization_lengths(group, &partitions_for(group, subgroups)?);
    diameter_of(&dist)
}

pub fn diameter_of(dist: &[u32]) -> Result<u32> {
    let unreachable = dist.iter().filter(|&&d| d == u32::MAX).count();
    if unreachable > 0 {
        return Err(GroupError::NotGenerating { unreachable });
    }
    Ok(dist.iter().copied().max().unwrap_or(0))
}

/// Split a unitriangular matrix as `g1 * g2 * e_{1,n+1}(r)` where `g1` is
/// supported on rows/columns `2..n+1` and `g2` on the first row without the corner.
pub fn gauss_peel_matrix(
    m: &SquareMatrix,
) -> Result<(SquareMatrix, SquareMatrix, SquareMatrix)> {
    let size = m.size();
    if size < 3 || !m.is_unitriangular() {
        return Err(GroupError::ShapeMismatch(
            "needs a unitriangular matrix of size at least 3".into(),
        ));
    }
    let ring = m.ring();
    let w = ring.width();
    let raw = m.raw();
    let mut g1 = SquareMatrix::identity(ring, size).raw().to_vec();
    for r in 1..size {
        for c in 1..size {
            let at = (r * size + c) * w;
            g1[at..at + w].copy_from_slice(&raw[at..at + w]);
        }
    }
    let mut g2 = SquareMatrix::identity(ring, size).raw().to_vec();
    for c in 1..size - 1 {
        let at = c * w;
        g2[at..at + w].copy_from_slice(&raw[at..at + w]);
    }
    let mut res = SquareMatrix::identity(ring, size).raw().to_vec();
    let at = (size - 1) * w;
    res[at..at + w].copy_from_slice(&raw[at..at + w]);
    Ok((
        SquareMatrix::from_raw(ring, size, g1)?,
        SquareMatrix::from_raw(ring, size, g2)?,
        SquareMatrix::from_raw(ring, size, res)?,
    ))
}

/// [`gauss_peel_matrix`] on group elements, checking the factors lie in `left`
/// and `right`; the product is verified.
pub fn gauss_peel(
    group: &Group,
    g: ElementId,
    left: &Subgroup,
    right: &Subgroup,
) -> Result<(ElementId, ElementId, ElementId)> {
    let (a, b, c) = gauss_peel_matrix(&group.matrix(g))?;
    let ids = (
        group.lookup(&a).ok_or(GroupError::ForeignElement)?,
        group.lookup(&b).ok_or(GroupError::ForeignElement)?,
        group.lookup(&c).ok_or(GroupError::ForeignElement)?,
    );
    if !left.contains(ids.0) || !right.contains(ids.1) {
        return Err(GroupError::ShapeMismatch(
            "factors fall outside the supplied subgroups".into(),
        ));
    }
    if group.product([ids.0, ids.1, ids.2]) != g {
        return Err(GroupError::ShapeMismatch("recomposition failed".into()));
    }
    Ok(ids)
}

/// The standard groups and their subgroup families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Construction {
    /// `Unip_{n+1}(F_q)` with `K_i = <e_{j,j+1}(a) : j != i+1>`, `i = 0..n-1`.
    UnipFq { n: usize, q: u32 },
    /// `(n+1) x (n+1)` unitriangular matrices over `F_q[t]` with the degree pattern,
    /// generated by `e_{i,i+1}(a + bt)`.
    UnipPoly { n: usize, q: u32 },
    /// `4 x 4` matrices over `F_q[t]/(t^s)` generated by `e_12, e_23, e_34, e_41` at `a + bt`.
    Xsq { q: u32, s: usize },
}

impl Construction {
    pub fn space(&self) -> Result<MatrixSpace> {
        Ok(match *self {
            Construction::UnipFq { n, q } => MatrixSpace::new(Ring::field(q)?, n + 1),
            Construction::UnipPoly { n, q } => {
                MatrixSpace::constrained(Ring::polynomial(q, n)?, n + 1)
            }
            Construction::Xsq { q, s } => MatrixSpace::new(Ring::truncated(q, s)?, 4),
        })
    }

    /// Root positions of the generating letters, in order.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        match *self {
            Construction::UnipFq { n, .. } | Construction::UnipPoly { n, .. } => {
                (1..=n).map(|i| (i, i + 1)).collect()
            }
            Construction::Xsq { .. } => vec![(1, 2), (2, 3), (3, 4), (4, 1)],
        }
    }

    /// Nonzero entries allowed for the generating letters.
    fn letter_values(&self, space: &MatrixSpace) -> Vec<crate::algebra::RingElement> {
        let ring = space.ring;
        let all = match self {
            Construction::UnipFq { .. } => ring.elements_up_to_degree(0),
            _ => ring.elements_up_to_degree(1),
        };
        all.into_iter().filter(|e| !e.is_zero()).collect()
    }

    pub fn letters_at(&self, pos: (usize, usize)) -> Result<Vec<SquareMatrix>> {
        let space = self.space()?;
        self.letter_values(&space)
            .iter()
            .map(|r| Ok(space.elementary(pos.0, pos.1, r)?))
            .collect()
    }

    pub fn generators(&self) -> Result<Vec<SquareMatrix>> {
        let mut out = Vec::new();
        for p in self.positions() {
            out.extend(self.letters_at(p)?);
        }
        Ok(out)
    }

    /// Positions generating each subgroup of the family.
    pub fn subgroup_positions(&self) -> Vec<Vec<(usize, usize)>> {
        match *self {
            Construction::UnipFq { n, .. } | Construction::UnipPoly { n, .. } => (0..n)
                .map(|i| {
                    (1..=n)
                        .filter(|&j| j != i + 1)
                        .map(|j| (j, j + 1))
                        .collect()
                })
                .collect(),
            Construction::Xsq { .. } => {
                let all = self.positions();
                let mut out: Vec<Vec<(usize, usize)>> = (0..3)
                    .map(|i| all.iter().copied().filter(|&p| p != all[i]).collect())
                    .collect();
                out.push(all[..3].to_vec());
                out
            }
        }
    }

    pub fn build(&self, size_cap: usize) -> Result<Group> {
        generate_closure(self.space()?, &self.generators()?, size_cap)
    }

    pub fn subgroups(&self, group: &Group) -> Result<Vec<Subgroup>> {
        self.subgroup_positions()
            .iter()
            .map(|ps| {
                let mut gens = Vec::new();
                for &p in ps {
                    gens.extend(self.letters_at(p)?);
                }
                subgroup_from_matrices(group, &gens)
            })
            .collect()
    }

    /// Build, reusing a cache file in `cache_dir` when present and writing one otherwise.
    pub fn build_cached(&self, size_cap: usize, cache_dir: Option<&Path>) -> Result<Group> {
        let Some(dir) = cache_dir else {
            return self.build(size_cap);
        };
        let path = dir.join(format!("{}.json", self.tag()));
        if let Ok(g) = Group::load_cache(&path, self.space()?) {
            if g.len() <= size_cap {
                return Ok(g);
            }
        }
        let g = self.build(size_cap)?;
        g.save_cache(&path)?;
        Ok(g)
    }

    pub fn tag(&self) -> String {
        match *self {
            Construction::UnipFq { n, q } => format!("unip_fq_n{n}_q{q}"),
            Construction::UnipPoly { n, q } => format!("unip_poly_n{n}_q{q}"),
            Construction::Xsq { q, s } => format!("xsq_q{q}_s{s}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unip(n: usize, q: u32) -> (Group, Vec<Subgroup>) {
        let c = Construction::UnipFq { n, q };
        let g = c.build(DEFAULT_SIZE_CAP).unwrap();
        let ks = c.subgroups(&g).unwrap();
        (g, ks)
    }

    #[test]
    fn codec_round_trip() {
        for q in [2, 3, 5, 9, 31] {
            let space = MatrixSpace::new(Ring::truncated(q, 3).unwrap(), 3);
            let c = Codec::new(&space);
            let raw: Vec<u8> = (0..c.digits).map(|i| (i as u32 * 7 % q) as u8).collect();
            let mut key = vec![0; c.key_len];
            c.pack(&raw, &mut key);
            let mut back = vec![0; c.digits];
            c.unpack(&key, &mut back);
            assert_eq!(raw, back);
        }
    }

    #[test]
    fn unip_orders() {
        for (n, q) in [(2, 2), (3, 2), (3, 3)] {
            let (g, ks) = unip(n, q);
            assert_eq!(g.len(), (q as usize).pow((n * (n + 1) / 2) as u32));
            assert_eq!(ks.len(), n);
            for k in &ks {
                assert!(k.is_closed(&g));
            }
        }
        let (g, ks) = unip(3, 3);
        assert_eq!(ks[0].order(), 27);
        assert_eq!(ks[1].order(), 9);
        assert_eq!(ks[2].order(), 27);
        let both = ks[0].intersect(&ks[1]);
        assert!(both.is_closed(&g));
        assert_eq!(both.order(), 3);
    }

    #[test]
    fn trivial_closure() {
        let space = MatrixSpace::new(Ring::field(2).unwrap(), 3);
        let g = generate_closure(space, &[space.identity()], 10).unwrap();
        assert_eq!(g.len(), 1);
        let k = subgroup_closure(&g, &[]).unwrap();
        assert_eq!(k.order(), 1);
        assert_eq!(bounded_generation_diameter(&g, &[k]).unwrap(), 0);
    }

    #[test]
    fn cap_is_enforced() {
        let c = Construction::UnipFq { n: 3, q: 3 };
        match c.build(100) {
            Err(GroupError::GroupTooLarge { cap, reached, .. }) => {
                assert_eq!(cap, 100);
                assert!(reached > 100);
            }
            other => panic!("expected GroupTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn foreign_generators() {
        let (g, _) = unip(2, 2);
        assert_eq!(
            subgroup_closure(&g, &[999]).unwrap_err(),
            GroupError::ForeignElement
        );
        let other = SquareMatrix::identity(Ring::field(3).unwrap(), 3);
        assert_eq!(
            subgroup_from_matrices(&g, &[other]).unwrap_err(),
            GroupError::ForeignElement
        );
    }

    #[test]
    fn cosets_and_lagrange() {
        let (g, ks) = unip(3, 3);
        let p = enumerate_cosets(&g, &ks[0], 0).unwrap();
        assert_eq!(p.count(), 27);
        let whole = enumerate_cosets(&g, &Subgroup::whole(&g), 0).unwrap();
        assert_eq!(whole.count(), 1);
        for x in [5u32, 100, 700] {
            for &h in ks[0].members() {
                assert_eq!(p.coset_of(x), p.coset_of(g.mul(x, h)));
            }
            let rep = p.coset_id(x).representative;
            assert!(p.members(p.coset_of(x)).iter().all(|&m| m >= rep));
        }
    }

    #[test]
    fn factorization_lengths_basic() {
        let (g, ks) = unip(3, 3);
        assert_eq!(min_factorization_length(&g, 0, &ks).unwrap(), 0);
        for &m in ks[0].members().iter().skip(1) {
            assert_eq!(min_factorization_length(&g, m, &ks).unwrap(), 1);
        }
        let parts = partitions_for(&g, &ks).unwrap();
        let dist = factorization_lengths(&g, &parts);
        // layer property
        for x in g.elements() {
            for k in &ks {
                for &h in k.members() {
                    let y = g.mul(x, h);
                    assert!(dist[y as usize] <= dist[x as usize] + 1);
                }
            }
        }
        assert!(bounded_generation_diameter(&g, &ks).unwrap() <= 6);
    }

    #[test]
    fn not_generating() {
        let (g, ks) = unip(3, 2);
        let only = vec![ks[1].clone()];
        assert!(matches!(
            bounded_generation_diameter(&g, &only),
            Err(GroupError::NotGenerating { .. })
        ));
        let far = g.elements().last().unwrap();
        let parts = partitions_for(&g, &only).unwrap();
        let dist = factorization_lengths(&g, &parts);
        let lost = g.elements().find(|&x| dist[x as usize] == u32::MAX).unwrap();
        assert_eq!(
            min_factorization_length(&g, lost, &only).unwrap_err(),
            GroupError::Unreachable(lost)
        );
        assert!(far > 0);
    }

    #[test]
    fn peel() {
        let (g, ks) = unip(3, 5);
        let ring = g.ring();
        let space = g.space();
        let corner = space.elementary(1, 4, &ring.constant(3)).unwrap();
        let c = g.lookup(&corner).unwrap();
        assert_eq!(gauss_peel(&g, c, &ks[0], &ks[2]).unwrap(), (0, 0, c));
        for x in (0..g.len() as u32).step_by(97) {
            let (a, b, r) = gauss_peel(&g, x, &ks[0], &ks[2]).unwrap();
            assert_eq!(g.product([a, b, r]), x);
        }
        // corner identity
        for a in 0..5u8 {
            let ea = ring.constant(a);
            let lhs = space.elementary(1, 4, &ea).unwrap();
            let rhs = space
                .elementary(1, 3, &ea.neg())
                .unwrap()
                .mul(&space.elementary(3, 4, &ring.one().neg()).unwrap())
                .unwrap()
                .mul(&space.elementary(1, 3, &ea).unwrap())
                .unwrap()
                .mul(&space.elementary(3, 4, &ring.one()).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
        let e34 = g.lookup(&space.elementary(3, 4, &ring.one()).unwrap()).unwrap();
        assert!(matches!(
            gauss_peel(&g, e34, &ks[2], &ks[0]),
            Err(GroupError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn inverses_and_commutators() {
        let (g, _) = unip(3, 3);
        g.cache_inverses();
        for x in g.elements() {
            assert_eq!(g.mul(x, g.inverse(x)), 0);
        }
    }

    #[test]
    fn cache_round_trip() {
        let c = Construction::UnipFq { n: 3, q: 2 };
        let g = c.build(DEFAULT_SIZE_CAP).unwrap();
        let dir = std::env::temp_dir().join(format!("hdx-cache-test-{}", std::process::id()));
        let path = dir.join("g.json");
        g.save_cache(&path).unwrap();
        let h = Group::load_cache(&path, c.space().unwrap()).unwrap();
        assert_eq!(h.len(), g.len());
        for x in g.elements() {
            assert_eq!(g.matrix(x), h.matrix(x));
        }
        assert_eq!(h.generators(), g.generators());
        let wrong = Construction::UnipFq { n: 3, q: 3 }.space().unwrap();
        assert!(Group::load_cache(&path, wrong).is_err());
        std::fs::remove_dir_all(dir).ok();
    }
}
