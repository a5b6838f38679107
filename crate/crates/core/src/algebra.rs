//! Finite fields, polynomial rings over them, and square matrices with
//! entries in those rings.
//!
//! Field elements are encoded as integers `0..q`. For `q = p^m` with `m > 1`
//! the integer `v` stands for the polynomial `sum c_i x^i` where `c_i` are the
//! base-`p` digits of `v`, reduced modulo a fixed irreducible polynomial:
//!
//! | q | modulus        |
//! |---|----------------|
//! | 4 | x^2 + x + 1    |
//! | 8 | x^3 + x + 1    |
//! | 9 | x^2 + 1        |

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unsupported field order {0}")]
    UnsupportedField(u32),
    #[error("value {value} is not an element of F_{q}")]
    InvalidElement { value: u32, q: u32 },
    #[error("index ({i},{j}) out of range for {size}x{size} matrices")]
    IndexOutOfRange { size: usize, i: usize, j: usize },
    #[error("entry ({i},{j}) has degree {degree}, allowed at most {allowed}")]
    DegreeViolation {
        i: usize,
        j: usize,
        degree: usize,
        allowed: i64,
    },
    #[error("ring or size mismatch")]
    RingMismatch,
    #[error("matrix is not unitriangular")]
    NotUnitriangular,
    #[error("polynomial degree exceeds the stored bound {0}")]
    DegreeOverflow(usize),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

const SUPPORTED: [u32; 14] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 17, 19, 23, 29, 31];

/// A finite field with full addition and multiplication tables.
pub struct Field {
    q: u8,
    p: u8,
    m: u8,
    modulus: Vec<u8>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

static FIELDS: OnceLock<Vec<Field>> = OnceLock::new();

fn modulus_for(q: u32) -> Option<(u32, Vec<u8>)> {
    match q {
        4 => Some((2, vec![1, 1, 1])),
        8 => Some((2, vec![1, 1, 0, 1])),
        9 => Some((3, vec![1, 0, 1])),
        _ => None,
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl Field {
    /// Shared instance of `F_q`.
    pub fn get(q: u32) -> Result<&'static Field> {
        let fields = FIELDS.get_or_init(|| SUPPORTED.iter().map(|&q| Field::build(q)).collect());
        fields
            .iter()
            .find(|f| f.q as u32 == q)
            .ok_or(AlgebraError::UnsupportedField(q))
    }

    pub fn is_supported(q: u32) -> bool {
        SUPPORTED.contains(&q)
    }

    fn build(q: u32) -> Field {
        let (p, modulus) = if is_prime(q) {
            (q, vec![0, 1])
        } else {
            modulus_for(q).expect("listed extension field")
        };
        let m = (modulus.len() - 1) as u32;
        let digits = |v: u32| -> Vec<u32> {
            let mut out = vec![0; m as usize];
            let mut v = v;
            for d in out.iter_mut() {
                *d = v % p;
                v /= p;
            }
            out
        };
        let undigits = |d: &[u32]| -> u32 { d.iter().rev().fold(0, |acc, &c| acc * p + c) };
        let n = q as usize;
        let mut add = vec![0u8; n * n];
        let mut mul = vec![0u8; n * n];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = undigits(&sum) as u8;
                let mut prod = vec![0u32; 2 * m as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                // reduce by the monic modulus from the top
                for deg in (m as usize..prod.len()).rev() {
                    let c = prod[deg];
                    if c == 0 {
                        continue;
                    }
                    for (k, &mk) in modulus.iter().enumerate() {
                        let idx = deg - m as usize + k;
                        prod[idx] = (prod[idx] + p - (c * mk as u32) % p) % p;
                    }
                }
                mul[(a * q + b) as usize] = undigits(&prod[..m as usize]) as u8;
            }
        }
        let mut neg = vec![0u8; n];
        let mut inv = vec![0u8; n];
        for a in 0..n {
            for b in 0..n {
                if add[a * n + b] == 0 {
                    neg[a] = b as u8;
                }
                if mul[a * n + b] == 1 {
                    inv[a] = b as u8;
                }
            }
        }
        Field {
            q: q as u8,
            p: p as u8,
            m: m as u8,
            modulus,
            add,
            mul,
            neg,
            inv,
        }
    }

    pub fn order(&self) -> u32 {
        self.q as u32
    }

    pub fn characteristic(&self) -> u32 {
        self.p as u32
    }

    pub fn degree(&self) -> u32 {
        self.m as u32
    }

    /// Coefficients (low degree first) of the defining modulus; `[0, 1]` for prime fields.
    pub fn modulus(&self) -> &[u8] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u8) -> Option<u8> {
        (a != 0).then(|| self.inv[a as usize])
    }

    pub fn element(&self, value: u32) -> Result<u8> {
        if value < self.q as u32 {
            Ok(value as u8)
        } else {
            Err(AlgebraError::InvalidElement {
                value,
                q: self.q as u32,
            })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = u8> {
        0..self.q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingMode {
    /// `F_q` itself.
    Field,
    /// `F_q[t]`, storing coefficients up to `max_degree`; products beyond it are errors.
    Polynomial { max_degree: usize },
    /// `F_q[t]/(t^s)`.
    Truncated { s: usize },
}

#[derive(Clone, Copy)]
pub struct Ring {
    field: &'static Field,
    mode: RingMode,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.field.q == other.field.q && self.mode == other.mode
    }
}
impl Eq for Ring {}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            RingMode::Field => write!(f, "F_{}", self.field.q),
            RingMode::Polynomial { max_degree } => {
                write!(f, "F_{}[t] (deg <= {})", self.field.q, max_degree)
            }
            RingMode::Truncated { s } => write!(f, "F_{}[t]/(t^{})", self.field.q, s),
        }
    }
}

impl Ring {
    pub fn field(q: u32) -> Result<Ring> {
        Ok(Ring {
            field: Field::get(q)?,
            mode: RingMode::Field,
        })
    }

    pub fn polynomial(q: u32, max_degree: usize) -> Result<Ring> {
        Ok(Ring {
            field: Field::get(q)?,
            mode: RingMode::Polynomial { max_degree },
        })
    }

    pub fn truncated(q: u32, s: usize) -> Result<Ring> {
        assert!(s >= 1, "truncation order must be positive");
        Ok(Ring {
            field: Field::get(q)?,
            mode: RingMode::Truncated { s },
        })
    }

    pub fn base(&self) -> &'static Field {
        self.field
    }

    pub fn mode(&self) -> RingMode {
        self.mode
    }

    /// Number of stored coefficients per element.
    pub fn width(&self) -> usize {
        match self.mode {
            RingMode::Field => 1,
            RingMode::Polynomial { max_degree } => max_degree + 1,
            RingMode::Truncated { s } => s,
        }
    }

    /// Number of elements representable in the stored width.
    pub fn stored_size(&self) -> u128 {
        (self.field.q as u128).pow(self.width() as u32)
    }

    pub fn zero(&self) -> RingElement {
        RingElement {
            ring: *self,
            coeffs: vec![0; self.width()],
        }
    }

    pub fn one(&self) -> RingElement {
        self.constant(1)
    }

    pub fn constant(&self, a: u8) -> RingElement {
        let mut e = self.zero();
        e.coeffs[0] = a;
        e
    }

    /// `a t^k`.
    pub fn monomial(&self, a: u8, k: usize) -> Result<RingElement> {
        let w = self.width();
        let mut e = self.zero();
        if k >= w {
            return match self.mode {
                RingMode::Truncated { .. } => Ok(e),
                _ if a == 0 => Ok(e),
                _ => Err(AlgebraError::DegreeOverflow(w - 1)),
            };
        }
        e.coeffs[k] = a;
        Ok(e)
    }

    /// Element from low-degree-first coefficients; trailing coefficients past
    /// the width are truncated in quotient mode and rejected otherwise.
    pub fn element(&self, coeffs: &[u32]) -> Result<RingElement> {
        let w = self.width();
        let mut e = self.zero();
        for (k, &c) in coeffs.iter().enumerate() {
            let c = self.field.element(c)?;
            if k < w {
                e.coeffs[k] = c;
            } else if c != 0 && !matches!(self.mode, RingMode::Truncated { .. }) {
                return Err(AlgebraError::DegreeOverflow(w - 1));
            }
        }
        Ok(e)
    }

    /// All elements of degree at most `d` (or all field elements in field mode).
    pub fn elements_up_to_degree(&self, d: usize) -> Vec<RingElement> {
        let n = (d + 1).min(self.width());
        let q = self.field.q as usize;
        let total = q.pow(n as u32);
        (0..total)
            .map(|mut v| {
                let mut e = self.zero();
                for k in 0..n {
                    e.coeffs[k] = (v % q) as u8;
                    v /= q;
                }
                e
            })
            .collect()
    }

    #[inline]
    fn add_into(&self, a: &[u8], b: &[u8], out: &mut [u8]) {
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = self.field.add(x, y);
        }
    }

    /// `out += a * b`, with truncation or overflow detection per mode.
    #[inline]
    fn mul_acc(&self, a: &[u8], b: &[u8], out: &mut [u8]) -> Result<()> {
        let f = self.field;
        match self.mode {
            RingMode::Field => {
                out[0] = f.add(out[0], f.mul(a[0], b[0]));
            }
            RingMode::Truncated { s } => {
                for (i, &x) in a.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for j in 0..s - i {
                        out[i + j] = f.add(out[i + j], f.mul(x, b[j]));
                    }
                }
            }
            RingMode::Polynomial { max_degree } => {
                for (i, &x) in a.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in b.iter().enumerate() {
                        if y == 0 {
                            continue;
                        }
                        if i + j > max_degree {
                            return Err(AlgebraError::DegreeOverflow(max_degree));
                        }
                        out[i + j] = f.add(out[i + j], f.mul(x, y));
                    }
                }
            }
        }
        Ok(())
    }
}

/// An element of a [`Ring`], stored as a fixed-width coefficient vector.
#[derive(Clone, PartialEq, Eq)]
pub struct RingElement {
    ring: Ring,
    coeffs: Vec<u8>,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ring.mode == RingMode::Field {
            return write!(f, "{}", self.coeffs[0]);
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}t"),
                _ => format!("{c}t^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

impl RingElement {
    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Degree of the polynomial; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        if self.ring != other.ring {
            return Err(AlgebraError::RingMismatch);
        }
        let mut out = self.ring.zero();
        self.ring.add_into(&self.coeffs, &other.coeffs, &mut out.coeffs);
        Ok(out)
    }

    pub fn neg(&self) -> RingElement {
        RingElement {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|&c| self.ring.field.neg(c)).collect(),
        }
    }

    pub fn sub(&self, other: &RingElement) -> Result<RingElement> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        if self.ring != other.ring {
            return Err(AlgebraError::RingMismatch);
        }
        let mut out = self.ring.zero();
        self.ring.mul_acc(&self.coeffs, &other.coeffs, &mut out.coeffs)?;
        Ok(out)
    }
}

/// A square matrix over a [`Ring`], entries stored row-major as coefficient blocks.
#[derive(Clone, PartialEq, Eq)]
pub struct SquareMatrix {
    ring: Ring,
    size: usize,
    data: Vec<u8>,
}

impl std::hash::Hash for SquareMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.size.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:?} {}x{}", self.ring, self.size, self.size)?;
        for r in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl SquareMatrix {
    pub fn identity(ring: Ring, size: usize) -> SquareMatrix {
        let w = ring.width();
        let mut data = vec![0u8; size * size * w];
        for i in 0..size {
            data[(i * size + i) * w] = 1;
        }
        SquareMatrix { ring, size, data }
    }

    /// Wraps raw coefficient data (`size * size * ring.width()` bytes).
    pub fn from_raw(ring: Ring, size: usize, data: Vec<u8>) -> Result<SquareMatrix> {
        if data.len() != size * size * ring.width() {
            return Err(AlgebraError::RingMismatch);
        }
        let q = ring.field.q;
        if let Some(&bad) = data.iter().find(|&&c| c >= q) {
            return Err(AlgebraError::InvalidElement {
                value: bad as u32,
                q: q as u32,
            });
        }
        Ok(SquareMatrix { ring, size, data })
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn raw(&self) -> &[u8] {
        &self.data
    }

    /// Entry at 0-based `(r, c)`.
    pub fn get(&self, r: usize, c: usize) -> RingElement {
        let w = self.ring.width();
        let at = (r * self.size + c) * w;
        RingElement {
            ring: self.ring,
            coeffs: self.data[at..at + w].to_vec(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == SquareMatrix::identity(self.ring, self.size)
    }

    pub fn is_unitriangular(&self) -> bool {
        let w = self.ring.width();
        (0..self.size).all(|r| {
            (0..=r).all(|c| {
                let e = &self.data[(r * self.size + c) * w..(r * self.size + c + 1) * w];
                let want0 = if r == c { 1 } else { 0 };
                e[0] == want0 && e[1..].iter().all(|&x| x == 0)
            })
        })
    }

    pub fn mul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.ring != other.ring || self.size != other.size {
            return Err(AlgebraError::RingMismatch);
        }
        let mut data = vec![0u8; self.data.len()];
        mul_raw(self.ring, self.size, &self.data, &other.data, &mut data)?;
        Ok(SquareMatrix {
            ring: self.ring,
            size: self.size,
            data,
        })
    }

    /// Inverse of a unitriangular matrix as the finite series `sum (-N)^k`.
    pub fn inverse(&self) -> Result<SquareMatrix> {
        if !self.is_unitriangular() {
            return Err(AlgebraError::NotUnitriangular);
        }
        let id = SquareMatrix::identity(self.ring, self.size);
        let f = self.ring.field;
        let minus_n = SquareMatrix {
            ring: self.ring,
            size: self.size,
            data: self
                .data
                .iter()
                .zip(&id.data)
                .map(|(&a, &b)| f.neg(f.sub(a, b)))
                .collect(),
        };
        let mut inv = id.clone();
        let mut term = id;
        for _ in 1..self.size {
            term = term.mul(&minus_n)?;
            for (o, &t) in inv.data.iter_mut().zip(&term.data) {
                *o = f.add(*o, t);
            }
        }
        Ok(inv)
    }

    /// `g^{-1} h^{-1} g h`.
    pub fn commutator(&self, h: &SquareMatrix) -> Result<SquareMatrix> {
        self.inverse()?
            .mul(&h.inverse()?)?
            .mul(self)?
            .mul(h)
    }
}

/// `out = a * b` on raw coefficient data of `size x size` matrices.
pub fn mul_raw(ring: Ring, size: usize, a: &[u8], b: &[u8], out: &mut [u8]) -> Result<()> {
    let w = ring.width();
    out.fill(0);
    for r in 0..size {
        for k in 0..size {
            let x = &a[(r * size + k) * w..(r * size + k + 1) * w];
            if x.iter().all(|&c| c == 0) {
                continue;
            }
            for c in 0..size {
                let y = &b[(k * size + c) * w..(k * size + c + 1) * w];
                let o = &mut out[(r * size + c) * w..(r * size + c + 1) * w];
                ring.mul_acc(x, y, o)?;
            }
        }
    }
    Ok(())
}

/// Matrices of a fixed size over a fixed ring, optionally with the degree
/// pattern `deg A(i,j) <= j - i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixSpace {
    pub ring: Ring,
    pub size: usize,
    pub degree_constrained: bool,
}

impl MatrixSpace {
    pub fn new(ring: Ring, size: usize) -> MatrixSpace {
        MatrixSpace {
            ring,
            size,
            degree_constrained: false,
        }
    }

    pub fn constrained(ring: Ring, size: usize) -> MatrixSpace {
        MatrixSpace {
            ring,
            size,
            degree_constrained: true,
        }
    }

    pub fn identity(&self) -> SquareMatrix {
        SquareMatrix::identity(self.ring, self.size)
    }

    /// `e_{i,j}(r)` with 1-based indices.
    pub fn elementary(&self, i: usize, j: usize, r: &RingElement) -> Result<SquareMatrix> {
        elementary_matrix(self.size, i, j, r, self.degree_constrained)
    }

    /// Whether every entry obeys the degree pattern (always true when unconstrained).
    pub fn obeys_degree_pattern(&self, m: &SquareMatrix) -> bool {
        if !self.degree_constrained {
            return true;
        }
        (0..self.size).all(|r| {
            (0..self.size).all(|c| match m.get(r, c).degree() {
                None => true,
                Some(d) => d as i64 <= c as i64 - r as i64 || (r == c && d == 0),
            })
        })
    }
}

/// `e_{i,j}(r)`: identity with `r` at 1-based position `(i, j)`.
pub fn elementary_matrix(
    n_plus_1: usize,
    i: usize,
    j: usize,
    r: &RingElement,
    degree_constrained: bool,
) -> Result<SquareMatrix> {
    if i == 0 || j == 0 || i > n_plus_1 || j > n_plus_1 || i == j {
        return Err(AlgebraError::IndexOutOfRange {
            size: n_plus_1,
            i,
            j,
        });
    }
    if degree_constrained {
        if let Some(d) = r.degree() {
            let allowed = j as i64 - i as i64;
            if d as i64 > allowed {
                return Err(AlgebraError::DegreeViolation {
                    i,
                    j,
                    degree: d,
                    allowed,
                });
            }
        }
    }
    let ring = r.ring;
    let w = ring.width();
    let mut m = SquareMatrix::identity(ring, n_plus_1);
    let at = ((i - 1) * n_plus_1 + (j - 1)) * w;
    m.data[at..at + w].copy_from_slice(&r.coeffs);
    Ok(m)
}

pub fn matrix_mul(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix> {
    a.mul(b)
}

pub fn matrix_inverse(m: &SquareMatrix) -> Result<SquareMatrix> {
    m.inverse()
}

/// Outcome of an exhaustive relation check.
#[derive(Clone, Debug, Default)]
pub struct RelationCheck {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl RelationCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }

    pub(crate) fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn roots(size: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..=size {
        for j in i + 1..=size {
            out.push((i, j));
        }
    }
    out
}

/// Expected value of `[e_{i1,j1}(a), e_{i2,j2}(b)]` as an optional elementary letter.
pub fn steinberg_commutator(
    (i1, j1): (usize, usize),
    a: &RingElement,
    (i2, j2): (usize, usize),
    b: &RingElement,
) -> Result<Option<((usize, usize), RingElement)>> {
    if j1 == i2 && i1 != j2 {
        Ok(Some(((i1, j2), a.mul(b)?)))
    } else if j2 == i1 && i2 != j1 {
        Ok(Some(((i2, j1), a.mul(b)?.neg())))
    } else {
        Ok(None)
    }
}

fn check_steinberg_with(
    space: MatrixSpace,
    coeffs: impl Fn(usize, usize) -> Vec<RingElement>,
) -> Result<RelationCheck> {
    let mut report = RelationCheck::default();
    let id = space.identity();
    let rs = roots(space.size);
    for &(i, j) in &rs {
        let cs = coeffs(i, j);
        for a in &cs {
            let ea = space.elementary(i, j, a)?;
            for b in &cs {
                let lhs = ea.mul(&space.elementary(i, j, b)?)?;
                let rhs = space.elementary(i, j, &a.add(b)?)?;
                report.record(lhs == rhs, || format!("St1 e{i}{j}({a}) e{i}{j}({b})"));
            }
        }
    }
    for &r1 in &rs {
        for &r2 in &rs {
            for a in &coeffs(r1.0, r1.1) {
                let x = space.elementary(r1.0, r1.1, a)?;
                for b in &coeffs(r2.0, r2.1) {
                    let y = space.elementary(r2.0, r2.1, b)?;
                    let lhs = x.commutator(&y)?;
                    let rhs = match steinberg_commutator(r1, a, r2, b)? {
                        None => id.clone(),
                        Some(((i, j), c)) => space.elementary(i, j, &c)?,
                    };
                    report.record(lhs == rhs, || {
                        format!("St2 [e{:?}({a}), e{:?}({b})]", r1, r2)
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Both Steinberg families over `F_q` for `size x size` matrices, all coefficients.
pub fn verify_steinberg(q: u32, size: usize) -> Result<RelationCheck> {
    let ring = Ring::field(q)?;
    let all = ring.elements_up_to_degree(0);
    check_steinberg_with(MatrixSpace::new(ring, size), |_, _| all.clone())
}

/// Pure-degree families: letters `e_{i,j}(a t^k)` with `k <= j - i` in the
/// degree-constrained polynomial matrix group.
pub fn verify_pure_degree_steinberg(q: u32, size: usize) -> Result<RelationCheck> {
    let ring = Ring::polynomial(q, size - 1)?;
    let space = MatrixSpace::constrained(ring, size);
    let field = ring.base();
    check_steinberg_with(space, |i, j| {
        let mut out = Vec::new();
        for k in 0..=(j - i) {
            for a in field.elements() {
                out.push(ring.monomial(a, k).expect("degree within width"));
            }
        }
        out
    })
}
