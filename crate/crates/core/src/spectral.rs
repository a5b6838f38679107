//! Random-walk spectra of weighted 1-skeletons, the local spectral sweep over
//! links, and an exact certificate for walk eigenvalue bounds.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Simplex, SimplicialComplex, Vertex};
use crate::rational::Rational;

pub const CONVENTION: &str =
    "non-lazy random walk on the 1-skeleton; edge weight = number of top faces containing the edge";

/// Above this many vertices the power iteration is used instead of the dense solver.
pub const DENSE_LIMIT: usize = 4096;

/// Largest graph for the exact rational eigenvalue certificate (cubic in big rationals).
pub const CERTIFY_LIMIT: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no edges")]
    NoEdges,
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// Symmetric nonnegative integer edge weights on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize, u64)>,
}

impl WeightedGraph {
    /// The 1-skeleton of `x`, weighted by top-face counts of its own edges.
    pub fn from_complex(x: &SimplicialComplex) -> WeightedGraph {
        let idx = |v: Vertex| x.index_of(&Simplex::vertex(v)).unwrap();
        let edges = if x.top_dim() < 1 {
            Vec::new()
        } else {
            let counts = x.top_counts();
            x.faces(1)
                .iter()
                .zip(&counts[2])
                .map(|(e, &c)| (idx(e.vertices()[0]), idx(e.vertices()[1]), c))
                .collect()
        };
        WeightedGraph {
            vertices: x.vertex_ids(),
            edges,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut d = vec![0; self.len()];
        for &(a, b, w) in &self.edges {
            d[a] += w;
            d[b] += w;
        }
        d
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for &(a, b, w) in &self.edges {
            if w > 0 {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.len()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Proper 2-coloring exists.
    pub fn is_bipartite(&self) -> bool {
        let adj = self.adjacency();
        let mut color = vec![u8::MAX; self.len()];
        for s in 0..self.len() {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        stack.push(v);
                    } else if color[v] == color[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `D^{-1/2} W D^{-1/2}`.
    pub fn normalized(&self) -> Result<DMatrix<f64>> {
        if self.edges.iter().all(|e| e.2 == 0) {
            return Err(SpectralError::NoEdges);
        }
        if !self.is_connected() {
            return Err(SpectralError::Disconnected);
        }
        let d = self.degrees();
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for &(a, b, w) in &self.edges {
            let v = w as f64 / ((d[a] as f64) * (d[b] as f64)).sqrt();
            m[(a, b)] += v;
            m[(b, a)] += v;
        }
        Ok(m)
    }

    /// Row-stochastic transition matrix.
    pub fn transition(&self) -> DMatrix<f64> {
        let d = self.degrees();
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for &(a, b, w) in &self.edges {
            m[(a, b)] += w as f64 / d[a] as f64;
            m[(b, a)] += w as f64 / d[b] as f64;
        }
        m
    }
}

/// Walk spectrum in decreasing order.
pub fn walk_spectrum(g: &WeightedGraph) -> Result<Vec<f64>> {
    let m = g.normalized()?;
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SecondEigenvalue {
    pub lambda2: f64,
    pub smallest: f64,
    /// `false` when computed by power iteration.
    pub dense: bool,
}

pub fn second_eigenvalue(g: &WeightedGraph) -> Result<SecondEigenvalue> {
    if g.len() > DENSE_LIMIT {
        let lambda2 = second_eigenvalue_power(g, 200_000, 1e-12)?;
        return Ok(SecondEigenvalue {
            lambda2,
            smallest: f64::NAN,
            dense: false,
        });
    }
    let ev = walk_spectrum(g)?;
    Ok(SecondEigenvalue {
        lambda2: ev.get(1).copied().unwrap_or(f64::NAN),
        smallest: *ev.last().unwrap(),
        dense: true,
    })
}

/// Second eigenvalue by power iteration on `(N + I)/2` with the top
/// eigenvector `√d` deflated.
pub fn second_eigenvalue_power(g: &WeightedGraph, max_iter: usize, tol: f64) -> Result<f64> {
    let m = g.normalized()?;
    let n = g.len();
    let d = g.degrees();
    let mut top = DVector::from_iterator(n, d.iter().map(|&x| (x as f64).sqrt()));
    top /= top.norm();
    // deterministic start with no symmetry
    let mut v = DVector::from_iterator(n, (0..n).map(|i| ((i * 7919 + 13) % 1009) as f64 / 1009.0 - 0.5));
    let deflate = |v: &mut DVector<f64>| {
        let c = v.dot(&top);
        *v -= &top * c;
    };
    deflate(&mut v);
    v /= v.norm();
    let mut prev = f64::NAN;
    for _ in 0..max_iter {
        let mut w = (&m * &v + &v) * 0.5;
        deflate(&mut w);
        let nrm = w.norm();
        if nrm == 0.0 {
            return Ok(-1.0);
        }
        w /= nrm;
        let ray = w.dot(&(&m * &w));
        let resid = (&m * &w - &w * ray).norm();
        v = w;
        if resid < tol || (ray - prev).abs() < tol * 1e-3 {
            return Ok(ray);
        }
        prev = ray;
    }
    Ok(v.dot(&(&m * &v)))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LinkSpectrum {
    pub face: Vec<Vertex>,
    pub dim: isize,
    pub vertices: usize,
    pub connected: bool,
    pub lambda2: Option<f64>,
    pub smallest: Option<f64>,
    pub bipartite: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SweepReport {
    pub convention: String,
    pub threshold: f64,
    pub links: Vec<LinkSpectrum>,
    pub all_connected: bool,
    pub max_lambda2: Option<f64>,
    pub local_spectral_expander: bool,
}

/// Links of every face of dimension `-1..=n-2`: connectivity, λ₂ and bipartiteness.
pub fn local_spectral_sweep(x: &SimplicialComplex, threshold: f64) -> SweepReport {
    let n = x.top_dim();
    let faces: Vec<(isize, Simplex)> = (-1..=n - 2)
        .flat_map(|d| x.faces(d).iter().map(move |s| (d, s.clone())))
        .collect();
    let links: Vec<LinkSpectrum> = faces
        .par_iter()
        .map(|(d, s)| {
            let link = x.link(s).expect("face of the complex");
            let g = WeightedGraph::from_complex(&link);
            let connected = g.is_connected() && !g.edges.is_empty();
            let ev = second_eigenvalue(&g).ok();
            LinkSpectrum {
                face: s.vertices().to_vec(),
                dim: *d,
                vertices: g.len(),
                connected,
                lambda2: ev.as_ref().map(|e| e.lambda2),
                smallest: ev.as_ref().map(|e| e.smallest),
                bipartite: g.is_bipartite(),
            }
        })
        .collect();
    let all_connected = links.iter().all(|l| l.connected);
    let max_lambda2 = links
        .iter()
        .filter_map(|l| l.lambda2)
        .max_by(|a, b| a.total_cmp(b));
    let local_spectral_expander =
        all_connected && links.iter().all(|l| l.lambda2.is_some_and(|v| v <= threshold));
    SweepReport {
        convention: CONVENTION.into(),
        threshold,
        links,
        all_connected,
        max_lambda2,
        local_spectral_expander,
    }
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Exact test that `μD − W + (1−μ) d dᵀ / vol` is positive semidefinite, i.e.
/// that every walk eigenvalue other than the top one is at most `μ`.
pub fn certify_walk_bound(g: &WeightedGraph, mu: Rational) -> bool {
    let n = g.len();
    let d = g.degrees();
    let vol: u64 = d.iter().sum();
    if vol == 0 {
        return false;
    }
    let mu = big(&mu);
    let one = BigRational::from_integer(1.into());
    let vol_r = BigRational::from_integer(vol.into());
    let c = (&one - &mu) / vol_r;
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| &c * BigRational::from_integer((d[i] * d[j]).into()))
                .collect()
        })
        .collect();
    for i in 0..n {
        m[i][i] += &mu * BigRational::from_integer(d[i].into());
    }
    for &(a, b, w) in &g.edges {
        let w = BigRational::from_integer(w.into());
        m[a][b] -= &w;
        m[b][a] -= &w;
    }
    ldl_psd(m)
}

/// Symmetric elimination; a zero pivot must have a zero remaining column.
pub fn ldl_psd(mut m: Vec<Vec<BigRational>>) -> bool {
    let n = m.len();
    for k in 0..n {
        let p = m[k][k].clone();
        if p.is_negative() {
            return false;
        }
        if p.is_zero() {
            if (k + 1..n).any(|i| !m[i][k].is_zero()) {
                return false;
            }
            continue;
        }
        let col: Vec<BigRational> = (k + 1..n).map(|i| &m[i][k] / &p).collect();
        let rows: Vec<Vec<BigRational>> = (k + 1..n)
            .into_par_iter()
            .map(|i| {
                let f = &col[i - k - 1];
                let mut row = m[i].clone();
                if !f.is_zero() {
                    for j in k + 1..n {
                        if !m[k][j].is_zero() {
                            row[j] -= f * &m[k][j];
                        }
                    }
                }
                row
            })
            .collect();
        for (off, row) in rows.into_iter().enumerate() {
            m[k + 1 + off] = row;
        }
    }
    true
}

/// Candidate rational upper bounds for a float, smallest first.
pub fn rational_candidates(x: f64, max_den: i64) -> Vec<Rational> {
    let mut out: Vec<Rational> = (1..=max_den)
        .map(|q| {
            let p = (x * q as f64 - 1e-7).ceil() as i64;
            Rational::new(p, q)
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// A certified rational upper bound on λ₂ of the walk.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WalkCertificate {
    #[serde(with = "crate::rational::text")]
    pub mu: Rational,
    pub lambda2_float: f64,
    pub attempts: usize,
}

/// `None` when no candidate certifies or the graph exceeds [`CERTIFY_LIMIT`].
pub fn certified_lambda2(g: &WeightedGraph) -> Result<Option<WalkCertificate>> {
    if g.len() > CERTIFY_LIMIT {
        return Ok(None);
    }
    let l = second_eigenvalue(g)?.lambda2;
    let cands = rational_candidates(l, 64);
    for (i, mu) in cands.iter().take(8).enumerate() {
        if certify_walk_bound(g, *mu) {
            return Ok(Some(WalkCertificate {
                mu: *mu,
                lambda2_float: l,
                attempts: i + 1,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{complete_graph, cycle_graph, graph, tetrahedron_boundary};

    #[test]
    fn known_spectra() {
        let k4 = WeightedGraph::from_complex(&complete_graph(4));
        assert!((second_eigenvalue(&k4).unwrap().lambda2 + 1.0 / 3.0).abs() < 1e-9);
        let c4 = WeightedGraph::from_complex(&cycle_graph(4));
        let e = second_eigenvalue(&c4).unwrap();
        assert!(e.lambda2.abs() < 1e-9);
        assert!((e.smallest + 1.0).abs() < 1e-9);
        let edge = WeightedGraph::from_complex(&graph(2, &[(0, 1)]));
        assert!((second_eigenvalue(&edge).unwrap().lambda2 + 1.0).abs() < 1e-9);
        let split = WeightedGraph::from_complex(&graph(4, &[(0, 1), (2, 3)]));
        assert_eq!(second_eigenvalue(&split), Err(SpectralError::Disconnected));
    }

    #[test]
    fn power_agrees() {
        for g in [complete_graph(4), cycle_graph(4), cycle_graph(7), complete_graph(6)] {
            let w = WeightedGraph::from_complex(&g);
            let a = second_eigenvalue(&w).unwrap().lambda2;
            let b = second_eigenvalue_power(&w, 200_000, 1e-13).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn sphere_sweep() {
        let r = local_spectral_sweep(&tetrahedron_boundary(), 1.0);
        assert_eq!(r.links.len(), 5);
        assert!(r.all_connected && r.local_spectral_expander);
        for l in r.links.iter().filter(|l| l.dim == 0) {
            assert!((l.lambda2.unwrap() + 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_certificate() {
        let k4 = WeightedGraph::from_complex(&complete_graph(4));
        assert!(certify_walk_bound(&k4, Rational::new(-1, 3)));
        assert!(!certify_walk_bound(&k4, Rational::new(-1, 2)));
        let c6 = WeightedGraph::from_complex(&cycle_graph(6));
        let cert = certified_lambda2(&c6).unwrap().unwrap();
        assert_eq!(cert.mu, Rational::new(1, 2));
    }
}
