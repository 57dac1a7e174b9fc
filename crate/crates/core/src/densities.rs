//! Density and entropy functionals on multipodal graphons.
//!
//! All functionals are exact finite sums over podes:
//!
//! * `ε(g) = Σ c_i c_j p_ij`
//! * `τ(g) = Σ c_i c_j c_k p_ij p_jk p_ki`
//! * `S(g) = Σ c_i c_j S₀(p_ij)` with `S₀(u) = −u ln u − (1−u) ln(1−u)`
//!
//! The entropy carries no ½ prefactor; [`SHANNON_HALF_FACTOR`] converts to
//! the alternative normalization.
//!
//! The module also samples finite graphs from a graphon and counts
//! injective subgraph densities in them, which gives an empirical check of
//! the exact functionals.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphon::MultipodalGraphon;

/// Multiply [`entropy`] by this to get the `−½∫…` normalization.
pub const SHANNON_HALF_FACTOR: f64 = 0.5;
/// Largest pattern accepted by [`subgraph_density`].
pub const MAX_PATTERN_VERTICES: usize = 8;
/// Largest pattern accepted by [`empirical_density`].
pub const MAX_EMPIRICAL_VERTICES: usize = 5;

/// Bernoulli entropy `S₀(u)`, with `S₀(0) = S₀(1) = 0`.
#[inline]
pub fn s0(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    -u * u.ln() - (1.0 - u) * (-u).ln_1p()
}

/// `S₀′(u) = ln((1−u)/u)`; `+∞` at 0 and `−∞` at 1.
#[inline]
pub fn s0_prime(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::INFINITY;
    }
    if u >= 1.0 {
        return f64::NEG_INFINITY;
    }
    (-u).ln_1p() - u.ln()
}

/// `S₀″(u) = −1/(u(1−u))`.
#[inline]
pub fn s0_second(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return f64::NEG_INFINITY;
    }
    -1.0 / (u * (1.0 - u))
}

pub(crate) fn edge_raw(c: &[f64], p: &[f64]) -> f64 {
    let n = c.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += c[j] * p[i * n + j];
        }
        s += c[i] * row;
    }
    s
}

/// `Q = P·diag(c)·P`.
fn two_paths(c: &[f64], p: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += p[i * n + k] * c[k] * p[k * n + j];
            }
            q[i * n + j] = s;
            q[j * n + i] = s;
        }
    }
    q
}

pub(crate) fn triangle_raw(c: &[f64], p: &[f64]) -> f64 {
    let n = c.len();
    let q = two_paths(c, p);
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += p[i * n + j] * c[j] * q[j * n + i];
        }
        s += c[i] * row;
    }
    s
}

pub(crate) fn entropy_raw(c: &[f64], p: &[f64]) -> f64 {
    let n = c.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += c[j] * s0(p[i * n + j]);
        }
        s += c[i] * row;
    }
    s
}

pub fn edge_density(g: &MultipodalGraphon) -> f64 {
    edge_raw(g.sizes(), g.probs_flat())
}

pub fn triangle_density(g: &MultipodalGraphon) -> f64 {
    triangle_raw(g.sizes(), g.probs_flat())
}

/// Graphon entropy `Σ c_i c_j S₀(p_ij)`, in `[0, ln 2]`.
pub fn entropy(g: &MultipodalGraphon) -> f64 {
    entropy_raw(g.sizes(), g.probs_flat())
}

/// A simple graph `H` on vertices `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphPattern {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl SubgraphPattern {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidPattern("pattern needs at least one vertex".into()));
        }
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidPattern(format!("edge {u}-{v} out of range")));
            }
            if u == v {
                return Err(Error::InvalidPattern(format!("loop at {u}")));
            }
            let e = (u.min(v), u.max(v));
            if out.contains(&e) {
                return Err(Error::InvalidPattern(format!("duplicate edge {u}-{v}")));
            }
            out.push(e);
        }
        Ok(Self {
            vertex_count,
            edges: out,
        })
    }

    pub fn edge() -> Self {
        Self::new(2, &[(0, 1)]).unwrap()
    }

    pub fn triangle() -> Self {
        Self::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    pub fn cycle(k: usize) -> Result<Self> {
        let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        Self::new(k, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }
}

impl fmt::Display for SubgraphPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
        write!(f, "{}; {}", self.vertex_count, edges.join(","))
    }
}

impl FromStr for SubgraphPattern {
    type Err = Error;

    /// Parses `k; u-v,u-v,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (k, rest) = s.split_once(';').unwrap_or((s, ""));
        let k: usize = k
            .trim()
            .parse()
            .map_err(|_| Error::InvalidPattern(format!("bad vertex count in {s:?}")))?;
        let mut edges = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (u, v) = item
                .split_once('-')
                .ok_or_else(|| Error::InvalidPattern(format!("bad edge {item:?}")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPattern(format!("bad edge {item:?}")))
            };
            edges.push((parse(u)?, parse(v)?));
        }
        Self::new(k, &edges)
    }
}

/// Homomorphism density `t_H(g)`, summed over all `n^k` pode assignments.
pub fn subgraph_density(g: &MultipodalGraphon, h: &SubgraphPattern) -> Result<f64> {
    let k = h.vertex_count;
    if k > MAX_PATTERN_VERTICES {
        return Err(Error::PatternTooLarge {
            vertices: k,
            max: MAX_PATTERN_VERTICES,
        });
    }
    match (k, h.edges.len()) {
        (2, 1) => return Ok(edge_density(g)),
        (3, 3) => return Ok(triangle_density(g)),
        _ => {}
    }
    // back_edges[v]: neighbours of v with a smaller label
    let back_edges: Vec<Vec<usize>> = (0..k).map(|v| h.neighbors(v).filter(|&u| u < v).collect()).collect();
    let mut assign = vec![0usize; k];
    Ok(hom_sum(g, &back_edges, &mut assign, 0, 1.0))
}

fn hom_sum(g: &MultipodalGraphon, back: &[Vec<usize>], assign: &mut [usize], v: usize, acc: f64) -> f64 {
    if v == back.len() {
        return acc;
    }
    let mut total = 0.0;
    for i in 0..g.n() {
        let mut w = acc * g.sizes()[i];
        for &u in &back[v] {
            w *= g.prob(assign[u], i);
        }
        if w == 0.0 {
            continue;
        }
        assign[v] = i;
        total += hom_sum(g, back, assign, v + 1, w);
    }
    total
}

/// Gradients over the free parameters of a graphon.
///
/// Parameter layout: the upper-triangular block values `p_ij` (`i ≤ j`,
/// row-major), then the sizes `c_0 … c_{n−2}`; the last size is eliminated
/// through `c_{n−1} = 1 − Σ_{i<n−1} c_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGradients {
    pub eps: Vec<f64>,
    pub tau: Vec<f64>,
    pub entropy: Vec<f64>,
}

/// Row-major position of `p_ij` (`i ≤ j`) among the upper-triangular entries.
#[inline]
pub fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

pub fn density_gradients(g: &MultipodalGraphon) -> DensityGradients {
    let n = g.n();
    let d = coord_derivatives(g.sizes(), g.probs_flat(), false);
    let np = n * (n + 1) / 2;
    let reduce = |f: &Functional| -> Vec<f64> {
        let mut out = Vec::with_capacity(np + n - 1);
        out.extend((0..np).map(|k| f.grad[n + k]));
        out.extend((0..n - 1).map(|i| f.grad[i] - f.grad[n - 1]));
        out
    };
    DensityGradients {
        eps: reduce(&d.eps),
        tau: reduce(&d.tau),
        entropy: reduce(&d.entropy),
    }
}

/// Value, gradient and (optionally) Hessian of a functional in graphon
/// coordinates `z = (c_0 … c_{n−1}, p_ij for i ≤ j)`.
#[derive(Clone, Debug)]
pub(crate) struct Functional {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: Option<DMatrix<f64>>,
}

#[derive(Clone, Debug)]
pub(crate) struct CoordDerivatives {
    pub eps: Functional,
    pub tau: Functional,
    pub entropy: Functional,
}

/// Entries of the full symmetric matrix that the packed parameter `p_ab` drives.
fn entries(a: usize, b: usize) -> ([(usize, usize); 2], usize) {
    if a == b {
        ([(a, a), (a, a)], 1)
    } else {
        ([(a, b), (b, a)], 2)
    }
}

/// Entropy derivatives inside the optimizer are evaluated at block values
/// clamped to `[ENTROPY_CLAMP, 1 − ENTROPY_CLAMP]`.
pub(crate) const ENTROPY_CLAMP: f64 = 1e-12;

pub(crate) fn coord_derivatives(c: &[f64], p: &[f64], hessian: bool) -> CoordDerivatives {
    coord_derivatives_with(c, p, hessian, false)
}

pub(crate) fn coord_derivatives_with(c: &[f64], p: &[f64], hessian: bool, clamp: bool) -> CoordDerivatives {
    let n = c.len();
    let sp1 = |u: f64| {
        if clamp {
            s0_prime(u.clamp(ENTROPY_CLAMP, 1.0 - ENTROPY_CLAMP))
        } else {
            s0_prime(u)
        }
    };
    let sp2 = |u: f64| {
        if clamp {
            s0_second(u.clamp(ENTROPY_CLAMP, 1.0 - ENTROPY_CLAMP))
        } else {
            s0_second(u)
        }
    };
    let np = n * (n + 1) / 2;
    let dim = n + np;
    let pr = |i: usize, j: usize| p[i * n + j];
    let q = two_paths(c, p);
    let qr = |i: usize, j: usize| q[i * n + j];

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();

    let mut ge = DVector::zeros(dim);
    let mut gt = DVector::zeros(dim);
    let mut gs = DVector::zeros(dim);
    let mut tau = 0.0;
    for l in 0..n {
        let mut pc = 0.0;
        let mut r = 0.0;
        let mut sc = 0.0;
        for j in 0..n {
            pc += pr(l, j) * c[j];
            r += pr(l, j) * c[j] * qr(j, l);
            sc += c[j] * s0(pr(l, j));
        }
        ge[l] = 2.0 * pc;
        gt[l] = 3.0 * r;
        gs[l] = 2.0 * sc;
        tau += c[l] * r;
    }
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let m = if a == b { 1.0 } else { 2.0 };
        let cc = m * c[a] * c[b];
        ge[n + k] = cc;
        gt[n + k] = 3.0 * cc * qr(a, b);
        gs[n + k] = cc * sp1(pr(a, b));
    }

    let (he, ht, hs) = if hessian {
        let mut he = DMatrix::zeros(dim, dim);
        let mut ht = DMatrix::zeros(dim, dim);
        let mut hs = DMatrix::zeros(dim, dim);
        for l in 0..n {
            for mm in 0..n {
                he[(l, mm)] = 2.0 * pr(l, mm);
                ht[(l, mm)] = 6.0 * pr(l, mm) * qr(l, mm);
                hs[(l, mm)] = 2.0 * s0(pr(l, mm));
            }
        }
        for (k, &(a, b)) in pairs.iter().enumerate() {
            let col = n + k;
            let m = if a == b { 1.0 } else { 2.0 };
            let sp = sp1(pr(a, b));
            for l in 0..n {
                let mut d = 0.0;
                if l == a {
                    d += c[b];
                }
                if l == b {
                    d += c[a];
                }
                let e = m * d;
                he[(l, col)] = e;
                he[(col, l)] = e;
                hs[(l, col)] = e * sp;
                hs[(col, l)] = e * sp;
                let t = if a == b {
                    3.0 * (2.0 * if l == a { c[a] * qr(a, a) } else { 0.0 } + c[a] * c[a] * pr(a, l) * pr(a, l))
                } else {
                    6.0 * (d * qr(a, b) + c[a] * c[b] * pr(a, l) * pr(b, l))
                };
                ht[(l, col)] = t;
                ht[(col, l)] = t;
            }
            hs[(col, col)] = m * c[a] * c[b] * sp2(pr(a, b));
            // τ: Σ over driven entries of 3 c_x c_y (δ_yu c_v P_vx + δ_xv c_u P_yu)
            let (ea, na) = entries(a, b);
            for (k2, &(d0, e0)) in pairs.iter().enumerate().skip(k) {
                let (eb, nb) = entries(d0, e0);
                let mut s = 0.0;
                for &(x, y) in &ea[..na] {
                    for &(u, v) in &eb[..nb] {
                        let mut t = 0.0;
                        if y == u {
                            t += c[v] * pr(v, x);
                        }
                        if x == v {
                            t += c[u] * pr(y, u);
                        }
                        s += 3.0 * c[x] * c[y] * t;
                    }
                }
                ht[(col, n + k2)] = s;
                ht[(n + k2, col)] = s;
            }
        }
        (Some(he), Some(ht), Some(hs))
    } else {
        (None, None, None)
    };

    CoordDerivatives {
        eps: Functional {
            value: edge_raw(c, p),
            grad: ge,
            hess: he,
        },
        tau: Functional {
            value: tau,
            grad: gt,
            hess: ht,
        },
        entropy: Functional {
            value: entropy_raw(c, p),
            grad: gs,
            hess: hs,
        },
    }
}

/// Simple undirected graph stored as adjacency bitsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            adj: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            g.add_edge(u, (u + 1) % n);
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "loops are not allowed");
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.adj[u * self.words..(u + 1) * self.words]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            ((u + 1)..self.n)
                .filter(move |&v| self.has_edge(u, v))
                .map(move |v| (u, v))
        })
    }

    /// One `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn from_edge_list(n: usize, text: &str) -> Result<Self> {
        let mut g = Self::empty(n);
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let mut it = line.split_whitespace();
            let mut next = || -> Result<usize> {
                it.next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&x: &usize| x < n)
                    .ok_or_else(|| Error::Parse(format!("bad edge line {line:?}")))
            };
            let (u, v) = (next()?, next()?);
            if u == v {
                return Err(Error::Parse(format!("loop in edge line {line:?}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }
}

/// Samples a graph on `node_count` nodes: uniform positions in `[0,1]`, pode by
/// cumulative size, each edge independently with its block probability.
pub fn sample_graph(g: &MultipodalGraphon, node_count: usize, seed: u64) -> Result<Graph> {
    if node_count < 2 {
        return Err(Error::ParamRange {
            name: "node_count",
            value: node_count as f64,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cum = Vec::with_capacity(g.n());
    let mut acc = 0.0;
    for &c in g.sizes() {
        acc += c;
        cum.push(acc);
    }
    let pode: Vec<usize> = (0..node_count)
        .map(|_| {
            let x: f64 = rng.random();
            cum.iter().position(|&b| x < b).unwrap_or(g.n() - 1)
        })
        .collect();
    let mut out = Graph::empty(node_count);
    for u in 0..node_count {
        for v in (u + 1)..node_count {
            let x: f64 = rng.random();
            if x < g.prob(pode[u], pode[v]) {
                out.add_edge(u, v);
            }
        }
    }
    Ok(out)
}

/// Injective density of `h` in `graph`: the number of maps from `V(H)` to
/// distinct nodes carrying every edge of `H` onto an edge, divided by the
/// falling factorial `n(n−1)…(n−k+1)`.
pub fn empirical_density(graph: &Graph, h: &SubgraphPattern) -> Result<f64> {
    let k = h.vertex_count;
    if k > MAX_EMPIRICAL_VERTICES {
        return Err(Error::PatternTooLarge {
            vertices: k,
            max: MAX_EMPIRICAL_VERTICES,
        });
    }
    if k > graph.n {
        return Ok(0.0);
    }
    // Place vertices so that each one (after the first of its component) has
    // an already placed neighbour.
    let mut order: Vec<usize> = Vec::with_capacity(k);
    while order.len() < k {
        let next = (0..k)
            .filter(|v| !order.contains(v))
            .max_by_key(|&v| {
                (
                    h.neighbors(v).filter(|u| order.contains(u)).count(),
                    std::cmp::Reverse(v),
                )
            })
            .unwrap();
        order.push(next);
    }
    let back: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(pos, &v)| {
            h.neighbors(v)
                .filter_map(|u| order[..pos].iter().position(|&w| w == u))
                .collect()
        })
        .collect();
    let mut used = vec![0u64; graph.words];
    let mut assign = vec![0usize; k];
    let count = injective_count(graph, &back, &mut assign, &mut used, 0);
    let falling: f64 = (0..k).map(|i| (graph.n - i) as f64).product();
    Ok(count as f64 / falling)
}

fn candidates(graph: &Graph, back: &[usize], assign: &[usize], used: &[u64]) -> Vec<u64> {
    let mut cand = vec![!0u64; graph.words];
    let tail = graph.n % 64;
    if tail != 0 {
        cand[graph.words - 1] = (1u64 << tail) - 1;
    }
    for &pos in back {
        for (w, r) in cand.iter_mut().zip(graph.row(assign[pos])) {
            *w &= r;
        }
    }
    for (w, u) in cand.iter_mut().zip(used) {
        *w &= !u;
    }
    cand
}

fn injective_count(graph: &Graph, back: &[Vec<usize>], assign: &mut [usize], used: &mut [u64], depth: usize) -> u64 {
    let cand = candidates(graph, &back[depth], assign, used);
    if depth + 1 == back.len() {
        return cand.iter().map(|w| w.count_ones() as u64).sum();
    }
    let mut total = 0;
    for (wi, &word) in cand.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let node = wi * 64 + b;
            assign[depth] = node;
            used[wi] |= 1 << b;
            total += injective_count(graph, back, assign, used, depth + 1);
            used[wi] &= !(1 << b);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bip() -> MultipodalGraphon {
        MultipodalGraphon::new(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn bipodal(a: f64, b: f64, c: f64, d: f64) -> MultipodalGraphon {
        MultipodalGraphon::new(vec![c, 1.0 - c], vec![vec![a, d], vec![d, b]]).unwrap()
    }

    #[test]
    fn upper_index_is_packed_row_major() {
        let n = 4;
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                assert_eq!(upper_index(n, i, j), k);
                assert_eq!(upper_index(n, j, i), k);
                k += 1;
            }
        }
    }

    #[test]
    fn edge_density_examples() {
        assert!((edge_density(&MultipodalGraphon::constant(0.3).unwrap()) - 0.3).abs() < 1e-15);
        assert_eq!(edge_density(&bip()), 0.5);
        assert!((edge_density(&bipodal(0.2, 0.8, 0.5, 0.5)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_density_examples() {
        assert!((triangle_density(&MultipodalGraphon::constant(0.5).unwrap()) - 0.125).abs() < 1e-15);
        assert_eq!(triangle_density(&bip()), 0.0);
        // c³a³ + 3c²(1−c)ad² + 3c(1−c)²bd² + (1−c)³b³ at (0.2, 0.8, 0.5, 0.5)
        let expected: f64 = 0.125 * 0.008 + 3.0 * 0.125 * 0.2 * 0.25 + 3.0 * 0.125 * 0.8 * 0.25 + 0.125 * 0.512;
        assert!((expected - 0.15875).abs() < 1e-15);
        assert!((triangle_density(&bipodal(0.2, 0.8, 0.5, 0.5)) - 0.15875).abs() < 1e-15);
    }

    #[test]
    fn bipodal_triangle_matches_monte_carlo() {
        let g = bipodal(0.2, 0.8, 0.5, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let val = |x: f64, y: f64| g.prob((x >= 0.5) as usize, (y >= 0.5) as usize);
        let samples = 400_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let (x, y, z): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            acc += val(x, y) * val(y, z) * val(z, x);
        }
        let mc = acc / samples as f64;
        assert!((mc - 0.15875).abs() < 3e-3, "mc = {mc}");
    }

    #[test]
    fn subgraph_density_examples() {
        let g = bipodal(0.2, 0.8, 0.3, 0.6);
        assert_eq!(
            subgraph_density(&g, &SubgraphPattern::edge()).unwrap(),
            edge_density(&g)
        );
        let c4 = SubgraphPattern::cycle(4).unwrap();
        assert!((subgraph_density(&bip(), &c4).unwrap() - 0.125).abs() < 1e-15);
        let k3 = SubgraphPattern::triangle();
        let v = subgraph_density(&MultipodalGraphon::constant(0.3).unwrap(), &k3).unwrap();
        assert!((v - 0.027).abs() < 1e-15);
        let big = SubgraphPattern::new(9, &[(0, 1)]).unwrap();
        assert!(matches!(subgraph_density(&g, &big), Err(Error::PatternTooLarge { .. })));
    }

    #[test]
    fn entropy_examples() {
        let half = entropy(&MultipodalGraphon::constant(0.5).unwrap());
        assert!((half - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(&bip()), 0.0);
        assert!((s0(0.2) - 0.500402423538188).abs() < 1e-12);
        let expected = 0.25 * s0(0.2) + 0.5 * std::f64::consts::LN_2 + 0.25 * s0(0.8);
        assert!((expected - 0.596775).abs() < 1e-5);
        assert!((entropy(&bipodal(0.2, 0.8, 0.5, 0.5)) - expected).abs() < 1e-15);
    }

    #[test]
    fn s0_derivatives_at_bounds() {
        assert_eq!(s0(0.0), 0.0);
        assert_eq!(s0(1.0), 0.0);
        assert_eq!(s0_prime(0.0), f64::INFINITY);
        assert_eq!(s0_prime(1.0), f64::NEG_INFINITY);
        assert!((s0_prime(0.5)).abs() < 1e-15);
    }

    #[test]
    fn gradient_read_off() {
        let grads = density_gradients(&bipodal(0.2, 0.8, 0.5, 0.5));
        // layout: p00, p01, p11, c0
        assert!((grads.eps[0] - 0.25).abs() < 1e-15);
        assert!((grads.eps[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_graphon_gradients_are_collinear() {
        let p = 0.37;
        let g = MultipodalGraphon::new(vec![0.3, 0.7], vec![vec![p, p], vec![p, p]]).unwrap();
        let grads = density_gradients(&g);
        for (e, t) in grads.eps.iter().zip(&grads.tau) {
            assert!((t - 3.0 * p * p * e).abs() < 1e-14);
        }
    }

    #[test]
    fn coordinate_hessians_match_gradient_differences() {
        let c = [0.2, 0.5, 0.3];
        let p = [0.3, 0.6, 0.2, 0.6, 0.7, 0.9, 0.2, 0.9, 0.4];
        let n = 3;
        let np = 6;
        let dim = n + np;
        let base = coord_derivatives(&c, &p, true);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        let h = 1e-6;
        for k in 0..dim {
            let shifted = |s: f64| {
                let mut cc = c;
                let mut pp = p;
                if k < n {
                    cc[k] += s;
                } else {
                    let (a, b) = pairs[k - n];
                    pp[a * n + b] += s;
                    if a != b {
                        pp[b * n + a] += s;
                    }
                }
                coord_derivatives(&cc, &pp, false)
            };
            let (up, dn) = (shifted(h), shifted(-h));
            for (f_up, f_dn, f0) in [
                (&up.eps, &dn.eps, &base.eps),
                (&up.tau, &dn.tau, &base.tau),
                (&up.entropy, &dn.entropy, &base.entropy),
            ] {
                let hess = f0.hess.as_ref().unwrap();
                for r in 0..dim {
                    let fd = (f_up.grad[r] - f_dn.grad[r]) / (2.0 * h);
                    assert!(
                        (fd - hess[(r, k)]).abs() < 1e-6,
                        "({r},{k}): fd {fd} vs {}",
                        hess[(r, k)]
                    );
                }
            }
        }
    }

    #[test]
    fn pattern_text_format() {
        let t: SubgraphPattern = "3; 0-1,1-2,0-2".parse().unwrap();
        assert_eq!(t, SubgraphPattern::triangle());
        assert_eq!(t.to_string(), "3; 0-1,1-2,0-2");
        assert!("2; 0-0".parse::<SubgraphPattern>().is_err());
        assert!("2; 0-1,1-0".parse::<SubgraphPattern>().is_err());
        assert!("x; 0-1".parse::<SubgraphPattern>().is_err());
    }

    #[test]
    fn sample_graph_extremes() {
        let full = sample_graph(&MultipodalGraphon::constant(1.0).unwrap(), 40, 3).unwrap();
        assert_eq!(full, Graph::complete(40));
        let none = sample_graph(&MultipodalGraphon::constant(0.0).unwrap(), 40, 3).unwrap();
        assert_eq!(none.edge_count(), 0);
        let b = sample_graph(&bip(), 600, 11).unwrap();
        assert_eq!(empirical_density(&b, &SubgraphPattern::triangle()).unwrap(), 0.0);
        assert!(sample_graph(&bip(), 1, 0).is_err());
    }

    #[test]
    fn sample_graph_is_seeded() {
        let g = bipodal(0.2, 0.8, 0.3, 0.6);
        assert_eq!(sample_graph(&g, 100, 5).unwrap(), sample_graph(&g, 100, 5).unwrap());
        assert_ne!(sample_graph(&g, 100, 5).unwrap(), sample_graph(&g, 100, 6).unwrap());
    }

    #[test]
    fn empirical_density_examples() {
        assert_eq!(
            empirical_density(&Graph::complete(10), &SubgraphPattern::edge()).unwrap(),
            1.0
        );
        assert_eq!(
            empirical_density(&Graph::cycle(5), &SubgraphPattern::triangle()).unwrap(),
            0.0
        );
        // C5 has 5 edges → injective edge maps 10 of 20
        assert_eq!(
            empirical_density(&Graph::cycle(5), &SubgraphPattern::edge()).unwrap(),
            0.5
        );
        let half = MultipodalGraphon::constant(0.5).unwrap();
        for seed in 0..3 {
            let s = sample_graph(&half, 1000, seed).unwrap();
            let e = empirical_density(&s, &SubgraphPattern::edge()).unwrap();
            assert!((e - 0.5).abs() < 0.01, "seed {seed}: {e}");
        }
        let big = SubgraphPattern::new(6, &[]).unwrap();
        assert!(empirical_density(&Graph::complete(8), &big).is_err());
    }

    #[test]
    fn empirical_density_counts_match_brute_force() {
        let g = sample_graph(&bipodal(0.3, 0.7, 0.4, 0.5), 14, 2).unwrap();
        for pat in ["3; 0-1,1-2", "4; 0-1,1-2,2-3,3-0", "4; 0-1,2-3", "3; 0-1,1-2,0-2"] {
            let h: SubgraphPattern = pat.parse().unwrap();
            let k = h.vertex_count();
            let n = g.node_count();
            let mut count = 0u64;
            let mut idx = vec![0usize; k];
            loop {
                let distinct = (0..k).all(|a| (0..a).all(|b| idx[a] != idx[b]));
                if distinct && h.edges().iter().all(|&(u, v)| g.has_edge(idx[u], idx[v])) {
                    count += 1;
                }
                let mut pos = 0;
                loop {
                    if pos == k {
                        break;
                    }
                    idx[pos] += 1;
                    if idx[pos] < n {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == k {
                    break;
                }
            }
            let falling: f64 = (0..k).map(|i| (n - i) as f64).product();
            let got = empirical_density(&g, &h).unwrap();
            assert!((got - count as f64 / falling).abs() < 1e-15, "{pat}");
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = sample_graph(&bipodal(0.3, 0.7, 0.4, 0.5), 30, 9).unwrap();
        let text = g.to_edge_list();
        assert_eq!(Graph::from_edge_list(30, &text).unwrap(), g);
    }
}
