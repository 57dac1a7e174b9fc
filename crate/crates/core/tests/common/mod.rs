//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use graphon_lab::graphon::MultipodalGraphon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bernoulli_entropy(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        -u * u.ln() - (1.0 - u) * (1.0 - u).ln()
    }
}

/// `(ε, τ, S)` by direct summation over blocks.
pub fn densities(c: &[f64], p: &[Vec<f64>]) -> (f64, f64, f64) {
    let n = c.len();
    let mut e = 0.0;
    let mut s = 0.0;
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            e += c[i] * c[j] * p[i][j];
            s += c[i] * c[j] * bernoulli_entropy(p[i][j]);
            for k in 0..n {
                t += c[i] * c[j] * c[k] * p[i][j] * p[j][k] * p[k][i];
            }
        }
    }
    (e, t, s)
}

pub fn graphon_densities(g: &MultipodalGraphon) -> (f64, f64, f64) {
    densities(g.sizes(), &g.rows())
}

/// `A(n,0)` block values from the cube-root formula.
pub fn a_values(n: usize, eps: f64, tau: f64) -> (f64, f64) {
    let k = (n - 1) as f64;
    let r = ((eps.powi(3) - tau) / k).cbrt();
    (eps - k * r, eps + r)
}

pub fn a_graphon(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let c = vec![1.0 / n as f64; n];
    let p = (0..n)
        .map(|i| (0..n).map(|j| if i == j { a } else { b }).collect())
        .collect();
    (c, p)
}

/// Lower edge of the feasible region: Razborov's scallop between the cusps
/// `(t−1)/t` and `t/(t+1)`.
pub fn razborov_tau_low(eps: f64) -> f64 {
    if eps <= 0.5 {
        return 0.0;
    }
    if eps >= 1.0 {
        return 1.0;
    }
    let t = (1.0 / (1.0 - eps)).floor();
    let root = (t * (t - eps * (t + 1.0))).max(0.0).sqrt();
    (t - 1.0) * (t - 2.0 * root) * (t + root).powi(2) / (t * t * (t + 1.0) * (t + 1.0))
}

/// Random valid graphon with `n` podes.
pub fn random_graphon(rng: &mut ChaCha8Rng, n: usize) -> MultipodalGraphon {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut sizes: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = sizes[..n - 1].iter().sum();
    sizes[n - 1] = 1.0 - head;
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(0.02..0.98);
            p[i][j] = v;
            p[j][i] = v;
        }
    }
    MultipodalGraphon::new(sizes, p).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(ε, τ, S)` as functions of the free layout used by `density_gradients`:
/// upper-triangular `p_ij` row-major, then `c_0 … c_{n−2}`.
pub fn densities_from_layout(n: usize, x: &[f64]) -> (f64, f64, f64) {
    let np = n * (n + 1) / 2;
    let mut p = vec![vec![0.0; n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            p[i][j] = x[k];
            p[j][i] = x[k];
            k += 1;
        }
    }
    let mut c: Vec<f64> = x[np..].to_vec();
    c.push(1.0 - c.iter().sum::<f64>());
    densities(&c, &p)
}

pub fn layout_of(g: &MultipodalGraphon) -> Vec<f64> {
    let n = g.n();
    let mut x = Vec::new();
    for i in 0..n {
        for j in i..n {
            x.push(g.prob(i, j));
        }
    }
    x.extend_from_slice(&g.sizes()[..n - 1]);
    x
}

/// Central differences of `(ε, τ, S)` over the free layout.
pub fn fd_gradients(g: &MultipodalGraphon, h: f64) -> [Vec<f64>; 3] {
    let n = g.n();
    let x = layout_of(g);
    let mut out = [Vec::new(), Vec::new(), Vec::new()];
    for k in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += h;
        xm[k] -= h;
        let fp = densities_from_layout(n, &xp);
        let fm = densities_from_layout(n, &xm);
        out[0].push((fp.0 - fm.0) / (2.0 * h));
        out[1].push((fp.1 - fm.1) / (2.0 * h));
        out[2].push((fp.2 - fm.2) / (2.0 * h));
    }
    out
}

/// `B(n−1,1)` graphon: `n−1` podes of size `c/(n−1)` with diagonal `a` and
/// mutual value `b`, one pode of size `1−c` with diagonal `p`, cross value `d`.
pub fn b_graphon(n: usize, a: f64, b: f64, c: f64, d: f64, p: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = n - 1;
    let mut sizes = vec![c / m as f64; m];
    sizes.push(1.0 - c);
    let mut rows = vec![vec![b; n]; n];
    for i in 0..m {
        rows[i][i] = a;
        rows[i][m] = d;
        rows[m][i] = d;
    }
    rows[m][m] = p;
    (sizes, rows)
}

/// Entropy of the `B(n−1,1)` graphon at `(a, b, c)` with `(d, p)` solved by
/// Newton's method so that the densities equal `(eps, tau)`.
pub fn reduced_entropy(n: usize, abc: [f64; 3], eps: f64, tau: f64, dp0: (f64, f64)) -> f64 {
    let [a, b, c] = abc;
    let f = |d: f64, p: f64| {
        let (s, r) = b_graphon(n, a, b, c, d, p);
        densities(&s, &r)
    };
    let (mut d, mut p) = dp0;
    for _ in 0..60 {
        let (e0, t0, _) = f(d, p);
        let r = [e0 - eps, t0 - tau];
        if r[0].abs().max(r[1].abs()) < 1e-15 {
            break;
        }
        let h = 1e-7;
        let (ed, td, _) = f(d + h, p);
        let (ep, tp, _) = f(d, p + h);
        let j = [[(ed - e0) / h, (ep - e0) / h], [(td - t0) / h, (tp - t0) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        d -= (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        p -= (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
    }
    f(d, p).2
}

/// Second derivatives of the reduced entropy in `(a, b, c)` at the
/// `A(n,0)` point, by central differences.
pub fn fd_reduced_hessian(n: usize, eps: f64, tau: f64, h: f64) -> [[f64; 3]; 3] {
    let (a, b) = a_values(n, eps, tau);
    let c = (n - 1) as f64 / n as f64;
    let x0 = [a, b, c];
    let s = |dx: [f64; 3]| reduced_entropy(n, [x0[0] + dx[0], x0[1] + dx[1], x0[2] + dx[2]], eps, tau, (b, a));
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let e = |si: f64, sj: f64| {
                let mut dx = [0.0; 3];
                dx[i] += si * h;
                dx[j] += sj * h;
                s(dx)
            };
            out[i][j] = (e(1.0, 1.0) - e(1.0, -1.0) - e(-1.0, 1.0) + e(-1.0, -1.0)) / (4.0 * h * h);
        }
    }
    out
}

/// Largest Euler–Lagrange residual `|S₀′(p_ij) − α − 3β Σ_k c_k p_ik p_jk|`
/// over unsaturated blocks, with `α` fitted as the mean; saturated blocks
/// (value within `1e-9` of 0 or 1) are skipped.
pub fn el_residual(c: &[f64], p: &[Vec<f64>], beta: f64) -> f64 {
    let n = c.len();
    let mut vals = Vec::new();
    for i in 0..n {
        for j in i..n {
            let u = p[i][j];
            if u < 1e-9 || u > 1.0 - 1e-9 {
                continue;
            }
            let walk: f64 = (0..n).map(|k| c[k] * p[i][k] * p[j][k]).sum();
            vals.push(((1.0 - u) / u).ln() - 3.0 * beta * walk);
        }
    }
    if vals.is_empty() {
        return 0.0;
    }
    let alpha = vals.iter().sum::<f64>() / vals.len() as f64;
    vals.iter().map(|v| (v - alpha).abs()).fold(0.0, f64::max)
}

/// Edge and triangle densities of a 0/1 adjacency matrix.
pub fn count_densities(n: usize, edges: &[(usize, usize)]) -> (f64, f64) {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let nf = n as f64;
    let e = edges.len() as f64 / (nf * (nf - 1.0) / 2.0);
    let mut tri = 0u64;
    for u in 0..n {
        for v in (u + 1)..n {
            if !adj[u][v] {
                continue;
            }
            for w in (v + 1)..n {
                if adj[u][w] && adj[v][w] {
                    tri += 1;
                }
            }
        }
    }
    let t = tri as f64 / (nf * (nf - 1.0) * (nf - 2.0) / 6.0);
    (e, t)
}
