//! Newton polish of the block values at fixed pode sizes.
//!
//! The SQP stops on a gradient measured in parameter space, where the block
//! `p_ij` carries weight `c_i c_j`; tiny podes leave Euler–Lagrange residuals
//! far above the KKT residual. Newton's method on the Euler–Lagrange system
//! itself removes them.

use nalgebra::{DMatrix, DVector};

use crate::densities::{edge_density, entropy, s0_prime, s0_second, triangle_density};
use crate::families::euler_lagrange_residual;
use crate::graphon::MultipodalGraphon;

const MAX_STEPS: usize = 30;
const TARGET: f64 = 1e-13;

pub(crate) struct Polished {
    pub graphon: MultipodalGraphon,
    pub alpha: f64,
    pub beta: f64,
}

fn overlap(n: usize, c: &[f64], p: &[f64], i: usize, j: usize) -> f64 {
    (0..n).map(|k| c[k] * p[i * n + k] * p[j * n + k]).sum()
}

/// Residuals: interior block equations, then `ε − ε₀`, `τ − τ₀`.
fn residual(
    n: usize,
    c: &[f64],
    p: &[f64],
    blocks: &[(usize, usize)],
    ab: (f64, f64),
    target: (f64, f64),
) -> DVector<f64> {
    let g = MultipodalGraphon::from_flat_unchecked(c.to_vec(), p.to_vec());
    let m = blocks.len();
    let mut r = DVector::zeros(m + 2);
    for (row, &(i, j)) in blocks.iter().enumerate() {
        r[row] = s0_prime(p[i * n + j]) - ab.0 - 3.0 * ab.1 * overlap(n, c, p, i, j);
    }
    r[m] = edge_density(&g) - target.0;
    r[m + 1] = triangle_density(&g) - target.1;
    r
}

fn jacobian(n: usize, c: &[f64], p: &[f64], blocks: &[(usize, usize)], beta: f64) -> DMatrix<f64> {
    let m = blocks.len();
    let mut jac = DMatrix::zeros(m + 2, m + 2);
    let touches = |x: usize, y: usize, k: usize, l: usize| (x == k && y == l) || (x == l && y == k);
    for (col, &(k, l)) in blocks.iter().enumerate() {
        for (row, &(i, j)) in blocks.iter().enumerate() {
            let mut dw = 0.0;
            for s in 0..n {
                if touches(i, s, k, l) {
                    dw += c[s] * p[j * n + s];
                }
                if touches(j, s, k, l) {
                    dw += c[s] * p[i * n + s];
                }
            }
            let diag = if row == col { s0_second(p[i * n + j]) } else { 0.0 };
            jac[(row, col)] = diag - 3.0 * beta * dw;
        }
        let mult = if k == l { 1.0 } else { 2.0 };
        jac[(m, col)] = mult * c[k] * c[l];
        jac[(m + 1, col)] = 3.0 * mult * c[k] * c[l] * overlap(n, c, p, k, l);
    }
    for (row, &(i, j)) in blocks.iter().enumerate() {
        jac[(row, m)] = -1.0;
        jac[(row, m + 1)] = -3.0 * overlap(n, c, p, i, j);
    }
    jac
}

/// Newton iteration on the block values of the interior blocks together with
/// `(α, β)`. Returns `None` unless it lowers the Euler–Lagrange residual
/// without losing feasibility or entropy.
pub(crate) fn polish(
    g: &MultipodalGraphon,
    alpha: f64,
    beta: f64,
    target: (f64, f64),
    feas_tol: f64,
) -> Option<Polished> {
    let n = g.n();
    let c = g.sizes().to_vec();
    let mut p = g.probs_flat().to_vec();
    let blocks: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| p[i * n + j] > 0.0 && p[i * n + j] < 1.0)
        .collect();
    if blocks.is_empty() {
        return None;
    }
    let m = blocks.len();
    let before = euler_lagrange_residual(g, alpha, beta).max_abs;
    let mut ab = (alpha, beta);
    let mut r = residual(n, &c, &p, &blocks, ab, target);
    for _ in 0..MAX_STEPS {
        if r.amax() < TARGET {
            break;
        }
        let step = jacobian(n, &c, &p, &blocks, ab.1).lu().solve(&(-&r))?;
        let mut t = 1.0;
        let accepted = loop {
            let mut q = p.clone();
            let mut inside = true;
            for (k, &(i, j)) in blocks.iter().enumerate() {
                let v = p[i * n + j] + t * step[k];
                inside &= v > 0.0 && v < 1.0;
                q[i * n + j] = v;
                q[j * n + i] = v;
            }
            let trial = (ab.0 + t * step[m], ab.1 + t * step[m + 1]);
            if inside {
                let rq = residual(n, &c, &q, &blocks, trial, target);
                if rq.amax() < r.amax() {
                    break Some((q, trial, rq));
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                break None;
            }
        };
        let (q, trial, rq) = accepted?;
        p = q;
        ab = trial;
        r = rq;
    }
    let out = MultipodalGraphon::from_flat_unchecked(c, p);
    let el = euler_lagrange_residual(&out, ab.0, ab.1).max_abs;
    let violation = (edge_density(&out) - target.0)
        .abs()
        .max((triangle_density(&out) - target.1).abs());
    (el < before && violation <= feas_tol && entropy(&out) >= entropy(g) - 1e-12).then_some(Polished {
        graphon: out,
        alpha: ab.0,
        beta: ab.1,
    })
}
