//! Phase families and their analytic machinery.
//!
//! Families are named by pode-equivalence structure:
//!
//! * `A(n,0)`: `n` equivalent podes of size `1/n`, diagonal `a`, off-diagonal `b`.
//! * `B(m,1)`: `m` equivalent podes of size `c/m` (diagonal `a`, between `b`)
//!   plus one pode of size `1−c` (diagonal `p`); cross value `d`.
//! * `C(m,2)`: an interchangeable pair of size `c/2` each (diagonal `a₋`,
//!   between `a₊`) plus `m` equivalent podes of size `(1−c)/m` (diagonal `b`,
//!   between `p`); cross value `d`.
//! * `F(1,1)`: bipodal `[[a, d], [d, b]]` with sizes `[c, 1−c]`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::densities::{s0_prime, triangle_density};
use crate::error::{Error, Result};
use crate::graphon::{ConstraintPoint, Family, MultipodalGraphon, MAX_PODES};

/// Smallest `|a − b|` accepted by [`hessian_a`].
pub const MIN_AB_GAP: f64 = 1e-8;

/// A member of one of the phase families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilySpec {
    A {
        n: usize,
        a: f64,
        b: f64,
    },
    /// `b` is unused when `m = 1`.
    B {
        m: usize,
        a: f64,
        b: f64,
        d: f64,
        p: f64,
        c: f64,
    },
    /// `p` is unused when `m = 1`.
    C {
        m: usize,
        a_plus: f64,
        a_minus: f64,
        b: f64,
        d: f64,
        p: f64,
        c: f64,
    },
    F {
        a: f64,
        b: f64,
        d: f64,
        c: f64,
    },
}

impl FamilySpec {
    pub fn family(&self) -> Family {
        match self {
            FamilySpec::A { .. } => Family::A,
            FamilySpec::B { .. } => Family::B,
            FamilySpec::C { .. } => Family::C,
            FamilySpec::F { .. } => Family::F,
        }
    }

    /// Count of equivalent podes (`n` for `A`).
    pub fn m(&self) -> usize {
        match *self {
            FamilySpec::A { n, .. } => n,
            FamilySpec::B { m, .. } | FamilySpec::C { m, .. } => m,
            FamilySpec::F { .. } => 1,
        }
    }

    /// Second label parameter: `A(n,0)`, `B(m,1)`, `C(m,2)`, `F(1,1)`.
    pub fn params(&self) -> (usize, usize) {
        match self.family() {
            Family::A => (self.m(), 0),
            Family::B | Family::F => (self.m(), 1),
            _ => (self.m(), 2),
        }
    }

    /// Named parameters in declaration order.
    pub fn named_params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            FamilySpec::A { a, b, .. } => vec![("a", a), ("b", b)],
            FamilySpec::B { a, b, d, p, c, .. } => {
                vec![("a", a), ("b", b), ("d", d), ("p", p), ("c", c)]
            }
            FamilySpec::C {
                a_plus,
                a_minus,
                b,
                d,
                p,
                c,
                ..
            } => vec![
                ("a_plus", a_plus),
                ("a_minus", a_minus),
                ("b", b),
                ("d", d),
                ("p", p),
                ("c", c),
            ],
            FamilySpec::F { a, b, d, c } => vec![("a", a), ("b", b), ("d", d), ("c", c)],
        }
    }

    fn check(&self) -> Result<()> {
        let m = self.m();
        let max = match self.family() {
            Family::A => MAX_PODES,
            Family::B => MAX_PODES - 1,
            _ => MAX_PODES - 2,
        };
        if m == 0 || m > max || (self.family() == Family::A && m < 1) {
            return Err(Error::ParamRange {
                name: "m",
                value: m as f64,
            });
        }
        for (name, v) in self.named_params() {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::ParamRange { name, value: v });
            }
        }
        Ok(())
    }
}

/// Builds the graphon for a family member.
///
/// The size parameter `c` may sit at 0 or 1; podes of zero size are left out,
/// so `B(m,1)` at `c = 1` is the `A(m,0)` graphon.
pub fn build_family(spec: &FamilySpec) -> Result<MultipodalGraphon> {
    spec.check()?;
    let (sizes, probs) = family_parts(spec);
    let keep: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] > 0.0).collect();
    let n = sizes.len();
    let k = keep.len();
    let mut flat = vec![0.0; k * k];
    for (x, &i) in keep.iter().enumerate() {
        for (y, &j) in keep.iter().enumerate() {
            flat[x * k + y] = probs[i * n + j];
        }
    }
    let kept: Vec<f64> = keep.iter().map(|&i| sizes[i]).collect();
    MultipodalGraphon::from_flat(kept, flat)
}

/// Sizes and row-major probabilities, including zero-size podes.
pub(crate) fn family_parts(spec: &FamilySpec) -> (Vec<f64>, Vec<f64>) {
    match *spec {
        FamilySpec::A { n, a, b } => {
            let mut p = vec![b; n * n];
            for i in 0..n {
                p[i * n + i] = a;
            }
            (vec![1.0 / n as f64; n], p)
        }
        FamilySpec::B { m, a, b, d, p, c } => {
            let n = m + 1;
            let mut probs = vec![b; n * n];
            for i in 0..m {
                probs[i * n + i] = a;
                probs[i * n + m] = d;
                probs[m * n + i] = d;
            }
            probs[m * n + m] = p;
            let mut sizes = vec![c / m as f64; m];
            sizes.push(1.0 - c);
            (sizes, probs)
        }
        FamilySpec::C {
            m,
            a_plus,
            a_minus,
            b,
            d,
            p,
            c,
        } => {
            let n = m + 2;
            let mut probs = vec![p; n * n];
            for i in 0..n {
                for j in 0..n {
                    let v = match (i < 2, j < 2) {
                        (true, true) if i == j => a_minus,
                        (true, true) => a_plus,
                        (true, false) | (false, true) => d,
                        (false, false) if i == j => b,
                        (false, false) => p,
                    };
                    probs[i * n + j] = v;
                }
            }
            let mut sizes = vec![c / 2.0; 2];
            sizes.extend(std::iter::repeat_n((1.0 - c) / m as f64, m));
            (sizes, probs)
        }
        FamilySpec::F { a, b, d, c } => (vec![c, 1.0 - c], vec![a, d, d, b]),
    }
}

/// Closed-form `A(n,0)` member with the given densities.
///
/// With `r = ((ε³ − τ)/(n − 1))^{1/3}`: `a = ε − (n−1) r`, `b = ε + r`.
pub fn solve_a(n: usize, pt: ConstraintPoint) -> Result<FamilySpec> {
    if n < 2 {
        return Err(Error::ParamRange {
            name: "n",
            value: n as f64,
        });
    }
    let gap = pt.eps.powi(3) - pt.tau;
    if gap < 0.0 {
        return Err(Error::AboveErCurve {
            eps: pt.eps,
            tau: pt.tau,
        });
    }
    let k = (n - 1) as f64;
    let r = (gap / k).cbrt();
    let a = pt.eps - k * r;
    let b = pt.eps + r;
    const SLACK: f64 = 1e-14;
    if a < -SLACK {
        return Err(Error::ParamRange { name: "a", value: a });
    }
    if b > 1.0 + SLACK {
        return Err(Error::ParamRange { name: "b", value: b });
    }
    Ok(FamilySpec::A {
        n,
        a: a.max(0.0),
        b: b.min(1.0),
    })
}

/// Lowest `τ` reachable by a valid `A(n,0)` graphon at edge density `ε`.
pub fn a_family_tau_floor(n: usize, eps: f64) -> f64 {
    let k = (n - 1) as f64;
    let r = (1.0 - eps).min(eps / k);
    eps.powi(3) - k * r.powi(3)
}

/// The cusp `(n/(n+1), n(n−1)/(n+1)²)` where the lower boundary meets the
/// complete balanced `(n+1)`-partite graphon.
pub fn cusp(n: usize) -> ConstraintPoint {
    let n = n as f64;
    ConstraintPoint {
        eps: n / (n + 1.0),
        tau: n * (n - 1.0) / ((n + 1.0) * (n + 1.0)),
    }
}

/// Stationarity residual of `τ` at fixed `ε` on the bipodal stratum with
/// cross value 1 and second diagonal 0:
/// `a³c² + ac² + 2a²c + 2(1−c) − 4a²c² − 4c(1−c)`.
pub fn min_tau_stationarity(a: f64, c: f64) -> f64 {
    a.powi(3) * c * c + a * c * c + 2.0 * a * a * c + 2.0 * (1.0 - c) - 4.0 * a * a * c * c - 4.0 * c * (1.0 - c)
}

/// Roots in `c ∈ [0, 1]` of [`min_tau_stationarity`] at fixed `a`, located by
/// a sign scan and refined by bisection.
pub fn min_tau_stationarity_roots(a: f64) -> Vec<f64> {
    let f = |c: f64| min_tau_stationarity(a, c);
    let steps = 2000;
    let mut roots = Vec::new();
    let mut prev_c = 0.0;
    let mut prev = f(0.0);
    if prev == 0.0 {
        roots.push(0.0);
    }
    for k in 1..=steps {
        let c = k as f64 / steps as f64;
        let v = f(c);
        if v == 0.0 {
            roots.push(c);
        } else if prev != 0.0 && (v < 0.0) != (prev < 0.0) {
            roots.push(bisect(f, prev_c, c));
        }
        prev = v;
        prev_c = c;
    }
    roots
}

/// Bisection on a bracketing interval until the midpoint stops moving.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Blockwise Euler–Lagrange residuals
/// `r_ij = S₀′(p_ij) − α − 3β Σ_k c_k p_ik p_jk`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElReport {
    /// `max |r_ij|` over interior blocks.
    pub max_abs: f64,
    /// Row-major residuals; `NaN` on boundary blocks.
    pub residuals: Vec<f64>,
    /// Set when some block sits at 0 or 1.
    pub boundary: bool,
}

impl ElReport {
    pub fn residual(&self, i: usize, j: usize) -> f64 {
        let n = (self.residuals.len() as f64).sqrt() as usize;
        self.residuals[i * n + j]
    }
}

pub fn euler_lagrange_residual(g: &MultipodalGraphon, alpha: f64, beta: f64) -> ElReport {
    let n = g.n();
    let c = g.sizes();
    let mut residuals = vec![f64::NAN; n * n];
    let mut max_abs: f64 = 0.0;
    let mut boundary = false;
    for i in 0..n {
        for j in 0..n {
            let pij = g.prob(i, j);
            if pij <= 0.0 || pij >= 1.0 {
                boundary = true;
                continue;
            }
            let overlap: f64 = (0..n).map(|k| c[k] * g.prob(i, k) * g.prob(j, k)).sum();
            let r = s0_prime(pij) - alpha - 3.0 * beta * overlap;
            residuals[i * n + j] = r;
            max_abs = max_abs.max(r.abs());
        }
    }
    ElReport {
        max_abs,
        residuals,
        boundary,
    }
}

/// Second variation of the entropy at an `A(n,0)` graphon, in the `B(n−1,1)`
/// coordinates `(a, b, c)` with `d` and `p` eliminated by the constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianResult {
    pub n: usize,
    pub matrix: [[f64; 3]; 3],
    pub determinant: f64,
    /// Ascending.
    pub eigenvalues: [f64; 3],
    /// `artanh(1−2a) − artanh(1−2b) = ½(S₀′(a) − S₀′(b))`.
    pub x: f64,
    /// Determinant of the block that carries the stability condition: the
    /// full matrix for `n ≥ 3`, the `(a, c)` block for `n = 2` (where `b`
    /// does not exist and its row vanishes).
    pub active_determinant: f64,
    /// Ascending eigenvalues of the active block.
    pub active_eigenvalues: Vec<f64>,
}

impl HessianResult {
    /// Negative definite on the active block.
    pub fn is_stable(&self) -> bool {
        self.active_eigenvalues.iter().all(|&v| v < 0.0)
    }
}

/// `artanh(1 − 2u)`, written as `½ ln((1−u)/u)`.
fn half_logit(u: f64) -> f64 {
    0.5 * s0_prime(u.clamp(1e-12, 1.0 - 1e-12))
}

/// Closed-form Hessian entries for given `X`.
pub(crate) fn hessian_entries(n: usize, a: f64, b: f64, x: f64) -> [[f64; 3]; 3] {
    let nf = n as f64;
    let ab = a - b;
    let ab2 = ab * ab;
    let h00 = (nf - 1.0) * (ab2 - 4.0 * (a - 1.0) * a * a * x) / ((a - 1.0) * a * ab2 * nf);
    let h01 = -2.0 * b * (nf - 2.0) * (nf - 1.0) * x / (ab2 * nf);
    let h02 = -2.0 * (a + b) * x / ab;
    let h11 = (nf - 2.0) * (nf - 1.0) * (ab2 - 2.0 * (b - 1.0) * b * (2.0 * a + b * (nf - 4.0)) * x)
        / (2.0 * ab2 * (b - 1.0) * b * nf);
    let h12 = -2.0 * b * (nf - 2.0) * x / ab;
    let h22 = 2.0 * nf * ((1.0 - b).ln() - (1.0 - a).ln()) / (nf - 1.0);
    [[h00, h01, h02], [h01, h11, h12], [h02, h12, h22]]
}

pub fn hessian_a(n: usize, a: f64, b: f64) -> Result<HessianResult> {
    if n < 2 {
        return Err(Error::ParamRange {
            name: "n",
            value: n as f64,
        });
    }
    for (name, v) in [("a", a), ("b", b)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::ParamRange { name, value: v });
        }
    }
    if (a - b).abs() < MIN_AB_GAP {
        return Err(Error::DegenerateAb { a, b });
    }
    let x = half_logit(a) - half_logit(b);
    let matrix = hessian_entries(n, a, b, x);
    let m3 = Matrix3::from_fn(|i, j| matrix[i][j]);
    let determinant = m3.determinant();
    let mut ev: Vec<f64> = SymmetricEigen::new(m3).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let eigenvalues = [ev[0], ev[1], ev[2]];
    let (active_determinant, active_eigenvalues) = if n == 2 {
        let m2 = Matrix2::new(matrix[0][0], matrix[0][2], matrix[2][0], matrix[2][2]);
        let mut e: Vec<f64> = SymmetricEigen::new(m2).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        (m2.determinant(), e)
    } else {
        (determinant, ev)
    };
    Ok(HessianResult {
        n,
        matrix,
        determinant,
        eigenvalues,
        x,
        active_determinant,
        active_eigenvalues,
    })
}

/// Hessian at the `A(n,0)` graphon with densities `pt`.
pub fn hessian_at(n: usize, pt: ConstraintPoint) -> Result<HessianResult> {
    match solve_a(n, pt)? {
        FamilySpec::A { a, b, .. } => hessian_a(n, a, b),
        _ => unreachable!(),
    }
}

/// One root of `det H(S) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub eps: f64,
    pub tau: f64,
    /// Active-block determinant at the root.
    pub det: f64,
    /// Full-matrix eigenvalues at the root, ascending.
    pub eigenvalues: [f64; 3],
}

/// Result of [`stability_boundary`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StabilityCurve {
    /// Roots ordered by `ε`, then `τ`.
    pub points: Vec<BoundaryPoint>,
    /// Columns with no sign change of the determinant.
    pub columns_without_root: Vec<f64>,
}

impl StabilityCurve {
    /// CSV with header `epsilon,tau,det,ev1,ev2,ev3`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,tau,det,ev1,ev2,ev3\n");
        for p in &self.points {
            s.push_str(&format!(
                "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e}\n",
                p.eps, p.tau, p.det, p.eigenvalues[0], p.eigenvalues[1], p.eigenvalues[2]
            ));
        }
        s
    }
}

/// Largest `|det|` accepted at a refined root; larger values mark a pole.
const ROOT_DET_TOL: f64 = 1e-9;

/// Roots of `det H(S)` along `τ` for one `ε` column.
///
/// The column is parametrized by `r = ((ε³ − τ)/(n−1))^{1/3}`, which covers the
/// valid `A(n,0)` range `(0, min(1−ε, ε/(n−1)))` and makes `a`, `b` affine.
pub fn stability_column(n: usize, eps: f64, tau_steps: usize) -> Vec<BoundaryPoint> {
    let k = (n - 1) as f64;
    let r_max = (1.0 - eps).min(eps / k);
    if n < 2 || r_max <= 0.0 {
        return Vec::new();
    }
    // Near the Erdős–Rényi curve the determinant decays to zero and its sign
    // is dominated by rounding; the scan starts away from it.
    let r_min = (2.0 * MIN_AB_GAP / n as f64).max(1e-3 * r_max);
    let det_at = |r: f64| -> Option<f64> {
        let a = eps - k * r;
        let b = eps + r;
        hessian_a(n, a, b).ok().map(|h| h.active_determinant)
    };
    let steps = tau_steps.max(8);
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let r = r_min + (r_max * (1.0 - 1e-9) - r_min) * t;
        let Some(d) = det_at(r) else {
            prev = None;
            continue;
        };
        if let Some((r0, d0)) = prev {
            if d == 0.0 || (d < 0.0) != (d0 < 0.0) {
                let root = bisect(|x| det_at(x).unwrap_or(f64::NAN), r0, r);
                let a = eps - k * root;
                let b = eps + root;
                if let Ok(h) = hessian_a(n, a, b) {
                    if h.active_determinant.abs() < ROOT_DET_TOL {
                        out.push(BoundaryPoint {
                            eps,
                            tau: eps.powi(3) - k * root.powi(3),
                            det: h.active_determinant,
                            eigenvalues: h.eigenvalues,
                        });
                    }
                }
            }
        }
        prev = Some((r, d));
    }
    out.sort_by(|x, y| x.tau.total_cmp(&y.tau));
    out
}

/// Traces `det H(S) = 0` for `A(n,0)` over `eps_steps + 1` columns in
/// `eps_range`, each scanned with `tau_steps` samples. Columns run in
/// parallel; the output order is by `ε`.
pub fn stability_boundary(
    n: usize,
    eps_range: (f64, f64),
    eps_steps: usize,
    tau_steps: usize,
) -> Result<StabilityCurve> {
    use rayon::prelude::*;
    let (lo, hi) = eps_range;
    if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
        return Err(Error::ParamRange {
            name: "eps_range",
            value: if lo <= 0.0 { lo } else { hi },
        });
    }
    if n < 2 {
        return Err(Error::ParamRange {
            name: "n",
            value: n as f64,
        });
    }
    let cols: Vec<f64> = if eps_steps == 0 {
        vec![lo]
    } else {
        (0..=eps_steps)
            .map(|i| lo + (hi - lo) * i as f64 / eps_steps as f64)
            .collect()
    };
    let per_col: Vec<Vec<BoundaryPoint>> = cols.par_iter().map(|&e| stability_column(n, e, tau_steps)).collect();
    let mut curve = StabilityCurve::default();
    for (e, pts) in cols.iter().zip(per_col) {
        if pts.is_empty() {
            curve.columns_without_root.push(*e);
        }
        curve.points.extend(pts);
    }
    Ok(curve)
}

/// True when the `A(n,0)` graphon at `pt` exists and is locally stable.
pub fn a_stable_at(n: usize, pt: ConstraintPoint) -> bool {
    hessian_at(n, pt).is_ok_and(|h| h.is_stable())
}

/// Rearranges a pode-ordered step function: returns a graphon on the
/// common refinement of `g`'s podes with the cut points in `cuts`.
fn refine_at(g: &MultipodalGraphon, cuts: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut bounds = vec![0.0];
    let mut acc = 0.0;
    for &c in g.sizes() {
        acc += c;
        bounds.push(acc);
    }
    let last = bounds.len() - 1;
    bounds[last] = 1.0;
    let mut points: Vec<f64> = bounds.clone();
    points.extend(cuts.iter().copied().filter(|&x| x > 0.0 && x < 1.0));
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut sizes = Vec::new();
    let mut owner = Vec::new();
    for w in points.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let pode = bounds
            .windows(2)
            .position(|b| mid >= b[0] && mid < b[1])
            .unwrap_or(g.n() - 1);
        sizes.push(w[1] - w[0]);
        owner.push(pode);
    }
    (sizes, owner)
}

/// Ways of laying the clique graphon over the podes of the minimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CliqueLayout {
    /// The clique occupies an initial segment of `[0,1]`.
    Prefix,
    /// Every pode is split in the clique proportion.
    Proportional,
}

/// `t·g₀ + (1−t)·(g₁∘φ)` for the clique graphon `g₁` of size `√ε`.
pub(crate) fn blend_with_clique(g0: &MultipodalGraphon, eps: f64, layout: CliqueLayout, t: f64) -> MultipodalGraphon {
    let s = eps.sqrt();
    // pieces: (size, pode of g0, in clique)
    let pieces: Vec<(f64, usize, bool)> = match layout {
        CliqueLayout::Prefix => {
            let (sizes, owner) = refine_at(g0, &[s]);
            let mut start = 0.0;
            sizes
                .iter()
                .zip(owner)
                .map(|(&w, o)| {
                    let mid = start + 0.5 * w;
                    start += w;
                    (w, o, mid < s)
                })
                .collect()
        }
        CliqueLayout::Proportional => (0..g0.n())
            .flat_map(|i| [(g0.sizes()[i] * s, i, true), (g0.sizes()[i] * (1.0 - s), i, false)])
            .filter(|p| p.0 > 0.0)
            .collect(),
    };
    let k = pieces.len();
    let mut probs = vec![0.0; k * k];
    for (x, &(_, ox, cx)) in pieces.iter().enumerate() {
        for (y, &(_, oy, cy)) in pieces.iter().enumerate() {
            let clique = if cx && cy { 1.0 } else { 0.0 };
            probs[x * k + y] = t * g0.prob(ox, oy) + (1.0 - t) * clique;
        }
    }
    let sizes: Vec<f64> = pieces.iter().map(|p| p.0).collect();
    let total: f64 = sizes.iter().sum();
    let sizes = sizes.iter().map(|w| w / total).collect();
    MultipodalGraphon::from_flat_unchecked(sizes, probs)
}

/// Blend weight `t` with `τ(t·g₀ + (1−t)·g₁∘φ) = τ₀`, by bisection.
pub(crate) fn blend_weight(g0: &MultipodalGraphon, eps: f64, tau0: f64, layout: CliqueLayout) -> f64 {
    // τ(0) = ε^{3/2} > τ₀ > τ(1) = τ(g₀)
    bisect(
        |t| triangle_density(&blend_with_clique(g0, eps, layout, t)) - tau0,
        0.0,
        1.0,
    )
}

/// Two inequivalent graphons with the same edge and triangle densities.
///
/// Blends the `τ`-minimizer at `ε` with the clique graphon laid out in two
/// different ways; each blend weight is tuned so that `τ` hits the target.
/// Both blends keep `ε` exactly since `ε` is linear in the blend.
pub fn nonuniqueness_pair(
    pt: ConstraintPoint,
    cfg: &crate::optimize::SolveConfig,
) -> Result<(MultipodalGraphon, MultipodalGraphon)> {
    if crate::optimize::region(pt) != crate::optimize::Region::Interior {
        return Err(Error::NotInterior {
            eps: pt.eps,
            tau: pt.tau,
        });
    }
    let g0 = crate::optimize::extremal_tau(pt.eps, crate::optimize::Extremum::Min, cfg)?.graphon;
    let build = |layout| {
        let t = blend_weight(&g0, pt.eps, pt.tau, layout);
        blend_with_clique(&g0, pt.eps, layout, t)
    };
    Ok((build(CliqueLayout::Prefix), build(CliqueLayout::Proportional)))
}
