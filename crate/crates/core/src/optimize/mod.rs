//! Constrained entropy maximization.
//!
//! [`solve`] runs a two-stage search: random multipodal graphons are repaired
//! onto the constraint window ([`sample_stage`]), then every candidate, plus a
//! set of family-based warm starts, is polished by a feasible-path SQP
//! ([`refine`]). The highest-entropy converged result wins.

mod param;
mod polish;
mod sqp;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{edge_density, entropy, triangle_density};
use crate::error::{Error, Result};
use crate::families::{euler_lagrange_residual, solve_a, FamilySpec};
use crate::graphon::{
    canonicalize, classify, ConstraintPoint, Family, MultipodalGraphon, PhaseLabel, DEFAULT_CLASSIFY_TOL,
    DEFAULT_MERGE_TOL, DEGENERATE_SIZE, MAX_PODES,
};

pub(crate) use param::Parametrization;
use sqp::{Objective, Outcome, Problem, Settings};

/// Upper limit on candidates kept by [`sample_stage`].
pub const MAX_CANDIDATES: usize = 32;
/// Distance to the feasible boundary treated as on it.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_podes: usize,
    /// Acceptance half-width for `|ε − ε₀|` and `|τ − τ₀|` in the sampling stage.
    pub window: f64,
    pub samples: usize,
    pub refine_tol: f64,
    pub seed: u64,
    /// Sampled candidates passed on to refinement.
    pub candidates: usize,
    /// Random starts per family-restricted solve.
    pub family_starts: usize,
    /// Random starts per family when warm-starting [`solve`].
    pub warm_family_starts: usize,
    pub max_iter: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_podes: 6,
            window: 1e-4,
            samples: 20_000,
            refine_tol: 1e-8,
            seed: 0,
            candidates: 12,
            family_starts: 32,
            warm_family_starts: 8,
            max_iter: 300,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0) {
            return Err(Error::ParamRange {
                name: "window",
                value: self.window,
            });
        }
        if !(1..=MAX_PODES).contains(&self.max_podes) {
            return Err(Error::ParamRange {
                name: "max_podes",
                value: self.max_podes as f64,
            });
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::ParamRange {
                name: "refine_tol",
                value: self.refine_tol,
            });
        }
        Ok(())
    }

    fn settings(&self) -> Settings {
        Settings {
            tol: self.refine_tol,
            max_iter: self.max_iter,
            restore_tol: (self.refine_tol * 1e-4).clamp(1e-14, 1e-10),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIterations,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Converged => "Converged",
            Status::MaxIterations => "MaxIterations",
            Status::Infeasible => "Infeasible",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub target: ConstraintPoint,
    /// Canonical form of the optimizer.
    pub graphon: MultipodalGraphon,
    pub entropy: f64,
    /// Multiplier of the edge constraint; `NaN` when it diverges (boundary points).
    pub alpha: f64,
    /// Multiplier of the triangle constraint (`∂s/∂τ`); `NaN` when it diverges.
    pub beta: f64,
    pub kkt_residual: f64,
    pub el_residual: f64,
    /// Some block sits at 0 or 1, so the Euler–Lagrange check is one-sided there.
    pub el_boundary: bool,
    pub constraint_violation: f64,
    pub label: PhaseLabel,
    pub status: Status,
    pub iterations: usize,
    /// Family parameters for family-restricted results.
    pub family_params: Option<FamilySpec>,
}

impl OptimizationResult {
    pub fn to_json_value(&self) -> serde_json::Value {
        let num = |v: f64| {
            if v.is_finite() {
                serde_json::json!(v)
            } else {
                serde_json::Value::Null
            }
        };
        serde_json::json!({
            "eps": self.target.eps,
            "tau": self.target.tau,
            "graphon": self.graphon,
            "entropy": num(self.entropy),
            "alpha": num(self.alpha),
            "beta": num(self.beta),
            "label": self.label.name(),
            "ambiguous_with": self.label.ambiguous_with.map(|(f, (m, k))| match f {
                Family::Unknown => "UNKNOWN".to_string(),
                _ => format!("{f}({m},{k})"),
            }),
            "status": self.status.to_string(),
            "iterations": self.iterations,
            "family_params": self.family_params,
            "residuals": {
                "kkt": num(self.kkt_residual),
                "el": num(self.el_residual),
                "el_boundary": self.el_boundary,
                "constraint": num(self.constraint_violation),
            },
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("json")
    }

    fn is_usable(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Per-candidate RNG stream derived from the configured seed.
fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_sizes(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v: &f64| v / total).collect()
}

fn random_graphon(rng: &mut ChaCha8Rng, k: usize) -> MultipodalGraphon {
    let sizes = random_sizes(rng, k);
    let mut probs = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let v: f64 = rng.random();
            probs[i * k + j] = v;
            probs[j * k + i] = v;
        }
    }
    MultipodalGraphon::from_flat_unchecked(sizes, probs)
}

fn mix_toward_constant(g: &MultipodalGraphon, value: f64, s: f64) -> MultipodalGraphon {
    let probs = g.probs_flat().iter().map(|&p| (1.0 - s) * p + s * value).collect();
    MultipodalGraphon::from_flat_unchecked(g.sizes().to_vec(), probs)
}

/// Moves a graphon onto the edge target by an affine rescale of its values,
/// then toward the constant graphon to approach the triangle target.
fn repair(g: &MultipodalGraphon, pt: ConstraintPoint) -> Option<MultipodalGraphon> {
    let e = edge_density(g);
    let probs: Vec<f64> = if e >= pt.eps {
        if e == 0.0 {
            return None;
        }
        g.probs_flat().iter().map(|&p| p * pt.eps / e).collect()
    } else {
        if e >= 1.0 {
            return None;
        }
        g.probs_flat()
            .iter()
            .map(|&p| 1.0 - (1.0 - p) * (1.0 - pt.eps) / (1.0 - e))
            .collect()
    };
    let g = MultipodalGraphon::from_flat_unchecked(g.sizes().to_vec(), probs);
    let t0 = triangle_density(&g) - pt.tau;
    let t1 = pt.eps.powi(3) - pt.tau;
    if t0 == 0.0 {
        return Some(g);
    }
    if (t0 < 0.0) == (t1 < 0.0) && t1 != 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        let v = triangle_density(&mix_toward_constant(&g, pt.eps, mid)) - pt.tau;
        if (v < 0.0) == (t0 < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(mix_toward_constant(&g, pt.eps, 0.5 * (lo + hi)))
}

/// Random sampling stage: draws `cfg.samples` graphons with 1 to
/// `cfg.max_podes` podes (sizes from a flat Dirichlet, values uniform),
/// repairs them toward `pt`, keeps those inside the window and returns the
/// highest-entropy ones (at most `cfg.candidates`).
pub fn sample_stage(pt: ConstraintPoint, cfg: &SolveConfig) -> Result<Vec<MultipodalGraphon>> {
    cfg.validate()?;
    let kept: Vec<(f64, usize, MultipodalGraphon)> = (0..cfg.samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = stream_rng(cfg.seed, i as u64);
            let k = 1 + i % cfg.max_podes;
            let g = repair(&random_graphon(&mut rng, k), pt)?;
            let de = (edge_density(&g) - pt.eps).abs();
            let dt = (triangle_density(&g) - pt.tau).abs();
            (de <= cfg.window && dt <= cfg.window).then(|| (entropy(&g), i, g))
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut kept = kept;
    kept.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let limit = cfg.candidates.clamp(1, MAX_CANDIDATES);
    Ok(kept.into_iter().take(limit).map(|(_, _, g)| g).collect())
}

fn drop_tiny(g: &MultipodalGraphon) -> MultipodalGraphon {
    let keep: Vec<usize> = (0..g.n()).filter(|&i| g.sizes()[i] >= DEGENERATE_SIZE).collect();
    if keep.len() == g.n() {
        return g.clone();
    }
    let k = keep.len();
    let total: f64 = keep.iter().map(|&i| g.sizes()[i]).sum();
    let sizes = keep.iter().map(|&i| g.sizes()[i] / total).collect();
    let mut probs = vec![0.0; k * k];
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            probs[a * k + b] = g.prob(i, j);
        }
    }
    MultipodalGraphon::from_flat_unchecked(sizes, probs)
}

fn finish(
    param: &Parametrization,
    problem: &Problem<'_>,
    run: &sqp::SqpResult,
    pt: ConstraintPoint,
    cfg: &SolveConfig,
) -> OptimizationResult {
    let raw = drop_tiny(&param.graphon(&run.x));
    let alpha = run.multipliers[problem.eps_row()];
    let beta = problem.tau_row().map_or(f64::NAN, |r| run.multipliers[r]);
    let el = if beta.is_finite() && alpha.is_finite() {
        euler_lagrange_residual(&raw, alpha, beta)
    } else {
        euler_lagrange_residual(&raw, 0.0, 0.0)
    };
    let graphon = canonicalize(&raw, DEFAULT_MERGE_TOL);
    let violation = {
        let de = (edge_density(&graphon) - pt.eps).abs();
        match problem.tau {
            Some(t) => de.max((triangle_density(&graphon) - t).abs()),
            None => de,
        }
    };
    let status = match run.outcome {
        Outcome::Infeasible => Status::Infeasible,
        Outcome::Converged if violation <= 10.0 * cfg.refine_tol => Status::Converged,
        _ => Status::MaxIterations,
    };
    let label = classify(&graphon, DEFAULT_CLASSIFY_TOL, Some(pt));
    OptimizationResult {
        target: pt,
        entropy: entropy(&graphon),
        graphon,
        alpha,
        beta,
        kkt_residual: run.kkt,
        el_residual: if beta.is_finite() { el.max_abs } else { f64::NAN },
        el_boundary: el.boundary,
        constraint_violation: violation,
        label,
        status,
        iterations: run.iterations,
        family_params: param.spec(&run.x),
    }
}

fn run_general(
    start: &MultipodalGraphon,
    pt: ConstraintPoint,
    cfg: &SolveConfig,
    objective: Objective,
) -> OptimizationResult {
    let (param, x0) = Parametrization::from_graphon(start);
    let problem = Problem {
        param: &param,
        objective,
        eps: pt.eps,
        tau: (objective == Objective::Entropy).then_some(pt.tau),
    };
    let run = problem.solve(&x0, &cfg.settings());
    let result = finish(&param, &problem, &run, pt, cfg);
    if objective == Objective::Entropy && result.status == Status::Converged && result.beta.is_finite() {
        polished(result, cfg)
    } else {
        result
    }
}

fn polished(r: OptimizationResult, cfg: &SolveConfig) -> OptimizationResult {
    let pt = r.target;
    let Some(p) = polish::polish(
        &r.graphon,
        r.alpha,
        r.beta,
        (pt.eps, pt.tau),
        r.constraint_violation.max(1e-12).min(10.0 * cfg.refine_tol),
    ) else {
        return r;
    };
    let graphon = canonicalize(&p.graphon, DEFAULT_MERGE_TOL);
    let el = euler_lagrange_residual(&graphon, p.alpha, p.beta);
    OptimizationResult {
        entropy: entropy(&graphon),
        constraint_violation: (edge_density(&graphon) - pt.eps)
            .abs()
            .max((triangle_density(&graphon) - pt.tau).abs()),
        label: classify(&graphon, DEFAULT_CLASSIFY_TOL, Some(pt)),
        el_residual: el.max_abs,
        el_boundary: el.boundary,
        alpha: p.alpha,
        beta: p.beta,
        graphon,
        ..r
    }
}

/// Local entropy maximization from `candidate` over all graphons with the
/// same pode count.
pub fn refine(candidate: &MultipodalGraphon, pt: ConstraintPoint, cfg: &SolveConfig) -> OptimizationResult {
    run_general(candidate, pt, cfg, Objective::Entropy)
}

/// Deterministic preference: higher entropy, then canonical order.
fn better(a: &OptimizationResult, b: &OptimizationResult) -> bool {
    match a.entropy.total_cmp(&b.entropy) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let ka: Vec<f64> = a
                .graphon
                .sizes()
                .iter()
                .chain(a.graphon.probs_flat())
                .copied()
                .collect();
            let kb: Vec<f64> = b
                .graphon
                .sizes()
                .iter()
                .chain(b.graphon.probs_flat())
                .copied()
                .collect();
            ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less)
        }
    }
}

pub(crate) fn best_of(results: impl IntoIterator<Item = OptimizationResult>) -> Option<OptimizationResult> {
    let mut best: Option<OptimizationResult> = None;
    for r in results {
        if !r.is_usable() {
            continue;
        }
        if best.as_ref().is_none_or(|b| better(&r, b)) {
            best = Some(r);
        }
    }
    best
}

/// Where a point sits relative to the feasible region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Interior,
    LowerBoundary,
    UpperBoundary,
    Infeasible,
}

/// Classifies `pt` against `τ_low(ε)` and `ε^{3/2}` with margin [`BOUNDARY_MARGIN`].
pub fn region(pt: ConstraintPoint) -> Region {
    let upper = pt.eps.powf(1.5);
    if pt.tau > upper + BOUNDARY_MARGIN || pt.tau < pt.eps * (2.0 * pt.eps - 1.0) - BOUNDARY_MARGIN {
        return Region::Infeasible;
    }
    if pt.tau >= upper - BOUNDARY_MARGIN {
        return Region::UpperBoundary;
    }
    let low = lower_boundary(pt.eps);
    if pt.tau < low - BOUNDARY_MARGIN {
        Region::Infeasible
    } else if pt.tau <= low + BOUNDARY_MARGIN {
        Region::LowerBoundary
    } else {
        Region::Interior
    }
}

/// Numerical `min τ` at edge density `ε`, memoized per `ε`.
pub fn lower_boundary(eps: f64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&eps.to_bits()) {
        return *v;
    }
    let v = if eps <= 0.5 {
        0.0
    } else {
        extremal_tau(eps, Extremum::Min, &boundary_config(eps)).map_or(f64::NAN, |r| triangle_density(&r.graphon))
    };
    cache.lock().unwrap().insert(eps.to_bits(), v);
    v
}

/// Config used for boundary computations: enough podes for the scallop at `ε`.
pub(crate) fn boundary_config(eps: f64) -> SolveConfig {
    let needed = ((eps / (1.0 - eps)).ceil() as usize + 1).min(MAX_PODES);
    SolveConfig {
        max_podes: needed.max(4),
        family_starts: 12,
        ..SolveConfig::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremum {
    Min,
    Max,
}

fn clique(eps: f64) -> MultipodalGraphon {
    let s = eps.sqrt();
    if s >= 1.0 {
        return MultipodalGraphon::from_flat_unchecked(vec![1.0], vec![1.0]);
    }
    MultipodalGraphon::from_flat_unchecked(vec![s, 1.0 - s], vec![1.0, 0.0, 0.0, 0.0])
}

/// Extremal triangle density at fixed edge density.
///
/// `Max` is attained by the clique graphon (`τ = ε^{3/2}`); `Min` is found by
/// multi-start SQP on `τ` over graphons with up to `cfg.max_podes` podes,
/// seeded with complete multipartite graphons.
pub fn extremal_tau(eps: f64, direction: Extremum, cfg: &SolveConfig) -> Result<OptimizationResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::ParamRange {
            name: "edge density",
            value: eps,
        });
    }
    cfg.validate()?;
    let objective = match direction {
        Extremum::Min => Objective::TauMin,
        Extremum::Max => Objective::TauMax,
    };
    let mut starts: Vec<MultipodalGraphon> = Vec::new();
    match direction {
        Extremum::Max => starts.push(clique(eps)),
        Extremum::Min => {
            for k in 2..=cfg.max_podes.max(2) {
                let base = MultipodalGraphon::complete_multipartite(k)?;
                starts.push(base.clone());
                // unbalanced variant: last pode shrunk
                let mut sizes = vec![1.0; k];
                sizes[k - 1] = 0.5;
                let total: f64 = sizes.iter().sum();
                let sizes = sizes.iter().map(|s| s / total).collect();
                starts.push(MultipodalGraphon::from_flat_unchecked(
                    sizes,
                    base.probs_flat().to_vec(),
                ));
            }
        }
    }
    let n_random = (cfg.family_starts / 4).max(2);
    for i in 0..n_random {
        let mut rng = stream_rng(cfg.seed, 0x5eed_0000 + i as u64);
        let k = 2 + i % cfg.max_podes.max(2).saturating_sub(1).max(1);
        starts.push(random_graphon(&mut rng, k.min(cfg.max_podes.max(2))));
    }
    let tau_target = if direction == Extremum::Max { eps.powf(1.5) } else { 0.0 };
    let pt = ConstraintPoint { eps, tau: tau_target };
    let results: Vec<OptimizationResult> = starts
        .par_iter()
        .map(|g| {
            let mut r = run_general(g, pt, cfg, objective);
            let tau = triangle_density(&r.graphon);
            r.target = ConstraintPoint { eps, tau };
            r.label = classify(&r.graphon, DEFAULT_CLASSIFY_TOL, None);
            r
        })
        .collect();
    let score = |r: &OptimizationResult| {
        let t = triangle_density(&r.graphon);
        if direction == Extremum::Min {
            -t
        } else {
            t
        }
    };
    let mut best: Option<OptimizationResult> = None;
    for r in results {
        if r.status != Status::Converged {
            continue;
        }
        if best.as_ref().is_none_or(|b| score(&r) > score(b) + 1e-15) {
            best = Some(r);
        }
    }
    let mut best = best.ok_or(Error::Infeasible { eps, tau: tau_target })?;
    best.alpha = f64::NAN;
    best.beta = f64::NAN;
    Ok(best)
}

/// Options for [`solve_in_family_with`].
#[derive(Clone, Debug, Default)]
pub struct FamilyOptions {
    /// Reject optima that degenerate into a different structure.
    pub proper: bool,
    /// Extra starting point, e.g. the optimizer at a neighboring scan point.
    pub warm_start: Option<FamilySpec>,
    /// Overrides `cfg.family_starts`; zero keeps only the warm and closed-form starts.
    pub starts: Option<usize>,
}

fn family_stream(family: Family, m: usize) -> u64 {
    let f = match family {
        Family::A => 1,
        Family::B => 2,
        Family::C => 3,
        Family::F => 4,
        Family::Unknown => 5,
    };
    0x00fa_0000_0000 + f * 0x1_0000 + m as u64 * 0x100
}

/// Entropy maximization restricted to one family, by multi-start SQP over
/// its parameters.
pub fn solve_in_family(family: Family, m: usize, pt: ConstraintPoint, cfg: &SolveConfig) -> Result<OptimizationResult> {
    solve_in_family_with(family, m, pt, cfg, &FamilyOptions::default())
}

pub fn solve_in_family_with(
    family: Family,
    m: usize,
    pt: ConstraintPoint,
    cfg: &SolveConfig,
    opts: &FamilyOptions,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    let infeasible = || Error::FamilyInfeasible {
        family: format!(
            "{family}({m},{})",
            match family {
                Family::A => 0,
                Family::C => 2,
                _ => 1,
            }
        ),
    };
    let param = Parametrization::family(family, m).ok_or_else(infeasible)?;
    let problem = Problem {
        param: &param,
        objective: Objective::Entropy,
        eps: pt.eps,
        tau: Some(pt.tau),
    };
    let dim = param.dim();
    let mut starts: Vec<DVector<f64>> = Vec::new();
    if let Some(spec) = &opts.warm_start {
        if let Some(x) = param.x_from_spec(spec) {
            starts.push(x);
        }
    }
    if family == Family::A {
        if let Ok(spec) = solve_a(m, pt) {
            starts.push(param.x_from_spec(&spec).expect("A layout"));
        }
    }
    let starts_wanted = match opts.starts.unwrap_or(cfg.family_starts) {
        0 if starts.is_empty() => 1,
        k => k,
    };
    // random pool, screened by distance to the target densities
    let mut rng = stream_rng(cfg.seed, family_stream(family, m));
    let mut pool: Vec<(f64, usize, DVector<f64>)> = (0..8 * starts_wanted)
        .map(|i| {
            let x = DVector::from_fn(dim, |_, _| rng.random::<f64>());
            let (c, p) = param.parts(&x);
            let d = (crate::densities::edge_raw(&c, &p) - pt.eps).abs()
                + (crate::densities::triangle_raw(&c, &p) - pt.tau).abs();
            (d, i, x)
        })
        .collect();
    pool.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    starts.extend(pool.into_iter().take(starts_wanted).map(|t| t.2));

    let settings = cfg.settings();
    let results: Vec<OptimizationResult> = starts
        .par_iter()
        .map(|x0| {
            let run = problem.solve(x0, &settings);
            finish(&param, &problem, &run, pt, cfg)
        })
        .collect();
    let expected = match family {
        Family::A => (m, 0),
        Family::C => (m, 2),
        _ => (m, 1),
    };
    let proper = |r: &OptimizationResult| {
        let lab = classify(&r.graphon, DEFAULT_CLASSIFY_TOL, None);
        match family {
            Family::F => lab.matches(Family::B, (1, 1)),
            _ => lab.matches(family, expected),
        }
    };
    best_of(results.into_iter().filter(|r| !opts.proper || proper(r))).ok_or_else(infeasible)
}

/// Families tried as warm starts by [`solve`] for a given pode cap.
pub(crate) fn warm_families(max_podes: usize, above_er: bool) -> Vec<(Family, usize)> {
    let mut out = Vec::new();
    if above_er {
        out.push((Family::F, 1));
    }
    for m in 1..max_podes {
        out.push((Family::B, m));
    }
    for m in 1..max_podes.saturating_sub(1) {
        out.push((Family::C, m));
    }
    out
}

/// Boundary points have a single feasible graphon (up to equivalence); it is
/// returned with diverging multipliers reported as `NaN`.
fn boundary_result(pt: ConstraintPoint, which: Region, cfg: &SolveConfig) -> Result<OptimizationResult> {
    let ext = match which {
        Region::UpperBoundary => extremal_tau(pt.eps, Extremum::Max, cfg)?,
        _ => extremal_tau(pt.eps, Extremum::Min, &boundary_config(pt.eps))?,
    };
    let g = ext.graphon;
    let violation = (edge_density(&g) - pt.eps)
        .abs()
        .max((triangle_density(&g) - pt.tau).abs());
    Ok(OptimizationResult {
        target: pt,
        entropy: entropy(&g),
        label: classify(&g, DEFAULT_CLASSIFY_TOL, Some(pt)),
        el_boundary: true,
        graphon: g,
        alpha: f64::NAN,
        beta: f64::NAN,
        kkt_residual: 0.0,
        el_residual: f64::NAN,
        constraint_violation: violation,
        status: Status::Converged,
        iterations: ext.iterations,
        family_params: None,
    })
}

/// Starting graphons that do not come from random sampling.
fn warm_starts(pt: ConstraintPoint, cfg: &SolveConfig) -> Vec<MultipodalGraphon> {
    let mut out = Vec::new();
    for n in 2..=cfg.max_podes {
        if let Ok(spec) = solve_a(n, pt) {
            if let Ok(g) = crate::families::build_family(&spec) {
                out.push(g);
            }
        }
    }
    let e = pt.eps;
    let lo = (e - 0.02).max(0.0);
    let hi = (e + 0.02).min(1.0);
    out.push(MultipodalGraphon::from_flat_unchecked(
        vec![0.5, 0.5],
        vec![lo, e, e, hi],
    ));
    for k in 2..=cfg.max_podes {
        out.push(MultipodalGraphon::complete_multipartite(k).expect("valid"));
    }
    out
}

/// Maximum-entropy graphon at `pt`.
pub fn solve(pt: ConstraintPoint, cfg: &SolveConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let reg = region(pt);
    match reg {
        Region::Infeasible => {
            return Err(Error::Infeasible {
                eps: pt.eps,
                tau: pt.tau,
            })
        }
        Region::LowerBoundary | Region::UpperBoundary => return boundary_result(pt, reg, cfg),
        Region::Interior => {}
    }
    if pt.er_gap() == 0.0 {
        // the constant graphon is the unique maximizer on the Erdős–Rényi curve
        let g = MultipodalGraphon::constant(pt.eps)?;
        let (param, x) = Parametrization::from_graphon(&g);
        let problem = Problem {
            param: &param,
            objective: Objective::Entropy,
            eps: pt.eps,
            tau: Some(pt.tau),
        };
        let run = problem.solve(&x, &cfg.settings());
        return Ok(finish(&param, &problem, &run, pt, cfg));
    }
    let mut starts = sample_stage(pt, cfg).unwrap_or_default();
    starts.extend(warm_starts(pt, cfg));
    let fam_cfg = SolveConfig {
        family_starts: cfg.warm_family_starts,
        ..cfg.clone()
    };
    let fam_results: Vec<OptimizationResult> = warm_families(cfg.max_podes, pt.above_er())
        .par_iter()
        .filter_map(|&(f, m)| solve_in_family(f, m, pt, &fam_cfg).ok())
        .collect();
    starts.extend(fam_results.iter().map(|r| r.graphon.clone()));
    let mut results: Vec<OptimizationResult> = starts.par_iter().map(|g| refine(g, pt, cfg)).collect();
    results.extend(fam_results.into_iter().map(|mut r| {
        r.family_params = None;
        r
    }));
    let best = best_of(results).ok_or(Error::Infeasible {
        eps: pt.eps,
        tau: pt.tau,
    })?;
    Ok(consolidate(best, pt, cfg))
}

/// Rows closer than this are candidates for merging after refinement.
const CONSOLIDATE_TOL: f64 = 1e-4;

/// Merges nearly equivalent podes of a refined optimum and re-refines; keeps
/// the merged result unless it loses entropy. Tiny podes split into several
/// almost identical copies have almost no curvature and otherwise survive.
pub(crate) fn consolidate(best: OptimizationResult, pt: ConstraintPoint, cfg: &SolveConfig) -> OptimizationResult {
    let merged = canonicalize(&best.graphon, CONSOLIDATE_TOL);
    if merged.n() == best.graphon.n() {
        return best;
    }
    let r = refine(&merged, pt, cfg);
    if r.is_usable() && r.entropy >= best.entropy - 1e-10 {
        r
    } else {
        best
    }
}

/// Entropy maximization warm-started from given graphons (no sampling).
pub fn solve_from(pt: ConstraintPoint, starts: &[MultipodalGraphon], cfg: &SolveConfig) -> Option<OptimizationResult> {
    let results: Vec<OptimizationResult> = starts.par_iter().map(|g| refine(g, pt, cfg)).collect();
    best_of(results)
}

#[cfg(test)]
mod tests;
