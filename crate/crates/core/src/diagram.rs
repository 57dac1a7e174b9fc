//! Phase-space cartography: feasibility, line and grid scans, transition
//! detection and continuity probes.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{cusp, stability_column, FamilySpec, StabilityCurve};
use crate::graphon::{ConstraintPoint, Family, MultipodalGraphon, PhaseLabel, MAX_PODES};
use crate::optimize::{
    self, best_of, extremal_tau, refine, solve, solve_in_family_with, warm_families, Extremum, FamilyOptions,
    OptimizationResult, SolveConfig, Status,
};

/// Distance from the boundary curves inside which a point counts as on them.
pub const FEASIBILITY_MARGIN: f64 = 1e-6;
pub const DEFAULT_SLOPE_JUMP_TOL: f64 = 0.05;
/// Largest scan grid per axis.
pub const MAX_GRID: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feasibility {
    Interior,
    Boundary,
    Infeasible,
}

/// Piecewise-linear lower boundary `τ_low(ε)` of the feasible region.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundary {
    /// `(ε, τ_low)` sorted by `ε`.
    points: Vec<(f64, f64)>,
}

impl LowerBoundary {
    /// Uniform mesh on `[0, 1]` with step 0.01.
    pub fn default_mesh() -> Vec<f64> {
        (0..=100).map(|i| i as f64 / 100.0).collect()
    }

    /// Minimum `τ` at each mesh point plus the cusps `(n/(n+1), n(n−1)/(n+1)²)`.
    ///
    /// Mesh points that need more than the maximum pode count are left to the cusps.
    pub fn compute(mesh: &[f64], cfg: &SolveConfig) -> Result<Self> {
        let limit = (MAX_PODES - 1) as f64 / MAX_PODES as f64;
        let computed: Vec<Option<(f64, f64)>> = mesh
            .par_iter()
            .map(|&e| {
                if e <= 0.5 {
                    Some((e.max(0.0), 0.0))
                } else if e >= 1.0 {
                    Some((1.0, 1.0))
                } else if e > limit {
                    None
                } else {
                    let local = SolveConfig {
                        seed: cfg.seed,
                        ..optimize::boundary_config(e)
                    };
                    extremal_tau(e, Extremum::Min, &local)
                        .ok()
                        .map(|r| (e, crate::densities::triangle_density(&r.graphon)))
                }
            })
            .collect();
        let mut points: Vec<(f64, f64)> = computed.into_iter().flatten().collect();
        for n in 1..=200 {
            let c = cusp(n);
            points.push((c.eps, c.tau));
        }
        points.push((0.0, 0.0));
        points.push((1.0, 1.0));
        Ok(Self::from_points(points))
    }

    fn from_points(mut points: Vec<(f64, f64)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        // cusps are exact; a computed point at the same ε is dropped
        points.dedup_by(|later, earlier| {
            (later.0 - earlier.0).abs() < 1e-12 && {
                earlier.1 = earlier.1.min(later.1);
                true
            }
        });
        Self { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Linear interpolation between mesh points.
    pub fn tau_low(&self, eps: f64) -> f64 {
        let p = &self.points;
        if eps <= p[0].0 {
            return p[0].1;
        }
        let k = p.partition_point(|q| q.0 < eps);
        if k >= p.len() {
            return p[p.len() - 1].1;
        }
        let (e1, t1) = p[k];
        if e1 == eps {
            return t1;
        }
        let (e0, t0) = p[k - 1];
        t0 + (t1 - t0) * (eps - e0) / (e1 - e0)
    }

    pub fn to_csv(&self, meta: Option<&str>) -> String {
        let mut s = String::new();
        if let Some(m) = meta {
            let _ = writeln!(s, "{m}");
        }
        s.push_str("epsilon,tau_low\n");
        for (e, t) in &self.points {
            let _ = writeln!(s, "{e:.14e},{t:.14e}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("epsilon") {
                continue;
            }
            let mut it = line.split(',');
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::Parse(format!("short row {line:?}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            points.push((next()?, next()?));
        }
        if points.is_empty() {
            return Err(Error::Parse("empty boundary file".into()));
        }
        Ok(Self::from_points(points))
    }

    /// Reads the cache at `path`, or computes it on `mesh` and writes it there.
    pub fn load_or_compute(path: &Path, mesh: &[f64], cfg: &SolveConfig) -> Result<Self> {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Ok(b) = Self::from_csv(&text) {
                return Ok(b);
            }
        }
        let b = Self::compute(mesh, cfg)?;
        std::fs::write(path, b.to_csv(Some(&mesh_key(mesh))))?;
        Ok(b)
    }
}

fn mesh_key(mesh: &[f64]) -> String {
    let (lo, hi) = (
        mesh.first().copied().unwrap_or(0.0),
        mesh.last().copied().unwrap_or(0.0),
    );
    format!("# mesh points={} from={lo} to={hi}", mesh.len())
}

/// Classifies `pt` against `ε^{3/2}` and the interpolated lower boundary.
pub fn feasible(pt: ConstraintPoint, lower: &LowerBoundary) -> Feasibility {
    if !(0.0..=1.0).contains(&pt.eps) || !(0.0..=1.0).contains(&pt.tau) {
        return Feasibility::Infeasible;
    }
    let upper = pt.eps.powf(1.5);
    let low = lower.tau_low(pt.eps);
    if pt.tau > upper + FEASIBILITY_MARGIN || pt.tau < low - FEASIBILITY_MARGIN {
        Feasibility::Infeasible
    } else if pt.tau >= upper - FEASIBILITY_MARGIN || pt.tau <= low + FEASIBILITY_MARGIN {
        Feasibility::Boundary
    } else {
        Feasibility::Interior
    }
}

/// One scanned point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub point: ConstraintPoint,
    pub entropy: f64,
    pub label: PhaseLabel,
    /// Canonical sizes followed by the upper triangle of the block matrix.
    pub params: Vec<f64>,
    pub beta: f64,
    pub status: Status,
}

impl ScanRecord {
    pub fn from_result(r: &OptimizationResult) -> Self {
        Self {
            point: r.target,
            entropy: r.entropy,
            label: r.label.clone(),
            params: flatten(&r.graphon),
            beta: r.beta,
            status: r.status,
        }
    }

    /// Placeholder for a point that could not be solved.
    pub fn failed(point: ConstraintPoint, status: Status) -> Self {
        Self {
            point,
            entropy: f64::NAN,
            label: PhaseLabel::unknown(Vec::new()),
            params: Vec::new(),
            beta: f64::NAN,
            status,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.status == Status::Converged && self.entropy.is_finite()
    }
}

fn flatten(g: &MultipodalGraphon) -> Vec<f64> {
    let n = g.n();
    let mut out = g.sizes().to_vec();
    for i in 0..n {
        for j in i..n {
            out.push(g.prob(i, j));
        }
    }
    out
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.14e}")
    } else {
        "nan".to_string()
    }
}

/// CSV with header `epsilon,tau,tau_rescaled,entropy,beta,label,status,params`;
/// the parameters fill the trailing columns.
pub fn records_to_csv(records: &[ScanRecord], meta: Option<&str>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record([
        "epsilon",
        "tau",
        "tau_rescaled",
        "entropy",
        "beta",
        "label",
        "status",
        "params",
    ])?;
    for r in records {
        let mut row = vec![
            fmt_num(r.point.eps),
            fmt_num(r.point.tau),
            fmt_num(r.point.tau_rescaled()),
            fmt_num(r.entropy),
            fmt_num(r.beta),
            r.label.name(),
            r.status.to_string(),
        ];
        row.extend(r.params.iter().map(|&v| fmt_num(v)));
        w.write_record(&row)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).expect("utf8");
    Ok(match meta {
        Some(m) => format!("{m}\n{body}"),
        None => body,
    })
}

/// Reads [`records_to_csv`] output back (labels carry no signature).
pub fn records_from_csv(text: &str) -> Result<Vec<ScanRecord>> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rd = csv::ReaderBuilder::new().flexible(true).from_reader(body.as_bytes());
    let num = |s: &str| -> Result<f64> {
        if s == "nan" {
            Ok(f64::NAN)
        } else {
            s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
        }
    };
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        if row.len() < 7 {
            return Err(Error::Parse("scan row has fewer than 7 fields".into()));
        }
        let (family, params) = crate::graphon::parse_label(&row[5])?;
        let status = match &row[6] {
            "Converged" => Status::Converged,
            "MaxIterations" => Status::MaxIterations,
            "Infeasible" => Status::Infeasible,
            s => return Err(Error::Parse(format!("unknown status {s:?}"))),
        };
        out.push(ScanRecord {
            point: ConstraintPoint {
                eps: num(&row[0])?,
                tau: num(&row[1])?,
            },
            entropy: num(&row[3])?,
            beta: num(&row[4])?,
            label: PhaseLabel {
                signature: Vec::new(),
                family,
                params,
                ambiguous_with: None,
            },
            status,
            params: row.iter().skip(7).map(num).collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

/// Uniform grid of `steps` values over `range` (the lower end when `steps == 1`).
fn grid(range: (f64, f64), steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![range.0],
        _ => (0..steps)
            .map(|k| range.0 + (range.1 - range.0) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Options for [`scan_line_with`].
#[derive(Clone, Debug, Default)]
pub struct LineOptions {
    /// Restrict every point to the best of these families instead of a full solve.
    pub families: Option<Vec<(Family, usize)>>,
    /// Skip neighbor warm starts (cold solves only).
    pub cold_only: bool,
}

/// Entropy maximization along the vertical line `ε` over `steps` values of `τ`.
pub fn scan_line(eps: f64, tau_range: (f64, f64), steps: usize, cfg: &SolveConfig) -> Result<Vec<ScanRecord>> {
    scan_line_with(eps, tau_range, steps, cfg, &LineOptions::default())
}

/// Every point is solved cold and along two warm-start chains (one per
/// direction); the best result is kept, which avoids hysteresis at
/// discontinuous transitions.
pub fn scan_line_with(
    eps: f64,
    tau_range: (f64, f64),
    steps: usize,
    cfg: &SolveConfig,
    opts: &LineOptions,
) -> Result<Vec<ScanRecord>> {
    cfg.validate()?;
    if steps == 0 {
        return Err(Error::ParamRange {
            name: "steps",
            value: 0.0,
        });
    }
    let (lo, hi) = (tau_range.0.min(tau_range.1), tau_range.0.max(tau_range.1));
    let taus = grid((lo, hi), steps);
    let points: Vec<ConstraintPoint> = taus.iter().map(|&t| ConstraintPoint { eps, tau: t }).collect();
    let feasible: Vec<bool> = points
        .iter()
        .map(|&p| optimize::region(p) != optimize::Region::Infeasible)
        .collect();

    let cold: Vec<Option<OptimizationResult>> = points
        .par_iter()
        .zip(&feasible)
        .map(|(&pt, &ok)| if ok { cold_point(pt, cfg, opts) } else { None })
        .collect();
    let (down, up) = if opts.cold_only || steps == 1 {
        (vec![None; steps], vec![None; steps])
    } else {
        rayon::join(
            || warm_chain(&points, &feasible, cfg, opts, true),
            || warm_chain(&points, &feasible, cfg, opts, false),
        )
    };
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        if !feasible[k] {
            out.push(ScanRecord::failed(points[k], Status::Infeasible));
            continue;
        }
        let best = best_of([cold[k].clone(), down[k].clone(), up[k].clone()].into_iter().flatten()).map(|r| {
            if opts.families.is_none() {
                optimize::consolidate(r, points[k], cfg)
            } else {
                r
            }
        });
        out.push(match best {
            Some(r) => ScanRecord::from_result(&r),
            None => ScanRecord::failed(points[k], Status::MaxIterations),
        });
    }
    Ok(out)
}

fn cold_point(pt: ConstraintPoint, cfg: &SolveConfig, opts: &LineOptions) -> Option<OptimizationResult> {
    match &opts.families {
        None => solve(pt, cfg).ok(),
        Some(fams) => best_of(fams.iter().filter_map(|&(f, m)| {
            let o = FamilyOptions {
                proper: true,
                ..FamilyOptions::default()
            };
            solve_in_family_with(f, m, pt, cfg, &o).ok()
        })),
    }
}

fn chain_families(cfg: &SolveConfig, opts: &LineOptions, pt: ConstraintPoint) -> Vec<(Family, usize)> {
    match &opts.families {
        Some(f) => f.clone(),
        None => {
            let mut f = warm_families(cfg.max_podes, pt.above_er());
            f.extend((2..=cfg.max_podes).map(|n| (Family::A, n)));
            f
        }
    }
}

/// Continuation along the line; `downward` walks from high to low `τ`.
fn warm_chain(
    points: &[ConstraintPoint],
    feasible: &[bool],
    cfg: &SolveConfig,
    opts: &LineOptions,
    downward: bool,
) -> Vec<Option<OptimizationResult>> {
    let n = points.len();
    let order: Vec<usize> = if downward {
        (0..n).rev().collect()
    } else {
        (0..n).collect()
    };
    let mut out = vec![None; n];
    let mut prev: Option<MultipodalGraphon> = None;
    let mut specs: Vec<((Family, usize), Option<FamilySpec>)> = Vec::new();
    for k in order {
        if !feasible[k] {
            continue;
        }
        let pt = points[k];
        let fams = chain_families(cfg, opts, pt);
        if specs.iter().map(|s| s.0).ne(fams.iter().copied()) {
            specs = fams.iter().map(|&f| (f, None)).collect();
        }
        let fam_results: Vec<Option<OptimizationResult>> = specs
            .par_iter()
            .map(|((f, m), spec)| {
                // proper branches only, so a chain does not get stuck on a degenerate member
                let o = FamilyOptions {
                    proper: true,
                    warm_start: spec.clone(),
                    starts: if spec.is_some() { Some(0) } else { None },
                };
                solve_in_family_with(*f, *m, pt, cfg, &o).ok()
            })
            .collect();
        for (s, r) in specs.iter_mut().zip(&fam_results) {
            s.1 = r.as_ref().and_then(|r| r.family_params.clone());
        }
        let mut candidates: Vec<OptimizationResult> = fam_results
            .into_iter()
            .flatten()
            .filter(|r| {
                // restricted scans keep only structures of the requested families
                opts.families
                    .as_ref()
                    .is_none_or(|fs| fs.iter().any(|&(f, m)| family_matches(&r.label, f, m)))
            })
            .collect();
        if opts.families.is_none() {
            if let Some(g) = &prev {
                candidates.push(refine(g, pt, cfg));
            }
        }
        let best = best_of(candidates).map(|mut r| {
            r.family_params = None;
            r
        });
        if let Some(r) = &best {
            prev = Some(r.graphon.clone());
        }
        out[k] = best;
    }
    out
}

fn family_matches(label: &PhaseLabel, family: Family, m: usize) -> bool {
    match family {
        Family::A => label.matches(Family::A, (m, 0)),
        Family::B => label.matches(Family::B, (m, 1)),
        Family::C => label.matches(Family::C, (m, 2)),
        Family::F => label.matches(Family::F, (1, 1)) || label.matches(Family::B, (1, 1)),
        Family::Unknown => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    SlopeJump,
    LabelChange,
    Both,
}

impl std::fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TransitionKind::SlopeJump => "SlopeJump",
            TransitionKind::LabelChange => "LabelChange",
            TransitionKind::Both => "Both",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionEvent {
    /// Scan-coordinate interval containing the transition.
    pub location: (f64, f64),
    pub kind: TransitionKind,
    pub slope_before: f64,
    pub slope_after: f64,
    pub labels: (PhaseLabel, PhaseLabel),
}

impl TransitionEvent {
    pub fn center(&self) -> f64 {
        0.5 * (self.location.0 + self.location.1)
    }

    pub fn slope_jump(&self) -> f64 {
        (self.slope_after - self.slope_before).abs()
    }
}

/// Jumps in the slope `∂s/∂τ` and label changes along a line scan.
///
/// One-sided slopes at each record are the `β` multipliers when available
/// and finite differences otherwise. Interval `k` carries a slope jump when
/// the one-sided slopes at its ends differ by more than `slope_jump_tol` and
/// its trapezoid defect `β_k + β_{k+1} − 2 (s_{k+1} − s_k)/h` exceeds the
/// tolerance and three times the defects two intervals away on either side
/// (smooth but steep stretches have slowly varying defects).
pub fn detect_transitions(records: &[ScanRecord], slope_jump_tol: f64) -> Result<Vec<TransitionEvent>> {
    let mut recs: Vec<&ScanRecord> = records.iter().filter(|r| r.is_solved()).collect();
    if recs.len() < 4 {
        return Err(Error::TooFewPoints {
            found: recs.len(),
            needed: 4,
        });
    }
    recs.sort_by(|a, b| a.point.tau.total_cmp(&b.point.tau));
    let x: Vec<f64> = recs.iter().map(|r| r.point.tau).collect();
    let s: Vec<f64> = recs.iter().map(|r| r.entropy).collect();
    let m = recs.len() - 1;
    let d: Vec<f64> = (0..m).map(|k| (s[k + 1] - s[k]) / (x[k + 1] - x[k])).collect();
    // slope at the left and right end of interval k
    let left = |k: usize| {
        if recs[k].beta.is_finite() {
            recs[k].beta
        } else {
            d[k.saturating_sub(1)]
        }
    };
    let right = |k: usize| {
        if recs[k + 1].beta.is_finite() {
            recs[k + 1].beta
        } else {
            d[(k + 1).min(m - 1)]
        }
    };
    let defect: Vec<f64> = (0..m).map(|k| (left(k) + right(k) - 2.0 * d[k]).abs()).collect();

    // (interval index, kind, slope before, slope after)
    let mut raw: Vec<(usize, TransitionKind, f64, f64)> = Vec::new();
    for k in 0..m {
        let (before, after) = (left(k), right(k));
        if (after - before).abs() <= slope_jump_tol || defect[k] <= slope_jump_tol {
            continue;
        }
        let near = [k.checked_sub(2), Some(k + 2).filter(|&j| j < m)]
            .into_iter()
            .flatten()
            .map(|j| defect[j])
            .fold(0.0, f64::max);
        if defect[k] > 3.0 * near {
            raw.push((k, TransitionKind::SlopeJump, before, after));
        }
    }
    for k in 0..m {
        if recs[k].label.name() != recs[k + 1].label.name() {
            raw.push((k, TransitionKind::LabelChange, left(k), right(k)));
        }
    }
    raw.sort_by_key(|e| (e.0, e.1 != TransitionKind::LabelChange));

    // events in adjacent intervals (spanning at most two) describe one transition
    let mut clusters: Vec<Vec<(usize, TransitionKind, f64, f64)>> = Vec::new();
    for e in raw {
        match clusters.last_mut() {
            Some(c) if e.0 <= c[c.len() - 1].0 + 1 && e.0 - c[0].0 < 2 => c.push(e),
            _ => clusters.push(vec![e]),
        }
    }
    let events = clusters
        .into_iter()
        .map(|c| {
            let lo = c[0].0;
            let hi = c[c.len() - 1].0;
            let has = |k: TransitionKind| c.iter().any(|e| e.1 == k);
            let kind = match (has(TransitionKind::SlopeJump), has(TransitionKind::LabelChange)) {
                (true, true) => TransitionKind::Both,
                (true, false) => TransitionKind::SlopeJump,
                _ => TransitionKind::LabelChange,
            };
            let main = c
                .iter()
                .filter(|e| kind == TransitionKind::LabelChange || e.1 == TransitionKind::SlopeJump)
                .max_by(|a, b| (a.3 - a.2).abs().total_cmp(&(b.3 - b.2).abs()))
                .expect("nonempty");
            TransitionEvent {
                location: (x[lo], x[hi + 1]),
                kind,
                slope_before: main.2,
                slope_after: main.3,
                labels: (recs[lo].label.clone(), recs[hi + 1].label.clone()),
            }
        })
        .collect();
    Ok(events)
}

/// CSV with header `coord_low,coord_high,kind,slope_before,slope_after,label_before,label_after`.
pub fn transitions_to_csv(events: &[TransitionEvent], meta: Option<&str>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "coord_low",
        "coord_high",
        "kind",
        "slope_before",
        "slope_after",
        "label_before",
        "label_after",
    ])?;
    for e in events {
        w.write_record([
            fmt_num(e.location.0),
            fmt_num(e.location.1),
            e.kind.to_string(),
            fmt_num(e.slope_before),
            fmt_num(e.slope_after),
            e.labels.0.name(),
            e.labels.1.name(),
        ])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).expect("utf8");
    Ok(match meta {
        Some(m) => format!("{m}\n{body}"),
        None => body,
    })
}

/// Solves every feasible point of an `ε × τ` grid (row-major in `ε`).
///
/// With `lower` the interpolated boundary decides feasibility, otherwise
/// the exact per-`ε` minimum.
pub fn scan_grid(
    eps_range: (f64, f64),
    tau_range: (f64, f64),
    resolution: (usize, usize),
    cfg: &SolveConfig,
    lower: Option<&LowerBoundary>,
) -> Result<Vec<ScanRecord>> {
    cfg.validate()?;
    for r in [resolution.0, resolution.1] {
        if r == 0 || r > MAX_GRID {
            return Err(Error::ParamRange {
                name: "resolution",
                value: r as f64,
            });
        }
    }
    let es = grid(eps_range, resolution.0);
    let ts = grid(tau_range, resolution.1);
    let points: Vec<ConstraintPoint> = es
        .iter()
        .flat_map(|&e| ts.iter().map(move |&t| ConstraintPoint { eps: e, tau: t }))
        .collect();
    Ok(points
        .par_iter()
        .map(|&pt| {
            let ok = match lower {
                Some(b) => feasible(pt, b) != Feasibility::Infeasible,
                None => optimize::region(pt) != optimize::Region::Infeasible,
            };
            if !ok {
                return ScanRecord::failed(pt, Status::Infeasible);
            }
            match solve(pt, cfg) {
                Ok(r) => ScanRecord::from_result(&r),
                Err(Error::Infeasible { .. }) => ScanRecord::failed(pt, Status::Infeasible),
                Err(_) => ScanRecord::failed(pt, Status::MaxIterations),
            }
        })
        .collect())
}

/// Best entropy of one family along a line of `τ` values.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyCurve {
    pub family: Family,
    pub m: usize,
    pub eps: f64,
    pub taus: Vec<f64>,
    /// `NaN` where no proper member of the family meets the constraints.
    pub entropy: Vec<f64>,
    /// `∂s/∂τ` of the family branch.
    pub beta: Vec<f64>,
}

impl FamilyCurve {
    pub fn name(&self) -> String {
        let k = match self.family {
            Family::A => 0,
            Family::C => 2,
            _ => 1,
        };
        format!("{}({},{k})", self.family, self.m)
    }
}

/// Family-restricted entropy along `τ` at fixed `ε`: cold multi-start at
/// every point plus continuation in both directions; results that degenerate
/// into another structure are discarded.
pub fn family_curve(family: Family, m: usize, eps: f64, taus: &[f64], cfg: &SolveConfig) -> FamilyCurve {
    let n = taus.len();
    let proper = |spec: Option<FamilySpec>, starts: Option<usize>| FamilyOptions {
        proper: true,
        warm_start: spec,
        starts,
    };
    let pts: Vec<ConstraintPoint> = taus.iter().map(|&t| ConstraintPoint { eps, tau: t }).collect();
    let cold: Vec<Option<OptimizationResult>> = pts
        .par_iter()
        .map(|&pt| solve_in_family_with(family, m, pt, cfg, &proper(None, None)).ok())
        .collect();
    let chain = |order: Vec<usize>| {
        let mut out: Vec<Option<OptimizationResult>> = vec![None; n];
        let mut spec: Option<FamilySpec> = None;
        for k in order {
            let warm = spec
                .clone()
                .or_else(|| cold[k].as_ref().and_then(|r| r.family_params.clone()));
            let r = warm.and_then(|w| solve_in_family_with(family, m, pts[k], cfg, &proper(Some(w), Some(0))).ok());
            spec = r.as_ref().and_then(|r| r.family_params.clone());
            out[k] = r;
        }
        out
    };
    let (down, up) = rayon::join(|| chain((0..n).rev().collect()), || chain((0..n).collect()));
    let mut entropy = vec![f64::NAN; n];
    let mut beta = vec![f64::NAN; n];
    for k in 0..n {
        if let Some(r) = best_of([cold[k].clone(), down[k].clone(), up[k].clone()].into_iter().flatten()) {
            entropy[k] = r.entropy;
            beta[k] = r.beta;
        }
    }
    FamilyCurve {
        family,
        m,
        eps,
        taus: taus.to_vec(),
        entropy,
        beta,
    }
}

/// Point where the larger of two family entropies switches branch.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub tau: f64,
    pub interval: (f64, f64),
    /// Family winning on the high-`τ` side.
    pub upper: String,
    pub lower: String,
    pub slope_upper: f64,
    pub slope_lower: f64,
}

impl Crossing {
    pub fn slope_jump(&self) -> f64 {
        (self.slope_upper - self.slope_lower).abs()
    }
}

/// Crossings of two curves sampled on the same `τ` values.
pub fn family_crossings(a: &FamilyCurve, b: &FamilyCurve) -> Vec<Crossing> {
    let mut idx: Vec<usize> = (0..a.taus.len()).collect();
    idx.sort_by(|&i, &j| a.taus[i].total_cmp(&a.taus[j]));
    let winner = |k: usize| -> Option<bool> {
        match (a.entropy[k].is_finite(), b.entropy[k].is_finite()) {
            (false, false) => None,
            (true, false) => Some(true),
            (false, true) => Some(false),
            (true, true) => Some(a.entropy[k] >= b.entropy[k]),
        }
    };
    let mut out = Vec::new();
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (Some(wi), Some(wj)) = (winner(i), winner(j)) else {
            continue;
        };
        if wi == wj {
            continue;
        }
        let (ti, tj) = (a.taus[i], a.taus[j]);
        let all = [a.entropy[i], a.entropy[j], b.entropy[i], b.entropy[j]];
        let tau = if all.iter().all(|v| v.is_finite()) {
            let di = a.entropy[i] - b.entropy[i];
            let dj = a.entropy[j] - b.entropy[j];
            ti + (tj - ti) * di / (di - dj)
        } else {
            0.5 * (ti + tj)
        };
        let pick = |win_a: bool, k: usize| if win_a { a.beta[k] } else { b.beta[k] };
        out.push(Crossing {
            tau,
            interval: (ti, tj),
            upper: if wj { a.name() } else { b.name() },
            lower: if wi { a.name() } else { b.name() },
            slope_upper: pick(wj, j),
            slope_lower: pick(wi, i),
        });
    }
    out
}

/// One point of [`pitchfork_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSample {
    pub tau: f64,
    pub entropy: f64,
    pub beta: f64,
    /// Largest deviation of the `B(n−1,1)` optimizer from `A(n,0)` symmetry.
    pub order_parameter: f64,
    /// The `A(n,0)` graphon is locally stable here.
    pub a_stable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    pub n: usize,
    pub eps: f64,
    /// Root of `det H(S)` inside the window.
    pub boundary_tau: f64,
    pub samples: Vec<ProbeSample>,
    /// Order parameter at the unstable-side sample closest to the boundary.
    pub order_near_boundary: f64,
    /// `|∂s/∂τ|` difference between the closest samples on either side.
    pub max_slope_jump: f64,
    pub continuous: bool,
}

/// Tolerance scale of the order parameter; the continuity threshold is ten times this.
pub const ORDER_TOL: f64 = 2e-3;

fn order_parameter(spec: &FamilySpec, n: usize) -> f64 {
    match *spec {
        FamilySpec::B { m, a, b, d, p, c } => {
            let mut dev = (a - p).abs().max((c - m as f64 / n as f64).abs());
            if m >= 2 {
                dev = dev.max((b - d).abs());
            }
            dev
        }
        _ => f64::NAN,
    }
}

/// Levels of geometric refinement toward the boundary on each side.
const REFINE_LEVELS: i32 = 14;

fn a_as_b(n: usize, pt: ConstraintPoint) -> Option<FamilySpec> {
    match crate::families::solve_a(n, pt).ok()? {
        FamilySpec::A { a, b, .. } => Some(FamilySpec::B {
            m: n - 1,
            a,
            b: if n > 2 { b } else { 0.0 },
            d: b,
            p: a,
            c: (n - 1) as f64 / n as f64,
        }),
        _ => None,
    }
}

/// Tracks the `B(n−1,1)` optimum across the `A(n,0)` stability boundary at
/// fixed `ε` and checks that it merges continuously into `A(n,0)`.
///
/// Samples are the uniform grid plus a geometric refinement toward the root.
/// The unstable side is followed by continuation from the far edge inward;
/// the stable side starts from the `A(n,0)` point itself.
pub fn pitchfork_probe(
    n: usize,
    eps: f64,
    tau_window: (f64, f64),
    steps: usize,
    cfg: &SolveConfig,
) -> Result<ContinuityReport> {
    if n < 2 || steps < 4 {
        return Err(Error::ParamRange {
            name: if n < 2 { "n" } else { "steps" },
            value: if n < 2 { n as f64 } else { steps as f64 },
        });
    }
    let (lo, hi) = (tau_window.0.min(tau_window.1), tau_window.0.max(tau_window.1));
    let mid = 0.5 * (lo + hi);
    let boundary_tau = stability_column(n, eps, 4000)
        .into_iter()
        .map(|p| p.tau)
        .filter(|&t| t > lo && t < hi)
        .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()))
        .ok_or(Error::BoundaryNotInWindow)?;
    let mut taus = grid((lo, hi), steps);
    for k in 1..=REFINE_LEVELS {
        let f = 0.5f64.powi(k);
        taus.push(boundary_tau - (boundary_tau - lo) * f);
        taus.push(boundary_tau + (hi - boundary_tau) * f);
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let at = |t: f64| ConstraintPoint { eps, tau: t };
    let stable: Vec<bool> = taus.iter().map(|&t| crate::families::a_stable_at(n, at(t))).collect();
    let m = n - 1;
    let solve = |t: f64, warm: Option<FamilySpec>| -> Option<(OptimizationResult, FamilySpec)> {
        let warm_opts = FamilyOptions {
            proper: false,
            warm_start: warm.clone(),
            starts: Some(0),
        };
        let cold_opts = FamilyOptions {
            proper: true,
            ..FamilyOptions::default()
        };
        let r = match warm {
            Some(_) => solve_in_family_with(Family::B, m, at(t), cfg, &warm_opts)
                .or_else(|_| solve_in_family_with(Family::B, m, at(t), cfg, &cold_opts)),
            None => solve_in_family_with(Family::B, m, at(t), cfg, &cold_opts),
        }
        .ok()?;
        let s = r.family_params.clone()?;
        Some((r, s))
    };
    let below: Vec<usize> = (0..taus.len()).filter(|&k| taus[k] < boundary_tau).collect();
    let above: Vec<usize> = (0..taus.len()).filter(|&k| taus[k] > boundary_tau).collect();
    let unstable_below = below.iter().filter(|&&k| !stable[k]).count() * 2 > below.len();
    let (unstable_idx, stable_idx) = if unstable_below { (below, above) } else { (above, below) };
    let mut samples: Vec<Option<ProbeSample>> = vec![None; taus.len()];
    let mut record = |k: usize, r: &OptimizationResult, s: &FamilySpec| {
        samples[k] = Some(ProbeSample {
            tau: taus[k],
            entropy: r.entropy,
            beta: r.beta,
            order_parameter: order_parameter(s, n),
            a_stable: stable[k],
        });
    };
    // unstable side: from the far edge toward the boundary
    let far_first: Vec<usize> = if unstable_below {
        unstable_idx.clone()
    } else {
        unstable_idx.iter().rev().copied().collect()
    };
    let mut warm: Option<FamilySpec> = None;
    for k in far_first {
        match solve(taus[k], warm.clone()) {
            Some((r, s)) => {
                record(k, &r, &s);
                warm = Some(s);
            }
            None => warm = None,
        }
    }
    // stable side: from the boundary outward, seeded by the symmetric point
    let near_first: Vec<usize> = if unstable_below {
        stable_idx.clone()
    } else {
        stable_idx.iter().rev().copied().collect()
    };
    let mut warm: Option<FamilySpec> = None;
    for k in near_first {
        let seed = warm.clone().or_else(|| a_as_b(n, at(taus[k])));
        if let Some((r, s)) = solve(taus[k], seed) {
            record(k, &r, &s);
            warm = Some(s);
        } else {
            warm = None;
        }
    }
    let samples: Vec<ProbeSample> = samples.into_iter().flatten().collect();
    let nearest = |want_stable: bool| {
        samples
            .iter()
            .filter(|s| s.a_stable == want_stable)
            .min_by(|x, y| (x.tau - boundary_tau).abs().total_cmp(&(y.tau - boundary_tau).abs()))
    };
    let order_near_boundary = nearest(false).map_or(f64::NAN, |s| s.order_parameter);
    let max_slope_jump = match (nearest(false), nearest(true)) {
        (Some(u), Some(s)) if u.beta.is_finite() && s.beta.is_finite() => (u.beta - s.beta).abs(),
        _ => f64::INFINITY,
    };
    let continuous = order_near_boundary < 10.0 * ORDER_TOL && max_slope_jump <= DEFAULT_SLOPE_JUMP_TOL;
    Ok(ContinuityReport {
        n,
        eps,
        boundary_tau,
        samples,
        order_near_boundary,
        max_slope_jump,
        continuous,
    })
}

fn label_color(name: &str) -> String {
    const PALETTE: [&str; 10] = [
        "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
    ];
    let h = name
        .bytes()
        .fold(0u32, |h, b| h.wrapping_mul(31).wrapping_add(b as u32));
    PALETTE[h as usize % PALETTE.len()].to_string()
}

/// Static SVG of grid records colored by label, with stability curves overlaid.
pub fn grid_svg(
    records: &[ScanRecord],
    curves: &[&StabilityCurve],
    eps_range: (f64, f64),
    tau_range: (f64, f64),
) -> String {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let sx = |e: f64| pad + (e - eps_range.0) / (eps_range.1 - eps_range.0) * (w - 2.0 * pad);
    let sy = |t: f64| h - pad - (t - tau_range.0) / (tau_range.1 - tau_range.0) * (h - 2.0 * pad);
    let mut es: Vec<f64> = records.iter().map(|r| r.point.eps).collect();
    let mut ts: Vec<f64> = records.iter().map(|r| r.point.tau).collect();
    for v in [&mut es, &mut ts] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let cell = |v: &[f64], full: f64| {
        if v.len() > 1 {
            full / (v.len() - 1) as f64
        } else {
            full
        }
    };
    let cw = cell(&es, w - 2.0 * pad);
    let ch = cell(&ts, h - 2.0 * pad);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let mut legend: Vec<String> = Vec::new();
    for r in records.iter().filter(|r| r.is_solved()) {
        let name = r.label.name();
        if !legend.contains(&name) {
            legend.push(name.clone());
        }
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"><title>{name}</title></rect>",
            sx(r.point.eps) - cw / 2.0,
            sy(r.point.tau) - ch / 2.0,
            cw,
            ch,
            label_color(&name)
        );
    }
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"black\"/>",
                sx(p.eps),
                sy(p.tau)
            );
        }
    }
    legend.sort();
    for (i, name) in legend.iter().enumerate() {
        let y = 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
            w - 90.0,
            y - 9.0,
            label_color(name)
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"{y}\" font-size=\"11\">{name}</text>", w - 75.0);
    }
    let _ = writeln!(
        s,
        "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    s.push_str("</svg>\n");
    s
}
