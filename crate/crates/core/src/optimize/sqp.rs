//! Feasible-path SQP for smooth objectives under equality and box constraints.
//!
//! Each iteration starts from a point that satisfies the equality
//! constraints. The step is a Newton step on the reduced (null-space)
//! Hessian of the Lagrangian, made negative definite by flipping and flooring
//! its eigenvalues, followed by a Levenberg–Marquardt restoration back onto
//! the constraint set and an Armijo test on the objective. Bounds are handled
//! with an active set.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::param::Parametrization;
use crate::densities::coord_derivatives_with;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Objective {
    Entropy,
    TauMin,
    TauMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Converged,
    MaxIterations,
    Infeasible,
}

pub(crate) struct Problem<'a> {
    pub param: &'a Parametrization,
    pub objective: Objective,
    pub eps: f64,
    /// Triangle target; `None` leaves `τ` free.
    pub tau: Option<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct Settings {
    pub tol: f64,
    pub max_iter: usize,
    pub restore_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 300,
            restore_tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct SqpResult {
    pub x: DVector<f64>,
    /// One per constraint row: `[Σc,] ε, [τ]`.
    pub multipliers: Vec<f64>,
    /// Largest Lagrangian-gradient component over free coordinates.
    pub kkt: f64,
    pub iterations: usize,
    pub outcome: Outcome,
    /// Objective at each accepted iterate.
    #[cfg_attr(not(test), allow(dead_code))]
    pub history: Vec<f64>,
}

struct Eval {
    g: DVector<f64>,
    h: Option<DMatrix<f64>>,
    /// Constraint residuals.
    c: DVector<f64>,
    /// Constraint Jacobian (rows × dim).
    jac: DMatrix<f64>,
    /// Constraint Hessians (nonlinear rows only, aligned with `c`).
    chess: Vec<Option<DMatrix<f64>>>,
}

const BOUND_SNAP: f64 = 1e-12;
const MAX_STEP: f64 = 0.25;

impl Problem<'_> {
    fn rows(&self) -> usize {
        self.param.size_sum as usize + 1 + self.tau.is_some() as usize
    }

    /// Index of the `ε` row among the constraint rows.
    pub fn eps_row(&self) -> usize {
        self.param.size_sum as usize
    }

    pub fn tau_row(&self) -> Option<usize> {
        self.tau.map(|_| self.eps_row() + 1)
    }

    fn eval(&self, x: &DVector<f64>, hessian: bool) -> Eval {
        let (c, p) = self.param.parts(x);
        let d = coord_derivatives_with(&c, &p, hessian, true);
        let m = self.param.map();
        let pull_g = |g: &DVector<f64>| m.transpose() * g;
        let pull_h = |h: &Option<DMatrix<f64>>| h.as_ref().map(|h| m.transpose() * h * m);
        let (g, h) = match self.objective {
            Objective::Entropy => (pull_g(&d.entropy.grad), pull_h(&d.entropy.hess)),
            Objective::TauMax => (pull_g(&d.tau.grad), pull_h(&d.tau.hess)),
            Objective::TauMin => (-pull_g(&d.tau.grad), pull_h(&d.tau.hess).map(|h| -h)),
        };
        let k = self.param.dim();
        let rows = self.rows();
        let mut cv = DVector::zeros(rows);
        let mut jac = DMatrix::zeros(rows, k);
        let mut chess = Vec::with_capacity(rows);
        let mut r = 0;
        if self.param.size_sum {
            let n = self.param.n;
            cv[0] = c.iter().sum::<f64>() - 1.0;
            for i in 0..n {
                jac[(0, i)] = 1.0;
            }
            chess.push(None);
            r = 1;
        }
        cv[r] = d.eps.value - self.eps;
        jac.set_row(r, &pull_g(&d.eps.grad).transpose());
        chess.push(pull_h(&d.eps.hess));
        if let Some(t) = self.tau {
            cv[r + 1] = d.tau.value - t;
            jac.set_row(r + 1, &pull_g(&d.tau.grad).transpose());
            chess.push(pull_h(&d.tau.hess));
        }
        Eval {
            g,
            h,
            c: cv,
            jac,
            chess,
        }
    }

    fn objective_value(&self, x: &DVector<f64>) -> f64 {
        let (c, p) = self.param.parts(x);
        match self.objective {
            Objective::Entropy => crate::densities::entropy_raw(&c, &p),
            Objective::TauMax => crate::densities::triangle_raw(&c, &p),
            Objective::TauMin => -crate::densities::triangle_raw(&c, &p),
        }
    }

    fn clip(&self, x: &mut DVector<f64>) {
        for i in 0..x.len() {
            x[i] = x[i].clamp(self.param.lower[i], self.param.upper[i]);
        }
    }

    fn at_lower(&self, x: &DVector<f64>, i: usize) -> bool {
        x[i] <= self.param.lower[i] + BOUND_SNAP
    }

    fn at_upper(&self, x: &DVector<f64>, i: usize) -> bool {
        x[i] >= self.param.upper[i] - BOUND_SNAP
    }

    /// Levenberg–Marquardt projection onto the constraint set, moving only
    /// coordinates with `movable[i]`. Returns the final residual norm.
    pub fn restore(&self, x: &mut DVector<f64>, movable: &[bool], tol: f64) -> f64 {
        let k = x.len();
        let mut ev = self.eval(x, false);
        let mut norm = ev.c.amax();
        let mut mu_scale = 1e-12;
        for _ in 0..200 {
            if norm <= tol {
                return norm;
            }
            // columns that may move in the direction the step wants
            let mut cols: Vec<usize> = (0..k).filter(|&i| movable[i]).collect();
            let mut improved = false;
            for _attempt in 0..12 {
                let mut blocked = false;
                let j = ev.jac.select_columns(cols.iter());
                let jjt = &j * j.transpose();
                let scale = (0..jjt.nrows()).map(|i| jjt[(i, i)]).fold(0.0, f64::max).max(1e-300);
                let a = &jjt + DMatrix::identity(jjt.nrows(), jjt.nrows()) * (mu_scale * scale);
                let Some(chol) = a.cholesky() else {
                    mu_scale *= 10.0;
                    continue;
                };
                let y = chol.solve(&ev.c);
                let step = -(j.transpose() * y);
                // drop columns pushed through a bound they already sit on
                let mut keep = Vec::with_capacity(cols.len());
                for (s, &i) in cols.iter().enumerate() {
                    let out = (step[s] < 0.0 && self.at_lower(x, i)) || (step[s] > 0.0 && self.at_upper(x, i));
                    if out {
                        blocked = true;
                    } else {
                        keep.push(i);
                    }
                }
                if blocked && !keep.is_empty() {
                    cols = keep;
                    continue;
                }
                let mut trial = x.clone();
                for (s, &i) in cols.iter().enumerate() {
                    trial[i] += step[s];
                }
                self.clip(&mut trial);
                let ev_t = self.eval(&trial, false);
                let n_t = ev_t.c.amax();
                if n_t < norm {
                    *x = trial;
                    ev = ev_t;
                    norm = n_t;
                    mu_scale = (mu_scale * 0.1).max(1e-16);
                    improved = true;
                    break;
                }
                mu_scale *= 10.0;
                if mu_scale > 1e8 {
                    break;
                }
            }
            if !improved {
                return norm;
            }
        }
        norm
    }

    pub fn solve(&self, x0: &DVector<f64>, settings: &Settings) -> SqpResult {
        let k = x0.len();
        let mut x = x0.clone();
        self.clip(&mut x);
        let all = vec![true; k];
        let violation = self.restore(&mut x, &all, settings.restore_tol);
        if violation > settings.restore_tol {
            return SqpResult {
                x,
                multipliers: vec![f64::NAN; self.rows()],
                kkt: f64::INFINITY,
                iterations: 0,
                outcome: Outcome::Infeasible,
                history: vec![],
            };
        }
        let mut fixed = vec![false; k];
        for i in 0..k {
            if self.at_lower(&x, i) {
                x[i] = self.param.lower[i];
                fixed[i] = true;
            } else if self.at_upper(&x, i) {
                x[i] = self.param.upper[i];
                fixed[i] = true;
            }
        }
        let mut releases = vec![0usize; k];
        let mut escapes = 0;
        let mut history = vec![self.objective_value(&x)];
        let mut last = None;
        let mut outcome = Outcome::MaxIterations;
        let mut iterations = 0;
        for it in 0..settings.max_iter {
            iterations = it + 1;
            let ev = self.eval(&x, true);
            let free: Vec<usize> = (0..k)
                .filter(|&i| !fixed[i])
                .filter(|&i| {
                    // coordinates that touch nothing (e.g. values of empty podes)
                    let h = ev.h.as_ref().map_or(0.0, |h| h[(i, i)]);
                    ev.g[i] != 0.0 || h != 0.0 || ev.jac.column(i).iter().any(|&v| v != 0.0)
                })
                .collect();
            let step = reduced_step(&ev, &free);
            let lagr = |i: usize| ev.g[i] - (ev.jac.column(i).transpose() * &step.lambda)[0];
            last = Some((step.lambda.clone(), step.kkt));

            // release a bound whose multiplier has the wrong sign
            let mut released = false;
            if step.kkt < settings.tol.sqrt() {
                let mut best: Option<(usize, f64)> = None;
                for i in 0..k {
                    if !fixed[i] || releases[i] >= 3 {
                        continue;
                    }
                    let l = lagr(i);
                    let wants =
                        (self.at_lower(&x, i) && l > settings.tol) || (self.at_upper(&x, i) && l < -settings.tol);
                    if wants && best.is_none_or(|(_, b)| l.abs() > b) {
                        best = Some((i, l.abs()));
                    }
                }
                if let Some((i, _)) = best {
                    fixed[i] = false;
                    releases[i] += 1;
                    released = true;
                }
            }
            if released {
                continue;
            }
            if step.kkt <= settings.tol {
                if escapes < 4 && step.max_curvature > 1e-7 * step.curv_scale.max(1.0) {
                    escapes += 1;
                    let movable: Vec<bool> = (0..k).map(|i| !fixed[i]).collect();
                    if let Some(y) =
                        self.escape(&x, &free, &step.escape, &movable, history[history.len() - 1], settings)
                    {
                        x = y;
                        self.snap(&mut x, &mut fixed);
                        history.push(self.objective_value(&x));
                        continue;
                    }
                }
                outcome = Outcome::Converged;
                break;
            }
            let movable: Vec<bool> = (0..k).map(|i| !fixed[i]).collect();
            let mut dir = DVector::zeros(k);
            for (s, &i) in free.iter().enumerate() {
                dir[i] = step.direction[s];
            }
            let f0 = history[history.len() - 1];
            let slope = ev.g.dot(&dir);
            match self.line_search(&x, &dir, slope, &movable, f0, settings) {
                Some(y) => {
                    x = y;
                    self.snap(&mut x, &mut fixed);
                    history.push(self.objective_value(&x));
                }
                None => {
                    // try plain projected gradient before giving up
                    let mut gdir = DVector::zeros(k);
                    for (s, &i) in free.iter().enumerate() {
                        gdir[i] = step.projected_gradient[s];
                    }
                    let gs = ev.g.dot(&gdir);
                    if let Some(y) = self.line_search(&x, &gdir, gs, &movable, f0, settings) {
                        x = y;
                        self.snap(&mut x, &mut fixed);
                        history.push(self.objective_value(&x));
                    } else {
                        outcome = if step.kkt <= 100.0 * settings.tol {
                            Outcome::Converged
                        } else {
                            Outcome::MaxIterations
                        };
                        break;
                    }
                }
            }
        }
        let ev = self.eval(&x, false);
        let free: Vec<usize> = (0..k).filter(|&i| !fixed[i]).collect();
        let (multipliers, kkt) = match last {
            Some(_) => {
                let st = multipliers_only(&ev, &free);
                (st.0.iter().copied().collect(), st.1)
            }
            None => (vec![f64::NAN; self.rows()], f64::INFINITY),
        };
        SqpResult {
            x,
            multipliers,
            kkt,
            iterations,
            outcome,
            history,
        }
    }

    fn snap(&self, x: &mut DVector<f64>, fixed: &mut [bool]) {
        for i in 0..x.len() {
            if fixed[i] {
                continue;
            }
            if self.at_lower(x, i) {
                x[i] = self.param.lower[i];
                fixed[i] = true;
            } else if self.at_upper(x, i) {
                x[i] = self.param.upper[i];
                fixed[i] = true;
            }
        }
    }

    fn line_search(
        &self,
        x: &DVector<f64>,
        dir: &DVector<f64>,
        slope: f64,
        movable: &[bool],
        f0: f64,
        settings: &Settings,
    ) -> Option<DVector<f64>> {
        if slope <= 0.0 {
            return None;
        }
        let big = dir.amax();
        let mut t = if big > MAX_STEP { MAX_STEP / big } else { 1.0 };
        for _ in 0..40 {
            let mut y = x + dir * t;
            self.clip(&mut y);
            // coordinates that hit a bound during the step stay there
            let mov: Vec<bool> = (0..y.len())
                .map(|i| movable[i] && !(self.at_lower(&y, i) || self.at_upper(&y, i)))
                .collect();
            let v = self.restore(&mut y, &mov, settings.restore_tol);
            let v = if v > settings.restore_tol {
                self.restore(&mut y, movable, settings.restore_tol)
            } else {
                v
            };
            if v <= settings.restore_tol {
                let f = self.objective_value(&y);
                if f >= f0 + 1e-4 * t * slope && f > f0 - 1e-15 {
                    return Some(y);
                }
            }
            t *= 0.5;
            if t * big < 1e-14 {
                break;
            }
        }
        None
    }

    fn escape(
        &self,
        x: &DVector<f64>,
        free: &[usize],
        v: &DVector<f64>,
        movable: &[bool],
        f0: f64,
        settings: &Settings,
    ) -> Option<DVector<f64>> {
        let k = x.len();
        let mut dir = DVector::zeros(k);
        for (s, &i) in free.iter().enumerate() {
            dir[i] = v[s];
        }
        let scale = dir.amax();
        if scale == 0.0 {
            return None;
        }
        dir /= scale;
        for t in [0.1, 0.03, 0.01, 0.003, 0.001] {
            for sign in [1.0, -1.0] {
                let mut y = x + &dir * (t * sign);
                self.clip(&mut y);
                if self.restore(&mut y, movable, settings.restore_tol) <= settings.restore_tol {
                    let f = self.objective_value(&y);
                    if f > f0 + 1e-12 {
                        return Some(y);
                    }
                }
            }
        }
        None
    }
}

struct ReducedStep {
    lambda: DVector<f64>,
    kkt: f64,
    direction: DVector<f64>,
    projected_gradient: DVector<f64>,
    max_curvature: f64,
    curv_scale: f64,
    escape: DVector<f64>,
}

/// Orthonormal basis of the row space (rows taken in order; nearly
/// dependent rows skipped) and the indices of the rows kept.
fn row_basis(j: &DMatrix<f64>) -> (Vec<DVector<f64>>, Vec<usize>) {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for r in 0..j.nrows() {
        let row: DVector<f64> = j.row(r).transpose();
        let norm0 = row.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = row.clone();
        for _ in 0..2 {
            for u in &basis {
                let d = u.dot(&v);
                v -= u * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-9 * norm0 {
            basis.push(v / nv);
            kept.push(r);
        }
    }
    (basis, kept)
}

/// Multipliers by least squares on the independent rows, and the size of
/// the Lagrangian gradient on `free`.
fn multipliers_only(ev: &Eval, free: &[usize]) -> (DVector<f64>, f64) {
    let rows = ev.jac.nrows();
    let j = ev.jac.select_columns(free.iter());
    let g = DVector::from_iterator(free.len(), free.iter().map(|&i| ev.g[i]));
    let (_, kept) = row_basis(&j);
    let mut lambda = DVector::zeros(rows);
    if !kept.is_empty() {
        let ji = j.select_rows(kept.iter());
        let a = ji.transpose();
        let qr = a.clone().qr();
        let qtg = qr.q().transpose() * &g;
        if let Some(sol) = qr.r().solve_upper_triangular(&qtg) {
            for (s, &r) in kept.iter().enumerate() {
                lambda[r] = sol[s];
            }
        }
    }
    let resid = &g - j.transpose() * &lambda;
    (lambda, resid.amax())
}

fn reduced_step(ev: &Eval, free: &[usize]) -> ReducedStep {
    let nf = free.len();
    let (lambda, kkt) = multipliers_only(ev, free);
    let j = ev.jac.select_columns(free.iter());
    let (basis, _) = row_basis(&j);
    // complete to an orthonormal basis; the new vectors span the null space
    let mut null: Vec<DVector<f64>> = Vec::new();
    let target = nf.saturating_sub(basis.len());
    for e in 0..nf {
        if null.len() == target {
            break;
        }
        let mut v = DVector::zeros(nf);
        v[e] = 1.0;
        for _ in 0..2 {
            for u in basis.iter().chain(null.iter()) {
                let d = u.dot(&v);
                v -= u * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-6 {
            null.push(v / nv);
        }
    }
    let g = DVector::from_iterator(nf, free.iter().map(|&i| ev.g[i]));
    if null.is_empty() {
        return ReducedStep {
            lambda,
            kkt,
            direction: DVector::zeros(nf),
            projected_gradient: DVector::zeros(nf),
            max_curvature: 0.0,
            curv_scale: 0.0,
            escape: DVector::zeros(nf),
        };
    }
    let z = DMatrix::from_columns(&null);
    let mut w =
        ev.h.as_ref()
            .expect("hessian")
            .select_rows(free.iter())
            .select_columns(free.iter());
    for (r, h) in ev.chess.iter().enumerate() {
        if let Some(h) = h {
            if lambda[r] != 0.0 {
                w -= h.select_rows(free.iter()).select_columns(free.iter()) * lambda[r];
            }
        }
    }
    let hr = z.transpose() * &w * &z;
    let hr = (&hr + hr.transpose()) * 0.5;
    let gr = z.transpose() * &g;
    let eig = SymmetricEigen::new(hr);
    let scale = eig.eigenvalues.amax();
    let floor = (1e-8 * scale).max(1e-10);
    let mut dz = DVector::zeros(gr.len());
    let mut max_curv = f64::NEG_INFINITY;
    let mut esc = 0;
    for (s, &l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(s);
        dz += v * (v.dot(&gr) / l.abs().max(floor));
        if l > max_curv {
            max_curv = l;
            esc = s;
        }
    }
    ReducedStep {
        lambda,
        kkt,
        direction: &z * dz,
        projected_gradient: &z * &gr,
        max_curvature: max_curv,
        curv_scale: scale,
        escape: &z * eig.eigenvectors.column(esc),
    }
}
