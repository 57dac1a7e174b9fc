//! Multipodal graphon representation.
//!
//! A multipodal graphon is a step function on `[0,1]²`: the unit interval is
//! cut into `n` podes of sizes `c_i` and the graphon takes the constant value
//! `p_ij` on the block `pode_i × pode_j`. It is the same object as a
//! stochastic block model with `n` blocks.
//!
//! This module owns validation, the canonical representative used for
//! comparisons and golden files, and pode-equivalence detection (phase
//! labels).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cap on the number of podes.
pub const MAX_PODES: usize = 16;
/// Tolerance on `Σ c_i = 1`.
pub const SIZE_SUM_TOL: f64 = 1e-12;
/// Default tolerance for merging podes in [`canonicalize`].
pub const DEFAULT_MERGE_TOL: f64 = 1e-7;
/// Default tolerance for pode equivalence in [`classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-5;
/// Podes smaller than this carry no measure and are dropped.
pub const DEGENERATE_SIZE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct MultipodalGraphon {
    sizes: Vec<f64>,
    /// Row-major `n × n`.
    probs: Vec<f64>,
}

impl MultipodalGraphon {
    /// Builds a graphon from pode sizes and matrix rows, enforcing every invariant.
    pub fn new(sizes: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = sizes.len();
        if rows.len() != n {
            return Err(Error::Shape {
                expected: n,
                found: rows.len(),
            });
        }
        let mut probs = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    found: row.len(),
                });
            }
            probs.extend_from_slice(row);
        }
        Self::from_flat(sizes, probs)
    }

    /// Builds a graphon from sizes and a row-major `n × n` probability buffer.
    pub fn from_flat(sizes: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        validate_parts(&sizes, &probs, MAX_PODES)?;
        Ok(Self { sizes, probs })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_flat_unchecked(sizes: Vec<f64>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(sizes.len() * sizes.len(), probs.len());
        Self { sizes, probs }
    }

    /// The constant graphon with value `p`.
    pub fn constant(p: f64) -> Result<Self> {
        Self::from_flat(vec![1.0], vec![p])
    }

    /// Complete balanced `n`-partite graphon (zero inside podes, one across).
    pub fn complete_multipartite(n: usize) -> Result<Self> {
        let mut probs = vec![1.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 0.0;
        }
        Self::from_flat(vec![1.0 / n as f64; n], probs)
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    #[inline]
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.sizes.len() + j]
    }

    pub fn probs_flat(&self) -> &[f64] {
        &self.probs
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.n()).map(<[f64]>::to_vec).collect()
    }

    /// Relabels podes: pode `k` of the result is pode `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let sizes = perm.iter().map(|&i| self.sizes[i]).collect();
        let mut probs = vec![0.0; n * n];
        for (a, &i) in perm.iter().enumerate() {
            for (b, &j) in perm.iter().enumerate() {
                probs[a * n + b] = self.prob(i, j);
            }
        }
        Self { sizes, probs }
    }

    /// Splits pode `k` into two podes of sizes `ratio·c_k` and `(1−ratio)·c_k`
    /// with identical rows. Represents the same step function.
    pub fn split_pode(&self, k: usize, ratio: f64) -> Result<Self> {
        let n = self.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.insert(k + 1, k);
        let m = n + 1;
        let mut sizes: Vec<f64> = order.iter().map(|&i| self.sizes[i]).collect();
        sizes[k] = self.sizes[k] * ratio;
        sizes[k + 1] = self.sizes[k] * (1.0 - ratio);
        let mut probs = vec![0.0; m * m];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                probs[a * m + b] = self.prob(i, j);
            }
        }
        Self::from_flat(sizes, probs)
    }

    /// Re-checks every invariant against a custom pode cap.
    pub fn validate_with_max(&self, max_podes: usize) -> Result<()> {
        validate_parts(&self.sizes, &self.probs, max_podes)
    }
}

/// Checks the graphon invariants, reporting the first one violated.
pub fn validate(g: &MultipodalGraphon) -> Result<()> {
    g.validate_with_max(MAX_PODES)
}

/// Validation on raw parts: sizes, symmetry, range, pode count.
pub fn validate_parts(sizes: &[f64], probs: &[f64], max_podes: usize) -> Result<()> {
    let n = sizes.len();
    if probs.len() != n * n {
        return Err(Error::Shape {
            expected: n,
            found: (probs.len() as f64).sqrt() as usize,
        });
    }
    for (i, &c) in sizes.iter().enumerate() {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Range {
                what: "pode size",
                i,
                j: i,
                value: c,
            });
        }
    }
    let sum: f64 = sizes.iter().sum();
    if (sum - 1.0).abs() > SIZE_SUM_TOL {
        return Err(Error::SizeSum { sum });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if probs[i * n + j] != probs[j * n + i] {
                return Err(Error::Asymmetry { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let p = probs[i * n + j];
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Range {
                    what: "probability",
                    i,
                    j,
                    value: p,
                });
            }
        }
    }
    if n == 0 || n > max_podes {
        return Err(Error::PodeCount { n, max: max_podes });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GraphonJson {
    sizes: Vec<f64>,
    probs: Vec<Vec<f64>>,
}

impl Serialize for MultipodalGraphon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphonJson {
            sizes: self.sizes.clone(),
            probs: self.rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultipodalGraphon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphonJson::deserialize(d)?;
        MultipodalGraphon::new(raw.sizes, raw.probs).map_err(serde::de::Error::custom)
    }
}

impl MultipodalGraphon {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graphon serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A point `(ε, τ)` of edge and triangle density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintPoint {
    pub eps: f64,
    pub tau: f64,
}

impl ConstraintPoint {
    pub fn new(eps: f64, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::ParamRange {
                name: "edge density",
                value: eps,
            });
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::ParamRange {
                name: "triangle density",
                value: tau,
            });
        }
        Ok(Self { eps, tau })
    }

    /// `τ − ε³`: negative below the Erdős–Rényi curve.
    pub fn er_gap(&self) -> f64 {
        self.tau - self.eps.powi(3)
    }

    pub fn above_er(&self) -> bool {
        self.er_gap() > 0.0
    }

    /// The rescaled coordinate `τ − ε(2ε − 1)`.
    pub fn tau_rescaled(&self) -> f64 {
        self.tau - self.eps * (2.0 * self.eps - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    F,
    Unknown,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::F => "F",
            Family::Unknown => "UNKNOWN",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "F" => Ok(Family::F),
            "UNKNOWN" => Ok(Family::Unknown),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

/// Structural phase label of a graphon.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseLabel {
    /// `(podes in class, pode size)` per equivalence class, largest classes first.
    pub signature: Vec<(usize, f64)>,
    pub family: Family,
    pub params: (usize, usize),
    pub ambiguous_with: Option<(Family, (usize, usize))>,
}

impl PhaseLabel {
    pub fn unknown(signature: Vec<(usize, f64)>) -> Self {
        Self {
            signature,
            family: Family::Unknown,
            params: (0, 0),
            ambiguous_with: None,
        }
    }

    /// Short name such as `B(2,1)`.
    pub fn name(&self) -> String {
        match self.family {
            Family::Unknown => "UNKNOWN".to_string(),
            fam => format!("{fam}({},{})", self.params.0, self.params.1),
        }
    }

    /// True when `self` names `family(params)` directly or through a
    /// documented structural coincidence.
    pub fn matches(&self, family: Family, params: (usize, usize)) -> bool {
        (self.family == family && self.params == params) || self.ambiguous_with == Some((family, params))
    }

    /// Pode-count signature, ignoring sizes.
    pub fn class_counts(&self) -> Vec<usize> {
        self.signature.iter().map(|&(k, _)| k).collect()
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses a label name like `C(2,2)` (signature left empty).
pub fn parse_label(s: &str) -> Result<(Family, (usize, usize))> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("unknown") {
        return Ok((Family::Unknown, (0, 0)));
    }
    let bad = || Error::Parse(format!("bad phase label {s:?}"));
    let open = s.find('(').ok_or_else(bad)?;
    let fam: Family = s[..open].parse()?;
    let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let (m, k) = inner.split_once(',').ok_or_else(bad)?;
    let m = m.trim().parse().map_err(|_| bad())?;
    let k = k.trim().parse().map_err(|_| bad())?;
    Ok((fam, (m, k)))
}

fn drop_degenerate(g: &MultipodalGraphon) -> MultipodalGraphon {
    let keep: Vec<usize> = (0..g.n()).filter(|&i| g.sizes[i] >= DEGENERATE_SIZE).collect();
    if keep.len() == g.n() {
        return g.clone();
    }
    let mut h = g.permuted_subset(&keep);
    let total: f64 = h.sizes.iter().sum();
    for c in &mut h.sizes {
        *c /= total;
    }
    h
}

impl MultipodalGraphon {
    fn permuted_subset(&self, keep: &[usize]) -> Self {
        let m = keep.len();
        let sizes = keep.iter().map(|&i| self.sizes[i]).collect();
        let mut probs = vec![0.0; m * m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                probs[a * m + b] = self.prob(i, j);
            }
        }
        Self { sizes, probs }
    }
}

/// Permutation-invariant sort key of one pode.
fn pode_key(g: &MultipodalGraphon, i: usize) -> (f64, Vec<f64>, f64) {
    let mut off: Vec<f64> = (0..g.n()).filter(|&k| k != i).map(|k| g.prob(i, k)).collect();
    off.sort_by(f64::total_cmp);
    (g.sizes[i], off, g.prob(i, i))
}

fn cmp_keys(a: &(f64, Vec<f64>, f64), b: &(f64, Vec<f64>, f64)) -> Ordering {
    b.0.total_cmp(&a.0)
        .then_with(|| {
            for (x, y) in a.1.iter().zip(&b.1) {
                match x.total_cmp(y) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            a.1.len().cmp(&b.1.len())
        })
        .then_with(|| a.2.total_cmp(&b.2))
}

fn sorted(g: &MultipodalGraphon) -> MultipodalGraphon {
    let keys: Vec<_> = (0..g.n()).map(|i| pode_key(g, i)).collect();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| cmp_keys(&keys[a], &keys[b]));
    g.permuted(&order)
}

fn mergeable(g: &MultipodalGraphon, i: usize, j: usize, tol: f64) -> bool {
    let pij = g.prob(i, j);
    if (pij - g.prob(i, i)).abs() >= tol || (pij - g.prob(j, j)).abs() >= tol {
        return false;
    }
    (0..g.n())
        .filter(|&k| k != i && k != j)
        .all(|k| (g.prob(i, k) - g.prob(j, k)).abs() < tol)
}

/// Merges podes `i < j` into `i`, preserving the edge density exactly.
fn merge(g: &MultipodalGraphon, i: usize, j: usize) -> MultipodalGraphon {
    let n = g.n();
    let (ci, cj) = (g.sizes[i], g.sizes[j]);
    let c = ci + cj;
    let keep: Vec<usize> = (0..n).filter(|&k| k != j).collect();
    let mut h = g.permuted_subset(&keep);
    let m = h.n();
    let ii = i; // index of the merged pode in `h` (i < j)
    h.sizes[ii] = c;
    let (pii, pij, pjj) = (g.prob(i, i), g.prob(i, j), g.prob(j, j));
    let diag = if pii == pij && pij == pjj {
        pii
    } else {
        (ci * ci * pii + 2.0 * ci * cj * pij + cj * cj * pjj) / (c * c)
    };
    h.probs[ii * m + ii] = diag.clamp(0.0, 1.0);
    for (b, &k) in keep.iter().enumerate() {
        if b == ii {
            continue;
        }
        let (pik, pjk) = (g.prob(i, k), g.prob(j, k));
        let v = if pik == pjk {
            pik
        } else {
            ((ci * pik + cj * pjk) / c).clamp(0.0, 1.0)
        };
        h.probs[ii * m + b] = v;
        h.probs[b * m + ii] = v;
    }
    h
}

/// Canonical representative: degenerate podes dropped, twin podes merged,
/// podes ordered by (size desc, sorted row, diagonal). Idempotent.
pub fn canonicalize(g: &MultipodalGraphon, merge_tol: f64) -> MultipodalGraphon {
    let mut h = sorted(&drop_degenerate(g));
    'outer: loop {
        for i in 0..h.n() {
            for j in (i + 1)..h.n() {
                if mergeable(&h, i, j, merge_tol) {
                    h = sorted(&merge(&h, i, j));
                    continue 'outer;
                }
            }
        }
        return h;
    }
}

fn twins(g: &MultipodalGraphon, i: usize, j: usize, tol: f64) -> bool {
    (g.sizes[i] - g.sizes[j]).abs() <= tol
        && (g.prob(i, i) - g.prob(j, j)).abs() <= tol
        && (0..g.n())
            .filter(|&k| k != i && k != j)
            .all(|k| (g.prob(i, k) - g.prob(j, k)).abs() <= tol)
}

/// Groups podes into equivalence classes (connected components of the twin
/// relation). Classes are returned as sorted index lists.
pub fn equivalence_classes(g: &MultipodalGraphon, tol: f64) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if twins(g, i, j, tol) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[root_of[r]].push(i);
    }
    classes
}

/// Assigns a phase label from the pode-equivalence structure.
///
/// `context` is only used to separate `F(1,1)` (above the Erdős–Rényi curve)
/// from `B(1,1)`.
pub fn classify(g: &MultipodalGraphon, tol: f64, context: Option<ConstraintPoint>) -> PhaseLabel {
    let g = drop_degenerate(g);
    let classes = equivalence_classes(&g, tol);
    let mut signature: Vec<(usize, f64)> = classes
        .iter()
        .map(|cl| {
            let mut s: Vec<f64> = cl.iter().map(|&i| g.sizes[i]).collect();
            s.sort_by(f64::total_cmp);
            (cl.len(), s.iter().sum::<f64>() / cl.len() as f64)
        })
        .collect();
    signature.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.total_cmp(&a.1)));

    let above_er = context.is_some_and(|pt| pt.above_er());
    if g.n() == 2 && above_er {
        return PhaseLabel {
            signature,
            family: Family::F,
            params: (1, 1),
            ambiguous_with: Some((Family::B, (1, 1))),
        };
    }
    let counts: Vec<usize> = signature.iter().map(|&(k, _)| k).collect();
    let (family, params, ambiguous_with) = match counts.as_slice() {
        [n] => (Family::A, (*n, 0), None),
        [2, 1] => (Family::B, (2, 1), Some((Family::C, (1, 2)))),
        [m, 1] => (Family::B, (*m, 1), None),
        [m, 2] => (Family::C, (*m, 2), None),
        _ => return PhaseLabel::unknown(signature),
    };
    PhaseLabel {
        signature,
        family,
        params,
        ambiguous_with,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(sizes: &[f64], rows: &[&[f64]]) -> MultipodalGraphon {
        MultipodalGraphon::new(sizes.to_vec(), rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(MultipodalGraphon::new(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        let e = MultipodalGraphon::new(vec![0.5, 0.6], vec![vec![0.1, 0.2], vec![0.2, 0.3]]).unwrap_err();
        assert!(matches!(e, Error::SizeSum { .. }));
        let e = MultipodalGraphon::new(vec![1.0], vec![vec![1.5]]).unwrap_err();
        assert!(matches!(
            e,
            Error::Range {
                what: "probability",
                ..
            }
        ));
    }

    #[test]
    fn validate_other_errors() {
        let e = MultipodalGraphon::new(vec![0.5, 0.5], vec![vec![0.1, 0.2], vec![0.3, 0.1]]).unwrap_err();
        assert_eq!(e, Error::Asymmetry { i: 0, j: 1 });
        let e = MultipodalGraphon::from_flat(vec![1.0 / 17.0; 17], vec![0.5; 17 * 17]).unwrap_err();
        assert!(matches!(e, Error::PodeCount { n: 17, .. }));
        let e = MultipodalGraphon::new(vec![1.0, 0.0], vec![vec![0.1, 0.2], vec![0.2, 0.1]]).unwrap_err();
        assert!(matches!(e, Error::Range { what: "pode size", .. }));
        let e = MultipodalGraphon::new(vec![1.0], vec![vec![0.1, 0.2]]).unwrap_err();
        assert!(matches!(e, Error::Shape { .. }));
    }

    #[test]
    fn canonicalize_constant_collapses() {
        let h = canonicalize(&g(&[0.3, 0.7], &[&[0.4, 0.4], &[0.4, 0.4]]), 1e-9);
        assert_eq!(h.sizes(), &[1.0]);
        assert_eq!(h.prob(0, 0), 0.4);
    }

    #[test]
    fn canonicalize_orders_by_size() {
        let h = canonicalize(&g(&[0.2, 0.8], &[&[0.1, 0.5], &[0.5, 0.9]]), DEFAULT_MERGE_TOL);
        assert_eq!(h.sizes(), &[0.8, 0.2]);
        assert_eq!(h.rows(), vec![vec![0.9, 0.5], vec![0.5, 0.1]]);
    }

    #[test]
    fn canonicalize_is_permutation_invariant_for_a20() {
        let x = g(&[0.5, 0.5], &[&[0.2076, 0.7924], &[0.7924, 0.2076]]);
        let y = x.permuted(&[1, 0]);
        assert_eq!(canonicalize(&x, DEFAULT_MERGE_TOL), canonicalize(&y, DEFAULT_MERGE_TOL));
    }

    #[test]
    fn canonicalize_drops_degenerate_podes() {
        let x = g(
            &[0.5, 0.5 - 1e-12, 1e-12],
            &[&[0.1, 0.6, 0.9], &[0.6, 0.2, 0.9], &[0.9, 0.9, 0.9]],
        );
        let h = canonicalize(&x, DEFAULT_MERGE_TOL);
        assert_eq!(h.n(), 2);
        assert!((h.sizes().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let third = 1.0 / 3.0;
        let a3 = g(
            &[third, third, third],
            &[&[0.3, 0.9, 0.9], &[0.9, 0.3, 0.9], &[0.9, 0.9, 0.3]],
        );
        let l = classify(&a3, DEFAULT_CLASSIFY_TOL, None);
        assert_eq!(l.name(), "A(3,0)");
        assert_eq!(l.ambiguous_with, None);

        let b21 = g(
            &[0.25, 0.25, 0.5],
            &[&[0.2, 0.7, 0.5], &[0.7, 0.2, 0.5], &[0.5, 0.5, 0.9]],
        );
        let l = classify(&b21, DEFAULT_CLASSIFY_TOL, None);
        assert_eq!(l.name(), "B(2,1)");
        assert_eq!(l.ambiguous_with, Some((Family::C, (1, 2))));

        let bip = g(&[0.5, 0.5], &[&[0.0, 1.0], &[1.0, 0.0]]);
        let ctx = ConstraintPoint::new(0.5, 0.0).unwrap();
        // twin podes: the complete bipartite graphon is A(2,0) structurally
        let l = classify(&bip, DEFAULT_CLASSIFY_TOL, Some(ctx));
        assert_eq!(l.family, Family::A);
        assert_eq!(l.ambiguous_with, None);

        let b11 = g(&[0.4, 0.6], &[&[0.1, 0.9], &[0.9, 0.3]]);
        let l = classify(&b11, DEFAULT_CLASSIFY_TOL, Some(ctx));
        assert_eq!(l.name(), "B(1,1)");
        assert_eq!(l.ambiguous_with, None);
        let above = ConstraintPoint::new(0.5, 0.2).unwrap();
        let l = classify(&b11, DEFAULT_CLASSIFY_TOL, Some(above));
        assert_eq!(l.name(), "F(1,1)");
        assert_eq!(l.ambiguous_with, Some((Family::B, (1, 1))));
    }

    #[test]
    fn classify_c22_and_unknown() {
        let c22 = g(
            &[0.2, 0.2, 0.3, 0.3],
            &[
                &[0.1, 0.8, 0.5, 0.5],
                &[0.8, 0.1, 0.5, 0.5],
                &[0.5, 0.5, 0.3, 0.9],
                &[0.5, 0.5, 0.9, 0.3],
            ],
        );
        assert_eq!(classify(&c22, 1e-5, None).name(), "C(2,2)");
        let unk = g(
            &[0.2, 0.3, 0.5],
            &[&[0.1, 0.2, 0.3], &[0.2, 0.4, 0.5], &[0.3, 0.5, 0.6]],
        );
        let l = classify(&unk, 1e-5, None);
        assert_eq!(l.family, Family::Unknown);
        assert_eq!(l.signature.len(), 3);
    }

    #[test]
    fn label_parsing() {
        assert_eq!(parse_label("C(2,2)").unwrap(), (Family::C, (2, 2)));
        assert_eq!(parse_label("UNKNOWN").unwrap(), (Family::Unknown, (0, 0)));
        assert!(parse_label("Q(1,1)").is_err());
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let x = g(
            &[0.1, 0.9],
            &[&[1.0 / 3.0, 0.123456789012345678], &[0.123456789012345678, 0.7]],
        );
        let s = x.to_json();
        assert_eq!(MultipodalGraphon::from_json(&s).unwrap(), x);
        assert!(MultipodalGraphon::from_json(r#"{"sizes":[0.5,0.6],"probs":[[0,0],[0,0]]}"#).is_err());
    }
}
