//! Affine parametrizations of multipodal graphons.
//!
//! Every search space is an affine image `z = z₀ + M x` in graphon
//! coordinates `z = (c_0 … c_{n−1}, p_ij for i ≤ j)`, with box bounds on `x`.
//! The general `n`-podal space is the identity map plus the linear constraint
//! `Σ c = 1`; each family fixes its equalities through `M`.

use nalgebra::{DMatrix, DVector};

use crate::families::FamilySpec;
use crate::graphon::{Family, MultipodalGraphon};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Space {
    General,
    Family(Family, usize),
}

#[derive(Clone, Debug)]
pub(crate) struct Parametrization {
    pub n: usize,
    pub space: Space,
    z0: DVector<f64>,
    map: DMatrix<f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    /// `Σ c = 1` is an explicit constraint on `x` (general space only).
    pub size_sum: bool,
}

/// Packed position of `p_ij` among graphon coordinates.
fn pidx(n: usize, i: usize, j: usize) -> usize {
    n + crate::densities::upper_index(n, i, j)
}

impl Parametrization {
    pub fn general(n: usize) -> Self {
        let np = n * (n + 1) / 2;
        let dim = n + np;
        Self {
            n,
            space: Space::General,
            z0: DVector::zeros(dim),
            map: DMatrix::identity(dim, dim),
            lower: DVector::zeros(dim),
            upper: DVector::from_element(dim, 1.0),
            size_sum: true,
        }
    }

    /// Family parametrization; `None` when `m` is out of range.
    pub fn family(family: Family, m: usize) -> Option<Self> {
        // (sizes as (offset, slope on c)), pair → column, column count, c column
        let (n, cols): (usize, usize) = match family {
            Family::A if m >= 2 => (m, 2),
            Family::B if m == 1 => (2, 4),
            Family::B if m >= 2 => (m + 1, 5),
            Family::C if m == 1 => (3, 5),
            Family::C if m >= 2 => (m + 2, 6),
            Family::F if m == 1 => (2, 4),
            _ => return None,
        };
        if n > crate::graphon::MAX_PODES {
            return None;
        }
        let np = n * (n + 1) / 2;
        let dim = n + np;
        let mut z0 = DVector::zeros(dim);
        let mut map = DMatrix::zeros(dim, cols);
        let set_p = |map: &mut DMatrix<f64>, i: usize, j: usize, col: usize| {
            map[(pidx(n, i, j), col)] = 1.0;
        };
        let c_col = cols - 1;
        match family {
            Family::A => {
                for i in 0..n {
                    z0[i] = 1.0 / n as f64;
                    for j in i..n {
                        set_p(&mut map, i, j, if i == j { 0 } else { 1 });
                    }
                }
            }
            Family::B | Family::F => {
                // B: x = (a, [b,] d, p, c); F: x = (a, b, d, c) with b on the last pode
                let mm = n - 1;
                let (b_col, d_col, p_col) = match (family, mm) {
                    (Family::F, _) => (None, 2, 1),
                    (_, 1) => (None, 1, 2),
                    _ => (Some(1), 2, 3),
                };
                for i in 0..mm {
                    map[(i, c_col)] = 1.0 / mm as f64;
                    for j in i..mm {
                        let col = if i == j { 0 } else { b_col.unwrap() };
                        set_p(&mut map, i, j, col);
                    }
                    set_p(&mut map, i, mm, d_col);
                }
                z0[mm] = 1.0;
                map[(mm, c_col)] = -1.0;
                set_p(&mut map, mm, mm, p_col);
            }
            Family::C => {
                // x = (a_plus, a_minus, b, d, [p,] c); podes 0, 1 are the pair
                let mm = n - 2;
                for i in 0..2 {
                    map[(i, c_col)] = 0.5;
                    set_p(&mut map, i, i, 1);
                    for j in 2..n {
                        set_p(&mut map, i, j, 3);
                    }
                }
                set_p(&mut map, 0, 1, 0);
                for i in 2..n {
                    z0[i] = 1.0 / mm as f64;
                    map[(i, c_col)] = -1.0 / mm as f64;
                    set_p(&mut map, i, i, 2);
                    for j in (i + 1)..n {
                        set_p(&mut map, i, j, 4);
                    }
                }
            }
            Family::Unknown => unreachable!(),
        }
        Some(Self {
            n,
            space: Space::Family(family, m),
            z0,
            map,
            lower: DVector::zeros(cols),
            upper: DVector::from_element(cols, 1.0),
            size_sum: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.map.ncols()
    }

    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    /// Sizes and full row-major probability matrix.
    pub fn parts(&self, x: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let z = &self.z0 + &self.map * x;
        let c: Vec<f64> = (0..n).map(|i| z[i]).collect();
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = z[pidx(n, i, j)];
                p[i * n + j] = v;
                p[j * n + i] = v;
            }
        }
        (c, p)
    }

    /// Graphon with sizes renormalized, zero-size podes dropped and values
    /// clipped to `[0, 1]`.
    pub fn graphon(&self, x: &DVector<f64>) -> MultipodalGraphon {
        let (c, p) = self.parts(x);
        let n = self.n;
        let keep: Vec<usize> = (0..n).filter(|&i| c[i] > 0.0).collect();
        let total: f64 = keep.iter().map(|&i| c[i]).sum();
        let k = keep.len();
        let mut probs = vec![0.0; k * k];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                probs[a * k + b] = p[i * n + j].clamp(0.0, 1.0);
            }
        }
        let sizes = keep.iter().map(|&i| c[i] / total).collect();
        MultipodalGraphon::from_flat_unchecked(sizes, probs)
    }

    /// General coordinates of a graphon with `self.n` podes.
    pub fn from_graphon(g: &MultipodalGraphon) -> (Self, DVector<f64>) {
        let n = g.n();
        let param = Self::general(n);
        let mut x = DVector::zeros(param.dim());
        for i in 0..n {
            x[i] = g.sizes()[i];
            for j in i..n {
                x[pidx(n, i, j)] = g.prob(i, j);
            }
        }
        (param, x)
    }

    pub fn spec(&self, x: &DVector<f64>) -> Option<FamilySpec> {
        let Space::Family(family, m) = self.space else {
            return None;
        };
        let v = |k: usize| x[k];
        Some(match family {
            Family::A => FamilySpec::A { n: m, a: v(0), b: v(1) },
            Family::B if m == 1 => FamilySpec::B {
                m,
                a: v(0),
                b: 0.0,
                d: v(1),
                p: v(2),
                c: v(3),
            },
            Family::B => FamilySpec::B {
                m,
                a: v(0),
                b: v(1),
                d: v(2),
                p: v(3),
                c: v(4),
            },
            Family::C if m == 1 => FamilySpec::C {
                m,
                a_plus: v(0),
                a_minus: v(1),
                b: v(2),
                d: v(3),
                p: 0.0,
                c: v(4),
            },
            Family::C => FamilySpec::C {
                m,
                a_plus: v(0),
                a_minus: v(1),
                b: v(2),
                d: v(3),
                p: v(4),
                c: v(5),
            },
            Family::F => FamilySpec::F {
                a: v(0),
                b: v(1),
                d: v(2),
                c: v(3),
            },
            Family::Unknown => return None,
        })
    }

    pub fn x_from_spec(&self, spec: &FamilySpec) -> Option<DVector<f64>> {
        let vals: Vec<f64> = match (spec.clone(), &self.space) {
            (FamilySpec::A { n, a, b }, Space::Family(Family::A, m)) if n == *m => vec![a, b],
            (FamilySpec::B { m, a, b, d, p, c }, Space::Family(Family::B, mm)) if m == *mm => {
                if m == 1 {
                    vec![a, d, p, c]
                } else {
                    vec![a, b, d, p, c]
                }
            }
            (
                FamilySpec::C {
                    m,
                    a_plus,
                    a_minus,
                    b,
                    d,
                    p,
                    c,
                },
                Space::Family(Family::C, mm),
            ) if m == *mm => {
                if m == 1 {
                    vec![a_plus, a_minus, b, d, c]
                } else {
                    vec![a_plus, a_minus, b, d, p, c]
                }
            }
            (FamilySpec::F { a, b, d, c }, Space::Family(Family::F, _)) => vec![a, b, d, c],
            _ => return None,
        };
        Some(DVector::from_vec(vals))
    }
}
