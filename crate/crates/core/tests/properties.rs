mod common;

use graphon_lab::densities::{
    density_gradients, edge_density, entropy, s0, subgraph_density, triangle_density, SubgraphPattern,
};
use graphon_lab::diagram::{detect_transitions, feasible, Feasibility, LowerBoundary, ScanRecord};
use graphon_lab::families::{
    build_family, euler_lagrange_residual, hessian_a, min_tau_stationarity, solve_a, FamilySpec,
};
use graphon_lab::graphon::{
    canonicalize, classify, parse_label, validate, ConstraintPoint, Family, MultipodalGraphon, PhaseLabel,
    DEFAULT_CLASSIFY_TOL, DEFAULT_MERGE_TOL,
};
use graphon_lab::optimize::{solve, SolveConfig, Status};
use proptest::prelude::*;

fn graphon_strategy() -> impl Strategy<Value = MultipodalGraphon> {
    (1usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(0.02f64..1.0, n),
            prop::collection::vec(0.0f64..=1.0, n * (n + 1) / 2),
        )
            .prop_map(move |(w, upper)| {
                let total: f64 = w.iter().sum();
                let mut sizes: Vec<f64> = w.iter().map(|x| x / total).collect();
                let head: f64 = sizes[..n - 1].iter().sum();
                sizes[n - 1] = 1.0 - head;
                let mut rows = vec![vec![0.0; n]; n];
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        rows[i][j] = upper[k];
                        rows[j][i] = upper[k];
                        k += 1;
                    }
                }
                MultipodalGraphon::new(sizes, rows).unwrap()
            })
    })
}

fn family_strategy() -> impl Strategy<Value = FamilySpec> {
    let u = || 0.0f64..=1.0;
    prop_oneof![
        (2usize..=6, u(), u()).prop_map(|(n, a, b)| FamilySpec::A { n, a, b }),
        (1usize..=5, u(), u(), u(), u(), 0.05f64..0.95).prop_map(|(m, a, b, d, p, c)| {
            FamilySpec::B {
                m,
                a,
                b: if m == 1 { 0.0 } else { b },
                d,
                p,
                c,
            }
        }),
        (1usize..=4, (u(), u(), u(), u(), u()), 0.05f64..0.95).prop_map(|(m, (ap, am, b, d, p), c)| {
            FamilySpec::C {
                m,
                a_plus: ap,
                a_minus: am,
                b,
                d,
                p: if m == 1 { 0.0 } else { p },
                c,
            }
        }),
        (u(), u(), u(), 0.05f64..0.95).prop_map(|(a, b, d, c)| FamilySpec::F { a, b, d, c }),
    ]
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

fn same_label(x: &PhaseLabel, y: &PhaseLabel) -> bool {
    x.family == y.family && x.params == y.params && x.class_counts() == y.class_counts()
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(g in graphon_strategy()) {
        let once = canonicalize(&g, DEFAULT_MERGE_TOL);
        prop_assert_eq!(canonicalize(&once, DEFAULT_MERGE_TOL), once);
    }

    #[test]
    fn classify_is_permutation_invariant(spec in family_strategy(), seed in any::<u64>()) {
        let g = build_family(&spec).unwrap();
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let x = classify(&g, DEFAULT_CLASSIFY_TOL, None);
        let y = classify(&g.permuted(&perm), DEFAULT_CLASSIFY_TOL, None);
        prop_assert!(same_label(&x, &y), "{} vs {}", x, y);
    }

    #[test]
    fn a_family_classifies_as_a(n in 2usize..=6, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        prop_assume!((a - b).abs() > 10.0 * DEFAULT_CLASSIFY_TOL);
        let g = build_family(&FamilySpec::A { n, a, b }).unwrap();
        let label = classify(&canonicalize(&g, DEFAULT_MERGE_TOL), DEFAULT_CLASSIFY_TOL, None);
        prop_assert_eq!(label.family, Family::A);
        prop_assert_eq!(label.params, (n, 0));
    }

    #[test]
    fn family_constructions_validate(spec in family_strategy()) {
        let g = build_family(&spec).unwrap();
        prop_assert!(validate(&g).is_ok());
    }

    #[test]
    fn pattern_densities_agree_exactly(g in graphon_strategy()) {
        prop_assert_eq!(subgraph_density(&g, &SubgraphPattern::edge()).unwrap(), edge_density(&g));
        prop_assert_eq!(subgraph_density(&g, &SubgraphPattern::triangle()).unwrap(), triangle_density(&g));
    }

    #[test]
    fn densities_match_direct_sums(g in graphon_strategy()) {
        let (e, t, s) = common::graphon_densities(&g);
        prop_assert!((edge_density(&g) - e).abs() < 1e-13);
        prop_assert!((triangle_density(&g) - t).abs() < 1e-13);
        prop_assert!((entropy(&g) - s).abs() < 1e-13);
    }

    #[test]
    fn densities_survive_permutation_and_split(
        (g, perm) in graphon_strategy().prop_flat_map(|g| { let n = g.n(); (Just(g), permutation(n)) }),
        k in 0usize..6,
        ratio in 0.05f64..0.95,
    ) {
        let all = |h: &MultipodalGraphon| [edge_density(h), triangle_density(h), entropy(h)];
        let base = all(&g);
        let p = all(&g.permuted(&perm));
        for i in 0..3 {
            prop_assert!((base[i] - p[i]).abs() <= 1e-12);
        }
        if g.n() < 6 {
            let split = g.split_pode(k % g.n(), 0.5).unwrap();
            let uneven = g.split_pode(k % g.n(), ratio).unwrap();
            for h in [split, uneven] {
                let v = all(&h);
                for i in 0..3 {
                    prop_assert!((base[i] - v[i]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn triangle_and_entropy_bounds(g in graphon_strategy()) {
        let e = edge_density(&g);
        let t = triangle_density(&g);
        prop_assert!(t >= 0.0);
        prop_assert!(t <= e.powf(1.5) + 1e-12);
        prop_assert!(entropy(&g) <= s0(e) + 1e-12);
    }

    #[test]
    fn hessian_is_exactly_symmetric(n in 2usize..=6, a in 0.01f64..0.99, b in 0.01f64..0.99) {
        prop_assume!((a - b).abs() > 1e-6);
        let h = hessian_a(n, a, b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(h.matrix[i][j].to_bits(), h.matrix[j][i].to_bits());
            }
        }
    }

    #[test]
    fn constant_graphon_is_stationary(e in 0.001f64..0.999) {
        let g = MultipodalGraphon::constant(e).unwrap();
        let alpha = ((1.0 - e) / e).ln();
        prop_assert!(euler_lagrange_residual(&g, alpha, 0.0).max_abs < 1e-14);
    }

    #[test]
    fn feasible_interior_is_an_interval(e in 0.0f64..=1.0) {
        let lower = oracle_boundary();
        let flags: Vec<bool> = (0..=400)
            .map(|k| feasible(ConstraintPoint { eps: e, tau: k as f64 / 400.0 }, &lower) == Feasibility::Interior)
            .collect();
        let starts = flags.windows(2).filter(|w| !w[0] && w[1]).count() + usize::from(flags[0]);
        prop_assert!(starts <= 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradients_match_finite_differences(seed in any::<u64>(), n in 1usize..=6) {
        let g = common::random_graphon(&mut common::rng(seed), n);
        let exact = density_gradients(&g);
        let fd = common::fd_gradients(&g, 1e-6);
        for (lib, oracle) in [(&exact.eps, &fd[0]), (&exact.tau, &fd[1]), (&exact.entropy, &fd[2])] {
            prop_assert_eq!(lib.len(), oracle.len());
            for (x, y) in lib.iter().zip(oracle) {
                prop_assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{} vs {}", x, y);
            }
        }
    }
}

/// The factored polynomial written out by powers of `c`.
fn min_tau_horner(a: f64, c: f64) -> f64 {
    let c0 = 2.0;
    let c1 = 2.0 * a * a - 2.0 - 4.0;
    let c2 = a * a * a + a - 4.0 * a * a + 4.0;
    (c2 * c + c1) * c + c0
}

#[test]
fn min_tau_residual_matches_horner_form() {
    let mut rng = common::rng(11);
    for _ in 0..1000 {
        use rand::Rng;
        let a: f64 = rng.random();
        let c: f64 = rng.random();
        assert!((min_tau_stationarity(a, c) - min_tau_horner(a, c)).abs() < 1e-15 * 16.0);
    }
}

fn oracle_boundary() -> LowerBoundary {
    let mut text = String::from("epsilon,tau_low\n");
    for k in 0..=1000 {
        let e = k as f64 / 1000.0;
        text.push_str(&format!("{e:.17e},{:.17e}\n", common::razborov_tau_low(e)));
    }
    LowerBoundary::from_csv(&text).unwrap()
}

fn synthetic_records(kink: f64, steps: usize) -> Vec<ScanRecord> {
    let (lo, hi) = (0.30, 0.40);
    (0..steps)
        .map(|k| {
            let tau = lo + (hi - lo) * k as f64 / (steps - 1) as f64;
            let (s, beta, name) = if tau < kink {
                (5.0 * (tau - kink) + 0.2, 5.0, "B(1,1)")
            } else {
                (9.0 * (tau - kink) + 0.2, 9.0, "B(2,1)")
            };
            let (family, params) = parse_label(name).unwrap();
            ScanRecord {
                point: ConstraintPoint { eps: 0.7, tau },
                entropy: s,
                label: PhaseLabel {
                    signature: vec![],
                    family,
                    params,
                    ambiguous_with: None,
                },
                params: vec![],
                beta,
                status: Status::Converged,
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn transitions_stable_under_refinement(kink in 0.32f64..0.38) {
        let coarse = synthetic_records(kink, 41);
        let fine = synthetic_records(kink, 81);
        let step = 0.1 / 40.0;
        let a = detect_transitions(&coarse, 0.05).unwrap();
        let b = detect_transitions(&fine, 0.05).unwrap();
        prop_assert_eq!(a.len(), 1);
        prop_assert_eq!(b.len(), 1);
        prop_assert!((a[0].center() - b[0].center()).abs() <= step);
        prop_assert!(a[0].location.0 <= kink && kink <= a[0].location.1);
    }
}

fn quick() -> SolveConfig {
    SolveConfig {
        samples: 4000,
        ..SolveConfig::default()
    }
}

fn feasible_test_grid() -> Vec<ConstraintPoint> {
    let mut pts = Vec::new();
    for i in 0..10 {
        let e = 0.12 + 0.08 * i as f64;
        let low = common::razborov_tau_low(e);
        let high = e.powi(3);
        for j in 0..10 {
            let t = low + (high - low) * (0.04 + 0.92 * j as f64 / 9.0);
            pts.push(ConstraintPoint { eps: e, tau: t });
        }
    }
    pts
}

#[test]
fn solve_beats_closed_form_starts_and_is_stationary() {
    let cfg = quick();
    for pt in feasible_test_grid() {
        let r = solve(pt, &cfg).unwrap();
        assert_eq!(r.status, Status::Converged, "{pt:?}");
        for n in 2..=cfg.max_podes {
            if let Ok(spec) = solve_a(n, pt) {
                let s = entropy(&build_family(&spec).unwrap());
                assert!(r.entropy >= s - 1e-12, "{pt:?}: {} < A({n},0) {}", r.entropy, s);
            }
        }
        assert!(r.kkt_residual < 10.0 * cfg.refine_tol, "{pt:?}: kkt {}", r.kkt_residual);
        assert!(r.el_residual < 1e-5, "{pt:?}: el {}", r.el_residual);
        let oracle = common::el_residual(r.graphon.sizes(), &r.graphon.rows(), r.beta);
        assert!(oracle < 1e-5, "{pt:?}: oracle el {oracle}");
        assert!(r.beta > 0.0, "{pt:?}: beta {}", r.beta);
    }
}

#[test]
fn solve_is_reproducible() {
    let cfg = quick();
    for pt in feasible_test_grid().into_iter().step_by(17) {
        let a = solve(pt, &cfg).unwrap();
        let b = solve(pt, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}

#[test]
fn er_points_have_vanishing_beta() {
    for e in [0.2, 0.5, 0.6, 0.85] {
        let r = solve(ConstraintPoint::new(e, e * e * e).unwrap(), &quick()).unwrap();
        assert!(r.beta.abs() < 1e-5, "{e}: {}", r.beta);
    }
}
