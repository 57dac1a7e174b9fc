use super::*;

fn quick() -> SolveConfig {
    SolveConfig {
        samples: 2000,
        candidates: 6,
        warm_family_starts: 4,
        ..SolveConfig::default()
    }
}

#[test]
fn sample_stage_hits_window() {
    let pt = ConstraintPoint::new(0.5, 0.1).unwrap();
    let cfg = quick();
    let out = sample_stage(pt, &cfg).unwrap();
    assert!(!out.is_empty() && out.len() <= cfg.candidates);
    for g in &out {
        assert!((edge_density(g) - 0.5).abs() <= cfg.window);
        assert!((triangle_density(g) - 0.1).abs() <= cfg.window);
    }
    let ent: Vec<f64> = out.iter().map(entropy).collect();
    assert!(ent.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn sample_stage_is_deterministic() {
    let pt = ConstraintPoint::new(0.4, 0.05).unwrap();
    let cfg = quick();
    assert_eq!(sample_stage(pt, &cfg).unwrap(), sample_stage(pt, &cfg).unwrap());
}

#[test]
fn refine_satisfies_constraints() {
    let pt = ConstraintPoint::new(0.5, 0.1).unwrap();
    let start = sample_stage(pt, &quick()).unwrap().remove(0);
    let r = refine(&start, pt, &SolveConfig::default());
    assert_eq!(r.status, Status::Converged, "{r:?}");
    assert!(r.constraint_violation < 1e-9);
    assert!(r.entropy >= entropy(&start) - 1e-9);
}

#[test]
fn er_curve_gives_constant() {
    let pt = ConstraintPoint::new(0.3, 0.027).unwrap();
    let r = solve(pt, &quick()).unwrap();
    assert_eq!(r.graphon.n(), 1);
    assert!((r.graphon.prob(0, 0) - 0.3).abs() < 1e-12);
}

#[test]
fn bipartite_minimum_at_half() {
    let r = extremal_tau(0.5, Extremum::Min, &quick()).unwrap();
    assert!(triangle_density(&r.graphon) < 1e-10);
}

#[test]
fn minimum_tau_two_thirds() {
    // complete tripartite graphon
    let r = extremal_tau(2.0 / 3.0, Extremum::Min, &quick()).unwrap();
    assert!(
        (triangle_density(&r.graphon) - 2.0 / 9.0).abs() < 1e-8,
        "{}",
        triangle_density(&r.graphon)
    );
}

#[test]
fn family_solve_a_matches_closed_form() {
    let pt = ConstraintPoint::new(0.5, 0.1).unwrap();
    let r = solve_in_family(Family::A, 2, pt, &SolveConfig::default()).unwrap();
    let FamilySpec::A { a, b, .. } = solve_a(2, pt).unwrap() else {
        unreachable!()
    };
    let g = crate::families::build_family(&FamilySpec::A { n: 2, a, b }).unwrap();
    assert!((r.entropy - entropy(&g)).abs() < 1e-10);
}

#[test]
fn infeasible_point_is_rejected() {
    let pt = ConstraintPoint { eps: 0.5, tau: 0.4 };
    assert!(matches!(solve(pt, &quick()), Err(Error::Infeasible { .. })));
}

#[test]
fn nonuniqueness_pair_matches_densities() {
    let pt = ConstraintPoint::new(0.5, 0.06).unwrap();
    let (g, h) = crate::families::nonuniqueness_pair(pt, &quick()).unwrap();
    for x in [&g, &h] {
        assert!((edge_density(x) - 0.5).abs() < 1e-12);
        assert!((triangle_density(x) - 0.06).abs() < 1e-12);
    }
    let sg = classify(&canonicalize(&g, DEFAULT_MERGE_TOL), DEFAULT_CLASSIFY_TOL, None).signature;
    let sh = classify(&canonicalize(&h, DEFAULT_MERGE_TOL), DEFAULT_CLASSIFY_TOL, None).signature;
    assert_ne!(sg, sh);
    assert!(crate::families::nonuniqueness_pair(ConstraintPoint::new(0.5, 0.0).unwrap(), &quick()).is_err());
}

#[test]
fn entropy_non_decreasing_along_iterates() {
    let pt = ConstraintPoint::new(0.5, 0.1).unwrap();
    let cfg = quick();
    for g in sample_stage(pt, &cfg).unwrap().iter().take(4) {
        let (param, x0) = Parametrization::from_graphon(g);
        let problem = Problem {
            param: &param,
            objective: Objective::Entropy,
            eps: pt.eps,
            tau: Some(pt.tau),
        };
        let run = problem.solve(&x0, &cfg.settings());
        assert!(run.history.len() >= 2);
        for w in run.history.windows(2) {
            assert!(w[1] >= w[0] - 10.0 * cfg.refine_tol, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn tiny_pode_optimum_is_stationary() {
    let r = solve(ConstraintPoint::new(0.735, 0.3971).unwrap(), &SolveConfig::default()).unwrap();
    assert_eq!(r.status, Status::Converged);
    assert!(r.graphon.sizes().iter().any(|&c| c < 1e-3));
    assert!(r.el_residual < 1e-8, "{}", r.el_residual);
}
