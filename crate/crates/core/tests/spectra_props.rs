use proptest::prelude::*;

use reccone::conic::{ClarabelSolver, ConicOracle};
use reccone::instances::{generate, orthant, psd_cone_2x2, Family};
use reccone::linalg::Spectrahedron;
use reccone::polyhedral::{hausdorff_polytopes, ApproxResult};
use reccone::spectra::{
    approximate_recession_cone, initialize_state, refine_once, scaled_spectrahedron,
};
use reccone::validation::{sample_feasible_points, sample_recession_directions, RayShootOracle};
use reccone::ApproxConfig;

/// Instance pool with a known `x̄` satisfying `A(x̄) ≻ 0`.
fn instance(pick: u8, seed: u64) -> (Spectrahedron, Vec<f64>) {
    match pick % 4 {
        0 => (psd_cone_2x2(), vec![1.0, 0.0, 1.0]),
        1 => (orthant(3), vec![1.0; 3]),
        f => {
            let family = if f == 2 {
                Family::Diagonal
            } else {
                Family::RotatedSoc
            };
            let g = generate(family, 3, 3, seed);
            let c = Spectrahedron::new(g.shadow.pencil_a().clone(), g.shadow.constant().clone())
                .unwrap();
            (c, g.recession_interior_direction)
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn same_sets(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| dist(x, y) <= tol))
        && b.iter().all(|y| a.iter().any(|x| dist(x, y) <= tol))
}

fn normals(r: &ApproxResult) -> Vec<Vec<f64>> {
    r.outer
        .halfspaces()
        .iter()
        .map(|h| h.normal.clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn every_sweep_keeps_the_sandwich(pick in 0u8..4, seed in 0u64..50, tight in any::<bool>()) {
        let (c, xbar) = instance(pick, seed);
        let cfg = ApproxConfig::new(if tight { 0.05 } else { 0.2 });
        let solver = ClarabelSolver::default();
        let oracle = ConicOracle::new(&solver, &cfg);
        let mut state = initialize_state(&c, &xbar, &oracle, &cfg).unwrap();
        let mut cuts = Vec::new();
        let mut sweeps = 0;
        loop {
            for v in state.inner.vertices() {
                prop_assert!(state.strip.slack(v).unwrap() >= -10.0 * cfg.tol_psd, "{:?}", v);
            }
            let pts = sample_feasible_points(&state.strip.as_shadow(), &state.xhat, &[], 1000, 10.0, seed)
                .unwrap();
            for p in &pts {
                prop_assert!(state.outer.max_violation(p) <= cfg.tol_geom, "{:?}", p);
            }
            if state.kappa <= cfg.epsilon || sweeps == 50 {
                break;
            }
            let next = refine_once(&state, &oracle, &cfg, &mut cuts).unwrap();
            for h in state.outer.halfspaces() {
                prop_assert!(next.outer.halfspaces().contains(h), "halfspace dropped");
            }
            for v in state.inner.vertices() {
                prop_assert!(next.inner.vertices().contains(v), "inner point dropped");
            }
            prop_assert!(next.kappa <= state.kappa + cfg.tol_qp, "{} > {}", next.kappa, state.kappa);
            state = next;
            sweeps += 1;
        }
        prop_assert!(state.kappa <= cfg.epsilon);
        let kappa = hausdorff_polytopes(&state.outer_vertices, &state.inner, cfg.tol_qp, 1e-6).unwrap();
        prop_assert!(kappa <= cfg.epsilon);
    }

    #[test]
    fn lifted_cones_are_consistent(pick in 0u8..4, seed in 0u64..50) {
        let (c, xbar) = instance(pick, seed);
        let cfg = ApproxConfig::new(0.1);
        let solver = ClarabelSolver::default();
        let r = approximate_recession_cone(&c, Some(&xbar), &cfg, &solver).unwrap();
        prop_assert!(r.certificate_met && r.epsilon_certified <= cfg.epsilon);
        for ray in r.inner.rays() {
            prop_assert!(r.outer.max_violation(ray) <= cfg.tol_geom, "{:?}", ray);
        }
        let mut known = vec![xbar.clone()];
        known.extend(r.inner.rays().iter().cloned());
        let o = RayShootOracle::for_spectrahedron(&c, xbar.clone(), seed, &solver, &cfg)
            .unwrap()
            .with_known_directions(known);
        for d in sample_recession_directions(&o, 1000).unwrap() {
            prop_assert!(r.outer.max_violation(&d) <= 1e-6, "{:?}", d);
        }
    }

    #[test]
    fn scaling_the_pencil_changes_nothing(pick in 0u8..4, seed in 0u64..50, up in any::<bool>()) {
        let (c, xbar) = instance(pick, seed);
        let cfg = ApproxConfig::new(0.1);
        let solver = ClarabelSolver::default();
        let base = approximate_recession_cone(&c, Some(&xbar), &cfg, &solver).unwrap();
        let s = if up { 4.0 } else { 0.25 };
        let scaled = scaled_spectrahedron(&c, s).unwrap();
        let r = approximate_recession_cone(&scaled, Some(&xbar), &cfg, &solver).unwrap();
        prop_assert!(same_sets(base.inner.rays(), r.inner.rays(), cfg.tol_geom),
            "{:?} vs {:?}", base.inner.rays(), r.inner.rays());
        prop_assert!(same_sets(&normals(&base), &normals(&r), cfg.tol_geom));
    }
}
