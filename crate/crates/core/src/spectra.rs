//! Recession cone of a spectrahedron `C = {x | A(x) + A₀ ⪰ 0}`.
//!
//! The cone `{x | A(x) ⪰ 0}` is cut by two parallel hyperplanes into a
//! compact strip `M`. A polytope pair `I ⊆ M ⊆ O` is refined by cutting the
//! vertices of `O` with dual ray-shooting halfspaces and pushing the facets
//! of `I` outwards with maximal shifts, until `haus(O, I) ≤ ε`. The conical
//! hulls of `I` and `O` are the inner and outer approximations.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::config::ApproxConfig;
use crate::conic::{ConicOracle, ConicSolver};
use crate::error::{Assumption, Error, Result};
use crate::linalg::{intersect_halfspaces, min_eigenvalue, recession_spectrahedron, Spectrahedron};
use crate::polyhedral::{
    cone_hull, cone_of_polytope, facet_enumeration, hausdorff_polytopes, point_polytope_distance,
    vertex_enumeration, ApproxResult, HPolyhedron, Halfspace, SupportCut, VPolytope,
};

/// Box radius of the strict-point search.
const PROBE_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectraReport {
    /// The pencil matrices are linearly independent, so `C` has no lines.
    pub pointed: bool,
    /// A point with `A(x) ≻ 0`, if one was found.
    pub strict_point: Option<Vec<f64>>,
}

impl SpectraReport {
    /// Assumption name to `"pass"` or `"fail"`.
    pub fn flags(&self) -> BTreeMap<String, String> {
        let word = |ok: bool| if ok { "pass" } else { "fail" }.to_string();
        BTreeMap::from([
            ("C1".to_string(), word(self.pointed)),
            ("C2".to_string(), word(self.strict_point.is_some())),
        ])
    }

    /// The first failed assumption, in checking order.
    pub fn violation(&self) -> Option<(Assumption, &'static str)> {
        if !self.pointed {
            Some((
                Assumption::C1,
                "pencil matrices are linearly dependent, C contains a line",
            ))
        } else if self.strict_point.is_none() {
            Some((
                Assumption::C2,
                "no x with A(x) ≻ 0 exists, A(x̄) ≻ 0 is unachievable",
            ))
        } else {
            None
        }
    }
}

/// Rank test on the vectorized pencil plus a strict-feasibility probe of the
/// homogeneous pencil.
pub fn check_assumptions_spectra(
    c: &Spectrahedron,
    cfg: &ApproxConfig,
    solver: &dyn ConicSolver,
) -> Result<SpectraReport> {
    let oracle = ConicOracle::new(solver, cfg);
    let pointed = pencil_is_independent(c, cfg.tol_geom);
    let (lam, x) = oracle.strict_point_probe(&recession_spectrahedron(c), PROBE_RADIUS)?;
    let strict_point = (lam > cfg.tol_psd).then_some(x);
    Ok(SpectraReport {
        pointed,
        strict_point,
    })
}

fn pencil_is_independent(c: &Spectrahedron, tol: f64) -> bool {
    let l = c.dim();
    let n = c.nvars();
    let rows = l * (l + 1) / 2;
    if n > rows {
        return false;
    }
    let m = DMatrix::from_fn(rows, n, |r, k| {
        // enumerate the lower triangle with off-diagonals weighted by √2
        let mut idx = r;
        let mut i = 0;
        while idx > i {
            idx -= i + 1;
            i += 1;
        }
        let j = idx;
        let s = if i == j {
            1.0
        } else {
            std::f64::consts::SQRT_2
        };
        s * c.pencil().mat(k).get(i, j)
    });
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    smax > 0.0 && sv.iter().all(|&s| s > tol * smax.max(1.0))
}

/// `w = u/‖u‖` with `uᵢ = −tr Aᵢ`; strictly negative on `recc C \ {0}`.
pub fn polar_interior_direction(c: &Spectrahedron) -> Result<Vec<f64>> {
    let u: Vec<f64> = c.pencil().mats().iter().map(|a| -a.trace()).collect();
    let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(n > 1e-14) {
        return Err(Error::assumption(
            Assumption::C1,
            "all pencil matrices are traceless, no polar interior direction",
        ));
    }
    Ok(u.iter().map(|v| v / n).collect())
}

/// `{x | A(x) ⪰ 0, 1 + ε ≤ −wᵀx ≤ 1 + 2ε}`.
pub fn build_strip(c: &Spectrahedron, w: &[f64], eps: f64) -> Result<Spectrahedron> {
    let neg: Vec<f64> = w.iter().map(|v| -v).collect();
    intersect_halfspaces(
        &recession_spectrahedron(c),
        &[
            Halfspace::new(w.to_vec(), -(1.0 + eps)),
            Halfspace::new(neg, 1.0 + 2.0 * eps),
        ],
    )
}

/// Scales `xbar` onto the middle level `−wᵀx = (2 + 3ε)/2` of the strip.
pub fn rescale_interior_point(xbar: &[f64], w: &[f64], eps: f64) -> Result<Vec<f64>> {
    let wx: f64 = w.iter().zip(xbar).map(|(a, b)| a * b).sum();
    if !(wx < 0.0) {
        return Err(Error::assumption(
            Assumption::C2,
            format!("interior direction has wᵀx̄ = {wx:.3e} ≥ 0"),
        ));
    }
    let s = -(2.0 + 3.0 * eps) / (2.0 * wx);
    Ok(xbar.iter().map(|v| s * v).collect())
}

/// Strip, rescaled interior point and the current polytope pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StripState {
    pub strip: Spectrahedron,
    pub w: Vec<f64>,
    pub xhat: Vec<f64>,
    pub outer: HPolyhedron,
    pub outer_vertices: VPolytope,
    pub inner: VPolytope,
    /// `haus(O, I)` of the current pair.
    pub kappa: f64,
}

fn initial_directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = vec![vec![-1.0; n]];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        dirs.push(e);
    }
    dirs
}

fn add_inner_point(inner: &mut VPolytope, x: Vec<f64>, tol: f64) -> bool {
    if inner
        .vertices()
        .iter()
        .any(|q| q.iter().zip(&x).all(|(a, b)| (a - b).abs() <= tol))
    {
        return false;
    }
    inner.push(x);
    true
}

fn inclusion_tol(cfg: &ApproxConfig) -> f64 {
    10.0 * cfg.tol_psd.max(cfg.tol_geom)
}

/// Outer polytope from shifts along `{−e, e₁, …, eₙ}` and inner polytope from
/// ray shooting along the same directions out of `xhat`.
pub fn initialize_approximations(
    strip: &Spectrahedron,
    xhat: &[f64],
    oracle: &ConicOracle,
    cfg: &ApproxConfig,
) -> Result<(HPolyhedron, VPolytope)> {
    let n = strip.nvars();
    let mut outer = HPolyhedron::new(n, Vec::new())?;
    let mut inner = VPolytope::new(n, Vec::new())?;
    for z in initial_directions(n) {
        let s = oracle.solve_p1(strip, &z)?;
        if !s.is_optimal() {
            return Err(Error::AlgorithmFailure(format!(
                "initial shift along {z:?}: {:?}",
                s.status
            )));
        }
        let gamma: f64 = z.iter().zip(&s.x).map(|(a, b)| a * b).sum();
        outer.push_unique(Halfspace::new(z.clone(), gamma), cfg.tol_geom)?;
        let r = oracle.solve_p2(strip, xhat, &z)?;
        if !r.is_optimal() {
            return Err(Error::AlgorithmFailure(format!(
                "initial ray shooting along {z:?}: {:?}",
                r.status
            )));
        }
        add_inner_point(&mut inner, r.x, cfg.tol_geom);
    }
    Ok((outer, inner))
}

/// Strip setup and initial polytopes for a strictly feasible recession point.
pub fn initialize_state(
    c: &Spectrahedron,
    xbar: &[f64],
    oracle: &ConicOracle,
    cfg: &ApproxConfig,
) -> Result<StripState> {
    let w = polar_interior_direction(c)?;
    let strip = build_strip(c, &w, cfg.epsilon)?;
    let xhat = rescale_interior_point(xbar, &w, cfg.epsilon)?;
    let slack = strip.slack(&xhat)?;
    if !(slack > cfg.tol_psd) {
        return Err(Error::assumption(
            Assumption::C2,
            format!("rescaled point is not strictly inside the strip (slack {slack:.3e})"),
        ));
    }
    let (outer, inner) = initialize_approximations(&strip, &xhat, oracle, cfg)?;
    let outer_vertices = vertex_enumeration(&outer, cfg.tol_geom)
        .map_err(|e| Error::AlgorithmFailure(format!("initial outer polytope: {e}")))?;
    let kappa = hausdorff_polytopes(&outer_vertices, &inner, cfg.tol_qp, inclusion_tol(cfg))?;
    Ok(StripState {
        strip,
        w,
        xhat,
        outer,
        outer_vertices,
        inner,
        kappa,
    })
}

/// One cutting and augmenting sweep. Cuts are appended to `cuts`.
pub fn refine_once(
    state: &StripState,
    oracle: &ConicOracle,
    cfg: &ApproxConfig,
    cuts: &mut Vec<SupportCut>,
) -> Result<StripState> {
    let mut outer = state.outer.clone();
    for v in state.outer_vertices.vertices() {
        if point_polytope_distance(v, &state.inner, cfg.tol_qp).0 <= cfg.tol_geom {
            continue;
        }
        let d: Vec<f64> = v.iter().zip(&state.xhat).map(|(a, b)| a - b).collect();
        let s = oracle.solve_d2(&state.strip, &state.xhat, &d)?;
        match s.support_halfspace() {
            Some(h) => {
                cuts.push(SupportCut {
                    normal: h.normal.clone(),
                    offset: h.offset,
                    origin: state.xhat.clone(),
                    direction: d,
                });
                outer.push_unique(h, cfg.tol_geom)?;
            }
            None => log::warn!("vertex cut skipped: {:?}", s.status),
        }
    }

    let mut inner = state.inner.clone();
    let facets = facet_enumeration(&state.inner, cfg.tol_geom)
        .map_err(|e| Error::AlgorithmFailure(format!("inner facets: {e}")))?;
    for f in facets.halfspaces() {
        let s = oracle.solve_p1(&state.strip, &f.normal)?;
        if !s.is_optimal() {
            log::warn!("facet push skipped: {:?}", s.status);
            continue;
        }
        if point_polytope_distance(&s.x, &inner, cfg.tol_qp).0 > cfg.tol_geom {
            add_inner_point(&mut inner, s.x, cfg.tol_geom);
        }
    }

    let outer_vertices = vertex_enumeration(&outer, cfg.tol_geom)
        .map_err(|e| Error::AlgorithmFailure(format!("outer vertices: {e}")))?;
    let kappa = hausdorff_polytopes(&outer_vertices, &inner, cfg.tol_qp, inclusion_tol(cfg))?;
    Ok(StripState {
        strip: state.strip.clone(),
        w: state.w.clone(),
        xhat: state.xhat.clone(),
        outer,
        outer_vertices,
        inner,
        kappa,
    })
}

/// Conical hulls of the current pair.
pub fn lift_to_cones(
    state: &StripState,
    cfg: &ApproxConfig,
) -> Result<(crate::polyhedral::VCone, HPolyhedron)> {
    let inner = cone_hull(&state.inner, cfg.tol_geom)?.reduce_to_frame(cfg.tol_lp);
    let outer = cone_of_polytope(&state.outer, cfg.tol_geom)?;
    Ok((inner, outer))
}

fn finish(
    state: &StripState,
    cfg: &ApproxConfig,
    iterations: usize,
    oracle: &ConicOracle,
    cuts: Vec<SupportCut>,
) -> Result<ApproxResult> {
    let (inner, outer) = lift_to_cones(state, cfg)?;
    Ok(ApproxResult {
        inner,
        outer,
        epsilon_certified: state.kappa,
        iterations,
        subproblem_count: oracle.subproblem_count(),
        certificate_met: state.kappa <= cfg.epsilon,
        cuts,
    })
}

/// Inner and outer polyhedral approximations of `recc C` within truncated
/// Hausdorff distance `cfg.epsilon`.
///
/// `xbar` must satisfy `A(x̄) ≻ 0`; without it a strict point is searched
/// for. Requires independent pencil matrices.
pub fn approximate_recession_cone(
    c: &Spectrahedron,
    xbar: Option<&[f64]>,
    cfg: &ApproxConfig,
    solver: &dyn ConicSolver,
) -> Result<ApproxResult> {
    cfg.validate()?;
    // recc C does not change under scaling, so solve a unit-scale copy
    let c = &unit_scale(c)?;
    if !pencil_is_independent(c, cfg.tol_geom) {
        return Err(Error::assumption(
            Assumption::C1,
            "pencil matrices are linearly dependent, C contains a line",
        ));
    }
    let oracle = ConicOracle::new(solver, cfg);
    let xbar = match xbar {
        Some(x) => {
            if x.len() != c.nvars() {
                return Err(Error::input(format!(
                    "interior direction has length {}, expected {}",
                    x.len(),
                    c.nvars()
                )));
            }
            let lam = min_eigenvalue(&crate::linalg::pencil_eval(c.pencil(), x)?)?;
            if !(lam > cfg.tol_psd) {
                return Err(Error::assumption(
                    Assumption::C2,
                    format!("A(x̄) has smallest eigenvalue {lam:.3e}, not ≻ 0"),
                ));
            }
            x.to_vec()
        }
        None => {
            let (lam, x) = oracle.strict_point_probe(&recession_spectrahedron(c), PROBE_RADIUS)?;
            if !(lam > cfg.tol_psd) {
                return Err(Error::assumption(
                    Assumption::C2,
                    "no x with A(x) ≻ 0 exists, A(x̄) ≻ 0 is unachievable",
                ));
            }
            x
        }
    };

    let mut state = initialize_state(c, &xbar, &oracle, cfg)?;
    let mut cuts = Vec::new();
    let mut iterations = 0;
    log::debug!("initial kappa {:.3e}", state.kappa);
    while state.kappa > cfg.epsilon {
        if iterations >= cfg.max_iterations {
            let partial = finish(&state, cfg, iterations, &oracle, cuts)?;
            return Err(Error::Timeout {
                limit: cfg.max_iterations,
                partial: Box::new(partial),
            });
        }
        let next = refine_once(&state, &oracle, cfg, &mut cuts)?;
        iterations += 1;
        log::debug!(
            "iteration {iterations}: kappa {:.3e}, {} halfspaces, {} points",
            next.kappa,
            next.outer.len(),
            next.inner.len()
        );
        if next.kappa > state.kappa + cfg.tol_qp {
            log::warn!(
                "kappa increased from {:.3e} to {:.3e}",
                state.kappa,
                next.kappa
            );
        }
        state = next;
    }
    finish(&state, cfg, iterations, &oracle, cuts)
}

/// Divides the pencil and constant by their largest entry.
fn unit_scale(c: &Spectrahedron) -> Result<Spectrahedron> {
    let m = c
        .pencil()
        .mats()
        .iter()
        .chain(std::iter::once(c.constant()))
        .map(|a| a.max_abs())
        .fold(0.0, f64::max);
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::input(
            "pencil and constant are all zero or not finite",
        ));
    }
    scaled_spectrahedron(c, 1.0 / m)
}

/// Scales every pencil matrix and the constant by `s > 0`; the set is
/// unchanged.
pub fn scaled_spectrahedron(c: &Spectrahedron, s: f64) -> Result<Spectrahedron> {
    Spectrahedron::new(c.pencil().scaled(s), c.constant().scaled(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::ClarabelSolver;
    use crate::instances::{epigraph, orthant, psd_cone_2x2};
    use crate::linalg::{is_psd, pencil_eval, MatrixPencil, SymMatrix};

    fn solver() -> ClarabelSolver {
        ClarabelSolver::default()
    }

    #[test]
    fn assumptions_of_reference_instances() {
        let cfg = ApproxConfig::new(0.1);
        let r = check_assumptions_spectra(&epigraph(), &cfg, &solver()).unwrap();
        assert!(r.pointed);
        assert!(r.strict_point.is_none());
        assert_eq!(r.violation().unwrap().0, Assumption::C2);

        let r = check_assumptions_spectra(&psd_cone_2x2(), &cfg, &solver()).unwrap();
        assert!(r.pointed);
        let x = r.strict_point.unwrap();
        // the probe's optimum is the identity direction
        assert!((x[0] - 1.0).abs() < 1e-6 && x[1].abs() < 1e-6 && (x[2] - 1.0).abs() < 1e-6);

        let a = SymMatrix::diagonal(&[1.0, -1.0]);
        let dep = Spectrahedron::new(
            MatrixPencil::new(vec![a.clone(), a.scaled(2.0)]).unwrap(),
            SymMatrix::identity(2),
        )
        .unwrap();
        let r = check_assumptions_spectra(&dep, &cfg, &solver()).unwrap();
        assert!(!r.pointed);
    }

    #[test]
    fn polar_direction_from_traces() {
        let w = polar_interior_direction(&psd_cone_2x2()).unwrap();
        let s = 0.5f64.sqrt();
        assert!((w[0] + s).abs() < 1e-15 && w[1] == 0.0 && (w[2] + s).abs() < 1e-15);
        assert_eq!(
            polar_interior_direction(&epigraph()).unwrap(),
            vec![0.0, -1.0]
        );
    }

    #[test]
    fn strip_offsets() {
        let c = psd_cone_2x2();
        let w = polar_interior_direction(&c).unwrap();
        let m = build_strip(&c, &w, 0.1).unwrap();
        assert_eq!(m.dim(), 4);
        assert_eq!(m.constant().get(2, 2), -1.1);
        assert_eq!(m.constant().get(3, 3), 1.2);
    }

    #[test]
    fn rescaling_formula() {
        let x = rescale_interior_point(&[0.0, 5.0], &[0.0, -1.0], 0.1).unwrap();
        assert!(x[0] == 0.0 && (x[1] - 1.15).abs() < 1e-15);
        let y = rescale_interior_point(&[0.0, 50.0], &[0.0, -1.0], 0.1).unwrap();
        assert!((x[1] - y[1]).abs() < 1e-15);
        assert!(matches!(
            rescale_interior_point(&[0.0, -1.0], &[0.0, -1.0], 0.1),
            Err(Error::AssumptionViolation {
                assumption: Assumption::C2,
                ..
            })
        ));
    }

    #[test]
    fn epigraph_fails_strict_feasibility() {
        let cfg = ApproxConfig::new(0.1);
        let e = approximate_recession_cone(&epigraph(), None, &cfg, &solver()).unwrap_err();
        assert!(matches!(
            e,
            Error::AssumptionViolation {
                assumption: Assumption::C2,
                ..
            }
        ));
    }

    #[test]
    fn orthant_is_recovered() {
        // the strip is only 1e-8 thick, so every tolerance sits below it
        let mut cfg = ApproxConfig::new(1e-8);
        cfg.tol_psd = 1e-9;
        cfg.tol_lin = 1e-9;
        cfg.tol_gap = 1e-9;
        cfg.tol_eig = 1e-9;
        cfg.tol_geom = 1e-10;
        cfg.tol_qp = 1e-10;
        cfg.tol_lp = 1e-10;
        let r = approximate_recession_cone(&orthant(2), None, &cfg, &solver()).unwrap();
        assert!(r.certificate_met);
        assert!(r.epsilon_certified <= 1e-8);
        let mut rays = r.inner.rays().to_vec();
        rays.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rays.len(), 2, "{rays:?}");
        assert!(rays[0][0].abs() < 1e-8 && (rays[0][1] - 1.0).abs() < 1e-8);
        assert!((rays[1][0] - 1.0).abs() < 1e-8 && rays[1][1].abs() < 1e-8);
        assert_eq!(r.outer.len(), 2, "{:?}", r.outer);
        for h in r.outer.halfspaces() {
            let axis = if h.normal[0].abs() > h.normal[1].abs() {
                0
            } else {
                1
            };
            assert!((h.normal[axis] + 1.0).abs() < 1e-8 && h.normal[1 - axis].abs() < 1e-8);
            assert!(h.offset.abs() < 1e-8);
        }
    }

    #[test]
    fn outer_cone_of_rotated_soc_stays_on_strip_side() {
        // a lifting-based cone conversion once dropped a facet here
        let g = crate::instances::generate(crate::instances::Family::RotatedSoc, 3, 3, 2);
        let c =
            Spectrahedron::new(g.shadow.pencil_a().clone(), g.shadow.constant().clone()).unwrap();
        let cfg = ApproxConfig::new(0.1);
        let r =
            approximate_recession_cone(&c, Some(&g.recession_interior_direction), &cfg, &solver())
                .unwrap();
        let w = polar_interior_direction(&c).unwrap();
        for x in crate::polyhedral::Cone::Halfspaces(&r.outer).unit_generators(1e-12) {
            let wx: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!(wx < 0.0, "generator {x:?} has wᵀx = {wx}");
        }
    }

    #[test]
    fn psd_cone_sandwich() {
        let cfg = ApproxConfig::new(0.1);
        let c = psd_cone_2x2();
        let r = approximate_recession_cone(&c, None, &cfg, &solver()).unwrap();
        assert!(r.certificate_met && r.epsilon_certified <= 0.1);
        for ray in r.inner.rays() {
            assert!(is_psd(&pencil_eval(c.pencil(), ray).unwrap(), 1e-6));
        }
        // the identity direction and the extreme rays E₁₁, E₂₂ lie in the outer cone
        for d in [
            [1.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
        ] {
            assert!(r.outer.contains(&d, 1e-7), "{d:?}");
        }
        assert!(!r.outer.contains(&[1.0, 2.0, 1.0], 0.0));
    }

    #[test]
    fn refinement_keeps_the_sandwich_and_shrinks_kappa() {
        let cfg = ApproxConfig::new(0.01);
        let c = psd_cone_2x2();
        let solver = solver();
        let oracle = ConicOracle::new(&solver, &cfg);
        let mut state = initialize_state(&c, &[1.0, 0.0, 1.0], &oracle, &cfg).unwrap();
        let mut cuts = Vec::new();
        for _ in 0..4 {
            let next = refine_once(&state, &oracle, &cfg, &mut cuts).unwrap();
            assert!(next.kappa <= state.kappa + cfg.tol_qp);
            for v in next.inner.vertices() {
                assert!(next.strip.contains(v, 1e-6));
            }
            for h in state.outer.halfspaces() {
                assert!(next.outer.halfspaces().contains(h));
            }
            state = next;
        }
    }
}
