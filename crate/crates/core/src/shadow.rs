//! Recession cone of a spectrahedral shadow `S = {x | ∃y: A(x) + B(y) + A₀ ⪰ 0}`.
//!
//! Only ray shooting from a strict point `x̄` is used. The outer cone `O`
//! starts as one supporting halfspace, the inner cone `I` as `cone{d̄}`. Each
//! pass walks the nonzero vertices `v` of `O ∩ [−1,1]ⁿ` and probes the
//! directions `d = (1 − 2⁻ᵏ)v + 2⁻ᵏd̄`, `k = 1, …, ⌈log₂(‖v − d̄‖/ε)⌉`. An
//! unbounded ray adds `d` to `I`; a bounded one cuts `v` off `O` and restarts
//! the pass. A pass without a cut ends the run.

use std::collections::BTreeMap;

use crate::config::ApproxConfig;
use crate::conic::{ConicOracle, ConicSolver, SolveStatus};
use crate::error::{Assumption, Error, Result};
use crate::linalg::{min_eigenvalue, ShadowInstance};
use crate::polyhedral::{
    box_truncated_vertices, certified_cone_gap, cone_membership, dot, norm2, ApproxResult,
    HPolyhedron, Halfspace, SupportCut, VCone,
};

/// What [`shadow_assumption_report`] could and could not verify.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowReport {
    /// Smallest eigenvalue of `A(x̄) + B(ȳ) + A₀`.
    pub strict_margin: f64,
    pub strict: bool,
    /// `0 < ‖d̄‖ ≤ 1`.
    pub direction_in_ball: bool,
    /// Ray shooting from `x̄` along `d̄` is unbounded.
    pub direction_recedes: bool,
    /// Ray shooting from `x̄` along `−d̄` is bounded, so `S ≠ Rⁿ`.
    pub not_full_space: bool,
    /// Conditions taken on trust.
    pub unverified: Vec<&'static str>,
}

impl ShadowReport {
    /// Assumption name to `"pass"`, `"fail"`, `"not_checked"` (an earlier
    /// check failed) or `"unverified"` (taken on trust).
    pub fn flags(&self) -> BTreeMap<String, String> {
        let s2 = if self.strict { "pass" } else { "fail" };
        let s3 = match (
            self.strict,
            self.direction_in_ball && self.direction_recedes,
        ) {
            (false, _) => "not_checked",
            (true, true) => "pass",
            (true, false) => "fail",
        };
        let s1 = match (s3, self.not_full_space) {
            ("pass", true) => "pass",
            ("pass", false) => "fail",
            _ => "not_checked",
        };
        [
            ("S1", s1),
            ("S2", s2),
            ("S3", s3),
            ("S1_closed", "unverified"),
            ("S3_interior", "unverified"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
    }

    /// Flags of a run whose checks all passed.
    pub fn passing_flags() -> BTreeMap<String, String> {
        ShadowReport {
            strict_margin: f64::INFINITY,
            strict: true,
            direction_in_ball: true,
            direction_recedes: true,
            not_full_space: true,
            unverified: UNVERIFIED.to_vec(),
        }
        .flags()
    }

    /// The first failed assumption, in checking order.
    pub fn violation(&self) -> Option<(Assumption, &'static str)> {
        if !self.strict {
            Some((Assumption::S2, "A(x̄) + B(ȳ) + A₀ is not positive definite"))
        } else if !self.direction_in_ball {
            Some((Assumption::S3, "d̄ must satisfy 0 < ‖d̄‖ ≤ 1"))
        } else if !self.direction_recedes {
            Some((
                Assumption::S3,
                "ray shooting along d̄ is bounded, d̄ ∉ recc S",
            ))
        } else if !self.not_full_space {
            Some((
                Assumption::S1,
                "ray shooting along −d̄ is unbounded, so S = Rⁿ",
            ))
        } else {
            None
        }
    }
}

const UNVERIFIED: [&str; 2] = ["S is closed", "d̄ lies in the interior of recc S"];

fn check_len(name: &str, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::input(format!(
            "{name} has length {}, expected {len}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::input(format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// Runs every checkable test, stopping at the first failure. Failed
/// conditions are reported, not raised; solver breakdowns are raised.
pub fn shadow_assumption_report(
    s: &ShadowInstance,
    xbar: &[f64],
    ybar: &[f64],
    dbar: &[f64],
    oracle: &ConicOracle,
    cfg: &ApproxConfig,
) -> Result<ShadowReport> {
    check_len("interior point", xbar, s.nvars())?;
    check_len("lift witness", ybar, s.nlift())?;
    check_len("recession direction", dbar, s.nvars())?;
    let strict_margin = min_eigenvalue(&s.evaluate(xbar, ybar)?)?;
    let mut r = ShadowReport {
        strict_margin,
        strict: strict_margin > cfg.tol_psd,
        direction_in_ball: false,
        direction_recedes: false,
        not_full_space: false,
        unverified: UNVERIFIED.to_vec(),
    };
    let dn = norm2(dbar);
    r.direction_in_ball = dn > 0.0 && dn <= 1.0 + cfg.tol_geom;
    if !(r.strict && r.direction_in_ball) {
        return Ok(r);
    }
    r.direction_recedes = match oracle.solve_p2_shadow(s, xbar, dbar)?.status {
        SolveStatus::Unbounded { .. } => true,
        SolveStatus::Optimal | SolveStatus::Infeasible => false,
        SolveStatus::Inaccurate(why) => {
            return Err(Error::Solver(format!("ray shooting along d̄: {why}")))
        }
    };
    if !r.direction_recedes {
        return Ok(r);
    }
    let neg: Vec<f64> = dbar.iter().map(|v| -v).collect();
    r.not_full_space = match oracle.solve_p2_shadow(s, xbar, &neg)?.status {
        SolveStatus::Optimal => true,
        SolveStatus::Unbounded { .. } => false,
        SolveStatus::Infeasible => {
            return Err(Error::Solver(
                "ray shooting along −d̄ reported infeasible".into(),
            ))
        }
        SolveStatus::Inaccurate(why) => {
            return Err(Error::Solver(format!("ray shooting along −d̄: {why}")))
        }
    };
    Ok(r)
}

/// [`shadow_assumption_report`] turned into an error on the first failure.
pub fn check_assumptions_shadow(
    s: &ShadowInstance,
    xbar: &[f64],
    ybar: &[f64],
    dbar: &[f64],
    oracle: &ConicOracle,
    cfg: &ApproxConfig,
) -> Result<ShadowReport> {
    let r = shadow_assumption_report(s, xbar, ybar, dbar, oracle, cfg)?;
    match r.violation() {
        Some((a, why)) => Err(Error::assumption(a, why)),
        None => Ok(r),
    }
}

/// `(1 − 2⁻ᵏ)·v + 2⁻ᵏ·d̄`.
pub fn direction(v: &[f64], dbar: &[f64], k: u32) -> Vec<f64> {
    assert!(k >= 1, "direction index starts at 1");
    let b = 0.5f64.powi(k as i32);
    let a = 1.0 - b;
    v.iter().zip(dbar).map(|(x, y)| a * x + b * y).collect()
}

/// Smallest `k ≥ 0` with `‖v − d̄‖/2ᵏ ≤ ε`, i.e. `⌈log₂(‖v − d̄‖/ε)⌉` clamped
/// at 0.
pub fn k_max(v: &[f64], dbar: &[f64], eps: f64) -> u32 {
    let gap = v
        .iter()
        .zip(dbar)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if gap <= eps {
        return 0;
    }
    let mut k = (gap / eps).log2().ceil().max(0.0) as u32;
    // log₂ may round below an exact power of two
    while k > 0 && gap * 0.5f64.powi(k as i32 - 1) <= eps {
        k -= 1;
    }
    while gap * 0.5f64.powi(k as i32) > eps {
        k += 1;
    }
    k
}

/// One probed direction of a pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionProbe {
    pub v: Vec<f64>,
    pub k: u32,
    pub d: Vec<f64>,
    pub k_max: u32,
}

impl DirectionProbe {
    pub fn new(v: &[f64], dbar: &[f64], k: u32, eps: f64) -> Self {
        DirectionProbe {
            v: v.to_vec(),
            k,
            d: direction(v, dbar, k),
            k_max: k_max(v, dbar, eps),
        }
    }
}

/// Cuts and rays collected during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowState {
    pub outer: HPolyhedron,
    pub inner: VCone,
    pub cuts: Vec<SupportCut>,
}

fn homogeneous_cut(
    s: &ShadowInstance,
    xbar: &[f64],
    d: &[f64],
    oracle: &ConicOracle,
) -> Result<(Halfspace, SupportCut)> {
    let sol = oracle.solve_d2_shadow(s, xbar, d)?;
    let h = sol.support_halfspace().ok_or_else(|| {
        Error::AlgorithmFailure(format!("dual ray shooting along {d:?}: {:?}", sol.status))
    })?;
    let cut = SupportCut {
        normal: h.normal.clone(),
        offset: h.offset,
        origin: xbar.to_vec(),
        direction: d.to_vec(),
    };
    let n = norm2(&h.normal);
    let unit = Halfspace::new(h.normal.iter().map(|v| v / n).collect(), 0.0);
    Ok((unit, cut))
}

/// `O = H⁻(w/‖w‖, 0)` from the dual ray shooting along `−d̄`, `I = cone{d̄}`.
pub fn initialize_shadow(
    s: &ShadowInstance,
    xbar: &[f64],
    dbar: &[f64],
    oracle: &ConicOracle,
    cfg: &ApproxConfig,
) -> Result<ShadowState> {
    let neg: Vec<f64> = dbar.iter().map(|v| -v).collect();
    let (h, cut) = homogeneous_cut(s, xbar, &neg, oracle)?;
    if !(dot(&h.normal, &neg) > 0.0) {
        return Err(Error::InvariantViolation(
            "initial outer cone contains −d̄".into(),
        ));
    }
    let n = s.nvars();
    Ok(ShadowState {
        outer: HPolyhedron::new(n, vec![h])?,
        inner: VCone::new(n, vec![dbar.to_vec()], cfg.tol_geom)?,
        cuts: vec![cut],
    })
}

enum PassOutcome {
    Cut,
    NoUpgrade,
}

fn run_pass(
    s: &ShadowInstance,
    xbar: &[f64],
    dbar: &[f64],
    state: &mut ShadowState,
    oracle: &ConicOracle,
    cfg: &ApproxConfig,
) -> Result<PassOutcome> {
    let verts = box_truncated_vertices(&state.outer, cfg.tol_geom)
        .map_err(|e| Error::AlgorithmFailure(format!("box vertices: {e}")))?;
    for v in &verts {
        let kmax = k_max(v, dbar, cfg.epsilon);
        for k in 1..=kmax {
            let d = direction(v, dbar, k);
            if cfg.membership_shortcut && cone_membership(&d, &state.inner, cfg.tol_lp) {
                continue;
            }
            match oracle.solve_p2_shadow(s, xbar, &d)?.status {
                SolveStatus::Unbounded { .. } => {
                    state.inner.push(&d, cfg.tol_geom)?;
                }
                SolveStatus::Optimal => {
                    let (h, cut) = homogeneous_cut(s, xbar, &d, oracle)?;
                    let margin = dot(&h.normal, v);
                    log::debug!("cut at vertex {v:?}, k = {k}, margin {margin:.3e}");
                    if !(margin > 0.0) {
                        return Err(Error::InvariantViolation(format!(
                            "cut does not separate vertex {v:?} (margin {margin:.3e})"
                        )));
                    }
                    state.cuts.push(cut);
                    state.outer.push_unique(h, cfg.tol_geom)?;
                    return Ok(PassOutcome::Cut);
                }
                SolveStatus::Infeasible => {
                    return Err(Error::AlgorithmFailure(
                        "ray shooting from x̄ reported infeasible".into(),
                    ))
                }
                SolveStatus::Inaccurate(why) => {
                    return Err(Error::AlgorithmFailure(format!(
                        "ray shooting along {d:?}: {why}"
                    )))
                }
            }
        }
    }
    Ok(PassOutcome::NoUpgrade)
}

/// The stopping certificate: `d_v^{k_max} ∈ I` for every nonzero box vertex
/// `v` of `O` (with `d̄` itself standing in when `k_max = 0`).
pub fn vertex_certificate(
    outer: &HPolyhedron,
    inner: &VCone,
    dbar: &[f64],
    cfg: &ApproxConfig,
) -> Result<bool> {
    let verts = box_truncated_vertices(outer, cfg.tol_geom)?;
    Ok(verts.iter().all(|v| {
        let k = k_max(v, dbar, cfg.epsilon);
        let d = if k == 0 {
            dbar.to_vec()
        } else {
            direction(v, dbar, k)
        };
        cone_membership(&d, inner, cfg.tol_lp)
    }))
}

/// Drops halfspaces whose normal is a nonnegative combination of the others.
fn irredundant(outer: &HPolyhedron, cfg: &ApproxConfig) -> Result<HPolyhedron> {
    let normals: Vec<Vec<f64>> = outer
        .halfspaces()
        .iter()
        .map(|h| h.normal.clone())
        .collect();
    let frame = VCone::new(outer.ambient_dim(), normals, cfg.tol_geom)?.reduce_to_frame(cfg.tol_lp);
    HPolyhedron::new(
        outer.ambient_dim(),
        frame
            .rays()
            .iter()
            .map(|r| Halfspace::new(r.clone(), 0.0))
            .collect(),
    )
}

fn finish(
    state: &ShadowState,
    dbar: &[f64],
    passes: usize,
    oracle: &ConicOracle,
    cfg: &ApproxConfig,
) -> Result<ApproxResult> {
    let certificate_met = vertex_certificate(&state.outer, &state.inner, dbar, cfg)?;
    let epsilon_certified = certified_cone_gap(&state.outer, &state.inner, cfg.tol_geom)?;
    Ok(ApproxResult {
        inner: state.inner.reduce_to_frame(cfg.tol_lp),
        outer: irredundant(&state.outer, cfg)?,
        epsilon_certified,
        iterations: passes,
        subproblem_count: oracle.subproblem_count(),
        certificate_met,
        cuts: state.cuts.clone(),
    })
}

/// Inner and outer polyhedral approximations of `recc S` within truncated
/// Hausdorff distance `cfg.epsilon`.
///
/// Needs a strict point `(x̄, ȳ)` and a direction `d̄` in the interior of
/// `recc S` with `‖d̄‖ ≤ 1`. `epsilon_certified` is an upper bound on the
/// distance between the returned cones, computed from `O`'s box vertices.
pub fn approximate_recession_cone_shadow(
    s: &ShadowInstance,
    xbar: &[f64],
    ybar: &[f64],
    dbar: &[f64],
    cfg: &ApproxConfig,
    solver: &dyn ConicSolver,
) -> Result<ApproxResult> {
    cfg.validate()?;
    let oracle = ConicOracle::new(solver, cfg);
    check_assumptions_shadow(s, xbar, ybar, dbar, &oracle, cfg)?;
    let mut state = initialize_shadow(s, xbar, dbar, &oracle, cfg)?;
    let mut passes = 0;
    loop {
        if passes >= cfg.max_passes {
            let partial = finish(&state, dbar, passes, &oracle, cfg)?;
            return Err(Error::Timeout {
                limit: cfg.max_passes,
                partial: Box::new(partial),
            });
        }
        passes += 1;
        match run_pass(s, xbar, dbar, &mut state, &oracle, cfg)? {
            PassOutcome::Cut => {
                log::debug!(
                    "pass {passes}: {} halfspaces, {} rays",
                    state.outer.len(),
                    state.inner.len()
                );
            }
            PassOutcome::NoUpgrade => break,
        }
    }
    finish(&state, dbar, passes, &oracle, cfg)
}
