//! Maximal hyperplane shift, ray shooting and its dual, for spectrahedra and
//! shadows, with independent re-checks of every answer.
//!
//! * shift: `max wᵀx s.t. A(x) + A₀ ⪰ 0`
//! * ray shooting: `max t s.t. A(x) + B(y) + A₀ ⪰ 0, x = v + t·d, t ≥ 0`
//! * dual ray shooting: `min (A(v) + A₀)·U s.t. Aᵢ·U = −wᵢ, B_j·U = 0,
//!   dᵀw = 1, U ⪰ 0`
//!
//! A dual solution `(U, w)` yields the valid inequality `wᵀx ≤ A₀·U` on the
//! set as soon as `U ⪰ 0`, `w = −A*(U)` and `B*(U) = 0`. Returned duals are
//! therefore projected onto the PSD cone and `w` is recomputed from `U`.

use std::cell::Cell;

use super::{
    block_components, AffineMatrix, ConicProblem, ConicSolver, LinearEq, RawSolution, RawStatus,
    Sense,
};
use crate::config::ApproxConfig;
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, pencil_eval, ShadowInstance, Spectrahedron, SymMatrix};
use crate::polyhedral::Halfspace;

/// Step length cap of the fallback unboundedness test.
pub const T_CAP: f64 = 1e6;
/// Fraction of [`T_CAP`] at which a step counts as unbounded.
const CAP_FRACTION: f64 = 0.99;
/// Smallest acceptable norm of a dual normal.
const MIN_DUAL_NORM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    /// Carries an improving ray when one is available.
    Unbounded {
        ray: Option<Vec<f64>>,
    },
    Infeasible,
    Inaccurate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Primal point (`x*`, or `v + t*·d` for ray shooting).
    pub x: Vec<f64>,
    /// Lifting variables, empty for spectrahedra.
    pub y: Vec<f64>,
    /// Step length of ray shooting.
    pub t: Option<f64>,
    /// `U*` of the dual problem.
    pub dual_matrix: Option<SymMatrix>,
    /// `w*` of the dual problem.
    pub dual_vector: Option<Vec<f64>>,
    /// `A₀·U*`, the offset of the supporting halfspace.
    pub support_offset: Option<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
}

impl ConicSolution {
    fn status_only(status: SolveStatus) -> Self {
        ConicSolution {
            status,
            x: Vec::new(),
            y: Vec::new(),
            t: None,
            dual_matrix: None,
            dual_vector: None,
            support_offset: None,
            primal_obj: f64::NAN,
            dual_obj: f64::NAN,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self.status, SolveStatus::Unbounded { .. })
    }

    /// `H⁻(w*, A₀·U*)` of an optimal dual solve.
    pub fn support_halfspace(&self) -> Option<Halfspace> {
        match (&self.status, &self.dual_vector, self.support_offset) {
            (SolveStatus::Optimal, Some(w), Some(off)) => Some(Halfspace::new(w.clone(), off)),
            _ => None,
        }
    }
}

fn check_vec(name: &str, v: &[f64], len: usize) -> Result<()> {
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

fn check_direction(d: &[f64], len: usize) -> Result<()> {
    check_vec("direction", d, len)?;
    if d.iter().all(|x| *x == 0.0) {
        return Err(Error::input("direction must be nonzero"));
    }
    Ok(())
}

fn unit(dim: usize, i: usize, j: usize) -> SymMatrix {
    let mut e = SymMatrix::zeros(dim);
    e.set(i, j, 1.0);
    e
}

/// `max wᵀx s.t. A(x) + A₀ ⪰ 0`.
pub fn build_p1(c: &Spectrahedron, w: &[f64]) -> ConicProblem {
    let n = c.nvars();
    let names = (0..n).map(|i| format!("x{}", i + 1)).collect();
    let mut p = ConicProblem::new(names, Sense::Maximize);
    p.objective = w.to_vec();
    let mut blk = AffineMatrix::new(c.constant().clone());
    for i in 0..n {
        blk = blk.with_term(i, c.pencil().mat(i).clone());
    }
    p.psd_blocks.push(blk);
    p
}

/// Ray shooting from `v` along `d` over a shadow, optionally with `t ≤ cap`.
/// Variables are ordered `x₁..x_n, y₁..y_m, t`.
pub fn build_p2(s: &ShadowInstance, v: &[f64], d: &[f64], cap: Option<f64>) -> ConicProblem {
    let (n, m) = (s.nvars(), s.nlift());
    let mut names: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
    names.extend((0..m).map(|j| format!("y{}", j + 1)));
    names.push("t".into());
    let tv = n + m;
    let mut p = ConicProblem::new(names, Sense::Maximize);
    p.objective[tv] = 1.0;
    let mut blk = AffineMatrix::new(s.constant().clone());
    for i in 0..n {
        blk = blk.with_term(i, s.pencil_a().mat(i).clone());
    }
    for j in 0..m {
        blk = blk.with_term(n + j, s.pencil_b().mat(j).clone());
    }
    p.psd_blocks.push(blk);
    p.psd_blocks
        .push(AffineMatrix::new(SymMatrix::zeros(1)).with_term(tv, SymMatrix::identity(1)));
    if let Some(cap) = cap {
        p.psd_blocks.push(
            AffineMatrix::new(SymMatrix::diagonal(&[cap]))
                .with_term(tv, SymMatrix::diagonal(&[-1.0])),
        );
    }
    for i in 0..n {
        p.linear_eqs.push(LinearEq {
            coeffs: vec![(i, 1.0), (tv, -d[i])],
            rhs: v[i],
        });
    }
    p
}

/// Index map of the dual matrix variable: `entries[k] = (i, j)` with `i ≥ j`
/// is the variable `k`; `w` follows at `w_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLayout {
    pub dim: usize,
    pub entries: Vec<(usize, usize)>,
    pub w_offset: usize,
}

impl DualLayout {
    fn matrix(&self, x: &[f64]) -> SymMatrix {
        let mut u = SymMatrix::zeros(self.dim);
        for (k, &(i, j)) in self.entries.iter().enumerate() {
            u.set(i, j, x[k]);
        }
        u
    }
}

/// `M·U` as coefficients over the layout's entries.
fn trace_coeffs(m: &SymMatrix, layout: &DualLayout) -> Vec<(usize, f64)> {
    layout
        .entries
        .iter()
        .enumerate()
        .filter_map(|(k, &(i, j))| {
            let c = if i == j {
                m.get(i, i)
            } else {
                2.0 * m.get(i, j)
            };
            (c != 0.0).then_some((k, c))
        })
        .collect()
}

/// Dual ray shooting. `U` is restricted to the common block-diagonal
/// structure of the data, which loses nothing: off-block entries do not
/// enter the objective or the constraints.
pub fn build_d2(s: &ShadowInstance, v: &[f64], d: &[f64]) -> (ConicProblem, DualLayout) {
    let (n, m, l) = (s.nvars(), s.nlift(), s.dim());
    let mut mats: Vec<&SymMatrix> = vec![s.constant()];
    mats.extend(s.pencil_a().mats());
    mats.extend(s.pencil_b().mats());
    let comps = block_components(l, &mats);

    let mut entries = Vec::new();
    for comp in &comps {
        for a in 0..comp.len() {
            for b in 0..=a {
                entries.push((comp[a], comp[b]));
            }
        }
    }
    let layout = DualLayout {
        dim: l,
        w_offset: entries.len(),
        entries,
    };
    let mut names: Vec<String> = layout
        .entries
        .iter()
        .map(|(i, j)| format!("U[{i},{j}]"))
        .collect();
    names.extend((0..n).map(|i| format!("w{}", i + 1)));
    let mut p = ConicProblem::new(names, Sense::Minimize);

    let mut g = pencil_eval(s.pencil_a(), v).unwrap_or_else(|_| SymMatrix::zeros(l));
    g.axpy(1.0, s.constant());
    for (k, c) in trace_coeffs(&g, &layout) {
        p.objective[k] = c;
    }

    let mut k = 0;
    for comp in &comps {
        let size = comp.len();
        let mut blk = AffineMatrix::new(SymMatrix::zeros(size));
        for a in 0..size {
            for b in 0..=a {
                blk = blk.with_term(k, unit(size, a, b));
                k += 1;
            }
        }
        p.psd_blocks.push(blk);
    }
    for i in 0..n {
        let mut coeffs = trace_coeffs(s.pencil_a().mat(i), &layout);
        coeffs.push((layout.w_offset + i, 1.0));
        p.linear_eqs.push(LinearEq { coeffs, rhs: 0.0 });
    }
    for j in 0..m {
        p.linear_eqs.push(LinearEq {
            coeffs: trace_coeffs(s.pencil_b().mat(j), &layout),
            rhs: 0.0,
        });
    }
    p.linear_eqs.push(LinearEq {
        coeffs: (0..n)
            .filter(|&i| d[i] != 0.0)
            .map(|i| (layout.w_offset + i, d[i]))
            .collect(),
        rhs: 1.0,
    });
    (p, layout)
}

/// `max λ s.t. A(x) + A₀ − λI ⪰ 0, ‖x‖∞ ≤ radius`.
pub fn build_strict_probe(c: &Spectrahedron, radius: f64) -> ConicProblem {
    let n = c.nvars();
    let mut names: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
    names.push("lambda".into());
    let mut p = ConicProblem::new(names, Sense::Maximize);
    p.objective[n] = 1.0;
    let mut blk = AffineMatrix::new(c.constant().clone());
    for i in 0..n {
        blk = blk.with_term(i, c.pencil().mat(i).clone());
    }
    blk = blk.with_term(n, SymMatrix::identity(c.dim()).scaled(-1.0));
    p.psd_blocks.push(blk);
    let mut bx = AffineMatrix::new(SymMatrix::diagonal(&vec![radius; 2 * n]));
    for i in 0..n {
        let mut diag = vec![0.0; 2 * n];
        diag[2 * i] = -1.0;
        diag[2 * i + 1] = 1.0;
        bx = bx.with_term(i, SymMatrix::diagonal(&diag));
    }
    p.psd_blocks.push(bx);
    p
}

/// Runs the subproblems through a solver, re-checks every answer and counts
/// the solves.
pub struct ConicOracle<'a> {
    solver: &'a dyn ConicSolver,
    tol_psd: f64,
    tol_lin: f64,
    tol_gap: f64,
    count: Cell<usize>,
}

impl<'a> ConicOracle<'a> {
    pub fn new(solver: &'a dyn ConicSolver, cfg: &ApproxConfig) -> Self {
        ConicOracle {
            solver,
            tol_psd: cfg.tol_psd,
            tol_lin: cfg.tol_lin,
            tol_gap: cfg.tol_gap,
            count: Cell::new(0),
        }
    }

    /// Number of conic solves issued so far.
    pub fn subproblem_count(&self) -> usize {
        self.count.get()
    }

    fn run(&self, p: &ConicProblem) -> RawSolution {
        self.count.set(self.count.get() + 1);
        self.solver.solve(p)
    }

    fn psd_ok(&self, m: &SymMatrix) -> bool {
        min_eigenvalue(m)
            .map(|l| l >= -self.tol_psd * (1.0 + m.max_abs()))
            .unwrap_or(false)
    }

    fn gap_ok(&self, raw: &RawSolution) -> bool {
        (raw.primal_obj - raw.dual_obj).abs()
            <= self.tol_gap * (1.0 + raw.primal_obj.abs().max(raw.dual_obj.abs()))
    }

    pub fn solve_p1(&self, c: &Spectrahedron, w: &[f64]) -> Result<ConicSolution> {
        check_direction(w, c.nvars())?;
        let raw = self.run(&build_p1(c, w));
        let mut sol = ConicSolution::status_only(SolveStatus::Optimal);
        match raw.status {
            RawStatus::Solved | RawStatus::AlmostSolved => {
                let m = c.evaluate(&raw.x)?;
                if !self.psd_ok(&m) {
                    sol.status =
                        SolveStatus::Inaccurate("shift point fails the PSD re-check".into());
                } else if !self.gap_ok(&raw) {
                    sol.status = SolveStatus::Inaccurate(format!(
                        "duality gap {:.3e}",
                        raw.primal_obj - raw.dual_obj
                    ));
                }
                sol.primal_obj = w.iter().zip(&raw.x).map(|(a, b)| a * b).sum();
                sol.dual_obj = raw.dual_obj;
                sol.x = raw.x;
            }
            RawStatus::DualInfeasible | RawStatus::AlmostDualInfeasible => {
                let r = raw.x;
                let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                let gain: f64 = w.iter().zip(&r).map(|(a, b)| a * b).sum();
                let rec = pencil_eval(c.pencil(), &r)?.scaled(1.0 / nr.max(f64::MIN_POSITIVE));
                sol.status = if nr > 0.0 && gain > 0.0 && self.psd_ok(&rec) {
                    SolveStatus::Unbounded { ray: Some(r) }
                } else {
                    SolveStatus::Inaccurate("unverified unboundedness certificate".into())
                };
            }
            RawStatus::PrimalInfeasible => sol.status = SolveStatus::Infeasible,
            RawStatus::AlmostPrimalInfeasible => {
                sol.status = SolveStatus::Inaccurate("almost infeasible".into())
            }
            RawStatus::Failed(why) => sol.status = SolveStatus::Inaccurate(why),
        }
        Ok(sol)
    }

    pub fn solve_p2(&self, c: &Spectrahedron, v: &[f64], d: &[f64]) -> Result<ConicSolution> {
        self.solve_p2_shadow(&c.as_shadow(), v, d)
    }

    pub fn solve_d2(&self, c: &Spectrahedron, v: &[f64], d: &[f64]) -> Result<ConicSolution> {
        self.solve_d2_shadow(&c.as_shadow(), v, d)
    }

    pub fn solve_p2_shadow(
        &self,
        s: &ShadowInstance,
        v: &[f64],
        d: &[f64],
    ) -> Result<ConicSolution> {
        let n = s.nvars();
        check_vec("base point", v, n)?;
        check_direction(d, n)?;
        let raw = self.run(&build_p2(s, v, d, None));
        match raw.status {
            RawStatus::Solved | RawStatus::AlmostSolved => Ok(self.finish_p2(s, v, d, raw)?),
            RawStatus::PrimalInfeasible => Ok(ConicSolution::status_only(SolveStatus::Infeasible)),
            RawStatus::DualInfeasible => {
                if let Some(ray) = self.verified_p2_ray(s, d, &raw.x)? {
                    return Ok(ConicSolution::status_only(SolveStatus::Unbounded {
                        ray: Some(ray),
                    }));
                }
                self.capped_p2(s, v, d)
            }
            _ => self.capped_p2(s, v, d),
        }
    }

    fn verified_p2_ray(
        &self,
        s: &ShadowInstance,
        d: &[f64],
        r: &[f64],
    ) -> Result<Option<Vec<f64>>> {
        let (n, m) = (s.nvars(), s.nlift());
        let t = r[n + m];
        if !(t > 0.0) {
            return Ok(None);
        }
        let xr: Vec<f64> = r[..n].iter().map(|v| v / t).collect();
        let yr: Vec<f64> = r[n..n + m].iter().map(|v| v / t).collect();
        let mut hom = pencil_eval(s.pencil_a(), &xr)?;
        if m > 0 {
            hom.axpy(1.0, &pencil_eval(s.pencil_b(), &yr)?);
        }
        let dn = d.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let off = xr
            .iter()
            .zip(d)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok((self.psd_ok(&hom) && off <= self.tol_lin * (1.0 + dn)).then(|| d.to_vec()))
    }

    fn capped_p2(&self, s: &ShadowInstance, v: &[f64], d: &[f64]) -> Result<ConicSolution> {
        let raw = self.run(&build_p2(s, v, d, Some(T_CAP)));
        match raw.status {
            RawStatus::Solved | RawStatus::AlmostSolved => self.finish_p2(s, v, d, raw),
            RawStatus::PrimalInfeasible => Ok(ConicSolution::status_only(SolveStatus::Infeasible)),
            other => Ok(ConicSolution::status_only(SolveStatus::Inaccurate(
                format!("ray shooting: {other:?}"),
            ))),
        }
    }

    fn finish_p2(
        &self,
        s: &ShadowInstance,
        v: &[f64],
        d: &[f64],
        raw: RawSolution,
    ) -> Result<ConicSolution> {
        let (n, m) = (s.nvars(), s.nlift());
        let t = raw.x[n + m];
        // a step this long counts as unbounded whether or not it was capped;
        // weakly unbounded problems stall at huge finite steps
        if t >= CAP_FRACTION * T_CAP {
            return Ok(ConicSolution::status_only(SolveStatus::Unbounded {
                ray: Some(d.to_vec()),
            }));
        }
        let x: Vec<f64> = v.iter().zip(d).map(|(a, b)| a + t * b).collect();
        let y = raw.x[n..n + m].to_vec();
        let mut sol = ConicSolution::status_only(SolveStatus::Optimal);
        if !self.psd_ok(&s.evaluate(&x, &y)?) {
            sol.status = SolveStatus::Inaccurate("boundary point fails the PSD re-check".into());
        } else if !self.gap_ok(&raw) {
            sol.status = SolveStatus::Inaccurate(format!(
                "duality gap {:.3e}",
                raw.primal_obj - raw.dual_obj
            ));
        }
        sol.x = x;
        sol.y = y;
        sol.t = Some(t);
        sol.primal_obj = t;
        sol.dual_obj = raw.dual_obj;
        Ok(sol)
    }

    pub fn solve_d2_shadow(
        &self,
        s: &ShadowInstance,
        v: &[f64],
        d: &[f64],
    ) -> Result<ConicSolution> {
        let n = s.nvars();
        check_vec("base point", v, n)?;
        check_direction(d, n)?;
        let (problem, layout) = build_d2(s, v, d);
        let raw = self.run(&problem);
        match raw.status {
            RawStatus::Solved | RawStatus::AlmostSolved => {}
            RawStatus::PrimalInfeasible => {
                return Ok(ConicSolution::status_only(SolveStatus::Infeasible))
            }
            RawStatus::DualInfeasible => {
                return Ok(ConicSolution::status_only(SolveStatus::Unbounded {
                    ray: None,
                }))
            }
            other => {
                return Ok(ConicSolution::status_only(SolveStatus::Inaccurate(
                    format!("dual ray shooting: {other:?}"),
                )))
            }
        }

        let mut sol = ConicSolution::status_only(SolveStatus::Optimal);
        let u_raw = layout.matrix(&raw.x);
        let scale = 1.0 + u_raw.max_abs();
        let eq_res = problem
            .linear_eqs
            .iter()
            .map(|e| e.residual(&raw.x).abs())
            .fold(0.0, f64::max);
        let mut problems = Vec::new();
        if !self.psd_ok(&u_raw) {
            problems.push("dual matrix fails the PSD re-check".to_string());
        }
        if eq_res > self.tol_lin * scale {
            problems.push(format!("equality residual {eq_res:.3e}"));
        }
        if !self.gap_ok(&raw) {
            problems.push(format!("duality gap {:.3e}", raw.primal_obj - raw.dual_obj));
        }

        // Exact certificate: U ⪰ 0, w = −A*(U), rescaled so that dᵀw = 1.
        let mut u = u_raw.psd_part();
        let mut w: Vec<f64> = s.pencil_a().adjoint(&u).iter().map(|a| -a).collect();
        let dw: f64 = d.iter().zip(&w).map(|(a, b)| a * b).sum();
        if !(dw > 0.0) {
            problems.push("dual normal has no positive component along the direction".into());
        } else {
            u = u.scaled(1.0 / dw);
            w.iter_mut().for_each(|x| *x /= dw);
        }
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn < MIN_DUAL_NORM {
            problems.push(format!("dual normal norm {wn:.3e} is numerically zero"));
        }
        let b_res = s
            .pencil_b()
            .adjoint(&u)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if b_res > self.tol_lin * (1.0 + u.max_abs()) {
            problems.push(format!("lifting residual {b_res:.3e}"));
        }

        let mut g = pencil_eval(s.pencil_a(), v)?;
        g.axpy(1.0, s.constant());
        sol.support_offset = Some(s.constant().dot(&u));
        sol.dual_obj = g.dot(&u);
        sol.primal_obj = raw.primal_obj;
        sol.dual_matrix = Some(u);
        sol.dual_vector = Some(w);
        if !problems.is_empty() {
            sol.status = SolveStatus::Inaccurate(problems.join("; "));
        }
        Ok(sol)
    }

    /// Largest `λ` with `A(x) + A₀ ⪰ λI` over `‖x‖∞ ≤ radius`, and its point.
    pub fn strict_point_probe(&self, c: &Spectrahedron, radius: f64) -> Result<(f64, Vec<f64>)> {
        let raw = self.run(&build_strict_probe(c, radius));
        match raw.status {
            RawStatus::Solved | RawStatus::AlmostSolved => {
                let n = c.nvars();
                let x = raw.x[..n].to_vec();
                // re-evaluate rather than trust the solver's λ
                let lam = min_eigenvalue(&c.evaluate(&x)?)?;
                Ok((lam, x))
            }
            RawStatus::PrimalInfeasible => Ok((f64::NEG_INFINITY, vec![0.0; c.nvars()])),
            other => Err(Error::Solver(format!("strict point probe: {other:?}"))),
        }
    }
}
