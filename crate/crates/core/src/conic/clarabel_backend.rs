//! [`ConicSolver`] backed by the Clarabel interior-point solver.
//!
//! Clarabel solves `min qᵀx s.t. Ax + s = b, s ∈ K`. Each affine matrix
//! inequality becomes a slack `s = svec(F₀ + Σ x_v F_v)`; its block-diagonal
//! components are split first so that 1×1 components land in the
//! nonnegative cone. Cones are ordered largest PSD block first, then the
//! nonnegative rows, then the equalities.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::{block_components, ConicProblem, ConicSolver, RawSolution, RawStatus, Sense};

/// Clarabel with tight tolerances and single-threaded, deterministic setup.
#[derive(Debug, Clone)]
pub struct ClarabelSolver {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: u32,
}

impl Default for ClarabelSolver {
    fn default() -> Self {
        ClarabelSolver {
            tol_gap: 1e-10,
            tol_feas: 1e-10,
            max_iter: 200,
        }
    }
}

struct Rows {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    fn push_entry(&mut self, row: usize, col: usize, val: f64) {
        if val != 0.0 {
            self.i.push(row);
            self.j.push(col);
            self.v.push(val);
        }
    }
}

impl ConicSolver for ClarabelSolver {
    fn solve(&self, p: &ConicProblem) -> RawSolution {
        let n = p.nvars();
        let failed = |msg: String| RawSolution {
            status: RawStatus::Failed(msg),
            x: vec![0.0; n],
            primal_obj: f64::NAN,
            dual_obj: f64::NAN,
            iterations: 0,
        };
        if let Err(e) = p.validate() {
            return failed(e.to_string());
        }

        // (block index, component indices) split by size
        let mut psd: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut scalar: Vec<(usize, usize)> = Vec::new();
        for (k, blk) in p.psd_blocks.iter().enumerate() {
            let mut mats = vec![&blk.constant];
            mats.extend(blk.terms.iter().map(|(_, m)| m));
            for comp in block_components(blk.dim(), &mats) {
                if comp.len() == 1 {
                    scalar.push((k, comp[0]));
                } else {
                    psd.push((k, comp));
                }
            }
        }
        psd.sort_by_key(|b| std::cmp::Reverse(b.1.len()));

        let mut rows = Rows {
            i: Vec::new(),
            j: Vec::new(),
            v: Vec::new(),
            b: Vec::new(),
        };
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        let sqrt2 = std::f64::consts::SQRT_2;
        for (k, comp) in &psd {
            let blk = &p.psd_blocks[*k];
            // upper triangle, column-major: (r, c) with r ≤ c
            for c in 0..comp.len() {
                for r in 0..=c {
                    let (gi, gj) = (comp[r], comp[c]);
                    let scale = if r == c { 1.0 } else { sqrt2 };
                    let row = rows.b.len();
                    rows.b.push(scale * blk.constant.get(gi, gj));
                    for (v, m) in &blk.terms {
                        rows.push_entry(row, *v, -scale * m.get(gi, gj));
                    }
                }
            }
            cones.push(SupportedConeT::PSDTriangleConeT(comp.len()));
        }
        if !scalar.is_empty() {
            for (k, idx) in &scalar {
                let blk = &p.psd_blocks[*k];
                let row = rows.b.len();
                rows.b.push(blk.constant.get(*idx, *idx));
                for (v, m) in &blk.terms {
                    rows.push_entry(row, *v, -m.get(*idx, *idx));
                }
            }
            cones.push(SupportedConeT::NonnegativeConeT(scalar.len()));
        }
        if !p.linear_eqs.is_empty() {
            for e in &p.linear_eqs {
                let row = rows.b.len();
                rows.b.push(e.rhs);
                for (v, c) in &e.coeffs {
                    rows.push_entry(row, *v, *c);
                }
            }
            cones.push(SupportedConeT::ZeroConeT(p.linear_eqs.len()));
        }

        let m = rows.b.len();
        let a = CscMatrix::new_from_triplets(m, n, rows.i, rows.j, rows.v);
        let pmat = CscMatrix::<f64>::zeros((n, n));
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let q: Vec<f64> = p.objective.iter().map(|c| sign * c).collect();

        let settings = DefaultSettings::<f64> {
            verbose: false,
            max_iter: self.max_iter,
            tol_gap_abs: self.tol_gap,
            tol_gap_rel: self.tol_gap,
            tol_feas: self.tol_feas,
            chordal_decomposition_enable: false,
            max_threads: 1,
            ..DefaultSettings::default()
        };
        let mut solver = match DefaultSolver::new(&pmat, &q, &a, &rows.b, &cones, settings) {
            Ok(s) => s,
            Err(e) => return failed(format!("solver setup: {e}")),
        };
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved => RawStatus::Solved,
            SolverStatus::AlmostSolved => RawStatus::AlmostSolved,
            SolverStatus::PrimalInfeasible => RawStatus::PrimalInfeasible,
            SolverStatus::DualInfeasible => RawStatus::DualInfeasible,
            SolverStatus::AlmostPrimalInfeasible => RawStatus::AlmostPrimalInfeasible,
            SolverStatus::AlmostDualInfeasible => RawStatus::AlmostDualInfeasible,
            other => RawStatus::Failed(format!("{other:?}")),
        };
        RawSolution {
            status,
            x: sol.x.clone(),
            primal_obj: sign * sol.obj_val,
            dual_obj: sign * sol.obj_val_dual,
            iterations: sol.iterations,
        }
    }
}
