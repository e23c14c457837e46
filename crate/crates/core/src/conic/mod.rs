//! Solver-neutral conic problems and the ray-shooting subproblems built on
//! them.
//!
//! A [`ConicProblem`] is a linear objective over named scalar variables,
//! subject to affine matrix inequalities and affine equalities. Any backend
//! implementing [`ConicSolver`] can answer it; everything else (building
//! the subproblems, independent re-checks, status interpretation) lives in
//! [`subproblems`].

mod clarabel_backend;
pub mod subproblems;

pub use clarabel_backend::ClarabelSolver;
pub use subproblems::{ConicOracle, ConicSolution, SolveStatus, T_CAP};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `constant + Σ x_v · M_v ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMatrix {
    pub constant: SymMatrix,
    pub terms: Vec<(usize, SymMatrix)>,
}

impl AffineMatrix {
    pub fn new(constant: SymMatrix) -> Self {
        AffineMatrix {
            constant,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn with_term(mut self, var: usize, m: SymMatrix) -> Self {
        if !m.is_zero() {
            self.terms.push((var, m));
        }
        self
    }

    pub fn evaluate(&self, x: &[f64]) -> SymMatrix {
        let mut out = self.constant.clone();
        for (v, m) in &self.terms {
            out.axpy(x[*v], m);
        }
        out
    }
}

/// `Σ coeffs · x = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEq {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearEq {
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|(v, c)| c * x[*v]).sum::<f64>() - self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub var_names: Vec<String>,
    pub sense: Sense,
    /// Dense objective coefficients, one per variable.
    pub objective: Vec<f64>,
    pub psd_blocks: Vec<AffineMatrix>,
    pub linear_eqs: Vec<LinearEq>,
}

impl ConicProblem {
    pub fn new(var_names: Vec<String>, sense: Sense) -> Self {
        let n = var_names.len();
        ConicProblem {
            var_names,
            sense,
            objective: vec![0.0; n],
            psd_blocks: Vec::new(),
            linear_eqs: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Every referenced variable exists and every block is consistent.
    pub fn validate(&self) -> Result<()> {
        let n = self.nvars();
        if self.objective.len() != n {
            return Err(Error::input("objective length differs from variable count"));
        }
        for (k, b) in self.psd_blocks.iter().enumerate() {
            for (v, m) in &b.terms {
                if *v >= n {
                    return Err(Error::input(format!("block {k} references variable {v}")));
                }
                if m.dim() != b.dim() {
                    return Err(Error::input(format!(
                        "block {k} has inconsistent term size"
                    )));
                }
            }
        }
        for (k, e) in self.linear_eqs.iter().enumerate() {
            if e.coeffs.iter().any(|(v, _)| *v >= n) {
                return Err(Error::input(format!(
                    "equality {k} references a missing variable"
                )));
            }
        }
        Ok(())
    }
}

/// Backend answer before any interpretation.
#[derive(Debug, Clone, PartialEq)]
pub enum RawStatus {
    Solved,
    AlmostSolved,
    /// The problem has no feasible point.
    PrimalInfeasible,
    /// The objective is unbounded; `x` holds an improving ray.
    DualInfeasible,
    AlmostPrimalInfeasible,
    AlmostDualInfeasible,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    pub status: RawStatus,
    /// Variable values, or an improving ray for `DualInfeasible`.
    pub x: Vec<f64>,
    /// Objective values in the problem's own sense.
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub iterations: u32,
}

/// The narrow plug-in boundary: one conic problem in, one raw answer out.
pub trait ConicSolver {
    fn solve(&self, problem: &ConicProblem) -> RawSolution;
}

/// Connected components of the index graph whose edges are the nonzero
/// off-diagonal entries of any of `mats`. Components are sorted by their
/// smallest index and contain sorted indices.
pub fn block_components(dim: usize, mats: &[&SymMatrix]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for m in mats {
        for i in 0..dim {
            for j in 0..i {
                if m.get(i, j) != 0.0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut root_pos: Vec<Option<usize>> = vec![None; dim];
    for i in 0..dim {
        let r = find(&mut parent, i);
        match root_pos[r] {
            Some(k) => comps[k].push(i),
            None => {
                root_pos[r] = Some(comps.len());
                comps.push(vec![i]);
            }
        }
    }
    comps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_of_block_diagonal_pencil() {
        let mut a = SymMatrix::zeros(4);
        a.set(2, 0, 1.0);
        let mut b = SymMatrix::zeros(4);
        b.set(3, 3, 1.0);
        let comps = block_components(4, &[&a, &b]);
        assert_eq!(comps, vec![vec![0, 2], vec![1], vec![3]]);
    }

    #[test]
    fn validate_catches_bad_indices() {
        let mut p = ConicProblem::new(vec!["x".into()], Sense::Minimize);
        p.psd_blocks
            .push(AffineMatrix::new(SymMatrix::identity(1)).with_term(3, SymMatrix::identity(1)));
        assert!(p.validate().is_err());
        p.psd_blocks[0].terms[0].0 = 0;
        assert!(p.validate().is_ok());
        assert_eq!(p.var_index("x"), Some(0));
    }
}
