use crate::error::{Error, Result};

pub const DEFAULT_TOL_EIG: f64 = 1e-9;
pub const DEFAULT_TOL_PSD: f64 = 1e-7;
pub const DEFAULT_TOL_LIN: f64 = 1e-7;
pub const DEFAULT_TOL_GAP: f64 = 1e-7;
pub const DEFAULT_TOL_GEOM: f64 = 1e-8;
pub const DEFAULT_TOL_QP: f64 = 1e-8;
pub const DEFAULT_TOL_LP: f64 = 1e-9;

/// Tolerances, limits and seed shared by both approximation algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxConfig {
    /// Requested accuracy in truncated Hausdorff distance.
    pub epsilon: f64,
    pub tol_eig: f64,
    pub tol_psd: f64,
    pub tol_lin: f64,
    /// Relative duality-gap tolerance for accepting a solver answer.
    pub tol_gap: f64,
    /// Activity / duplicate tolerance for polyhedral combinatorics.
    pub tol_geom: f64,
    pub tol_qp: f64,
    pub tol_lp: f64,
    /// Cutting/augmenting sweeps of the spectrahedron algorithm.
    pub max_iterations: usize,
    /// Vertex passes of the shadow algorithm.
    pub max_passes: usize,
    pub seed: u64,
    /// Skip ray-shooting solves for directions already inside the inner cone.
    pub membership_shortcut: bool,
}

impl ApproxConfig {
    pub fn new(epsilon: f64) -> Self {
        ApproxConfig {
            epsilon,
            tol_eig: DEFAULT_TOL_EIG,
            tol_psd: DEFAULT_TOL_PSD,
            tol_lin: DEFAULT_TOL_LIN,
            tol_gap: DEFAULT_TOL_GAP,
            tol_geom: DEFAULT_TOL_GEOM,
            tol_qp: DEFAULT_TOL_QP,
            tol_lp: DEFAULT_TOL_LP,
            max_iterations: 200,
            max_passes: 500,
            seed: 0,
            membership_shortcut: true,
        }
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_max_passes(mut self, n: usize) -> Self {
        self.max_passes = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::input(format!(
                "epsilon must be a positive finite number, got {}",
                self.epsilon
            )));
        }
        let tols = [
            ("tol_eig", self.tol_eig),
            ("tol_psd", self.tol_psd),
            ("tol_lin", self.tol_lin),
            ("tol_gap", self.tol_gap),
            ("tol_geom", self.tol_geom),
            ("tol_qp", self.tol_qp),
            ("tol_lp", self.tol_lp),
        ];
        for (name, t) in tols {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::input(format!("{name} must be finite and >= 0")));
            }
            if t >= self.epsilon / 10.0 {
                log::warn!(
                    "{name} = {t} is not below epsilon/10 = {}",
                    self.epsilon / 10.0
                );
            }
        }
        if self.max_iterations == 0 || self.max_passes == 0 {
            return Err(Error::input("iteration limits must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_epsilon() {
        assert!(ApproxConfig::new(0.0).validate().is_err());
        assert!(ApproxConfig::new(-1.0).validate().is_err());
        assert!(ApproxConfig::new(f64::NAN).validate().is_err());
        assert!(ApproxConfig::new(0.1).validate().is_ok());
    }

    #[test]
    fn rejects_zero_iterations() {
        assert!(ApproxConfig::new(0.1)
            .with_max_iterations(0)
            .validate()
            .is_err());
    }
}
