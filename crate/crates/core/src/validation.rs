//! Independent oracles: ray-shooting membership in a recession cone, seeded
//! samplers for recession directions and feasible points, and a grid
//! estimate of the truncated Hausdorff distance between two cones.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::ApproxConfig;
use crate::conic::{ConicOracle, ConicSolver, SolveStatus};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, pencil_eval, ShadowInstance, Spectrahedron};
use crate::polyhedral::{norm2, Cone};

/// Answer of a membership test that may be undecidable numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Indeterminate,
}

/// Decides `d ∈ recc S` by ray shooting from a strict point of `S`.
pub struct RayShootOracle<'a> {
    target: ShadowInstance,
    interior_point: Vec<f64>,
    lift_witness: Vec<f64>,
    seed: u64,
    known_directions: Vec<Vec<f64>>,
    oracle: ConicOracle<'a>,
}

impl<'a> RayShootOracle<'a> {
    /// `(interior_point, lift_witness)` must be strictly feasible.
    pub fn new(
        target: ShadowInstance,
        interior_point: Vec<f64>,
        lift_witness: Vec<f64>,
        seed: u64,
        solver: &'a dyn ConicSolver,
        cfg: &ApproxConfig,
    ) -> Result<Self> {
        if interior_point.len() != target.nvars() || lift_witness.len() != target.nlift() {
            return Err(Error::input(
                "interior point or lift witness has the wrong length",
            ));
        }
        let lam = min_eigenvalue(&target.evaluate(&interior_point, &lift_witness)?)?;
        if !(lam > cfg.tol_psd) {
            return Err(Error::input(format!(
                "interior point is not strictly feasible (smallest eigenvalue {lam:.3e})"
            )));
        }
        Ok(RayShootOracle {
            target,
            interior_point,
            lift_witness,
            seed,
            known_directions: Vec::new(),
            oracle: ConicOracle::new(solver, cfg),
        })
    }

    pub fn for_spectrahedron(
        c: &Spectrahedron,
        interior_point: Vec<f64>,
        seed: u64,
        solver: &'a dyn ConicSolver,
        cfg: &ApproxConfig,
    ) -> Result<Self> {
        Self::new(c.as_shadow(), interior_point, Vec::new(), seed, solver, cfg)
    }

    /// Recession directions that seed the samplers. The first one starts the
    /// hit-and-run chain.
    pub fn with_known_directions(mut self, dirs: Vec<Vec<f64>>) -> Self {
        self.known_directions = dirs;
        self
    }

    pub fn target(&self) -> &ShadowInstance {
        &self.target
    }

    pub fn interior_point(&self) -> &[f64] {
        &self.interior_point
    }

    pub fn lift_witness(&self) -> &[f64] {
        &self.lift_witness
    }

    /// Yes iff ray shooting from the interior point along `d` is unbounded.
    pub fn is_recession_direction(&self, d: &[f64]) -> Result<Verdict> {
        if d.len() != self.target.nvars() {
            return Err(Error::input("direction has the wrong length"));
        }
        if d.iter().all(|v| *v == 0.0) {
            return Err(Error::input("direction must be nonzero"));
        }
        Ok(
            match self
                .oracle
                .solve_p2_shadow(&self.target, &self.interior_point, d)?
                .status
            {
                SolveStatus::Unbounded { .. } => Verdict::Yes,
                SolveStatus::Optimal => Verdict::No,
                SolveStatus::Infeasible | SolveStatus::Inaccurate(_) => Verdict::Indeterminate,
            },
        )
    }
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm2(v);
    (n > 1e-12 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `count` unit recession directions, alternating between perturbations of
/// the known directions (accepted by rejection) and a shrinking hit-and-run
/// chain started at the first known direction. Deterministic given the
/// oracle's seed.
pub fn sample_recession_directions(o: &RayShootOracle, count: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::input("count must be at least 1"));
    }
    let anchors: Vec<Vec<f64>> = o.known_directions.iter().filter_map(|d| unit(d)).collect();
    if anchors.is_empty() {
        return Err(Error::input(
            "sampling needs at least one known recession direction",
        ));
    }
    let n = o.target.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    let max_attempts = 100 * count;

    let mut chain = anchors[0].clone();
    let mut chord: Option<(Vec<f64>, f64, f64)> = None;
    let mut turn = 0usize;
    while out.len() < count {
        if attempts >= max_attempts {
            return Err(Error::SamplingExhausted {
                attempts,
                accepted: out.len(),
            });
        }
        attempts += 1;
        turn += 1;
        if turn.is_multiple_of(2) {
            let a = &anchors[rng.random_range(0..anchors.len())];
            let sigma = [0.05, 0.2, 0.5][rng.random_range(0..3)];
            let g = gaussian(n, &mut rng);
            let p: Vec<f64> = a.iter().zip(&g).map(|(x, y)| x + sigma * y).collect();
            if let Some(p) = unit(&p) {
                if o.is_recession_direction(&p)? == Verdict::Yes {
                    out.push(p);
                }
            }
            continue;
        }
        let (u, lo, hi) = match chord.take() {
            Some(c) => c,
            None => match unit(&gaussian(n, &mut rng)) {
                Some(u) => (u, -1.0, 1.0),
                None => continue,
            },
        };
        let lam = rng.random_range(lo..hi);
        let p: Vec<f64> = chain.iter().zip(&u).map(|(x, y)| x + lam * y).collect();
        let accepted = match unit(&p) {
            Some(p) if o.is_recession_direction(&p)? == Verdict::Yes => Some(p),
            _ => None,
        };
        match accepted {
            Some(p) => {
                chain = p.clone();
                out.push(p);
            }
            None => {
                let (lo, hi) = if lam < 0.0 { (lam, hi) } else { (lo, lam) };
                if hi - lo > 1e-6 {
                    chord = Some((u, lo, hi));
                }
            }
        }
    }
    Ok(out)
}

/// Seeded hit-and-run in the lifted set `{(x, y) | A(x) + B(y) + A₀ ⪰ 0}`
/// restricted to `‖(x, y) − (x₀, y₀)‖∞ ≤ radius`. Returns `x`-parts: each
/// step contributes the new chain point and, when the chord ends on the
/// boundary of the set, that boundary point.
pub fn sample_feasible_points(
    s: &ShadowInstance,
    x0: &[f64],
    y0: &[f64],
    count: usize,
    radius: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let (n, m) = (s.nvars(), s.nlift());
    if x0.len() != n || y0.len() != m {
        return Err(Error::input("start point has the wrong length"));
    }
    let lifted = s.lifted();
    let start: Vec<f64> = x0.iter().chain(y0).copied().collect();
    let mut z = start.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut stalls = 0;
    while out.len() < count {
        let Some(u) = unit(&gaussian(n + m, &mut rng)) else {
            continue;
        };
        let mat = lifted.evaluate(&z)?.to_dmatrix();
        let chol = mat
            .cholesky()
            .ok_or_else(|| Error::AlgorithmFailure("chain left the strict interior".into()))?;
        let l = chol.l();
        let h = pencil_eval(lifted.pencil(), &u)?.to_dmatrix();
        let li_h = l
            .solve_lower_triangular(&h)
            .ok_or_else(|| Error::AlgorithmFailure("singular factor".into()))?;
        let g = l
            .solve_lower_triangular(&li_h.transpose())
            .ok_or_else(|| Error::AlgorithmFailure("singular factor".into()))?;
        let g: DMatrix<f64> = (&g + g.transpose()) * 0.5;
        let eig = g.symmetric_eigenvalues();
        let (mu_min, mu_max) = eig
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        // I + λ G ⪰ 0
        let mut lo = if mu_max > 0.0 {
            -1.0 / mu_max
        } else {
            f64::NEG_INFINITY
        };
        let mut hi = if mu_min < 0.0 {
            -1.0 / mu_min
        } else {
            f64::INFINITY
        };
        let (psd_lo, psd_hi) = (lo, hi);
        for i in 0..n + m {
            if u[i].abs() > 1e-15 {
                let a = (start[i] - radius - z[i]) / u[i];
                let b = (start[i] + radius - z[i]) / u[i];
                lo = lo.max(a.min(b));
                hi = hi.min(a.max(b));
            }
        }
        if !(hi - lo > 1e-12) {
            stalls += 1;
            if stalls > 100 * count.max(1) {
                return Err(Error::SamplingExhausted {
                    attempts: stalls,
                    accepted: out.len(),
                });
            }
            continue;
        }
        let at = |lam: f64| -> Vec<f64> { z.iter().zip(&u).map(|(a, b)| a + lam * b).collect() };
        for (end, psd_end) in [(lo, psd_lo), (hi, psd_hi)] {
            if end == psd_end && out.len() < count {
                out.push(at(end)[..n].to_vec());
            }
        }
        let t: f64 = rng.random_range(0.001..0.999);
        z = at(lo + t * (hi - lo));
        if out.len() < count {
            out.push(z[..n].to_vec());
        }
    }
    Ok(out)
}

/// A deterministic estimate with its discretization error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    pub value: f64,
    pub error_bound: f64,
}

/// Deterministic points on the unit sphere of `Rⁿ` and their covering
/// radius (heuristic for `n ≥ 4`).
fn sphere_grid(n: usize, grid: usize) -> (Vec<Vec<f64>>, f64) {
    let grid = grid.max(2);
    match n {
        1 => (vec![vec![1.0], vec![-1.0]], 0.0),
        2 => {
            let pts = (0..grid)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            (pts, std::f64::consts::PI / grid as f64)
        }
        3 => {
            // Fibonacci lattice
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let pts = (0..grid)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / grid as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect();
            (pts, (4.0 * std::f64::consts::PI / grid as f64).sqrt())
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let pts = (0..grid)
                .filter_map(|_| unit(&gaussian(n, &mut rng)))
                .collect();
            let h =
                ((grid as f64).ln().max(1.0) * n as f64 / grid as f64).powf(1.0 / (n as f64 - 1.0));
            (pts, h.min(2.0))
        }
    }
}

fn one_sided(from: Cone, to: Cone, grid: &[Vec<f64>]) -> f64 {
    let dist_to = |x: &[f64]| {
        let p = to.project_truncated(x);
        x.iter()
            .zip(&p)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mut best = from
        .unit_generators(1e-12)
        .iter()
        .map(|x| dist_to(x))
        .fold(0.0, f64::max);
    for g in grid {
        // A grid point within h of a unit cone vector projects to norm
        // ≥ 1 − h, so tiny projections are not needed for the cover; they are
        // rounding noise for points in the polar and must not be normalized.
        let p = from.project(g);
        if norm2(&p) < MIN_PROJECTION {
            continue;
        }
        if let Some(x) = unit(&p) {
            best = best.max(dist_to(&x));
        }
    }
    best
}

const MIN_PROJECTION: f64 = 1e-6;

/// Grid estimate of `haus(K₁ ∩ B, K₂ ∩ B)`.
///
/// Sphere grid points are projected onto each cone and normalized; together
/// with the cones' unit generators they cover `Kᵢ ∩ S` within twice the grid's
/// covering radius, and the distance function is 1-Lipschitz, so the true
/// value lies within `error_bound` of the estimate.
pub fn brute_force_delta(k1: Cone, k2: Cone, grid: usize) -> DeltaEstimate {
    let n = k1.ambient_dim();
    assert_eq!(n, k2.ambient_dim(), "cones live in different spaces");
    let (pts, h) = sphere_grid(n, grid);
    let value = one_sided(k1, k2, &pts).max(one_sided(k2, k1, &pts));
    DeltaEstimate {
        value,
        error_bound: 2.0 * h,
    }
}

/// Default grid size for `brute_force_delta` in dimension `n`.
pub fn default_grid(n: usize) -> usize {
    if n <= 3 {
        10_000
    } else {
        100_000
    }
}
