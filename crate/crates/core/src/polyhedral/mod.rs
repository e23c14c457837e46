//! Polyhedral representations, enumeration and distances.
//!
//! Outer approximations live in H-representation ([`HPolyhedron`]), inner
//! approximations in V-representation ([`VPolytope`] for bounded sets,
//! [`VCone`] for cones). Conversions go through a floating-point double
//! description method, so every combinatorial decision takes an explicit
//! tolerance.

mod dd;
mod enumerate;
mod hausdorff;
mod lp;
mod projection;

pub use enumerate::{
    box_truncated_vertices, cone_hull, cone_of_polytope, facet_enumeration, vertex_enumeration,
    vertex_enumeration_with_active,
};
pub use hausdorff::{
    certified_cone_gap, hausdorff_polytopes, point_polytope_distance, truncated_hausdorff_estimate,
    Cone,
};

use std::cmp::Ordering;

use crate::error::{Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Sorts lexicographically and drops points within `tol` (∞-norm) of an
/// earlier kept point, so each cluster keeps its lexicographically smallest
/// member.
pub(crate) fn dedup_points(mut pts: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| lex_cmp(a, b));
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for p in pts {
        let dup = out
            .iter()
            .any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() <= tol));
        if !dup {
            out.push(p);
        }
    }
    out
}

/// The halfspace `{x | normalᵀx ≤ offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    /// Scales to a unit normal; the set is unchanged.
    pub fn normalize(&self) -> Result<Halfspace> {
        let n = norm2(&self.normal);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateInput("halfspace normal is zero".into()));
        }
        Ok(Halfspace {
            normal: self.normal.iter().map(|v| v / n).collect(),
            offset: self.offset / n,
        })
    }

    /// `normalᵀx − offset`; positive outside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.violation(x) <= tol
    }
}

/// Free function form of [`Halfspace::normalize`].
pub fn normalize(h: &Halfspace) -> Result<Halfspace> {
    h.normalize()
}

/// Intersection of finitely many halfspaces in `R^ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolyhedron {
    ambient_dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl HPolyhedron {
    pub fn new(ambient_dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        if let Some(h) = halfspaces.iter().find(|h| h.normal.len() != ambient_dim) {
            return Err(Error::input(format!(
                "halfspace normal has length {}, expected {ambient_dim}",
                h.normal.len()
            )));
        }
        Ok(HPolyhedron {
            ambient_dim,
            halfspaces,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// True iff every offset is exactly zero.
    pub fn is_cone(&self) -> bool {
        self.halfspaces.iter().all(|h| h.offset == 0.0)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x, tol))
    }

    /// Largest violation over all halfspaces (`-inf` for the whole space).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.violation(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Adds `h` unless a halfspace with the same normalized data is present.
    /// Returns whether the constraint list grew.
    pub fn push_unique(&mut self, h: Halfspace, tol: f64) -> Result<bool> {
        if h.normal.len() != self.ambient_dim {
            return Err(Error::input("halfspace dimension mismatch"));
        }
        let hn = h.normalize()?;
        let dup = self.halfspaces.iter().any(|g| {
            g.normalize()
                .map(|g| {
                    (g.offset - hn.offset).abs() <= tol
                        && g.normal
                            .iter()
                            .zip(&hn.normal)
                            .all(|(a, b)| (a - b).abs() <= tol)
                })
                .unwrap_or(false)
        });
        if dup {
            return Ok(false);
        }
        self.halfspaces.push(h);
        Ok(true)
    }
}

/// A polytope given by (a superset of) its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolytope {
    ambient_dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl VPolytope {
    pub fn new(ambient_dim: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(v) = vertices.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::input(format!(
                "vertex has length {}, expected {ambient_dim}",
                v.len()
            )));
        }
        Ok(VPolytope {
            ambient_dim,
            vertices,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub(crate) fn push(&mut self, v: Vec<f64>) {
        debug_assert_eq!(v.len(), self.ambient_dim);
        self.vertices.push(v);
    }
}

/// A finitely generated cone with unit-norm generators.
#[derive(Debug, Clone, PartialEq)]
pub struct VCone {
    ambient_dim: usize,
    rays: Vec<Vec<f64>>,
}

impl VCone {
    /// Normalizes and deduplicates the given directions. Zero directions are
    /// rejected.
    pub fn new(ambient_dim: usize, rays: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let mut unit = Vec::with_capacity(rays.len());
        for r in rays {
            if r.len() != ambient_dim {
                return Err(Error::input(format!(
                    "ray has length {}, expected {ambient_dim}",
                    r.len()
                )));
            }
            let n = norm2(&r);
            if !(n > tol) || !n.is_finite() {
                return Err(Error::DegenerateInput("zero or non-finite ray".into()));
            }
            unit.push(r.iter().map(|v| v / n).collect());
        }
        Ok(VCone {
            ambient_dim,
            rays: dedup_points(unit, tol),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rays(&self) -> &[Vec<f64>] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Adds a direction (normalized). Returns false for duplicates.
    pub fn push(&mut self, d: &[f64], tol: f64) -> Result<bool> {
        let n = norm2(d);
        if !(n > tol) {
            return Err(Error::DegenerateInput("zero ray".into()));
        }
        let r: Vec<f64> = d.iter().map(|v| v / n).collect();
        if self
            .rays
            .iter()
            .any(|q| q.iter().zip(&r).all(|(a, b)| (a - b).abs() <= tol))
        {
            return Ok(false);
        }
        self.rays.push(r);
        Ok(true)
    }

    /// Drops generators that are non-negative combinations of the others.
    pub fn reduce_to_frame(&self, tol_lp: f64) -> VCone {
        let mut keep: Vec<Vec<f64>> = self.rays.clone();
        let mut i = 0;
        while i < keep.len() {
            let others: Vec<Vec<f64>> = keep
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, r)| r.clone())
                .collect();
            if !others.is_empty() {
                let (res, _) = lp::min_l1_residual(&others, &keep[i]);
                if res <= tol_lp {
                    keep.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        keep.sort_by(|a, b| lex_cmp(a, b));
        VCone {
            ambient_dim: self.ambient_dim,
            rays: keep,
        }
    }
}

/// `d ∈ cone(K)`, decided by minimizing `‖Σλᵢrᵢ − d‖₁` over `λ ≥ 0`.
pub fn cone_membership(d: &[f64], k: &VCone, tol_lp: f64) -> bool {
    let scale = norm2(d).max(1.0);
    if norm2(d) == 0.0 {
        return true;
    }
    if k.rays.is_empty() {
        return false;
    }
    let (res, _) = lp::min_l1_residual(&k.rays, d);
    res <= tol_lp * scale
}

/// One supporting halfspace produced by a dual ray-shooting solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCut {
    /// Unnormalized dual vector `w*`.
    pub normal: Vec<f64>,
    /// `A₀ · U*`; the set lies in `{x | w*ᵀx ≤ offset}`.
    pub offset: f64,
    /// Start point of the ray-shooting problem.
    pub origin: Vec<f64>,
    /// Direction of the ray-shooting problem.
    pub direction: Vec<f64>,
}

/// Inner (rays) and outer (homogeneous halfspaces) approximations of a
/// recession cone, with the run's certificate and counters.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub inner: VCone,
    pub outer: HPolyhedron,
    pub epsilon_certified: f64,
    pub iterations: usize,
    pub subproblem_count: usize,
    /// The algorithm's own stopping certificate held on exit.
    pub certificate_met: bool,
    /// Every supporting halfspace computed during the run, in order.
    pub cuts: Vec<SupportCut>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_scales_offset() {
        let h = Halfspace::new(vec![3.0, 4.0], 10.0).normalize().unwrap();
        assert!((h.normal[0] - 0.6).abs() < 1e-15 && (h.normal[1] - 0.8).abs() < 1e-15);
        assert!((h.offset - 2.0).abs() < 1e-15);
        assert!(matches!(
            Halfspace::new(vec![0.0, 0.0], 1.0).normalize(),
            Err(Error::DegenerateInput(_))
        ));
        let u = Halfspace::new(vec![1.0, 0.0], 0.0);
        assert_eq!(normalize(&u).unwrap(), u);
    }

    #[test]
    fn membership_basics() {
        let k = VCone::new(2, vec![vec![0.0, 1.0]], 1e-8).unwrap();
        assert!(cone_membership(&[0.0, 0.0], &k, 1e-9));
        assert!(cone_membership(&[0.0, 5.0], &k, 1e-9));
        assert!(!cone_membership(&[1.0, 1.0], &k, 1e-9));
    }

    #[test]
    fn vcone_dedups_directions() {
        let k = VCone::new(
            2,
            vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, -1.0]],
            1e-8,
        )
        .unwrap();
        assert_eq!(k.len(), 2);
        assert!(VCone::new(2, vec![vec![0.0, 0.0]], 1e-8).is_err());
    }

    #[test]
    fn frame_drops_interior_generators() {
        let k = VCone::new(
            2,
            vec![
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
                vec![1.0, 2.0],
            ],
            1e-8,
        )
        .unwrap();
        let f = k.reduce_to_frame(1e-9);
        assert_eq!(f.rays(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn push_unique_ignores_scaled_copies() {
        let mut p = HPolyhedron::new(2, vec![Halfspace::new(vec![1.0, 0.0], 1.0)]).unwrap();
        assert!(!p
            .push_unique(Halfspace::new(vec![2.0, 0.0], 2.0), 1e-9)
            .unwrap());
        assert!(p
            .push_unique(Halfspace::new(vec![0.0, 1.0], 1.0), 1e-9)
            .unwrap());
        assert_eq!(p.len(), 2);
    }
}
