//! Distances between polytopes and between ball-truncated cones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dd::double_description;
use super::projection::{min_norm_point, project_onto_generated_cone};
use super::{norm2, HPolyhedron, VCone, VPolytope};
use crate::error::{Error, Result};

/// A polyhedral cone in either representation.
#[derive(Debug, Clone, Copy)]
pub enum Cone<'a> {
    Rays(&'a VCone),
    Halfspaces(&'a HPolyhedron),
}

impl Cone<'_> {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Cone::Rays(k) => k.ambient_dim(),
            Cone::Halfspaces(h) => h.ambient_dim(),
        }
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Cone::Rays(k) => project_onto_generated_cone(k.rays(), u),
            Cone::Halfspaces(h) => {
                // Moreau: u = P_K(u) + P_{K°}(u), and K° is generated by the normals.
                let normals: Vec<Vec<f64>> =
                    h.halfspaces().iter().map(|h| h.normal.clone()).collect();
                let polar = project_onto_generated_cone(&normals, u);
                u.iter().zip(&polar).map(|(a, b)| a - b).collect()
            }
        }
    }

    /// Projection onto the cone intersected with the unit ball.
    pub fn project_truncated(&self, u: &[f64]) -> Vec<f64> {
        let p = self.project(u);
        let n = norm2(&p);
        if n > 1.0 {
            p.iter().map(|v| v / n).collect()
        } else {
            p
        }
    }

    /// Known unit vectors of the cone on the sphere: generators, or extreme
    /// rays and ± lineality directions of the H-form.
    pub fn unit_generators(&self, tol: f64) -> Vec<Vec<f64>> {
        match self {
            Cone::Rays(k) => k.rays().to_vec(),
            Cone::Halfspaces(h) => {
                let rows: Vec<Vec<f64>> = h.halfspaces().iter().map(|h| h.normal.clone()).collect();
                let dd = double_description(h.ambient_dim(), &rows, tol);
                let mut out: Vec<Vec<f64>> = dd.rays.into_iter().map(|r| r.v).collect();
                for l in dd.lineality {
                    out.push(l.iter().map(|v| -v).collect());
                    out.push(l);
                }
                out.into_iter()
                    .filter_map(|v| {
                        let n = norm2(&v);
                        (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
                    })
                    .collect()
            }
        }
    }
}

/// Distance from `v` to `conv(P)` and the nearest point.
pub fn point_polytope_distance(v: &[f64], p: &VPolytope, tol_qp: f64) -> (f64, Vec<f64>) {
    assert!(!p.is_empty(), "distance to an empty polytope");
    let shifted: Vec<Vec<f64>> = p
        .vertices()
        .iter()
        .map(|q| q.iter().zip(v).map(|(a, b)| a - b).collect())
        .collect();
    let (y, _) = min_norm_point(&shifted, tol_qp * tol_qp);
    let x: Vec<f64> = y.iter().zip(v).map(|(a, b)| a + b).collect();
    (norm2(&y), x)
}

/// Hausdorff distance between `conv(O)` and `conv(I)` when `conv(I) ⊆ conv(O)`.
/// The inclusion is checked vertexwise with tolerance `incl_tol`.
pub fn hausdorff_polytopes(
    o: &VPolytope,
    i: &VPolytope,
    tol_qp: f64,
    incl_tol: f64,
) -> Result<f64> {
    for v in i.vertices() {
        let (d, _) = point_polytope_distance(v, o, tol_qp);
        if d > incl_tol {
            return Err(Error::InvariantViolation(format!(
                "inner vertex lies {d:.3e} outside the outer polytope"
            )));
        }
    }
    Ok(o.vertices()
        .iter()
        .map(|v| point_polytope_distance(v, i, tol_qp).0)
        .fold(0.0, f64::max))
}

const MIN_PROJECTION: f64 = 1e-6;

fn one_sided_sampled(from: Cone, to: Cone, samples: usize, rng: &mut ChaCha8Rng, tol: f64) -> f64 {
    let n = from.ambient_dim();
    let dist_to = |x: &[f64]| {
        let p = to.project_truncated(x);
        x.iter()
            .zip(&p)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mut best = from
        .unit_generators(tol)
        .iter()
        .map(|x| dist_to(x))
        .fold(0.0, f64::max);
    for _ in 0..samples {
        let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let p = from.project(&u);
        let np = norm2(&p);
        // projections of directions in the polar are rounding noise
        if np <= MIN_PROJECTION {
            continue;
        }
        let x: Vec<f64> = p.iter().map(|v| v / np).collect();
        best = best.max(dist_to(&x));
    }
    best
}

/// Sampling lower estimate of `haus(K₁ ∩ B, K₂ ∩ B)`. Candidate points are the
/// cone's known unit generators plus projections of `samples` random
/// directions, normalized onto the sphere. Deterministic given `seed`.
pub fn truncated_hausdorff_estimate(k1: Cone, k2: Cone, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-12;
    let a = one_sided_sampled(k1, k2, samples, &mut rng, tol);
    let b = one_sided_sampled(k2, k1, samples, &mut rng, tol);
    a.max(b)
}

/// Upper bound on `δ(O, I)` for homogeneous `O ⊇ cone(I)`: the largest
/// distance from a nonzero vertex of `O ∩ [−1,1]ⁿ` to `cone(I)`.
///
/// Every `x ∈ O ∩ B` is a convex combination of box vertices, so the matching
/// combination of their projections lies in `cone(I)` within that distance,
/// and the ball projection is non-expansive.
pub fn certified_cone_gap(o: &HPolyhedron, i: &VCone, tol_geom: f64) -> Result<f64> {
    let verts = super::box_truncated_vertices(o, tol_geom)?;
    let k = Cone::Rays(i);
    Ok(verts
        .iter()
        .map(|v| {
            let p = k.project(v);
            v.iter()
                .zip(&p)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedral::Halfspace;

    fn square() -> VPolytope {
        VPolytope::new(
            2,
            vec![
                vec![-1.0, -1.0],
                vec![-1.0, 1.0],
                vec![1.0, -1.0],
                vec![1.0, 1.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn distance_inside_and_to_segment() {
        let (d, x) = point_polytope_distance(&[0.2, 0.3], &square(), 1e-10);
        assert!(d < 1e-12);
        assert!((x[0] - 0.2).abs() < 1e-12 && (x[1] - 0.3).abs() < 1e-12);
        let seg = VPolytope::new(2, vec![vec![0.0, -1.0], vec![0.0, 1.0]]).unwrap();
        let (d, x) = point_polytope_distance(&[2.0, 0.0], &seg, 1e-10);
        assert!((d - 2.0).abs() < 1e-12);
        assert!(x[0].abs() < 1e-12 && x[1].abs() < 1e-12);
    }

    #[test]
    fn hausdorff_of_square_and_center() {
        let c = VPolytope::new(2, vec![vec![0.0, 0.0]]).unwrap();
        let h = hausdorff_polytopes(&square(), &c, 1e-10, 1e-8).unwrap();
        assert!((h - 2f64.sqrt()).abs() < 1e-12);
        assert!(hausdorff_polytopes(&square(), &square(), 1e-10, 1e-8).unwrap() < 1e-12);
        let far = VPolytope::new(2, vec![vec![3.0, 0.0]]).unwrap();
        assert!(matches!(
            hausdorff_polytopes(&square(), &far, 1e-10, 1e-8),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn ray_versus_halfplane() {
        let ray = VCone::new(2, vec![vec![0.0, 1.0]], 1e-12).unwrap();
        let half = HPolyhedron::new(2, vec![Halfspace::new(vec![0.0, -1.0], 0.0)]).unwrap();
        let est =
            truncated_hausdorff_estimate(Cone::Rays(&ray), Cone::Halfspaces(&half), 10_000, 3);
        assert!(est > 0.9 && est <= 1.0 + 1e-12, "{est}");
        let same =
            truncated_hausdorff_estimate(Cone::Halfspaces(&half), Cone::Halfspaces(&half), 1000, 3);
        assert!(same < 1e-9);
    }

    #[test]
    fn halfspace_projection_matches_closed_form() {
        let half = HPolyhedron::new(2, vec![Halfspace::new(vec![0.0, -1.0], 0.0)]).unwrap();
        let p = Cone::Halfspaces(&half).project(&[3.0, -2.0]);
        assert!((p[0] - 3.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn certified_gap_orthant() {
        let o = HPolyhedron::new(
            2,
            vec![
                Halfspace::new(vec![-1.0, 0.0], 0.0),
                Halfspace::new(vec![0.0, -1.0], 0.0),
            ],
        )
        .unwrap();
        let full = VCone::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1e-12).unwrap();
        assert!(certified_cone_gap(&o, &full, 1e-9).unwrap() < 1e-12);
        let diag = VCone::new(2, vec![vec![1.0, 1.0]], 1e-12).unwrap();
        // vertex (1,0) is 1/√2 away from the diagonal ray
        let g = certified_cone_gap(&o, &diag, 1e-9).unwrap();
        assert!((g - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
