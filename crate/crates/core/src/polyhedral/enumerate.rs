//! Vertex and facet enumeration on top of the double description method.

use super::dd::double_description;
use super::{dedup_points, lex_cmp, norm2, norm_inf, HPolyhedron, Halfspace, VCone, VPolytope};
use crate::error::{Error, Result};

/// Vertices of a bounded polyhedron, each with the indices of the halfspaces
/// active at it (residual within `tol` after normalizing each row).
pub fn vertex_enumeration_with_active(
    p: &HPolyhedron,
    tol: f64,
) -> Result<Vec<(Vec<f64>, Vec<usize>)>> {
    let n = p.ambient_dim();
    if n == 0 {
        return Err(Error::input("ambient dimension must be positive"));
    }
    // Homogenize x = z/s: rows (a, −b) ≤ 0 together with −s ≤ 0 first.
    let mut rows = Vec::with_capacity(p.len() + 1);
    let mut s_row = vec![0.0; n + 1];
    s_row[n] = -1.0;
    rows.push(s_row);
    for h in p.halfspaces() {
        if !h.offset.is_finite() || h.normal.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("halfspace data must be finite"));
        }
        let mut r = h.normal.clone();
        r.push(-h.offset);
        rows.push(r);
    }
    let cone = double_description(n + 1, &rows, tol);

    let mut verts = Vec::new();
    let mut has_direction = !cone.lineality.is_empty();
    for ray in &cone.rays {
        let s = ray.v[n];
        if s > tol {
            verts.push(ray.v[..n].iter().map(|z| z / s).collect::<Vec<f64>>());
        } else {
            has_direction = true;
        }
    }
    if verts.is_empty() {
        return Err(Error::EmptyPolyhedron);
    }
    if has_direction {
        return Err(Error::UnboundedPolyhedron);
    }
    let verts = dedup_points(verts, tol.max(1e-12) * 10.0);

    let normalized: Vec<Option<Halfspace>> =
        p.halfspaces().iter().map(|h| h.normalize().ok()).collect();
    let scale = verts.iter().map(|v| norm_inf(v)).fold(1.0, f64::max);
    Ok(verts
        .into_iter()
        .map(|v| {
            let active = normalized
                .iter()
                .enumerate()
                .filter_map(|(i, h)| match h {
                    Some(h) if h.violation(&v).abs() <= 10.0 * tol * scale => Some(i),
                    _ => None,
                })
                .collect();
            (v, active)
        })
        .collect())
}

/// Vertex set of a bounded polyhedron, sorted lexicographically.
pub fn vertex_enumeration(p: &HPolyhedron, tol: f64) -> Result<VPolytope> {
    let verts = vertex_enumeration_with_active(p, tol)?
        .into_iter()
        .map(|(v, _)| v)
        .collect();
    VPolytope::new(p.ambient_dim(), verts)
}

/// Irredundant outward unit-normal facets of `conv(P)`; `P` must be
/// full-dimensional.
pub fn facet_enumeration(p: &VPolytope, tol: f64) -> Result<HPolyhedron> {
    let n = p.ambient_dim();
    if p.len() < n + 1 {
        return Err(Error::DegenerateInput(format!(
            "{} points cannot span R^{n}",
            p.len()
        )));
    }
    // (a, b) with aᵀpᵢ − b ≤ 0 for every point.
    let rows: Vec<Vec<f64>> = p
        .vertices()
        .iter()
        .map(|v| {
            let mut r = v.clone();
            r.push(-1.0);
            r
        })
        .collect();
    let cone = double_description(n + 1, &rows, tol);
    if !cone.lineality.is_empty() {
        return Err(Error::DegenerateInput(
            "points lie in a proper affine subspace".into(),
        ));
    }
    let mut facets: Vec<Vec<f64>> = Vec::new();
    for ray in &cone.rays {
        let a = &ray.v[..n];
        let na = norm2(a);
        if na <= tol {
            continue;
        }
        let mut f: Vec<f64> = a.iter().map(|x| x / na).collect();
        f.push(ray.v[n] / na);
        facets.push(f);
    }
    let facets = dedup_points(facets, tol.max(1e-12) * 10.0);
    let hs = facets
        .into_iter()
        .map(|mut f| {
            let b = f.pop().unwrap_or(0.0);
            Halfspace::new(f, b)
        })
        .collect();
    HPolyhedron::new(n, hs)
}

/// `cone(P)` as normalized generators; near-zero vertices are skipped.
pub fn cone_hull(p: &VPolytope, tol: f64) -> Result<VCone> {
    let mut rays = Vec::with_capacity(p.len());
    for v in p.vertices() {
        if norm2(v) < tol {
            log::warn!("skipping near-zero vertex in conical hull");
            continue;
        }
        rays.push(v.clone());
    }
    if rays.is_empty() {
        return Err(Error::DegenerateInput(
            "conical hull has no nonzero generator".into(),
        ));
    }
    VCone::new(p.ambient_dim(), rays, tol)
}

/// `cone(P)` for a bounded polyhedron in H-form, as homogeneous halfspaces.
///
/// The facet normals are the extreme rays of the polar `{a | aᵀv ≤ 0}` over
/// the normalized vertices `v`; a lineality direction `l` of the polar
/// contributes both `l` and `−l`. Returns no halfspaces when the origin is
/// interior.
pub fn cone_of_polytope(p: &HPolyhedron, tol: f64) -> Result<HPolyhedron> {
    let n = p.ambient_dim();
    let rows: Vec<Vec<f64>> = vertex_enumeration(p, tol)?
        .vertices()
        .iter()
        .filter_map(|v| {
            let nv = norm2(v);
            (nv > tol).then(|| v.iter().map(|x| x / nv).collect())
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::DegenerateInput("polytope is the origin".into()));
    }
    let polar = double_description(n, &rows, tol);
    let mut normals: Vec<Vec<f64>> = polar.rays.into_iter().map(|r| r.v).collect();
    for l in polar.lineality {
        normals.push(l.iter().map(|x| -x).collect());
        normals.push(l);
    }
    let normals = dedup_points(
        normals
            .into_iter()
            .filter_map(|a| {
                let na = norm2(&a);
                (na > tol).then(|| a.iter().map(|x| x / na).collect())
            })
            .collect(),
        tol.max(1e-12) * 10.0,
    );
    HPolyhedron::new(
        n,
        normals
            .into_iter()
            .map(|a| Halfspace::new(a, 0.0))
            .collect(),
    )
}

/// Nonzero vertices of `{x ∈ O | ‖x‖∞ ≤ 1}` for a homogeneous `O`, sorted
/// lexicographically. A vertex counts as zero when its ∞-norm is below `tol`.
pub fn box_truncated_vertices(o: &HPolyhedron, tol: f64) -> Result<Vec<Vec<f64>>> {
    if !o.is_cone() {
        return Err(Error::input(
            "box truncation needs a homogeneous polyhedron",
        ));
    }
    let n = o.ambient_dim();
    let mut hs = o.halfspaces().to_vec();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            hs.push(Halfspace::new(e, 1.0));
        }
    }
    let boxed = HPolyhedron::new(n, hs)?;
    let mut out: Vec<Vec<f64>> = vertex_enumeration(&boxed, tol)?
        .vertices()
        .iter()
        .filter(|v| norm_inf(v) >= tol)
        .cloned()
        .collect();
    out.sort_by(|a, b| lex_cmp(a, b));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    fn hs(rows: &[(&[f64], f64)]) -> HPolyhedron {
        let n = rows[0].0.len();
        HPolyhedron::new(
            n,
            rows.iter()
                .map(|(a, b)| Halfspace::new(a.to_vec(), *b))
                .collect(),
        )
        .unwrap()
    }

    fn close_sets(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
        a.len() == b.len()
            && a.iter().all(|p| {
                b.iter()
                    .any(|q| p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol))
            })
    }

    #[test]
    fn unit_square_vertices() {
        let p = hs(&[
            (&[1.0, 0.0], 1.0),
            (&[-1.0, 0.0], 1.0),
            (&[0.0, 1.0], 1.0),
            (&[0.0, -1.0], 1.0),
        ]);
        let v = vertex_enumeration(&p, TOL).unwrap();
        let expect = vec![
            vec![-1.0, -1.0],
            vec![-1.0, 1.0],
            vec![1.0, -1.0],
            vec![1.0, 1.0],
        ];
        assert!(close_sets(v.vertices(), &expect, 1e-12));
    }

    #[test]
    fn simplex_vertices() {
        let p = hs(&[(&[-1.0, 0.0], 0.0), (&[0.0, -1.0], 0.0), (&[1.0, 1.0], 1.0)]);
        let v = vertex_enumeration(&p, TOL).unwrap();
        let expect = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(close_sets(v.vertices(), &expect, 1e-12));
    }

    #[test]
    fn unbounded_and_empty_are_reported() {
        let half = hs(&[(&[0.0, -1.0], 0.0)]);
        assert!(matches!(
            vertex_enumeration(&half, TOL),
            Err(Error::UnboundedPolyhedron)
        ));
        let wedge = hs(&[(&[-1.0, 0.0], 0.0), (&[0.0, -1.0], 0.0)]);
        assert!(matches!(
            vertex_enumeration(&wedge, TOL),
            Err(Error::UnboundedPolyhedron)
        ));
        let empty = hs(&[(&[1.0], -1.0), (&[-1.0], -1.0)]);
        assert!(matches!(
            vertex_enumeration(&empty, TOL),
            Err(Error::EmptyPolyhedron)
        ));
    }

    #[test]
    fn degenerate_apex_reported_once() {
        // square pyramid: apex has four active facets
        let p = hs(&[
            (&[1.0, 0.0, 1.0], 1.0),
            (&[-1.0, 0.0, 1.0], 1.0),
            (&[0.0, 1.0, 1.0], 1.0),
            (&[0.0, -1.0, 1.0], 1.0),
            (&[0.0, 0.0, -1.0], 0.0),
        ]);
        let v = vertex_enumeration_with_active(&p, TOL).unwrap();
        assert_eq!(v.len(), 5);
        let apex = v.iter().find(|(x, _)| (x[2] - 1.0).abs() < 1e-9).unwrap();
        assert_eq!(apex.1, vec![0, 1, 2, 3]);
    }

    #[test]
    fn triangle_facets() {
        let p = VPolytope::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let h = facet_enumeration(&p, TOL).unwrap();
        assert_eq!(h.len(), 3);
        let s = 0.5f64.sqrt();
        let got: Vec<Vec<f64>> = h
            .halfspaces()
            .iter()
            .map(|h| vec![h.normal[0], h.normal[1], h.offset])
            .collect();
        let expect = vec![vec![-1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![s, s, s]];
        assert!(close_sets(&got, &expect, 1e-12));
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let p = VPolytope::new(2, vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            facet_enumeration(&p, TOL),
            Err(Error::DegenerateInput(_))
        ));
        let p = VPolytope::new(2, vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(
            facet_enumeration(&p, TOL),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn interior_points_do_not_create_facets() {
        let p = VPolytope::new(
            2,
            vec![
                vec![0.0, 0.0],
                vec![2.0, 0.0],
                vec![0.0, 2.0],
                vec![2.0, 2.0],
                vec![1.0, 1.0],
                vec![1.0, 0.0],
            ],
        )
        .unwrap();
        assert_eq!(facet_enumeration(&p, TOL).unwrap().len(), 4);
    }

    #[test]
    fn cone_hull_collapses_directions() {
        let p = VPolytope::new(2, vec![vec![0.0, 2.0]]).unwrap();
        assert_eq!(cone_hull(&p, 1e-8).unwrap().rays(), &[vec![0.0, 1.0]]);
        let p = VPolytope::new(2, vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, -1.0]]).unwrap();
        let k = cone_hull(&p, 1e-8).unwrap();
        let s = 0.5f64.sqrt();
        assert!(close_sets(k.rays(), &[vec![s, s], vec![s, -s]], 1e-12));
        let z = VPolytope::new(2, vec![vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            cone_hull(&z, 1e-8),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn box_vertices_of_upper_halfplane() {
        let o = hs(&[(&[0.0, -1.0], 0.0)]);
        let v = box_truncated_vertices(&o, 1e-8).unwrap();
        let expect = vec![
            vec![-1.0, 0.0],
            vec![-1.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        assert!(close_sets(&v, &expect, 1e-12));
    }

    #[test]
    fn box_vertices_of_wedge() {
        // cone{(1,0),(1,1)} = {x₂ ≥ 0, x₂ ≤ x₁}
        let o = hs(&[(&[0.0, -1.0], 0.0), (&[-1.0, 1.0], 0.0)]);
        let v = box_truncated_vertices(&o, 1e-8).unwrap();
        assert!(close_sets(&v, &[vec![1.0, 0.0], vec![1.0, 1.0]], 1e-12));
        assert!(box_truncated_vertices(&hs(&[(&[1.0, 0.0], 1.0)]), 1e-8).is_err());
    }

    #[test]
    fn cone_of_shifted_square() {
        // square [1,2]×[−1/2,1/2] spans the cone |x₂| ≤ x₁/2
        let p = hs(&[
            (&[1.0, 0.0], 2.0),
            (&[-1.0, 0.0], -1.0),
            (&[0.0, 1.0], 0.5),
            (&[0.0, -1.0], 0.5),
        ]);
        let k = cone_of_polytope(&p, 1e-9).unwrap();
        assert_eq!(k.len(), 2);
        assert!(k.is_cone());
        assert!(k.contains(&[10.0, 4.9], 1e-12));
        assert!(!k.contains(&[10.0, 5.1], 1e-12));
        // origin inside: the whole space
        let sq = hs(&[
            (&[1.0, 0.0], 1.0),
            (&[-1.0, 0.0], 1.0),
            (&[0.0, 1.0], 1.0),
            (&[0.0, -1.0], 1.0),
        ]);
        assert!(cone_of_polytope(&sq, 1e-9).unwrap().is_empty());
    }
}
