//! Small instances with known recession cones, plus seeded generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{MatrixPencil, ShadowInstance, Spectrahedron, SymMatrix};

fn sym(rows: &[&[f64]]) -> SymMatrix {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), 0.0)
        .expect("hand-written symmetric matrix")
}

/// `[[x₁, x₂],[x₂, x₃]] ⪰ 0`: the 2×2 PSD cone in `R³`.
pub fn psd_cone_2x2() -> Spectrahedron {
    let pencil = MatrixPencil::new(vec![
        sym(&[&[1.0, 0.0], &[0.0, 0.0]]),
        sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
        sym(&[&[0.0, 0.0], &[0.0, 1.0]]),
    ])
    .expect("consistent pencil");
    Spectrahedron::new(pencil, SymMatrix::zeros(2)).expect("consistent spectrahedron")
}

/// `[[x₂, x₁],[x₁, 1]] ⪰ 0`, the epigraph of `x₁²`. Its recession cone is the
/// ray through `(0, 1)`, which has empty interior.
pub fn epigraph() -> Spectrahedron {
    let pencil = MatrixPencil::new(vec![
        sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
        sym(&[&[1.0, 0.0], &[0.0, 0.0]]),
    ])
    .expect("consistent pencil");
    Spectrahedron::new(pencil, sym(&[&[0.0, 0.0], &[0.0, 1.0]])).expect("consistent spectrahedron")
}

/// `diag(x₁, …, xₙ) ⪰ 0`: the nonnegative orthant.
pub fn orthant(n: usize) -> Spectrahedron {
    let mats = (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            SymMatrix::diagonal(&d)
        })
        .collect();
    Spectrahedron::new(
        MatrixPencil::new(mats).expect("consistent pencil"),
        SymMatrix::zeros(n),
    )
    .expect("consistent spectrahedron")
}

/// `[[1+x₁, x₂],[x₂, 1−x₁]] ⪰ 0`: the closed unit disk.
pub fn unit_disk() -> Spectrahedron {
    let pencil = MatrixPencil::new(vec![
        sym(&[&[1.0, 0.0], &[0.0, -1.0]]),
        sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
    ])
    .expect("consistent pencil");
    Spectrahedron::new(pencil, SymMatrix::identity(2)).expect("consistent spectrahedron")
}

/// A shadow together with the data both algorithms need.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowCase {
    pub shadow: ShadowInstance,
    pub interior_point: Vec<f64>,
    pub lift_witness: Vec<f64>,
    pub recession_interior_direction: Vec<f64>,
}

/// `{x ∈ R² | ∃y: [[1+y₁, y₂],[y₂, 1−y₁]] ⪰ 0, x₂ − y₂ ≥ 0}` = `{x₂ ≥ −1}`,
/// with recession cone `{x₂ ≥ 0}` (not pointed).
pub fn halfplane_shadow() -> ShadowCase {
    let z3 = SymMatrix::zeros(3);
    let mut a2 = z3.clone();
    a2.set(2, 2, 1.0);
    let mut b1 = z3.clone();
    b1.set(0, 0, 1.0);
    b1.set(1, 1, -1.0);
    let mut b2 = z3.clone();
    b2.set(1, 0, 1.0);
    b2.set(2, 2, -1.0);
    let constant = SymMatrix::diagonal(&[1.0, 1.0, 0.0]);
    let shadow = ShadowInstance::new(
        MatrixPencil::new(vec![z3.clone(), a2]).expect("consistent pencil"),
        MatrixPencil::new(vec![b1, b2]).expect("consistent pencil"),
        constant,
    )
    .expect("consistent shadow");
    ShadowCase {
        shadow,
        interior_point: vec![0.0, 0.0],
        lift_witness: vec![0.0, -0.5],
        recession_interior_direction: vec![0.0, 0.5],
    }
}

/// `{x₁ | ∃y: [[y, x₁],[x₁, 1]] ⪰ 0}` = `R`, violating `S ≠ Rⁿ`.
pub fn full_line_shadow() -> ShadowCase {
    let shadow = ShadowInstance::new(
        MatrixPencil::new(vec![sym(&[&[0.0, 1.0], &[1.0, 0.0]])]).expect("consistent pencil"),
        MatrixPencil::new(vec![sym(&[&[1.0, 0.0], &[0.0, 0.0]])]).expect("consistent pencil"),
        sym(&[&[0.0, 0.0], &[0.0, 1.0]]),
    )
    .expect("consistent shadow");
    ShadowCase {
        shadow,
        interior_point: vec![0.0],
        lift_witness: vec![1.0],
        recession_interior_direction: vec![0.5],
    }
}

/// Generated instance families with known recession cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Random positive diagonal pencils: the orthant.
    Diagonal,
    /// A rotated second-order cone `{x | ‖(Rx)₂..‖ ≤ (Rx)₁}`.
    RotatedSoc,
    /// A rotated second-order cone plus a bounded lifted ball.
    Lifted,
}

/// A generated instance with the data both algorithms need.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub shadow: ShadowInstance,
    pub interior_point: Vec<f64>,
    pub lift_witness: Vec<f64>,
    pub recession_interior_direction: Vec<f64>,
    /// Orthogonal map used by the second-order families (identity otherwise).
    pub rotation: Vec<Vec<f64>>,
}

fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    (0..n)
        .map(|i| (0..n).map(|j| q[(i, j)]).collect())
        .collect()
}

/// Arrow matrix `[[t, uᵀ],[u, tI]]` with `(t, u) = Rx` as a pencil in `x`,
/// padded to `ell`.
fn arrow_pencil(rot: &[Vec<f64>], ell: usize) -> Vec<SymMatrix> {
    let n = rot.len();
    (0..n)
        .map(|k| {
            let mut a = SymMatrix::zeros(ell);
            // (Rx)_i = Σ_k R[i][k] x_k
            for i in 0..n {
                a.set(i, i, rot[0][k]);
            }
            for i in 1..n {
                a.set(i, 0, rot[i][k]);
            }
            a
        })
        .collect()
}

/// Seeded instance of `family` in `R^n` (`n ≥ 2` for the second-order
/// families) with pencil size at least `ell`.
pub fn generate(family: Family, n: usize, ell: usize, seed: u64) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        Family::Diagonal => {
            let ell = ell.max(n);
            let mats = (0..n)
                .map(|i| {
                    let mut d = vec![0.0; ell];
                    d[i] = rng.random_range(0.5..2.0);
                    SymMatrix::diagonal(&d)
                })
                .collect();
            let mut c = vec![0.0; ell];
            for v in c.iter_mut().skip(n) {
                *v = 1.0;
            }
            let shadow = ShadowInstance::new(
                MatrixPencil::new(mats).expect("consistent pencil"),
                MatrixPencil::empty(ell),
                SymMatrix::diagonal(&c),
            )
            .expect("consistent shadow");
            let d = 0.5 / (n as f64).sqrt();
            Generated {
                shadow,
                interior_point: vec![1.0; n],
                lift_witness: Vec::new(),
                recession_interior_direction: vec![d; n],
                rotation: identity(n),
            }
        }
        Family::RotatedSoc | Family::Lifted => {
            let rot = random_rotation(n, &mut rng);
            let ell_a = ell.max(n);
            let mut mats = arrow_pencil(&rot, ell_a);
            let mut constant = SymMatrix::identity(ell_a);
            let m = if family == Family::Lifted {
                rng.random_range(1..=2usize)
            } else {
                0
            };
            let mut bmats = Vec::new();
            if m > 0 {
                // add a block [[1, yᵀ],[y, I_m]] ⪰ 0 (‖y‖ ≤ 1) and couple y into
                // the cone block through a random map P: S = K + P·ball
                let total = ell_a + m + 1;
                let p: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..m).map(|_| rng.random_range(-0.5..0.5)).collect())
                    .collect();
                let embed = |a: &SymMatrix| {
                    let mut out = SymMatrix::zeros(total);
                    for i in 0..ell_a {
                        for j in 0..=i {
                            out.set(i, j, a.get(i, j));
                        }
                    }
                    out
                };
                let a_mats: Vec<SymMatrix> = mats.iter().map(embed).collect();
                // B_j = −Σ_k P[k][j] A_k on the cone block, plus the ball block
                for j in 0..m {
                    let mut b = SymMatrix::zeros(total);
                    for (k, ak) in a_mats.iter().enumerate() {
                        b.axpy(-p[k][j], ak);
                    }
                    b.set(ell_a + 1 + j, ell_a, 1.0);
                    bmats.push(b);
                }
                let mut c = embed(&constant);
                for i in ell_a..total {
                    c.set(i, i, 1.0);
                }
                mats = a_mats;
                constant = c;
            }
            let dim = constant.dim();
            let shadow = ShadowInstance::new(
                MatrixPencil::new(mats).expect("consistent pencil"),
                if bmats.is_empty() {
                    MatrixPencil::empty(dim)
                } else {
                    MatrixPencil::new(bmats).expect("consistent pencil")
                },
                constant,
            )
            .expect("consistent shadow");
            // axis of the cone: x with Rx = e₁, i.e. the first row of R
            let axis = rot[0].clone();
            Generated {
                shadow,
                interior_point: vec![0.0; n],
                lift_witness: vec![0.0; m],
                recession_interior_direction: axis.iter().map(|v| 0.5 * v).collect(),
                rotation: rot,
            }
        }
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_psd, min_eigenvalue};

    #[test]
    fn halfplane_shadow_membership() {
        let c = halfplane_shadow();
        let s = &c.shadow;
        // (x₁, −1) is feasible with y = (0, −1)
        assert!(is_psd(
            &s.evaluate(&[5.0, -1.0], &[0.0, -1.0]).unwrap(),
            1e-12
        ));
        assert!(
            min_eigenvalue(&s.evaluate(&c.interior_point, &c.lift_witness).unwrap()).unwrap() > 0.0
        );
    }

    #[test]
    fn rotated_soc_axis_is_interior() {
        for seed in 0..5 {
            let g = generate(Family::RotatedSoc, 3, 3, seed);
            let axis = &g.recession_interior_direction;
            let m = crate::linalg::pencil_eval(g.shadow.pencil_a(), axis).unwrap();
            // A(axis) = 0.5·I on the arrow block
            assert!((min_eigenvalue(&m).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn lifted_family_contains_the_cone_plus_ball() {
        let g = generate(Family::Lifted, 3, 3, 4);
        let s = &g.shadow;
        assert!(s.nlift() >= 1);
        let y = &g.lift_witness;
        assert!(min_eigenvalue(&s.evaluate(&g.interior_point, y).unwrap()).unwrap() > 0.0);
        let far: Vec<f64> = g
            .recession_interior_direction
            .iter()
            .map(|v| 100.0 * v)
            .collect();
        assert!(min_eigenvalue(&s.evaluate(&far, y).unwrap()).unwrap() > 0.0);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            generate(Family::Lifted, 3, 3, 9),
            generate(Family::Lifted, 3, 3, 9)
        );
        assert_ne!(
            generate(Family::RotatedSoc, 3, 3, 1),
            generate(Family::RotatedSoc, 3, 3, 2)
        );
    }
}
