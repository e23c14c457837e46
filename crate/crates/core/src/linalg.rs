//! Symmetric matrices, linear matrix pencils and the spectrahedra built from them.
//!
//! A pencil `A(x) = Σ xᵢ Aᵢ` together with a constant matrix `A₀` describes the
//! spectrahedron `{x | A(x) + A₀ ⪰ 0}`. A second pencil `B(y)` in lifting
//! variables turns it into the shadow `{x | ∃y: A(x) + B(y) + A₀ ⪰ 0}`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::polyhedral::Halfspace;

/// Dense symmetric matrix with a single stored copy per unordered index pair
/// (row-major lower triangle).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "symmetric matrix must have dimension >= 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds a matrix from full dense rows. Rows must be square, finite and
    /// symmetric within `sym_tol`; the stored value is the average of the two
    /// mirrored entries.
    pub fn from_rows(rows: &[Vec<f64>], sym_tol: f64) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::input("matrix must have at least one row"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::input(format!(
                    "row {i} has length {}, expected {dim}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::input(format!("entry ({i},{j}) is not finite")));
            }
        }
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                let (a, b) = (rows[i][j], rows[j][i]);
                let scale = 1.0f64.max(a.abs()).max(b.abs());
                if (a - b).abs() > sym_tol * scale {
                    return Err(Error::input(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                // halve before adding so entries near f64::MAX do not overflow
                m.set(i, j, if a == b { a } else { 0.5 * a + 0.5 * b });
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[tri_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[tri_index(i, j)] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows());
        for i in 0..m.nrows() {
            for j in 0..=i {
                out.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &SymMatrix) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Trace inner product `A · B = tr(AB)`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let p = self.get(i, j) * other.get(i, j);
                s += if i == j { p } else { 2.0 * p };
            }
        }
        s
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Block-diagonal matrix with `blocks` along the diagonal.
    pub fn block_diag(blocks: &[&SymMatrix]) -> SymMatrix {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut out = SymMatrix::zeros(dim);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..=i {
                    out.set(off + i, off + j, b.get(i, j));
                }
            }
            off += b.dim;
        }
        out
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let mut out = SymMatrix::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().take(a + 1) {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    /// Euclidean projection onto the PSD cone (negative eigenvalues clipped).
    pub fn psd_part(&self) -> SymMatrix {
        let eig = SymmetricEigen::new(self.to_dmatrix());
        let mut vals = eig.eigenvalues.clone();
        for v in vals.iter_mut() {
            *v = v.max(0.0);
        }
        let q = &eig.eigenvectors;
        let m = q * DMatrix::from_diagonal(&vals) * q.transpose();
        SymMatrix::from_dmatrix(&m)
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::input("matrix has non-finite entries"));
    }
    if m.dim == 1 {
        return Ok(m.get(0, 0));
    }
    let eig = SymmetricEigen::new(m.to_dmatrix());
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// `M ⪰ -tol·I`. Non-finite matrices are never PSD.
pub fn is_psd(m: &SymMatrix, tol: f64) -> bool {
    min_eigenvalue(m).map(|l| l >= -tol).unwrap_or(false)
}

/// Linear map `x ↦ Σ xᵢ Aᵢ` into `S^ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPencil {
    dim: usize,
    mats: Vec<SymMatrix>,
}

impl MatrixPencil {
    pub fn new(mats: Vec<SymMatrix>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::input("pencil needs at least one matrix"))?;
        let dim = first.dim();
        if let Some(i) = mats.iter().position(|m| m.dim() != dim) {
            return Err(Error::input(format!(
                "pencil matrix {i} has dimension {}, expected {dim}",
                mats[i].dim()
            )));
        }
        Ok(MatrixPencil { dim, mats })
    }

    /// Pencil with no variables; used for shadows without lifting variables.
    pub fn empty(dim: usize) -> Self {
        MatrixPencil {
            dim,
            mats: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nvars(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[SymMatrix] {
        &self.mats
    }

    pub fn mat(&self, i: usize) -> &SymMatrix {
        &self.mats[i]
    }

    /// Adjoint map `U ↦ (A₁·U, …, Aₙ·U)`.
    pub fn adjoint(&self, u: &SymMatrix) -> Vec<f64> {
        self.mats.iter().map(|a| a.dot(u)).collect()
    }

    pub fn scaled(&self, s: f64) -> MatrixPencil {
        MatrixPencil {
            dim: self.dim,
            mats: self.mats.iter().map(|m| m.scaled(s)).collect(),
        }
    }
}

/// `Σ xᵢ Aᵢ`.
pub fn pencil_eval(p: &MatrixPencil, x: &[f64]) -> Result<SymMatrix> {
    if x.len() != p.nvars() {
        return Err(Error::input(format!(
            "point has {} coordinates, pencil has {} variables",
            x.len(),
            p.nvars()
        )));
    }
    let mut out = SymMatrix::zeros(p.dim);
    for (xi, a) in x.iter().zip(&p.mats) {
        if *xi != 0.0 {
            out.axpy(*xi, a);
        }
    }
    Ok(out)
}

/// `{x | A(x) + A₀ ⪰ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrahedron {
    pencil: MatrixPencil,
    constant: SymMatrix,
}

impl Spectrahedron {
    pub fn new(pencil: MatrixPencil, constant: SymMatrix) -> Result<Self> {
        if pencil.dim() != constant.dim() {
            return Err(Error::input(format!(
                "pencil dimension {} differs from constant dimension {}",
                pencil.dim(),
                constant.dim()
            )));
        }
        if pencil.nvars() == 0 {
            return Err(Error::input("spectrahedron needs at least one variable"));
        }
        Ok(Spectrahedron { pencil, constant })
    }

    pub fn pencil(&self) -> &MatrixPencil {
        &self.pencil
    }

    pub fn constant(&self) -> &SymMatrix {
        &self.constant
    }

    pub fn nvars(&self) -> usize {
        self.pencil.nvars()
    }

    pub fn dim(&self) -> usize {
        self.pencil.dim()
    }

    /// `A(x) + A₀`.
    pub fn evaluate(&self, x: &[f64]) -> Result<SymMatrix> {
        let mut m = pencil_eval(&self.pencil, x)?;
        m.axpy(1.0, &self.constant);
        Ok(m)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.evaluate(x).map(|m| is_psd(&m, tol)).unwrap_or(false)
    }

    /// Smallest eigenvalue of `A(x) + A₀`; positive exactly on the interior
    /// for strictly feasible descriptions.
    pub fn slack(&self, x: &[f64]) -> Result<f64> {
        min_eigenvalue(&self.evaluate(x)?)
    }

    /// The same set viewed as a shadow with no lifting variables.
    pub fn as_shadow(&self) -> ShadowInstance {
        ShadowInstance {
            pencil_a: self.pencil.clone(),
            pencil_b: MatrixPencil::empty(self.dim()),
            constant: self.constant.clone(),
        }
    }
}

/// The recession cone `{x | A(x) ⪰ 0}` as a spectrahedron with zero constant.
pub fn recession_spectrahedron(c: &Spectrahedron) -> Spectrahedron {
    Spectrahedron {
        pencil: c.pencil.clone(),
        constant: SymMatrix::zeros(c.dim()),
    }
}

/// `C ∩ ⋂ hs` as one spectrahedron: each halfspace `wᵀx ≤ γ` becomes a
/// trailing 1×1 diagonal block `γ − wᵀx ⪰ 0`.
pub fn intersect_halfspaces(c: &Spectrahedron, hs: &[Halfspace]) -> Result<Spectrahedron> {
    if hs.is_empty() {
        return Ok(c.clone());
    }
    let n = c.nvars();
    if let Some(h) = hs.iter().find(|h| h.normal.len() != n) {
        return Err(Error::input(format!(
            "halfspace normal has length {}, expected {n}",
            h.normal.len()
        )));
    }
    let l = c.dim();
    let dim = l + hs.len();
    let embed = |m: &SymMatrix, tail: &[f64]| {
        let mut out = SymMatrix::zeros(dim);
        for i in 0..l {
            for j in 0..=i {
                out.set(i, j, m.get(i, j));
            }
        }
        for (k, v) in tail.iter().enumerate() {
            out.set(l + k, l + k, *v);
        }
        out
    };
    let mats = (0..n)
        .map(|i| {
            let tail: Vec<f64> = hs.iter().map(|h| -h.normal[i]).collect();
            embed(c.pencil.mat(i), &tail)
        })
        .collect();
    let tail: Vec<f64> = hs.iter().map(|h| h.offset).collect();
    let constant = embed(&c.constant, &tail);
    Spectrahedron::new(MatrixPencil::new(mats)?, constant)
}

/// `{x | ∃y: A(x) + B(y) + A₀ ⪰ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowInstance {
    pencil_a: MatrixPencil,
    pencil_b: MatrixPencil,
    constant: SymMatrix,
}

impl ShadowInstance {
    pub fn new(
        pencil_a: MatrixPencil,
        pencil_b: MatrixPencil,
        constant: SymMatrix,
    ) -> Result<Self> {
        if pencil_a.nvars() == 0 {
            return Err(Error::input("shadow needs at least one projected variable"));
        }
        if pencil_a.dim() != constant.dim() || pencil_b.dim() != constant.dim() {
            return Err(Error::input(format!(
                "pencil dimensions {} / {} differ from constant dimension {}",
                pencil_a.dim(),
                pencil_b.dim(),
                constant.dim()
            )));
        }
        Ok(ShadowInstance {
            pencil_a,
            pencil_b,
            constant,
        })
    }

    pub fn pencil_a(&self) -> &MatrixPencil {
        &self.pencil_a
    }

    pub fn pencil_b(&self) -> &MatrixPencil {
        &self.pencil_b
    }

    pub fn constant(&self) -> &SymMatrix {
        &self.constant
    }

    /// Number of projected variables `n`.
    pub fn nvars(&self) -> usize {
        self.pencil_a.nvars()
    }

    /// Number of lifting variables `m`.
    pub fn nlift(&self) -> usize {
        self.pencil_b.nvars()
    }

    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    /// `A(x) + B(y) + A₀`.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<SymMatrix> {
        let mut m = pencil_eval(&self.pencil_a, x)?;
        if self.nlift() > 0 || !y.is_empty() {
            m.axpy(1.0, &pencil_eval(&self.pencil_b, y)?);
        }
        m.axpy(1.0, &self.constant);
        Ok(m)
    }

    /// The lifted spectrahedron in `(x, y)`.
    pub fn lifted(&self) -> Spectrahedron {
        let mats = self
            .pencil_a
            .mats()
            .iter()
            .chain(self.pencil_b.mats())
            .cloned()
            .collect();
        Spectrahedron {
            pencil: MatrixPencil {
                dim: self.dim(),
                mats,
            },
            constant: self.constant.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m2(a: f64, b: f64, c: f64) -> SymMatrix {
        SymMatrix::from_rows(&[vec![a, b], vec![b, c]], 0.0).unwrap()
    }

    fn epigraph_pencil() -> MatrixPencil {
        MatrixPencil::new(vec![m2(0.0, 1.0, 0.0), m2(1.0, 0.0, 0.0)]).unwrap()
    }

    fn random_sym(rng: &mut ChaCha8Rng, dim: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.set(i, j, rng.random_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn pencil_eval_at_origin_is_zero() {
        let m = pencil_eval(&epigraph_pencil(), &[0.0, 0.0]).unwrap();
        assert!(m.is_zero());
    }

    #[test]
    fn pencil_eval_epigraph() {
        let m = pencil_eval(&epigraph_pencil(), &[3.0, 5.0]).unwrap();
        assert_eq!(m.to_rows(), vec![vec![5.0, 3.0], vec![3.0, 0.0]]);
    }

    #[test]
    fn pencil_eval_matches_entrywise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mats: Vec<SymMatrix> = (0..4).map(|_| random_sym(&mut rng, 3)).collect();
            let p = MatrixPencil::new(mats.clone()).unwrap();
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = pencil_eval(&p, &x).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let mut want = 0.0;
                    for k in 0..4 {
                        want += x[k] * mats[k].to_rows()[i][j];
                    }
                    assert!((got.get(i, j) - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pencil_eval_rejects_wrong_length() {
        assert!(matches!(
            pencil_eval(&epigraph_pencil(), &[1.0]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn min_eigenvalue_cases() {
        assert!((min_eigenvalue(&SymMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-12);
        let want = (5.0 - 61f64.sqrt()) / 2.0;
        assert!((min_eigenvalue(&m2(5.0, 3.0, 0.0)).unwrap() - want).abs() < 1e-9);
        assert!((min_eigenvalue(&SymMatrix::diagonal(&[2.0, -7.0])).unwrap() + 7.0).abs() < 1e-12);
        let mut bad = SymMatrix::zeros(2);
        bad.set(0, 1, f64::NAN);
        assert!(min_eigenvalue(&bad).is_err());
    }

    #[test]
    fn psd_tests() {
        assert!(is_psd(&SymMatrix::zeros(2), 0.0));
        assert!(!is_psd(&m2(1.0, 2.0, 1.0), 1e-9));
        // boundary of the epigraph x2 >= x1^2 at (1, 1)
        let c = Spectrahedron::new(epigraph_pencil(), m2(0.0, 0.0, 1.0)).unwrap();
        assert!(is_psd(&c.evaluate(&[1.0, 1.0]).unwrap(), 1e-9));
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.1, 1.0]], 1e-12).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]], 1e-12).is_err());
    }

    #[test]
    fn dot_is_trace_product() {
        let a = m2(1.0, 2.0, 3.0);
        let b = m2(4.0, 5.0, 6.0);
        let want = (a.to_dmatrix() * b.to_dmatrix()).trace();
        assert!((a.dot(&b) - want).abs() < 1e-12);
    }

    #[test]
    fn recession_of_epigraph_drops_constant() {
        let c = Spectrahedron::new(epigraph_pencil(), m2(0.0, 0.0, 1.0)).unwrap();
        let r = recession_spectrahedron(&c);
        assert_eq!(r.pencil(), c.pencil());
        assert!(r.constant().is_zero());
        // {x | [[x2, x1],[x1, 0]] ⪰ 0} is the ray through (0, 1)
        assert!(r.contains(&[0.0, 3.0], 1e-12));
        assert!(!r.contains(&[0.1, 3.0], 1e-12));
        assert_eq!(recession_spectrahedron(&r), r);
    }

    fn psd_cone_2x2() -> Spectrahedron {
        let p = MatrixPencil::new(vec![
            m2(1.0, 0.0, 0.0),
            m2(0.0, 1.0, 0.0),
            m2(0.0, 0.0, 1.0),
        ])
        .unwrap();
        Spectrahedron::new(p, SymMatrix::zeros(2)).unwrap()
    }

    #[test]
    fn psd_cone_is_self_recessive() {
        let c = psd_cone_2x2();
        let r = recession_spectrahedron(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert_eq!(c.contains(&x, 0.0), r.contains(&x, 0.0));
        }
    }

    #[test]
    fn intersect_with_no_halfspaces_is_identity() {
        let c = psd_cone_2x2();
        assert_eq!(intersect_halfspaces(&c, &[]).unwrap(), c);
    }

    #[test]
    fn intersect_single_halfspace_matches_sign() {
        let full = Spectrahedron::new(
            MatrixPencil::new(vec![SymMatrix::zeros(1), SymMatrix::zeros(1)]).unwrap(),
            SymMatrix::zeros(1),
        )
        .unwrap();
        let h = Halfspace::new(vec![1.0, 0.0], 0.0);
        let m = intersect_halfspaces(&full, &[h]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert_eq!(m.contains(&x, 0.0), x[0] <= 0.0);
        }
    }

    #[test]
    fn intersect_rejects_bad_normal() {
        let h = Halfspace::new(vec![1.0, 0.0], 0.0);
        assert!(intersect_halfspaces(&psd_cone_2x2(), &[h]).is_err());
    }

    #[test]
    fn shadow_evaluation_and_lift() {
        // {x | ∃y: [[x, 1],[1, y]] ⪰ 0}
        let a = MatrixPencil::new(vec![m2(1.0, 0.0, 0.0)]).unwrap();
        let b = MatrixPencil::new(vec![m2(0.0, 0.0, 1.0)]).unwrap();
        let s = ShadowInstance::new(a, b, m2(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(s.evaluate(&[2.0], &[3.0]).unwrap(), m2(2.0, 1.0, 3.0));
        let lifted = s.lifted();
        assert_eq!(lifted.nvars(), 2);
        assert!(lifted.contains(&[2.0, 3.0], 0.0));
        assert!(!lifted.contains(&[-2.0, 3.0], 0.0));
    }

    #[test]
    fn psd_part_clips_negative_eigenvalues() {
        let m = m2(1.0, 2.0, 1.0).psd_part();
        assert!(min_eigenvalue(&m).unwrap() > -1e-12);
        assert!((m.get(0, 0) - 1.5).abs() < 1e-12);
        assert!((m.get(0, 1) - 1.5).abs() < 1e-12);
    }
}
