//! Nearest points in convex hulls and in finitely generated cones.

use nalgebra::{DMatrix, DVector};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(points: &[Vec<f64>], idx: &[usize], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for (&i, &w) in idx.iter().zip(weights) {
        for (xk, pk) in x.iter_mut().zip(&points[i]) {
            *xk += w * pk;
        }
    }
    x
}

/// Affine combination of `points[idx]` with minimum norm.
fn affine_min_norm(points: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            kkt[(a, b)] = dot(&points[idx[a]], &points[idx[b]]);
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| {
            kkt.svd(true, true)
                .solve(&rhs, 1e-14)
                .unwrap_or_else(|_| DVector::from_element(k + 1, 1.0 / k as f64))
        });
    sol.iter().take(k).copied().collect()
}

/// Wolfe's nearest-point algorithm: the point of `conv(points)` closest to
/// the origin, with its convex weights.
pub(crate) fn min_norm_point(points: &[Vec<f64>], tol: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(!points.is_empty());
    let dim = points[0].len();
    let scale = points
        .iter()
        .map(|p| dot(p, p))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let start = (0..points.len())
        .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
        .unwrap();
    let mut set = vec![start];
    let mut w = vec![1.0];
    let mut x = points[start].clone();
    let eps = 1e-14;

    for _ in 0..(50 * (points.len() + dim + 1)) {
        let xx = dot(&x, &x);
        let (j, xpj) = (0..points.len())
            .map(|i| (i, dot(&x, &points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xx - xpj <= tol * scale || set.contains(&j) {
            break;
        }
        set.push(j);
        w.push(0.0);
        loop {
            let mu = affine_min_norm(points, &set);
            if mu.iter().all(|&m| m > eps) {
                w = mu;
                x = combine(points, &set, &w, dim);
                break;
            }
            let mut theta = 1.0f64;
            for (wi, mi) in w.iter().zip(&mu) {
                if *mi <= eps {
                    let denom = wi - mi;
                    if denom > 0.0 {
                        theta = theta.min(wi / denom);
                    }
                }
            }
            for (wi, mi) in w.iter_mut().zip(&mu) {
                *wi = (1.0 - theta) * *wi + theta * mi;
            }
            // drop the blocking indices (always at least the smallest weight)
            let min_pos = w
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            let keep: Vec<bool> = w
                .iter()
                .enumerate()
                .map(|(i, &wi)| wi > eps && i != min_pos)
                .collect();
            let mut ns = Vec::new();
            let mut nw = Vec::new();
            for i in 0..set.len() {
                if keep[i] {
                    ns.push(set[i]);
                    nw.push(w[i]);
                }
            }
            if ns.is_empty() {
                ns.push(set[min_pos]);
                nw.push(1.0);
            }
            let total: f64 = nw.iter().sum();
            nw.iter_mut().for_each(|v| *v /= total);
            set = ns;
            w = nw;
            x = combine(points, &set, &w, dim);
            if set.len() == 1 {
                break;
            }
        }
    }

    let mut weights = vec![0.0; points.len()];
    for (&i, &wi) in set.iter().zip(&w) {
        weights[i] += wi;
    }
    (x, weights)
}

/// Lawson–Hanson non-negative least squares: `argmin_{λ ≥ 0} ‖Rλ − b‖`
/// where `columns` are the columns of `R`.
pub(crate) fn nnls(columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = columns.len();
    let m = b.len();
    let mut x = vec![0.0; k];
    if k == 0 {
        return x;
    }
    let mut passive = vec![false; k];
    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for (j, col) in columns.iter().enumerate() {
            if x[j] != 0.0 {
                for i in 0..m {
                    r[i] -= col[i] * x[j];
                }
            }
        }
        r
    };
    let bnorm = dot(b, b).sqrt().max(1.0);
    let tol = 1e-13 * bnorm;
    let lstsq = |set: &[usize]| -> Vec<f64> {
        let a = DMatrix::from_fn(m, set.len(), |i, j| columns[set[j]][i]);
        let rhs = DVector::from_column_slice(b);
        a.svd(true, true)
            .solve(&rhs, 1e-13)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_else(|_| vec![0.0; set.len()])
    };

    for _ in 0..(3 * k + 10) {
        let r = residual(&x);
        let grad: Vec<f64> = columns.iter().map(|c| dot(c, &r)).collect();
        let cand = (0..k)
            .filter(|&j| !passive[j] && grad[j] > tol)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]));
        let Some(j) = cand else { break };
        passive[j] = true;
        for _ in 0..(3 * k + 10) {
            let set: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let s = lstsq(&set);
            if s.iter().all(|&v| v > 0.0) {
                for i in 0..k {
                    x[i] = 0.0;
                }
                for (&i, &v) in set.iter().zip(&s) {
                    x[i] = v;
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (&i, &si) in set.iter().zip(&s) {
                if si <= 0.0 {
                    let denom = x[i] - si;
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            for (&i, &si) in set.iter().zip(&s) {
                x[i] += alpha * (si - x[i]);
            }
            for &i in &set {
                if x[i] <= 1e-15 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Projection of `u` onto `cone(generators)`.
pub(crate) fn project_onto_generated_cone(generators: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    let lambda = nnls(generators, u);
    let mut p = vec![0.0; u.len()];
    for (g, l) in generators.iter().zip(&lambda) {
        for (pk, gk) in p.iter_mut().zip(g) {
            *pk += l * gk;
        }
    }
    p
}
