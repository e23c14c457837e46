//! Dense phase-one simplex for `∃λ ≥ 0: Rλ = d`.

const PIVOT_TOL: f64 = 1e-12;

/// Minimizes `‖Rλ − d‖₁` over `λ ≥ 0` with the simplex method (Bland's rule)
/// and returns `(residual, λ)`. `columns` holds the columns of `R`.
pub(crate) fn min_l1_residual(columns: &[Vec<f64>], d: &[f64]) -> (f64, Vec<f64>) {
    let m = d.len();
    let k = columns.len();
    // Tableau columns: λ (k), artificials (m), rhs.
    let width = k + m + 1;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        let sign = if d[i] < 0.0 { -1.0 } else { 1.0 };
        for (j, col) in columns.iter().enumerate() {
            t[i][j] = sign * col[i];
        }
        t[i][k + i] = 1.0;
        t[i][width - 1] = sign * d[i];
    }
    let mut basis: Vec<usize> = (k..k + m).collect();

    // reduced costs for objective Σ artificials
    let reduced = |t: &Vec<Vec<f64>>, basis: &Vec<usize>| -> Vec<f64> {
        let mut c = vec![0.0; width];
        for j in k..k + m {
            c[j] = 1.0;
        }
        let mut r = c.clone();
        for (i, &b) in basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for j in 0..width {
                    r[j] -= cb * t[i][j];
                }
            }
        }
        r
    };

    let max_iter = 50 * (k + m + 1);
    for _ in 0..max_iter {
        let r = reduced(&t, &basis);
        let Some(enter) = (0..k + m).find(|&j| r[j] < -1e-13) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][enter];
            if a > PIVOT_TOL {
                let ratio = t[i][width - 1] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            // cannot happen for a bounded-below objective; treat as optimal
            break;
        };
        let piv = t[row][enter];
        for v in t[row].iter_mut() {
            *v /= piv;
        }
        let prow = t[row].clone();
        for (i, tr) in t.iter_mut().enumerate() {
            if i != row {
                let f = tr[enter];
                if f != 0.0 {
                    for (v, p) in tr.iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                }
            }
        }
        basis[row] = enter;
    }

    let mut lambda = vec![0.0; k];
    for (i, &b) in basis.iter().enumerate() {
        if b < k {
            lambda[b] = t[i][width - 1].max(0.0);
        }
    }
    // Residual recomputed from λ rather than read off the tableau.
    let mut res = 0.0;
    for i in 0..m {
        let mut s = -d[i];
        for (j, col) in columns.iter().enumerate() {
            s += col[i] * lambda[j];
        }
        res += s.abs();
    }
    (res, lambda)
}
