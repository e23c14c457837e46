//! Floating-point double description method for polyhedral cones
//! `{x ∈ R^d | aₖᵀx ≤ 0 for all k}`.
//!
//! Constraints are inserted one at a time starting from the whole space,
//! which keeps an explicit lineality basis until enough constraints have
//! been seen. Adjacency of rays is decided combinatorially on zero sets.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub(crate) fn new(bits: usize) -> Self {
        BitSet {
            words: vec![0; bits.div_ceil(64).max(1)],
        }
    }

    pub(crate) fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn is_subset_of(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub(crate) fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[cfg(test)]
    pub(crate) fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64)
                .filter(move |b| w & (1 << b) != 0)
                .map(move |b| wi * 64 + b)
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct DdRay {
    pub(crate) v: Vec<f64>,
    /// Indices of constraints active (tight) at this ray.
    pub(crate) zero: BitSet,
}

#[derive(Debug, Clone)]
pub(crate) struct DdCone {
    pub(crate) lineality: Vec<Vec<f64>>,
    pub(crate) rays: Vec<DdRay>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// Computes lineality space and extreme rays of `{x | rows·x ≤ 0}`.
/// Rows are normalized internally; `tol` decides activity.
pub(crate) fn double_description(dim: usize, rows: &[Vec<f64>], tol: f64) -> DdCone {
    let nrows = rows.len();
    let mut lineality: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rays: Vec<DdRay> = Vec::new();

    for (k, row) in rows.iter().enumerate() {
        let mut a = row.clone();
        if normalize(&mut a) == 0.0 {
            for r in rays.iter_mut() {
                r.zero.insert(k);
            }
            continue;
        }

        // Cut the lineality space first if the new hyperplane is not parallel to it.
        let vals: Vec<f64> = lineality.iter().map(|l| dot(&a, l)).collect();
        let pivot = vals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > tol)
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .map(|(i, _)| i);
        if let Some(p) = pivot {
            let mut l = lineality.remove(p);
            let mut al = vals[p];
            if al > 0.0 {
                l.iter_mut().for_each(|x| *x = -*x);
                al = -al;
            }
            for lj in lineality.iter_mut() {
                let c = dot(&a, lj) / al;
                lj.iter_mut().zip(&l).for_each(|(x, y)| *x -= c * y);
                normalize(lj);
            }
            for r in rays.iter_mut() {
                let c = dot(&a, &r.v) / al;
                r.v.iter_mut().zip(&l).for_each(|(x, y)| *x -= c * y);
                normalize(&mut r.v);
                r.zero.insert(k);
            }
            normalize(&mut l);
            // a former lineality direction is tight on every earlier constraint
            let mut zero = BitSet::new(nrows);
            (0..k).for_each(|i| zero.insert(i));
            rays.push(DdRay { v: l, zero });
            continue;
        }

        let s: Vec<f64> = rays.iter().map(|r| dot(&a, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| s[i] > tol).collect();
        if pos.is_empty() {
            for (r, &si) in rays.iter_mut().zip(&s) {
                if si.abs() <= tol {
                    r.zero.insert(k);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| s[i] < -tol).collect();
        let min_common = dim.saturating_sub(lineality.len() + 2);

        let mut next: Vec<DdRay> = Vec::with_capacity(rays.len());
        for &q in &neg {
            for &p in &pos {
                let common = rays[p].zero.and(&rays[q].zero);
                if common.len() < min_common {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(r, ray)| r == p || r == q || !common.is_subset_of(&ray.zero));
                if !adjacent {
                    continue;
                }
                let (sp, sq) = (s[p], s[q]);
                let mut v: Vec<f64> = rays[q]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(vq, vp)| sp * vq - sq * vp)
                    .collect();
                if normalize(&mut v) == 0.0 {
                    continue;
                }
                let mut zero = common;
                zero.insert(k);
                next.push(DdRay { v, zero });
            }
        }
        for (i, mut r) in rays.into_iter().enumerate() {
            if s[i] < -tol {
                next.push(r);
            } else if s[i].abs() <= tol {
                r.zero.insert(k);
                next.push(r);
            }
        }
        rays = next;
    }

    DdCone { lineality, rays }
}
