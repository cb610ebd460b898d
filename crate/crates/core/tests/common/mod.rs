//! Brute-force oracles and random problem generators shared by the
//! integration tests.

#![allow(dead_code)]

use hofm::data::SampleMatrix;
use hofm::SparseVector;
use rand::Rng;

/// `sum over m-subsets S of supp(x) of prod_{j in S} p_j x_j`, by explicit
/// enumeration of index combinations.
pub fn brute_anova(p: &[f64], x: &SparseVector, m: usize) -> f64 {
    fn rec(z: &[f64], start: usize, left: usize, acc: f64) -> f64 {
        if left == 0 {
            return acc;
        }
        let mut total = 0.0;
        for i in start..z.len() {
            if z.len() - i < left {
                break;
            }
            total += rec(z, i + 1, left - 1, acc * z[i]);
        }
        total
    }
    let z: Vec<f64> = x.iter().map(|(j, v)| p[j] * v).collect();
    rec(&z, 0, m, 1.0)
}

/// Same enumeration with absolute values: a scale for relative errors of
/// sums whose terms may cancel.
pub fn brute_anova_abs(p: &[f64], x: &SparseVector, m: usize) -> f64 {
    let pa: Vec<f64> = p.iter().map(|v| v.abs()).collect();
    let xa = SparseVector::new(x.dim(), x.iter().map(|(j, v)| (j, v.abs()))).unwrap();
    brute_anova(&pa, &xa, m)
}

/// `prod_j (1 + p_j x_j)` over every coordinate of the dense vector.
pub fn brute_all_subsets(p: &[f64], x: &SparseVector) -> f64 {
    x.to_dense()
        .iter()
        .zip(p)
        .map(|(v, q)| 1.0 + q * v)
        .product()
}

pub fn rel_err(got: f64, want: f64, scale: f64) -> f64 {
    let denom = scale.abs().max(want.abs());
    if denom == 0.0 {
        (got - want).abs()
    } else {
        (got - want).abs() / denom
    }
}

pub fn random_dense<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// A random sparse vector with each coordinate present with probability
/// `density`; values in `[-1, 1]` away from zero.
pub fn random_sparse<R: Rng>(rng: &mut R, d: usize, density: f64) -> SparseVector {
    let mut entries = Vec::new();
    for j in 0..d {
        if rng.random_bool(density) {
            let v: f64 = rng.random_range(0.1..1.0);
            entries.push((j, if rng.random_bool(0.5) { v } else { -v }));
        }
    }
    SparseVector::new(d, entries).unwrap()
}

/// `n` rows with exactly `nnz` distinct random features each.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, d: usize, nnz: usize) -> SampleMatrix {
    let rows: Vec<SparseVector> = (0..n)
        .map(|_| {
            let mut idx = rand::seq::index::sample(rng, d, nnz).into_vec();
            idx.sort_unstable();
            SparseVector::new(d, idx.into_iter().map(|j| (j, rng.random_range(-1.0..1.0)))).unwrap()
        })
        .collect();
    SampleMatrix::from_rows(d, &rows).unwrap()
}

/// Central finite difference of `f` in coordinate `j`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, p: &[f64], j: usize, h: f64) -> f64 {
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[j] += h;
    minus[j] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}
