//! The power-sum recursion for the ANOVA kernel,
//! `A^m = (1/m) sum_{t=1..m} (-1)^(t+1) A^(m-t) D^t` with
//! `D^t = sum_j (p_j x_j)^t`, together with its forward-mode coordinate
//! derivative and its reverse-mode gradient.
//!
//! Coordinate descent keeps only `A^t` and `D^t` per sample, so the memory
//! per sample is `O(m)`.

use super::anova::sparse_on_support;
use super::check_dim;
use super::sparse::{SparseRef, SparseVector};
use crate::error::{HofmError, Result};

/// `A^t(p, x)` for `t = 0..=m` and `D^t(p, x)` for `t = 1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AltCache {
    nnz: usize,
    anova: Vec<f64>,
    power: Vec<f64>,
}

impl AltCache {
    pub fn degree(&self) -> usize {
        self.anova.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// `A^t`, `0 <= t <= m`.
    pub fn anova(&self, t: usize) -> f64 {
        self.anova[t]
    }

    /// `D^t`, `1 <= t <= m`.
    pub fn power_sum(&self, t: usize) -> f64 {
        assert!(t >= 1, "power sums start at degree 1");
        self.power[t]
    }

    pub fn anova_values(&self) -> &[f64] {
        &self.anova
    }

    /// Power sums indexed by degree; slot 0 is unused and zero.
    pub fn power_values(&self) -> &[f64] {
        &self.power
    }
}

fn sign(t: usize) -> f64 {
    if t % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Writes `D^t` into `power[t]` for `t = 1..power.len()`; `power[0] = 0`.
pub(crate) fn fill_power_sums(p: &[f64], x: SparseRef<'_>, power: &mut [f64]) {
    power.fill(0.0);
    let m = power.len() - 1;
    for (j, v) in x.iter() {
        let z = p[j] * v;
        let mut zt = 1.0;
        for slot in power.iter_mut().skip(1).take(m) {
            zt *= z;
            *slot += zt;
        }
    }
}

/// Rebuilds `anova[0..=m]` from power sums. Degrees above `nnz` are exactly
/// zero because no combination of that size exists.
pub(crate) fn rebuild_from_power_sums(power: &[f64], anova: &mut [f64], nnz: usize) {
    anova[0] = 1.0;
    for t in 1..anova.len() {
        if t > nnz {
            anova[t] = 0.0;
            continue;
        }
        let mut acc = 0.0;
        for u in 1..=t {
            acc += sign(u) * anova[t - u] * power[u];
        }
        anova[t] = acc / t as f64;
    }
}

/// `dA^m / dp_j` by forward-mode differentiation of the recursion, where
/// `m = anova.len() - 1`. `scratch` is resized as needed.
pub(crate) fn coord_deriv_slices(
    anova: &[f64],
    power: &[f64],
    nnz: usize,
    p_j: f64,
    x_j: f64,
    scratch: &mut Vec<f64>,
) -> f64 {
    let m = anova.len() - 1;
    if m == 0 || m > nnz {
        return 0.0;
    }
    // dan[t] = dA^t/dp_j, dpow[u - 1] = dD^u/dp_j = u p^(u-1) x^u; small
    // degrees stay on the stack since this runs once per stored nonzero
    const STACK: usize = 16;
    let mut local = [0.0; 2 * STACK];
    let buf: &mut [f64] = if m < STACK {
        &mut local[..2 * m + 1]
    } else {
        scratch.clear();
        scratch.resize(2 * m + 1, 0.0);
        scratch
    };
    let (dan, dpow) = buf.split_at_mut(m + 1);
    dan[0] = 0.0;
    let mut p_pow = 1.0;
    let mut x_pow = x_j;
    for (u, slot) in dpow.iter_mut().enumerate() {
        *slot = (u + 1) as f64 * p_pow * x_pow;
        p_pow *= p_j;
        x_pow *= x_j;
    }
    for t in 1..=m {
        let mut acc = 0.0;
        let mut sgn = 1.0;
        for u in 1..=t {
            acc += sgn * (dan[t - u] * power[u] + anova[t - u] * dpow[u - 1]);
            sgn = -sgn;
        }
        dan[t] = acc / t as f64;
    }
    dan[m]
}

/// `[D^1(p, x), ..., D^m(p, x)]`.
pub fn power_sums<'a>(p: &[f64], x: impl Into<SparseRef<'a>>, m: usize) -> Result<Vec<f64>> {
    let x = x.into();
    check_dim(p, x)?;
    if m == 0 {
        return Err(HofmError::invalid("power sums need degree >= 1"));
    }
    let mut power = vec![0.0; m + 1];
    fill_power_sums(p, x, &mut power);
    power.remove(0);
    Ok(power)
}

/// Evaluates `A^m(p, x)` through the power-sum recursion in `O(m nnz + m^2)`.
pub fn anova_eval_alt<'a>(
    p: &[f64],
    x: impl Into<SparseRef<'a>>,
    m: usize,
) -> Result<(f64, AltCache)> {
    let x = x.into();
    check_dim(p, x)?;
    if m == 0 {
        return Err(HofmError::invalid(
            "the power-sum recursion needs degree >= 1",
        ));
    }
    let mut power = vec![0.0; m + 1];
    fill_power_sums(p, x, &mut power);
    let mut anova = vec![0.0; m + 1];
    rebuild_from_power_sums(&power, &mut anova, x.nnz());
    let cache = AltCache {
        nnz: x.nnz(),
        anova,
        power,
    };
    Ok((cache.anova[m], cache))
}

/// `dA^m(p, x) / dp_j` from a cache built on the current `(p, x)`.
///
/// `m` may be at most `cache.degree()`; lower degrees reuse the prefix of
/// the cache.
pub fn anova_coord_deriv(cache: &AltCache, p_j: f64, x_j: f64, m: usize) -> f64 {
    assert!(
        m <= cache.degree(),
        "degree {m} exceeds cached degree {}",
        cache.degree()
    );
    let mut scratch = Vec::new();
    coord_deriv_slices(
        &cache.anova[..=m],
        &cache.power[..=m],
        cache.nnz,
        p_j,
        x_j,
        &mut scratch,
    )
}

/// Full gradient of `A^m(p, x)` by reverse-mode differentiation of the
/// power-sum recursion. The final Vandermonde-times-vector step is the
/// direct `O(nnz m)` product.
pub fn anova_grad_alt<'a>(
    p: &[f64],
    x: impl Into<SparseRef<'a>>,
    m: usize,
) -> Result<SparseVector> {
    let x = x.into();
    let (_, cache) = anova_eval_alt(p, x, m)?;
    if m > x.nnz() {
        return Ok(SparseVector::zeros(x.dim()));
    }
    let a = &cache.anova;
    let d = &cache.power;

    let mut adj_a = vec![0.0; m + 1];
    adj_a[m] = 1.0;
    for t in (1..m).rev() {
        let mut acc = 0.0;
        for s in t + 1..=m {
            acc += sign(s - t) * adj_a[s] * d[s - t] / s as f64;
        }
        adj_a[t] = acc;
    }
    // coeff[t - 1] = t * adj_d[t]
    let coeff: Vec<f64> = (1..=m)
        .map(|t| {
            let mut acc = 0.0;
            for s in t..=m {
                acc += adj_a[s] * a[s - t] / s as f64;
            }
            t as f64 * sign(t) * acc
        })
        .collect();

    let grad: Vec<f64> = x
        .iter()
        .map(|(j, v)| {
            let z = p[j] * v;
            let poly = coeff.iter().rev().fold(0.0, |acc, &c| acc * z + c);
            poly * v
        })
        .collect();
    Ok(sparse_on_support(x, &grad))
}
