//! The all-subsets kernel `S(p, x) = prod_j (1 + p_j x_j)`.

use super::anova::sparse_on_support;
use super::check_dim;
use super::sparse::{SparseRef, SparseVector};
use crate::error::Result;

pub fn all_subsets_eval<'a>(p: &[f64], x: impl Into<SparseRef<'a>>) -> Result<f64> {
    let x = x.into();
    check_dim(p, x)?;
    Ok(x.iter().map(|(j, v)| 1.0 + p[j] * v).product())
}

/// `dS/dp_j = x_j * prod_{j' != j} (1 + p_j' x_j')`, supported on `supp(x)`.
pub fn all_subsets_grad<'a>(p: &[f64], x: impl Into<SparseRef<'a>>) -> Result<SparseVector> {
    let x = x.into();
    check_dim(p, x)?;
    let mut grad = vec![0.0; x.nnz()];
    grad_into(p, x, &mut grad);
    Ok(sparse_on_support(x, &grad))
}

/// Per-support gradient written into `out`; returns `S(p, x)`.
///
/// The leave-one-out products come from dividing the product of the nonzero
/// factors. Exactly-zero factors are tracked separately so no division by
/// zero happens: with one zero factor only that coordinate survives, with
/// two or more every leave-one-out product is zero.
pub(crate) fn grad_into(p: &[f64], x: SparseRef<'_>, out: &mut [f64]) -> f64 {
    debug_assert_eq!(out.len(), x.nnz());
    let mut nonzero_product = 1.0;
    let mut zero_at = None;
    let mut zeros = 0usize;
    for (pos, (j, v)) in x.iter().enumerate() {
        let factor = 1.0 + p[j] * v;
        if factor == 0.0 {
            zeros += 1;
            zero_at = Some(pos);
        } else {
            nonzero_product *= factor;
        }
    }
    let vals = x.values();
    match zeros {
        0 => {
            for (pos, (j, v)) in x.iter().enumerate() {
                out[pos] = v * nonzero_product / (1.0 + p[j] * v);
            }
            nonzero_product
        }
        1 => {
            out.fill(0.0);
            let pos = zero_at.expect("one zero factor recorded");
            out[pos] = vals[pos] * nonzero_product;
            0.0
        }
        _ => {
            out.fill(0.0);
            0.0
        }
    }
}
