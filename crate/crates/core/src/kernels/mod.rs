//! ANOVA and all-subsets kernels over sparse vectors.
//!
//! Every routine iterates only the support of `x`, in increasing index
//! order, so costs scale with `nnz(x)` rather than the nominal dimension.

mod all_subsets;
mod alt;
mod anova;
mod sparse;

pub use all_subsets::{all_subsets_eval, all_subsets_grad};
pub use alt::{anova_coord_deriv, anova_eval_alt, anova_grad_alt, power_sums, AltCache};
pub use anova::{anova_eval, anova_eval_all, anova_grad, DpTable};
pub use sparse::{SparseRef, SparseVector};

pub(crate) use all_subsets::grad_into as all_subsets_grad_into;
pub(crate) use alt::{coord_deriv_slices, fill_power_sums, rebuild_from_power_sums};
pub(crate) use anova::grad_into as anova_grad_into;

use crate::error::{HofmError, Result};

fn check_dim(p: &[f64], x: SparseRef<'_>) -> Result<()> {
    if p.len() != x.dim() {
        return Err(HofmError::invalid(format!(
            "parameter length {} does not match vector dimension {}",
            p.len(),
            x.dim()
        )));
    }
    Ok(())
}
