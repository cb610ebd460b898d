//! Dynamic-programming evaluation of the ANOVA kernel and its reverse-mode
//! gradient.
//!
//! For a sparse `x` with support `j_1 < ... < j_n` and `z_i = p[j_i] * x[j_i]`,
//! the table holds `a[i][t] = A^t(z_1..z_i)` and satisfies
//! `a[i][t] = a[i-1][t] + z_i * a[i-1][t-1]` with `a[i][0] = 1` and
//! `a[i][t] = 0` for `i < t`. Only the support of `x` is iterated.

use super::check_dim;
use super::sparse::{SparseRef, SparseVector};
use crate::error::{HofmError, Result};

/// The `(nnz + 1) x (m + 1)` grid of partial ANOVA values.
#[derive(Debug, Clone, Default)]
pub struct DpTable {
    degree: usize,
    columns: usize,
    cells: Vec<f64>,
}

impl DpTable {
    pub fn new() -> Self {
        DpTable::default()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of table columns, `nnz(x) + 1`.
    pub fn columns(&self) -> usize {
        self.columns
    }

    /// `a[j][t]`: the degree-`t` kernel on the first `j` support entries.
    pub fn get(&self, j: usize, t: usize) -> f64 {
        self.cells[j * (self.degree + 1) + t]
    }

    /// `A^m(p, x)`, the bottom-right cell.
    pub fn value(&self) -> f64 {
        self.get(self.columns - 1, self.degree)
    }

    /// `[A^0, A^1, ..., A^m]`.
    pub fn last_column(&self) -> &[f64] {
        let start = (self.columns - 1) * (self.degree + 1);
        &self.cells[start..start + self.degree + 1]
    }

    /// Fills the table for `(p, x, m)` reusing the allocation. `p` must be
    /// indexable by every index of `x`.
    pub(crate) fn fill(&mut self, p: &[f64], x: SparseRef<'_>, m: usize) -> f64 {
        let nnz = x.nnz();
        let rows = m + 1;
        self.degree = m;
        self.columns = nnz + 1;
        self.cells.clear();
        self.cells.resize(self.columns * rows, 0.0);
        self.cells[0] = 1.0;
        for (i, (j, v)) in x.iter().enumerate() {
            let z = p[j] * v;
            let (prev, cur) = self.cells[i * rows..(i + 2) * rows].split_at_mut(rows);
            cur[0] = 1.0;
            for t in 1..=m.min(i + 1) {
                cur[t] = prev[t] + z * prev[t - 1];
            }
        }
        self.value()
    }

    fn matches(&self, x: SparseRef<'_>, m: usize) -> bool {
        self.degree == m
            && self.columns == x.nnz() + 1
            && self.cells.len() == self.columns * (m + 1)
    }
}

/// Evaluates `A^m(p, x)` in `O(nnz(x) m)`, returning the filled DP table.
///
/// `A^0 = 1`, and `A^m = 0` whenever `m > nnz(x)`.
pub fn anova_eval<'a>(p: &[f64], x: impl Into<SparseRef<'a>>, m: usize) -> Result<(f64, DpTable)> {
    let x = x.into();
    check_dim(p, x)?;
    let mut table = DpTable::new();
    let value = table.fill(p, x, m);
    Ok((value, table))
}

/// `[A^1(p, x), ..., A^m(p, x)]` from a single table pass.
pub fn anova_eval_all<'a>(p: &[f64], x: impl Into<SparseRef<'a>>, m: usize) -> Result<Vec<f64>> {
    let (_, table) = anova_eval(p, x, m)?;
    Ok(table.last_column()[1..].to_vec())
}

/// Reverse-mode gradient of `A^m(p, x)` with respect to `p`, from a table
/// produced by [`anova_eval`] on the same inputs. The result is supported on
/// `supp(x)`; coordinates whose derivative is exactly zero are omitted.
pub fn anova_grad<'a>(
    p: &[f64],
    x: impl Into<SparseRef<'a>>,
    m: usize,
    table: &DpTable,
) -> Result<SparseVector> {
    let x = x.into();
    check_dim(p, x)?;
    if !table.matches(x, m) {
        return Err(HofmError::invalid(format!(
            "DP table shape ({} columns, degree {}) does not match nnz {} and degree {m}",
            table.columns,
            table.degree,
            x.nnz()
        )));
    }
    let mut grad = vec![0.0; x.nnz()];
    grad_into(p, x, table, &mut grad);
    Ok(sparse_on_support(x, &grad))
}

/// Writes `dA^m/dp_j` for each support entry of `x` (aligned with
/// `x.indices()`) into `out`. The table must come from `fill(p, x, m)`.
pub(crate) fn grad_into(p: &[f64], x: SparseRef<'_>, table: &DpTable, out: &mut [f64]) {
    let m = table.degree;
    let n = x.nnz();
    debug_assert_eq!(out.len(), n);
    if m == 0 || m > n {
        out.fill(0.0);
        return;
    }
    let idx = x.indices();
    let vals = x.values();
    // adjoint[t] = d a[n][m] / d a[i][t] for the current column i.
    const STACK: usize = 16;
    let mut local = [0.0; STACK + 2];
    let mut heap = Vec::new();
    let adjoint: &mut [f64] = if m <= STACK {
        &mut local[..m + 2]
    } else {
        heap.resize(m + 2, 0.0);
        &mut heap
    };
    adjoint[m] = 1.0;
    for i in (1..=n).rev() {
        if i < n {
            let z_next = p[idx[i]] * vals[i];
            for t in 1..=m {
                adjoint[t] += z_next * adjoint[t + 1];
            }
        }
        let prev = &table.cells[(i - 1) * (m + 1)..i * (m + 1)];
        let g: f64 = adjoint[1..=m.min(i)]
            .iter()
            .zip(prev)
            .map(|(a, c)| a * c)
            .sum();
        out[i - 1] = g * vals[i - 1];
    }
}

/// Packs per-support values into a sparse vector, dropping exact zeros.
pub(crate) fn sparse_on_support(x: SparseRef<'_>, values: &[f64]) -> SparseVector {
    let (indices, values): (Vec<usize>, Vec<f64>) = x
        .indices()
        .iter()
        .zip(values)
        .filter(|(_, &g)| g != 0.0)
        .map(|(&j, &g)| (j, g))
        .unzip();
    SparseVector::from_parts_unchecked(x.dim(), indices, values)
}
