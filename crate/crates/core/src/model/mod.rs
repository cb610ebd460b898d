//! The HOFM model family and its prediction functions.
//!
//! Four variants share one representation:
//!
//! - `separate`: bias, linear weights and one factor matrix per degree
//!   `t = 2..=m`, each column contributing `A^t(p_s, x)`.
//! - `fm2`: the second-order special case, with an `O(dk)` fast path.
//! - `shared_augmented`: one `(d + m - 1) x k` matrix applied to the input
//!   augmented with `m - 1` leading unit features. The first `m - 1` rows hold
//!   the per-column mixing weights `gamma`.
//! - `all_subsets`: bias plus `sum_s S(p_s, x)`.

pub(crate) mod io;

use std::fmt;
use std::str::FromStr;

use crate::error::{HofmError, Result};
use crate::kernels::{DpTable, SparseRef, SparseVector};

pub use io::{load_model, load_model_file, save_model, save_model_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Separate,
    SharedAugmented,
    AllSubsets,
    Fm2,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Separate => "separate",
            Variant::SharedAugmented => "shared_augmented",
            Variant::AllSubsets => "all_subsets",
            Variant::Fm2 => "fm2",
        }
    }

    /// Whether the model carries a linear term `<w, x>`.
    pub fn has_linear(self) -> bool {
        matches!(self, Variant::Separate | Variant::Fm2)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = HofmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separate" => Ok(Variant::Separate),
            "shared_augmented" | "shared-augmented" => Ok(Variant::SharedAugmented),
            "all_subsets" | "all-subsets" => Ok(Variant::AllSubsets),
            "fm2" => Ok(Variant::Fm2),
            other => Err(HofmError::invalid(format!("unknown variant `{other}`"))),
        }
    }
}

/// Which kernel a factor block applies column-wise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKernel {
    Anova(usize),
    AllSubsets,
}

impl BlockKernel {
    /// Degree tag used in the model file (0 for all-subsets).
    pub fn tag(self) -> usize {
        match self {
            BlockKernel::Anova(t) => t,
            BlockKernel::AllSubsets => 0,
        }
    }
}

/// Dense `rows x cols` matrix stored column by column, so each factor column
/// `p_s` is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FactorMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FactorMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(HofmError::invalid("ragged factor matrix rows"));
        }
        let mut m = FactorMatrix::zeros(rows.len(), cols);
        for (j, row) in rows.iter().enumerate() {
            for (s, &v) in row.iter().enumerate() {
                m.set(j, s, v);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from column vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(HofmError::invalid("ragged factor matrix columns"));
        }
        Ok(FactorMatrix {
            rows,
            cols: columns.len(),
            data: columns.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.rows + row] = value;
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn column_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows.max(1)).take(self.cols)
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorBlock {
    pub kernel: BlockKernel,
    pub matrix: FactorMatrix,
}

impl FactorBlock {
    /// The block's contribution `sum_s K(p_s, x)`. `x` must already be in the
    /// block's input space (augmented for shared models).
    pub(crate) fn value(&self, x: SparseRef<'_>, table: &mut DpTable) -> f64 {
        self.matrix
            .columns()
            .map(|col| match self.kernel {
                BlockKernel::Anova(t) => table.fill(col, x, t),
                BlockKernel::AllSubsets => x.iter().map(|(j, v)| 1.0 + col[j] * v).product(),
            })
            .sum()
    }
}

/// Degree-mixing weights: `theta[t - 1]` multiplies `A^t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaWeights {
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HofmModel {
    variant: Variant,
    dim: usize,
    degree: usize,
    bias: f64,
    linear: Option<Vec<f64>>,
    blocks: Vec<FactorBlock>,
}

impl HofmModel {
    /// A model of the given shape with every parameter zero. `degree` is
    /// ignored for `all_subsets` and must be 2 for `fm2`.
    pub fn zeros(variant: Variant, dim: usize, degree: usize, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(HofmError::invalid("rank must be positive"));
        }
        let ranks = match variant {
            Variant::Separate => vec![rank; degree.saturating_sub(1)],
            _ => vec![rank],
        };
        HofmModel::zeros_with_ranks(variant, dim, degree, &ranks)
    }

    /// Like [`HofmModel::zeros`], with one rank per factor block (degrees
    /// `2..=m` for `separate`).
    pub fn zeros_with_ranks(
        variant: Variant,
        dim: usize,
        degree: usize,
        ranks: &[usize],
    ) -> Result<Self> {
        let degree = match variant {
            Variant::AllSubsets => 0,
            Variant::Fm2 if degree != 2 => {
                return Err(HofmError::invalid("fm2 models have degree 2"));
            }
            _ if degree < 2 => {
                return Err(HofmError::invalid(format!(
                    "{variant} models need degree >= 2, got {degree}"
                )));
            }
            _ => degree,
        };
        let kernels: Vec<(BlockKernel, usize)> = match variant {
            Variant::Separate | Variant::Fm2 => {
                (2..=degree).map(|t| (BlockKernel::Anova(t), dim)).collect()
            }
            Variant::SharedAugmented => vec![(BlockKernel::Anova(degree), dim + degree - 1)],
            Variant::AllSubsets => vec![(BlockKernel::AllSubsets, dim)],
        };
        if kernels.len() != ranks.len() || ranks.contains(&0) {
            return Err(HofmError::invalid(format!(
                "expected {} positive ranks, got {ranks:?}",
                kernels.len()
            )));
        }
        let blocks = kernels
            .into_iter()
            .zip(ranks)
            .map(|((kernel, rows), &k)| FactorBlock {
                kernel,
                matrix: FactorMatrix::zeros(rows, k),
            })
            .collect();
        Ok(HofmModel {
            variant,
            dim,
            degree,
            bias: 0.0,
            linear: variant.has_linear().then(|| vec![0.0; dim]),
            blocks,
        })
    }

    /// Assembles a model from parts, checking shape consistency.
    pub fn from_parts(
        variant: Variant,
        dim: usize,
        degree: usize,
        bias: f64,
        linear: Option<Vec<f64>>,
        blocks: Vec<FactorBlock>,
    ) -> Result<Self> {
        let model = HofmModel {
            variant,
            dim,
            degree,
            bias,
            linear,
            blocks,
        };
        model.check_shape().map_err(HofmError::invalid)?;
        Ok(model)
    }

    pub(crate) fn check_shape(&self) -> std::result::Result<(), String> {
        let d = self.dim;
        let m = self.degree;
        let expected: Vec<(BlockKernel, usize)> = match self.variant {
            Variant::Separate => {
                if m < 2 {
                    return Err(format!("separate models need m >= 2, got {m}"));
                }
                (2..=m).map(|t| (BlockKernel::Anova(t), d)).collect()
            }
            Variant::Fm2 => {
                if m != 2 {
                    return Err(format!("fm2 models need m = 2, got {m}"));
                }
                vec![(BlockKernel::Anova(2), d)]
            }
            Variant::SharedAugmented => {
                if m < 2 {
                    return Err(format!("shared_augmented models need m >= 2, got {m}"));
                }
                vec![(BlockKernel::Anova(m), d + m - 1)]
            }
            Variant::AllSubsets => {
                if m != 0 {
                    return Err(format!("all_subsets models carry m = 0, got {m}"));
                }
                vec![(BlockKernel::AllSubsets, d)]
            }
        };
        if self.blocks.len() != expected.len() {
            return Err(format!(
                "{} factor matrices, expected {}",
                self.blocks.len(),
                expected.len()
            ));
        }
        for (block, (kernel, rows)) in self.blocks.iter().zip(expected) {
            if block.kernel != kernel {
                return Err(format!(
                    "unexpected factor block {:?}, expected {kernel:?}",
                    block.kernel
                ));
            }
            if block.matrix.rows() != rows || block.matrix.cols() == 0 {
                return Err(format!(
                    "factor matrix for t={} is {}x{}, expected {rows} rows and >= 1 column",
                    kernel.tag(),
                    block.matrix.rows(),
                    block.matrix.cols()
                ));
            }
        }
        match &self.linear {
            Some(_) if !self.variant.has_linear() => {
                return Err(format!("{} models have no linear term", self.variant));
            }
            Some(w) if w.len() != d => {
                return Err(format!("linear term has {} entries, expected {d}", w.len()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Input dimension `d` (before augmentation).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degree `m`; 0 for all-subsets models.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn linear(&self) -> Option<&[f64]> {
        self.linear.as_deref()
    }

    pub fn blocks(&self) -> &[FactorBlock] {
        &self.blocks
    }

    pub fn set_bias(&mut self, bias: f64) {
        self.bias = bias;
    }

    pub(crate) fn linear_mut(&mut self) -> Option<&mut Vec<f64>> {
        self.linear.as_mut()
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [FactorBlock] {
        &mut self.blocks
    }

    /// Mutable access to the factor matrix of block `index`.
    pub fn factor_mut(&mut self, index: usize) -> &mut FactorMatrix {
        &mut self.blocks[index].matrix
    }

    pub fn set_linear(&mut self, w: Vec<f64>) -> Result<()> {
        if !self.variant.has_linear() || w.len() != self.dim {
            return Err(HofmError::invalid("linear term does not fit this model"));
        }
        self.linear = Some(w);
        Ok(())
    }

    /// Dimension of the space the factor matrices act on.
    pub fn input_dim(&self) -> usize {
        match self.variant {
            Variant::SharedAugmented => self.dim + self.degree - 1,
            _ => self.dim,
        }
    }

    /// `||w||^2 + sum_t ||P^(t)||^2`; the bias is not included.
    pub fn squared_norm(&self) -> f64 {
        let w = self
            .linear
            .as_ref()
            .map_or(0.0, |w| w.iter().map(|v| v * v).sum());
        w + self
            .blocks
            .iter()
            .map(|b| b.matrix.squared_norm())
            .sum::<f64>()
    }

    pub fn predict<'a>(&self, x: impl Into<SparseRef<'a>>) -> Result<f64> {
        let x = x.into();
        self.check_input(x)?;
        let mut table = DpTable::new();
        if self.variant == Variant::SharedAugmented {
            let augmented = augment_input(x, self.degree);
            Ok(self.predict_prepared(augmented.view(), &mut table))
        } else {
            Ok(self.predict_prepared(x, &mut table))
        }
    }

    /// Prediction for an input already in [`HofmModel::input_dim`] space.
    pub(crate) fn predict_prepared(&self, x: SparseRef<'_>, table: &mut DpTable) -> f64 {
        let linear = self.linear.as_ref().map_or(0.0, |w| x.dot(w));
        self.bias + linear + self.blocks.iter().map(|b| b.value(x, table)).sum::<f64>()
    }

    /// Second-order prediction in `O(nnz(x) k)`:
    /// `<w, x> + 1/2 (||P^T x||^2 - sum_s ||p_s o x||^2)`.
    pub fn predict_fm2_fast<'a>(&self, x: impl Into<SparseRef<'a>>) -> Result<f64> {
        let x = x.into();
        if self.variant != Variant::Fm2 {
            return Err(HofmError::invalid(format!(
                "fast second-order path needs an fm2 model, got {}",
                self.variant
            )));
        }
        self.check_input(x)?;
        let linear = self.linear.as_ref().map_or(0.0, |w| x.dot(w));
        let pairwise: f64 = self.blocks[0]
            .matrix
            .columns()
            .map(|col| {
                let (sum, sum_sq) = x.iter().fold((0.0, 0.0), |(s, q), (j, v)| {
                    let z = col[j] * v;
                    (s + z, q + z * z)
                });
                sum * sum - sum_sq
            })
            .sum();
        Ok(self.bias + linear + 0.5 * pairwise)
    }

    fn check_input(&self, x: SparseRef<'_>) -> Result<()> {
        if x.dim() != self.dim {
            return Err(HofmError::invalid(format!(
                "input dimension {} does not match model dimension {}",
                x.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Mixing weights `gamma_1..gamma_{m-1}` of column `s` of a
    /// `shared_augmented` model (its dummy rows).
    pub fn gamma(&self, s: usize) -> Result<Vec<f64>> {
        if self.variant != Variant::SharedAugmented {
            return Err(HofmError::invalid(
                "gamma is defined for shared_augmented models",
            ));
        }
        let matrix = &self.blocks[0].matrix;
        if s >= matrix.cols() {
            return Err(HofmError::invalid(format!("column {s} out of range")));
        }
        Ok(matrix.column(s)[..self.degree - 1].to_vec())
    }

    /// Per-degree weights of column `s` of a `shared_augmented` model.
    pub fn theta(&self, s: usize) -> Result<ThetaWeights> {
        Ok(gamma_to_theta(&self.gamma(s)?))
    }

    /// Entry of the interaction tensor `W^(t)` for the sorted, distinct
    /// feature tuple `indices`: `sum_s prod_{j in indices} P^(t)[j, s]`.
    pub fn combination_weight(&self, t: usize, indices: &[usize]) -> Result<f64> {
        if self.variant != Variant::Separate && self.variant != Variant::Fm2 {
            return Err(HofmError::invalid(
                "combination weights are defined for separate models",
            ));
        }
        if t < 2 || t > self.degree {
            return Err(HofmError::invalid(format!(
                "degree {t} outside 2..={}",
                self.degree
            )));
        }
        if indices.len() != t {
            return Err(HofmError::invalid(format!(
                "expected {t} indices, got {}",
                indices.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HofmError::invalid(
                "indices must be distinct and strictly increasing",
            ));
        }
        if let Some(&j) = indices.iter().find(|&&j| j >= self.dim) {
            return Err(HofmError::invalid(format!(
                "feature index {j} out of range"
            )));
        }
        let matrix = &self.blocks[t - 2].matrix;
        Ok(matrix
            .columns()
            .map(|col| indices.iter().map(|&j| col[j]).product::<f64>())
            .sum())
    }
}

/// Prepends `m - 1` unit-valued dummy features: `[1, ..., 1, x]`.
pub fn augment_input<'a>(x: impl Into<SparseRef<'a>>, m: usize) -> SparseVector {
    let x = x.into();
    let extra = m.saturating_sub(1);
    let mut indices = Vec::with_capacity(extra + x.nnz());
    let mut values = Vec::with_capacity(extra + x.nnz());
    indices.extend(0..extra);
    values.extend(std::iter::repeat_n(1.0, extra));
    indices.extend(x.indices().iter().map(|&j| j + extra));
    values.extend_from_slice(x.values());
    SparseVector::from_parts_unchecked(x.dim() + extra, indices, values)
}

/// Unrolls dummy-feature weights into per-degree weights:
/// `theta[t - 1] = e_{m-t}(gamma)` with `m = gamma.len() + 1`, so that
/// `A^m([gamma, p], [1, x]) = sum_t theta[t - 1] A^t(p, x)`.
pub fn gamma_to_theta(gamma: &[f64]) -> ThetaWeights {
    let m = gamma.len() + 1;
    // elementary[k] = e_k(gamma)
    let mut elementary = vec![0.0; m];
    elementary[0] = 1.0;
    for (i, &g) in gamma.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            elementary[k] += g * elementary[k - 1];
        }
    }
    ThetaWeights {
        theta: (1..=m).map(|t| elementary[m - t]).collect(),
    }
}
