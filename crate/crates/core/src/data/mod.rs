//! Sample matrices, svmlight ingestion and link-prediction datasets.

mod link;
mod svmlight;

use std::sync::OnceLock;

use crate::error::{HofmError, Result};
use crate::kernels::{SparseRef, SparseVector};

pub use link::{
    load_link_dataset, load_pairs, make_pair_sample, split_links, LinkDataset, LinkSplit,
    SplitOptions,
};
pub use svmlight::{load_svmlight, load_svmlight_file, write_svmlight};

/// Feature-major (compressed sparse column) copy of a [`SampleMatrix`].
#[derive(Debug, Clone)]
struct FeatureMajor {
    indptr: Vec<usize>,
    samples: Vec<usize>,
    values: Vec<f64>,
}

/// `n` samples of dimension `d` in compressed sparse row layout, with a
/// lazily built feature-major transpose for coordinate descent.
#[derive(Debug)]
pub struct SampleMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    transpose: OnceLock<FeatureMajor>,
}

impl Clone for SampleMatrix {
    fn clone(&self) -> Self {
        SampleMatrix {
            dim: self.dim,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.clone(),
            transpose: OnceLock::new(),
        }
    }
}

impl PartialEq for SampleMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.indptr == other.indptr
            && self.indices == other.indices
            && self.values == other.values
    }
}

impl SampleMatrix {
    pub fn empty(dim: usize) -> Self {
        SampleMatrix {
            dim,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            transpose: OnceLock::new(),
        }
    }

    pub fn from_rows<'a, I, R>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: Into<SparseRef<'a>>,
    {
        let mut matrix = SampleMatrix::empty(dim);
        for row in rows {
            matrix.push_row(row)?;
        }
        Ok(matrix)
    }

    pub fn push_row<'a>(&mut self, row: impl Into<SparseRef<'a>>) -> Result<()> {
        let row = row.into();
        if row.dim() > self.dim {
            return Err(HofmError::invalid(format!(
                "row of dimension {} does not fit matrix dimension {}",
                row.dim(),
                self.dim
            )));
        }
        self.indices.extend_from_slice(row.indices());
        self.values.extend_from_slice(row.values());
        self.indptr.push(self.indices.len());
        self.transpose = OnceLock::new();
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> SparseRef<'_> {
        let range = self.indptr[i]..self.indptr[i + 1];
        SparseRef::from_slices(self.dim, &self.indices[range.clone()], &self.values[range])
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = SparseRef<'_>> {
        (0..self.n_samples()).map(move |i| self.row(i))
    }

    fn feature_major(&self) -> &FeatureMajor {
        self.transpose.get_or_init(|| {
            let mut counts = vec![0usize; self.dim + 1];
            for &j in &self.indices {
                counts[j + 1] += 1;
            }
            for j in 0..self.dim {
                counts[j + 1] += counts[j];
            }
            let indptr = counts.clone();
            let mut cursor = counts;
            let mut samples = vec![0; self.nnz()];
            let mut values = vec![0.0; self.nnz()];
            for i in 0..self.n_samples() {
                for k in self.indptr[i]..self.indptr[i + 1] {
                    let j = self.indices[k];
                    samples[cursor[j]] = i;
                    values[cursor[j]] = self.values[k];
                    cursor[j] += 1;
                }
            }
            FeatureMajor {
                indptr,
                samples,
                values,
            }
        })
    }

    /// Samples with a nonzero in feature `j` (increasing) and their values.
    pub fn feature(&self, j: usize) -> (&[usize], &[f64]) {
        let fm = self.feature_major();
        let range = fm.indptr[j]..fm.indptr[j + 1];
        (&fm.samples[range.clone()], &fm.values[range])
    }

    /// Each row with `m - 1` unit dummy features prepended.
    pub fn augmented(&self, m: usize) -> SampleMatrix {
        let extra = m.saturating_sub(1);
        let mut out = SampleMatrix::empty(self.dim + extra);
        out.indices.reserve(self.nnz() + extra * self.n_samples());
        for row in self.rows() {
            out.indices.extend(0..extra);
            out.values.extend(std::iter::repeat_n(1.0, extra));
            out.indices.extend(row.indices().iter().map(|&j| j + extra));
            out.values.extend_from_slice(row.values());
            out.indptr.push(out.indices.len());
        }
        out
    }

    /// Copy with a larger nominal dimension (no data changes).
    pub fn with_dim(mut self, dim: usize) -> Result<SampleMatrix> {
        if let Some(&max) = self.indices.iter().max() {
            if max >= dim {
                return Err(HofmError::invalid(format!(
                    "feature index {max} does not fit dimension {dim}"
                )));
            }
        }
        self.dim = dim;
        self.transpose = OnceLock::new();
        Ok(self)
    }

    pub fn to_sparse_rows(&self) -> Vec<SparseVector> {
        self.rows().map(|r| r.to_owned()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix() -> SampleMatrix {
        let rows = [
            SparseVector::new(4, [(0, 1.0), (2, 2.0)]).unwrap(),
            SparseVector::zeros(4),
            SparseVector::new(4, [(2, 3.0), (3, 4.0)]).unwrap(),
        ];
        SampleMatrix::from_rows(4, &rows).unwrap()
    }

    #[test]
    fn rows_and_features() {
        let m = matrix();
        assert_eq!(m.n_samples(), 3);
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.row(0).indices(), &[0, 2]);
        assert_eq!(m.row(1).nnz(), 0);
        assert_eq!(m.feature(2), (&[0usize, 2][..], &[2.0, 3.0][..]));
        assert_eq!(m.feature(1).0.len(), 0);
        assert_eq!(m.feature(3).1, &[4.0]);
    }

    #[test]
    fn transpose_is_a_permutation_of_nonzeros() {
        let m = matrix();
        let mut from_rows: Vec<(usize, usize, u64)> = Vec::new();
        for (i, row) in m.rows().enumerate() {
            for (j, v) in row.iter() {
                from_rows.push((i, j, v.to_bits()));
            }
        }
        let mut from_cols = Vec::new();
        for j in 0..m.dim() {
            let (samples, values) = m.feature(j);
            for (&i, &v) in samples.iter().zip(values) {
                from_cols.push((i, j, v.to_bits()));
            }
        }
        from_cols.sort();
        assert_eq!(from_rows, from_cols);
    }

    #[test]
    fn augmentation() {
        let a = matrix().augmented(3);
        assert_eq!(a.dim(), 6);
        assert_eq!(a.row(1).indices(), &[0, 1]);
        assert_eq!(a.row(2).indices(), &[0, 1, 4, 5]);
        assert_eq!(a.feature(0).0, &[0, 1, 2]);
    }

    #[test]
    fn push_rejects_wider_rows() {
        let mut m = SampleMatrix::empty(2);
        assert!(m.push_row(&SparseVector::zeros(3)).is_err());
        assert!(matrix().with_dim(3).is_err());
        assert_eq!(matrix().with_dim(10).unwrap().dim(), 10);
    }
}
