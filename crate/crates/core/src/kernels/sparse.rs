use crate::error::{HofmError, Result};

/// A sparse real vector: strictly increasing indices in `[0, dim)` and no
/// stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Borrowed view of a sparse vector, e.g. one row of a
/// [`SampleMatrix`](crate::data::SampleMatrix).
#[derive(Debug, Clone, Copy)]
pub struct SparseRef<'a> {
    dim: usize,
    indices: &'a [usize],
    values: &'a [f64],
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs, dropping explicit zeros.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (j, v) in entries {
            if j >= dim {
                return Err(HofmError::invalid(format!(
                    "index {j} out of range for dimension {dim}"
                )));
            }
            if let Some(&last) = indices.last() {
                if j <= last {
                    return Err(HofmError::invalid(format!(
                        "indices must be strictly increasing ({last} then {j})"
                    )));
                }
            }
            if !v.is_finite() {
                return Err(HofmError::invalid(format!("non-finite value at index {j}")));
            }
            if v != 0.0 {
                indices.push(j);
                values.push(v);
            }
        }
        Ok(SparseVector {
            dim,
            indices,
            values,
        })
    }

    pub fn from_dense(dense: &[f64]) -> Result<Self> {
        SparseVector::new(dense.len(), dense.iter().copied().enumerate())
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Caller guarantees the invariants; used for vectors derived from
    /// already-valid ones (shifts, concatenations).
    pub(crate) fn from_parts_unchecked(dim: usize, indices: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().is_none_or(|&j| j < dim));
        SparseVector {
            dim,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn view(&self) -> SparseRef<'_> {
        SparseRef {
            dim: self.dim,
            indices: &self.indices,
            values: &self.values,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.view().iter()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.view().get(j)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        self.view().to_dense()
    }
}

impl<'a> SparseRef<'a> {
    pub(crate) fn from_slices(dim: usize, indices: &'a [usize], values: &'a [f64]) -> Self {
        SparseRef {
            dim,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &'a [usize] {
        self.indices
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, j: usize) -> f64 {
        match self.indices.binary_search(&j) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(j, v)| dense[j] * v).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (j, v) in self.iter() {
            out[j] = v;
        }
        out
    }

    pub fn to_owned(&self) -> SparseVector {
        SparseVector::from_parts_unchecked(self.dim, self.indices.to_vec(), self.values.to_vec())
    }
}

impl<'a> From<&'a SparseVector> for SparseRef<'a> {
    fn from(v: &'a SparseVector) -> Self {
        v.view()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_zeros_and_checks_order() {
        let v = SparseVector::new(4, [(0, 1.0), (2, 0.0), (3, -2.0)]).unwrap();
        assert_eq!(v.indices(), &[0, 3]);
        assert_eq!(v.nnz(), 2);
        assert_eq!(v.to_dense(), vec![1.0, 0.0, 0.0, -2.0]);

        assert!(SparseVector::new(4, [(2, 1.0), (1, 1.0)]).is_err());
        assert!(SparseVector::new(4, [(1, 1.0), (1, 1.0)]).is_err());
        assert!(SparseVector::new(4, [(4, 1.0)]).is_err());
        assert!(SparseVector::new(4, [(0, f64::NAN)]).is_err());
    }

    #[test]
    fn get_and_dot() {
        let v = SparseVector::new(5, [(1, 2.0), (4, 3.0)]).unwrap();
        assert_eq!(v.get(1), 2.0);
        assert_eq!(v.get(2), 0.0);
        assert_eq!(v.view().dot(&[1.0, 1.0, 1.0, 1.0, 2.0]), 8.0);
    }
}
