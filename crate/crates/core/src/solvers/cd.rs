//! Cyclic coordinate descent. Every coordinate update exactly minimises the
//! quadratic upper bound of the objective in that coordinate; for squared
//! loss the bound is tight, since the model is affine in any single entry.

use super::Trainer;
use crate::data::SampleMatrix;
use crate::error::Result;
use crate::kernels::{coord_deriv_slices, fill_power_sums, rebuild_from_power_sums};
use crate::model::{BlockKernel, FactorBlock};

/// Per-sample kernel state for one factor column.
enum ColumnCache {
    /// `A^t` and `D^t` for `t = 0..=m`, `stride = m + 1` per sample.
    Anova {
        m: usize,
        anova: Vec<f64>,
        power: Vec<f64>,
        nnz: Vec<usize>,
        scratch: Vec<f64>,
    },
    /// Product of the nonzero factors `1 + p_j x_j` and the count of
    /// factors that are exactly zero.
    AllSubsets {
        product: Vec<f64>,
        zeros: Vec<usize>,
    },
}

impl ColumnCache {
    fn value(&self, i: usize) -> f64 {
        match self {
            ColumnCache::Anova { m, anova, .. } => anova[i * (m + 1) + m],
            ColumnCache::AllSubsets { product, zeros } => {
                if zeros[i] == 0 {
                    product[i]
                } else {
                    0.0
                }
            }
        }
    }

    fn derivative(&mut self, i: usize, p: f64, x: f64) -> f64 {
        match self {
            ColumnCache::Anova {
                m,
                anova,
                power,
                nnz,
                scratch,
            } => {
                let range = i * (*m + 1)..(i + 1) * (*m + 1);
                coord_deriv_slices(&anova[range.clone()], &power[range], nnz[i], p, x, scratch)
            }
            ColumnCache::AllSubsets { product, zeros } => {
                let factor = 1.0 + p * x;
                let rest = match (factor == 0.0, zeros[i]) {
                    (true, 1) => product[i],
                    (false, 0) => product[i] / factor,
                    _ => 0.0,
                };
                x * rest
            }
        }
    }

    /// Moves sample `i` from `p_old` to `p_new` in this coordinate and
    /// returns the change of the kernel value.
    fn update(&mut self, i: usize, p_old: f64, p_new: f64, x: f64) -> f64 {
        let before = self.value(i);
        match self {
            ColumnCache::Anova {
                m,
                anova,
                power,
                nnz,
                ..
            } => {
                let range = i * (*m + 1)..(i + 1) * (*m + 1);
                let pw = &mut power[range.clone()];
                let (z_old, z_new) = (p_old * x, p_new * x);
                let (mut a, mut b) = (1.0, 1.0);
                for slot in pw.iter_mut().skip(1) {
                    a *= z_old;
                    b *= z_new;
                    *slot += b - a;
                }
                rebuild_from_power_sums(pw, &mut anova[range], nnz[i]);
            }
            ColumnCache::AllSubsets { product, zeros } => {
                let (f_old, f_new) = (1.0 + p_old * x, 1.0 + p_new * x);
                if f_old == 0.0 {
                    zeros[i] -= 1;
                } else {
                    product[i] /= f_old;
                }
                if f_new == 0.0 {
                    zeros[i] += 1;
                } else {
                    product[i] *= f_new;
                }
            }
        }
        self.value(i) - before
    }
}

impl Trainer<'_> {
    fn column_cache(data: &SampleMatrix, b: &FactorBlock, s: usize) -> ColumnCache {
        let col = b.matrix.column(s);
        let n = data.n_samples();
        match b.kernel {
            BlockKernel::Anova(m) => {
                let stride = m + 1;
                let mut anova = vec![0.0; n * stride];
                let mut power = vec![0.0; n * stride];
                let mut nnz = Vec::with_capacity(n);
                for (i, row) in data.rows().enumerate() {
                    let range = i * stride..(i + 1) * stride;
                    fill_power_sums(col, row, &mut power[range.clone()]);
                    rebuild_from_power_sums(&power[range.clone()], &mut anova[range], row.nnz());
                    nnz.push(row.nnz());
                }
                ColumnCache::Anova {
                    m,
                    anova,
                    power,
                    nnz,
                    scratch: Vec::new(),
                }
            }
            BlockKernel::AllSubsets => {
                let mut product = vec![1.0; n];
                let mut zeros = vec![0; n];
                for (i, row) in data.rows().enumerate() {
                    for (j, v) in row.iter() {
                        let f = 1.0 + col[j] * v;
                        if f == 0.0 {
                            zeros[i] += 1;
                        } else {
                            product[i] *= f;
                        }
                    }
                }
                ColumnCache::AllSubsets { product, zeros }
            }
        }
    }

    /// One pass of CD over every entry of factor block `block`, column by
    /// column, maintaining the prediction cache. Returns the objective.
    pub fn cd_epoch(&mut self, block: usize) -> Result<f64> {
        let n = self.data.n_samples() as f64;
        let mu = self.loss.smoothness();
        let (rows, cols) = {
            let m = &self.model.blocks()[block].matrix;
            (m.rows(), m.cols())
        };
        let data = &*self.data;
        for s in 0..cols {
            let mut cache = Self::column_cache(data, &self.model.blocks()[block], s);
            for j in 0..rows {
                let (samples, values) = data.feature(j);
                let p = self.model.blocks()[block].matrix.get(j, s);
                let mut curvature = 0.0;
                let mut gradient = 0.0;
                for (&i, &x) in samples.iter().zip(values) {
                    let d = cache.derivative(i, p, x);
                    curvature += d * d;
                    gradient += self.loss.derivative(self.targets[i], self.predictions[i]) * d;
                }
                let eta = mu * curvature / n + self.beta;
                if eta == 0.0 {
                    continue;
                }
                let p_new = p * (1.0 - self.beta / eta) - gradient / n / eta;
                if !p_new.is_finite() {
                    return Err(self.diverged("factor update is not finite"));
                }
                if p_new == p {
                    continue;
                }
                self.model.blocks_mut()[block].matrix.set(j, s, p_new);
                for (&i, &x) in samples.iter().zip(values) {
                    self.predictions[i] += cache.update(i, p, p_new, x);
                }
            }
        }
        Ok(self.objective())
    }

    /// Exact coordinate updates of the bias and then each `w_j`.
    pub fn fit_linear_cd(&mut self) -> Result<f64> {
        let n = self.data.n_samples() as f64;
        let mu = self.loss.smoothness();

        let gradient: f64 = self
            .targets
            .iter()
            .zip(&self.predictions)
            .map(|(&y, &f)| self.loss.derivative(y, f))
            .sum::<f64>()
            / n;
        let step = gradient / mu;
        if !step.is_finite() {
            return Err(self.diverged("bias update is not finite"));
        }
        if step != 0.0 {
            self.model.set_bias(self.model.bias() - step);
            for f in &mut self.predictions {
                *f -= step;
            }
        }

        if self.model.linear().is_some() {
            let data = &*self.data;
            for j in 0..data.dim() {
                let (samples, values) = data.feature(j);
                let w = self.model.linear().expect("linear term")[j];
                let mut curvature = 0.0;
                let mut gradient = 0.0;
                for (&i, &x) in samples.iter().zip(values) {
                    curvature += x * x;
                    gradient += self.loss.derivative(self.targets[i], self.predictions[i]) * x;
                }
                let eta = mu * curvature / n + self.beta;
                if eta == 0.0 {
                    continue;
                }
                let w_new = w * (1.0 - self.beta / eta) - gradient / n / eta;
                if !w_new.is_finite() {
                    return Err(self.diverged("linear update is not finite"));
                }
                if w_new == w {
                    continue;
                }
                self.model.linear_mut().expect("linear term")[j] = w_new;
                for (&i, &x) in samples.iter().zip(values) {
                    self.predictions[i] += (w_new - w) * x;
                }
            }
        }
        Ok(self.objective())
    }
}
