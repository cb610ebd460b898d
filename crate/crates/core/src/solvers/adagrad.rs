//! Stochastic AdaGrad over samples in a random order. Regularisation is
//! applied lazily: only the entries on a sample's support receive the
//! `beta * p` term at that step.

use rand::seq::SliceRandom;
use rand::Rng;

use super::Trainer;
use crate::error::Result;
use crate::kernels::{all_subsets_grad_into, anova_grad_into, DpTable};
use crate::model::BlockKernel;

/// Squared-gradient sums, laid out like the parameters they belong to.
#[derive(Debug, Clone)]
pub(super) struct Accumulators {
    bias: f64,
    linear: Vec<f64>,
    blocks: Vec<Vec<f64>>,
}

/// `accum += g^2; param -= lr * g / (sqrt(accum) + eps)`. A zero gradient
/// leaves the parameter untouched.
pub fn adagrad_step(param: &mut f64, grad: f64, accum: &mut f64, learning_rate: f64, epsilon: f64) {
    if grad == 0.0 {
        return;
    }
    *accum += grad * grad;
    *param -= learning_rate * grad / (accum.sqrt() + epsilon);
}

impl Trainer<'_> {
    fn accumulators(&mut self) -> &mut Accumulators {
        let model = &self.model;
        self.adagrad.get_or_insert_with(|| Accumulators {
            bias: 0.0,
            linear: vec![0.0; model.linear().map_or(0, |w| w.len())],
            blocks: model
                .blocks()
                .iter()
                .map(|b| vec![0.0; b.matrix.rows() * b.matrix.cols()])
                .collect(),
        })
    }

    fn shuffled_order<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.data.n_samples()).collect();
        order.shuffle(rng);
        order
    }

    /// One AdaGrad pass over the samples for factor block `block`; the rest
    /// of the model is held fixed. Returns the objective.
    pub fn adagrad_epoch<R: Rng>(
        &mut self,
        block: usize,
        learning_rate: f64,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<f64> {
        let order = self.shuffled_order(rng);
        self.accumulators();
        let data = &*self.data;
        let kernel = self.model.blocks()[block].kernel;
        let k = self.model.blocks()[block].matrix.cols();
        let rows = self.model.blocks()[block].matrix.rows();

        let mut table = DpTable::new();
        let offsets: Vec<f64> = data
            .rows()
            .enumerate()
            .map(|(i, row)| self.predictions[i] - self.model.blocks()[block].value(row, &mut table))
            .collect();

        let mut tables = vec![DpTable::new(); k];
        let mut grad = Vec::new();
        let accum = &mut self.adagrad.as_mut().expect("accumulators").blocks[block];
        for &i in &order {
            let row = data.row(i);
            let matrix = &mut self.model.blocks_mut()[block].matrix;
            let mut value = 0.0;
            if let BlockKernel::Anova(m) = kernel {
                for (s, table) in tables.iter_mut().enumerate() {
                    value += table.fill(matrix.column(s), row, m);
                }
            } else {
                value = matrix
                    .columns()
                    .map(|col| row.iter().map(|(j, v)| 1.0 + col[j] * v).product::<f64>())
                    .sum();
            }
            let outer = self.loss.derivative(self.targets[i], offsets[i] + value);
            grad.resize(row.nnz(), 0.0);
            for s in 0..k {
                let col = matrix.column(s);
                match kernel {
                    BlockKernel::Anova(_) => anova_grad_into(col, row, &tables[s], &mut grad),
                    BlockKernel::AllSubsets => {
                        all_subsets_grad_into(col, row, &mut grad);
                    }
                }
                let col = matrix.column_mut(s);
                for (pos, &j) in row.indices().iter().enumerate() {
                    let g = outer * grad[pos] + self.beta * col[j];
                    adagrad_step(
                        &mut col[j],
                        g,
                        &mut accum[s * rows + j],
                        learning_rate,
                        epsilon,
                    );
                }
            }
        }
        let matrix = &self.model.blocks()[block].matrix;
        if matrix.values().iter().any(|v| !v.is_finite()) {
            return Err(self.diverged("factor entries are not finite"));
        }
        for (i, row) in data.rows().enumerate() {
            self.predictions[i] = offsets[i] + self.model.blocks()[block].value(row, &mut table);
        }
        Ok(self.objective())
    }

    /// One AdaGrad pass for the bias and, where present, `w`.
    pub fn adagrad_linear_epoch<R: Rng>(
        &mut self,
        learning_rate: f64,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<f64> {
        let order = self.shuffled_order(rng);
        self.accumulators();
        let data = &*self.data;
        let linear_part = |w: Option<&[f64]>, i: usize| w.map_or(0.0, |w| data.row(i).dot(w));
        let offsets: Vec<f64> = (0..data.n_samples())
            .map(|i| self.predictions[i] - self.model.bias() - linear_part(self.model.linear(), i))
            .collect();

        let acc = self.adagrad.as_mut().expect("accumulators");
        for &i in &order {
            let row = data.row(i);
            let current = self.model.bias() + linear_part(self.model.linear(), i);
            let outer = self.loss.derivative(self.targets[i], offsets[i] + current);
            let mut bias = self.model.bias();
            adagrad_step(&mut bias, outer, &mut acc.bias, learning_rate, epsilon);
            self.model.set_bias(bias);
            if let Some(w) = self.model.linear_mut() {
                for (j, x) in row.iter() {
                    let g = outer * x + self.beta * w[j];
                    adagrad_step(&mut w[j], g, &mut acc.linear[j], learning_rate, epsilon);
                }
            }
        }
        let finite = self.model.bias().is_finite()
            && self
                .model
                .linear()
                .is_none_or(|w| w.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(self.diverged("linear parameters are not finite"));
        }
        for (i, offset) in offsets.iter().enumerate() {
            self.predictions[i] = offset + self.model.bias() + linear_part(self.model.linear(), i);
        }
        Ok(self.objective())
    }
}
