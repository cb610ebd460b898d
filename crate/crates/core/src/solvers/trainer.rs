use std::borrow::Cow;

use rand::Rng;

use super::Loss;
use crate::data::SampleMatrix;
use crate::error::{HofmError, Result};
use crate::kernels::DpTable;
use crate::model::{HofmModel, Variant};

/// Mutable training state: the model, the (possibly augmented) training
/// matrix and a prediction cache `yhat_i` for every sample.
#[derive(Debug)]
pub struct Trainer<'a> {
    pub(super) model: HofmModel,
    pub(super) data: Cow<'a, SampleMatrix>,
    pub(super) targets: &'a [f64],
    pub(super) loss: Loss,
    pub(super) beta: f64,
    pub(super) predictions: Vec<f64>,
    pub(super) adagrad: Option<super::adagrad::Accumulators>,
    pub(super) epoch: usize,
}

impl<'a> Trainer<'a> {
    /// `data` is in the model's input space before augmentation; shared
    /// models get the dummy features added here.
    pub fn new(
        model: HofmModel,
        data: &'a SampleMatrix,
        targets: &'a [f64],
        loss: Loss,
        beta: f64,
    ) -> Result<Self> {
        let n = data.n_samples();
        if n == 0 {
            return Err(HofmError::invalid("empty dataset"));
        }
        if targets.len() != n {
            return Err(HofmError::invalid(format!(
                "{} targets for {n} samples",
                targets.len()
            )));
        }
        if data.dim() != model.dim() {
            return Err(HofmError::invalid(format!(
                "data dimension {} does not match model dimension {}",
                data.dim(),
                model.dim()
            )));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(HofmError::invalid("beta must be finite and non-negative"));
        }
        if let Some(y) = targets.iter().find(|y| !y.is_finite()) {
            return Err(HofmError::invalid(format!("non-finite target {y}")));
        }
        if loss == Loss::Logistic {
            if let Some(y) = targets.iter().find(|&&y| y != 1.0 && y != -1.0) {
                return Err(HofmError::invalid(format!(
                    "logistic targets must be -1 or +1, got {y}"
                )));
            }
        }
        if data
            .rows()
            .any(|r| r.values().iter().any(|v| !v.is_finite()))
        {
            return Err(HofmError::invalid("non-finite feature value"));
        }
        let data = match model.variant() {
            Variant::SharedAugmented => Cow::Owned(data.augmented(model.degree())),
            _ => Cow::Borrowed(data),
        };
        let mut trainer = Trainer {
            model,
            data,
            targets,
            loss,
            beta,
            predictions: vec![0.0; n],
            adagrad: None,
            epoch: 0,
        };
        trainer.recompute_predictions();
        Ok(trainer)
    }

    pub fn model(&self) -> &HofmModel {
        &self.model
    }

    pub fn into_model(self) -> HofmModel {
        self.model
    }

    /// Cached training predictions.
    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }

    /// Training matrix in the model's input space.
    pub fn training_data(&self) -> &SampleMatrix {
        &self.data
    }

    pub fn epochs_run(&self) -> usize {
        self.epoch
    }

    pub fn recompute_predictions(&mut self) {
        let mut table = DpTable::new();
        for (i, row) in self.data.rows().enumerate() {
            self.predictions[i] = self.model.predict_prepared(row, &mut table);
        }
    }

    /// Objective from the prediction cache.
    pub fn objective(&self) -> f64 {
        let n = self.predictions.len() as f64;
        let data_term: f64 = self
            .targets
            .iter()
            .zip(&self.predictions)
            .map(|(&y, &f)| self.loss.value(y, f))
            .sum();
        data_term / n + 0.5 * self.beta * self.model.squared_norm()
    }

    fn finish_epoch(&mut self, refresh: bool) -> Result<f64> {
        if refresh {
            self.recompute_predictions();
        }
        let objective = self.objective();
        if !objective.is_finite() {
            return Err(self.diverged("objective is not finite"));
        }
        Ok(objective)
    }

    pub(super) fn diverged(&self, message: &str) -> HofmError {
        HofmError::Divergence {
            epoch: self.epoch,
            message: message.to_string(),
        }
    }

    /// One outer CD epoch: linear term, then one CD epoch per factor block.
    /// The prediction cache is rebuilt from scratch every 10 epochs.
    pub fn run_cd_epoch(&mut self) -> Result<f64> {
        self.epoch += 1;
        self.fit_linear_cd()?;
        for b in 0..self.model.blocks().len() {
            self.cd_epoch(b)?;
        }
        self.finish_epoch(self.epoch.is_multiple_of(10))
    }

    /// One outer AdaGrad epoch with the same alternating order.
    pub fn run_adagrad_epoch<R: Rng>(
        &mut self,
        learning_rate: f64,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<f64> {
        self.epoch += 1;
        self.adagrad_linear_epoch(learning_rate, epsilon, rng)?;
        for b in 0..self.model.blocks().len() {
            self.adagrad_epoch(b, learning_rate, epsilon, rng)?;
        }
        self.finish_epoch(false)
    }
}
