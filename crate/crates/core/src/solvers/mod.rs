//! Training by alternating minimisation over the linear term and each factor
//! block, using either cyclic coordinate descent or AdaGrad.
//!
//! Each outer epoch visits `(bias, w)` first and then the factor blocks in
//! increasing degree. The objective is
//! `(1/n) sum_i loss(y_i, yhat_i) + beta/2 (||w||^2 + sum_t ||P^(t)||^2)`
//! with an unregularised bias.

mod adagrad;
mod cd;
mod trainer;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::SampleMatrix;
use crate::error::{HofmError, Result};
use crate::model::{HofmModel, Variant};

pub use adagrad::adagrad_step;
pub use trainer::Trainer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `1/2 (yhat - y)^2`
    Squared,
    /// `log(1 + exp(-y yhat))` with `y` in `{-1, +1}`
    Logistic,
}

impl Loss {
    pub fn value(self, y: f64, yhat: f64) -> f64 {
        match self {
            Loss::Squared => 0.5 * (yhat - y) * (yhat - y),
            Loss::Logistic => {
                let z = -y * yhat;
                z.max(0.0) + (-z.abs()).exp().ln_1p()
            }
        }
    }

    /// Derivative with respect to the prediction.
    pub fn derivative(self, y: f64, yhat: f64) -> f64 {
        match self {
            Loss::Squared => yhat - y,
            Loss::Logistic => -y * sigmoid(-y * yhat),
        }
    }

    /// Lipschitz constant of the derivative.
    pub fn smoothness(self) -> f64 {
        match self {
            Loss::Squared => 1.0,
            Loss::Logistic => 0.25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Loss::Squared => "squared",
            Loss::Logistic => "logistic",
        }
    }

    /// Target used for negative examples under this loss.
    pub fn negative_label(self) -> f64 {
        match self {
            Loss::Squared => 0.0,
            Loss::Logistic => -1.0,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl FromStr for Loss {
    type Err = HofmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Loss::Squared),
            "logistic" => Ok(Loss::Logistic),
            other => Err(HofmError::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Cd,
    Adagrad,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Cd => "cd",
            SolverKind::Adagrad => "adagrad",
        }
    }
}

impl FromStr for SolverKind {
    type Err = HofmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cd" => Ok(SolverKind::Cd),
            "adagrad" => Ok(SolverKind::Adagrad),
            other => Err(HofmError::invalid(format!("unknown solver `{other}`"))),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub degree: usize,
    pub rank: usize,
    /// One regularisation strength for every degree.
    pub beta: f64,
    pub epochs: usize,
    pub solver: SolverKind,
    pub loss: Loss,
    pub learning_rate: f64,
    pub adagrad_epsilon: f64,
    pub seed: u64,
    pub init_stddev: f64,
    /// Stop once the relative objective decrease of an epoch falls below
    /// this; 0 disables early stopping.
    pub tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            degree: 2,
            rank: 30,
            beta: 0.1,
            epochs: 50,
            solver: SolverKind::Cd,
            loss: Loss::Squared,
            learning_rate: 0.001,
            adagrad_epsilon: 1e-8,
            seed: 0,
            init_stddev: 0.01,
            tol: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, variant: Variant) -> Result<()> {
        let finite = [
            self.beta,
            self.learning_rate,
            self.adagrad_epsilon,
            self.init_stddev,
            self.tol,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(HofmError::invalid("training parameters must be finite"));
        }
        if self.beta < 0.0 {
            return Err(HofmError::invalid("beta must be non-negative"));
        }
        if self.rank == 0 {
            return Err(HofmError::invalid("rank must be positive"));
        }
        if self.init_stddev <= 0.0 {
            return Err(HofmError::invalid("init stddev must be positive"));
        }
        if self.tol < 0.0 {
            return Err(HofmError::invalid("tolerance must be non-negative"));
        }
        if self.solver == SolverKind::Adagrad
            && (self.learning_rate <= 0.0 || self.adagrad_epsilon <= 0.0)
        {
            return Err(HofmError::invalid(
                "AdaGrad needs a positive learning rate and epsilon",
            ));
        }
        match variant {
            Variant::Separate | Variant::SharedAugmented if self.degree < 2 => Err(
                HofmError::invalid(format!("{variant} models need degree >= 2")),
            ),
            Variant::Fm2 if self.degree != 2 => Err(HofmError::invalid("fm2 models have degree 2")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 0 is the initial model.
    pub epoch: usize,
    pub objective: f64,
    /// Wall-clock seconds since training started.
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: HofmModel,
    pub trace: Vec<EpochRecord>,
    /// Training-set predictions of `model` as maintained by the solver.
    pub train_predictions: Vec<f64>,
}

/// A zero model of the requested shape whose factor entries are drawn from
/// `N(0, init_stddev^2)`; bias and `w` start at zero.
pub fn init_model<R: rand::Rng>(
    variant: Variant,
    dim: usize,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<HofmModel> {
    let mut model = HofmModel::zeros(variant, dim, config.degree, config.rank)?;
    let normal = Normal::new(0.0, config.init_stddev)
        .map_err(|e| HofmError::invalid(format!("bad init stddev: {e}")))?;
    for block in model.blocks_mut() {
        for v in block.matrix.values_mut() {
            *v = normal.sample(rng);
        }
    }
    Ok(model)
}

/// Regularised training objective of `model` on a dataset.
pub fn objective(
    model: &HofmModel,
    data: &SampleMatrix,
    targets: &[f64],
    loss: Loss,
    beta: f64,
) -> Result<f64> {
    if targets.len() != data.n_samples() {
        return Err(HofmError::invalid(
            "target count does not match sample count",
        ));
    }
    let n = data.n_samples().max(1) as f64;
    let mut total = 0.0;
    for (row, &y) in data.rows().zip(targets) {
        total += loss.value(y, model.predict(row)?);
    }
    Ok(total / n + 0.5 * beta * model.squared_norm())
}

/// Trains a model of the given variant.
///
/// CD never increases the objective. AdaGrad is not monotone, so the
/// iterate with the lowest recorded objective is returned.
pub fn fit(
    data: &SampleMatrix,
    targets: &[f64],
    config: &TrainConfig,
    variant: Variant,
) -> Result<FitResult> {
    config.validate(variant)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let model = init_model(variant, data.dim(), config, &mut rng)?;
    let mut trainer = Trainer::new(model, data, targets, config.loss, config.beta)?;

    let mut trace = vec![EpochRecord {
        epoch: 0,
        objective: trainer.objective(),
        seconds: start.elapsed().as_secs_f64(),
    }];
    let mut best: Option<(f64, HofmModel, Vec<f64>)> = None;
    let mut previous = trace[0].objective;

    for epoch in 1..=config.epochs {
        let objective = match config.solver {
            SolverKind::Cd => trainer.run_cd_epoch()?,
            SolverKind::Adagrad => {
                trainer.run_adagrad_epoch(config.learning_rate, config.adagrad_epsilon, &mut rng)?
            }
        };
        trace.push(EpochRecord {
            epoch,
            objective,
            seconds: start.elapsed().as_secs_f64(),
        });
        if config.solver == SolverKind::Adagrad {
            let improved = objective < best.as_ref().map_or(trace[0].objective, |b| b.0);
            if improved {
                best = Some((
                    objective,
                    trainer.model().clone(),
                    trainer.predictions().to_vec(),
                ));
            }
        }
        if config.tol > 0.0 && previous - objective < config.tol * previous.abs() {
            break;
        }
        previous = objective;
    }

    let (model, train_predictions) = match best {
        Some((objective, model, predictions)) if objective < trainer.objective() => {
            (model, predictions)
        }
        _ if config.solver == SolverKind::Adagrad && trainer.objective() > trace[0].objective => {
            // every AdaGrad epoch was worse than the start
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let initial = init_model(variant, data.dim(), config, &mut rng)?;
            let restored = Trainer::new(initial, data, targets, config.loss, config.beta)?;
            let predictions = restored.predictions().to_vec();
            (restored.into_model(), predictions)
        }
        _ => {
            let predictions = trainer.predictions().to_vec();
            (trainer.into_model(), predictions)
        }
    };
    Ok(FitResult {
        model,
        trace,
        train_predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SparseVector;

    #[test]
    fn loss_definitions() {
        assert_eq!(Loss::Squared.value(1.0, 3.0), 2.0);
        assert_eq!(Loss::Squared.derivative(1.0, 3.0), 2.0);
        assert_eq!(Loss::Squared.smoothness(), 1.0);
        assert!((Loss::Logistic.value(1.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((Loss::Logistic.derivative(1.0, 0.0) + 0.5).abs() < 1e-15);
        assert_eq!(Loss::Logistic.smoothness(), 0.25);
        // large margins stay finite
        assert!(Loss::Logistic.value(-1.0, 800.0).is_finite());
        assert!((Loss::Logistic.value(-1.0, 800.0) - 800.0).abs() < 1e-9);
        let h = 1e-6;
        for &(y, f) in &[(1.0, 0.3), (-1.0, 2.0), (1.0, -4.0)] {
            let fd = (Loss::Logistic.value(y, f + h) - Loss::Logistic.value(y, f - h)) / (2.0 * h);
            assert!((fd - Loss::Logistic.derivative(y, f)).abs() < 1e-8);
        }
    }

    fn tiny_data(rows: &[&[f64]]) -> SampleMatrix {
        let vs: Vec<SparseVector> = rows
            .iter()
            .map(|r| SparseVector::from_dense(r).unwrap())
            .collect();
        SampleMatrix::from_rows(rows[0].len(), &vs).unwrap()
    }

    #[test]
    fn objective_examples() {
        let data = tiny_data(&[&[1.0]]);
        let zero = HofmModel::zeros(Variant::Separate, 1, 2, 1).unwrap();
        assert_eq!(
            objective(&zero, &data, &[2.0], Loss::Squared, 0.0).unwrap(),
            2.0
        );

        let zero_data = tiny_data(&[&[0.0, 0.0]]);
        let mut model = HofmModel::zeros(Variant::Separate, 2, 2, 1).unwrap();
        model
            .factor_mut(0)
            .column_mut(0)
            .copy_from_slice(&[2.0, 0.0]);
        // prediction is 0 on the zero sample, so only the regularizer remains
        assert_eq!(
            objective(&model, &zero_data, &[0.0], Loss::Squared, 0.3).unwrap(),
            0.6
        );

        let mut perfect = HofmModel::zeros(Variant::Separate, 1, 2, 1).unwrap();
        perfect.set_bias(2.0);
        assert_eq!(
            objective(&perfect, &data, &[2.0], Loss::Squared, 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn degenerate_linear_fit() {
        let data = tiny_data(&[&[1.0]]);
        let config = TrainConfig {
            degree: 2,
            rank: 1,
            beta: 0.0,
            epochs: 5,
            tol: 0.0,
            ..TrainConfig::default()
        };
        let result = fit(&data, &[1.0], &config, Variant::Separate).unwrap();
        assert!((result.model.predict(data.row(0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(result.trace.last().unwrap().objective < 1e-20);
    }

    #[test]
    fn zero_epochs_return_initialization() {
        let data = tiny_data(&[&[1.0, 0.5], &[0.0, 2.0]]);
        let config = TrainConfig {
            degree: 3,
            rank: 2,
            epochs: 0,
            seed: 11,
            ..TrainConfig::default()
        };
        let result = fit(&data, &[1.0, 0.0], &config, Variant::Separate).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let expected = init_model(Variant::Separate, 2, &config, &mut rng).unwrap();
        assert_eq!(result.model, expected);
        assert_eq!(result.trace.len(), 1);
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let data = tiny_data(&[&[1.0]]);
        let config = TrainConfig::default();
        assert!(fit(&SampleMatrix::empty(1), &[], &config, Variant::Separate).is_err());
        assert!(fit(&data, &[f64::NAN], &config, Variant::Separate).is_err());
        let logistic = TrainConfig {
            loss: Loss::Logistic,
            ..TrainConfig::default()
        };
        assert!(fit(&data, &[0.0], &logistic, Variant::Separate).is_err());
        let bad_degree = TrainConfig {
            degree: 1,
            ..TrainConfig::default()
        };
        assert!(fit(&data, &[1.0], &bad_degree, Variant::Separate).is_err());
    }

    #[test]
    fn divergence_names_epoch() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0 + i as f64, 2.0, -1.0]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let data = tiny_data(&refs);
        let targets: Vec<f64> = (0..20).map(|i| 1e6 * i as f64).collect();
        let config = TrainConfig {
            solver: SolverKind::Adagrad,
            learning_rate: 1e300,
            degree: 3,
            rank: 2,
            epochs: 3,
            tol: 0.0,
            ..TrainConfig::default()
        };
        match fit(&data, &targets, &config, Variant::Separate) {
            Err(HofmError::Divergence { epoch, .. }) => assert_eq!(epoch, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
