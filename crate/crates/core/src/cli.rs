//! Command-line interface: `train`, `predict`, `evaluate`, `link` and
//! `bench`. [`execute`] runs one command against explicit output streams
//! and returns the process exit status.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{load_link_dataset, load_svmlight_file, split_links, SampleMatrix, SplitOptions};
use crate::error::{HofmError, Result};
use crate::eval::{auc, rmse, run_solver_comparison, ComparisonGrid};
use crate::model::io::fmt_real;
use crate::model::{load_model_file, save_model_file, HofmModel, Variant};
use crate::solvers::{fit, EpochRecord, FitResult, Loss, SolverKind, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hofm",
    version,
    about = "Higher-order factorization machines for sparse data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on an svmlight file
    Train(TrainArgs),
    /// Write one prediction per row of an svmlight file
    Predict(PredictArgs),
    /// Score a model on labelled data
    Evaluate(EvaluateArgs),
    /// Split positive links, train on pairs, report test AUC
    Link(LinkArgs),
    /// Compare solvers across degrees and write convergence traces
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Separate,
    #[value(name = "shared_augmented", alias = "shared-augmented")]
    SharedAugmented,
    #[value(name = "all_subsets", alias = "all-subsets")]
    AllSubsets,
    Fm2,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Separate => Variant::Separate,
            VariantArg::SharedAugmented => Variant::SharedAugmented,
            VariantArg::AllSubsets => Variant::AllSubsets,
            VariantArg::Fm2 => Variant::Fm2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Cd,
    Adagrad,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Cd => SolverKind::Cd,
            SolverArg::Adagrad => SolverKind::Adagrad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Squared,
    Logistic,
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Squared => Loss::Squared,
            LossArg::Logistic => Loss::Logistic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Rmse,
    Auc,
}

/// Hyper-parameters shared by every training command.
#[derive(Debug, Clone, Args)]
pub struct HyperArgs {
    #[arg(long, value_enum, default_value = "separate")]
    pub variant: VariantArg,
    /// Highest interaction degree (ignored for all_subsets)
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Rank of every factor matrix
    #[arg(long, default_value_t = 30)]
    pub rank: usize,
    /// Regularization applied to w and every factor matrix
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    #[arg(long, value_enum, default_value = "cd")]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, value_enum, default_value = "squared")]
    pub loss: LossArg,
    /// AdaGrad step size
    #[arg(long = "learning-rate", default_value_t = 0.001)]
    pub learning_rate: f64,
    #[arg(long = "adagrad-epsilon", default_value_t = 1e-8)]
    pub adagrad_epsilon: f64,
    #[arg(long = "init-stddev", default_value_t = 0.01)]
    pub init_stddev: f64,
    /// Relative objective decrease below which training stops (0 = never)
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, env = "HOFM_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl HyperArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            degree: self.degree,
            rank: self.rank,
            beta: self.beta,
            epochs: self.epochs,
            solver: self.solver.into(),
            loss: self.loss.into(),
            learning_rate: self.learning_rate,
            adagrad_epsilon: self.adagrad_epsilon,
            seed: self.seed,
            init_stddev: self.init_stddev,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Model file to write
    #[arg(long)]
    pub out: PathBuf,
    /// Epoch trace CSV (default: `<out>.trace.csv`)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also write the solver's cached training predictions
    #[arg(long = "train-predictions")]
    pub train_predictions: Option<PathBuf>,
    /// Nominal feature dimension (default: largest index in the data)
    #[arg(long)]
    pub dim: Option<usize>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output file (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "rmse")]
    pub metric: MetricArg,
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    /// Node features of the left side, one svmlight row per node
    #[arg(long)]
    pub left: PathBuf,
    /// Node features of the right side (default: same nodes as left)
    #[arg(long)]
    pub right: Option<PathBuf>,
    /// Positive pairs, `i j` per line, 0-based
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long = "train-fraction", default_value_t = 0.5)]
    pub train_fraction: f64,
    /// Maximum number of test negatives (0 = use all)
    #[arg(long = "test-negative-cap", default_value_t = 200_000)]
    pub test_negative_cap: usize,
    /// Optionally save the trained model
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "shared_augmented")]
    pub variant: VariantArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cd,adagrad")]
    pub solvers: Vec<SolverArg>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub degrees: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, value_enum, default_value = "squared")]
    pub loss: LossArg,
    #[arg(long = "learning-rate", default_value_t = 0.001)]
    pub learning_rate: f64,
    #[arg(long, env = "HOFM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Run cells concurrently (timings become unreliable)
    #[arg(long)]
    pub parallel: bool,
    /// CSV output (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn run(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a, stdout),
        Command::Predict(a) => cmd_predict(a, stdout),
        Command::Evaluate(a) => cmd_evaluate(a, stdout),
        Command::Link(a) => cmd_link(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_trace<W: Write>(trace: &[EpochRecord], mut sink: W) -> Result<()> {
    writeln!(sink, "epoch,objective,seconds")?;
    for r in trace {
        writeln!(
            sink,
            "{},{},{}",
            r.epoch,
            fmt_real(r.objective),
            fmt_real(r.seconds)
        )?;
    }
    sink.flush()?;
    Ok(())
}

fn write_column<W: Write>(values: &[f64], mut sink: W) -> Result<()> {
    for v in values {
        writeln!(sink, "{}", fmt_real(*v))?;
    }
    sink.flush()?;
    Ok(())
}

fn train_on(data: &SampleMatrix, targets: &[f64], hyper: &HyperArgs) -> Result<FitResult> {
    fit(data, targets, &hyper.config(), hyper.variant.into())
}

pub fn cmd_train(args: &TrainArgs, stdout: &mut dyn Write) -> Result<()> {
    let (data, targets) = load_svmlight_file(&args.data, args.dim)?;
    let result = train_on(&data, &targets, &args.hyper)?;
    save_model_file(&result.model, &args.out)?;
    let trace_path = args.trace.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".trace.csv");
        PathBuf::from(p)
    });
    write_trace(&result.trace, create(&trace_path)?)?;
    if let Some(path) = &args.train_predictions {
        write_column(&result.train_predictions, create(path)?)?;
    }
    let last = result.trace.last().expect("trace has the initial record");
    writeln!(
        stdout,
        "epochs={} objective={}",
        last.epoch,
        fmt_real(last.objective)
    )?;
    Ok(())
}

fn load_for_model(model: &HofmModel, path: &Path) -> Result<(SampleMatrix, Vec<f64>)> {
    load_svmlight_file(path, Some(model.dim()))
}

fn predict_all(model: &HofmModel, data: &SampleMatrix) -> Result<Vec<f64>> {
    data.rows().map(|row| model.predict(row)).collect()
}

pub fn cmd_predict(args: &PredictArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = load_model_file(&args.model)?;
    let (data, _) = load_for_model(&model, &args.data)?;
    let predictions = predict_all(&model, &data)?;
    match &args.out {
        Some(path) => write_column(&predictions, create(path)?),
        None => write_column(&predictions, stdout),
    }
}

pub fn cmd_evaluate(args: &EvaluateArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = load_model_file(&args.model)?;
    let (data, targets) = load_for_model(&model, &args.data)?;
    let predictions = predict_all(&model, &data)?;
    match args.metric {
        MetricArg::Rmse => writeln!(stdout, "rmse={}", fmt_real(rmse(&targets, &predictions)?))?,
        MetricArg::Auc => writeln!(stdout, "auc={}", fmt_real(auc(&targets, &predictions)?))?,
    }
    Ok(())
}

pub fn cmd_link(args: &LinkArgs, stdout: &mut dyn Write) -> Result<()> {
    let dataset = load_link_dataset(&args.left, args.right.as_deref(), &args.pairs)?;
    let loss: Loss = args.hyper.loss.into();
    let options = SplitOptions {
        train_fraction: args.train_fraction,
        negative_label: loss.negative_label(),
        test_negative_cap: (args.test_negative_cap > 0).then_some(args.test_negative_cap),
    };
    // same seed as training, separate stream
    let mut rng = ChaCha8Rng::seed_from_u64(args.hyper.seed);
    rng.set_stream(1);
    let split = split_links(&dataset, &options, &mut rng)?;
    let result = train_on(&split.train, &split.train_targets, &args.hyper)?;
    if let Some(path) = &args.out {
        save_model_file(&result.model, path)?;
    }
    let scores = predict_all(&result.model, &split.test)?;
    let score = auc(&split.test_targets, &scores)?;
    writeln!(
        stdout,
        "train_positives={} test_positives={} test_negatives={} test_negatives_available={} test_negative_cap={}",
        split.train_positives,
        split.test_positives,
        split.test_targets.len() - split.test_positives,
        split.test_negatives_available,
        split.test_negative_cap.map_or_else(|| "none".to_string(), |c| c.to_string()),
    )?;
    writeln!(stdout, "test_auc={}", fmt_real(score))?;
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<()> {
    if args.solvers.is_empty() || args.degrees.is_empty() {
        return Err(HofmError::invalid(
            "bench needs at least one solver and one degree",
        ));
    }
    let (data, targets) = load_svmlight_file(&args.data, None)?;
    let grid = ComparisonGrid {
        variant: args.variant.into(),
        solvers: args.solvers.iter().map(|&s| s.into()).collect(),
        degrees: args.degrees.clone(),
        base: TrainConfig {
            rank: args.rank,
            beta: args.beta,
            epochs: args.epochs,
            loss: args.loss.into(),
            learning_rate: args.learning_rate,
            seed: args.seed,
            tol: 0.0,
            ..TrainConfig::default()
        },
        parallel: args.parallel,
    };
    let table = run_solver_comparison(&data, &targets, &grid);
    match &args.out {
        Some(path) => table.write_csv(create(path)?)?,
        None => table.write_csv(&mut *stdout)?,
    }
    let failures: Vec<String> = table
        .failures()
        .map(|(cell, e)| format!("{} m={}: {e}", cell.solver, cell.degree))
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(HofmError::invalid(format!(
            "failed cells: {}",
            failures.join("; ")
        )))
    }
}
