use std::io::Write;
use std::thread;

use crate::data::SampleMatrix;
use crate::error::{HofmError, Result};
use crate::model::io::fmt_real;
use crate::model::Variant;
use crate::solvers::{fit, EpochRecord, SolverKind, TrainConfig};

/// The `(solver, degree)` cells to run. Every cell starts from `base` with
/// its solver and degree swapped in, so all cells share a seed.
#[derive(Debug, Clone)]
pub struct ComparisonGrid {
    pub variant: Variant,
    pub solvers: Vec<SolverKind>,
    pub degrees: Vec<usize>,
    pub base: TrainConfig,
    /// Run cells on separate threads. Timings then interfere.
    pub parallel: bool,
}

#[derive(Debug)]
pub struct CellTrace {
    pub solver: SolverKind,
    pub degree: usize,
    pub trace: Result<Vec<EpochRecord>>,
}

#[derive(Debug)]
pub struct ComparisonTable {
    pub cells: Vec<CellTrace>,
}

impl ComparisonTable {
    /// Header `solver,m,epoch,objective,seconds`, one row per recorded
    /// epoch of every successful cell.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "solver,m,epoch,objective,seconds")?;
        for cell in &self.cells {
            if let Ok(trace) = &cell.trace {
                for r in trace {
                    writeln!(
                        sink,
                        "{},{},{},{},{}",
                        cell.solver,
                        cell.degree,
                        r.epoch,
                        fmt_real(r.objective),
                        fmt_real(r.seconds)
                    )?;
                }
            }
        }
        sink.flush()?;
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&CellTrace, &HofmError)> {
        self.cells
            .iter()
            .filter_map(|c| c.trace.as_ref().err().map(|e| (c, e)))
    }
}

/// Trains every cell of the grid. A failing cell records its error and the
/// remaining cells still run.
pub fn run_solver_comparison(
    data: &SampleMatrix,
    targets: &[f64],
    grid: &ComparisonGrid,
) -> ComparisonTable {
    let jobs: Vec<(SolverKind, usize)> = grid
        .solvers
        .iter()
        .flat_map(|&s| grid.degrees.iter().map(move |&m| (s, m)))
        .collect();
    let run = |(solver, degree): (SolverKind, usize)| {
        let config = TrainConfig {
            solver,
            degree,
            ..grid.base.clone()
        };
        CellTrace {
            solver,
            degree,
            trace: fit(data, targets, &config, grid.variant).map(|r| r.trace),
        }
    };
    let cells = if grid.parallel {
        thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .iter()
                .map(|&job| scope.spawn(move || run(job)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("comparison cell panicked"))
                .collect()
        })
    } else {
        jobs.into_iter().map(run).collect()
    };
    ComparisonTable { cells }
}
