//! svmlight / libsvm text format: `<label> <index>:<value> ...` with 1-based,
//! strictly increasing indices. `#` starts a comment; blank lines are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::SampleMatrix;
use crate::error::{HofmError, Result};
use crate::kernels::SparseRef;

/// Reads a dataset. The dimension is `max index + 1` unless `dim` is given,
/// in which case every index must fit it.
pub fn load_svmlight<R: BufRead>(
    source: R,
    dim: Option<usize>,
) -> Result<(SampleMatrix, Vec<f64>)> {
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut targets = Vec::new();
    let mut max_index = None::<usize>;

    for (line_idx, line) in source.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label: f64 = label_tok.parse().map_err(|_| {
            HofmError::parse(line_no, format!("label `{label_tok}` is not numeric"))
        })?;
        if !label.is_finite() {
            return Err(HofmError::parse(line_no, "non-finite label"));
        }
        let mut last = None::<usize>;
        for tok in tokens {
            let (idx_tok, val_tok) = tok.split_once(':').ok_or_else(|| {
                HofmError::parse(line_no, format!("token `{tok}` is not index:value"))
            })?;
            if idx_tok == "qid" {
                continue;
            }
            let idx: usize = idx_tok
                .parse()
                .map_err(|_| HofmError::parse(line_no, format!("bad feature index `{idx_tok}`")))?;
            if idx == 0 {
                return Err(HofmError::parse(line_no, "feature indices are 1-based"));
            }
            let j = idx - 1;
            if last.is_some_and(|l| j <= l) {
                return Err(HofmError::parse(
                    line_no,
                    format!("feature indices must be strictly increasing (at {idx})"),
                ));
            }
            last = Some(j);
            if let Some(d) = dim {
                if j >= d {
                    return Err(HofmError::parse(
                        line_no,
                        format!("feature index {idx} exceeds dimension {d}"),
                    ));
                }
            }
            let v: f64 = val_tok
                .parse()
                .map_err(|_| HofmError::parse(line_no, format!("bad feature value `{val_tok}`")))?;
            if !v.is_finite() {
                return Err(HofmError::parse(
                    line_no,
                    format!("non-finite value at index {idx}"),
                ));
            }
            if v != 0.0 {
                indices.push(j);
                values.push(v);
                max_index = Some(max_index.map_or(j, |m| m.max(j)));
            }
        }
        indptr.push(indices.len());
        targets.push(label);
    }

    let dim = dim.unwrap_or_else(|| max_index.map_or(0, |m| m + 1));
    let matrix = SampleMatrix {
        dim,
        indptr,
        indices,
        values,
        transpose: Default::default(),
    };
    Ok((matrix, targets))
}

pub fn load_svmlight_file(
    path: impl AsRef<Path>,
    dim: Option<usize>,
) -> Result<(SampleMatrix, Vec<f64>)> {
    let file = File::open(path)?;
    load_svmlight(BufReader::new(file), dim)
}

/// Writes one line per sample. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_svmlight<W: Write>(matrix: &SampleMatrix, targets: &[f64], mut sink: W) -> Result<()> {
    if targets.len() != matrix.n_samples() {
        return Err(HofmError::invalid(format!(
            "{} targets for {} samples",
            targets.len(),
            matrix.n_samples()
        )));
    }
    for (row, y) in matrix.rows().zip(targets) {
        write_row(&mut sink, *y, row)?;
    }
    sink.flush()?;
    Ok(())
}

fn write_row<W: Write>(sink: &mut W, label: f64, row: SparseRef<'_>) -> Result<()> {
    write!(sink, "{label}")?;
    for (j, v) in row.iter() {
        write!(sink, " {}:{v}", j + 1)?;
    }
    writeln!(sink)?;
    Ok(())
}
