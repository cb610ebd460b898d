//! Line-oriented text model format.
//!
//! ```text
//! hofm-model v1
//! variant=separate d=3 m=3 bias=0.0000000000000000e0
//! w: <d reals>
//! P t=2 rows=3 cols=2
//! <row 0: cols reals>
//! ...
//! P t=3 rows=3 cols=2
//! ...
//! ```
//!
//! The `w:` line is optional. Reals are written with 17 significant digits,
//! which round-trips every finite `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{BlockKernel, FactorBlock, FactorMatrix, HofmModel, Variant};
use crate::error::{HofmError, Result};

const MAGIC: &str = "hofm-model v1";

pub(crate) fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn save_model<W: Write>(model: &HofmModel, mut sink: W) -> Result<()> {
    let finite = model.bias.is_finite()
        && model.linear.iter().flatten().all(|v| v.is_finite())
        && model
            .blocks
            .iter()
            .all(|b| b.matrix.values().iter().all(|v| v.is_finite()));
    if !finite {
        return Err(HofmError::invalid(
            "refusing to save a model with non-finite parameters",
        ));
    }
    writeln!(sink, "{MAGIC}")?;
    writeln!(
        sink,
        "variant={} d={} m={} bias={}",
        model.variant,
        model.dim,
        model.degree,
        fmt_real(model.bias)
    )?;
    if let Some(w) = &model.linear {
        write!(sink, "w:")?;
        for &v in w {
            write!(sink, " {}", fmt_real(v))?;
        }
        writeln!(sink)?;
    }
    for block in &model.blocks {
        let m = &block.matrix;
        writeln!(
            sink,
            "P t={} rows={} cols={}",
            block.kernel.tag(),
            m.rows(),
            m.cols()
        )?;
        for j in 0..m.rows() {
            let row: Vec<String> = (0..m.cols()).map(|s| fmt_real(m.get(j, s))).collect();
            writeln!(sink, "{}", row.join(" "))?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn save_model_file(model: &HofmModel, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    save_model(model, BufWriter::new(file))
}

pub fn load_model_file(path: impl AsRef<Path>) -> Result<HofmModel> {
    let file = File::open(path)?;
    load_model(BufReader::new(file))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next line, or a format error naming what was expected.
    fn next_line(&mut self, expected: &str) -> Result<String> {
        match self.inner.next() {
            Some(line) => {
                self.line_no += 1;
                Ok(line?)
            }
            None => Err(HofmError::format(
                self.line_no + 1,
                format!("unexpected end of file, expected {expected}"),
            )),
        }
    }

    fn peek_rest_is_empty(&mut self) -> Result<()> {
        for line in self.inner.by_ref() {
            self.line_no += 1;
            if !line?.trim().is_empty() {
                return Err(HofmError::format(
                    self.line_no,
                    "trailing content after model",
                ));
            }
        }
        Ok(())
    }
}

fn parse_real(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| HofmError::format(line, format!("`{token}` is not a real number")))?;
    if !v.is_finite() {
        return Err(HofmError::format(
            line,
            format!("non-finite value `{token}`"),
        ));
    }
    Ok(v)
}

fn parse_reals(text: &str, count: usize, line: usize) -> Result<Vec<f64>> {
    let values = text
        .split_whitespace()
        .map(|t| parse_real(t, line))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != count {
        return Err(HofmError::format(
            line,
            format!("expected {count} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

/// Parses `key=value` tokens in the given key order.
fn parse_fields<'a>(text: &'a str, keys: &[&str], line: usize) -> Result<Vec<&'a str>> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != keys.len() {
        return Err(HofmError::format(
            line,
            format!("expected fields {}", keys.join(" ")),
        ));
    }
    tokens
        .iter()
        .zip(keys)
        .map(|(tok, key)| {
            tok.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| {
                    HofmError::format(line, format!("expected `{key}=...`, found `{tok}`"))
                })
        })
        .collect()
}

fn parse_usize(token: &str, key: &str, line: usize) -> Result<usize> {
    token
        .parse()
        .map_err(|_| HofmError::format(line, format!("`{key}` must be a non-negative integer")))
}

pub fn load_model<R: BufRead>(source: R) -> Result<HofmModel> {
    let mut lines = Lines {
        inner: source.lines(),
        line_no: 0,
    };
    let header = lines.next_line("the model header")?;
    if header.trim() != MAGIC {
        let message = if header.starts_with("hofm-model") {
            format!("unsupported model version `{}`", header.trim())
        } else {
            "not a hofm model file".to_string()
        };
        return Err(HofmError::format(1, message));
    }

    let meta = lines.next_line("the variant line")?;
    let ln = lines.line_no;
    let fields = parse_fields(&meta, &["variant", "d", "m", "bias"], ln)?;
    let variant: Variant = fields[0]
        .parse()
        .map_err(|_| HofmError::format(ln, format!("unknown variant `{}`", fields[0])))?;
    let dim = parse_usize(fields[1], "d", ln)?;
    let degree = parse_usize(fields[2], "m", ln)?;
    let bias = parse_real(fields[3], ln)?;
    if dim == 0 {
        return Err(HofmError::format(ln, "dimension must be positive"));
    }

    let expected_blocks = match variant {
        Variant::Separate => degree.saturating_sub(1),
        _ => 1,
    };

    let mut linear = None;
    let mut blocks = Vec::with_capacity(expected_blocks);
    let mut pending = lines.next_line("a factor matrix header")?;
    if let Some(rest) = pending.strip_prefix("w:") {
        linear = Some(parse_reals(rest, dim, lines.line_no)?);
        if blocks.len() < expected_blocks {
            pending = lines.next_line("a factor matrix header")?;
        }
    }

    for b in 0..expected_blocks {
        if b > 0 {
            pending = lines.next_line("a factor matrix header")?;
        }
        let ln = lines.line_no;
        let rest = pending
            .strip_prefix("P ")
            .ok_or_else(|| HofmError::format(ln, "expected a `P t=.. rows=.. cols=..` header"))?;
        let fields = parse_fields(rest, &["t", "rows", "cols"], ln)?;
        let tag = parse_usize(fields[0], "t", ln)?;
        let rows = parse_usize(fields[1], "rows", ln)?;
        let cols = parse_usize(fields[2], "cols", ln)?;
        let kernel = match variant {
            Variant::AllSubsets => BlockKernel::AllSubsets,
            _ => BlockKernel::Anova(tag),
        };
        if kernel.tag() != tag {
            return Err(HofmError::format(ln, format!("unexpected degree t={tag}")));
        }
        let mut row_values = Vec::with_capacity(rows);
        for _ in 0..rows {
            let text = lines.next_line("a factor matrix row")?;
            row_values.push(parse_reals(&text, cols, lines.line_no)?);
        }
        let matrix = if rows == 0 {
            FactorMatrix::zeros(0, cols)
        } else {
            FactorMatrix::from_rows(&row_values)
                .map_err(|e| HofmError::format(ln, e.to_string()))?
        };
        blocks.push(FactorBlock { kernel, matrix });
    }
    lines.peek_rest_is_empty()?;

    let model = HofmModel {
        variant,
        dim,
        degree,
        bias,
        linear,
        blocks,
    };
    model
        .check_shape()
        .map_err(|message| HofmError::format(2, message))?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> HofmModel {
        let mut model = HofmModel::zeros_with_ranks(Variant::Separate, 3, 3, &[2, 1]).unwrap();
        model.set_bias(0.1);
        model.set_linear(vec![1.0 / 3.0, -2.5e-300, 7.0]).unwrap();
        *model.factor_mut(0) =
            FactorMatrix::from_rows(&[vec![0.1, 0.2], vec![-0.3, 1e10], vec![0.0, -0.0]]).unwrap();
        *model.factor_mut(1) =
            FactorMatrix::from_rows(&[vec![std::f64::consts::PI], vec![1e-17], vec![-4.0]])
                .unwrap();
        model
    }

    fn to_text(model: &HofmModel) -> String {
        let mut buf = Vec::new();
        save_model(model, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = sample_model();
        let text = to_text(&model);
        let loaded = load_model(text.as_bytes()).unwrap();
        assert_eq!(loaded, model);
        let bits = |m: &HofmModel| -> Vec<u64> {
            m.blocks()
                .iter()
                .flat_map(|b| b.matrix.values().iter().map(|v| v.to_bits()))
                .collect()
        };
        assert_eq!(bits(&loaded), bits(&model));
        assert!(text.starts_with("hofm-model v1\nvariant=separate d=3 m=3 bias="));
    }

    #[test]
    fn truncated_file() {
        let text = to_text(&sample_model());
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        match load_model(cut.as_bytes()) {
            Err(HofmError::Format { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_dims() {
        let text = to_text(&sample_model()).replace("P t=2 rows=3", "P t=2 rows=2");
        assert!(matches!(
            load_model(text.as_bytes()),
            Err(HofmError::Format { .. })
        ));
        let text = to_text(&sample_model()).replace("d=3", "d=4");
        assert!(matches!(
            load_model(text.as_bytes()),
            Err(HofmError::Format { line: 3, .. })
        ));
    }

    #[test]
    fn rejects_version_and_non_finite() {
        let text = to_text(&sample_model());
        let v2 = text.replace("hofm-model v1", "hofm-model v2");
        assert!(matches!(
            load_model(v2.as_bytes()),
            Err(HofmError::Format { line: 1, .. })
        ));
        let nan = text.replacen("bias=1.0000000000000001e-1", "bias=NaN", 1);
        assert_ne!(nan, text);
        assert!(matches!(
            load_model(nan.as_bytes()),
            Err(HofmError::Format { line: 2, .. })
        ));
        let mut bad = sample_model();
        bad.set_bias(f64::INFINITY);
        assert!(save_model(&bad, Vec::new()).is_err());
    }

    #[test]
    fn other_variants_round_trip() {
        for (variant, degree) in [
            (Variant::SharedAugmented, 3),
            (Variant::AllSubsets, 0),
            (Variant::Fm2, 2),
        ] {
            let mut model = HofmModel::zeros(variant, 4, degree, 2).unwrap();
            model.factor_mut(0).set(1, 1, -0.125);
            model.set_bias(2.0);
            let loaded = load_model(to_text(&model).as_bytes()).unwrap();
            assert_eq!(loaded, model);
        }
    }

    #[test]
    fn trailing_garbage() {
        let text = to_text(&sample_model()) + "extra\n";
        assert!(load_model(text.as_bytes()).is_err());
    }
}
