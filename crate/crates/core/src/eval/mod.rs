//! Metrics and the solver comparison runner.

mod comparison;

use crate::error::{HofmError, Result};

pub use comparison::{run_solver_comparison, CellTrace, ComparisonGrid, ComparisonTable};

/// Area under the ROC curve. Labels `> 0` are positives; tied scores count
/// one half per positive-negative pair. Uses mid-ranks, `O(n log n)`.
pub fn auc(labels: &[f64], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(HofmError::invalid(format!(
            "{} labels for {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(HofmError::invalid("scores must be finite"));
    }
    let positives = labels.iter().filter(|&&l| l > 0.0).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(HofmError::UndefinedMetric(format!(
            "AUC needs both classes ({positives} positives, {negatives} negatives)"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // sum of 1-based ranks of the positives, ties sharing their mean rank
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let mid_rank = (start + end + 1) as f64 / 2.0;
        let tied_positives = order[start..end]
            .iter()
            .filter(|&&i| labels[i] > 0.0)
            .count();
        rank_sum += mid_rank * tied_positives as f64;
        start = end;
    }
    let np = positives as f64;
    let u = rank_sum - np * (np + 1.0) / 2.0;
    Ok(u / (np * negatives as f64))
}

pub fn rmse(targets: &[f64], predictions: &[f64]) -> Result<f64> {
    if targets.len() != predictions.len() {
        return Err(HofmError::invalid(format!(
            "{} targets for {} predictions",
            targets.len(),
            predictions.len()
        )));
    }
    if targets.is_empty() {
        return Err(HofmError::invalid("RMSE of an empty set"));
    }
    let sse: f64 = targets
        .iter()
        .zip(predictions)
        .map(|(y, f)| (y - f) * (y - f))
        .sum();
    Ok((sse / targets.len() as f64).sqrt())
}
