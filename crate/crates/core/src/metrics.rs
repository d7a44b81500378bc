//! Classification accuracy and regression error measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Percentage of matching labels.
pub fn accuracy(truth: &[i8], predicted: &[i8]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} true labels, {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("accuracy of zero samples".into()));
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

/// Error measures for real-valued predictions `f` against targets `y`.
///
/// `pos_error` sums `|f − y|` over samples with `f ≤ y`, `neg_error` over
/// samples with `f > y`; both are divided by the full sample count, so they add
/// up to `mae`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionErrors {
    pub rmse: f64,
    pub mae: f64,
    pub pos_error: f64,
    pub neg_error: f64,
}

pub fn regression_errors(truth: &[f64], predicted: &[f64]) -> Result<RegressionErrors> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} targets, {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("errors of zero samples".into()));
    }
    let n = truth.len() as f64;
    let (mut sq, mut pos, mut neg) = (0.0, 0.0, 0.0);
    for (&y, &f) in truth.iter().zip(predicted) {
        let d = f - y;
        sq += d * d;
        if f <= y {
            pos += -d;
        } else {
            neg += d;
        }
    }
    Ok(RegressionErrors {
        rmse: (sq / n).sqrt(),
        mae: (pos + neg) / n,
        pos_error: pos / n,
        neg_error: neg / n,
    })
}
