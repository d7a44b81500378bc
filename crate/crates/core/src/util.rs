use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// `k / gamma + eta·I`, consuming `k`.
pub(crate) fn regularized(mut k: Array2<f64>, gamma: f64, eta: f64) -> Array2<f64> {
    k.mapv_inplace(|v| v / gamma);
    k.diag_mut().mapv_inplace(|v| v + eta);
    k
}

pub(crate) fn max_abs(values: &Array1<f64>) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

pub(crate) fn check_finite(what: &str, x: ArrayView2<'_, f64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter(format!("{what} contains non-finite values")))
    }
}

/// Column count check for prediction inputs. Inputs without rows are accepted
/// whatever their width.
pub(crate) fn check_columns(x: ArrayView2<'_, f64>, expected: usize) -> Result<()> {
    if x.nrows() > 0 && x.ncols() != expected {
        return Err(Error::FeatureCountMismatch {
            expected,
            found: x.ncols(),
        });
    }
    Ok(())
}

/// Copy the selected rows of `x` into a new matrix, preserving their order.
pub(crate) fn select_rows(x: ArrayView2<'_, f64>, rows: &[usize]) -> Array2<f64> {
    x.select(ndarray::Axis(0), rows)
}
