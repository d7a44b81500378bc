//! Kernel functions and Gram matrix assembly.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `k(x, y) = exp(−‖x − y‖² / (2σ²))`
    Gaussian { sigma: f64 },
    /// `k(x, y) = xᵀy`. Its feature map is the identity, so weights can be
    /// formed explicitly.
    Linear,
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let spec = KernelSpec::Gaussian { sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidHyperparameter(format!("Gaussian bandwidth must be positive, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Gaussian { sigma } => Some(sigma),
            KernelSpec::Linear => None,
        }
    }

    /// Evaluate the kernel on two points of equal length.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "kernel arguments have lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        self.validate()?;
        Ok(self.eval_unchecked(x.iter().copied(), y.iter().copied()))
    }

    fn eval_unchecked(
        &self,
        x: impl Iterator<Item = f64>,
        y: impl Iterator<Item = f64>,
    ) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => {
                // Direct differences keep k(x, x) = 1 exactly.
                let d2: f64 = x.zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            KernelSpec::Linear => x.zip(y).map(|(a, b)| a * b).sum(),
        }
    }

    fn eval_rows(&self, x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
        self.eval_unchecked(x.iter().copied(), y.iter().copied())
    }
}

/// Matrix of pairwise kernel values between the rows of two matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: Array2<f64>,
}

impl GramMatrix {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    pub fn left_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn right_rows(&self) -> usize {
        self.values.ncols()
    }
}

/// `values[i][j] = k(left_i, right_j)`. Every entry is computed on its own, so
/// `gram(A, B)` is exactly the transpose of `gram(B, A)` and the result does
/// not depend on how rows are scheduled across threads.
pub fn gram(spec: &KernelSpec, left: ArrayView2<'_, f64>, right: ArrayView2<'_, f64>) -> Result<GramMatrix> {
    if left.ncols() != right.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Gram arguments have {} and {} columns",
            left.ncols(),
            right.ncols()
        )));
    }
    spec.validate()?;
    let (p, q) = (left.nrows(), right.nrows());
    let rows: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|i| right.axis_iter(Axis(0)).map(|y| spec.eval_rows(left.row(i), y)).collect())
        .collect();
    let values = Array2::from_shape_vec((p, q), rows.into_iter().flatten().collect())
        .expect("row lengths match");
    Ok(GramMatrix { values })
}

/// Kernel matrix with both sides equal to `x`.
pub fn gram_symmetric(spec: &KernelSpec, x: ArrayView2<'_, f64>) -> Result<GramMatrix> {
    gram(spec, x, x)
}
