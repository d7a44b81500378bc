//! Twin restricted kernel machine for regression.
//!
//! Two functions bracket the targets. Both are fitted on the full sample from
//! the same regularized kernel block, with opposite border signs:
//!
//! ```text
//! [ K/γ₁ + η₁I   −e ] [ h₁ ]   [ −Y + Ke/γ₁ ]
//! [ eᵀ            0 ] [ b₁ ] = [ n          ]
//!
//! [ K/γ₂ + η₂I    e ] [ h₂ ]   [  Y + Ke/γ₂ ]
//! [ eᵀ            0 ] [ b₂ ] = [ n          ]
//! ```
//!
//! The prediction is the mean of `g₁(x) = K(x,X)(e − h₁)/γ₁ + b₁` and
//! `g₂(x) = K(x,X)(h₂ − e)/γ₂ + b₂`. There is no ε-tube.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{gram, KernelSpec};
use crate::solver::{solve_bordered, BorderSign, BorderedSystem, SolveReport};
use crate::util::{check_columns, check_finite, check_positive, max_abs, regularized};
use crate::SystemDiagnostics;

pub const LOWER_SYSTEM: &str = "first regression system";
pub const UPPER_SYSTEM: &str = "second regression system";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrkmRegressorHyperparams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub kernel: KernelSpec,
}

impl TrkmRegressorHyperparams {
    pub fn equal(gamma: f64, eta: f64, kernel: KernelSpec) -> Self {
        TrkmRegressorHyperparams {
            gamma1: gamma,
            gamma2: gamma,
            eta1: eta,
            eta2: eta,
            kernel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("gamma1", self.gamma1)?;
        check_positive("gamma2", self.gamma2)?;
        check_positive("eta1", self.eta1)?;
        check_positive("eta2", self.eta2)?;
        self.kernel.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrkmRegressorModel {
    x: Array2<f64>,
    y: Array1<f64>,
    h1: Array1<f64>,
    b1: f64,
    h2: Array1<f64>,
    b2: f64,
    hyperparams: TrkmRegressorHyperparams,
    reports: Option<[SolveReport; 2]>,
}

pub fn fit_regressor(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    hp: &TrkmRegressorHyperparams,
) -> Result<TrkmRegressorModel> {
    hp.validate()?;
    let n = x.nrows();
    if n < 2 {
        return Err(Error::EmptyInput(format!(
            "regression needs at least 2 samples, got {n}"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{} targets for {n} samples", y.len())));
    }
    check_finite("training samples", x)?;
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidHyperparameter("targets contain non-finite values".into()));
    }

    let k = gram(&hp.kernel, x, x)?.into_inner();
    let k_e = k.sum_axis(Axis(1));

    let rhs1 = &k_e / hp.gamma1 - y;
    let sys1 = BorderedSystem::with_ones_border(
        regularized(k.clone(), hp.gamma1, hp.eta1),
        BorderSign::Minus,
        rhs1,
        n as f64,
    );
    let rhs2 = &k_e / hp.gamma2 + y;
    let sys2 = BorderedSystem::with_ones_border(
        regularized(k, hp.gamma2, hp.eta2),
        BorderSign::Plus,
        rhs2,
        n as f64,
    );

    let r1 = solve_bordered(&sys1).map_err(|e| e.in_system(LOWER_SYSTEM))?;
    let r2 = solve_bordered(&sys2).map_err(|e| e.in_system(UPPER_SYSTEM))?;

    Ok(TrkmRegressorModel {
        x: x.to_owned(),
        y: y.to_owned(),
        h1: r1.head().to_owned(),
        b1: r1.tail(),
        h2: r2.head().to_owned(),
        b2: r2.tail(),
        hyperparams: *hp,
        reports: Some([r1, r2]),
    })
}

impl TrkmRegressorModel {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        x: Array2<f64>,
        y: Array1<f64>,
        h1: Array1<f64>,
        b1: f64,
        h2: Array1<f64>,
        b2: f64,
        hyperparams: TrkmRegressorHyperparams,
    ) -> Result<Self> {
        hyperparams.validate()?;
        let n = x.nrows();
        if n == 0 || y.len() != n || h1.len() != n || h2.len() != n {
            return Err(Error::DimensionMismatch(
                "stored samples, targets and hidden features disagree in size".into(),
            ));
        }
        Ok(TrkmRegressorModel {
            x,
            y,
            h1,
            b1,
            h2,
            b2,
            hyperparams,
            reports: None,
        })
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn targets(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn h1(&self) -> &Array1<f64> {
        &self.h1
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn h2(&self) -> &Array1<f64> {
        &self.h2
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn hyperparams(&self) -> &TrkmRegressorHyperparams {
        &self.hyperparams
    }

    pub fn solve_reports(&self) -> Option<&[SolveReport; 2]> {
        self.reports.as_ref()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// `(g₁(x), g₂(x))` for every row of `x`.
    pub fn bounding_functions(&self, x: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array1<f64>)> {
        check_columns(x, self.n_features())?;
        if x.nrows() == 0 {
            return Ok((Array1::zeros(0), Array1::zeros(0)));
        }
        let hp = &self.hyperparams;
        let k = gram(&hp.kernel, x, self.x.view())?.into_inner();
        let g1 = k.dot(&self.h1.mapv(|h| 1.0 - h)).mapv(|v| v / hp.gamma1 + self.b1);
        let g2 = k.dot(&self.h2.mapv(|h| h - 1.0)).mapv(|v| v / hp.gamma2 + self.b2);
        Ok((g1, g2))
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let (g1, g2) = self.bounding_functions(x)?;
        Ok((g1 + g2) / 2.0)
    }

    /// Error variables in kernel form: `ξ₁ = K(e − h₁)/γ₁ + eb₁ − Y` and
    /// `ξ₂ = Y − K(h₂ − e)/γ₂ − eb₂`.
    pub fn slacks(&self) -> Result<(Array1<f64>, Array1<f64>)> {
        let hp = &self.hyperparams;
        let k = gram(&hp.kernel, self.x.view(), self.x.view())?.into_inner();
        let xi1 = k.dot(&self.h1.mapv(|h| 1.0 - h)).mapv(|v| v / hp.gamma1 + self.b1) - &self.y;
        let xi2 = &self.y - &k.dot(&self.h2.mapv(|h| h - 1.0)).mapv(|v| v / hp.gamma2 + self.b2);
        Ok((xi1, xi2))
    }

    /// At an exact solution `η₁h₁ = ξ₁`, `η₂h₂ = ξ₂` and `Σh₁ = Σh₂ = n`.
    pub fn diagnostics(&self) -> Result<[SystemDiagnostics; 2]> {
        let (xi1, xi2) = self.slacks()?;
        let hp = &self.hyperparams;
        let n = self.x.nrows() as f64;
        let reports = self.reports.as_ref();
        Ok([
            SystemDiagnostics {
                system: LOWER_SYSTEM.to_string(),
                hidden_sum: self.h1.sum(),
                expected_hidden_sum: n,
                stationarity_residual: max_abs(&(&self.h1 * hp.eta1 - &xi1)),
                solve: reports.map(|r| r[0].clone().into()),
            },
            SystemDiagnostics {
                system: UPPER_SYSTEM.to_string(),
                hidden_sum: self.h2.sum(),
                expected_hidden_sum: n,
                stationarity_residual: max_abs(&(&self.h2 * hp.eta2 - &xi2)),
                solve: reports.map(|r| r[1].clone().into()),
            },
        ])
    }

    /// `w₁ = Xᵀ(e − h₁)/γ₁` and `w₂ = Xᵀ(h₂ − e)/γ₂`; linear kernel only.
    pub fn linear_weights(&self) -> Option<(Array1<f64>, Array1<f64>)> {
        if self.hyperparams.kernel != KernelSpec::Linear {
            return None;
        }
        let hp = &self.hyperparams;
        let w1 = self.x.t().dot(&self.h1.mapv(|h| 1.0 - h)) / hp.gamma1;
        let w2 = self.x.t().dot(&self.h2.mapv(|h| h - 1.0)) / hp.gamma2;
        Some((w1, w2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn balance_and_stationarity() {
        let x = array![[0.0], [0.5], [1.0], [1.5], [2.0]];
        let y = array![0.0, 0.4, 0.8, 1.0, 0.9];
        let hp = TrkmRegressorHyperparams::equal(0.1, 0.01, KernelSpec::gaussian(0.5).unwrap());
        let m = fit_regressor(x.view(), y.view(), &hp).unwrap();
        assert!((m.h1().sum() - 5.0).abs() < 1e-9);
        assert!((m.h2().sum() - 5.0).abs() < 1e-9);
        for d in m.diagnostics().unwrap() {
            assert!(d.stationarity_residual < 1e-9, "{d:?}");
        }
    }

    #[test]
    fn input_validation() {
        let hp = TrkmRegressorHyperparams::equal(1.0, 1.0, KernelSpec::Linear);
        let one = array![[1.0]];
        assert!(matches!(
            fit_regressor(one.view(), array![1.0].view(), &hp),
            Err(Error::EmptyInput(_))
        ));
        let two = array![[1.0], [2.0]];
        assert!(matches!(
            fit_regressor(two.view(), array![1.0].view(), &hp),
            Err(Error::DimensionMismatch(_))
        ));
        let m = fit_regressor(two.view(), array![1.0, 2.0].view(), &hp).unwrap();
        assert!(m.predict(Array2::<f64>::zeros((0, 1)).view()).unwrap().is_empty());
        assert!(matches!(
            m.predict(array![[1.0, 2.0]].view()),
            Err(Error::FeatureCountMismatch { .. })
        ));
    }

    #[test]
    fn constant_target_is_reproduced() {
        // Centered inputs with the linear kernel: the fitted functions are
        // flat and both equal the constant.
        let x = Array2::from_shape_fn((20, 1), |(i, _)| i as f64 - 9.5);
        let y = Array1::from_elem(20, 3.25);
        let hp = TrkmRegressorHyperparams::equal(1.0, 1.0, KernelSpec::Linear);
        let m = fit_regressor(x.view(), y.view(), &hp).unwrap();
        let p = m.predict(x.view()).unwrap();
        let mae = p.iter().map(|v| (v - 3.25).abs()).sum::<f64>() / 20.0;
        assert!(mae < 1e-3, "mae {mae}");
    }
}
