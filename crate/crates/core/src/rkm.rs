//! Single-machine restricted kernel machine, used as a baseline.
//!
//! Training solves
//!
//! ```text
//! [ K/γ + ηI   e ] [ h ]   [ y ]
//! [ eᵀ         0 ] [ b ] = [ 0 ]
//! ```
//!
//! Only the training system is given in the literature this follows; the
//! decision rule `sign(K(x,X)h/γ + b)` is reconstructed from the least-squares
//! SVM the model reformulates. In this system `h` already carries the label
//! sign: it equals `y ⊙ h̃` for the hidden features `h̃` paired with
//! `(1 − (φ(xᵢ)ᵀw + b)yᵢ)` in the energy.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::kernel::{gram, KernelSpec};
use crate::solver::{solve_bordered, BorderSign, BorderedSystem, SolveReport};
use crate::util::{check_columns, check_finite, check_positive, max_abs, regularized};
use crate::SystemDiagnostics;

pub const RKM_SYSTEM: &str = "RKM system";

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RkmHyperparams {
    pub gamma: f64,
    pub eta: f64,
    pub kernel: KernelSpec,
}

impl RkmHyperparams {
    pub fn validate(&self) -> Result<()> {
        check_positive("gamma", self.gamma)?;
        check_positive("eta", self.eta)?;
        self.kernel.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RkmModel {
    x: Array2<f64>,
    y: Vec<i8>,
    h: Array1<f64>,
    b: f64,
    hyperparams: RkmHyperparams,
    report: Option<SolveReport>,
}

pub fn fit_rkm(x: ArrayView2<'_, f64>, y: &[i8], hp: &RkmHyperparams) -> Result<RkmModel> {
    hp.validate()?;
    let n = x.nrows();
    if n < 2 {
        return Err(Error::EmptyInput(format!("RKM needs at least 2 samples, got {n}")));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{} labels for {n} samples", y.len())));
    }
    if let Some(bad) = y.iter().find(|l| l.abs() != 1) {
        return Err(Error::InvalidHyperparameter(format!("label {bad} is not +1 or -1")));
    }
    check_finite("training samples", x)?;

    let k = gram(&hp.kernel, x, x)?.into_inner();
    let rhs = Array1::from_iter(y.iter().map(|&l| f64::from(l)));
    let sys = BorderedSystem::with_ones_border(regularized(k, hp.gamma, hp.eta), BorderSign::Plus, rhs, 0.0);
    let report = solve_bordered(&sys).map_err(|e| e.in_system(RKM_SYSTEM))?;
    Ok(RkmModel {
        x: x.to_owned(),
        y: y.to_vec(),
        h: report.head().to_owned(),
        b: report.tail(),
        hyperparams: *hp,
        report: Some(report),
    })
}

impl RkmModel {
    pub fn from_parts(
        x: Array2<f64>,
        y: Vec<i8>,
        h: Array1<f64>,
        b: f64,
        hyperparams: RkmHyperparams,
    ) -> Result<Self> {
        hyperparams.validate()?;
        let n = x.nrows();
        if n == 0 || y.len() != n || h.len() != n {
            return Err(Error::DimensionMismatch(
                "stored samples, labels and hidden features disagree in size".into(),
            ));
        }
        Ok(RkmModel {
            x,
            y,
            h,
            b,
            hyperparams,
            report: None,
        })
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[i8] {
        &self.y
    }

    pub fn h(&self) -> &Array1<f64> {
        &self.h
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn hyperparams(&self) -> &RkmHyperparams {
        &self.hyperparams
    }

    pub fn solve_report(&self) -> Option<&SolveReport> {
        self.report.as_ref()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// `K(x,X)h/γ + b`
    pub fn scores(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        check_columns(x, self.n_features())?;
        if x.nrows() == 0 {
            return Ok(Array1::zeros(0));
        }
        let k = gram(&self.hyperparams.kernel, x, self.x.view())?.into_inner();
        Ok(k.dot(&self.h).mapv(|v| v / self.hyperparams.gamma + self.b))
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<i8>> {
        Ok(self
            .scores(x)?
            .iter()
            .map(|&s| if s >= 0.0 { 1 } else { -1 })
            .collect())
    }

    /// Stationarity `K h/γ + b e + η h = y` and balance `Σh = 0`.
    pub fn diagnostics(&self) -> Result<SystemDiagnostics> {
        let hp = &self.hyperparams;
        let k = gram(&hp.kernel, self.x.view(), self.x.view())?.into_inner();
        let y = Array1::from_iter(self.y.iter().map(|&l| f64::from(l)));
        let lhs = k.dot(&self.h).mapv(|v| v / hp.gamma + self.b) + &self.h * hp.eta;
        Ok(SystemDiagnostics {
            system: RKM_SYSTEM.to_string(),
            hidden_sum: self.h.sum(),
            expected_hidden_sum: 0.0,
            stationarity_residual: max_abs(&(lhs - y)),
            solve: self.report.clone().map(Into::into),
        })
    }

    /// `w = Xᵀh/γ`; linear kernel only.
    pub fn linear_weights(&self) -> Option<Array1<f64>> {
        (self.hyperparams.kernel == KernelSpec::Linear)
            .then(|| self.x.t().dot(&self.h) / self.hyperparams.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn symmetric_pair() {
        let x = array![[1.0, 2.0], [-1.0, -2.0]];
        let hp = RkmHyperparams {
            gamma: 1.0,
            eta: 0.5,
            kernel: KernelSpec::Linear,
        };
        let m = fit_rkm(x.view(), &[1, -1], &hp).unwrap();
        assert!(m.b().abs() < 1e-15);
        assert!((m.h()[0] + m.h()[1]).abs() < 1e-15);
        assert!(m.h()[0] > 0.0);
        assert_eq!(m.predict(x.view()).unwrap(), vec![1, -1]);
        let d = m.diagnostics().unwrap();
        assert!(d.hidden_sum.abs() < 1e-12);
        assert!(d.stationarity_residual < 1e-12);
    }

    #[test]
    fn zero_score_is_positive() {
        let x = array![[1.0], [-1.0]];
        let hp = RkmHyperparams {
            gamma: 1.0,
            eta: 1.0,
            kernel: KernelSpec::Linear,
        };
        // The exact fit of this pair: h = (1/3, -1/3), b = 0.
        let m = RkmModel::from_parts(x, vec![1, -1], array![1.0 / 3.0, -1.0 / 3.0], 0.0, hp).unwrap();
        assert_eq!(m.scores(array![[0.0]].view()).unwrap()[0], 0.0);
        assert_eq!(m.predict(array![[0.0]].view()).unwrap(), vec![1]);
    }

    #[test]
    fn rejects_bad_labels() {
        let x = array![[1.0], [-1.0]];
        let hp = RkmHyperparams {
            gamma: 1.0,
            eta: 1.0,
            kernel: KernelSpec::Linear,
        };
        assert!(fit_rkm(x.view(), &[1, 0], &hp).is_err());
        assert!(fit_rkm(x.view(), &[1], &hp).is_err());
    }
}
