//! Dense solver for bordered linear systems.
//!
//! Every fit in this crate reduces to one or two systems of the form
//!
//! ```text
//! [ core        s·border ] [ x ]   [ rhs_top    ]
//! [ borderᵀ     0        ] [ β ] = [ rhs_bottom ]
//! ```
//!
//! where `core` is an n×n regularized kernel block, `border` is (almost
//! always) the ones vector and `s ∈ {+1, −1}`. The augmented matrix is not
//! symmetric when `s = −1`, so it is factored as a whole with LU and partial
//! pivoting. Up to two steps of iterative refinement are applied while they
//! lower the residual.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the largest matrix entry are treated
/// as zero.
pub const RELATIVE_PIVOT_TOLERANCE: f64 = 1e-12;

const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BorderSign {
    Plus,
    Minus,
}

impl BorderSign {
    pub fn value(self) -> f64 {
        match self {
            BorderSign::Plus => 1.0,
            BorderSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BorderedSystem {
    pub core: Array2<f64>,
    pub border: Array1<f64>,
    pub border_sign: BorderSign,
    pub rhs_top: Array1<f64>,
    pub rhs_bottom: f64,
}

/// Outcome of [`solve_bordered`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `[x; β]`, length n+1.
    pub solution: Array1<f64>,
    /// ‖A·x − b‖∞ on the assembled augmented system.
    pub residual_norm: f64,
    /// Estimate of the 1-norm condition number of the augmented matrix.
    pub condition_estimate: f64,
}

impl SolveReport {
    /// The first n entries of the solution.
    pub fn head(&self) -> ArrayView1<'_, f64> {
        let n = self.solution.len() - 1;
        self.solution.slice(ndarray::s![..n])
    }

    /// The border unknown (the bias).
    pub fn tail(&self) -> f64 {
        self.solution[self.solution.len() - 1]
    }
}

impl BorderedSystem {
    /// System with the ones vector as border.
    pub fn with_ones_border(
        core: Array2<f64>,
        border_sign: BorderSign,
        rhs_top: Array1<f64>,
        rhs_bottom: f64,
    ) -> Self {
        let n = core.nrows();
        BorderedSystem {
            core,
            border: Array1::ones(n),
            border_sign,
            rhs_top,
            rhs_bottom,
        }
    }

    pub fn dim(&self) -> usize {
        self.core.nrows()
    }

    fn validate(&self) -> Result<()> {
        let n = self.core.nrows();
        if self.core.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "core block is {}x{}, expected square",
                n,
                self.core.ncols()
            )));
        }
        if self.border.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "border has length {}, core is {n}x{n}",
                self.border.len()
            )));
        }
        if self.rhs_top.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, core is {n}x{n}",
                self.rhs_top.len()
            )));
        }
        let finite = self.core.iter().all(|v| v.is_finite())
            && self.border.iter().all(|v| v.is_finite())
            && self.rhs_top.iter().all(|v| v.is_finite())
            && self.rhs_bottom.is_finite();
        if !finite {
            return Err(Error::InvalidHyperparameter(
                "bordered system contains non-finite entries".into(),
            ));
        }
        Ok(())
    }

    /// The (n+1)×(n+1) matrix `[[core, s·border], [borderᵀ, 0]]`.
    pub fn augmented_matrix(&self) -> Array2<f64> {
        let n = self.core.nrows();
        let sign = self.border_sign.value();
        let mut m = Array2::zeros((n + 1, n + 1));
        m.slice_mut(ndarray::s![..n, ..n]).assign(&self.core);
        for i in 0..n {
            m[[i, n]] = sign * self.border[i];
            m[[n, i]] = self.border[i];
        }
        m
    }

    /// The right-hand side `[rhs_top; rhs_bottom]`.
    pub fn augmented_rhs(&self) -> Array1<f64> {
        let n = self.rhs_top.len();
        let mut b = Array1::zeros(n + 1);
        b.slice_mut(ndarray::s![..n]).assign(&self.rhs_top);
        b[n] = self.rhs_bottom;
        b
    }
}

/// Solve a bordered system by LU with partial pivoting on the augmented
/// matrix.
pub fn solve_bordered(system: &BorderedSystem) -> Result<SolveReport> {
    system.validate()?;
    let a = system.augmented_matrix();
    let b = system.augmented_rhs();
    let lu = Lu::factor(a.clone())?;

    let mut x = lu.solve(&b);
    let mut r = residual_vector(&a, &x, &b);
    let mut res = max_abs(r.iter());
    for _ in 0..REFINEMENT_STEPS {
        if res == 0.0 {
            break;
        }
        let candidate = &x - &lu.solve(&r);
        let r_new = residual_vector(&a, &candidate, &b);
        let res_new = max_abs(r_new.iter());
        if res_new >= res {
            break;
        }
        x = candidate;
        r = r_new;
        res = res_new;
    }

    let condition_estimate = one_norm(&a) * lu.inverse_one_norm_estimate();
    Ok(SolveReport {
        solution: x,
        residual_norm: res,
        condition_estimate,
    })
}

/// ‖A·x − b‖∞ of the assembled augmented system.
pub fn residual(system: &BorderedSystem, x: &Array1<f64>) -> Result<f64> {
    system.validate()?;
    let n = system.dim();
    if x.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "solution has length {}, system needs {}",
            x.len(),
            n + 1
        )));
    }
    let a = system.augmented_matrix();
    let b = system.augmented_rhs();
    Ok(max_abs(residual_vector(&a, x, &b).iter()))
}

fn residual_vector(a: &Array2<f64>, x: &Array1<f64>, b: &Array1<f64>) -> Array1<f64> {
    a.dot(x) - b
}

fn max_abs<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    values.fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn one_norm(a: &Array2<f64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Row-major LU factorization `P·A = L·U` with unit lower triangle.
struct Lu {
    lu: Array2<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let threshold = RELATIVE_PIVOT_TOLERANCE * scale;
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, a[[i, k]].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            // also catches NaN pivots
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(pivot_abs > threshold) {
                return Err(Error::SingularSystem {
                    system: "bordered".into(),
                    step: k,
                    pivot: pivot_abs,
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    a.swap([p, j], [k, j]);
                }
            }
            let pivot = a[[k, k]];
            let slice = a.as_slice_mut().expect("standard layout");
            let (upper, lower) = slice.split_at_mut((k + 1) * n);
            let row_k = &upper[k * n..(k + 1) * n];
            for row in lower.chunks_exact_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != 0.0 {
                    for (dst, &src) in row[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                        *dst -= factor * src;
                    }
                }
            }
        }
        Ok(Lu { lu: a, perm })
    }

    fn dim(&self) -> usize {
        self.lu.nrows()
    }

    fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = (0..i).map(|j| row[j] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = (i + 1..n).map(|j| row[j] * y[j]).sum();
            y[i] = (y[i] - s) / row[i];
        }
        Array1::from(y)
    }

    /// Solve `Aᵀ·x = b`.
    fn solve_transpose(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.dim();
        // Uᵀ z = b
        let mut z = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[[j, i]] * z[j]).sum();
            z[i] = (z[i] - s) / self.lu[[i, i]];
        }
        // Lᵀ w = z
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[[j, i]] * z[j]).sum();
            z[i] -= s;
        }
        // x = Pᵀ w
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        Array1::from(x)
    }

    /// Hager's estimate of ‖A⁻¹‖₁.
    fn inverse_one_norm_estimate(&self) -> f64 {
        let n = self.dim();
        let mut x = Array1::from_elem(n, 1.0 / n as f64);
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let new_estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi = y.mapv(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .fold((0, -1.0), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
            if new_estimate <= estimate || zmax <= z.dot(&x) {
                estimate = estimate.max(new_estimate);
                break;
            }
            estimate = new_estimate;
            x = Array1::zeros(n);
            x[j] = 1.0;
        }
        // Alternating-sign probe, as in LAPACK's dlacon. Catches inverses whose
        // large part annihilates the smooth start vector.
        let probe = Array1::from_shape_fn(n, |i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (1.0 + i as f64 / (n.max(2) - 1) as f64)
        });
        let alt = 2.0 * self.solve(&probe).iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        estimate.max(alt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn system(core: Array2<f64>, sign: BorderSign, rhs: Array1<f64>, bottom: f64) -> BorderedSystem {
        BorderedSystem::with_ones_border(core, sign, rhs, bottom)
    }

    #[test]
    fn identity_core_gives_ones() {
        let s = system(Array2::eye(2), BorderSign::Plus, array![1.0, 1.0], 2.0);
        let r = solve_bordered(&s).unwrap();
        for (got, want) in r.solution.iter().zip([1.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn scaled_identity_core() {
        let s = system(array![[2.0, 0.0], [0.0, 2.0]], BorderSign::Plus, array![3.0, 1.0], 2.0);
        let r = solve_bordered(&s).unwrap();
        for (got, want) in r.solution.iter().zip([1.5, 0.5, 0.0]) {
            assert!((got - want).abs() < 1e-14, "{:?}", r.solution);
        }
        assert!(r.residual_norm < 1e-14);
        assert!(r.condition_estimate >= 1.0);
    }

    #[test]
    fn zero_row_is_singular() {
        let s = BorderedSystem {
            core: array![[1.0, 0.0], [0.0, 0.0]],
            border: array![1.0, 0.0],
            border_sign: BorderSign::Plus,
            rhs_top: array![1.0, 0.0],
            rhs_bottom: 1.0,
        };
        assert!(matches!(solve_bordered(&s), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let s = system(Array2::eye(2), BorderSign::Plus, array![1.0, 1.0, 1.0], 0.0);
        assert!(matches!(solve_bordered(&s), Err(Error::DimensionMismatch(_))));
        let s = system(Array2::eye(2), BorderSign::Plus, array![1.0, 1.0], 0.0);
        assert!(matches!(residual(&s, &array![1.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn residual_of_exact_and_perturbed_solutions() {
        let s = system(array![[2.0, 0.0], [0.0, 2.0]], BorderSign::Plus, array![3.0, 1.0], 2.0);
        let exact = array![1.5, 0.5, 0.0];
        assert!(residual(&s, &exact).unwrap() < 1e-12);
        // Perturbing x₀ by ε changes row 0 by 2ε and the border row by ε.
        for eps in [1e-3, 1e-2, 1e-1] {
            let mut x = exact.clone();
            x[0] += eps;
            assert!((residual(&s, &x).unwrap() - 2.0 * eps).abs() < 1e-12);
        }
        assert_eq!(residual(&s, &Array1::zeros(3)).unwrap(), 3.0);
    }

    #[test]
    fn negative_border_sign() {
        // [[1,0,-1],[0,1,-1],[1,1,0]]·x = (0,2,2) has x = (0,2,0).
        let s = system(Array2::eye(2), BorderSign::Minus, array![0.0, 2.0], 2.0);
        let r = solve_bordered(&s).unwrap();
        for (got, want) in r.solution.iter().zip([0.0, 2.0, 0.0]) {
            assert!((got - want).abs() < 1e-14, "{:?}", r.solution);
        }
    }

    #[test]
    fn condition_estimate_of_identity_like_system() {
        let s = system(Array2::eye(3) * 1e-6, BorderSign::Plus, array![1.0, 1.0, 1.0], 0.0);
        let r = solve_bordered(&s).unwrap();
        assert!(r.condition_estimate > 1e5, "{}", r.condition_estimate);
    }
}
