//! Reference implementations shared by the integration tests. Everything here
//! works on plain `Vec`s with naive loops so that it shares no code with the
//! library.

#![allow(dead_code, clippy::needless_range_loop)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat {
    (0..rows).map(|_| (0..cols).map(|_| rng.random::<f64>()).collect()).collect()
}

pub fn to_array(m: &Mat) -> Array2<f64> {
    let cols = m.first().map_or(0, Vec::len);
    Array2::from_shape_fn((m.len(), cols), |(i, j)| m[i][j])
}

pub fn rows_of(a: &Array2<f64>) -> Mat {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Gaussian kernel when `sigma` is given, linear otherwise.
pub fn kernel(sigma: Option<f64>, x: &[f64], y: &[f64]) -> f64 {
    match sigma {
        Some(s) => {
            let mut d = 0.0;
            for k in 0..x.len() {
                d += (x[k] - y[k]) * (x[k] - y[k]);
            }
            (-d / (2.0 * s * s)).exp()
        }
        None => {
            let mut d = 0.0;
            for k in 0..x.len() {
                d += x[k] * y[k];
            }
            d
        }
    }
}

pub fn kernel_matrix(sigma: Option<f64>, left: &Mat, right: &Mat) -> Mat {
    let mut k = vec![vec![0.0; right.len()]; left.len()];
    for i in 0..left.len() {
        for j in 0..right.len() {
            k[i][j] = kernel(sigma, &left[i], &right[j]);
        }
    }
    k
}

pub fn mat_vec(m: &Mat, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.len()];
    for i in 0..m.len() {
        for j in 0..v.len() {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

pub fn row_sums(m: &Mat) -> Vec<f64> {
    m.iter().map(|r| r.iter().sum()).collect()
}

pub fn col_sums(m: &Mat) -> Vec<f64> {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for r in m {
        for j in 0..cols {
            out[j] += r[j];
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut m: f64 = 0.0;
    for i in 0..a.len() {
        m = m.max((a[i] - b[i]).abs());
    }
    m
}

/// Gaussian elimination with complete pivoting. Returns `None` when the
/// largest remaining pivot is exactly zero.
pub fn full_pivot_solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for i in k..n {
            for j in k..n {
                if m[i][j].abs() > best {
                    best = m[i][j].abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best == 0.0 {
            return None;
        }
        m.swap(k, pi);
        rhs.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        perm.swap(k, pj);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut y = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= m[k][j] * y[j];
        }
        y[k] = s / m[k][k];
    }
    let mut x = vec![0.0; n];
    for k in 0..n {
        x[perm[k]] = y[k];
    }
    Some(x)
}

/// `[[K/γ + ηI, s·e], [eᵀ, 0]]`
pub fn bordered(k: &Mat, gamma: f64, eta: f64, sign: f64) -> Mat {
    let n = k.len();
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = k[i][j] / gamma;
        }
        m[i][i] += eta;
        m[i][n] = sign;
        m[n][i] = 1.0;
    }
    m
}

/// Reference TRKM-C fit: `(h1, b1, h2, b2)`.
pub fn classifier_oracle(
    a: &Mat,
    b: &Mat,
    sigma: Option<f64>,
    (g1, g2, e1, e2): (f64, f64, f64, f64),
) -> (Vec<f64>, f64, Vec<f64>, f64) {
    let (n1, n2) = (a.len(), b.len());
    let k_aa = kernel_matrix(sigma, a, a);
    let k_bb = kernel_matrix(sigma, b, b);
    let k_ab = kernel_matrix(sigma, a, b);
    let k_ba = kernel_matrix(sigma, b, a);

    let mut rhs1: Vec<f64> = row_sums(&k_ab).iter().map(|s| 1.0 + s / g1).collect();
    rhs1.push(n2 as f64);
    let s1 = full_pivot_solve(&bordered(&k_aa, g1, e1, 1.0), &rhs1).expect("system 1 singular");

    let mut rhs2: Vec<f64> = row_sums(&k_ba).iter().map(|s| -(1.0 + s / g2)).collect();
    rhs2.push(-(n1 as f64));
    let s2 = full_pivot_solve(&bordered(&k_bb, g2, e2, 1.0), &rhs2).expect("system 2 singular");

    (s1[..n1].to_vec(), s1[n1], s2[..n2].to_vec(), s2[n2])
}

/// Reference TRKM-R fit: `(h1, b1, h2, b2)`.
pub fn regressor_oracle(
    x: &Mat,
    y: &[f64],
    sigma: Option<f64>,
    (g1, g2, e1, e2): (f64, f64, f64, f64),
) -> (Vec<f64>, f64, Vec<f64>, f64) {
    let n = x.len();
    let k = kernel_matrix(sigma, x, x);
    let ke = row_sums(&k);

    let mut rhs1: Vec<f64> = (0..n).map(|i| -y[i] + ke[i] / g1).collect();
    rhs1.push(n as f64);
    let s1 = full_pivot_solve(&bordered(&k, g1, e1, -1.0), &rhs1).expect("system 1 singular");

    let mut rhs2: Vec<f64> = (0..n).map(|i| y[i] + ke[i] / g2).collect();
    rhs2.push(n as f64);
    let s2 = full_pivot_solve(&bordered(&k, g2, e2, 1.0), &rhs2).expect("system 2 singular");

    (s1[..n].to_vec(), s1[n], s2[..n].to_vec(), s2[n])
}

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}
