mod common;

use common::*;
use ndarray::{array, Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use trkm::data::LabelMap;
use trkm::selection::{grid_search, GridSpec, KernelFamily};
use trkm::stats::{friedman_test, nemenyi_cd, rank_models, sign_test_threshold, Better};
use trkm::{
    fit_classifier, fit_regressor, fit_rkm, gram, solve_bordered, BorderSign, BorderedSystem, Dataset, KernelSpec,
    ModelKind, RkmHyperparams, TrkmClassifierHyperparams, TrkmRegressorHyperparams,
};

#[test]
fn hand_eliminated_system() {
    let sys = BorderedSystem::with_ones_border(array![[2.0, 0.0], [0.0, 2.0]], BorderSign::Plus, array![3.0, 1.0], 2.0);
    let rep = solve_bordered(&sys).unwrap();
    assert!(max_abs_diff(&rep.solution.to_vec(), &[1.5, 0.5, 0.0]) < 1e-15);
}

#[test]
fn gram_matches_double_loop() {
    let mut r = rng(10);
    let left = uniform_matrix(&mut r, 2, 3);
    let right = uniform_matrix(&mut r, 3, 3);
    for spec in [KernelSpec::Gaussian { sigma: 0.8 }, KernelSpec::Linear] {
        let g = gram(&spec, to_array(&left).view(), to_array(&right).view()).unwrap();
        assert_eq!(g.values().dim(), (2, 3));
        let reference = kernel_matrix(spec.sigma(), &left, &right);
        for i in 0..2 {
            for j in 0..3 {
                assert!((g.values()[[i, j]] - reference[i][j]).abs() < 1e-15);
                assert_eq!(g.values()[[i, j]], spec.eval(&left[i], &right[j]).unwrap());
            }
        }
    }
}

fn blobs(seed: u64) -> (Array2<f64>, Array2<f64>) {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let a = Array2::from_shape_fn((20, 2), |_| 5.0 + noise.sample(&mut r));
    let b = Array2::from_shape_fn((20, 2), |_| -5.0 + noise.sample(&mut r));
    (a, b)
}

#[test]
fn blobs_are_separated() {
    let (a, b) = blobs(11);
    let hp = TrkmClassifierHyperparams::equal(1.0, 1.0, KernelSpec::Gaussian { sigma: 1.0 });
    let m = fit_classifier(a.view(), b.view(), &hp).unwrap();
    assert!(m.predict(a.view()).unwrap().iter().all(|&l| l == 1));
    assert!(m.predict(b.view()).unwrap().iter().all(|&l| l == -1));
    let (g1, g2) = m.decision_values(a.slice(ndarray::s![..1, ..])).unwrap();
    assert!(g1[0] + g2[0] > 0.0);

    let x = ndarray::concatenate(ndarray::Axis(0), &[a.view(), b.view()]).unwrap();
    let y: Vec<i8> = (0..40).map(|i| if i < 20 { 1 } else { -1 }).collect();
    let rkm = fit_rkm(x.view(), &y, &RkmHyperparams { gamma: 1.0, eta: 1.0, kernel: KernelSpec::Gaussian { sigma: 1.0 } })
        .unwrap();
    assert_eq!(rkm.predict(x.view()).unwrap(), y);
}

#[test]
fn swapping_classes_flips_labels() {
    let mut r = rng(12);
    for _ in 0..10 {
        let (n1, n2) = (r.random_range(2..15), r.random_range(2..15));
        let a = to_array(&uniform_matrix(&mut r, n1, 3));
        let b = to_array(&uniform_matrix(&mut r, n2, 3)) + 0.3;
        let probe = to_array(&uniform_matrix(&mut r, 25, 3));
        let hp = TrkmClassifierHyperparams::equal(r.random_range(0.1..10.0), r.random_range(0.1..10.0), KernelSpec::Gaussian {
            sigma: r.random_range(0.2..2.0),
        });
        let m = fit_classifier(a.view(), b.view(), &hp).unwrap();
        let swapped = fit_classifier(b.view(), a.view(), &hp).unwrap();
        let (g1, g2) = m.decision_values(probe.view()).unwrap();
        let (s1, s2) = swapped.decision_values(probe.view()).unwrap();
        for i in 0..25 {
            assert!((s1[i] + g2[i]).abs() < 1e-9 * g2[i].abs().max(1.0));
            assert!((s2[i] + g1[i]).abs() < 1e-9 * g1[i].abs().max(1.0));
        }
        let (p, q) = (m.predict(probe.view()).unwrap(), swapped.predict(probe.view()).unwrap());
        for i in 0..25 {
            if g1[i] + g2[i] != 0.0 {
                assert_eq!(p[i], -q[i]);
            }
        }
    }
}

#[test]
fn constant_target_is_reproduced() {
    let mut r = rng(13);
    let mut x = uniform_matrix(&mut r, 20, 2);
    let mean = col_sums(&x).iter().map(|s| s / 20.0).collect::<Vec<_>>();
    for row in &mut x {
        for j in 0..2 {
            row[j] -= mean[j];
        }
    }
    let y = vec![3.7; 20];
    let hp = TrkmRegressorHyperparams::equal(1.0, 1.0, KernelSpec::Linear);
    let m = fit_regressor(to_array(&x).view(), Array1::from(y.clone()).view(), &hp).unwrap();
    let (h1, b1, h2, b2) = regressor_oracle(&x, &y, None, (1.0, 1.0, 1.0, 1.0));
    assert!(max_abs_diff(&m.h1().to_vec(), &h1) < 1e-9 && (m.b1() - b1).abs() < 1e-9);
    assert!(max_abs_diff(&m.h2().to_vec(), &h2) < 1e-9 && (m.b2() - b2).abs() < 1e-9);
    let probe = to_array(&uniform_matrix(&mut r, 30, 2)) - 0.5;
    let pred = m.predict(probe.view()).unwrap();
    let mae = pred.iter().map(|p| (p - 3.7).abs()).sum::<f64>() / 30.0;
    assert!(mae < 1e-3, "mae {mae}");
}

#[test]
fn sine_fit_tracks_training_points() {
    let n = 50;
    let x = Array2::from_shape_fn((n, 1), |(i, _)| 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64);
    let y = x.column(0).mapv(f64::sin);
    let hp = TrkmRegressorHyperparams::equal(1e-3, 1e-3, KernelSpec::Gaussian { sigma: 1.0 });
    let m = fit_regressor(x.view(), y.view(), &hp).unwrap();
    let (h1, b1, _, _) = regressor_oracle(&rows_of(&x), &y.to_vec(), Some(1.0), (1e-3, 1e-3, 1e-3, 1e-3));
    assert!(max_abs_diff(&m.h1().to_vec(), &h1) < 1e-6 * h1.iter().fold(1.0f64, |s, v| s.max(v.abs())));
    assert!((m.b1() - b1).abs() < 1e-6 * b1.abs().max(1.0));
    let pred = m.predict(x.view()).unwrap();
    assert!((pred[10] - y[10]).abs() < 0.1);
    assert!(m.predict(Array2::zeros((0, 1)).view()).unwrap().is_empty());
}

#[test]
fn rkm_matches_brute_force() {
    let mut r = rng(14);
    for _ in 0..20 {
        let n = r.random_range(2..=8);
        let x = uniform_matrix(&mut r, n, 2);
        let y: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let (gamma, eta) = (r.random_range(0.2..5.0), r.random_range(0.2..5.0));
        let s = r.random_range(0.3..2.0);
        let m = fit_rkm(to_array(&x).view(), &y, &RkmHyperparams { gamma, eta, kernel: KernelSpec::Gaussian { sigma: s } })
            .unwrap();
        let sigma = Some(s);
        let k = kernel_matrix(sigma, &x, &x);
        let mut rhs: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
        rhs.push(0.0);
        let s = full_pivot_solve(&bordered(&k, gamma, eta, 1.0), &rhs).unwrap();
        assert!(max_abs_diff(&m.h().to_vec(), &s[..n]) < 1e-9);
        assert!((m.b() - s[n]).abs() < 1e-9);
        assert!(m.h().sum().abs() < 1e-6 * n as f64);
    }
}

#[test]
fn rkm_symmetric_pair() {
    let x = array![[1.0, 0.5], [-1.0, -0.5]];
    let m = fit_rkm(x.view(), &[1, -1], &RkmHyperparams { gamma: 1.0, eta: 1.0, kernel: KernelSpec::Linear }).unwrap();
    assert!(m.b().abs() < 1e-15);
    assert!((m.h()[0] + m.h()[1]).abs() < 1e-15);
    assert_eq!(m.predict(x.view()).unwrap(), vec![1, -1]);
}

/// `J(w, b, h̃) = γ/2 wᵀw + Σ (1 − (xᵢᵀw + b)yᵢ) h̃ᵢ − η/2 Σ h̃ᵢ²` with the
/// hidden features of the fitted system entering as `h̃ = y ⊙ h`.
#[test]
fn rkm_objective_is_stationary() {
    let mut r = rng(15);
    for _ in 0..10 {
        let n = r.random_range(3..12);
        let m_feat = 3;
        let x = uniform_matrix(&mut r, n, m_feat);
        let y: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let labels: Vec<i8> = y.iter().map(|&v| v as i8).collect();
        let (gamma, eta) = (r.random_range(0.5..3.0), r.random_range(0.5..3.0));
        let model = fit_rkm(to_array(&x).view(), &labels, &RkmHyperparams { gamma, eta, kernel: KernelSpec::Linear }).unwrap();
        let h = model.h().to_vec();
        let mut w = vec![0.0; m_feat];
        for i in 0..n {
            for j in 0..m_feat {
                w[j] += x[i][j] * h[i] / gamma;
            }
        }
        let mut theta: Vec<f64> = w.clone();
        theta.push(model.b());
        theta.extend((0..n).map(|i| y[i] * h[i]));
        let objective = |t: &[f64]| {
            let (w, b, ht) = (&t[..m_feat], t[m_feat], &t[m_feat + 1..]);
            let mut j = gamma / 2.0 * dot(w, w);
            for i in 0..n {
                j += (1.0 - (dot(&x[i], w) + b) * y[i]) * ht[i] - eta / 2.0 * ht[i] * ht[i];
            }
            j
        };
        let step = 1e-4;
        for k in 0..theta.len() {
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[k] += step;
            down[k] -= step;
            let grad = (objective(&up) - objective(&down)) / (2.0 * step);
            assert!(grad.abs() <= 1e-6, "component {k}: {grad}");
        }
    }
}

#[test]
fn separable_cell_beats_degenerate_cell() {
    let mut r = rng(16);
    let x = to_array(&uniform_matrix(&mut r, 60, 2));
    let labels: Vec<i8> = (0..60).map(|i| if x[[i, 0]] > 0.5 { 1 } else { -1 }).collect();
    let data = Dataset::classification(x, labels, LabelMap::default()).unwrap();
    // a tiny bandwidth memorizes points and cannot generalize across folds
    let grid = GridSpec {
        gamma_values: vec![1.0],
        eta_values: vec![1.0],
        sigma_values: vec![1e-4, 0.5],
        equal_penalties: true,
        folds: 5,
        kernel: KernelFamily::Gaussian,
    };
    let res = grid_search(&data, &grid, ModelKind::TrkmC, 0).unwrap();
    assert!(res.table[1].mean_score > res.table[0].mean_score);
    assert_eq!(res.best_index, 1);
}

#[test]
fn friedman_against_hand_computation() {
    // Four datasets, three models; ranks written out by hand.
    let scores = array![[0.9, 0.8, 0.7], [0.6, 0.7, 0.8], [0.5, 0.5, 0.4], [0.9, 0.7, 0.8]];
    let t = rank_models(scores.view(), Better::Higher).unwrap();
    let expected = array![[1.0, 2.0, 3.0], [3.0, 2.0, 1.0], [1.5, 1.5, 3.0], [1.0, 3.0, 2.0]];
    assert_eq!(t.ranks, expected);
    let avg = [6.5 / 4.0, 8.5 / 4.0, 9.0 / 4.0];
    let chi2: f64 = 12.0 * 4.0 / 12.0 * (avg.iter().map(|r| r * r).sum::<f64>() - 3.0 * 16.0 / 4.0);
    let ff = 3.0 * chi2 / (4.0 * 2.0 - chi2);
    let f = friedman_test(&t, Some(5.14)).unwrap();
    assert!((f.chi2 - chi2).abs() < 1e-12);
    assert!((f.ff - ff).abs() < 1e-12);
    assert_eq!((f.df1, f.df2), (2, 6));
    assert_eq!(f.reject_null, Some(false));
}

#[test]
fn published_constants() {
    assert!((nemenyi_cd(6, 36, 2.850).unwrap() - 1.2567).abs() < 5e-4);
    let threshold = sign_test_threshold(36);
    assert!((threshold - 23.88).abs() < 1e-12);
    let table5 = std::fs::read_to_string(data_dir().join("paper/table5_rmse.csv")).unwrap();
    let t = trkm::benchmark::ScoreTable::from_csv_reader(table5.as_bytes()).unwrap();
    let f = friedman_test(&rank_models(t.scores.view(), Better::Lower).unwrap(), None).unwrap();
    assert!((f.ff / 69.95 - 1.0).abs() <= 0.03, "F_F {}", f.ff);
}
