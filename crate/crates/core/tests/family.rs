mod common;

use common::{random_instance, random_raw, rel_close};
use nalgebra::DMatrix;
use pdas_core::datagen::rng_for;
use pdas_core::family::cox::risk_weights;
use pdas_core::family::{coordinate_derivatives, dual_sacrifice, fit_active, loss_at, predict};
use pdas_core::{Family, ModelFamily, Response, StandardizedDataset};
use rand_distr::{Distribution, Normal};

const FAMILIES: [Family; 3] = [Family::Gaussian, Family::Binomial, Family::Cox];

#[test]
fn derivatives_match_finite_differences() {
    for family in FAMILIES {
        let fam = ModelFamily::new(family);
        let d = random_instance(family, 40, 5, 11);
        let mut rng = rng_for(3, 0);
        let normal = Normal::new(0.0, 0.5).unwrap();
        for _ in 0..20 {
            let beta: Vec<f64> = (0..5).map(|_| normal.sample(&mut rng)).collect();
            let b0 = if family == Family::Binomial { normal.sample(&mut rng) } else { 0.0 };
            let (g, h) = coordinate_derivatives(&fam, &d, &beta, b0).unwrap();
            let f = |j: usize, t: f64| {
                let mut b = beta.clone();
                b[j] += t;
                loss_at(&fam, &d, &b, b0).unwrap()
            };
            for j in 0..5 {
                let e = 1e-4;
                let fd_g = (f(j, e) - f(j, -e)) / (2.0 * e);
                assert!(rel_close(g[j], fd_g, 1e-5, 1e-2), "{family} g[{j}]: {} vs {fd_g}", g[j]);
                let e = 1e-3;
                let fd_h = (f(j, e) - 2.0 * f(j, 0.0) + f(j, -e)) / (e * e);
                assert!(rel_close(h[j], fd_h, 1e-4, 1e-2), "{family} h[{j}]: {} vs {fd_h}", h[j]);
            }
        }
    }
}

#[test]
fn active_fit_is_stationary_and_duals_complementary() {
    for family in FAMILIES {
        let fam = ModelFamily::new(family);
        let d = random_instance(family, 60, 6, 5);
        let active = [0, 2, 5];
        let m = fit_active(&fam, &d, &active).unwrap();
        assert!(m.converged, "{family}");
        let (g, _) = coordinate_derivatives(&fam, &d, &m.beta, m.intercept).unwrap();
        // Scale-aware stationarity: binomial and Cox losses are sums over rows.
        let scale = if family == Family::Gaussian { 1.0 } else { d.n() as f64 };
        for &j in &active {
            assert!(g[j].abs() < 10.0 * fam.solver_tol * scale, "{family} g[{j}] = {}", g[j]);
        }
        for j in [1, 3, 4] {
            assert_eq!(m.beta[j], 0.0);
        }
        let duals = dual_sacrifice(&fam, &d, &m).unwrap();
        for j in 0..6 {
            assert_eq!(m.beta[j] * duals.gamma[j], 0.0);
            assert!(duals.delta[j] >= 0.0);
        }
    }
}

#[test]
fn binomial_intercept_is_stationary() {
    let fam = ModelFamily::binomial();
    let d = random_instance(Family::Binomial, 80, 4, 8);
    let m = fit_active(&fam, &d, &[1, 3]).unwrap();
    let e = 1e-5;
    let slope = (loss_at(&fam, &d, &m.beta, m.intercept + e).unwrap()
        - loss_at(&fam, &d, &m.beta, m.intercept - e).unwrap())
        / (2.0 * e);
    assert!(slope.abs() < 1e-5, "intercept slope {slope}");
}

/// Plain gradient descent on the logistic loss in `(b0, b_A)`, written
/// independently of the library's Newton solver.
fn logistic_gradient_descent(d: &StandardizedDataset, active: &[usize]) -> (f64, Vec<f64>) {
    let y = match d.response() {
        Response::Binary(y) => y.clone(),
        _ => unreachable!(),
    };
    let n = d.n();
    let k = active.len();
    let cols: Vec<&[f64]> = active.iter().map(|&j| d.col(j)).collect();
    let mut theta = vec![0.0; k + 1];
    // The loss is a sum; its Hessian is bounded by (1/4) Z^T Z, whose
    // largest eigenvalue is at most (1/4) trace = (1/4)(n + k n).
    let step = 4.0 / ((k + 1) as f64 * n as f64);
    for _ in 0..200_000 {
        let mut grad = vec![0.0; k + 1];
        for i in 0..n {
            let eta = theta[0] + (0..k).map(|a| cols[a][i] * theta[a + 1]).sum::<f64>();
            let r = 1.0 / (1.0 + (-eta).exp()) - y[i];
            grad[0] += r;
            for a in 0..k {
                grad[a + 1] += r * cols[a][i];
            }
        }
        if grad.iter().all(|g| g.abs() < 1e-11) {
            break;
        }
        for a in 0..=k {
            theta[a] -= step * grad[a];
        }
    }
    (theta[0], theta[1..].to_vec())
}

#[test]
fn binomial_fit_matches_gradient_descent() {
    let fam = ModelFamily::binomial();
    let d = random_instance(Family::Binomial, 50, 5, 21);
    let active = [0, 1, 4];
    let m = fit_active(&fam, &d, &active).unwrap();
    let (b0, b) = logistic_gradient_descent(&d, &active);
    assert!((m.intercept - b0).abs() < 1e-6, "{} vs {b0}", m.intercept);
    for (a, &j) in active.iter().enumerate() {
        assert!((m.beta[j] - b[a]).abs() < 1e-6, "beta[{j}] {} vs {}", m.beta[j], b[a]);
    }
}

#[test]
fn gaussian_fit_on_orthogonal_design_is_projection() {
    use pdas_core::Dataset;
    let n = 40;
    let mut rng = rng_for(9, 0);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let raw = DMatrix::from_fn(n, 4, |_, _| normal.sample(&mut rng));
    let q = raw.qr().q() * (n as f64).sqrt();
    let y: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let d = StandardizedDataset::identity(Dataset::new(q.clone(), Response::Continuous(y.clone())).unwrap());
    let m = fit_active(&ModelFamily::gaussian(), &d, &[1, 3]).unwrap();
    for j in [1, 3] {
        let expected: f64 = (0..n).map(|i| q[(i, j)] * y[i]).sum::<f64>() / n as f64;
        assert!((m.beta[j] - expected).abs() < 1e-10);
    }
}

#[test]
fn cox_risk_weights_sum_to_one() {
    let d = random_instance(Family::Cox, 50, 4, 2);
    let beta = [0.3, -0.2, 0.0, 0.7];
    let weights = risk_weights(&d, &beta);
    assert!(!weights.is_empty());
    for (_, w) in weights {
        let total: f64 = w.iter().map(|(_, v)| v).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cox_loss_matches_direct_enumeration() {
    let d = random_instance(Family::Cox, 30, 3, 4);
    let beta = [0.4, 0.1, -0.5];
    let fam = ModelFamily::cox();
    let (time, status) = match d.response() {
        Response::Survival { time, status } => (time.clone(), status.clone()),
        _ => unreachable!(),
    };
    let eta: Vec<f64> = (0..d.n()).map(|i| (0..3).map(|j| d.col(j)[i] * beta[j]).sum()).collect();
    let mut direct = 0.0;
    for i in 0..d.n() {
        if status[i] {
            let s: f64 = (0..d.n()).filter(|&r| time[r] >= time[i]).map(|r| eta[r].exp()).sum();
            direct -= eta[i] - s.ln();
        }
    }
    let ours = loss_at(&fam, &d, &beta, 0.0).unwrap();
    assert!((ours - direct).abs() < 1e-10 * direct.abs());
}

#[test]
fn cox_diagonal_newton_agrees_with_full() {
    let d = random_instance(Family::Cox, 80, 5, 13);
    let full = fit_active(&ModelFamily::cox(), &d, &[0, 2, 4]).unwrap();
    let mut diag = ModelFamily::cox();
    diag.diagonal_hessian = true;
    diag.newton_max_iter = 5000;
    diag.solver_tol = 1e-10;
    let approx = fit_active(&diag, &d, &[0, 2, 4]).unwrap();
    assert!(approx.converged);
    for j in 0..5 {
        assert!((full.beta[j] - approx.beta[j]).abs() < 1e-5, "{j}: {} vs {}", full.beta[j], approx.beta[j]);
    }
}

#[test]
fn extreme_linear_predictors_stay_finite() {
    for family in [Family::Binomial, Family::Cox] {
        let fam = ModelFamily::new(family);
        let d = random_instance(family, 30, 3, 6);
        let beta = [400.0, -350.0, 200.0];
        let l = loss_at(&fam, &d, &beta, 0.0).unwrap();
        let (g, h) = coordinate_derivatives(&fam, &d, &beta, 0.0).unwrap();
        assert!(l.is_finite(), "{family}");
        assert!(g.iter().chain(&h).all(|v| v.is_finite()), "{family}");
    }
}

#[test]
fn predictions_use_original_scale() {
    for family in FAMILIES {
        let fam = ModelFamily::new(family);
        let raw = random_raw(family, 40, 3, 17).x() * 3.0 + DMatrix::repeat(40, 3, 1.5);
        let d = pdas_core::standardize(&pdas_core::Dataset::new(raw.clone(), random_raw(family, 40, 3, 17).response().clone()).unwrap()).unwrap();
        let m = fit_active(&fam, &d, &[0, 2]).unwrap();
        let out = predict(&fam, &m, &raw, &d).unwrap();
        let eta_std: Vec<f64> =
            (0..d.n()).map(|i| m.intercept + (0..3).map(|j| d.col(j)[i] * m.beta[j]).sum::<f64>()).collect();
        for i in 0..d.n() {
            let expected = match family {
                // Centered response: prediction adds the mean back.
                Family::Gaussian => eta_std[i] + d.response_center(),
                Family::Binomial => 1.0 / (1.0 + (-eta_std[i]).exp()),
                Family::Cox => eta_std[i].exp(),
            };
            assert!(rel_close(out[i], expected, 1e-10, 1e-12), "{family} row {i}: {} vs {expected}", out[i]);
        }
    }
}
