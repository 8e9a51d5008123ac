//! Logistic regression with a free intercept, fitted by IRLS.

use nalgebra::{DMatrix, DVector};

use super::{CoefficientModel, ModelFamily};
use crate::data::{Response, StandardizedDataset};
use crate::linalg::solve_spd;

/// Linear predictors are clipped to this magnitude before exponentiation.
pub const ETA_CLIP: f64 = 30.0;
/// Floor on the IRLS weights `p (1 - p)`.
pub const WEIGHT_FLOOR: f64 = 1e-10;

fn response(d: &StandardizedDataset) -> &[f64] {
    match d.response() {
        Response::Binary(y) => y,
        _ => unreachable!("family checked by caller"),
    }
}

pub fn sigmoid(eta: f64) -> f64 {
    let eta = eta.clamp(-ETA_CLIP, ETA_CLIP);
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(eta))` without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

pub(crate) fn loss(d: &StandardizedDataset, eta: &[f64]) -> f64 {
    let y = response(d);
    y.iter()
        .zip(eta)
        .map(|(&y, &e)| {
            let e = e.clamp(-ETA_CLIP, ETA_CLIP);
            softplus(e) - y * e
        })
        .sum()
}

pub(crate) fn derivatives(d: &StandardizedDataset, eta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let y = response(d);
    let prob: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
    let resid: Vec<f64> = y.iter().zip(&prob).map(|(y, p)| y - p).collect();
    let w: Vec<f64> = prob.iter().map(|p| p * (1.0 - p)).collect();
    let mut g = Vec::with_capacity(d.p());
    let mut h = Vec::with_capacity(d.p());
    for j in 0..d.p() {
        let col = d.col(j);
        g.push(-col.iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>());
        h.push(col.iter().zip(&w).map(|(x, w)| x * x * w).sum::<f64>());
    }
    (g, h)
}

/// Damped Newton (IRLS) on `(intercept, beta_A)`.
pub(crate) fn fit(family: &ModelFamily, d: &StandardizedDataset, active: &[usize]) -> CoefficientModel {
    let y = response(d);
    let n = d.n();
    let k = active.len();
    let tol = family.solver_tol;

    // Design with a leading column of ones.
    let mut z = DMatrix::from_element(n, k + 1, 1.0);
    for (c, &j) in active.iter().enumerate() {
        z.column_mut(c + 1).copy_from_slice(d.col(j));
    }

    let ybar = y.iter().sum::<f64>() / n as f64;
    let ybar = ybar.clamp(1e-12, 1.0 - 1e-12);
    let mut theta = DVector::zeros(k + 1);
    theta[0] = (ybar / (1.0 - ybar)).ln().clamp(-ETA_CLIP, ETA_CLIP);

    let objective = |eta: &DVector<f64>| -> f64 {
        y.iter()
            .zip(eta.iter())
            .map(|(&y, &e)| {
                let e = e.clamp(-ETA_CLIP, ETA_CLIP);
                softplus(e) - y * e
            })
            .sum()
    };

    let mut eta = &z * &theta;
    let mut current = objective(&eta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < family.irls_max_iter {
        iterations += 1;
        let prob: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let grad = DVector::from_fn(k + 1, |c, _| {
            z.column(c).iter().zip(&prob).zip(y).map(|((x, p), y)| x * (p - y)).sum::<f64>()
        });
        if grad.amax() < tol {
            converged = true;
            break;
        }
        let mut zw = z.clone();
        for (i, p) in prob.iter().enumerate() {
            let w = (p * (1.0 - p)).max(WEIGHT_FLOOR);
            zw.row_mut(i).scale_mut(w);
        }
        let hess = z.tr_mul(&zw);
        let (step, _) = solve_spd(hess, &grad);

        // Halve the step until the loss does not increase.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &theta - &step * t;
            let trial_eta = &z * &trial;
            let value = objective(&trial_eta);
            if value <= current + 1e-12 * current.abs().max(1.0) {
                theta = trial;
                eta = trial_eta;
                current = value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || (&step * t).amax() < tol {
            converged = accepted;
            break;
        }
    }

    let mut model = CoefficientModel::zero(d.p());
    model.intercept = theta[0];
    for (c, &j) in active.iter().enumerate() {
        model.beta[j] = theta[c + 1];
    }
    model.active_set = active.to_vec();
    model.converged = converged;
    model.iterations = iterations;
    model
}
