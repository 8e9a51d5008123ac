//! Least squares: `l(beta) = |y - X beta|^2 / (2n)`, `g_j = -e'X_j / n`, `h_j = 1`.

use nalgebra::DVector;

use super::CoefficientModel;
use crate::data::{Response, StandardizedDataset};
use crate::error::{Error, Result};
use crate::linalg::solve_spd;

fn response(d: &StandardizedDataset) -> &[f64] {
    match d.response() {
        Response::Continuous(y) => y,
        _ => unreachable!("family checked by caller"),
    }
}

pub(crate) fn loss(d: &StandardizedDataset, eta: &[f64]) -> f64 {
    let y = response(d);
    let rss: f64 = y.iter().zip(eta).map(|(y, e)| (y - e) * (y - e)).sum();
    rss / (2.0 * d.n() as f64)
}

pub(crate) fn derivatives(d: &StandardizedDataset, eta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let y = response(d);
    let n = d.n() as f64;
    let resid: Vec<f64> = y.iter().zip(eta).map(|(y, e)| y - e).collect();
    let g = (0..d.p())
        .map(|j| -d.col(j).iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>() / n)
        .collect();
    (g, vec![1.0; d.p()])
}

pub(crate) fn fit(d: &StandardizedDataset, active: &[usize]) -> Result<CoefficientModel> {
    let (n, p) = (d.n(), d.p());
    if active.len() > n {
        return Err(Error::InfeasibleK { k: active.len(), cap: n });
    }
    let mut model = CoefficientModel::zero(p);
    model.active_set = active.to_vec();
    if active.is_empty() {
        return Ok(model);
    }
    let xa = d.x().select_columns(active);
    let y = DVector::from_column_slice(response(d));
    let gram = xa.tr_mul(&xa);
    let rhs = xa.tr_mul(&y);
    let (coef, jittered) = solve_spd(gram, &rhs);
    if jittered {
        log::warn!("singular Gram matrix on active set of size {}; added ridge", active.len());
    }
    for (&j, &b) in active.iter().zip(coef.iter()) {
        model.beta[j] = b;
    }
    model.iterations = 1;
    Ok(model)
}
