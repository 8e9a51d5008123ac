//! Cox proportional hazards via the Breslow partial likelihood.
//!
//! The risk set of an event at time `T_i` is `{i' : T_i' >= T_i}`. Rows are
//! visited in order of decreasing time, so every risk-set sum is a running
//! sum; tied times are processed as one group before any of the group's
//! events contribute.

use nalgebra::{DMatrix, DVector};

use super::{CoefficientModel, ModelFamily, CURVATURE_FLOOR};
use crate::data::{Response, StandardizedDataset};
use crate::linalg::solve_spd;

/// Rows ordered by decreasing time, split into groups of tied times.
#[derive(Clone, Debug)]
pub struct RiskSets {
    order: Vec<usize>,
    /// `[start, end)` ranges into `order`, one per distinct time.
    groups: Vec<(usize, usize)>,
}

impl RiskSets {
    pub fn new(time: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..time.len()).collect();
        order.sort_by(|&a, &b| time[b].total_cmp(&time[a]).then(a.cmp(&b)));
        let mut groups = Vec::new();
        let mut start = 0;
        for pos in 1..=order.len() {
            if pos == order.len() || time[order[pos]] != time[order[start]] {
                groups.push((start, pos));
                start = pos;
            }
        }
        RiskSets { order, groups }
    }
}

fn survival(d: &StandardizedDataset) -> (&[f64], &[bool], &RiskSets) {
    match d.response() {
        Response::Survival { time, status } => (time, status, d.risk_sets().expect("risk sets built")),
        _ => unreachable!("family checked by caller"),
    }
}

/// Running risk-set sums are kept relative to the largest `eta` seen so far.
/// When a row raises that maximum, the sums are rescaled first, so no
/// weight underflows however spread out `eta` is.
struct Shift(f64);

impl Shift {
    /// Weight of a row with predictor `e`, and the factor to rescale the
    /// running sums by before adding it.
    #[inline]
    fn admit(&mut self, e: f64) -> (f64, f64) {
        if e > self.0 {
            let r = (self.0 - e).exp();
            self.0 = e;
            (1.0, r)
        } else {
            ((e - self.0).exp(), 1.0)
        }
    }
}

pub(crate) fn loss(d: &StandardizedDataset, eta: &[f64]) -> f64 {
    let (_, status, rs) = survival(d);
    let mut shift = Shift(f64::NEG_INFINITY);
    let mut s0 = 0.0;
    let mut total = 0.0;
    for &(start, end) in &rs.groups {
        let members = &rs.order[start..end];
        for &i in members {
            let (w, r) = shift.admit(eta[i]);
            s0 = s0 * r + w;
        }
        let log_s0 = s0.ln() + shift.0;
        for &i in members {
            if status[i] {
                total -= eta[i] - log_s0;
            }
        }
    }
    total
}

pub(crate) fn derivatives(d: &StandardizedDataset, eta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (_, status, rs) = survival(d);
    let p = d.p();
    let mut shift = Shift(f64::NEG_INFINITY);
    let cols: Vec<&[f64]> = (0..p).map(|j| d.col(j)).collect();
    let mut s0 = 0.0;
    let mut s1 = vec![0.0; p];
    let mut s2 = vec![0.0; p];
    let mut g = vec![0.0; p];
    let mut h = vec![0.0; p];
    for &(start, end) in &rs.groups {
        let members = &rs.order[start..end];
        let mut events = 0.0;
        for &i in members {
            let (wi, r) = shift.admit(eta[i]);
            if r != 1.0 {
                s0 *= r;
                s1.iter_mut().chain(s2.iter_mut()).for_each(|v| *v *= r);
            }
            s0 += wi;
            for j in 0..p {
                let x = cols[j][i];
                s1[j] += wi * x;
                s2[j] += wi * x * x;
            }
            if status[i] {
                events += 1.0;
                for j in 0..p {
                    g[j] -= cols[j][i];
                }
            }
        }
        if events > 0.0 {
            for j in 0..p {
                let mean = s1[j] / s0;
                g[j] += events * mean;
                h[j] += events * (s2[j] / s0 - mean * mean);
            }
        }
    }
    (g, h)
}

/// Risk-set weights `w[i][i'] = exp(x_i' beta) / sum_{T_i'' >= T_i} exp(x_i'' beta)`
/// for each event `i`, by direct enumeration. Intended for diagnostics and tests.
pub fn risk_weights(d: &StandardizedDataset, beta: &[f64]) -> Vec<(usize, Vec<(usize, f64)>)> {
    let (time, status, _) = survival(d);
    let eta = super::linear_predictor(d, beta, 0.0);
    (0..d.n())
        .filter(|&i| status[i])
        .map(|i| {
            let set: Vec<usize> = (0..d.n()).filter(|&r| time[r] >= time[i]).collect();
            let m = set.iter().map(|&r| eta[r]).fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = set.iter().map(|&r| (eta[r] - m).exp()).sum();
            (i, set.into_iter().map(|r| (r, (eta[r] - m).exp() / total)).collect())
        })
        .collect()
}

/// Gradient and Hessian (full, or its diagonal) of the loss in the active
/// coordinates. `xa` is the row-major `n x k` active design.
fn active_derivatives(
    xa: &[f64],
    k: usize,
    eta: &[f64],
    status: &[bool],
    rs: &RiskSets,
    diagonal: bool,
) -> (DVector<f64>, DMatrix<f64>) {
    let mut shift = Shift(f64::NEG_INFINITY);
    let mut s0 = 0.0;
    let mut s1 = vec![0.0; k];
    let mut s2: DMatrix<f64> = DMatrix::zeros(k, k);
    let mut grad: DVector<f64> = DVector::zeros(k);
    let mut hess: DMatrix<f64> = DMatrix::zeros(k, k);
    for &(start, end) in &rs.groups {
        let members = &rs.order[start..end];
        let mut events = 0.0;
        for &i in members {
            let (wi, r) = shift.admit(eta[i]);
            if r != 1.0 {
                s0 *= r;
                s1.iter_mut().for_each(|v| *v *= r);
                s2 *= r;
            }
            let row = &xa[i * k..(i + 1) * k];
            s0 += wi;
            for a in 0..k {
                s1[a] += wi * row[a];
                if diagonal {
                    s2[(a, a)] += wi * row[a] * row[a];
                } else {
                    let wa = wi * row[a];
                    for b in a..k {
                        s2[(a, b)] += wa * row[b];
                    }
                }
            }
            if status[i] {
                events += 1.0;
                for a in 0..k {
                    grad[a] -= row[a];
                }
            }
        }
        if events > 0.0 {
            for a in 0..k {
                let ma = s1[a] / s0;
                grad[a] += events * ma;
                if diagonal {
                    hess[(a, a)] += events * (s2[(a, a)] / s0 - ma * ma);
                } else {
                    for b in a..k {
                        hess[(a, b)] += events * (s2[(a, b)] / s0 - ma * s1[b] / s0);
                    }
                }
            }
        }
    }
    if !diagonal {
        for a in 0..k {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }
    }
    (grad, hess)
}

/// Newton-Raphson with step halving on the active coordinates.
pub(crate) fn fit(family: &ModelFamily, d: &StandardizedDataset, active: &[usize]) -> CoefficientModel {
    let (_, status, rs) = survival(d);
    let n = d.n();
    let k = active.len();
    let mut model = CoefficientModel::zero(d.p());
    model.active_set = active.to_vec();
    if k == 0 {
        return model;
    }
    let tol = family.solver_tol;
    let mut xa = vec![0.0; n * k];
    for (c, &j) in active.iter().enumerate() {
        for (i, &x) in d.col(j).iter().enumerate() {
            xa[i * k + c] = x;
        }
    }
    let predictor = |coef: &DVector<f64>| -> Vec<f64> {
        (0..n)
            .map(|i| xa[i * k..(i + 1) * k].iter().zip(coef.iter()).map(|(x, b)| x * b).sum())
            .collect()
    };

    let mut coef = DVector::zeros(k);
    let mut eta = vec![0.0; n];
    let mut current = loss(d, &eta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < family.newton_max_iter {
        iterations += 1;
        let (grad, hess) = active_derivatives(&xa, k, &eta, status, rs, family.diagonal_hessian);
        if grad.amax() < tol {
            converged = true;
            break;
        }
        let step = if family.diagonal_hessian {
            DVector::from_fn(k, |a, _| grad[a] / hess[(a, a)].max(CURVATURE_FLOOR))
        } else {
            solve_spd(hess, &grad).0
        };

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &coef - &step * t;
            let trial_eta = predictor(&trial);
            let value = loss(d, &trial_eta);
            if value <= current + 1e-12 * current.abs().max(1.0) {
                coef = trial;
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

    for (c, &j) in active.iter().enumerate() {
        model.beta[j] = coef[c];
    }
    model.converged = converged;
    model.iterations = iterations;
    model
}
