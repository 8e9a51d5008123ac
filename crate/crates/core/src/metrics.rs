//! Estimation, selection and prediction quality measures.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|X beta_hat - X beta_star| / |X beta_star|`.
pub fn relative_mse(x: &DMatrix<f64>, beta_hat: &[f64], beta_star: &[f64]) -> Result<f64> {
    if beta_hat.len() != x.ncols() || beta_star.len() != x.ncols() {
        return Err(Error::Dimension("coefficient length does not match design".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..x.nrows() {
        let (mut fit, mut truth) = (0.0, 0.0);
        for j in 0..x.ncols() {
            fit += x[(i, j)] * beta_hat[j];
            truth += x[(i, j)] * beta_star[j];
        }
        num += (fit - truth) * (fit - truth);
        den += truth * truth;
    }
    if den == 0.0 {
        return Err(Error::NullSignal);
    }
    Ok((num / den).sqrt())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub tp: usize,
    pub fp: usize,
    pub selected: Vec<usize>,
    pub truth: Vec<usize>,
}

pub fn tp_fp(selected: &[usize], truth: &[usize]) -> SelectionScore {
    let tp = selected.iter().filter(|j| truth.contains(j)).count();
    SelectionScore { tp, fp: selected.len() - tp, selected: selected.to_vec(), truth: truth.to_vec() }
}

/// Fraction of rows with `1{prob >= threshold} == y`.
pub fn accuracy(prob: &[f64], y: &[f64], threshold: f64) -> Result<f64> {
    if prob.len() != y.len() || prob.is_empty() {
        return Err(Error::Dimension(format!("{} probabilities for {} labels", prob.len(), y.len())));
    }
    let hits = prob
        .iter()
        .zip(y)
        .filter(|(p, y)| (**p >= threshold) == (**y == 1.0))
        .count();
    Ok(hits as f64 / y.len() as f64)
}

/// Harrell's concordance: over pairs with an observed event `i` and
/// `T_i < T_j`, the share where `risk_i > risk_j`, ties in risk counting 1/2.
pub fn concordance_index(risk: &[f64], time: &[f64], status: &[bool]) -> Result<f64> {
    if risk.len() != time.len() || time.len() != status.len() {
        return Err(Error::Dimension("risk, time and status lengths differ".into()));
    }
    let mut comparable = 0u64;
    let mut score = 0.0;
    for i in 0..time.len() {
        if !status[i] {
            continue;
        }
        for j in 0..time.len() {
            if time[i] < time[j] {
                comparable += 1;
                if risk[i] > risk[j] {
                    score += 1.0;
                } else if risk[i] == risk[j] {
                    score += 0.5;
                }
            }
        }
    }
    if comparable == 0 {
        return Err(Error::NoComparablePairs);
    }
    Ok(score / comparable as f64)
}
