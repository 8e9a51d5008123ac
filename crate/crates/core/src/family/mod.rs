//! Per-family losses, coordinate derivatives, duals and sacrifices, and the
//! restricted fits on a fixed active set.
//!
//! For every coordinate `j` the solvers need the first and second partial
//! derivatives `g_j`, `h_j` of the loss at the current coefficients. The dual
//! variable is the standardized gradient `gamma_j = -g_j / h_j` and the
//! sacrifice `delta_j = h_j * (beta_j + gamma_j)^2 / 2` is the increase of the
//! local quadratic model when coordinate `j` is forced to zero.

pub mod binomial;
pub mod cox;
pub mod gaussian;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use crate::data::Family;
use crate::data::StandardizedDataset;
use crate::error::{Error, Result};

/// Lower bound applied to `h_j` before dividing by it.
pub const CURVATURE_FLOOR: f64 = 1e-10;

/// A family tag together with the sub-solver settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFamily {
    pub family: Family,
    /// Iteration cap for the logistic IRLS solver.
    pub irls_max_iter: usize,
    /// Iteration cap for the Cox Newton-Raphson solver.
    pub newton_max_iter: usize,
    /// Replace the Cox Hessian by its diagonal in Newton steps.
    pub diagonal_hessian: bool,
    pub solver_tol: f64,
}

impl ModelFamily {
    pub fn new(family: Family) -> Self {
        ModelFamily {
            family,
            irls_max_iter: 30,
            newton_max_iter: 30,
            diagonal_hessian: false,
            solver_tol: 1e-8,
        }
    }

    pub fn gaussian() -> Self {
        Self::new(Family::Gaussian)
    }

    pub fn binomial() -> Self {
        Self::new(Family::Binomial)
    }

    pub fn cox() -> Self {
        Self::new(Family::Cox)
    }

    pub fn validate(&self) -> Result<()> {
        if self.irls_max_iter == 0 || self.newton_max_iter == 0 {
            return Err(Error::InvalidArgument("iteration caps must be at least 1".into()));
        }
        if self.solver_tol.is_nan() || self.solver_tol <= 0.0 {
            return Err(Error::InvalidArgument("solver_tol must be positive".into()));
        }
        Ok(())
    }

    fn check(&self, d: &StandardizedDataset) -> Result<()> {
        self.validate()?;
        if d.family() != self.family {
            return Err(Error::FamilyMismatch(self.family.name()));
        }
        Ok(())
    }
}

/// Coefficients on the standardized scale. `beta[j] == 0` off the active set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientModel {
    pub beta: Vec<f64>,
    /// Free intercept; only logistic models estimate one.
    pub intercept: f64,
    /// Sorted, distinct column indices.
    pub active_set: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

impl CoefficientModel {
    pub fn zero(p: usize) -> Self {
        CoefficientModel {
            beta: vec![0.0; p],
            intercept: 0.0,
            active_set: Vec::new(),
            converged: true,
            iterations: 0,
        }
    }
}

/// Duals and sacrifices for every coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Duals {
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
}

/// Linear predictor `intercept + X beta` over the nonzero coordinates.
pub(crate) fn linear_predictor(d: &StandardizedDataset, beta: &[f64], intercept: f64) -> Vec<f64> {
    let mut eta = vec![intercept; d.n()];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (e, x) in eta.iter_mut().zip(d.col(j)) {
                *e += b * x;
            }
        }
    }
    eta
}

/// Family loss at arbitrary coefficients (not restricted to an active set).
pub fn loss_at(family: &ModelFamily, d: &StandardizedDataset, beta: &[f64], intercept: f64) -> Result<f64> {
    family.check(d)?;
    if beta.len() != d.p() {
        return Err(Error::Dimension(format!("beta has {} entries, p = {}", beta.len(), d.p())));
    }
    let eta = linear_predictor(d, beta, intercept);
    Ok(match family.family {
        Family::Gaussian => gaussian::loss(d, &eta),
        Family::Binomial => binomial::loss(d, &eta),
        Family::Cox => cox::loss(d, &eta),
    })
}

pub fn loss(family: &ModelFamily, d: &StandardizedDataset, m: &CoefficientModel) -> Result<f64> {
    loss_at(family, d, &m.beta, m.intercept)
}

/// Coordinate-wise `(g_j, h_j)` for every `j`, holding the other coordinates
/// (and the logistic intercept) fixed at the given values.
pub fn coordinate_derivatives(
    family: &ModelFamily,
    d: &StandardizedDataset,
    beta: &[f64],
    intercept: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    family.check(d)?;
    if beta.len() != d.p() {
        return Err(Error::Dimension(format!("beta has {} entries, p = {}", beta.len(), d.p())));
    }
    let eta = linear_predictor(d, beta, intercept);
    Ok(match family.family {
        Family::Gaussian => gaussian::derivatives(d, &eta),
        Family::Binomial => binomial::derivatives(d, &eta),
        Family::Cox => cox::derivatives(d, &eta),
    })
}

/// Duals and sacrifices at an active-set fit.
///
/// Active coordinates get `gamma_j = 0`, `delta_j = h_j beta_j^2 / 2`;
/// inactive ones get `gamma_j = -g_j / h_j`, `delta_j = h_j gamma_j^2 / 2`.
pub fn dual_sacrifice(family: &ModelFamily, d: &StandardizedDataset, m: &CoefficientModel) -> Result<Duals> {
    let (g, h) = coordinate_derivatives(family, d, &m.beta, m.intercept)?;
    let p = d.p();
    let mut active = vec![false; p];
    for &j in &m.active_set {
        active[j] = true;
    }
    let mut gamma = vec![0.0; p];
    let mut delta = vec![0.0; p];
    for j in 0..p {
        let hj = h[j].max(CURVATURE_FLOOR);
        if active[j] {
            delta[j] = 0.5 * hj * m.beta[j] * m.beta[j];
        } else {
            gamma[j] = -g[j] / hj;
            delta[j] = 0.5 * hj * gamma[j] * gamma[j];
        }
    }
    Ok(Duals { gamma, delta })
}

pub(crate) fn check_active_set(active_set: &[usize], p: usize) -> Result<Vec<usize>> {
    let mut sorted = active_set.to_vec();
    sorted.sort_unstable();
    if let Some(&j) = sorted.last() {
        if j >= p {
            return Err(Error::InvalidArgument(format!("index {j} out of range for p = {p}")));
        }
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("active set contains duplicate indices".into()));
    }
    Ok(sorted)
}

/// Minimizes the family loss subject to `beta_j = 0` off `active_set`.
///
/// Hitting an iteration cap is not an error; the returned model carries
/// `converged = false`.
pub fn fit_active(family: &ModelFamily, d: &StandardizedDataset, active_set: &[usize]) -> Result<CoefficientModel> {
    family.check(d)?;
    let active = check_active_set(active_set, d.p())?;
    match family.family {
        Family::Gaussian => gaussian::fit(d, &active),
        Family::Binomial => Ok(binomial::fit(family, d, &active)),
        Family::Cox => Ok(cox::fit(family, d, &active)),
    }
}

/// Log-likelihood behind the information criteria.
///
/// Gaussian models use the concentrated likelihood `-(n/2) log(RSS/n)`; the
/// other families use minus their loss.
pub fn log_likelihood(family: Family, n: usize, loss: f64) -> f64 {
    match family {
        Family::Gaussian => {
            let mse = (2.0 * loss).max(f64::MIN_POSITIVE);
            -0.5 * n as f64 * mse.ln()
        }
        Family::Binomial | Family::Cox => -loss,
    }
}

/// Predictions for new rows given on the original scale: fitted values,
/// probabilities, or relative risks.
pub fn predict(
    family: &ModelFamily,
    m: &CoefficientModel,
    x_new: &DMatrix<f64>,
    meta: &StandardizedDataset,
) -> Result<Vec<f64>> {
    if x_new.ncols() != meta.p() || m.beta.len() != meta.p() {
        return Err(Error::Dimension(format!(
            "new data has {} columns, model has {}",
            x_new.ncols(),
            meta.p()
        )));
    }
    let (b0, beta) = meta.destandardize(&m.beta, m.intercept);
    let mut eta = vec![b0; x_new.nrows()];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (e, x) in eta.iter_mut().zip(x_new.column(j).iter()) {
                *e += b * x;
            }
        }
    }
    Ok(match family.family {
        Family::Gaussian => eta,
        Family::Binomial => eta.into_iter().map(binomial::sigmoid).collect(),
        Family::Cox => eta.into_iter().map(f64::exp).collect(),
    })
}
