//! The primal-dual active set iteration for a fixed subset size `k`.
//!
//! Each step fits the loss on the current active set, computes duals and
//! sacrifices for every coordinate, and moves to the `k` coordinates with the
//! largest sacrifice. The iteration stops when the active set repeats.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Family, StandardizedDataset};
use crate::error::{Error, Result};
use crate::family::{check_active_set, dual_sacrifice, fit_active, loss, ModelFamily};

pub const DEFAULT_MAX_ITER: usize = 20;

/// Primal, dual and sacrifice vectors at an active-set fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualState {
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub active_set: Vec<usize>,
    pub inactive_set: Vec<usize>,
    pub k: usize,
    pub loss: f64,
    /// Whether the active-set sub-solver converged.
    pub fit_converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdasOutput {
    pub state: PrimalDualState,
    pub iterations: usize,
    /// The active set repeated on consecutive iterations.
    pub converged: bool,
    /// Active sets in the order they were fitted.
    pub history: Vec<Vec<usize>>,
}

/// Largest feasible subset size: `min(n, p)` for least squares, `p` otherwise.
pub fn feasible_cap(family: Family, n: usize, p: usize) -> usize {
    match family {
        Family::Gaussian => n.min(p),
        Family::Binomial | Family::Cox => p,
    }
}

/// Indices of the `k` largest entries of `delta`, returned in ascending
/// order. Ties go to the lower index; NaN ranks below every number.
pub fn select_top_k(delta: &[f64], k: usize) -> Vec<usize> {
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    let mut idx: Vec<usize> = (0..delta.len()).collect();
    idx.sort_by(|&a, &b| key(delta[b]).total_cmp(&key(delta[a])).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// A uniformly random `k`-subset of `0..p`, sorted.
pub fn random_init<R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, p, k.min(p)).into_vec();
    idx.sort_unstable();
    idx
}

/// One fit plus duals on the given (sorted, distinct) active set.
pub fn pdas_step(family: &ModelFamily, d: &StandardizedDataset, active: &[usize]) -> Result<PrimalDualState> {
    let model = fit_active(family, d, active)?;
    let duals = dual_sacrifice(family, d, &model)?;
    let value = loss(family, d, &model)?;
    let mut in_active = vec![false; d.p()];
    for &j in &model.active_set {
        in_active[j] = true;
    }
    let inactive_set = (0..d.p()).filter(|&j| !in_active[j]).collect();
    Ok(PrimalDualState {
        k: model.active_set.len(),
        beta: model.beta,
        intercept: model.intercept,
        gamma: duals.gamma,
        delta: duals.delta,
        active_set: model.active_set,
        inactive_set,
        loss: value,
        fit_converged: model.converged,
    })
}

/// Brings an initial set to size `k`: short sets are padded with the
/// largest-sacrifice coordinates of the zero model, long sets keep the `k`
/// largest `|beta|` of their own fit.
fn size_init(family: &ModelFamily, d: &StandardizedDataset, k: usize, init: &[usize]) -> Result<Vec<usize>> {
    let init = check_active_set(init, d.p())?;
    if init.len() == k {
        return Ok(init);
    }
    if init.len() < k {
        let zero = pdas_step(family, d, &[])?;
        let mut delta = zero.delta;
        for &j in &init {
            delta[j] = f64::NEG_INFINITY;
        }
        let extra = select_top_k(&delta, k - init.len());
        let mut out: Vec<usize> = init.into_iter().chain(extra).collect();
        out.sort_unstable();
        return Ok(out);
    }
    let model = fit_active(family, d, &init)?;
    let mut magnitude = vec![f64::NEG_INFINITY; d.p()];
    for &j in &init {
        magnitude[j] = model.beta[j].abs();
    }
    Ok(select_top_k(&magnitude, k))
}

/// Runs the active-set iteration for subset size `k` from `init`.
///
/// Stops when the active set repeats (`converged = true`). A revisit of any
/// earlier set, or reaching `m_max` iterations, returns the lowest-loss state
/// seen with `converged = false`.
pub fn pdas(
    family: &ModelFamily,
    d: &StandardizedDataset,
    k: usize,
    init: &[usize],
    m_max: usize,
) -> Result<PdasOutput> {
    let cap = feasible_cap(family.family, d.n(), d.p());
    if k == 0 || k > cap {
        return Err(Error::InfeasibleK { k, cap });
    }
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    let mut active = size_init(family, d, k, init)?;
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut history = Vec::new();
    let mut best: Option<PrimalDualState> = None;

    for m in 1..=m_max {
        let state = pdas_step(family, d, &active)?;
        history.push(active.clone());
        let next = select_top_k(&state.delta, k);
        if next == active {
            return Ok(PdasOutput { state, iterations: m, converged: true, history });
        }
        if best.as_ref().is_none_or(|b| state.loss < b.loss) {
            best = Some(state);
        }
        visited.insert(std::mem::replace(&mut active, next));
        if visited.contains(&active) {
            log::debug!("active set cycle at k = {k} after {m} iterations");
            return Ok(PdasOutput {
                state: best.expect("at least one state"),
                iterations: m,
                converged: false,
                history,
            });
        }
    }
    Ok(PdasOutput {
        state: best.expect("at least one state"),
        iterations: m_max,
        converged: false,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{standardize, Dataset, Response};
    use nalgebra::DMatrix;

    #[test]
    fn top_k_examples() {
        assert_eq!(select_top_k(&[3.0, 1.0, 2.0], 2), vec![0, 2]);
        assert_eq!(select_top_k(&[1.0; 4], 2), vec![0, 1]);
        assert_eq!(select_top_k(&[0.5, f64::NAN, 0.1], 2), vec![0, 2]);
        assert!(select_top_k(&[1.0, 2.0], 0).is_empty());
    }

    #[test]
    fn rejects_bad_k_and_init() {
        let x = DMatrix::from_fn(5, 3, |i, j| ((i + 1) * (j + 2) % 7) as f64);
        let d = standardize(&Dataset::new(x, Response::Continuous(vec![1.0, 2.0, 0.0, 3.0, 1.0])).unwrap())
            .unwrap();
        let fam = ModelFamily::gaussian();
        assert!(matches!(pdas(&fam, &d, 0, &[], 5), Err(Error::InfeasibleK { .. })));
        assert!(matches!(pdas(&fam, &d, 4, &[], 5), Err(Error::InfeasibleK { .. })));
        assert!(pdas(&fam, &d, 1, &[7], 5).is_err());
        assert!(pdas(&fam, &d, 2, &[1, 1], 5).is_err());
    }

    #[test]
    fn init_is_resized() {
        let x = DMatrix::from_fn(8, 4, |i, j| ((i * 3 + j * 5) % 7) as f64 + (i * j) as f64 * 0.1);
        let y: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let d = standardize(&Dataset::new(x, Response::Continuous(y)).unwrap()).unwrap();
        let fam = ModelFamily::gaussian();
        assert_eq!(size_init(&fam, &d, 2, &[3]).unwrap().len(), 2);
        assert!(size_init(&fam, &d, 2, &[3]).unwrap().contains(&3));
        assert_eq!(size_init(&fam, &d, 1, &[0, 1, 2]).unwrap().len(), 1);
    }
}
