//! Exhaustive best subset search, the ground truth for small `p`.

use std::cmp::Ordering;

use itertools::Itertools;
use rayon::prelude::*;

use crate::data::StandardizedDataset;
use crate::error::{Error, Result};
use crate::family::{fit_active, loss, ModelFamily};
use crate::pdas::feasible_cap;

pub const DEFAULT_P_CAP: usize = 25;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub active_set: Vec<usize>,
    pub loss: f64,
    pub subsets: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub p_cap: usize,
    pub parallel: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { p_cap: DEFAULT_P_CAP, parallel: true }
    }
}

/// Orders by loss, then lexicographically by subset, so any reduction order
/// picks the same winner.
fn better(a: (f64, Vec<usize>), b: (f64, Vec<usize>)) -> (f64, Vec<usize>) {
    match a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)) {
        Ordering::Greater => b,
        _ => a,
    }
}

/// The size-`k` subset minimizing the restricted loss over all `C(p, k)`
/// subsets. Refuses when `p` exceeds `opts.p_cap`.
pub fn exhaustive_best_subset(
    family: &ModelFamily,
    d: &StandardizedDataset,
    k: usize,
    opts: OracleOptions,
) -> Result<OracleResult> {
    let p = d.p();
    if p > opts.p_cap {
        return Err(Error::OracleTooLarge { p, cap: opts.p_cap });
    }
    let cap = feasible_cap(family.family, d.n(), p);
    if k > cap {
        return Err(Error::InfeasibleK { k, cap });
    }
    let score = |subset: Vec<usize>| -> Result<(f64, Vec<usize>)> {
        let model = fit_active(family, d, &subset)?;
        Ok((loss(family, d, &model)?, subset))
    };
    let worst = || (f64::INFINITY, vec![usize::MAX]);
    let combos = (0..p).combinations(k);
    let (best_loss, best_set) = if opts.parallel {
        combos
            .par_bridge()
            .map(score)
            .try_reduce(worst, |a, b| Ok(better(a, b)))?
    } else {
        let mut best = worst();
        for subset in combos {
            best = better(best, score(subset)?);
        }
        best
    };
    Ok(OracleResult { active_set: best_set, loss: best_loss, subsets: num_subsets(p, k) })
}

fn num_subsets(p: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (p - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_subsets() {
        assert_eq!(num_subsets(12, 4), 495);
        assert_eq!(num_subsets(25, 12), 5_200_300);
        assert_eq!(num_subsets(5, 0), 1);
    }

    #[test]
    fn ties_prefer_lexicographically_smaller() {
        let a = (1.0, vec![0, 2]);
        let b = (1.0, vec![0, 1]);
        assert_eq!(better(a.clone(), b.clone()).1, vec![0, 1]);
        assert_eq!(better(b, a).1, vec![0, 1]);
    }
}
