//! Choosing the subset size: a sequential sweep over `k` scored by
//! information criteria, and a golden-section search for the elbow of the
//! loss curve.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{Family, StandardizedDataset};
use crate::error::{Error, Result};
use crate::family::{log_likelihood, CoefficientModel, ModelFamily};
use crate::pdas::{feasible_cap, pdas, pdas_step, select_top_k, PdasOutput, DEFAULT_MAX_ITER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Bic,
    Ebic,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Aic, Criterion::Bic, Criterion::Ebic];

    /// AIC when `n >= p`, EBIC otherwise.
    pub fn auto(n: usize, p: usize) -> Self {
        if n >= p {
            Criterion::Aic
        } else {
            Criterion::Ebic
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Aic => "aic",
            Criterion::Bic => "bic",
            Criterion::Ebic => "ebic",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionValues {
    pub loglik: f64,
    pub deviance: f64,
    pub aic: f64,
    pub bic: f64,
    pub ebic: f64,
    pub k: usize,
    pub n: usize,
    pub p: usize,
}

impl CriterionValues {
    pub fn get(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Aic => self.aic,
            Criterion::Bic => self.bic,
            Criterion::Ebic => self.ebic,
        }
    }
}

/// `deviance = -2 loglik`; AIC adds `2k`, BIC `k log n`, EBIC a further `2k log p`.
pub fn criteria(loglik: f64, k: usize, n: usize, p: usize) -> CriterionValues {
    let deviance = -2.0 * loglik;
    let kf = k as f64;
    let bic = deviance + kf * (n as f64).ln();
    CriterionValues {
        loglik,
        deviance,
        aic: deviance + 2.0 * kf,
        bic,
        ebic: bic + 2.0 * kf * (p as f64).ln(),
        k,
        n,
        p,
    }
}

fn criteria_for(family: Family, d: &StandardizedDataset, k: usize, loss: f64) -> CriterionValues {
    criteria(log_likelihood(family, d.n(), loss), k, d.n(), d.p())
}

/// Default largest subset size: `min(n/2, p)` for least squares and
/// `min(n / log n, p)` for the other families.
pub fn default_k_max(family: Family, n: usize, p: usize) -> usize {
    let bound = match family {
        Family::Gaussian => n / 2,
        Family::Binomial | Family::Cox => (n as f64 / (n as f64).ln()).floor() as usize,
    };
    bound.min(p).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub k: usize,
    pub active_set: Vec<usize>,
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub loss: f64,
    pub criteria: CriterionValues,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-`k` fits of a sequential sweep, starting from the empty model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPath {
    pub entries: Vec<PathEntry>,
    pub best_by: BTreeMap<Criterion, usize>,
}

impl FitPath {
    fn from_entries(entries: Vec<PathEntry>) -> Self {
        let best_by = Criterion::ALL
            .iter()
            .filter_map(|&c| Self::argmin(&entries, c).map(|k| (c, k)))
            .collect();
        FitPath { entries, best_by }
    }

    /// `k` of the first entry minimizing `c`.
    fn argmin(entries: &[PathEntry], c: Criterion) -> Option<usize> {
        let mut best: Option<&PathEntry> = None;
        for e in entries {
            if best.is_none_or(|b| e.criteria.get(c) < b.criteria.get(c)) {
                best = Some(e);
            }
        }
        best.map(|e| e.k)
    }

    pub fn entry(&self, k: usize) -> Option<&PathEntry> {
        self.entries.iter().find(|e| e.k == k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    One,
    Sequential,
    #[serde(rename = "gsection")]
    GoldenSection,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::One => "one",
            Method::Sequential => "sequential",
            Method::GoldenSection => "gsection",
        }
    }
}

/// The chosen model and how it was reached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub family: Family,
    pub method: Method,
    pub criterion: Option<Criterion>,
    pub k: usize,
    pub active_set: Vec<usize>,
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub loss: f64,
    pub criteria: CriterionValues,
    /// PDAS iterations spent on the chosen `k`.
    pub iterations: usize,
    pub converged: bool,
    /// Number of PDAS runs behind the selection.
    pub pdas_runs: usize,
}

impl SelectionReport {
    /// The selected fit as a model on the standardized scale, for
    /// [`predict`](crate::family::predict).
    pub fn model(&self) -> CoefficientModel {
        CoefficientModel {
            beta: self.beta.clone(),
            intercept: self.intercept,
            active_set: self.active_set.clone(),
            converged: self.converged,
            iterations: self.iterations,
        }
    }

    fn from_output(
        family: Family,
        d: &StandardizedDataset,
        method: Method,
        criterion: Option<Criterion>,
        out: &PdasOutput,
        pdas_runs: usize,
    ) -> Self {
        let s = &out.state;
        SelectionReport {
            family,
            method,
            criterion,
            k: s.k,
            active_set: s.active_set.clone(),
            beta: s.beta.clone(),
            intercept: s.intercept,
            loss: s.loss,
            criteria: criteria_for(family, d, s.k, s.loss),
            iterations: out.iterations,
            converged: out.converged && s.fit_converged,
            pdas_runs,
        }
    }
}

/// Fits a single subset size (`method = one`).
pub fn fit_one(
    family: &ModelFamily,
    d: &StandardizedDataset,
    k: usize,
    init: &[usize],
    m_max: usize,
) -> Result<(PdasOutput, SelectionReport)> {
    let out = pdas(family, d, k, init, m_max)?;
    let report = SelectionReport::from_output(family.family, d, Method::One, None, &out, 1);
    Ok((out, report))
}

/// Initial set for size `new_k` from a previous output: its active set plus
/// the inactive coordinates of largest sacrifice. If `new_k` is smaller than
/// the previous set, that set is returned unchanged and `pdas` trims it.
pub fn warm_start_set(prev: &PdasOutput, new_k: usize) -> Vec<usize> {
    let active = &prev.state.active_set;
    if new_k <= active.len() {
        return active.clone();
    }
    let mut delta = prev.state.delta.clone();
    for &j in active {
        delta[j] = f64::NEG_INFINITY;
    }
    let mut out: Vec<usize> = active.iter().copied().chain(select_top_k(&delta, new_k - active.len())).collect();
    out.sort_unstable();
    out
}

fn empty_output(family: &ModelFamily, d: &StandardizedDataset) -> Result<PdasOutput> {
    let state = pdas_step(family, d, &[])?;
    Ok(PdasOutput { state, iterations: 0, converged: true, history: vec![Vec::new()] })
}

#[derive(Clone, Debug)]
pub struct SpdasOptions {
    pub k_max: usize,
    pub criterion: Criterion,
    /// Stop once the relative loss improvement drops below this; 0 disables.
    pub epsilon: f64,
    pub m_max: usize,
}

impl SpdasOptions {
    pub fn defaults(family: Family, n: usize, p: usize) -> Self {
        SpdasOptions {
            k_max: default_k_max(family, n, p),
            criterion: Criterion::auto(n, p),
            epsilon: 0.0,
            m_max: DEFAULT_MAX_ITER,
        }
    }
}

/// Sequential sweep `k = 1..=k_max`, each size warm-started from the
/// previous one. The path includes the empty model at `k = 0`.
pub fn spdas(family: &ModelFamily, d: &StandardizedDataset, opts: &SpdasOptions) -> Result<(FitPath, SelectionReport)> {
    let cap = feasible_cap(family.family, d.n(), d.p());
    if opts.k_max == 0 || opts.k_max > cap {
        return Err(Error::InfeasibleK { k: opts.k_max, cap });
    }
    if opts.epsilon.is_nan() || opts.epsilon < 0.0 {
        return Err(Error::InvalidArgument("epsilon must be nonnegative".into()));
    }

    let fam = family.family;
    let mut prev = empty_output(family, d)?;
    let entry_of = |out: &PdasOutput| {
        let s = &out.state;
        PathEntry {
            k: s.k,
            active_set: s.active_set.clone(),
            beta: s.beta.clone(),
            intercept: s.intercept,
            loss: s.loss,
            criteria: criteria_for(fam, d, s.k, s.loss),
            iterations: out.iterations,
            converged: out.converged && s.fit_converged,
        }
    };
    let mut entries = vec![entry_of(&prev)];
    let mut outputs = vec![prev.clone()];

    for k in 1..=opts.k_max {
        let init = warm_start_set(&prev, k);
        let out = pdas(family, d, k, &init, opts.m_max)?;
        if !out.converged {
            log::debug!("k = {k}: active set did not settle in {} iterations", out.iterations);
        }
        let prev_loss = prev.state.loss;
        let loss = out.state.loss;
        if loss > prev_loss + 1e-12 * prev_loss.abs() {
            log::debug!("loss increased from k = {} to k = {k}", k - 1);
        }
        entries.push(entry_of(&out));
        outputs.push(out.clone());
        prev = out;
        if opts.epsilon > 0.0 && (prev_loss - loss) / prev_loss.abs().max(1e-8) < opts.epsilon {
            break;
        }
    }

    let path = FitPath::from_entries(entries);
    let best_k = path.best_by[&opts.criterion];
    let report = SelectionReport::from_output(
        fam,
        d,
        Method::Sequential,
        Some(opts.criterion),
        &outputs[best_k],
        path.entries.len() - 1,
    );
    Ok((path, report))
}

/// One row of the golden-section log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenStep {
    pub iteration: usize,
    pub k_left: usize,
    pub k_split: usize,
    pub k_right: usize,
}

impl fmt::Display for GoldenStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-th iteration s.left:{} s.split:{} s.right:{}",
            self.iteration, self.k_left, self.k_split, self.k_right
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Elbow,
    IntervalCollapse,
    MaxIter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenSectionTrace {
    pub steps: Vec<GoldenStep>,
    pub terminal_k: usize,
    pub reason: Termination,
    /// Subset fits performed (at most five per iteration).
    pub solves: usize,
}

/// `round(k_left + 0.618 (k_right - k_left))`.
pub fn golden_split(k_left: usize, k_right: usize) -> usize {
    (k_left as f64 + 0.618 * (k_right - k_left) as f64).round() as usize
}

/// Golden-section search for the elbow of a loss curve over `k in 1..=k_max`.
///
/// `solve(k, warm)` fits size `k`, warm-started from the previous fit playing
/// the same role (left end, right end, split) or, for the neighbours of the
/// split, from the split itself. Each iteration:
///
/// * declares an elbow at `k_M` when `|l(k_M) - l(k_M - 1)| > eta |l(k_M)|`
///   and `|l(k_M) - l(k_M + 1)| < eta |l(k_M)| / 2`;
/// * otherwise moves the right end to `k_M` if the left half still drops
///   (`|l_M - l_L| > eta |l_M|`) but the right half is flat
///   (`|l_R - l_M| < eta |l_M|`); moves the left end to `k_M` if both halves
///   drop; and otherwise moves the right end to `k_M` and restarts the left
///   end at 1;
/// * stops once `k_L = k_R - 1`.
pub fn golden_section_search<T, F, L>(
    k_max: usize,
    eta: f64,
    m_max: usize,
    mut solve: F,
    loss_of: L,
) -> Result<(T, GoldenSectionTrace)>
where
    T: Clone,
    F: FnMut(usize, Option<&T>) -> Result<T>,
    L: Fn(&T) -> f64,
{
    if k_max < 3 {
        return Err(Error::InvalidArgument(format!("golden-section search needs k_max >= 3, got {k_max}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {eta}")));
    }
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }

    let (mut k_left, mut k_right) = (1, k_max);
    let (mut warm_left, mut warm_right, mut warm_split): (Option<T>, Option<T>, Option<T>) = (None, None, None);
    let mut steps = Vec::new();
    let mut solves = 0;

    for iteration in 1..=m_max {
        let left = solve(k_left, warm_left.as_ref())?;
        let right = solve(k_right, warm_right.as_ref())?;
        let k_split = golden_split(k_left, k_right);
        let split = solve(k_split, warm_split.as_ref())?;
        solves += 3;
        let step = GoldenStep { iteration, k_left, k_split, k_right };
        log::info!("{step}");
        steps.push(step);

        let (l_left, l_right, l_split) = (loss_of(&left), loss_of(&right), loss_of(&split));
        let threshold = eta * l_split.abs().max(1e-8);

        let below = if k_split > 1 {
            solves += 1;
            Some(loss_of(&solve(k_split - 1, Some(&split))?))
        } else {
            None
        };
        let above = if k_split < k_max {
            solves += 1;
            Some(loss_of(&solve(k_split + 1, Some(&split))?))
        } else {
            None
        };
        if let (Some(lb), Some(la)) = (below, above) {
            if (l_split - lb).abs() > threshold && (l_split - la).abs() < threshold / 2.0 {
                let trace = GoldenSectionTrace { steps, terminal_k: k_split, reason: Termination::Elbow, solves };
                return Ok((split, trace));
            }
        }

        let drop_left = (l_split - l_left).abs();
        let drop_right = (l_right - l_split).abs();
        if drop_left > threshold && threshold > drop_right {
            k_right = k_split;
            warm_right = Some(split.clone());
        } else if drop_left.min(drop_right) > threshold {
            k_left = k_split;
            warm_left = Some(split.clone());
        } else {
            k_right = k_split;
            warm_right = Some(split.clone());
            k_left = 1;
            warm_left = None;
        }
        warm_split = Some(split.clone());

        if k_left + 1 >= k_right {
            let trace = GoldenSectionTrace {
                steps,
                terminal_k: k_split,
                reason: Termination::IntervalCollapse,
                solves,
            };
            return Ok((split, trace));
        }
        if iteration == m_max {
            let trace = GoldenSectionTrace { steps, terminal_k: k_split, reason: Termination::MaxIter, solves };
            return Ok((split, trace));
        }
    }
    unreachable!("loop returns on its last iteration")
}

pub const DEFAULT_GOLDEN_MAX_ITER: usize = 30;

#[derive(Clone, Debug)]
pub struct GpdasOptions {
    pub k_max: usize,
    pub eta: f64,
    /// Golden-section iterations.
    pub m_max: usize,
    /// Iteration cap of each PDAS run.
    pub pdas_m_max: usize,
}

impl GpdasOptions {
    pub fn defaults(family: Family, n: usize, p: usize) -> Self {
        GpdasOptions {
            k_max: default_k_max(family, n, p),
            eta: 0.01,
            m_max: DEFAULT_GOLDEN_MAX_ITER,
            pdas_m_max: DEFAULT_MAX_ITER,
        }
    }
}

/// Golden-section selection of `k` with PDAS fits.
pub fn gpdas(
    family: &ModelFamily,
    d: &StandardizedDataset,
    opts: &GpdasOptions,
) -> Result<(SelectionReport, GoldenSectionTrace)> {
    let cap = feasible_cap(family.family, d.n(), d.p());
    if opts.k_max > cap {
        return Err(Error::InfeasibleK { k: opts.k_max, cap });
    }
    let solve = |k: usize, warm: Option<&PdasOutput>| {
        let init = warm.map(|w| warm_start_set(w, k)).unwrap_or_default();
        pdas(family, d, k, &init, opts.pdas_m_max)
    };
    let (out, trace) = golden_section_search(opts.k_max, opts.eta, opts.m_max, solve, |o| o.state.loss)?;
    let report = SelectionReport::from_output(family.family, d, Method::GoldenSection, None, &out, trace.solves);
    Ok((report, trace))
}
