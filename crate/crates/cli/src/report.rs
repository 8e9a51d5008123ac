//! Serializable reports. Coefficients are on the original scale of the
//! input; columns are 1-based to match the `X1..Xp` default names.

use pdas_core::tuning::{FitPath, GoldenSectionTrace, PathEntry};
use pdas_core::{CriterionValues, Family, Method, SelectionReport, StandardizedDataset};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub column: usize,
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub k: usize,
    pub loss: f64,
    pub loglik: f64,
    pub deviance: f64,
    pub aic: f64,
    pub bic: f64,
    pub ebic: f64,
    pub iterations: usize,
    pub converged: bool,
    pub active: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<pdas_core::Criterion>,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub active: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<Coefficient>,
    pub loss: f64,
    pub loglik: f64,
    pub deviance: f64,
    pub aic: f64,
    pub bic: f64,
    pub ebic: f64,
    pub iterations: usize,
    pub converged: bool,
    pub pdas_runs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<PathRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<GoldenSectionTrace>,
}

fn names(d: &StandardizedDataset, set: &[usize]) -> Vec<String> {
    set.iter().map(|&j| d.dataset().column_name(j)).collect()
}

fn path_row(d: &StandardizedDataset, e: &PathEntry) -> PathRow {
    PathRow {
        k: e.k,
        loss: e.loss,
        loglik: e.criteria.loglik,
        deviance: e.criteria.deviance,
        aic: e.criteria.aic,
        bic: e.criteria.bic,
        ebic: e.criteria.ebic,
        iterations: e.iterations,
        converged: e.converged,
        active: names(d, &e.active_set),
    }
}

impl FitReport {
    pub fn new(d: &StandardizedDataset, sel: &SelectionReport, dense: bool) -> Self {
        let (intercept, beta) = d.destandardize(&sel.beta, sel.intercept);
        let coefficients = beta
            .iter()
            .enumerate()
            .filter(|(j, _)| dense || sel.active_set.contains(j))
            .map(|(j, &value)| Coefficient { column: j + 1, name: d.dataset().column_name(j), value })
            .collect();
        let CriterionValues { loglik, deviance, aic, bic, ebic, .. } = sel.criteria;
        FitReport {
            family: sel.family,
            method: sel.method,
            criterion: sel.criterion,
            n: d.n(),
            p: d.p(),
            k: sel.k,
            active: names(d, &sel.active_set),
            intercept,
            coefficients,
            loss: sel.loss,
            loglik,
            deviance,
            aic,
            bic,
            ebic,
            iterations: sel.iterations,
            converged: sel.converged,
            pdas_runs: sel.pdas_runs,
            path: None,
            trace: None,
        }
    }

    pub fn with_path(mut self, d: &StandardizedDataset, path: &FitPath) -> Self {
        self.path = Some(path.entries.iter().map(|e| path_row(d, e)).collect());
        self
    }

    pub fn with_trace(mut self, trace: GoldenSectionTrace) -> Self {
        self.trace = Some(trace);
        self
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Coefficient table with the intercept as the first row.
    pub fn to_csv(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["column", "name", "value"])?;
        w.write_record(["0", "(Intercept)", &self.intercept.to_string()])?;
        for c in &self.coefficients {
            w.write_record([c.column.to_string(), c.name.clone(), c.value.to_string()])?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}

pub fn path_csv(rows: &[PathRow]) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "loss", "loglik", "deviance", "aic", "bic", "ebic", "iterations", "converged", "active"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.loss.to_string(),
            r.loglik.to_string(),
            r.deviance.to_string(),
            r.aic.to_string(),
            r.bic.to_string(),
            r.ebic.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.active.join(" "),
        ])?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}
