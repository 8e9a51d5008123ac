//! `pdas oracle`: exhaustive best subset of one size.

use pdas_core::family::{fit_active, log_likelihood};
use pdas_core::oracle::{exhaustive_best_subset, OracleOptions};
use pdas_core::{criteria, standardize, CriterionValues, Family, ModelFamily};
use serde::{Deserialize, Serialize};

use crate::fit::load;
use crate::report::Coefficient;
use crate::{emit, CliResult, OracleArgs};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub active: Vec<String>,
    pub intercept: f64,
    pub coefficients: Vec<Coefficient>,
    pub loss: f64,
    pub criteria: CriterionValues,
    pub subsets: usize,
}

pub fn oracle_report(args: &OracleArgs) -> CliResult<OracleReport> {
    let d = standardize(&load(&args.input)?)?;
    let family: Family = args.input.family.into();
    let fam = ModelFamily::new(family);
    let opts = OracleOptions { p_cap: args.p_cap, parallel: !args.serial };
    let best = exhaustive_best_subset(&fam, &d, args.k, opts)?;
    let model = fit_active(&fam, &d, &best.active_set)?;
    let (intercept, beta) = d.destandardize(&model.beta, model.intercept);
    let coefficients = best
        .active_set
        .iter()
        .map(|&j| Coefficient { column: j + 1, name: d.dataset().column_name(j), value: beta[j] })
        .collect();
    let loglik = log_likelihood(family, d.n(), best.loss);
    Ok(OracleReport {
        family,
        n: d.n(),
        p: d.p(),
        k: args.k,
        active: best.active_set.iter().map(|&j| d.dataset().column_name(j)).collect(),
        intercept,
        coefficients,
        loss: best.loss,
        criteria: criteria(loglik, args.k, d.n(), d.p()),
        subsets: best.subsets,
    })
}

pub fn run(args: &OracleArgs) -> CliResult<()> {
    let report = oracle_report(args)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    emit(args.output.as_deref(), json.as_bytes())
}
