//! `pdas gen`: a dataset CSV plus a JSON sidecar with the ground truth.

use std::path::PathBuf;

use pdas_core::datagen::{generate, GenConfig};
use pdas_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::{emit, CliError, CliResult, GenArgs};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub config: GenConfig,
    pub beta: Vec<f64>,
    /// 0-based indices of the nonzero coefficients.
    pub support: Vec<usize>,
    pub support_names: Vec<String>,
}

pub fn config(args: &GenArgs) -> GenConfig {
    let mut cfg = args.design.config(args.family.into(), args.n, args.p, args.q, args.seed);
    if let Some(beta) = &args.beta {
        cfg.beta = Some(beta.clone());
        cfg.q = beta.iter().filter(|b| **b != 0.0).count();
    }
    cfg
}

fn csv_bytes(d: &Dataset, header: bool) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    if header {
        d.write_csv_to(&mut buf)
    } else {
        let unnamed = Dataset::new(d.x().clone(), d.response().clone())?;
        unnamed.write_csv_to(&mut buf)
    }
    .map_err(|e| CliError::new("io", e.to_string()))?;
    Ok(buf)
}

pub fn run(args: &GenArgs) -> CliResult<()> {
    let cfg = config(args);
    let g = generate(&cfg)?;
    let names: Vec<String> = (0..cfg.p).map(|j| format!("X{}", j + 1)).collect();
    let response_names = g.dataset.response_names().to_vec();
    let data = Dataset::with_names(g.dataset.x().clone(), g.dataset.response().clone(), Some(names), response_names)?;
    let truth = Truth {
        support_names: g.support.iter().map(|&j| data.column_name(j)).collect(),
        config: cfg,
        beta: g.beta_star,
        support: g.support,
    };
    let truth_path = args.truth.clone().unwrap_or_else(|| {
        let mut p = PathBuf::from(&args.output);
        p.set_extension("json");
        p
    });
    if truth_path == args.output {
        return Err(CliError::config("--truth must differ from --output"));
    }
    let mut json = serde_json::to_string_pretty(&truth)?;
    json.push('\n');
    emit(Some(&args.output), &csv_bytes(&data, !args.no_header)?)?;
    emit(Some(&truth_path), json.as_bytes())
}
