//! `pdas bench`: replicated simulations summarised as mean(sd) per method.
//!
//! Replication `r` draws its training set, then its held-out set, from RNG
//! stream `r` of `--seed`, so results do not depend on scheduling and the
//! serial and parallel runs agree exactly (apart from wall-clock columns).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use pdas_core::datagen::{generate_with, rng_for, sample_dataset, GenConfig};
use pdas_core::family::{fit_active, predict};
use pdas_core::metrics::{accuracy, concordance_index, relative_mse, tp_fp};
use pdas_core::oracle::{exhaustive_best_subset, OracleOptions};
use pdas_core::tuning::{default_k_max, fit_one, GpdasOptions, SpdasOptions};
use pdas_core::{
    gpdas, spdas, standardize, CoefficientModel, Dataset, Family, ModelFamily, Response, StandardizedDataset,
};
use rayon::prelude::*;

use crate::{emit, BenchArgs, BenchMethod, CliError, CliResult};

/// One method on one replication.
#[derive(Clone, Debug, PartialEq)]
pub struct RepRow {
    pub rep: usize,
    pub method: BenchMethod,
    pub k: usize,
    pub seconds: f64,
    /// Relative MSE, accuracy or concordance, by family.
    pub metric: f64,
    pub tp: usize,
    pub fp: usize,
    pub loss: f64,
    /// Exhaustive-search loss at this row's `k`, when the oracle is enabled.
    pub oracle_loss: Option<f64>,
    pub converged: bool,
}

pub fn metric_name(family: Family) -> &'static str {
    match family {
        Family::Gaussian => "MSE",
        Family::Binomial => "Accuracy",
        Family::Cox => "C-index",
    }
}

struct Fitted {
    k: usize,
    model: CoefficientModel,
    loss: f64,
    converged: bool,
}

fn held_out_metric(
    fam: &ModelFamily,
    d: &StandardizedDataset,
    m: &CoefficientModel,
    test: &Dataset,
    beta_star: &[f64],
) -> CliResult<f64> {
    Ok(match test.response() {
        Response::Continuous(_) => {
            let (_, beta) = d.destandardize(&m.beta, m.intercept);
            relative_mse(test.x(), &beta, beta_star)?
        }
        Response::Binary(y) => accuracy(&predict(fam, m, test.x(), d)?, y, 0.5)?,
        Response::Survival { time, status } => concordance_index(&predict(fam, m, test.x(), d)?, time, status)?,
    })
}

fn fit_method(method: BenchMethod, fam: &ModelFamily, d: &StandardizedDataset, args: &BenchArgs, parallel: bool) -> CliResult<Fitted> {
    let family = fam.family;
    let (n, p) = (d.n(), d.p());
    let k_max = args.k_max.unwrap_or_else(|| default_k_max(family, n, p));
    let sel = match method {
        BenchMethod::One => fit_one(fam, d, args.q.max(1), &[], pdas_core::pdas::DEFAULT_MAX_ITER)?.1,
        BenchMethod::Spdas => {
            let opts = SpdasOptions {
                k_max,
                criterion: args.criterion.resolve(n, p),
                epsilon: args.epsilon,
                ..SpdasOptions::defaults(family, n, p)
            };
            spdas(fam, d, &opts)?.1
        }
        BenchMethod::Gpdas => {
            let opts = GpdasOptions { k_max, eta: args.eta, ..GpdasOptions::defaults(family, n, p) };
            gpdas(fam, d, &opts)?.0
        }
        BenchMethod::Oracle => {
            let opts = OracleOptions { parallel, ..OracleOptions::default() };
            let best = exhaustive_best_subset(fam, d, args.q, opts)?;
            let model = fit_active(fam, d, &best.active_set)?;
            return Ok(Fitted { k: args.q, loss: best.loss, converged: model.converged, model });
        }
    };
    Ok(Fitted { k: sel.k, model: sel.model(), loss: sel.loss, converged: sel.converged })
}

fn run_rep(args: &BenchArgs, cfg: &GenConfig, methods: &[BenchMethod], rep: usize, parallel: bool) -> CliResult<Vec<RepRow>> {
    let mut rng = rng_for(cfg.seed, rep as u64);
    let g = generate_with(cfg, &mut rng)?;
    let test = sample_dataset(cfg, &g.beta_star, args.test_n, &mut rng)?;
    let d = standardize(&g.dataset)?;
    let fam = ModelFamily::new(cfg.family);
    let with_oracle = methods.contains(&BenchMethod::Oracle);
    let mut oracle_at: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let fitted = fit_method(method, &fam, &d, args, parallel)?;
        let seconds = start.elapsed().as_secs_f64();
        let metric = held_out_metric(&fam, &d, &fitted.model, &test, &g.beta_star)?;
        let score = tp_fp(&fitted.model.active_set, &g.support);
        let oracle_loss = if !with_oracle {
            None
        } else if method == BenchMethod::Oracle {
            Some(fitted.loss)
        } else if let Some(&l) = oracle_at.get(&fitted.k) {
            Some(l)
        } else {
            let opts = OracleOptions { parallel, ..OracleOptions::default() };
            let best = exhaustive_best_subset(&fam, &d, fitted.k, opts)?;
            oracle_at.insert(fitted.k, best.loss);
            Some(best.loss)
        };
        rows.push(RepRow {
            rep,
            method,
            k: fitted.k,
            seconds,
            metric,
            tp: score.tp,
            fp: score.fp,
            loss: fitted.loss,
            oracle_loss,
            converged: fitted.converged,
        });
    }
    Ok(rows)
}

fn check(args: &BenchArgs) -> CliResult<Vec<BenchMethod>> {
    if args.reps == 0 {
        return Err(CliError::config("--reps must be at least 1"));
    }
    if args.test_n < 2 {
        return Err(CliError::config("--test-n must be at least 2"));
    }
    if !(args.eta > 0.0 && args.eta < 1.0) {
        return Err(CliError::config(format!("--eta must lie in (0, 1), got {}", args.eta)));
    }
    let mut methods = Vec::new();
    for &m in &args.methods {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(CliError::config("no methods given"));
    }
    Ok(methods)
}

/// All replication rows, ordered by replication then method.
pub fn replicate(args: &BenchArgs) -> CliResult<Vec<RepRow>> {
    let methods = check(args)?;
    let cfg = args.design.config(args.family.into(), args.n, args.p, args.q, args.seed);
    cfg.validate()?;
    let parallel = !args.serial;
    let per_rep: Vec<Vec<RepRow>> = if parallel {
        (0..args.reps).into_par_iter().map(|r| run_rep(args, &cfg, &methods, r, true)).collect::<CliResult<_>>()?
    } else {
        (0..args.reps).map(|r| run_rep(args, &cfg, &methods, r, false)).collect::<CliResult<_>>()?
    };
    Ok(per_rep.into_iter().flatten().collect())
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn cell(values: &[f64], decimals: usize) -> String {
    let (m, s) = mean_sd(values);
    format!("{m:.decimals$}({s:.decimals$})")
}

/// The summary table: one row per method with mean(sd) of model size,
/// time, the family's prediction metric, TP and FP.
pub fn summary_csv(family: Family, rows: &[RepRow], omit_time: bool) -> String {
    let mut out = String::new();
    let metric = metric_name(family);
    if omit_time {
        let _ = writeln!(out, "method,MS,{metric},TP,FP");
    } else {
        let _ = writeln!(out, "method,MS,Time,{metric},TP,FP");
    }
    let mut methods: Vec<BenchMethod> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    for m in methods {
        let sel: Vec<&RepRow> = rows.iter().filter(|r| r.method == m).collect();
        let col = |f: &dyn Fn(&RepRow) -> f64| sel.iter().map(|r| f(r)).collect::<Vec<f64>>();
        let ms = cell(&col(&|r| r.k as f64), 2);
        let time = cell(&col(&|r| r.seconds), 2);
        let met = cell(&col(&|r| r.metric), 4);
        let tp = cell(&col(&|r| r.tp as f64), 2);
        let fp = cell(&col(&|r| r.fp as f64), 2);
        if omit_time {
            let _ = writeln!(out, "{},{ms},{met},{tp},{fp}", m.name());
        } else {
            let _ = writeln!(out, "{},{ms},{time},{met},{tp},{fp}", m.name());
        }
    }
    out
}

pub fn replications_csv(rows: &[RepRow], omit_time: bool) -> String {
    let mut out = String::new();
    out.push_str(if omit_time {
        "rep,method,k,metric,tp,fp,loss,oracle_loss,converged\n"
    } else {
        "rep,method,k,seconds,metric,tp,fp,loss,oracle_loss,converged\n"
    });
    for r in rows {
        let oracle = r.oracle_loss.map(|l| l.to_string()).unwrap_or_default();
        let time = if omit_time { String::new() } else { format!("{},", r.seconds) };
        let _ = writeln!(
            out,
            "{},{},{},{time}{},{},{},{},{oracle},{}",
            r.rep,
            r.method.name(),
            r.k,
            r.metric,
            r.tp,
            r.fp,
            r.loss,
            r.converged
        );
    }
    out
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    let rows = replicate(args)?;
    if let Some(path) = &args.replications {
        emit(Some(path), replications_csv(&rows, args.omit_time).as_bytes())?;
    }
    emit(args.output.as_deref(), summary_csv(args.family.into(), &rows, args.omit_time).as_bytes())
}
