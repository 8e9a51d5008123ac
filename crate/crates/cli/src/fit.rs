//! `pdas fit`.

use pdas_core::datagen::rng_for;
use pdas_core::pdas::random_init;
use pdas_core::tuning::{default_k_max, fit_one, GpdasOptions, SpdasOptions};
use pdas_core::{gpdas, load_csv, spdas, standardize, CsvOptions, Dataset, Family, ModelFamily};

use crate::report::{path_csv, FitReport};
use crate::{emit, CliError, CliResult, FitArgs, Format, InputArgs, MethodArg};

pub fn load(args: &InputArgs) -> CliResult<Dataset> {
    let mut opts = CsvOptions::new(args.family.into());
    opts.has_header = !args.no_header;
    if !args.response.is_empty() {
        opts.response = args.response.clone();
    }
    Ok(load_csv(&args.input, &opts)?)
}

fn check(args: &FitArgs) -> CliResult<()> {
    if args.method == MethodArg::One && args.k.is_none() {
        return Err(CliError::config("--method one needs -k"));
    }
    if !(args.eta > 0.0 && args.eta < 1.0) {
        return Err(CliError::config(format!("--eta must lie in (0, 1), got {}", args.eta)));
    }
    if args.epsilon.is_nan() || args.epsilon < 0.0 {
        return Err(CliError::config(format!("--epsilon must be nonnegative, got {}", args.epsilon)));
    }
    if args.m_max == 0 {
        return Err(CliError::config("--m-max must be at least 1"));
    }
    if args.path_output.is_some() && args.method != MethodArg::Sequential {
        return Err(CliError::config("--path-output needs --method sequential"));
    }
    Ok(())
}

/// Runs the fit and renders the report without writing anything.
pub fn fit_report(args: &FitArgs) -> CliResult<FitReport> {
    check(args)?;
    let data = load(&args.input)?;
    let d = standardize(&data)?;
    let family: Family = args.input.family.into();
    let mut model = ModelFamily::new(family);
    model.diagonal_hessian = args.diagonal_hessian;
    let (n, p) = (d.n(), d.p());
    let k_max = args.k_max.unwrap_or_else(|| default_k_max(family, n, p));

    let report = match args.method {
        MethodArg::One => {
            let k = args.k.expect("checked");
            let init = if args.random_init {
                random_init(p, k.min(p), &mut rng_for(args.seed, 0))
            } else {
                Vec::new()
            };
            let (_, sel) = fit_one(&model, &d, k, &init, args.m_max)?;
            FitReport::new(&d, &sel, args.dense)
        }
        MethodArg::Sequential => {
            let opts = SpdasOptions {
                k_max,
                criterion: args.criterion.resolve(n, p),
                epsilon: args.epsilon,
                m_max: args.m_max,
            };
            let (path, sel) = spdas(&model, &d, &opts)?;
            FitReport::new(&d, &sel, args.dense).with_path(&d, &path)
        }
        MethodArg::Gsection => {
            let opts = GpdasOptions { k_max, eta: args.eta, pdas_m_max: args.m_max, ..GpdasOptions::defaults(family, n, p) };
            let (sel, trace) = gpdas(&model, &d, &opts)?;
            for step in &trace.steps {
                eprintln!("{step}");
            }
            FitReport::new(&d, &sel, args.dense).with_trace(trace)
        }
    };
    Ok(report)
}

pub fn run(args: &FitArgs) -> CliResult<()> {
    let report = fit_report(args)?;
    let body = match args.format {
        Format::Json => report.to_json()?.into_bytes(),
        Format::Csv => report.to_csv()?,
    };
    if let (Some(path), Some(rows)) = (&args.path_output, &report.path) {
        emit(Some(path), &path_csv(rows)?)?;
    }
    emit(args.output.as_deref(), &body)
}
