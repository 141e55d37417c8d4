use betamix::validation::{
    assumption1_report, consistency_experiment, contamination_experiment, lemma_inequality_suite, ConsistencyPlan,
    ExperimentReport,
};
use betamix::{
    em_mle_fit, flag_anomalies, load_csv, multi_start_fit, ConstraintSpec, Dataset, EmConfig, EstimatorConfig,
    FitResult, ModelParams, SymMatrix,
};
use log::{info, warn};
use serde::Serialize;

use crate::args::{AssumptionArgs, Cli, Command, ConsistencyArgs, FitArgs, SuiteArgs};
use crate::contaminate::inject_contamination;
use crate::error::CliError;
use crate::report::{emit, labels_csv, to_json, write_file, FitReport, RunConfig};

/// Margin used when checking the weight bound on fitted weights.
const K0_LIMIT: f64 = 1e-12;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(args) => fit(&args),
        Command::FitMle(args) => fit_mle(&args),
        Command::CheckAssumption(args) => check_assumption(&args),
        Command::Consistency(args) => consistency(&args),
        Command::Contaminate(args) => contaminate(&args),
        Command::InequalitySuite(args) => inequality_suite(&args),
    }
}

/// Loads the input, appends contaminants if requested and echoes the result.
fn prepare(args: &FitArgs) -> Result<(Dataset, ConstraintSpec), CliError> {
    let mut data = load_csv(&args.input)?;
    if let Some(which) = &args.contaminate {
        data = inject_contamination(&data, which)?;
    }
    if let Some(path) = &args.echo_data {
        write_file(path, &data.to_csv())?;
    }
    let spec = args.constraints.resolve(&data)?;
    info!("data {} (n={}, p={}); constraints c={:e} c1={:e}", data.source(), data.n(), data.p(), spec.c, spec.c1);
    Ok((data, spec))
}

fn estimator_config(args: &FitArgs, spec: &ConstraintSpec) -> EstimatorConfig {
    let mut config = EstimatorConfig::new(args.k, args.beta, spec.clone());
    config.max_outer_iters = args.max_iter;
    config.outer_tol = args.tol;
    config.n_starts = args.starts;
    config.seed = args.seed;
    config.init_mode = args.init.into();
    config.nested_starts = args.nested_starts;
    config
}

fn em_config(args: &FitArgs, spec: &ConstraintSpec) -> EmConfig {
    let mut em = EmConfig::new(args.k, spec.clone());
    em.seed = args.seed;
    em.max_iters = args.max_iter;
    em.tol = args.tol;
    em.n_starts = args.starts;
    em.init_mode = args.init.into();
    em
}

fn finish(
    args: &FitArgs,
    data: &Dataset,
    mut fit: FitResult,
    report: impl FnOnce(&FitResult) -> Result<FitReport, CliError>,
) -> Result<(), CliError> {
    if args.alpha > 0.0 {
        fit.anomaly_flags = Some(flag_anomalies(data, &fit, args.alpha)?);
    }
    if !fit.converged {
        warn!("stopped after {} iterations without meeting the tolerance", fit.iterations);
    }
    if let Some(path) = &args.labels {
        write_file(path, &labels_csv(&fit))?;
    }
    emit(args.output.as_ref(), &to_json(&report(&fit)?))
}

fn fit(args: &FitArgs) -> Result<(), CliError> {
    let (data, spec) = prepare(args)?;
    let fit = multi_start_fit(&data, &estimator_config(args, &spec))?;
    info!("objective {:.12} after {} iterations (start {})", fit.final_objective(), fit.iterations, fit.start_index);
    let assumption = assumption1_report(&fit.params.weights, args.beta, data.p(), K0_LIMIT)?;
    let config = RunConfig::new("fit", args, &spec, Some(args.beta));
    finish(args, &data, fit, |f| FitReport::new("mple", config, &data, f, &spec, Some(assumption)))
}

fn fit_mle(args: &FitArgs) -> Result<(), CliError> {
    let (data, spec) = prepare(args)?;
    let fit = em_mle_fit(&data, &em_config(args, &spec))?;
    info!("mean log-likelihood {:.12} after {} iterations", fit.final_objective(), fit.iterations);
    let config = RunConfig::new("fit-mle", args, &spec, None);
    finish(args, &data, fit, |f| FitReport::new("mle", config, &data, f, &spec, None))
}

#[derive(Debug, Serialize)]
struct ContaminationOutput {
    config: RunConfig,
    report: ExperimentReport,
    robust_more_stable: bool,
}

fn contaminate(args: &FitArgs) -> Result<(), CliError> {
    let which = args
        .contaminate
        .as_ref()
        .ok_or_else(|| CliError::Usage("contaminate needs --contaminate thyroid|file:PATH".into()))?;
    let clean = load_csv(&args.input)?;
    let rows = which.rows(clean.p())?;
    let spec = args.constraints.resolve(&clean)?;
    info!("data {} plus {} rows; constraints c={:e} c1={:e}", clean.source(), rows.len(), spec.c, spec.c1);
    let report =
        contamination_experiment(&clean, &rows, args.beta, &estimator_config(args, &spec), &em_config(args, &spec))?;
    let out = ContaminationOutput {
        config: RunConfig::new("contaminate", args, &spec, Some(args.beta)),
        robust_more_stable: report.robust_is_more_stable(),
        report,
    };
    emit(args.output.as_ref(), &to_json(&out))
}

fn check_assumption(args: &AssumptionArgs) -> Result<(), CliError> {
    let report = assumption1_report(&args.weights, args.beta, args.p, args.k0)?;
    emit(args.output.as_ref(), &to_json(&report))
}

/// Weights (0.6, 0.4), means -2 and 2, unit variances.
pub fn default_consistency_truth() -> ModelParams {
    ModelParams::new(vec![0.6, 0.4], vec![vec![-2.0], vec![2.0]], vec![SymMatrix::identity(1); 2])
        .expect("valid mixture")
}

fn consistency(args: &ConsistencyArgs) -> Result<(), CliError> {
    let truth = match &args.truth {
        Some(path) => {
            let bad = |message: String| CliError::Truth { path: path.display().to_string(), message };
            let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
            let truth: ModelParams = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            truth.validate().map_err(|e| bad(e.to_string()))?;
            truth
        }
        None => default_consistency_truth(),
    };
    let spec = ConstraintSpec::new(args.c, args.c1).map_err(|e| CliError::Usage(e.to_string()))?;
    info!("constraints c={:e} c1={:e}", spec.c, spec.c1);
    let mut config = EstimatorConfig::new(truth.k(), args.beta, spec);
    config.n_starts = args.starts;
    let mut grid = args.n_grid.clone();
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("--n-grid must be non-empty and strictly increasing".into()));
    }
    grid.dedup();
    let mut plan = ConsistencyPlan::new(grid, (1..=args.seeds).collect());
    plan.reference_n = args.reference_n;
    let table = consistency_experiment(&truth, args.beta, &plan, &config)?;
    emit(args.output.as_ref(), &to_json(&table))
}

fn inequality_suite(args: &SuiteArgs) -> Result<(), CliError> {
    let report = lemma_inequality_suite(args.trials, args.seed)?;
    if report.total_violations() > 0 {
        warn!("{} inequality violations", report.total_violations());
    }
    emit(args.output.as_ref(), &to_json(&report))
}
