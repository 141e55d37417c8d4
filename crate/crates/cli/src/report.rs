//! Report objects written as JSON, plus the optional label CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use betamix::validation::Assumption1Report;
use betamix::{check_constraints, mixture_pdf, ConstraintSpec, Dataset, FitResult, ModelParams};
use serde::Serialize;

use crate::args::{FitArgs, InitArg};
use crate::error::CliError;

/// Number of grid points in the univariate density curve.
pub const CURVE_POINTS: usize = 512;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub input: String,
    pub k: usize,
    pub beta: Option<f64>,
    pub c: f64,
    pub c1: f64,
    pub c1_mode: &'static str,
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub alpha: f64,
    pub contaminate: Option<String>,
    pub init: InitArg,
    pub nested_starts: bool,
}

impl RunConfig {
    pub fn new(subcommand: &str, args: &FitArgs, spec: &ConstraintSpec, beta: Option<f64>) -> Self {
        Self {
            subcommand: subcommand.into(),
            input: args.input.display().to_string(),
            k: args.k,
            beta,
            c: spec.c,
            c1: spec.c1,
            c1_mode: if args.constraints.c1.is_some() && !args.constraints.c1_scaled { "absolute" } else { "scaled" },
            starts: args.starts,
            seed: args.seed,
            max_iter: args.max_iter,
            tol: args.tol,
            alpha: args.alpha,
            contaminate: args.contaminate.as_ref().map(|c| c.label()),
            init: args.init,
            nested_starts: args.nested_starts,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub source: String,
    pub n: usize,
    pub p: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FittedParams {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Row-major `p x p` per component.
    pub covariances: Vec<Vec<f64>>,
}

impl From<&ModelParams> for FittedParams {
    fn from(m: &ModelParams) -> Self {
        Self {
            weights: m.weights.clone(),
            means: m.means.clone(),
            covariances: m.covariances.iter().map(|c| c.as_slice().to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintSummary {
    pub max_eigenvalue: f64,
    pub min_eigenvalue: f64,
    pub ratio: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub method: &'static str,
    pub config: RunConfig,
    pub data: DataSummary,
    pub params: FittedParams,
    pub final_objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub start_index: usize,
    /// One-based component labels.
    pub labels: Vec<usize>,
    pub objective_trace: Vec<f64>,
    pub constraint_summary: ConstraintSummary,
    pub anomaly_flags: Option<Vec<bool>>,
    /// Weight bound evaluated at the fitted weights (the true ones are unknown).
    pub assumption: Option<Assumption1Report>,
    pub density_curve: Option<DensityCurve>,
    /// Reserved for externally computed curves; always empty here.
    pub overlays: Vec<DensityCurve>,
}

impl FitReport {
    pub fn new(
        method: &'static str,
        config: RunConfig,
        data: &Dataset,
        fit: &FitResult,
        spec: &ConstraintSpec,
        assumption: Option<Assumption1Report>,
    ) -> Result<Self, CliError> {
        let check = check_constraints(&fit.params.covariances, spec)?;
        let density_curve = if data.p() == 1 { Some(density_curve(data, &fit.params)?) } else { None };
        Ok(Self {
            method,
            config,
            data: DataSummary { source: data.source().into(), n: data.n(), p: data.p() },
            params: (&fit.params).into(),
            final_objective: fit.final_objective(),
            converged: fit.converged,
            iterations: fit.iterations,
            start_index: fit.start_index,
            labels: fit.labels.labels.iter().map(|l| l + 1).collect(),
            objective_trace: fit.objective_trace.clone(),
            constraint_summary: ConstraintSummary {
                max_eigenvalue: check.summary.max,
                min_eigenvalue: check.summary.min,
                ratio: check.summary.max / check.summary.min,
                feasible: check.feasible,
            },
            anomaly_flags: fit.anomaly_flags.clone(),
            assumption,
            density_curve,
            overlays: Vec::new(),
        })
    }
}

/// Fitted mixture density on equispaced points spanning the data range plus 10% on each side.
pub fn density_curve(data: &Dataset, params: &ModelParams) -> Result<DensityCurve, CliError> {
    let (lo, hi) = data.bounds()[0];
    let range = (hi - lo).max(1e-9 * lo.abs().max(1.0));
    let (start, end) = (lo - 0.1 * range, hi + 0.1 * range);
    let step = (end - start) / (CURVE_POINTS - 1) as f64;
    let x: Vec<f64> = (0..CURVE_POINTS).map(|i| start + i as f64 * step).collect();
    let density = x.iter().map(|v| mixture_pdf(&[*v], params)).collect::<betamix::Result<Vec<_>>>()?;
    Ok(DensityCurve { x, density })
}

/// Row index (one-based), label (one-based) and anomaly flag per row.
pub fn labels_csv(fit: &FitResult) -> String {
    let mut out = String::from("row,label,anomaly\n");
    for (i, l) in fit.labels.labels.iter().enumerate() {
        let flag = fit.anomaly_flags.as_ref().is_some_and(|f| f[i]);
        let _ = writeln!(out, "{},{},{}", i + 1, l + 1, u8::from(flag));
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Write { path: path.display().to_string(), message: e.to_string() })
}
