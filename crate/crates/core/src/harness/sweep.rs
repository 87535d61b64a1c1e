//! Convergence map of the Picard iteration over `(theta, gamma, forcing kind, amplitude)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{ExperimentPlan, MemberKind};
use super::report::Check;
use crate::error::{Error, Result};
use crate::forcing::ForcingSpec;
use crate::solver::{picard_solve, Mode, SolverConfig, Verdict};
use crate::spectral::ModelParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub index: usize,
    pub theta: f64,
    pub gamma: f64,
    pub kind: String,
    pub amplitude: f64,
    /// `None` when the cell could not be run; the reason is in `error`.
    pub verdict: Option<Verdict>,
    pub iterations: usize,
    /// Last measured increment ratio.
    pub contraction: Option<f64>,
    pub xt_norm: f64,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Smallest swept amplitude that failed to converge, per `(theta, gamma, kind)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub theta: f64,
    pub gamma: f64,
    pub kind: String,
    /// `None` when every swept amplitude converged.
    pub first_failure: Option<f64>,
    pub last_converged: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub id: String,
    pub cells: Vec<SweepCell>,
    pub thresholds: Vec<Threshold>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn forcing_for(kind: MemberKind, amplitude: f64) -> Result<ForcingSpec> {
    match kind {
        MemberKind::Delta => Ok(ForcingSpec::Delta { amplitude }),
        MemberKind::DeltaDerivative => Ok(ForcingSpec::DeltaDerivative { amplitude, axis: 1 }),
        other => Err(Error::Unsupported(format!("sweep forcing {other:?}; use delta or delta_derivative"))),
    }
}

/// `N / (N + 1 - theta)`: largest `gamma` for which a derivative of a point mass is admissible.
pub fn derivative_threshold(dim: usize, theta: f64) -> f64 {
    let n = dim as f64;
    n / (n + 1.0 - theta)
}

fn run_cell(plan: &ExperimentPlan, index: usize, theta: f64, gamma: f64, kind: MemberKind, amplitude: f64) -> SweepCell {
    let mut cell = SweepCell {
        index,
        theta,
        gamma,
        kind: kind.name().to_string(),
        amplitude,
        verdict: None,
        iterations: 0,
        contraction: None,
        xt_norm: f64::NAN,
        residual: f64::NAN,
        error: None,
    };
    let outcome = (|| {
        let grid = plan.grids()?[0];
        let model = ModelParams::new(theta, gamma, plan.dim)?;
        let horizon = plan.horizons.first().copied().unwrap_or(0.5);
        let mut config = SolverConfig::new(model, plan.norms.p, horizon, plan.n_time, Mode::Forcing);
        config.max_iters = plan.max_iters;
        config.tol = plan.tol;
        let mu = forcing_for(kind, amplitude)?.build(&grid)?;
        picard_solve(&mu, &config).map(|(_, report)| report)
    })();
    match outcome {
        Ok(report) => {
            cell.verdict = Some(report.verdict);
            cell.iterations = report.iterations;
            cell.contraction = report.contraction_ratios.last().copied();
            cell.xt_norm = report.xt_norm;
            cell.residual = report.final_residual;
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

pub fn solvability_sweep(plan: &ExperimentPlan) -> Result<SweepReport> {
    plan.validate()?;
    if plan.thetas.is_empty() || plan.gammas.is_empty() || plan.amplitudes.is_empty() {
        return Err(Error::InvalidParameter("sweep needs thetas, gammas and amplitudes".into()));
    }
    let kinds = if plan.ensemble.kinds.is_empty() { vec![MemberKind::Delta] } else { plan.ensemble.kinds.clone() };
    let mut amplitudes = plan.amplitudes.clone();
    amplitudes.sort_by(f64::total_cmp);
    amplitudes.dedup();
    let mut grid = Vec::new();
    for &theta in &plan.thetas {
        for &gamma in &plan.gammas {
            for &kind in &kinds {
                for &a in &amplitudes {
                    grid.push((theta, gamma, kind, a));
                }
            }
        }
    }
    let cells: Vec<SweepCell> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(theta, gamma, kind, a))| run_cell(plan, i, theta, gamma, kind, a))
        .collect();

    let mut thresholds = Vec::new();
    for &theta in &plan.thetas {
        for &gamma in &plan.gammas {
            for &kind in &kinds {
                let column: Vec<&SweepCell> = cells
                    .iter()
                    .filter(|c| c.theta == theta && c.gamma == gamma && c.kind == kind.name() && c.error.is_none())
                    .collect();
                if column.is_empty() {
                    continue;
                }
                let first_failure = column.iter().find(|c| c.verdict != Some(Verdict::Converged)).map(|c| c.amplitude);
                let last_converged = column
                    .iter()
                    .filter(|c| c.verdict == Some(Verdict::Converged) && first_failure.is_none_or(|f| c.amplitude < f))
                    .map(|c| c.amplitude)
                    .next_back();
                thresholds.push(Threshold { theta, gamma, kind: kind.name().to_string(), first_failure, last_converged });
            }
        }
    }

    let mut checks = Vec::new();
    let zero_cells: Vec<&SweepCell> = cells.iter().filter(|c| c.amplitude == 0.0).collect();
    if !zero_cells.is_empty() {
        checks.push(Check::flag(
            "zero_amplitude_converges",
            zero_cells.iter().all(|c| c.verdict == Some(Verdict::Converged)),
        ));
    }
    for &theta in &plan.thetas {
        for &kind in &kinds {
            let mut row: Vec<&Threshold> = thresholds
                .iter()
                .filter(|t| t.theta == theta && t.kind == kind.name())
                .collect();
            if row.len() < 2 {
                continue;
            }
            row.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
            let level = |t: &Threshold| t.first_failure.unwrap_or(f64::INFINITY);
            let monotone = row.windows(2).all(|w| level(w[1]) <= level(w[0]));
            checks.push(Check::flag(&format!("threshold_nonincreasing_in_gamma theta={theta} kind={}", row[0].kind), monotone));
            let positive = row.iter().all(|t| t.last_converged.is_some_and(|a| a > 0.0) || t.first_failure.is_none());
            checks.push(Check::flag(&format!("threshold_positive theta={theta} kind={}", row[0].kind), positive));
        }
    }
    let smallest = amplitudes.iter().copied().find(|a| *a > 0.0);
    for cell in &cells {
        if cell.kind == "delta_derivative"
            && Some(cell.amplitude) == smallest
            && cell.gamma < derivative_threshold(plan.dim, cell.theta)
        {
            checks.push(Check::flag(
                &format!("derivative_small_amplitude_converges theta={} gamma={}", cell.theta, cell.gamma),
                cell.verdict == Some(Verdict::Converged),
            ));
        }
    }
    for t in thresholds.iter().filter(|t| t.kind == "delta_derivative") {
        checks.push(Check::flag(
            &format!("derivative_large_amplitude_fails theta={} gamma={}", t.theta, t.gamma),
            t.first_failure.is_some(),
        ));
    }
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    Ok(SweepReport { id: plan.id.clone(), cells, thresholds, checks, pass })
}
