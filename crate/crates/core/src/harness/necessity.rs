//! Closing the loop `I[mu] = u - J[u]`: the forcing is recovered from a converged solution
//! and its `B^{-theta}_{(p,inf),inf}` norm compared with the norm of the known input.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::ExperimentPlan;
use super::recovery::recovery_lhs;
use super::report::Check;
use crate::besov::build_partition;
use crate::error::{Error, Result};
use crate::lorentz::{uniformly_local_lorentz_norm, NormSpec};
use crate::solver::{nonlinear_part_j, picard_solve, Mode, SolverConfig, SpaceTimeField, Verdict};
use crate::spectral::{duhamel_factor, symbol, ModelParams, SpectralField};

/// Relative least-squares defect above which a reconstruction is rejected.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;
/// Allowed relative gap between the recovered and the direct norm.
pub const NORM_TOLERANCE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub mu: SpectralField,
    /// `||v - d mu||_2 / ||v||_2` over all slices and modes, `v = u - J[u]`.
    pub defect: f64,
    /// `sup_n ||v(t_n) | L^{p,inf}_ul||`.
    pub rhs: f64,
}

/// Least-squares fit of `(u - J[u])^(t_n, k) = d_k(t_n) mu^(k)` for every mode.
pub fn reconstruct_forcing(u: &SpaceTimeField, config: &SolverConfig) -> Result<Reconstruction> {
    if config.mode != Mode::Forcing {
        return Err(Error::InvalidParameter("forcing reconstruction needs mode = forcing".into()));
    }
    let v = u.sub(&nonlinear_part_j(u, config)?)?;
    let grid = *u.grid();
    let theta = config.model.theta;
    let weights: Vec<Vec<f64>> = grid
        .xi_norms()
        .into_iter()
        .map(|r| {
            let lam = symbol(r, theta);
            v.times.iter().map(|&t| duhamel_factor(lam, t)).collect()
        })
        .collect();
    let coeffs: Vec<num_complex::Complex64> = (0..grid.len())
        .map(|k| {
            let d = &weights[k];
            let num: num_complex::Complex64 = v.slices.iter().zip(d).map(|(s, w)| s.coeffs()[k] * *w).sum();
            let den: f64 = d.iter().map(|w| w * w).sum();
            if den > 0.0 {
                num / den
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let (mut miss, mut total) = (0.0, 0.0);
    for (n, slice) in v.slices.iter().enumerate() {
        for (k, c) in slice.coeffs().iter().enumerate() {
            miss += (c - coeffs[k] * weights[k][n]).norm_sqr();
            total += c.norm_sqr();
        }
    }
    let defect = if total > 0.0 { (miss / total).sqrt() } else { 0.0 };
    let spec = NormSpec::weak(config.p)?;
    let rhs = v
        .slices
        .par_iter()
        .map(|s| uniformly_local_lorentz_norm(&s.to_physical()?, &spec, &config.lattice))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(Reconstruction { mu: SpectralField::new(grid, coeffs)?.symmetrized(), defect, rhs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityRow {
    pub member: usize,
    pub kind: String,
    pub amplitude: f64,
    pub verdict: Verdict,
    pub direct: f64,
    pub recovered: Option<f64>,
    pub relative_error: Option<f64>,
    pub defect: Option<f64>,
    pub consistent: bool,
    /// Recovered left side over `sup_t ||u - J[u]||`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub id: String,
    pub rows: Vec<NecessityRow>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn solver_config_for(plan: &ExperimentPlan) -> Result<SolverConfig> {
    let theta = plan.thetas.first().copied().unwrap_or(2.0);
    let gamma = plan.gammas.first().copied().unwrap_or(2.0);
    let horizon = plan.horizons.first().copied().unwrap_or(0.5);
    let mut config = SolverConfig::new(ModelParams::new(theta, gamma, plan.dim)?, plan.norms.p, horizon, plan.n_time, Mode::Forcing);
    config.max_iters = plan.max_iters;
    config.tol = plan.tol;
    config.validate()?;
    Ok(config)
}

pub fn verify_necessity(plan: &ExperimentPlan) -> Result<NecessityReport> {
    plan.validate()?;
    let config = solver_config_for(plan)?;
    let grid = *plan.grids()?.last().expect("validated ladder");
    let part = build_partition(&grid)?;
    let members = plan.members();
    let theta = config.model.theta;
    let rows = members
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let mu = spec.build(&grid)?;
            let direct = recovery_lhs(&mu, theta, config.p, &part)?;
            let (u, report) = picard_solve(&mu, &config)?;
            let mut row = NecessityRow {
                member: i,
                kind: spec.kind_name().to_string(),
                amplitude: spec.amplitude(),
                verdict: report.verdict,
                direct,
                recovered: None,
                relative_error: None,
                defect: None,
                consistent: false,
                ratio: None,
            };
            if report.verdict != Verdict::Converged {
                return Ok(row);
            }
            let rec = reconstruct_forcing(&u, &config)?;
            row.defect = Some(rec.defect);
            row.consistent = rec.defect <= CONSISTENCY_TOLERANCE;
            if row.consistent {
                let recovered = recovery_lhs(&rec.mu, theta, config.p, &part)?;
                row.recovered = Some(recovered);
                row.relative_error = Some(if direct > 0.0 { (recovered / direct - 1.0).abs() } else { recovered });
                row.ratio = (rec.rhs > 0.0).then(|| recovered / rec.rhs);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let used: Vec<&NecessityRow> = rows.iter().filter(|r| r.verdict == Verdict::Converged).collect();
    let worst = used.iter().filter_map(|r| r.relative_error).fold(0.0f64, f64::max);
    let checks = vec![
        Check::at_least("converged_members", used.len() as f64, 1.0),
        Check::flag("all_reconstructions_consistent", used.iter().all(|r| r.consistent)),
        Check::at_most("max_relative_norm_error", worst, NORM_TOLERANCE),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(NecessityReport { id: plan.id.clone(), rows, checks, pass })
}
