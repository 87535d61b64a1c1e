//! Forcing recovery: `||mu | B^{-theta}_{(p,inf),inf}|| <= C(T) sup_{t <= T} ||I[mu](t) | L^{p,inf}_ul||`.

use rayon::prelude::*;

use super::plan::ExperimentPlan;
use super::report::{Comparison, FitRecord, RatioCase, RatioReport};
use crate::besov::{besov_lorentz_norm, build_partition, BesovSpec, DyadicPartition};
use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::lorentz::{uniformly_local_lorentz_norm, CenterLattice, Index, NormSpec};
use crate::spectral::{duhamel_linear_multiplier, SpectralField};

/// Samples of `t` in `(0, T]` for the supremum on the right-hand side.
pub const TIME_SAMPLES: usize = 16;

/// Lower bound on the fitted exponent of `C(T)` as `T -> 0`.
pub const T_EXPONENT_FLOOR: f64 = -1.3;

/// Left side: `||mu | B^{-theta}_{(p,inf),inf}||`.
pub fn recovery_lhs(mu: &SpectralField, theta: f64, p: f64, part: &DyadicPartition) -> Result<f64> {
    let spec = BesovSpec { s: -theta, norm: NormSpec::weak(p)?, r: Index::Infinity, lattice: CenterLattice::default() };
    Ok(besov_lorentz_norm(mu, &spec, part)?.value)
}

/// Right side: `max_k ||I[mu](k T / TIME_SAMPLES) | L^{p,inf}_ul||`.
pub fn recovery_rhs(mu: &SpectralField, theta: f64, p: f64, horizon: f64) -> Result<f64> {
    let spec = NormSpec::weak(p)?;
    let lattice = CenterLattice::default();
    (1..=TIME_SAMPLES)
        .into_par_iter()
        .map(|k| {
            let t = horizon * k as f64 / TIME_SAMPLES as f64;
            let slice = duhamel_linear_multiplier(mu.grid(), t, theta)?.apply(mu)?;
            uniformly_local_lorentz_norm(&slice.to_physical()?, &spec, &lattice)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

pub fn verify_forcing_recovery(plan: &ExperimentPlan) -> Result<RatioReport> {
    plan.validate()?;
    let horizons = if plan.horizons.is_empty() { vec![1.0, 0.5, 0.25, 0.125] } else { plan.horizons.clone() };
    if horizons.iter().any(|t| *t > 1.0) {
        return Err(Error::InvalidParameter("forcing recovery is studied for T <= 1 only".into()));
    }
    let theta = plan.thetas.first().copied().unwrap_or(2.0);
    let p = plan.norms.p;
    let grids = plan.grids()?;
    let members = plan.members();
    let mut cases = Vec::new();
    for (level, grid) in grids.iter().enumerate() {
        let part = build_partition(grid)?;
        let fields = members.iter().map(|m| m.build(grid)).collect::<Result<Vec<_>>>()?;
        let lhs = fields.par_iter().map(|f| recovery_lhs(f, theta, p, &part)).collect::<Result<Vec<f64>>>()?;
        let jobs: Vec<(usize, f64)> = (0..fields.len()).flat_map(|i| horizons.iter().map(move |&t| (i, t))).collect();
        let rows = jobs
            .par_iter()
            .map(|&(i, t)| {
                let rhs = recovery_rhs(&fields[i], theta, p, t)?;
                Ok(RatioCase::new("recovery", level, grid.points(), lhs[i], rhs)
                    .member(i, members[i].kind_name())
                    .param(t))
            })
            .collect::<Result<Vec<_>>>()?;
        cases.extend(rows);
    }
    let finest = grids.len() - 1;
    let constants: Vec<f64> = horizons
        .iter()
        .map(|&t| {
            cases
                .iter()
                .filter(|c| c.level == finest && c.param == Some(t))
                .filter_map(|c| c.ratio)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut fits = Vec::new();
    if horizons.len() >= 3 {
        let fit = loglog_fit(&horizons, &constants, 3)?;
        fits.push(FitRecord::new("constant_vs_horizon", fit, T_EXPONENT_FLOOR, 0.0, Comparison::AtLeast));
    }
    Ok(RatioReport::assemble(
        plan.experiment.name(),
        &plan.id,
        plan.grid_ladder.clone(),
        cases,
        plan.band_or(0.2),
        fits,
        Vec::new(),
    ))
}
