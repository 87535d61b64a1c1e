//! Smoothing estimates of the semigroup between Lorentz and Besov-Lorentz spaces.

use rayon::prelude::*;

use super::plan::{logspace, BesovDecayCase, ExperimentPlan, LorentzDecayCase};
use super::report::{Check, Comparison, FitRecord, RatioCase, RatioReport};
use crate::besov::{besov_lorentz_norm, build_partition, BesovSpec, DyadicPartition};
use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::forcing::{make_delta, make_homogeneous};
use crate::lorentz::{uniformly_local_lorentz_norm, CenterLattice, Index, NormSpec};
use crate::spectral::{semigroup_apply, Grid, SpectralField};

const FIT_POINTS: usize = 8;
const FIT_TOLERANCE: f64 = 0.1;

fn default_times(plan: &ExperimentPlan) -> Vec<f64> {
    if plan.times.is_empty() {
        logspace(1e-3, 1.0, 7)
    } else {
        plan.times.clone()
    }
}

fn weak_ul(f: &SpectralField, p: f64) -> Result<f64> {
    uniformly_local_lorentz_norm(&f.to_physical()?, &NormSpec::weak(p)?, &CenterLattice::default())
}

/// `(N / theta)(1/q - 1/p)`.
pub fn lorentz_decay_exponent(dim: usize, case: &LorentzDecayCase) -> f64 {
    dim as f64 / case.theta * (1.0 / case.q - 1.0 / case.p)
}

/// Small-time scaling of `||S(t) f | L^{q,inf}_ul||` for the extremal `f = |x|^{-N/p}` (cut off at `h`).
pub fn lorentz_decay_fit(grid: &Grid, case: &LorentzDecayCase) -> Result<FitRecord> {
    let f = make_homogeneous(grid, grid.dim() as f64 / case.p, 1.0, &[[0.0; 3]], grid.spacing())?;
    let times = logspace(case.fit_times[0], case.fit_times[1], FIT_POINTS);
    let norms = times
        .par_iter()
        .map(|&t| weak_ul(&semigroup_apply(&f, t, case.theta)?, case.q))
        .collect::<Result<Vec<f64>>>()?;
    let fit = loglog_fit(&times, &norms, FIT_POINTS)?;
    let label = format!("lorentz p={} q={} theta={}", case.p, case.q, case.theta);
    Ok(FitRecord::new(&label, fit, lorentz_decay_exponent(grid.dim(), case), FIT_TOLERANCE, Comparison::Within))
}

pub fn verify_semigroup_decay_lorentz(plan: &ExperimentPlan) -> Result<RatioReport> {
    plan.validate()?;
    if plan.lorentz_cases.is_empty() {
        return Err(Error::InvalidParameter("no lorentz_cases in plan".into()));
    }
    for c in &plan.lorentz_cases {
        if !(c.p > 1.0 && c.p <= c.q && c.q.is_finite()) {
            return Err(Error::InvalidParameter(format!("need 1 < p <= q < inf, got p = {}, q = {}", c.p, c.q)));
        }
    }
    let grids = plan.grids()?;
    let members = plan.members();
    let times = default_times(plan);
    let n = plan.dim;
    let mut cases = Vec::new();
    for (level, grid) in grids.iter().enumerate() {
        let fields = members.iter().map(|m| m.build(grid)).collect::<Result<Vec<_>>>()?;
        for case in &plan.lorentz_cases {
            let expo = lorentz_decay_exponent(n, case);
            let family = format!("p={} q={} theta={}", case.p, case.q, case.theta);
            let base = fields.par_iter().map(|f| weak_ul(f, case.p)).collect::<Result<Vec<f64>>>()?;
            let jobs: Vec<(usize, f64)> = (0..fields.len()).flat_map(|i| times.iter().map(move |&t| (i, t))).collect();
            let rows = jobs
                .par_iter()
                .map(|&(i, t)| {
                    let lhs = weak_ul(&semigroup_apply(&fields[i], t, case.theta)?, case.q)?;
                    let weight = if case.p == case.q { 1.0 } else { 1.0 + t.powf(expo) };
                    Ok(RatioCase::new(&family, level, grid.points(), lhs, weight * base[i])
                        .member(i, members[i].kind_name())
                        .param(t))
                })
                .collect::<Result<Vec<_>>>()?;
            cases.extend(rows);
        }
    }
    let finest = grids.last().expect("validated ladder");
    let fits = plan
        .lorentz_cases
        .par_iter()
        .filter(|c| c.p < c.q)
        .map(|c| lorentz_decay_fit(finest, c))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for case in plan.lorentz_cases.iter().filter(|c| c.p == c.q) {
        // equal indices: the constant must not depend on t
        let family = format!("p={} q={} theta={}", case.p, case.q, case.theta);
        let per_t: Vec<f64> = times
            .iter()
            .map(|&t| {
                cases
                    .iter()
                    .filter(|c| c.family == family && c.param == Some(t) && c.level == grids.len() - 1)
                    .filter_map(|c| c.ratio)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let hi = per_t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most(&format!("{family} sup_t ratio"), hi, 2.0));
    }
    Ok(RatioReport::assemble(
        plan.experiment.name(),
        &plan.id,
        plan.grid_ladder.clone(),
        cases,
        plan.band_or(0.15),
        fits,
        checks,
    ))
}

fn besov(f: &SpectralField, s: f64, p: f64, r: Index, part: &DyadicPartition) -> Result<f64> {
    let spec = BesovSpec { s, norm: NormSpec::weak(p)?, r, lattice: CenterLattice::default() };
    Ok(besov_lorentz_norm(f, &spec, part)?.value)
}

/// `N/p - N`, the regularity of a point mass in `B^sigma_{(p,inf),inf}`.
pub fn delta_regularity(dim: usize, p: f64) -> f64 {
    dim as f64 / p - dim as f64
}

/// Small-time slope of `||S(t) delta | B^s_{(p,inf),inf}||`, expected `-(s - sigma)/theta`.
pub fn besov_decay_fit(grid: &Grid, case: &BesovDecayCase) -> Result<FitRecord> {
    let part = build_partition(grid)?;
    let delta = make_delta(grid, 1.0);
    let times = logspace(case.fit_times[0], case.fit_times[1], FIT_POINTS);
    let norms = times
        .par_iter()
        .map(|&t| besov(&semigroup_apply(&delta, t, case.theta)?, case.s, case.p, Index::Infinity, &part))
        .collect::<Result<Vec<f64>>>()?;
    let fit = loglog_fit(&times, &norms, FIT_POINTS)?;
    let sigma = delta_regularity(grid.dim(), case.p);
    let label = format!("besov p={} s={} theta={}", case.p, case.s, case.theta);
    Ok(FitRecord::new(&label, fit, -(case.s - sigma) / case.theta, FIT_TOLERANCE, Comparison::Within))
}

pub fn verify_semigroup_decay_besov(plan: &ExperimentPlan) -> Result<RatioReport> {
    plan.validate()?;
    if plan.besov_cases.is_empty() {
        return Err(Error::InvalidParameter("no besov_cases in plan".into()));
    }
    let n = plan.dim;
    for c in &plan.besov_cases {
        if c.s < delta_regularity(n, c.p) {
            return Err(Error::InvalidParameter(format!("need s >= sigma, got s = {}", c.s)));
        }
    }
    let grids = plan.grids()?;
    let members = plan.members();
    let times = default_times(plan);
    let r = plan.norms.r;
    let mut cases = Vec::new();
    let mut gain_finite = true;
    for (level, grid) in grids.iter().enumerate() {
        let part = build_partition(grid)?;
        let fields = members.iter().map(|m| m.build(grid)).collect::<Result<Vec<_>>>()?;
        for case in &plan.besov_cases {
            let sigma = delta_regularity(n, case.p);
            let expo = -(case.s - sigma) / case.theta;
            let family = format!("p={} s={} theta={}", case.p, case.s, case.theta);
            let base = fields.par_iter().map(|f| besov(f, sigma, case.p, r, &part)).collect::<Result<Vec<f64>>>()?;
            let jobs: Vec<(usize, f64)> = (0..fields.len()).flat_map(|i| times.iter().map(move |&t| (i, t))).collect();
            let rows = jobs
                .par_iter()
                .map(|&(i, t)| {
                    let lhs = besov(&semigroup_apply(&fields[i], t, case.theta)?, case.s, case.p, r, &part)?;
                    let weight = 1.0 + t.powf(expo);
                    Ok(RatioCase::new(&family, level, grid.points(), lhs, weight * base[i])
                        .member(i, members[i].kind_name())
                        .param(t))
                })
                .collect::<Result<Vec<_>>>()?;
            cases.extend(rows);

            // third-index gain: r = 1 on the left against r = inf control of a point mass
            let delta = make_delta(grid, 1.0);
            let control = besov(&delta, sigma, case.p, Index::Infinity, &part)?;
            let gain_family = format!("gain {family}");
            let rows = times
                .par_iter()
                .map(|&t| {
                    let lhs = besov(&semigroup_apply(&delta, t, case.theta)?, case.s, case.p, Index::Finite(1.0), &part)?;
                    Ok(RatioCase::new(&gain_family, level, grid.points(), lhs, (1.0 + t.powf(expo)) * control)
                        .kind("delta")
                        .param(t))
                })
                .collect::<Result<Vec<_>>>()?;
            gain_finite &= rows.iter().all(|c| c.numerator.is_finite() && c.numerator > 0.0);
            cases.extend(rows);
        }
    }
    let finest = grids.last().expect("validated ladder");
    let fits = plan
        .besov_cases
        .par_iter()
        .filter(|c| c.s > delta_regularity(n, c.p))
        .map(|c| besov_decay_fit(finest, c))
        .collect::<Result<Vec<_>>>()?;
    let checks = vec![Check::flag("third_index_gain_finite", gain_finite)];
    Ok(RatioReport::assemble(
        plan.experiment.name(),
        &plan.id,
        plan.grid_ladder.clone(),
        cases,
        plan.band_or(0.15),
        fits,
        checks,
    ))
}
