//! Young's inequality in `L^{p,inf}_ul`: `||g * f|| <= C ||g|L^1|| ||f||`.

use rayon::prelude::*;

use super::plan::{logspace, ExperimentPlan};
use super::report::{Check, RatioCase, RatioReport};
use crate::error::Result;
use crate::forcing::{make_delta, make_profile, Profile};
use crate::lorentz::{uniformly_local_lorentz_norm, CenterLattice, NormSpec};
use crate::spectral::{semigroup_apply, Grid, SpectralField};

fn kernels(grid: &Grid, plan: &ExperimentPlan) -> Result<Vec<(&'static str, Option<f64>, SpectralField)>> {
    let delta = make_delta(grid, 1.0);
    let theta = plan.thetas.first().copied().unwrap_or(2.0);
    let times = if plan.times.is_empty() { logspace(1e-3, 1.0, 4) } else { plan.times.clone() };
    let mut out = vec![("delta", None, delta.clone())];
    for t in times {
        out.push(("heat", Some(t), semigroup_apply(&delta, t, theta)?));
    }
    out.push(("bump", None, make_profile(grid, Profile::Bump, 0.5, [0.0; 3], 1.0)?));
    Ok(out)
}

pub fn verify_young_ul(plan: &ExperimentPlan) -> Result<RatioReport> {
    plan.validate()?;
    let grids = plan.grids()?;
    let members = plan.members();
    let spec = NormSpec::weak(plan.norms.p)?;
    let lattice = CenterLattice::default();
    let mut cases = Vec::new();
    for (level, grid) in grids.iter().enumerate() {
        let ks = kernels(grid, plan)?;
        let fields = members.iter().map(|m| m.build(grid)).collect::<Result<Vec<_>>>()?;
        let f_norms = fields
            .par_iter()
            .map(|f| uniformly_local_lorentz_norm(&f.to_physical()?, &spec, &lattice))
            .collect::<Result<Vec<f64>>>()?;
        let jobs: Vec<(usize, usize)> = (0..ks.len()).flat_map(|k| (0..fields.len()).map(move |i| (k, i))).collect();
        let level_cases = jobs
            .par_iter()
            .map(|&(k, i)| {
                let (label, t, g) = &ks[k];
                let g_l1 = g.to_physical()?.lp_norm(1.0);
                let conv = g.convolve(&fields[i])?.to_physical()?;
                let lhs = uniformly_local_lorentz_norm(&conv, &spec, &lattice)?;
                let case = RatioCase::new(label, level, grid.points(), lhs, g_l1 * f_norms[i]).member(i, members[i].kind_name());
                Ok(match t {
                    Some(t) => case.param(*t),
                    None => case,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        cases.extend(level_cases);
    }
    let identity = cases
        .iter()
        .filter(|c| c.family == "delta")
        .filter_map(|c| c.ratio)
        .fold(0.0f64, |m, r| m.max((r - 1.0).abs()));
    let heat_indicator = cases
        .iter()
        .filter(|c| c.family == "heat" && c.kind == "lp_function")
        .filter_map(|c| c.ratio)
        .fold(0.0f64, f64::max);
    let checks = vec![
        Check::at_most("delta_kernel_identity_defect", identity, 1e-10),
        Check::at_most("heat_kernel_profile_ratio", heat_indicator, 1.1),
    ];
    Ok(RatioReport::assemble(
        plan.experiment.name(),
        &plan.id,
        plan.grid_ladder.clone(),
        cases,
        plan.band_or(0.15),
        Vec::new(),
        checks,
    ))
}
