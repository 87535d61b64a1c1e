//! Embedding chains between `L^{p,inf}_ul`, Besov-Lorentz and classical Besov spaces.

use rayon::prelude::*;

use super::plan::ExperimentPlan;
use super::report::{RatioCase, RatioReport};
use crate::besov::{besov_lorentz_norm, besov_norm, build_partition, BesovSpec, DyadicPartition};
use crate::error::Result;
use crate::forcing::make_delta;
use crate::lorentz::{uniformly_local_lorentz_norm, CenterLattice, Index, NormSpec};
use crate::spectral::SpectralField;

fn bl(f: &SpectralField, s: f64, p: f64, q: Index, r: Index, part: &DyadicPartition) -> Result<f64> {
    let spec = BesovSpec { s, norm: NormSpec::new(p, q)?, r, lattice: CenterLattice::default() };
    Ok(besov_lorentz_norm(f, &spec, part)?.value)
}

/// `B^0_{(p,inf),1} -> L^{p,inf}_ul -> B^0_{(p,inf),inf}`: returns the two quotients' parts
/// `(||f|L^{p,inf}_ul||, ||f|B^0_{(p,inf),1}||, ||f|B^0_{(p,inf),inf}||)`.
pub fn chain_norms(f: &SpectralField, p: f64, part: &DyadicPartition) -> Result<(f64, f64, f64)> {
    let ul = uniformly_local_lorentz_norm(&f.to_physical()?, &NormSpec::weak(p)?, &CenterLattice::default())?;
    let b1 = bl(f, 0.0, p, Index::Infinity, Index::Finite(1.0), part)?;
    let binf = bl(f, 0.0, p, Index::Infinity, Index::Infinity, part)?;
    Ok((ul, b1, binf))
}

pub fn verify_embedding_chain(plan: &ExperimentPlan) -> Result<RatioReport> {
    plan.validate()?;
    let p = plan.norms.p;
    let grids = plan.grids()?;
    let members = plan.members();
    let mut cases = Vec::new();
    for (level, grid) in grids.iter().enumerate() {
        let part = build_partition(grid)?;
        let fields = members.iter().map(|m| m.build(grid)).collect::<Result<Vec<_>>>()?;
        let norms = fields.par_iter().map(|f| chain_norms(f, p, &part)).collect::<Result<Vec<_>>>()?;
        for (i, (ul, b1, binf)) in norms.into_iter().enumerate() {
            let kind = members[i].kind_name();
            cases.push(RatioCase::new("ul_over_b1", level, grid.points(), ul, b1).member(i, kind));
            cases.push(RatioCase::new("binf_over_ul", level, grid.points(), binf, ul).member(i, kind));
        }
    }
    Ok(RatioReport::assemble(
        plan.experiment.name(),
        &plan.id,
        plan.grid_ladder.clone(),
        cases,
        plan.band_or(0.15),
        Vec::new(),
        Vec::new(),
    ))
}

/// Quotients of the two Sobolev-type embeddings for one field:
/// `||f|B^{s-N/p}_{inf,r}|| / ||f|B^s_{(p,q),r}||` and
/// `||f|B^{s-N(1-eta)/p}_{(p/eta,q/eta),r}|| / ||f|B^s_{(p,q),r}||`, as (numerator, denominator) pairs.
pub fn sobolev_parts(
    f: &SpectralField,
    p: f64,
    q: Index,
    s: f64,
    r: Index,
    eta: f64,
    part: &DyadicPartition,
) -> Result<[(f64, f64); 2]> {
    let n = f.grid().dim() as f64;
    let base = bl(f, s, p, q, r, part)?;
    let sup = besov_norm(f, s - n / p, Index::Infinity, r, part)?.value;
    let q_shift = match q {
        Index::Finite(q) => Index::Finite(q / eta),
        Index::Infinity => Index::Infinity,
    };
    let shifted = bl(f, s - n * (1.0 - eta) / p, p / eta, q_shift, r, part)?;
    Ok([(sup, base), (shifted, base)])
}

pub fn verify_sobolev_embedding(plan: &ExperimentPlan) -> Result<RatioReport> {
    plan.validate()?;
    let idx = plan.norms;
    let n = plan.dim as f64;
    let grids = plan.grids()?;
    let members = plan.members();
    let mut cases = Vec::new();
    for (level, grid) in grids.iter().enumerate() {
        let part = build_partition(grid)?;
        let fields = members.iter().map(|m| m.build(grid)).collect::<Result<Vec<_>>>()?;
        let parts = fields
            .par_iter()
            .map(|f| sobolev_parts(f, idx.p, idx.q, idx.s, idx.r, idx.eta, &part))
            .collect::<Result<Vec<_>>>()?;
        for (i, [(a, b), (c, d)]) in parts.into_iter().enumerate() {
            let kind = members[i].kind_name();
            cases.push(RatioCase::new("sup_embedding", level, grid.points(), a, b).member(i, kind));
            cases.push(RatioCase::new("index_shift", level, grid.points(), c, d).member(i, kind));
        }

        // point mass: L^1 -> B^0_{1,inf} -> B^{N/p - N}_{p,inf}
        let delta = make_delta(grid, 1.0);
        let l1 = delta.to_physical()?.lp_norm(1.0);
        let b0 = besov_norm(&delta, 0.0, Index::Finite(1.0), Index::Infinity, &part)?.value;
        let bp = besov_norm(&delta, n / idx.p - n, Index::Finite(idx.p), Index::Infinity, &part)?.value;
        cases.push(RatioCase::new("delta_b01inf_over_l1", level, grid.points(), b0, l1).kind("delta"));
        cases.push(RatioCase::new("delta_bp_over_b01inf", level, grid.points(), bp, b0).kind("delta"));
    }
    Ok(RatioReport::assemble(
        plan.experiment.name(),
        &plan.id,
        plan.grid_ladder.clone(),
        cases,
        plan.band_or(0.15),
        Vec::new(),
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, PhysicalField};

    #[test]
    fn single_block_field_has_unit_chain_ratios() {
        // phi_4 = 1 on 5/6 * 16 <= |xi| <= 1.5 * 16, so both Besov norms reduce to the block itself
        let grid = Grid::new(1, 1024, 16.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let (a, b) = (92.0 * grid.frequency_step(), 100.0 * grid.frequency_step());
        let f = PhysicalField::from_fn(grid, |x| (a * x[0]).cos() + 0.5 * (b * x[0]).sin()).to_spectral();
        let (ul, b1, binf) = chain_norms(&f, 2.0, &part).unwrap();
        assert!((ul / b1 - 1.0).abs() < 1e-3);
        assert!((binf / ul - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_field_is_skipped() {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let zero = SpectralField::zeros(grid);
        let [(a, b), _] = sobolev_parts(&zero, 3.0, Index::Infinity, 0.0, Index::Infinity, 0.5, &part).unwrap();
        assert_eq!(RatioCase::new("x", 0, 256, a, b).status, crate::harness::CaseStatus::ExcludedTrivial);
    }
}
