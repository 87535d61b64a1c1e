//! Spatial decay of `F^{-1}[Phi_(0) C_T]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{logspace, ExperimentPlan};
use crate::besov::{phi, zeta};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, PowerFit, INCONCLUSIVE_RESIDUAL};
use crate::spectral::{c_t_value, Grid, PhysicalField, SpectralField};

/// Inner edge of the tail window. The smooth cutoff contributes a part that decays only like
/// `exp(-c sqrt|x|)`, which dominates the algebraic tail up to a few hundred length units.
pub const TAIL_START: f64 = 512.0;
/// The window ends at `L / TAIL_END_FRACTION`, away from the periodic images.
pub const TAIL_END_FRACTION: f64 = 8.0;
/// Tolerance added to the target slope.
pub const SLOPE_SLACK: f64 = 0.1;
/// Allowed relative change of the `L^1` norm under `M -> 2M`.
pub const L1_STABILITY: f64 = 0.05;
/// Envelope values below this fraction of the peak are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-12;
const FIT_SAMPLES: usize = 32;

/// `Phi_(0)(xi) = phi_(0)(xi) + phi_1(xi)`.
pub fn low_cutoff(xi_norm: f64) -> f64 {
    zeta(xi_norm) + phi(1, xi_norm)
}

/// `F^{-1}[Phi_(0) C_T]` sampled on `grid`.
pub fn synthesize_kernel(grid: &Grid, theta: f64, horizon: f64) -> Result<PhysicalField> {
    if !(theta > 0.0 && theta <= 2.0) || !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("need 0 < theta <= 2 and T > 0, got {theta}, {horizon}")));
    }
    let volume = grid.box_volume();
    let coeffs = grid
        .xi_norms()
        .into_iter()
        .map(|r| {
            let cut = low_cutoff(r);
            let v = if cut == 0.0 { 0.0 } else { cut * c_t_value(r, horizon, theta) / volume };
            num_complex::Complex64::new(v, 0.0)
        })
        .collect();
    SpectralField::new(*grid, coeffs)?.to_physical()
}

/// Samples of `|K|` along the positive `x_1` axis: `(x, |K(x)|)` for `0 <= x < L`.
pub fn axis_profile(kernel: &PhysicalField) -> Vec<(f64, f64)> {
    let grid = kernel.grid();
    let half = grid.points() / 2;
    (half..grid.points())
        .map(|i| {
            let mut idx = [half; 3];
            idx[0] = i;
            (grid.coordinate(i), kernel.samples()[grid.flatten(&idx[..grid.dim()])].abs())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFit {
    pub theta: f64,
    pub horizon: f64,
    pub window: [f64; 2],
    /// `None` when the whole window sits below the round-off floor.
    pub fit: Option<PowerFit>,
    /// `-(N + min(1, theta))`.
    pub target: f64,
    pub super_polynomial: bool,
    pub l1: f64,
    pub l1_refined: f64,
    pub l1_change: f64,
    pub pass: bool,
}

/// Log-log fit of the decreasing envelope of `|K|` over `[start, end]`.
pub fn tail_fit(profile: &[(f64, f64)], start: f64, end: f64) -> Result<Option<PowerFit>> {
    let peak = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    let window: Vec<(f64, f64)> = profile.iter().copied().filter(|(x, _)| *x >= start && *x <= end).collect();
    if window.len() < FIT_SAMPLES {
        return Err(Error::Insufficient(format!("{} lattice points in the tail window", window.len())));
    }
    let mut envelope = vec![0.0; window.len()];
    let mut running = 0.0f64;
    for i in (0..window.len()).rev() {
        running = running.max(window[i].1);
        envelope[i] = running;
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut last = usize::MAX;
    for target in logspace(start, end, FIT_SAMPLES) {
        let i = window.partition_point(|(x, _)| *x < target).min(window.len() - 1);
        if i != last && envelope[i] > NOISE_FLOOR * peak {
            xs.push(window[i].0);
            ys.push(envelope[i]);
            last = i;
        }
    }
    if xs.len() < 4 {
        return Ok(None);
    }
    loglog_fit(&xs, &ys, 4).map(Some)
}

/// Fit and `L^1` stability of the kernel for one `(theta, T)` on a working grid.
pub fn kernel_decay(grid: &Grid, theta: f64, horizon: f64) -> Result<KernelFit> {
    let end = grid.half_length() / TAIL_END_FRACTION;
    if end < 2.0 * TAIL_START {
        return Err(Error::InvalidParameter(format!(
            "tail window [{TAIL_START}, {end}] spans less than a factor 2; need L >= {}",
            2.0 * TAIL_START * TAIL_END_FRACTION
        )));
    }
    // supp Phi_(0) lies in |xi| <= 10/3, so the Nyquist frequency pi / h must exceed it
    if grid.spacing() > 0.5 {
        return Err(Error::InvalidGrid(format!("spacing {} exceeds 0.5", grid.spacing())));
    }
    let refined = grid.refined();
    let kernel = synthesize_kernel(grid, theta, horizon)?;
    let fit = tail_fit(&axis_profile(&kernel), TAIL_START, end)?;
    let l1 = kernel.lp_norm(1.0);
    let l1_refined = synthesize_kernel(&refined, theta, horizon)?.lp_norm(1.0);
    let l1_change = (l1_refined / l1 - 1.0).abs();
    let n = grid.dim() as f64;
    let target = -(n + theta.min(1.0));
    let super_polynomial = fit.is_none_or(|f| f.slope <= -(n + 1.0) - 2.0);
    let decays = if theta >= 2.0 {
        super_polynomial
    } else {
        fit.is_some_and(|f| f.slope <= target + SLOPE_SLACK && f.residual <= INCONCLUSIVE_RESIDUAL) || super_polynomial
    };
    let pass = decays && l1.is_finite() && l1_change <= L1_STABILITY;
    Ok(KernelFit {
        theta,
        horizon,
        window: [TAIL_START, end],
        fit,
        target,
        super_polynomial,
        l1,
        l1_refined,
        l1_change,
        pass,
    })
}

pub fn verify_kernel_decay(plan: &ExperimentPlan) -> Result<Vec<KernelFit>> {
    plan.validate()?;
    let thetas = if plan.thetas.is_empty() { vec![0.5, 1.0, 1.5, 2.0] } else { plan.thetas.clone() };
    let horizons = if plan.horizons.is_empty() { vec![0.5, 1.0] } else { plan.horizons.clone() };
    let grid = plan.grids()?[0];
    let jobs: Vec<(f64, f64)> = thetas.iter().flat_map(|&th| horizons.iter().map(move |&t| (th, t))).collect();
    jobs.par_iter().map(|&(th, t)| kernel_decay(&grid, th, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_integral_is_multiplier_at_zero() {
        // int K = Phi_(0)(0) C_T(0) = 2 / T^2
        let grid = Grid::new(1, 4096, 64.0).unwrap();
        for t in [0.5, 1.0] {
            let k = synthesize_kernel(&grid, 1.0, t).unwrap();
            assert!((k.integral() - 2.0 / (t * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_short_window() {
        let grid = Grid::new(1, 8192, 2048.0).unwrap();
        assert!(kernel_decay(&grid, 1.0, 1.0).is_err());
        let coarse = Grid::new(1, 8192, 8192.0).unwrap();
        assert!(kernel_decay(&coarse, 1.0, 1.0).is_err());
    }

    #[test]
    fn tail_slopes_on_reference_box() {
        let grid = Grid::new(1, 65536, 16384.0).unwrap();
        let k = kernel_decay(&grid, 1.0, 1.0).unwrap();
        assert!(k.pass, "{k:?}");
        assert!((k.fit.unwrap().slope + 2.0).abs() < 0.05);
        let k = kernel_decay(&grid, 2.0, 1.0).unwrap();
        assert!(k.super_polynomial && k.pass, "{k:?}");
    }

    #[test]
    fn envelope_fit_recovers_power() {
        let profile: Vec<(f64, f64)> = (1..2000).map(|i| {
            let x = i as f64 * 0.01;
            (x, x.powf(-2.5) * (1.0 + 0.3 * (5.0 * x).cos().powi(2)))
        }).collect();
        let fit = tail_fit(&profile, 4.0, 16.0).unwrap().unwrap();
        assert!((fit.slope + 2.5).abs() < 0.1, "{fit:?}");
        let flat: Vec<(f64, f64)> = profile.iter().map(|&(x, _)| (x, if x < 1.0 { 1.0 } else { 0.0 })).collect();
        assert!(tail_fit(&flat, 4.0, 16.0).unwrap().is_none());
    }
}
