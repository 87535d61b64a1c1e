//! Picard iteration for `u = I[mu] + J[u]` on a whole time slab.
//!
//! `I[mu](t) = int_0^t S(t - tau) mu dtau` is diagonal in Fourier space and
//! evaluated exactly. `J[u](t) = int_0^t S(t - tau) |u|^{gamma-1} u dtau` uses
//! an exponential integrator: exact semigroup weights, nonlinearity frozen on
//! each subinterval.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{besov_lorentz_norm, besov_norm, build_partition, tail_seminorm, BesovSpec, DyadicPartition};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, PowerFit};
use crate::lorentz::{uniformly_local_lorentz_norm, CenterLattice, Index, NormSpec};
use crate::spectral::{
    duhamel_factor, semigroup_multiplier, symbol, Grid, ModelParams, PhysicalField, SpectralField,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `u = I[mu] + J[u]`, zero initial data.
    Forcing,
    /// `u = S(t) mu + J[u]`.
    InitialData,
}

/// How the nonlinearity is frozen on `[t_m, t_{m+1}]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// `F(u(t_m))`: first order.
    LeftPoint,
    /// `F((u(t_m) + u(t_{m+1})) / 2)`: second order.
    Midpoint,
}

fn default_true() -> bool {
    true
}

fn default_divergence() -> f64 {
    1e6
}

fn default_quadrature() -> Quadrature {
    Quadrature::LeftPoint
}

/// Optional inputs for the sufficient-condition diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityInputs {
    /// `eps in (0, theta)` for the tail condition.
    #[serde(default)]
    pub eps: Option<f64>,
    /// `s in (-theta, 0)` for the `B^s_{(p,inf),inf}` condition.
    #[serde(default)]
    pub s: Option<f64>,
    /// First block of the tail supremum; defaults to `j_max - 2`.
    #[serde(default)]
    pub tail_start: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub model: ModelParams,
    /// Lorentz index of the solution space `L^{p,inf}_ul`.
    pub p: f64,
    /// Horizon `T`.
    pub horizon: f64,
    pub n_time: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub mode: Mode,
    /// Radius `M` of the ball checked on convergence.
    #[serde(default)]
    pub ball_radius: Option<f64>,
    #[serde(default = "default_true")]
    pub dealias: bool,
    /// Permit parameters outside the existence theorem's hypotheses.
    #[serde(default)]
    pub allow_out_of_hypothesis: bool,
    /// Switch off `|u|^{gamma-1} u` (linear runs).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    #[serde(default = "default_quadrature")]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub lattice: CenterLattice,
    /// Iterates whose norm exceeds this multiple of the first are declared divergent.
    #[serde(default = "default_divergence")]
    pub divergence_factor: f64,
    #[serde(default)]
    pub admissibility: AdmissibilityInputs,
}

impl SolverConfig {
    pub fn new(model: ModelParams, p: f64, horizon: f64, n_time: usize, mode: Mode) -> Self {
        Self {
            model,
            p,
            horizon,
            n_time,
            max_iters: 50,
            tol: 1e-10,
            mode,
            ball_radius: None,
            dealias: true,
            allow_out_of_hypothesis: false,
            nonlinear: true,
            quadrature: Quadrature::LeftPoint,
            lattice: CenterLattice::default(),
            divergence_factor: 1e6,
            admissibility: AdmissibilityInputs::default(),
        }
    }

    /// `p > gamma` and `p >= N (gamma - 1) / theta`.
    pub fn hypotheses_hold(&self) -> bool {
        let m = &self.model;
        self.p > m.gamma && self.p >= m.dim as f64 * (m.gamma - 1.0) / m.theta
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        NormSpec::weak(self.p)?;
        if self.n_time == 0 {
            return Err(Error::InvalidParameter("n_time must be positive".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(Error::InvalidParameter("divergence_factor must exceed 1".into()));
        }
        if !self.allow_out_of_hypothesis {
            if !self.hypotheses_hold() {
                return Err(Error::InvalidParameter(format!(
                    "p = {} violates p > gamma and p >= N(gamma-1)/theta; set allow_out_of_hypothesis to proceed",
                    self.p
                )));
            }
            if self.horizon > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "horizon {} exceeds 1; set allow_out_of_hypothesis to proceed",
                    self.horizon
                )));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_time as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_time).map(|n| n as f64 * self.dt()).collect()
    }

    fn weak(&self) -> NormSpec {
        NormSpec { p: self.p, q: Index::Infinity }
    }
}

/// Spectral slices `u(t_n)`, `t_n = n T / n_time`, `n = 0..=n_time`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    pub times: Vec<f64>,
    pub slices: Vec<SpectralField>,
}

impl SpaceTimeField {
    pub fn zeros(grid: &Grid, config: &SolverConfig) -> Self {
        Self { times: config.times(), slices: vec![SpectralField::zeros(*grid); config.n_time + 1] }
    }

    pub fn grid(&self) -> &Grid {
        self.slices[0].grid()
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.sub(b))
    }

    fn zip(&self, other: &Self, f: impl Fn(&SpectralField, &SpectralField) -> Result<SpectralField> + Sync) -> Result<Self> {
        if self.times != other.times {
            return Err(Error::InvalidParameter("space-time fields use different time grids".into()));
        }
        let slices = self.slices.par_iter().zip(&other.slices).map(|(a, b)| f(a, b)).collect::<Result<_>>()?;
        Ok(Self { times: self.times.clone(), slices })
    }

    pub fn is_finite(&self) -> bool {
        self.slices.iter().all(|s| s.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}

/// `I[mu](t_n)` via the exact multiplier `(1 - exp(-t_n |xi|^theta)) / |xi|^theta`.
pub fn linear_part_i(mu: &SpectralField, config: &SolverConfig) -> Result<SpaceTimeField> {
    config.validate()?;
    let theta = config.model.theta;
    let symbols: Vec<f64> = mu.grid().xi_norms().into_iter().map(|r| symbol(r, theta)).collect();
    let times = config.times();
    let slices = times
        .par_iter()
        .map(|&t| {
            let weights: Vec<f64> = symbols.iter().map(|&s| duhamel_factor(s, t)).collect();
            mu.multiply(&weights)
        })
        .collect();
    Ok(SpaceTimeField { times, slices })
}

/// `S(t_n) mu`.
pub fn semigroup_evolution(mu: &SpectralField, config: &SolverConfig) -> Result<SpaceTimeField> {
    config.validate()?;
    let times = config.times();
    let slices = times
        .par_iter()
        .map(|&t| semigroup_multiplier(mu.grid(), t, config.model.theta)?.apply(mu))
        .collect::<Result<_>>()?;
    Ok(SpaceTimeField { times, slices })
}

/// `sign(v) |v|^gamma`.
#[inline]
pub fn power_nonlinearity(v: f64, gamma: f64) -> f64 {
    if gamma == 2.0 {
        v * v.abs()
    } else if gamma == 3.0 {
        v * v * v
    } else {
        v.signum() * v.abs().powf(gamma)
    }
}

/// Spectrum of `|u|^{gamma-1} u`, with 2/3 truncation before and after when enabled.
pub fn nonlinearity(u: &SpectralField, gamma: f64, dealias: bool) -> Result<SpectralField> {
    let base = if dealias { u.dealiased() } else { u.clone() };
    let phys = base.to_physical()?.map(|v| power_nonlinearity(v, gamma));
    if phys.samples().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("overflow in the power nonlinearity".into()));
    }
    let mut out = phys.to_spectral();
    if dealias {
        out.dealias_in_place();
    }
    Ok(out)
}

/// `J[u](t_n)` by the recursion `J_n = S(dt) J_{n-1} + D(dt) F_{n-1/2}`, `D(dt) = (1 - e^{-dt |xi|^theta}) / |xi|^theta`.
pub fn nonlinear_part_j(u: &SpaceTimeField, config: &SolverConfig) -> Result<SpaceTimeField> {
    let grid = *u.grid();
    if u.len() != config.n_time + 1 {
        return Err(Error::InvalidParameter(format!("expected {} slices, got {}", config.n_time + 1, u.len())));
    }
    if !config.nonlinear {
        return Ok(SpaceTimeField::zeros(&grid, config));
    }
    let gamma = config.model.gamma;
    let forces: Vec<SpectralField> = (0..config.n_time)
        .into_par_iter()
        .map(|m| {
            let state = match config.quadrature {
                Quadrature::LeftPoint => u.slices[m].clone(),
                Quadrature::Midpoint => u.slices[m].add(&u.slices[m + 1])?.scale(0.5),
            };
            nonlinearity(&state, gamma, config.dealias)
        })
        .collect::<Result<_>>()?;
    let dt = config.dt();
    let theta = config.model.theta;
    let symbols: Vec<f64> = grid.xi_norms().into_iter().map(|r| symbol(r, theta)).collect();
    let decay: Vec<f64> = symbols.iter().map(|&s| (-dt * s).exp()).collect();
    let weight: Vec<f64> = symbols.iter().map(|&s| duhamel_factor(s, dt)).collect();
    let mut slices = Vec::with_capacity(config.n_time + 1);
    let mut acc = SpectralField::zeros(grid);
    slices.push(acc.clone());
    for force in &forces {
        for ((a, f), (e, w)) in acc.coeffs_mut().iter_mut().zip(force.coeffs()).zip(decay.iter().zip(&weight)) {
            *a = *a * *e + *f * *w;
        }
        slices.push(acc.clone());
    }
    Ok(SpaceTimeField { times: config.times(), slices })
}

/// Per-slice `||u(t_n) | L^{p,inf}_ul||`, `n >= 1`.
pub fn slice_norms(u: &SpaceTimeField, spec: &NormSpec, lattice: &CenterLattice) -> Result<Vec<f64>> {
    u.slices[1..]
        .par_iter()
        .map(|s| uniformly_local_lorentz_norm(&s.to_physical()?, spec, lattice))
        .collect()
}

/// `sup_{n >= 1} ||u(t_n) | L^{p,inf}_ul||`.
pub fn xt_norm(u: &SpaceTimeField, p: f64) -> Result<f64> {
    xt_norm_with(u, &NormSpec::weak(p)?, &CenterLattice::default())
}

pub fn xt_norm_with(u: &SpaceTimeField, spec: &NormSpec, lattice: &CenterLattice) -> Result<f64> {
    Ok(slice_norms(u, spec, lattice)?.into_iter().fold(0.0, f64::max))
}

fn linear_part(mu: &SpectralField, config: &SolverConfig) -> Result<SpaceTimeField> {
    match config.mode {
        Mode::Forcing => linear_part_i(mu, config),
        Mode::InitialData => semigroup_evolution(mu, config),
    }
}

/// `sup_n ||u - L - J[u]||_{p,inf,ul}` with `L = I[mu]` or `S(t) mu` according to the mode.
pub fn residual(u: &SpaceTimeField, mu: &SpectralField, config: &SolverConfig) -> Result<f64> {
    let lin = linear_part(mu, config)?;
    let defect = u.sub(&lin)?.sub(&nonlinear_part_j(u, config)?)?;
    xt_norm_with(&defect, &config.weak(), &config.lattice)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    Diverged,
    MaxIters,
}

/// Measured quantities behind the three sufficient conditions of the existence theorem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub hypotheses_hold: bool,
    pub serrin_exponent: f64,
    pub j_max: Option<usize>,
    /// `||mu | B^{-theta}_{(p,inf),1}||`, small-data clause.
    pub besov_minus_theta_1: Option<f64>,
    /// `||mu | B^{eps-theta}_{(Np/(N+p eps),inf),inf}||` and the tail supremum, tail clause.
    pub eps: Option<f64>,
    pub besov_eps: Option<f64>,
    pub tail: Option<f64>,
    /// `||mu | B^s_{(p,inf),inf}||` for `-theta < s < 0`.
    pub s: Option<f64>,
    pub besov_s: Option<f64>,
    /// Spectral content beyond the last retained block.
    pub truncated: bool,
    pub notes: Vec<String>,
}

/// Evaluate the diagnostics; failures are recorded as notes, never raised.
pub fn admissibility(mu: &SpectralField, config: &SolverConfig) -> Admissibility {
    let m = &config.model;
    let mut rec = Admissibility {
        hypotheses_hold: config.hypotheses_hold(),
        serrin_exponent: m.serrin_exponent(),
        j_max: None,
        besov_minus_theta_1: None,
        eps: config.admissibility.eps,
        besov_eps: None,
        tail: None,
        s: config.admissibility.s,
        besov_s: None,
        truncated: false,
        notes: Vec::new(),
    };
    let part = match build_partition(mu.grid()) {
        Ok(p) => p,
        Err(e) => {
            rec.notes.push(e.to_string());
            return rec;
        }
    };
    rec.j_max = Some(part.j_max());
    rec.truncated = part.truncates(mu);
    let mut run = |label: &str, f: &mut dyn FnMut(&DyadicPartition) -> Result<f64>| match f(&part) {
        Ok(v) => Some(v),
        Err(e) => {
            rec.notes.push(format!("{label}: {e}"));
            None
        }
    };
    let (theta, p, n) = (m.theta, config.p, m.dim as f64);
    let b1 = run("B^{-theta}_{(p,inf),1}", &mut |part| {
        let spec = BesovSpec { s: -theta, norm: config.weak(), r: Index::Finite(1.0), lattice: config.lattice };
        Ok(besov_lorentz_norm(mu, &spec, part)?.value)
    });
    let (mut be, mut tail) = (None, None);
    if let Some(eps) = config.admissibility.eps {
        let p_eff = n * p / (n + p * eps);
        be = run("B^{eps-theta}", &mut |part| {
            let spec = BesovSpec { s: eps - theta, norm: NormSpec::weak(p_eff)?, r: Index::Infinity, lattice: config.lattice };
            Ok(besov_lorentz_norm(mu, &spec, part)?.value)
        });
        let j0 = config.admissibility.tail_start.unwrap_or(part.j_max().saturating_sub(2));
        tail = run("tail", &mut |part| Ok(tail_seminorm(mu, eps, theta, p_eff, j0, part)?.value));
    }
    let mut bs = None;
    if let Some(s) = config.admissibility.s {
        bs = run("B^s", &mut |part| {
            if !(s > -theta && s < 0.0) {
                return Err(Error::InvalidParameter(format!("s = {s} outside (-theta, 0)")));
            }
            let spec = BesovSpec { s, norm: config.weak(), r: Index::Infinity, lattice: config.lattice };
            Ok(besov_lorentz_norm(mu, &spec, part)?.value)
        });
    }
    rec.besov_minus_theta_1 = b1;
    rec.besov_eps = be;
    rec.tail = tail;
    rec.besov_s = bs;
    rec
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: SolverConfig,
    pub grid: Grid,
    pub verdict: Verdict,
    pub converged: bool,
    /// Number of applications of the Picard map.
    pub iterations: usize,
    /// `||u^k | X_T||` for every computed iterate.
    pub iterate_xt_norms: Vec<f64>,
    /// `||u^{k+1} - u^k||` for `k = 0, 1, ...`.
    pub increments: Vec<f64>,
    /// Ratios of consecutive increments.
    pub contraction_ratios: Vec<f64>,
    /// Fixed-point defect of the returned iterate.
    pub final_residual: f64,
    pub xt_norm: f64,
    /// `xt_norm <= ball_radius`, when a radius is configured and the run converged.
    pub within_ball: Option<bool>,
    pub admissibility: Admissibility,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }
}

/// Picard iteration `u^0 = L`, `u^{k+1} = L + J[u^k]` with `L = I[mu]` (forcing) or `S(t) mu` (initial data).
///
/// The returned field is the last iterate `u^k` whose successor was computed,
/// so `final_residual = ||u^{k+1} - u^k||` is its exact fixed-point defect.
pub fn picard_solve(mu: &SpectralField, config: &SolverConfig) -> Result<(SpaceTimeField, SolveReport)> {
    config.validate()?;
    let adm = admissibility(mu, config);
    let lin = linear_part(mu, config)?;
    let spec = config.weak();
    let norm = |u: &SpaceTimeField| xt_norm_with(u, &spec, &config.lattice);

    let mut current = lin.clone();
    let first = norm(&current)?;
    let mut norms = vec![first];
    let mut increments: Vec<f64> = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    let mut verdict = Verdict::MaxIters;
    let mut iterations = 0;
    let ceiling = config.divergence_factor * first;

    while iterations < config.max_iters {
        let next = match nonlinear_part_j(&current, config) {
            Ok(j) => lin.add(&j)?,
            Err(Error::NonFinite(_)) => {
                verdict = Verdict::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        iterations += 1;
        let next_norm = if next.is_finite() { norm(&next)? } else { f64::INFINITY };
        if !next_norm.is_finite() || next_norm > ceiling {
            norms.push(next_norm);
            verdict = Verdict::Diverged;
            break;
        }
        let inc = norm(&next.sub(&current)?)?;
        if let Some(prev) = increments.last() {
            ratios.push(if *prev > 0.0 { inc / prev } else { 0.0 });
        }
        increments.push(inc);
        if inc <= config.tol {
            verdict = Verdict::Converged;
            break;
        }
        if iterations == config.max_iters {
            break;
        }
        norms.push(next_norm);
        current = next;
    }

    let final_residual = match verdict {
        Verdict::Converged => *increments.last().unwrap(),
        Verdict::MaxIters => increments.last().copied().unwrap_or(f64::NAN),
        Verdict::Diverged => f64::INFINITY,
    };
    let xt = norms[norms.len() - 1 - usize::from(verdict == Verdict::Diverged && norms.len() > 1)];
    let within_ball = match (verdict, config.ball_radius) {
        (Verdict::Converged, Some(m)) => Some(xt <= m),
        _ => None,
    };
    let report = SolveReport {
        config: config.clone(),
        grid: *mu.grid(),
        verdict,
        converged: verdict == Verdict::Converged,
        iterations,
        iterate_xt_norms: norms,
        increments,
        contraction_ratios: ratios,
        final_residual,
        xt_norm: xt,
        within_ball,
        admissibility: adm,
    };
    Ok((current, report))
}

/// [`picard_solve`] in initial-data mode.
pub fn initial_data_evolve(mu: &SpectralField, config: &SolverConfig) -> Result<(SpaceTimeField, SolveReport)> {
    if config.mode != Mode::InitialData {
        return Err(Error::InvalidParameter("initial_data_evolve requires mode = initial_data".into()));
    }
    picard_solve(mu, config)
}

/// Early-time decay of `||u(t) | B^{s - N/p}_{inf,inf}||`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakStarDecay {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// `None` when every norm vanishes.
    pub fit: Option<PowerFit>,
    pub trivial: bool,
    /// The norm at the earliest sampled time is below the norm at the latest.
    pub vanishes_at_zero: bool,
}

/// Fits the decay exponent over the slices `n = 1, 2, 4, ...` with `t_n <= T / 2`.
pub fn weak_star_initial_decay(u: &SpaceTimeField, config: &SolverConfig, s: f64) -> Result<WeakStarDecay> {
    let part = build_partition(u.grid())?;
    let order = s - u.grid().dim() as f64 / config.p;
    let mut idx = Vec::new();
    let mut n = 1;
    while n < u.len() && 2 * n <= config.n_time {
        idx.push(n);
        n *= 2;
    }
    if idx.len() < 4 {
        return Err(Error::Insufficient(format!("{} early-time slices, need 4", idx.len())));
    }
    let norms = idx
        .par_iter()
        .map(|&n| Ok(besov_norm(&u.slices[n], order, Index::Infinity, Index::Infinity, &part)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let times: Vec<f64> = idx.iter().map(|&n| u.times[n]).collect();
    if norms.iter().all(|v| *v == 0.0) {
        return Ok(WeakStarDecay { times, norms, fit: None, trivial: true, vanishes_at_zero: true });
    }
    let fit = loglog_fit(&times, &norms, 4)?;
    let vanishes_at_zero = norms[0] < *norms.last().unwrap();
    Ok(WeakStarDecay { times, norms, fit: Some(fit), trivial: false, vanishes_at_zero })
}

/// Both sides of the nonlinear difference bound:
/// `||F(f) - F(g)||_{p/gamma,inf,ul}` and `gamma (||f||^{gamma-1} + ||g||^{gamma-1}) ||f - g||` in `L^{p,inf}_ul`.
pub fn difference_bound(f: &PhysicalField, g: &PhysicalField, gamma: f64, p: f64, lattice: &CenterLattice) -> Result<(f64, f64)> {
    if p / gamma < 1.0 {
        return Err(Error::InvalidParameter(format!("need p >= gamma, got p = {p}, gamma = {gamma}")));
    }
    let lhs_field = f.zip_map(g, |a, b| power_nonlinearity(a, gamma) - power_nonlinearity(b, gamma))?;
    let lhs_spec = if p / gamma > 1.0 { NormSpec::weak(p / gamma)? } else { NormSpec { p: 1.0, q: Index::Infinity } };
    let lhs = uniformly_local_lorentz_norm(&lhs_field, &lhs_spec, lattice)?;
    let spec = NormSpec::weak(p)?;
    let nf = uniformly_local_lorentz_norm(f, &spec, lattice)?;
    let ng = uniformly_local_lorentz_norm(g, &spec, lattice)?;
    let nd = uniformly_local_lorentz_norm(&f.zip_map(g, |a, b| a - b)?, &spec, lattice)?;
    Ok((lhs, gamma * (nf.powf(gamma - 1.0) + ng.powf(gamma - 1.0)) * nd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::make_delta;
    use num_complex::Complex64;

    fn config(n_time: usize) -> SolverConfig {
        SolverConfig::new(ModelParams::new(2.0, 2.0, 1).unwrap(), 3.0, 0.5, n_time, Mode::Forcing)
    }

    fn grid() -> Grid {
        Grid::new(1, 1024, 16.0).unwrap()
    }

    #[test]
    fn hypotheses_gate() {
        let mut c = config(8);
        assert!(c.validate().is_ok());
        c.p = 1.5;
        assert!(c.validate().is_err());
        c.allow_out_of_hypothesis = true;
        assert!(c.validate().is_ok());
        let mut c = config(8);
        c.horizon = 2.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn linear_part_single_mode_and_mean() {
        let g = grid();
        let c = config(16);
        let mut mu = SpectralField::zeros(g);
        mu.set_coeff_at(&[5], Complex64::new(0.3, -0.1));
        mu.set_coeff_at(&[-5], Complex64::new(0.3, 0.1));
        mu.set_coeff_at(&[0], Complex64::new(0.7, 0.0));
        let i = linear_part_i(&mu, &c).unwrap();
        let s = (5.0 * g.frequency_step()).powi(2);
        for (n, t) in i.times.iter().enumerate() {
            let expect = (1.0 - (-t * s).exp()) / s * Complex64::new(0.3, -0.1);
            assert!((i.slices[n].coeff_at(&[5]) - expect).norm() < 1e-12);
            assert!((i.slices[n].coeff_at(&[0]).re - 0.7 * t).abs() < 1e-15);
        }
        assert!(linear_part_i(&SpectralField::zeros(g), &c).unwrap().slices.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn cubic_nonlinearity_of_single_mode() {
        let g = grid();
        let k = 40;
        let mut u = SpectralField::zeros(g);
        u.set_coeff_at(&[k], Complex64::new(0.5, 0.0));
        u.set_coeff_at(&[-k], Complex64::new(0.5, 0.0));
        // cos^3 = (3 cos + cos 3) / 4
        let f = nonlinearity(&u, 3.0, true).unwrap();
        assert!((f.coeff_at(&[k]).re - 3.0 / 8.0).abs() < 1e-10);
        assert!((f.coeff_at(&[3 * k]).re - 1.0 / 8.0).abs() < 1e-10);
        let mut rest = f.clone();
        for kk in [k, -k, 3 * k, -3 * k] {
            rest.set_coeff_at(&[kk], Complex64::new(0.0, 0.0));
        }
        assert!(rest.max_abs() < 1e-10);
    }

    #[test]
    fn zero_forcing_fixed_point() {
        let g = grid();
        let (u, report) = picard_solve(&SpectralField::zeros(g), &config(16)).unwrap();
        assert_eq!(report.verdict, Verdict::Converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.final_residual, 0.0);
        assert!(u.slices.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn linear_modes_reproduce_diagonal_operators() {
        let g = grid();
        let mu = make_delta(&g, 1.0);
        let mut c = config(8);
        c.nonlinear = false;
        let (u, report) = picard_solve(&mu, &c).unwrap();
        assert!(report.converged);
        assert_eq!(u, linear_part_i(&mu, &c).unwrap());
        c.mode = Mode::InitialData;
        let (u, _) = initial_data_evolve(&mu, &c).unwrap();
        for (n, t) in u.times.iter().enumerate() {
            let direct = crate::spectral::semigroup_apply(&mu, *t, 2.0).unwrap();
            assert!(u.slices[n].sub(&direct).unwrap().max_abs() <= 1e-12 * mu.max_abs());
        }
    }

    #[test]
    fn small_delta_converges_with_certified_residual() {
        let g = grid();
        let mu = make_delta(&g, 1e-2);
        let mut c = config(64);
        c.tol = 1e-9;
        let (u, report) = picard_solve(&mu, &c).unwrap();
        assert_eq!(report.verdict, Verdict::Converged, "{report:?}");
        assert!(report.contraction_ratios.iter().all(|r| *r < 1.0));
        let r = residual(&u, &mu, &c).unwrap();
        assert!((r - report.final_residual).abs() <= 1e-12 * report.xt_norm.max(1.0));
        assert!(r <= c.tol);
    }

    #[test]
    fn residual_of_linear_part_is_norm_of_j() {
        let g = grid();
        let mu = make_delta(&g, 0.5);
        let c = config(32);
        let i = linear_part_i(&mu, &c).unwrap();
        let r = residual(&i, &mu, &c).unwrap();
        let j = xt_norm(&nonlinear_part_j(&i, &c).unwrap(), c.p).unwrap();
        assert!(r > 0.0);
        assert!((r - j).abs() <= 1e-12 * j);
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let g = Grid::new(1, 256, 8.0).unwrap();
        let u_of = |c: &SolverConfig| {
            let slices = c
                .times()
                .iter()
                .map(|t| PhysicalField::from_fn(g, |x| (1.0 + t) * (-(x[0] * x[0])).exp()).to_spectral())
                .collect();
            SpaceTimeField { times: c.times(), slices }
        };
        let mut errs = Vec::new();
        for rule in [Quadrature::LeftPoint, Quadrature::Midpoint] {
            let mut ends = Vec::new();
            for n in [8, 16, 32, 256] {
                let mut c = config(n);
                c.quadrature = rule;
                let j = nonlinear_part_j(&u_of(&c), &c).unwrap();
                ends.push(j.slices[n].clone());
            }
            let reference = ends[3].clone();
            let e: Vec<f64> = ends[..3].iter().map(|s| s.sub(&reference).unwrap().max_abs()).collect();
            errs.push(e);
        }
        let left = (errs[0][0] / errs[0][1]).log2();
        let mid = (errs[1][1] / errs[1][2]).log2();
        assert!((left - 1.0).abs() < 0.2, "left-point order {left}");
        assert!(mid > 1.7, "midpoint order {mid}");
    }

    #[test]
    fn difference_bound_on_simple_pair() {
        let g = grid();
        let f = PhysicalField::from_fn(g, |x| (-(x[0] * x[0])).exp());
        let h = f.map(|v| 0.5 * v);
        let (lhs, rhs) = difference_bound(&f, &h, 2.0, 3.0, &CenterLattice::default()).unwrap();
        assert!(lhs <= rhs);
        assert!(difference_bound(&f, &h, 3.0, 2.0, &CenterLattice::default()).is_err());
    }

    #[test]
    fn weak_star_needs_enough_slices() {
        let g = grid();
        let c = config(4);
        let u = SpaceTimeField::zeros(&g, &c);
        assert!(matches!(weak_star_initial_decay(&u, &c, -0.5), Err(Error::Insufficient(_))));
        let c = config(64);
        let u = SpaceTimeField::zeros(&g, &c);
        assert!(weak_star_initial_decay(&u, &c, -0.5).unwrap().trivial);
    }

    #[test]
    fn report_serialises() {
        let g = grid();
        let (_, report) = picard_solve(&make_delta(&g, 1e-3), &config(8)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["verdict"], "converged");
        assert!(v["admissibility"]["besov_minus_theta_1"].as_f64().unwrap() > 0.0);
    }
}
