use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::{ForcingSpec, Profile};
use crate::lorentz::Index;
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    YoungUl,
    SemigroupDecayLorentz,
    SemigroupDecayBesov,
    ForcingRecovery,
    KernelDecay,
    EmbeddingChain,
    SobolevEmbedding,
    SolvabilitySweep,
    Necessity,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::YoungUl => "young_ul",
            Experiment::SemigroupDecayLorentz => "semigroup_decay_lorentz",
            Experiment::SemigroupDecayBesov => "semigroup_decay_besov",
            Experiment::ForcingRecovery => "forcing_recovery",
            Experiment::KernelDecay => "kernel_decay",
            Experiment::EmbeddingChain => "embedding_chain",
            Experiment::SobolevEmbedding => "sobolev_embedding",
            Experiment::SolvabilitySweep => "solvability_sweep",
            Experiment::Necessity => "necessity",
        }
    }

    /// Experiments whose result is a refinement-gated [`super::RatioReport`].
    pub fn is_ratio_study(&self) -> bool {
        !matches!(self, Experiment::KernelDecay | Experiment::SolvabilitySweep | Experiment::Necessity)
    }

    fn default_kinds(&self) -> &'static [MemberKind] {
        use MemberKind::*;
        match self {
            Experiment::ForcingRecovery => &[Delta, DeltaDerivative, Homogeneous, Random],
            Experiment::SemigroupDecayBesov => &[Delta, Indicator, Gaussian, Random],
            Experiment::Necessity => &[Delta, Homogeneous, Gaussian, Random],
            Experiment::SolvabilitySweep => &[Delta],
            _ => &[Indicator, Gaussian, Homogeneous, WhiteNoise],
        }
    }
}

/// Generator classes for ensemble members.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Delta,
    DeltaDerivative,
    Homogeneous,
    Indicator,
    Gaussian,
    Random,
    WhiteNoise,
}

impl MemberKind {
    pub fn name(&self) -> &'static str {
        match self {
            MemberKind::Delta => "delta",
            MemberKind::DeltaDerivative => "delta_derivative",
            MemberKind::Homogeneous => "homogeneous",
            MemberKind::Indicator => "indicator",
            MemberKind::Gaussian => "gaussian",
            MemberKind::Random => "random",
            MemberKind::WhiteNoise => "white_noise",
        }
    }
}

fn default_count() -> usize {
    20
}

fn default_band() -> [i32; 2] {
    [0, 4]
}

fn default_slope() -> f64 {
    -1.0
}

fn default_amplitude() -> f64 {
    1.0
}

/// Seeded ensemble of forcing terms. Member `i` depends only on `(seed, i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    /// Classes cycled through by member index; empty selects the experiment's default mix.
    #[serde(default)]
    pub kinds: Vec<MemberKind>,
    /// Dyadic band of the random members.
    #[serde(default = "default_band")]
    pub band: [i32; 2],
    /// Spectral slope of the `random` members.
    #[serde(default = "default_slope")]
    pub slope: f64,
    /// Base amplitude; members draw a factor in `[0.5, 2)`.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            count: default_count(),
            seed: 0,
            kinds: Vec::new(),
            band: default_band(),
            slope: default_slope(),
            amplitude: default_amplitude(),
        }
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

impl EnsembleSpec {
    /// Member specs. `p` fixes the homogeneous exponents below `N / p`.
    pub fn members(&self, experiment: Experiment, dim: usize, half_length: f64, p: f64) -> Vec<ForcingSpec> {
        let kinds = if self.kinds.is_empty() { experiment.default_kinds() } else { &self.kinds[..] };
        let n = dim as f64;
        (0..self.count)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(i as u64);
                let amplitude = round3(self.amplitude * rng.random_range(0.5..2.0)).max(1e-3 * self.amplitude);
                let center: Vec<f64> =
                    (0..dim).map(|_| round3(rng.random_range(-0.25..0.25) * half_length)).collect();
                match kinds[i % kinds.len()] {
                    MemberKind::Delta => ForcingSpec::Delta { amplitude },
                    MemberKind::DeltaDerivative => {
                        ForcingSpec::DeltaDerivative { amplitude, axis: 1 + rng.random_range(0..dim) }
                    }
                    MemberKind::Homogeneous => ForcingSpec::Homogeneous {
                        amplitude,
                        exponent: round3(n / p * rng.random_range(0.1..0.5)),
                        centers: vec![center],
                        cutoff: None,
                        radius: 1.0,
                    },
                    MemberKind::Indicator => ForcingSpec::LpFunction {
                        amplitude,
                        profile: Profile::Indicator,
                        width: round3(rng.random_range(0.3..2.0)),
                        center,
                    },
                    MemberKind::Gaussian => ForcingSpec::LpFunction {
                        amplitude,
                        profile: Profile::Gaussian,
                        width: round3(rng.random_range(0.2..1.5)),
                        center,
                    },
                    MemberKind::Random => {
                        ForcingSpec::RandomBandlimited { amplitude, seed: rng.random(), slope: self.slope, band: self.band }
                    }
                    MemberKind::WhiteNoise => {
                        ForcingSpec::RandomBandlimited { amplitude, seed: rng.random(), slope: 0.0, band: self.band }
                    }
                }
            })
            .collect()
    }
}

/// `(p, q, theta)` case for the Lorentz decay study; the fit runs over `t in [fit_times[0], fit_times[1]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzDecayCase {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub fit_times: [f64; 2],
}

/// `(p, s, theta)` case for the Besov decay study with `sigma = N/p - N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovDecayCase {
    pub p: f64,
    pub s: f64,
    pub theta: f64,
    pub fit_times: [f64; 2],
}

fn default_p() -> f64 {
    3.0
}

fn default_infinity() -> Index {
    Index::Infinity
}

fn default_eta() -> f64 {
    0.5
}

/// Norm indices shared by the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormIndices {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_infinity")]
    pub q: Index,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "default_infinity")]
    pub r: Index,
    /// Index shift of the second Sobolev-type embedding, in `(0, 1)`.
    #[serde(default = "default_eta")]
    pub eta: f64,
}

impl Default for NormIndices {
    fn default() -> Self {
        Self { p: default_p(), q: Index::Infinity, s: 0.0, r: Index::Infinity, eta: default_eta() }
    }
}

fn default_dim() -> usize {
    1
}

fn default_half_length() -> f64 {
    16.0
}

fn default_n_time() -> usize {
    64
}

fn default_max_iters() -> usize {
    50
}

fn default_tol() -> f64 {
    1e-10
}

/// One experiment with its grids, ensemble and parameter grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub id: String,
    pub experiment: Experiment,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_half_length")]
    pub half_length: f64,
    /// Points per axis, strictly increasing.
    pub grid_ladder: Vec<usize>,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub norms: NormIndices,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub thetas: Vec<f64>,
    #[serde(default)]
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub horizons: Vec<f64>,
    #[serde(default)]
    pub amplitudes: Vec<f64>,
    #[serde(default)]
    pub lorentz_cases: Vec<LorentzDecayCase>,
    #[serde(default)]
    pub besov_cases: Vec<BesovDecayCase>,
    /// Picard settings for the sweep and necessity experiments.
    #[serde(default = "default_n_time")]
    pub n_time: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Half-width of the accepted refinement trend band around 1.
    #[serde(default)]
    pub band: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn new(id: &str, experiment: Experiment, grid_ladder: Vec<usize>) -> Self {
        Self {
            id: id.to_string(),
            experiment,
            dim: default_dim(),
            half_length: default_half_length(),
            grid_ladder,
            ensemble: EnsembleSpec::default(),
            norms: NormIndices::default(),
            times: Vec::new(),
            thetas: Vec::new(),
            gammas: Vec::new(),
            horizons: Vec::new(),
            amplitudes: Vec::new(),
            lorentz_cases: Vec::new(),
            besov_cases: Vec::new(),
            n_time: default_n_time(),
            max_iters: default_max_iters(),
            tol: default_tol(),
            band: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return bad(format!("experiment id {:?} must be non-empty [A-Za-z0-9_-]", self.id));
        }
        if self.grid_ladder.is_empty() {
            return bad("grid ladder is empty".into());
        }
        if self.grid_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("grid ladder {:?} is not strictly increasing", self.grid_ladder));
        }
        if self.experiment.is_ratio_study() && self.grid_ladder.len() < 3 {
            return bad("refinement trends need at least 3 grid levels".into());
        }
        if self.ensemble.count == 0 && self.experiment != Experiment::KernelDecay {
            return bad("ensemble count must be positive".into());
        }
        if let Some(b) = self.band {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("band {b} must lie in (0, 1)"));
            }
        }
        if !(self.norms.p > 1.0 && self.norms.p.is_finite()) {
            return bad(format!("p = {} must lie in (1, inf)", self.norms.p));
        }
        if !(self.norms.eta > 0.0 && self.norms.eta < 1.0) {
            return bad(format!("eta = {} must lie in (0, 1)", self.norms.eta));
        }
        let positive = |name: &str, v: &[f64]| {
            if v.iter().all(|x| *x > 0.0 && x.is_finite()) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite")))
            }
        };
        positive("times", &self.times)?;
        positive("thetas", &self.thetas)?;
        positive("horizons", &self.horizons)?;
        if self.amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return bad("amplitudes must be finite and non-negative".into());
        }
        if self.thetas.iter().any(|t| *t > 2.0) {
            return bad("theta must lie in (0, 2]".into());
        }
        let kinds = if self.ensemble.kinds.is_empty() { self.experiment.default_kinds() } else { &self.ensemble.kinds[..] };
        let random = self.experiment != Experiment::KernelDecay
            && kinds.iter().any(|k| matches!(k, MemberKind::Random | MemberKind::WhiteNoise));
        for g in self.grids()?.into_iter().filter(|_| random) {
            let [lo, hi] = self.ensemble.band;
            if hi >= lo && 2f64.powi(hi + 1) > g.dealias_radius() * (1.0 + 1e-12) {
                return bad(format!(
                    "random band [{lo}, {hi}] exceeds the dealiased radius {:.1} of M = {}",
                    g.dealias_radius(),
                    g.points()
                ));
            }
        }
        Ok(())
    }

    pub fn grids(&self) -> Result<Vec<Grid>> {
        self.grid_ladder.iter().map(|&m| Grid::new(self.dim, m, self.half_length)).collect()
    }

    /// Replace every seed the plan carries.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.ensemble.seed = seed;
        self
    }

    pub fn members(&self) -> Vec<ForcingSpec> {
        self.ensemble.members(self.experiment, self.dim, self.half_length, self.norms.p)
    }

    pub fn band_or(&self, default: f64) -> f64 {
        self.band.unwrap_or(default)
    }
}

/// `count` points log-spaced on `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_must_increase() {
        let mut plan = ExperimentPlan::new("x", Experiment::YoungUl, vec![512, 1024, 1024]);
        assert!(plan.validate().is_err());
        plan.grid_ladder = vec![512, 1024];
        assert!(plan.validate().is_err());
        plan.grid_ladder = vec![512, 1024, 2048];
        assert!(plan.validate().is_ok());
        plan.experiment = Experiment::KernelDecay;
        plan.grid_ladder = vec![512];
        assert!(plan.validate().is_ok());
    }

    #[test]
    fn band_must_fit_smallest_grid() {
        let mut plan = ExperimentPlan::new("x", Experiment::ForcingRecovery, vec![1024, 2048, 4096]);
        plan.ensemble.band = [0, 6];
        assert!(plan.validate().is_err());
        plan.ensemble.band = [0, 5];
        assert!(plan.validate().is_ok());
    }

    #[test]
    fn members_reproducible_per_index() {
        let mut a = EnsembleSpec { count: 8, seed: 7, ..Default::default() };
        let first = a.members(Experiment::YoungUl, 1, 16.0, 3.0);
        assert_eq!(first, a.members(Experiment::YoungUl, 1, 16.0, 3.0));
        a.count = 4;
        assert_eq!(&first[..4], &a.members(Experiment::YoungUl, 1, 16.0, 3.0)[..]);
        a.seed = 8;
        assert_ne!(&first[..4], &a.members(Experiment::YoungUl, 1, 16.0, 3.0)[..]);
    }

    #[test]
    fn plan_toml_round_trip() {
        let text = r#"
            id = "rec"
            experiment = "forcing_recovery"
            grid_ladder = [1024, 2048, 4096]
            horizons = [1.0, 0.5]
            [ensemble]
            count = 20
            seed = 3
            kinds = ["delta", "random"]
            [norms]
            p = 3.0
            r = "inf"
        "#;
        let plan: ExperimentPlan = toml::from_str(text).unwrap();
        assert_eq!(plan.ensemble.kinds, vec![MemberKind::Delta, MemberKind::Random]);
        assert_eq!(plan.norms.r, Index::Infinity);
        let back: ExperimentPlan = toml::from_str(&toml::to_string(&plan).unwrap()).unwrap();
        assert_eq!(back, plan);
        assert!(toml::from_str::<ExperimentPlan>("id = \"a\"\nexperiment = \"young_ul\"\ngrid_ladder = [1]\nbogus = 1").is_err());
    }
}
