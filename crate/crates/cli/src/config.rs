//! Config files: TOML parsed into a value tree, `--set` overrides applied, then
//! deserialized into strict types and validated before anything runs.

use std::path::{Path, PathBuf};

use fracheat_core::besov::BesovSpec;
use fracheat_core::{ExperimentPlan, ForcingSpec, Grid, Index, NormSpec, SolverConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const SEED_VAR: &str = "FRACHEAT_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one")]
    pub dim: usize,
    pub points: usize,
    pub half_length: f64,
}

fn one() -> usize {
    1
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid, Failure> {
        Grid::new(self.dim, self.points, self.half_length).map_err(|e| Failure::Config(format!("grid: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotConfig {
    /// Number of stored time slices, the last one always included; 0 disables snapshots.
    #[serde(default = "four")]
    pub count: usize,
    #[serde(default)]
    pub spectral: bool,
}

fn four() -> usize {
    4
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        Self { count: 4, spectral: false }
    }
}

/// `fracheat solve`: one Picard run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default)]
    pub id: Option<String>,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    /// Summed into `mu`; in `initial_data` mode `mu` is the initial datum.
    pub forcing: Vec<ForcingSpec>,
    #[serde(default)]
    pub snapshots: SnapshotConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzRequest {
    pub p: f64,
    #[serde(default = "infinity")]
    pub q: Index,
    #[serde(default)]
    pub uniformly_local: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovRequest {
    pub s: f64,
    pub p: f64,
    #[serde(default = "infinity")]
    pub q: Index,
    #[serde(default = "infinity")]
    pub r: Index,
}

fn infinity() -> Index {
    Index::Infinity
}

/// `fracheat norms`: norms of a synthesized forcing or of a stored field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    #[serde(default)]
    pub id: Option<String>,
    /// Required with `forcing`; ignored when `input` is given.
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub forcing: Vec<ForcingSpec>,
    /// A field container written by `fracheat solve`, relative to the config file.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub lorentz: Vec<LorentzRequest>,
    #[serde(default)]
    pub besov: Vec<BesovRequest>,
}

impl SolveConfig {
    pub fn validate(&self) -> Result<Grid, Failure> {
        let grid = self.grid.build()?;
        self.solver.validate().map_err(|e| Failure::Config(format!("solver: {e}")))?;
        if self.solver.model.dim != grid.dim() {
            return Err(Failure::Config(format!(
                "solver.model.dim = {} but grid.dim = {}",
                self.solver.model.dim,
                grid.dim()
            )));
        }
        if self.forcing.is_empty() {
            return Err(Failure::Config("at least one [[forcing]] term is required".into()));
        }
        Ok(grid)
    }
}

impl NormsConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        match (&self.input, &self.grid) {
            (Some(_), _) if !self.forcing.is_empty() => {
                return Err(Failure::Config("give either input or [[forcing]], not both".into()))
            }
            (None, None) => return Err(Failure::Config("[grid] is required without input".into())),
            (None, Some(g)) => {
                g.build()?;
                if self.forcing.is_empty() {
                    return Err(Failure::Config("nothing to measure: no input and no [[forcing]]".into()));
                }
            }
            _ => {}
        }
        if self.lorentz.is_empty() && self.besov.is_empty() {
            return Err(Failure::Config("no [[lorentz]] or [[besov]] norms requested".into()));
        }
        for l in &self.lorentz {
            NormSpec::new(l.p, l.q).map_err(|e| Failure::Config(format!("lorentz: {e}")))?;
        }
        for b in &self.besov {
            BesovSpec::new(b.s, b.p, b.q, b.r).map_err(|e| Failure::Config(format!("besov: {e}")))?;
        }
        Ok(())
    }
}

/// Parses `key=value`; the value is read as a TOML literal, falling back to a bare string.
fn parse_override(raw: &str) -> Result<(Vec<String>, toml::Value), Failure> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Failure::Usage(format!("override {raw:?} is not of the form key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Failure::Usage(format!("override key {key:?} is empty or malformed")));
    }
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((path, parsed))
}

pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<(), Failure> {
    for raw in overrides {
        let (path, value) = parse_override(raw)?;
        let (last, parents) = path.split_last().expect("non-empty path");
        let mut node = &mut *table;
        for key in parents {
            let entry = node.entry(key.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            node = entry
                .as_table_mut()
                .ok_or_else(|| Failure::Usage(format!("override {raw:?}: {key} is not a table")))?;
        }
        node.insert(last.clone(), value);
    }
    Ok(())
}

pub fn read_table(path: &Path) -> Result<toml::Table, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    text.parse::<toml::Table>()
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Reads, overrides and deserializes a config file.
pub fn load<T: DeserializeOwned>(path: &Path, overrides: &[String]) -> Result<T, Failure> {
    let mut table = read_table(path)?;
    apply_overrides(&mut table, overrides)?;
    T::deserialize(toml::Value::Table(table)).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

pub fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Config(format!("{SEED_VAR}={v:?} is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Config(format!("{SEED_VAR}: {e}"))),
    }
}

/// Term `i` of a config gets seed `seed + i`, so several noise terms stay independent.
pub fn reseed_terms(terms: &mut [ForcingSpec], seed: u64) {
    for (i, term) in terms.iter_mut().enumerate() {
        if let ForcingSpec::RandomBandlimited { seed: s, .. } = term {
            *s = seed.wrapping_add(i as u64);
        }
    }
}

pub fn load_plan(path: &Path, overrides: &[String]) -> Result<ExperimentPlan, Failure> {
    let mut plan: ExperimentPlan = load(path, overrides)?;
    if let Some(seed) = env_seed()? {
        plan = plan.with_seed(seed);
    }
    plan.validate().map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(plan)
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String, Failure> {
    toml::to_string(value).map_err(|e| Failure::Config(format!("cannot render resolved config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_literals_and_paths() {
        let mut t: toml::Table = "[solver]\nhorizon = 1.0\n".parse().unwrap();
        apply_overrides(
            &mut t,
            &["solver.horizon=0.25".into(), "solver.mode=forcing".into(), "thetas=[1.5, 2]".into()],
        )
        .unwrap();
        assert_eq!(t["solver"]["horizon"].as_float(), Some(0.25));
        assert_eq!(t["solver"]["mode"].as_str(), Some("forcing"));
        assert_eq!(t["thetas"].as_array().map(Vec::len), Some(2));
    }

    #[test]
    fn malformed_override_is_usage_error() {
        let mut t = toml::Table::new();
        assert!(matches!(apply_overrides(&mut t, &["novalue".into()]), Err(Failure::Usage(_))));
        assert!(matches!(apply_overrides(&mut t, &["a..b=1".into()]), Err(Failure::Usage(_))));
        t.insert("x".into(), toml::Value::Integer(1));
        assert!(matches!(apply_overrides(&mut t, &["x.y=1".into()]), Err(Failure::Usage(_))));
    }

    #[test]
    fn reseed_offsets_by_term() {
        let noise = ForcingSpec::RandomBandlimited { amplitude: 1.0, seed: 0, slope: 0.0, band: [0, 2] };
        let mut terms = vec![noise.clone(), ForcingSpec::Delta { amplitude: 1.0 }, noise];
        reseed_terms(&mut terms, 40);
        let seeds: Vec<Option<u64>> = terms
            .iter()
            .map(|t| match t {
                ForcingSpec::RandomBandlimited { seed, .. } => Some(*seed),
                _ => None,
            })
            .collect();
        assert_eq!(seeds, vec![Some(40), None, Some(42)]);
    }
}
