//! Numerical verification of the estimates behind the solvability theory: each experiment
//! turns a plan into ratio tables over a grid ladder, exponent fits, or solver sweeps.

pub mod decay;
pub mod embedding;
pub mod kernel;
pub mod necessity;
pub mod output;
pub mod plan;
pub mod recovery;
pub mod report;
pub mod sweep;
pub mod young;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use kernel::KernelFit;
pub use necessity::NecessityReport;
pub use plan::{Experiment, ExperimentPlan, MemberKind};
pub use report::{CaseStatus, Check, FitRecord, FitVerdict, RatioCase, RatioReport};
pub use sweep::SweepReport;

use crate::error::{Error, Result};
use output::Table;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    Ratios(RatioReport),
    Kernel { fits: Vec<KernelFit> },
    Sweep(SweepReport),
    Necessity(NecessityReport),
}

impl Outcome {
    pub fn pass(&self) -> bool {
        match self {
            Outcome::Ratios(r) => r.pass,
            Outcome::Kernel { fits } => !fits.is_empty() && fits.iter().all(|f| f.pass),
            Outcome::Sweep(s) => s.pass,
            Outcome::Necessity(n) => n.pass,
        }
    }

    pub fn table(&self) -> Table {
        match self {
            Outcome::Ratios(r) => output::ratio_table(r),
            Outcome::Kernel { fits } => output::kernel_table(fits),
            Outcome::Sweep(s) => output::sweep_table(s),
            Outcome::Necessity(n) => output::necessity_table(n),
        }
    }
}

pub fn run_plan(plan: &ExperimentPlan) -> Result<Outcome> {
    Ok(match plan.experiment {
        Experiment::YoungUl => Outcome::Ratios(young::verify_young_ul(plan)?),
        Experiment::SemigroupDecayLorentz => Outcome::Ratios(decay::verify_semigroup_decay_lorentz(plan)?),
        Experiment::SemigroupDecayBesov => Outcome::Ratios(decay::verify_semigroup_decay_besov(plan)?),
        Experiment::ForcingRecovery => Outcome::Ratios(recovery::verify_forcing_recovery(plan)?),
        Experiment::KernelDecay => Outcome::Kernel { fits: kernel::verify_kernel_decay(plan)? },
        Experiment::EmbeddingChain => Outcome::Ratios(embedding::verify_embedding_chain(plan)?),
        Experiment::SobolevEmbedding => Outcome::Ratios(embedding::verify_sobolev_embedding(plan)?),
        Experiment::SolvabilitySweep => Outcome::Sweep(sweep::solvability_sweep(plan)?),
        Experiment::Necessity => Outcome::Necessity(necessity::verify_necessity(plan)?),
    })
}

/// Resolved plan as TOML, preceded by the producing crate version.
pub fn provenance(plan: &ExperimentPlan) -> Result<String> {
    let body = toml::to_string(plan).map_err(|e| Error::Format(e.to_string()))?;
    Ok(format!("fracheat-core {}\n{body}", env!("CARGO_PKG_VERSION")))
}

#[derive(Serialize)]
struct Summary<'a> {
    id: &'a str,
    experiment: &'a str,
    pass: bool,
    config: &'a ExperimentPlan,
    csv: String,
    outcome: &'a Outcome,
}

/// Writes `<id>.csv`, `<id>.schema.json` and `<id>.summary.json` into `dir`.
pub fn write_outcome(dir: &Path, plan: &ExperimentPlan, outcome: &Outcome) -> Result<PathBuf> {
    let csv = output::write_table(dir, &plan.id, &outcome.table(), &provenance(plan)?)?;
    let summary = dir.join(format!("{}.summary.json", plan.id));
    output::write_json(
        &summary,
        &Summary {
            id: &plan.id,
            experiment: plan.experiment.name(),
            pass: outcome.pass(),
            config: plan,
            csv: csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            outcome,
        },
    )?;
    Ok(summary)
}
