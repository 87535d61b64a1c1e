//! Pseudospectral construction of solutions to the fractional semilinear heat
//! equation `u_t + (-Delta)^{theta/2} u = |u|^{gamma-1} u + mu` with zero
//! initial data, together with numerical checks of the Lorentz and
//! Besov-Lorentz estimates that govern its solvability.

pub mod besov;
pub mod error;
pub mod fit;
pub mod forcing;
pub mod harness;
pub mod lorentz;
pub mod solver;
pub mod spectral;

pub use besov::{BesovSpec, BesovValue, DyadicPartition};
pub use error::{Error, Result};
pub use forcing::ForcingSpec;
pub use harness::{run_plan, Experiment, ExperimentPlan, Outcome, RatioReport};
pub use lorentz::{CenterLattice, Index, NormSpec, RearrangementTable};
pub use solver::{Mode, SolveReport, SolverConfig, SpaceTimeField, Verdict};
pub use spectral::{Grid, ModelParams, PhysicalField, SpectralField};
