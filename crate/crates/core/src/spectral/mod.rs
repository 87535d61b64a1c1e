//! Truncated periodic-box representation of functions and tempered
//! distributions, the discrete Fourier transform, and the diagonal
//! multipliers of the fractional heat semigroup.

pub mod field;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod multiplier;

pub use field::{forward_transform, inverse_transform, PhysicalField, SpectralField};
pub use grid::{Grid, ModelParams};
pub use kernel::closed_form_kernel;
pub use multiplier::{
    c_t_multiplier, c_t_value, duhamel_factor, duhamel_linear_multiplier, fractional_symbol, psi,
    semigroup_apply, semigroup_multiplier, symbol, Multiplier,
};
