//! Diagonal Fourier multipliers: the fractional symbol `|xi|^theta`, the
//! semigroup `exp(-t |xi|^theta)`, the Duhamel factor
//! `(1 - exp(-t |xi|^theta)) / |xi|^theta` and the inverse time-averaged
//! Duhamel factor `C_T(xi)`.

use super::field::SpectralField;
use super::grid::{check_theta, Grid};
use crate::error::{Error, Result};

/// Below this argument `psi` switches to its Taylor expansion.
pub const PSI_SERIES_SWITCH: f64 = 1e-2;

/// A real multiplier sampled on the FFT-ordered frequency lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier {
    grid: Grid,
    values: Vec<f64>,
}

impl Multiplier {
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.xi_norms().into_iter().map(f).collect();
        Self { grid: *grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn apply(&self, field: &SpectralField) -> Result<SpectralField> {
        if field.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(field.multiply(&self.values))
    }

    /// Pointwise product of two multipliers on the same lattice.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid, values })
    }
}

/// `|xi|^theta` on the lattice, exactly zero at the origin.
pub fn fractional_symbol(grid: &Grid, theta: f64) -> Result<Multiplier> {
    check_theta(theta)?;
    Ok(Multiplier::from_fn(grid, |r| symbol(r, theta)))
}

#[inline]
pub fn symbol(xi_norm: f64, theta: f64) -> f64 {
    if xi_norm == 0.0 {
        0.0
    } else {
        xi_norm.powf(theta)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be finite and nonnegative, got {t}")))
    }
}

pub fn semigroup_multiplier(grid: &Grid, t: f64, theta: f64) -> Result<Multiplier> {
    check_theta(theta)?;
    check_time(t)?;
    Ok(Multiplier::from_fn(grid, |r| (-t * symbol(r, theta)).exp()))
}

/// `S(t) f`: multiply by `exp(-t |xi|^theta)`.
pub fn semigroup_apply(field: &SpectralField, t: f64, theta: f64) -> Result<SpectralField> {
    semigroup_multiplier(field.grid(), t, theta)?.apply(field)
}

/// `(1 - exp(-t s)) / s` with the limit `t` at `s = 0`.
#[inline]
pub fn duhamel_factor(symbol: f64, t: f64) -> f64 {
    if symbol == 0.0 {
        t
    } else {
        -(-t * symbol).exp_m1() / symbol
    }
}

/// Fourier multiplier of `f -> int_0^t S(t - tau) f d tau`.
pub fn duhamel_linear_multiplier(grid: &Grid, t: f64, theta: f64) -> Result<Multiplier> {
    check_theta(theta)?;
    check_time(t)?;
    Ok(Multiplier::from_fn(grid, |r| duhamel_factor(symbol(r, theta), t)))
}

/// `psi(s) = s^2 / (s + exp(-s) - 1)`, smooth on `[0, inf)` with `psi(0) = 2`.
pub fn psi(s: f64) -> f64 {
    if s < PSI_SERIES_SWITCH {
        psi_series(s)
    } else {
        psi_closed(s)
    }
}

pub(crate) fn psi_closed(s: f64) -> f64 {
    s * s / (s + (-s).exp_m1())
}

pub(crate) fn psi_series(s: f64) -> f64 {
    // 2 + 2s/3 + s^2/18 - s^3/270 - s^4/3240 + s^5/13608 - s^6/2041200
    const C: [f64; 7] = [
        2.0,
        2.0 / 3.0,
        1.0 / 18.0,
        -1.0 / 270.0,
        -1.0 / 3240.0,
        1.0 / 13608.0,
        -1.0 / 2041200.0,
    ];
    C.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

/// `C_T(xi) = |xi|^{2 theta} / (|xi|^theta T + exp(-|xi|^theta T) - 1) = T^{-2} psi(T |xi|^theta)`.
#[inline]
pub fn c_t_value(xi_norm: f64, horizon: f64, theta: f64) -> f64 {
    psi(horizon * symbol(xi_norm, theta)) / (horizon * horizon)
}

pub fn c_t_multiplier(grid: &Grid, horizon: f64, theta: f64) -> Result<Multiplier> {
    check_theta(theta)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon T must be positive, got {horizon}")));
    }
    Ok(Multiplier::from_fn(grid, |r| c_t_value(r, horizon, theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::PhysicalField;
    use num_complex::Complex64;

    fn grid() -> Grid {
        Grid::new(1, 64, 4.0).unwrap()
    }

    #[test]
    fn symbol_values() {
        let g = grid();
        let sym = fractional_symbol(&g, 2.0).unwrap();
        assert_eq!(sym.values()[0], 0.0);
        let step = std::f64::consts::PI / 4.0;
        assert!((sym.values()[1] - step * step).abs() < 1e-15);
        assert!((symbol(2.0, 1.5) - 2f64.powf(1.5)).abs() < 1e-15);
        assert!(fractional_symbol(&g, 2.5).is_err());
        assert!(sym.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn semigroup_identity_at_zero_and_rejects_negative_time() {
        let g = grid();
        let f = PhysicalField::from_fn(g, |x| (-x[0] * x[0]).exp()).to_spectral();
        assert_eq!(semigroup_apply(&f, 0.0, 1.3).unwrap(), f);
        assert!(semigroup_apply(&f, -1e-3, 1.3).is_err());
    }

    #[test]
    fn duhamel_limits() {
        assert_eq!(duhamel_factor(0.0, 0.7), 0.7);
        assert!((duhamel_factor(1.0, 1e6) - 1.0).abs() < 1e-15);
        assert!((duhamel_factor(3.0, 1e6) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn duhamel_unit_value_against_quadrature() {
        // int_0^1 exp(-(1 - tau)) d tau by composite Simpson.
        let n = 2000;
        let h = 1.0 / n as f64;
        let f = |tau: f64| (-(1.0 - tau)).exp();
        let mut sum = f(0.0) + f(1.0);
        for i in 1..n {
            sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = sum * h / 3.0;
        let direct = duhamel_factor(symbol(1.0, 2.0), 1.0);
        assert!((direct - 0.6321205588285577).abs() < 1e-15);
        assert!((direct - simpson).abs() < 1e-12);
    }

    #[test]
    fn psi_branches_agree_at_switch() {
        let s = PSI_SERIES_SWITCH;
        // 2.006672218515439446882561604946... from 40-digit arithmetic
        let reference = 2.006_672_218_515_439_4;
        assert!((psi_series(s) - psi_closed(s)).abs() / reference < 1e-12);
        assert!((psi_series(s) - reference).abs() < 1e-15);
        assert_eq!(psi(0.0), 2.0);
        assert!((psi(1.0) - std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn c_t_origin_and_scaling() {
        let g = Grid::new(1, 256, 8.0).unwrap();
        let t = 0.37;
        let c = c_t_multiplier(&g, t, 1.2).unwrap();
        assert!((c.values()[0] - 2.0 / (t * t)).abs() < 1e-12);
        assert!(c.values().iter().all(|v| *v > 0.0));
        assert!(c_t_multiplier(&g, 0.0, 1.0).is_err());
        for theta in [0.5, 1.0, 1.7, 2.0] {
            for j in 1..=3 {
                let scale = 2f64.powf(theta * j as f64);
                for xi in [0.3, 1.0, 4.2, 17.0] {
                    let lhs = c_t_value(xi, t / scale, theta);
                    let rhs = scale * scale * c_t_value(xi / 2f64.powi(j), t, theta);
                    assert!((lhs - rhs).abs() / rhs < 1e-12);
                }
            }
        }
    }

    #[test]
    fn multiplier_rejects_foreign_grid() {
        let m = fractional_symbol(&grid(), 1.0).unwrap();
        let other = SpectralField::new(
            Grid::new(1, 32, 4.0).unwrap(),
            vec![Complex64::new(0.0, 0.0); 32],
        )
        .unwrap();
        assert!(matches!(m.apply(&other), Err(Error::GridMismatch)));
    }
}
