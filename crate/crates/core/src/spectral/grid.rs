use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic lattice on the box `[-L, L)^N`.
///
/// Physical samples sit at `x_i = -L + i h` along each axis, so the origin is
/// always the lattice point `i = M/2`. Spectral coefficients are stored in FFT
/// order: index `i` carries wavenumber `k = i` for `i < M/2` and `k = i - M`
/// otherwise, with angular frequency `xi_k = (pi / L) k`. Multi-dimensional
/// data is row-major with axis 0 slowest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {points}"
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!("half length must be positive, got {half_length}")));
        }
        Ok(Self { dim, points, half_length })
    }

    /// Default resolution for the given dimension (L = 16, M = 4096 in 1D; L = 8, M = 512 in 2D).
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            1 => Self::new(1, 4096, 16.0),
            2 => Self::new(2, 512, 8.0),
            3 => Self::new(3, 64, 4.0),
            _ => Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_length).powi(self.dim as i32)
    }

    /// Total number of lattice sites, `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same box with `M` doubled.
    pub fn refined(&self) -> Self {
        Self { points: self.points * 2, ..*self }
    }

    pub fn with_points(&self, points: usize) -> Result<Self> {
        Self::new(self.dim, points, self.half_length)
    }

    /// Fundamental frequency `pi / L`.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_length
    }

    /// Signed wavenumber carried by FFT index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let m = self.points as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// FFT index holding signed wavenumber `k` (taken modulo `M`).
    pub fn index_of_wavenumber(&self, k: i64) -> usize {
        k.rem_euclid(self.points as i64) as usize
    }

    /// Split a flat row-major index into per-axis indices.
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.points + i)
    }

    /// Physical coordinate of lattice index `i` along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    /// Physical position of a flat lattice site (unused trailing axes are zero).
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(idx[axis]);
        }
        x
    }

    /// Angular frequency vector at a flat FFT-ordered index.
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let step = self.frequency_step();
        let mut xi = [0.0; 3];
        for axis in 0..self.dim {
            xi[axis] = step * self.wavenumber(idx[axis]) as f64;
        }
        xi
    }

    /// `|xi|` over the whole lattice, FFT-ordered.
    pub fn xi_norms(&self) -> Vec<f64> {
        (0..self.len())
            .map(|flat| {
                let xi = self.xi(flat);
                xi.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect()
    }

    /// One component of `xi` over the whole lattice, FFT-ordered.
    pub fn xi_component(&self, axis: usize) -> Vec<f64> {
        (0..self.len()).map(|flat| self.xi(flat)[axis]).collect()
    }

    /// Largest retained |k| per axis under the 2/3 rule.
    pub fn dealias_wavenumber(&self) -> i64 {
        (self.points / 3) as i64
    }

    /// Radius of the largest ball contained in the dealiased band, `(2/3)(pi/L)(M/2)`.
    pub fn dealias_radius(&self) -> f64 {
        2.0 / 3.0 * self.frequency_step() * (self.points / 2) as f64
    }

    /// Whether a flat FFT index survives the per-axis 2/3 truncation.
    pub fn is_dealiased(&self, flat: usize) -> bool {
        let idx = self.unflatten(flat);
        let kmax = self.dealias_wavenumber();
        (0..self.dim).all(|axis| self.wavenumber(idx[axis]).abs() <= kmax)
    }

    /// Flat index of the Hermitian partner `-k` of a flat FFT index.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let idx = self.unflatten(flat);
        let mut out = [0usize; 3];
        for axis in 0..self.dim {
            out[axis] = (self.points - idx[axis]) % self.points;
        }
        self.flatten(&out)
    }

    /// Flat index of the physical origin.
    pub fn origin_index(&self) -> usize {
        self.flatten(&[self.points / 2; 3])
    }
}

/// Physics bundle `(theta, gamma, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: f64,
    pub gamma: f64,
    pub dim: usize,
}

impl ModelParams {
    pub fn new(theta: f64, gamma: f64, dim: usize) -> Result<Self> {
        let params = Self { theta, gamma, dim };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidParameter(format!("dimension {} not in 1..=3", self.dim)));
        }
        Ok(())
    }

    /// Serrin exponent `N / (N - theta)`; infinite when `N <= theta`.
    pub fn serrin_exponent(&self) -> f64 {
        let n = self.dim as f64;
        if n > self.theta {
            n / (n - self.theta)
        } else {
            f64::INFINITY
        }
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("theta must lie in (0, 2], got {theta}")))
    }
}
