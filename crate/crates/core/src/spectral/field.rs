use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Relative Hermitian defect above which a spectrum is rejected.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

/// Real samples on the spatial lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    samples: Vec<f64>,
}

/// Fourier coefficients of a real function or distribution on the box.
///
/// Normalised so that `f(x) = sum_k c_k exp(i xi_k . x)`; the constant
/// function 1 has `c_0 = 1`, and the Dirac mass has `c_k = 1 / (2L)^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl PhysicalField {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, samples: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, samples: vec![value; grid.len()] }
    }

    /// Sample `f` at every lattice position. Unused trailing coordinates are zero.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let samples = (0..grid.len()).map(|flat| f(&grid.position(flat))).collect();
        Self { grid, samples }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, samples: self.samples.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, samples })
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Riemann sum of the samples with cell-volume weights.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `(int |f|^p)^{1/p}` over the box, or the sup norm for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let sum: f64 = self.samples.iter().map(|v| v.abs().powf(p)).sum();
        (sum * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn to_spectral(&self) -> SpectralField {
        forward_transform(self)
    }
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at a signed wavenumber vector.
    pub fn coeff_at(&self, k: &[i64]) -> Complex64 {
        let idx: Vec<usize> = k.iter().map(|&ki| self.grid.index_of_wavenumber(ki)).collect();
        self.coeffs[self.grid.flatten(&idx)]
    }

    pub fn set_coeff_at(&mut self, k: &[i64], value: Complex64) {
        let idx: Vec<usize> = k.iter().map(|&ki| self.grid.index_of_wavenumber(ki)).collect();
        let flat = self.grid.flatten(&idx);
        self.coeffs[flat] = value;
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, coeffs })
    }

    /// Periodic convolution `int g(y) f(x - y) dy` over the box.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let volume = self.grid.box_volume();
        self.zip_with(other, |a, b| a * b * volume)
    }

    /// Multiply coefficient-wise by a real lattice array.
    pub fn multiply(&self, multiplier: &[f64]) -> Self {
        debug_assert_eq!(multiplier.len(), self.coeffs.len());
        let coeffs = self.coeffs.iter().zip(multiplier).map(|(c, m)| c * *m).collect();
        Self { grid: self.grid, coeffs }
    }

    /// Zero every mode outside the per-axis 2/3 band.
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let grid = self.grid;
        for (flat, c) in self.coeffs.iter_mut().enumerate() {
            if !grid.is_dealiased(flat) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Largest `|c(-k) - conj(c(k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let defect = (0..self.coeffs.len()).fold(0.0f64, |m, flat| {
            let partner = self.grid.conjugate_index(flat);
            m.max((self.coeffs[partner] - self.coeffs[flat].conj()).norm())
        });
        defect / scale
    }

    /// Replace the spectrum by its Hermitian part `(c(k) + conj(c(-k))) / 2`.
    pub fn symmetrized(&self) -> Self {
        let coeffs = (0..self.coeffs.len())
            .map(|flat| {
                let partner = self.grid.conjugate_index(flat);
                (self.coeffs[flat] + self.coeffs[partner].conj()) * 0.5
            })
            .collect();
        Self { grid: self.grid, coeffs }
    }

    /// Box pairing `int f g dx`, exact for band-limited data.
    pub fn pairing(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let sum: Complex64 = (0..self.coeffs.len())
            .map(|flat| self.coeffs[flat] * other.coeffs[self.grid.conjugate_index(flat)])
            .sum();
        Ok(sum.re * self.grid.box_volume())
    }

    pub fn to_physical(&self) -> Result<PhysicalField> {
        inverse_transform(self)
    }
}

fn fft_plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((len, direction == FftDirection::Forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(len, direction))
        .clone()
}

/// In-place unnormalised FFT along every axis of a row-major cube.
fn fft_nd(grid: &Grid, data: &mut [Complex64], direction: FftDirection) {
    let m = grid.points();
    let plan = fft_plan(m, direction);
    let total = data.len();
    for axis in 0..grid.dim() {
        let stride = m.pow((grid.dim() - 1 - axis) as u32);
        if stride == 1 {
            plan.process(data);
            continue;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let block = stride * m;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                plan.process(&mut line);
                for (i, value) in line.iter().enumerate() {
                    data[base + i * stride] = *value;
                }
            }
        }
    }
}

/// `(-1)^{sum of indices}`: the phase from placing the first sample at `-L`.
fn checkerboard_sign(grid: &Grid, flat: usize) -> f64 {
    let idx = grid.unflatten(flat);
    let parity: usize = idx.iter().take(grid.dim()).sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Discrete Fourier coefficients `c_k = M^{-N} sum_j f(x_j) exp(-i xi_k . x_j)`.
pub fn forward_transform(field: &PhysicalField) -> SpectralField {
    let grid = *field.grid();
    let mut data: Vec<Complex64> = field.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&grid, &mut data, FftDirection::Forward);
    let norm = 1.0 / grid.len() as f64;
    for (flat, c) in data.iter_mut().enumerate() {
        *c *= checkerboard_sign(&grid, flat) * norm;
    }
    // Enforce exact Hermitian symmetry so that later sums and differences stay real.
    SpectralField { grid, coeffs: data }.symmetrized()
}

/// Real samples `f(x_j) = sum_k c_k exp(i xi_k . x_j)`; rejects non-Hermitian input.
pub fn inverse_transform(field: &SpectralField) -> Result<PhysicalField> {
    let defect = field.hermitian_defect();
    if defect > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(defect));
    }
    let grid = *field.grid();
    let mut data: Vec<Complex64> = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(flat, c)| c * checkerboard_sign(&grid, flat))
        .collect();
    fft_nd(&grid, &mut data, FftDirection::Inverse);
    Ok(PhysicalField { grid, samples: data.into_iter().map(|c| c.re).collect() })
}
