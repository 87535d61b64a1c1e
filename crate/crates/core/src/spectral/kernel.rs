//! Closed-form periodised heat (theta = 2) and Poisson (theta = 1) kernels,
//! used as independent oracles for the spectral semigroup.

use std::f64::consts::PI;

use super::field::PhysicalField;
use super::grid::Grid;
use crate::error::{Error, Result};

const IMAGE_TAIL: f64 = 1e-14;

/// One-dimensional Gaussian `(4 pi t)^{-1/2} exp(-x^2 / 4t)` summed over images `x + 2Ln`.
pub fn periodized_gaussian_1d(x: f64, t: f64, half_length: f64) -> f64 {
    let period = 2.0 * half_length;
    let norm = (4.0 * PI * t).powf(-0.5);
    let term = |y: f64| norm * (-y * y / (4.0 * t)).exp();
    let mut sum = term(x);
    let mut n = 1.0;
    loop {
        let right = term(x + n * period);
        let left = term(x - n * period);
        sum += right + left;
        // Terms decay monotonically once the image leaves the box.
        if n * period > x.abs() + period && right + left < IMAGE_TAIL {
            break;
        }
        n += 1.0;
    }
    sum
}

/// One-dimensional Poisson kernel `t / (pi (t^2 + x^2))` summed over all images, in closed form.
pub fn periodized_poisson_1d(x: f64, t: f64, half_length: f64) -> f64 {
    let a = PI / half_length;
    (a * t).sinh() / (2.0 * half_length * ((a * t).cosh() - (a * x).cos()))
}

/// Samples of the periodised kernel of `S(t)` for `theta in {1, 2}`.
///
/// The Gaussian is separable and available in every dimension; the Poisson
/// kernel is provided in one dimension, where the image sum has a closed form.
pub fn closed_form_kernel(grid: &Grid, t: f64, theta: f64) -> Result<PhysicalField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("kernel time must be positive, got {t}")));
    }
    let l = grid.half_length();
    if theta == 2.0 {
        let axis: Vec<f64> =
            (0..grid.points()).map(|i| periodized_gaussian_1d(grid.coordinate(i), t, l)).collect();
        let samples = (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                (0..grid.dim()).map(|a| axis[idx[a]]).product()
            })
            .collect();
        PhysicalField::new(*grid, samples)
    } else if theta == 1.0 {
        if grid.dim() != 1 {
            return Err(Error::Unsupported(
                "closed-form periodised Poisson kernel is only available for N = 1".into(),
            ));
        }
        Ok(PhysicalField::from_fn(*grid, |x| periodized_poisson_1d(x[0], t, l)))
    } else {
        Err(Error::Unsupported(format!("no closed-form kernel for theta = {theta}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_peak_value() {
        let v = periodized_gaussian_1d(0.0, 0.1, 16.0);
        assert!((v - 0.8920620580763856).abs() < 1e-12);
    }

    #[test]
    fn poisson_peak_value() {
        // Whole-line value 1/pi plus images of size O(t / L^2).
        let v = periodized_poisson_1d(0.0, 1.0, 1e4);
        assert!((v - 1.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn poisson_closed_form_matches_image_sum() {
        let (t, l, x) = (0.5, 3.0, 0.7);
        let mut sum = 0.0;
        for n in -200_000i64..=200_000 {
            let y = x + 2.0 * l * n as f64;
            sum += t / (PI * (t * t + y * y));
        }
        // Remaining tail is about 2 t / (pi (2L)^2 200000).
        assert!((sum - periodized_poisson_1d(x, t, l)).abs() < 1e-7);
    }

    #[test]
    fn gaussian_mass_is_one() {
        let g = Grid::new(1, 2048, 16.0).unwrap();
        let k = closed_form_kernel(&g, 0.01, 2.0).unwrap();
        assert!((k.integral() - 1.0).abs() < 1e-12);
        let g2 = Grid::new(2, 128, 4.0).unwrap();
        let k2 = closed_form_kernel(&g2, 0.05, 2.0).unwrap();
        assert!((k2.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_theta() {
        let g = Grid::new(1, 64, 4.0).unwrap();
        assert!(matches!(closed_form_kernel(&g, 0.1, 1.5), Err(Error::Unsupported(_))));
        let g2 = Grid::new(2, 32, 4.0).unwrap();
        assert!(matches!(closed_form_kernel(&g2, 0.1, 1.0), Err(Error::Unsupported(_))));
        assert!(closed_form_kernel(&g, 0.0, 2.0).is_err());
    }
}
