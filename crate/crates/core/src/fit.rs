//! Least-squares power-law fits in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `log y = intercept + slope log x`, with the RMS of the log residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

/// Fits through the points with `x > 0` and `y > 0`; needs at least `min_points` of them.
pub fn loglog_fit(xs: &[f64], ys: &[f64], min_points: usize) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < min_points.max(2) {
        return Err(Error::Insufficient(format!("{} usable points, need {}", pts.len(), min_points.max(2))));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(PowerFit { slope, intercept, residual, points: pts.len() })
}

/// Fits with residual above this are inconclusive.
pub const INCONCLUSIVE_RESIDUAL: f64 = 0.2;

impl PowerFit {
    pub fn conclusive(&self) -> bool {
        self.residual <= INCONCLUSIVE_RESIDUAL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs: Vec<f64> = (1..10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x.powf(-1.7)).collect();
        let fit = loglog_fit(&xs, &ys, 4).unwrap();
        assert!((fit.slope + 1.7).abs() < 1e-12);
        assert!((fit.intercept - 2.5f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(fit.conclusive());
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(loglog_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0], 3), Err(Error::Insufficient(_))));
    }
}
