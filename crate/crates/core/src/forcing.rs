//! Example forcing terms: Dirac masses, their derivatives, truncated
//! homogeneous profiles, smooth bumps and seeded band-limited noise.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid, PhysicalField, SpectralField};

/// Shape of a smooth sampled forcing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-|x|^2 / w^2)`
    Gaussian,
    /// `exp(1 - 1 / (1 - |x|^2 / w^2))` inside `|x| < w`
    Bump,
    /// `chi_{|x| < w}`
    Indicator,
}

/// One forcing term. Terms in a config are summed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    Delta {
        amplitude: f64,
    },
    /// `amplitude * d/dx_axis delta`, with `axis` counted from 1.
    DeltaDerivative {
        amplitude: f64,
        axis: usize,
    },
    /// `amplitude * sum_j |x - x_j|^{-exponent} chi_{B(x_j, radius)}`, clamped at `cutoff`.
    Homogeneous {
        amplitude: f64,
        exponent: f64,
        centers: Vec<Vec<f64>>,
        #[serde(default)]
        cutoff: Option<f64>,
        #[serde(default = "unit_radius")]
        radius: f64,
    },
    LpFunction {
        amplitude: f64,
        profile: Profile,
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// Hermitian noise with `|c_k| ~ |xi|^slope` on `2^{band[0]} <= |xi| < 2^{band[1] + 1}`, unit RMS before scaling.
    RandomBandlimited {
        amplitude: f64,
        seed: u64,
        #[serde(default)]
        slope: f64,
        band: [i32; 2],
    },
}

fn unit_radius() -> f64 {
    1.0
}

impl ForcingSpec {
    pub fn amplitude(&self) -> f64 {
        match self {
            ForcingSpec::Delta { amplitude }
            | ForcingSpec::DeltaDerivative { amplitude, .. }
            | ForcingSpec::Homogeneous { amplitude, .. }
            | ForcingSpec::LpFunction { amplitude, .. }
            | ForcingSpec::RandomBandlimited { amplitude, .. } => *amplitude,
        }
    }

    pub fn with_amplitude(&self, value: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ForcingSpec::Delta { amplitude }
            | ForcingSpec::DeltaDerivative { amplitude, .. }
            | ForcingSpec::Homogeneous { amplitude, .. }
            | ForcingSpec::LpFunction { amplitude, .. }
            | ForcingSpec::RandomBandlimited { amplitude, .. } => *amplitude = value,
        }
        out
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ForcingSpec::Delta { .. } => "delta",
            ForcingSpec::DeltaDerivative { .. } => "delta_derivative",
            ForcingSpec::Homogeneous { .. } => "homogeneous",
            ForcingSpec::LpFunction { .. } => "lp_function",
            ForcingSpec::RandomBandlimited { .. } => "random_bandlimited",
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<SpectralField> {
        if !self.amplitude().is_finite() {
            return Err(Error::InvalidParameter("forcing amplitude must be finite".into()));
        }
        match self {
            ForcingSpec::Delta { amplitude } => Ok(make_delta(grid, *amplitude)),
            ForcingSpec::DeltaDerivative { amplitude, axis } => make_delta_derivative(grid, *axis, *amplitude),
            ForcingSpec::Homogeneous { amplitude, exponent, centers, cutoff, radius } => {
                let centers = centers.iter().map(|c| point(grid, c)).collect::<Result<Vec<_>>>()?;
                make_homogeneous_with_radius(grid, *exponent, *amplitude, &centers, cutoff.unwrap_or(grid.spacing()), *radius)
            }
            ForcingSpec::LpFunction { amplitude, profile, width, center } => {
                make_profile(grid, *profile, *width, point(grid, center)?, *amplitude)
            }
            ForcingSpec::RandomBandlimited { amplitude, seed, slope, band } => {
                Ok(make_random_bandlimited(grid, *seed, *slope, (band[0], band[1]))?.scale(*amplitude))
            }
        }
    }

    /// `mu_lambda(x) = lambda^kappa mu(lambda x)`, expressed as another spec.
    pub fn dilated(&self, lambda: f64, kappa: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("dilation must be positive, got {lambda}")));
        }
        let shrink = |v: &[f64]| v.iter().map(|x| x / lambda).collect::<Vec<f64>>();
        Ok(match self {
            ForcingSpec::Delta { amplitude } => {
                // N is fixed by the grid; the delta scaling is applied in `dilated_on`
                ForcingSpec::Delta { amplitude: amplitude * lambda.powf(kappa) }
            }
            ForcingSpec::DeltaDerivative { amplitude, axis } => {
                ForcingSpec::DeltaDerivative { amplitude: amplitude * lambda.powf(kappa - 1.0), axis: *axis }
            }
            ForcingSpec::Homogeneous { amplitude, exponent, centers, cutoff, radius } => ForcingSpec::Homogeneous {
                amplitude: amplitude * lambda.powf(kappa - exponent),
                exponent: *exponent,
                centers: centers.iter().map(|c| shrink(c)).collect(),
                cutoff: cutoff.map(|c| c / lambda),
                radius: radius / lambda,
            },
            ForcingSpec::LpFunction { amplitude, profile, width, center } => ForcingSpec::LpFunction {
                amplitude: amplitude * lambda.powf(kappa),
                profile: *profile,
                width: width / lambda,
                center: shrink(center),
            },
            ForcingSpec::RandomBandlimited { .. } => {
                return Err(Error::Unsupported("band-limited noise has no dilation family".into()))
            }
        })
    }

    /// [`ForcingSpec::dilated`] including the `lambda^{-N}` Jacobian carried by point masses.
    pub fn dilated_on(&self, grid: &Grid, lambda: f64, kappa: f64) -> Result<Self> {
        let out = self.dilated(lambda, kappa)?;
        let n = grid.dim() as f64;
        Ok(match out {
            ForcingSpec::Delta { amplitude } => ForcingSpec::Delta { amplitude: amplitude * lambda.powf(-n) },
            ForcingSpec::DeltaDerivative { amplitude, axis } => {
                ForcingSpec::DeltaDerivative { amplitude: amplitude * lambda.powf(-n), axis }
            }
            other => other,
        })
    }
}

/// Exponent `gamma theta / (gamma - 1)` of the scale-invariant dilation.
pub fn scaling_exponent(theta: f64, gamma: f64) -> f64 {
    gamma * theta / (gamma - 1.0)
}

/// Sum of several forcing terms.
pub fn build_forcing(grid: &Grid, terms: &[ForcingSpec]) -> Result<SpectralField> {
    let mut total = SpectralField::zeros(*grid);
    for term in terms {
        total = total.add(&term.build(grid)?)?;
    }
    Ok(total)
}

fn point(grid: &Grid, c: &[f64]) -> Result<[f64; 3]> {
    if c.is_empty() {
        return Ok([0.0; 3]);
    }
    if c.len() != grid.dim() {
        return Err(Error::InvalidParameter(format!("point {c:?} does not have {} coordinates", grid.dim())));
    }
    let mut out = [0.0; 3];
    out[..c.len()].copy_from_slice(c);
    Ok(out)
}

/// Distance on the periodic box.
pub fn periodic_distance(grid: &Grid, x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let period = 2.0 * grid.half_length();
    (0..grid.dim())
        .map(|a| {
            let d = (x[a] - y[a]).rem_euclid(period);
            let d = d.min(period - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `mass * delta`: every coefficient equals `mass / (2L)^N`.
pub fn make_delta(grid: &Grid, mass: f64) -> SpectralField {
    let c = mass / grid.box_volume();
    SpectralField::new(*grid, vec![Complex64::new(c, 0.0); grid.len()]).expect("lattice-sized")
}

/// `mass * d/dx_axis delta`, `axis` in `1..=N`. The Nyquist plane along `axis` is zeroed.
pub fn make_delta_derivative(grid: &Grid, axis: usize, mass: f64) -> Result<SpectralField> {
    if !(1..=grid.dim()).contains(&axis) {
        return Err(Error::InvalidParameter(format!("axis {axis} outside 1..={}", grid.dim())));
    }
    let a = axis - 1;
    let c = mass / grid.box_volume();
    let nyquist = -(grid.points() as i64) / 2;
    let coeffs = (0..grid.len())
        .map(|flat| {
            let idx = grid.unflatten(flat);
            if grid.wavenumber(idx[a]) == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, grid.xi(flat)[a] * c)
            }
        })
        .collect();
    SpectralField::new(*grid, coeffs)
}

/// `c * sum_j |x - x_j|^{-a} chi_{B(x_j, 1)}`, with `|x - x_j|` clamped below by `cutoff`.
pub fn make_homogeneous(grid: &Grid, a: f64, c: f64, centers: &[[f64; 3]], cutoff: f64) -> Result<SpectralField> {
    make_homogeneous_with_radius(grid, a, c, centers, cutoff, 1.0)
}

pub fn make_homogeneous_with_radius(
    grid: &Grid,
    a: f64,
    c: f64,
    centers: &[[f64; 3]],
    cutoff: f64,
    radius: f64,
) -> Result<SpectralField> {
    Ok(homogeneous_samples(grid, a, c, centers, cutoff, radius)?.to_spectral())
}

/// Physical samples of the truncated homogeneous profile.
pub fn homogeneous_samples(
    grid: &Grid,
    a: f64,
    c: f64,
    centers: &[[f64; 3]],
    cutoff: f64,
    radius: f64,
) -> Result<PhysicalField> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("homogeneous exponent must be positive, got {a}")));
    }
    if cutoff < grid.spacing() * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!("cutoff {cutoff} is below the lattice spacing {}", grid.spacing())));
    }
    if !(radius > 0.0 && radius <= grid.half_length()) {
        return Err(Error::InvalidParameter(format!("ball radius {radius} must lie in (0, L]")));
    }
    if centers.is_empty() {
        return Err(Error::InvalidParameter("homogeneous forcing needs at least one center".into()));
    }
    for (i, x) in centers.iter().enumerate() {
        for y in &centers[i + 1..] {
            if periodic_distance(grid, x, y) <= radius {
                return Err(Error::InvalidParameter(format!("centers {x:?} and {y:?} are not separated by more than {radius}")));
            }
        }
    }
    let centers = centers.to_vec();
    let grid = *grid;
    Ok(PhysicalField::from_fn(grid, move |x| {
        c * centers
            .iter()
            .map(|z| {
                let d = periodic_distance(&grid, x, z);
                if d < radius {
                    d.max(cutoff).powf(-a)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
    }))
}

pub fn make_profile(grid: &Grid, profile: Profile, width: f64, center: [f64; 3], amplitude: f64) -> Result<SpectralField> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter(format!("profile width must be positive, got {width}")));
    }
    let g = *grid;
    Ok(PhysicalField::from_fn(g, move |x| {
        let r = periodic_distance(&g, x, &center) / width;
        amplitude
            * match profile {
                Profile::Gaussian => (-r * r).exp(),
                Profile::Bump if r < 1.0 => (1.0 - 1.0 / (1.0 - r * r)).exp(),
                Profile::Bump => 0.0,
                Profile::Indicator if r < 1.0 => 1.0,
                Profile::Indicator => 0.0,
            }
    })
    .to_spectral())
}

/// Seeded Hermitian noise on the dyadic band `2^{lo} <= |xi| < 2^{hi + 1}` (all of `|xi| < 2^{hi+1}`
/// when `lo <= 0`), normalised to unit RMS.
///
/// Random draws are made over wavenumbers in a fixed box that depends only on `L`
/// and the band, so refining `M` reproduces the same function.
pub fn make_random_bandlimited(grid: &Grid, seed: u64, slope: f64, band: (i32, i32)) -> Result<SpectralField> {
    let (lo, hi) = band;
    let mut out = SpectralField::zeros(*grid);
    if hi < lo {
        return Ok(out);
    }
    let upper = 2f64.powi(hi + 1);
    let lower = if lo <= 0 { 0.0 } else { 2f64.powi(lo) };
    if upper > grid.dealias_radius() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "band reaches |xi| = {upper}, beyond the dealiased radius {}",
            grid.dealias_radius()
        )));
    }
    let step = grid.frequency_step();
    let kmax = (upper / step).ceil() as i64;
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k = [-kmax; 3];
    for c in k.iter_mut().skip(dim) {
        *c = 0;
    }
    loop {
        // canonical half space: first nonzero component positive, plus the origin
        let first = k[..dim].iter().find(|v| **v != 0).copied();
        if first.is_none_or(|v| v > 0) {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let r = step * (k[..dim].iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt();
            if r >= lower && r < upper {
                let mag = if r == 0.0 { 1.0 } else { r.powf(slope) };
                let value = if first.is_none() { Complex64::new(re * mag, 0.0) } else { Complex64::new(re, im) * mag };
                out.set_coeff_at(&k[..dim], value);
                if first.is_some() {
                    let neg: Vec<i64> = k[..dim].iter().map(|v| -v).collect();
                    out.set_coeff_at(&neg, value.conj());
                }
            }
        }
        // lexicographic increment over [-kmax, kmax]^dim
        let mut axis = dim;
        loop {
            if axis == 0 {
                let rms = out.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                return Ok(if rms > 0.0 { out.scale(1.0 / rms) } else { out });
            }
            axis -= 1;
            if k[axis] < kmax {
                k[axis] += 1;
                break;
            }
            k[axis] = -kmax;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::{lorentz_norm, ul_weak_norm, NormSpec};

    fn grid() -> Grid {
        Grid::new(1, 4096, 16.0).unwrap()
    }

    #[test]
    fn delta_coefficients_and_peak() {
        let g = grid();
        let d = make_delta(&g, 1.0);
        assert_eq!(d.coeff_at(&[0]).re, 1.0 / 32.0);
        let x = d.to_physical().unwrap();
        assert!((x.samples()[g.origin_index()] - 1.0 / g.spacing()).abs() < 1e-9 / g.spacing());
        assert!((x.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_derivative_pairing() {
        let g = grid();
        let d = make_delta_derivative(&g, 1, 1.0).unwrap();
        assert_eq!(d.coeff_at(&[0]), Complex64::new(0.0, 0.0));
        assert!(d.hermitian_defect() < 1e-15);
        let psi = |x: f64| (-(x - 0.3) * (x - 0.3)).exp() * (1.0 + 0.5 * x);
        let test = PhysicalField::from_fn(g, |x| psi(x[0])).to_spectral();
        let pairing = d.pairing(&test).unwrap();
        let e = 1e-5;
        let fd = (psi(e) - psi(-e)) / (2.0 * e);
        assert!((pairing + fd).abs() < 1e-8, "pairing={pairing} fd={fd}");
        assert!(make_delta_derivative(&g, 2, 1.0).is_err());
        assert!(make_delta_derivative(&g, 0, 1.0).is_err());
    }

    #[test]
    fn homogeneous_zero_amplitude() {
        let g = grid();
        let f = make_homogeneous(&g, 0.5, 0.0, &[[0.0; 3]], g.spacing()).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn homogeneous_rejects_overlap_and_small_cutoff() {
        let g = grid();
        assert!(make_homogeneous(&g, 0.5, 1.0, &[[0.0; 3], [0.9, 0.0, 0.0]], 0.1).is_err());
        assert!(make_homogeneous(&g, 0.5, 1.0, &[[0.0; 3]], g.spacing() / 2.0).is_err());
        // periodic wrap: -15.8 and 15.7 are 0.5 apart
        assert!(make_homogeneous(&g, 0.5, 1.0, &[[-15.8, 0.0, 0.0], [15.7, 0.0, 0.0]], 0.1).is_err());
    }

    #[test]
    fn homogeneous_weak_norm_approaches_line_value() {
        let g = grid();
        let p = 3.0;
        for cutoff in [0.1, 0.05] {
            let f = homogeneous_samples(&g, 1.0 / p, 1.0, &[[0.0; 3]], cutoff, 1.0).unwrap();
            let n = ul_weak_norm(&f, p).unwrap();
            // clamped profile: (2 + h / cutoff)^{1/p} at the clamp level
            assert!((n / 2f64.powf(1.0 / p) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn multi_bump_weak_norm_matches_single() {
        let g = grid();
        let one = homogeneous_samples(&g, 0.4, 1.0, &[[0.0; 3]], 0.05, 1.0).unwrap();
        let many = homogeneous_samples(&g, 0.4, 1.0, &[[-8.0, 0.0, 0.0], [0.0; 3], [8.0, 0.0, 0.0]], 0.05, 1.0).unwrap();
        let a = ul_weak_norm(&one, 2.0).unwrap();
        let b = ul_weak_norm(&many, 2.0).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(lorentz_norm(&many, &NormSpec::weak(2.0).unwrap()) > a);
    }

    #[test]
    fn random_field_properties() {
        let g = grid();
        let a = make_random_bandlimited(&g, 7, -0.5, (1, 5)).unwrap();
        let b = make_random_bandlimited(&g, 7, -0.5, (1, 5)).unwrap();
        assert_eq!(a, b);
        assert!(a.hermitian_defect() < 1e-15);
        let rms = a.to_physical().unwrap().lp_norm(2.0) / g.box_volume().sqrt();
        assert!((rms - 1.0).abs() < 1e-12);
        for (flat, c) in a.coeffs().iter().enumerate() {
            let r = g.xi_norms()[flat];
            if r < 2.0 || r >= 64.0 {
                assert_eq!(c.norm(), 0.0);
            }
        }
        assert!(make_random_bandlimited(&g, 7, 0.0, (3, 2)).unwrap().is_zero());
        assert!(make_random_bandlimited(&g, 7, 0.0, (1, 8)).is_err());
    }

    #[test]
    fn random_field_is_resolution_independent() {
        let coarse = Grid::new(1, 1024, 16.0).unwrap();
        let fine = coarse.refined();
        let a = make_random_bandlimited(&coarse, 11, 0.0, (0, 5)).unwrap();
        let b = make_random_bandlimited(&fine, 11, 0.0, (0, 5)).unwrap();
        for k in -60..=60 {
            assert_eq!(a.coeff_at(&[k]), b.coeff_at(&[k]));
        }
        let g2 = Grid::new(2, 128, 8.0).unwrap();
        let c = make_random_bandlimited(&g2, 3, 0.0, (0, 3)).unwrap();
        let d = make_random_bandlimited(&g2.refined(), 3, 0.0, (0, 3)).unwrap();
        assert_eq!(c.coeff_at(&[3, -5]), d.coeff_at(&[3, -5]));
    }

    #[test]
    fn random_field_kurtosis() {
        let g = grid();
        let mut kurt = 0.0;
        for seed in 0..20 {
            let x = make_random_bandlimited(&g, seed, 0.0, (0, 6)).unwrap().to_physical().unwrap();
            let n = x.samples().len() as f64;
            let m2 = x.samples().iter().map(|v| v * v).sum::<f64>() / n;
            let m4 = x.samples().iter().map(|v| v.powi(4)).sum::<f64>() / n;
            kurt += m4 / (m2 * m2) / 20.0;
        }
        assert!((kurt - 3.0).abs() < 0.5, "kurtosis {kurt}");
    }

    #[test]
    fn spec_round_trip_and_sum() {
        let g = grid();
        let specs: Vec<ForcingSpec> = serde_json::from_str(
            r#"[{"kind":"delta","amplitude":0.5},
                {"kind":"lp_function","amplitude":1.0,"profile":"gaussian","width":0.5},
                {"kind":"homogeneous","amplitude":1.0,"exponent":0.3,"centers":[[2.0]]}]"#,
        )
        .unwrap();
        let total = build_forcing(&g, &specs).unwrap();
        // lattice sums lose O(h^0.7) at the clamped singularity and the excluded ball edges
        assert!((total.coeff_at(&[0]).re * g.box_volume() - (0.5 + 0.5 * std::f64::consts::PI.sqrt() + 2.0 / 0.7)).abs() < 0.05);
        assert!(serde_json::from_str::<ForcingSpec>(r#"{"kind":"delta","amplitude":1,"mass":2}"#).is_err());
    }

    #[test]
    fn dilation_of_profiles() {
        let g = grid();
        let kappa = scaling_exponent(2.0, 2.0);
        let spec = ForcingSpec::LpFunction { amplitude: 1.0, profile: Profile::Gaussian, width: 1.0, center: vec![] };
        let half = spec.dilated_on(&g, 0.5, kappa).unwrap();
        let direct = PhysicalField::from_fn(g, |x| 0.5f64.powf(kappa) * (-(0.5 * x[0]).powi(2)).exp());
        let built = half.build(&g).unwrap().to_physical().unwrap();
        let diff = built.zip_map(&direct, |a, b| a - b).unwrap().max_abs();
        assert!(diff < 1e-12);
        let d = ForcingSpec::Delta { amplitude: 1.0 }.dilated_on(&g, 0.5, kappa).unwrap();
        assert!((d.amplitude() - 0.5f64.powf(kappa - 1.0)).abs() < 1e-15);
    }
}
