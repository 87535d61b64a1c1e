//! Littlewood-Paley blocks and Besov / Besov-Lorentz norms on the lattice.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{uniformly_local_lorentz_norm, CenterLattice, Index, NormSpec};
use crate::spectral::{Grid, SpectralField};

const PLATEAU: f64 = 1.5;
const SUPPORT: f64 = 5.0 / 3.0;

fn smooth_h(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `s <= 0`, 1 for `s >= 1`.
fn smooth_step(s: f64) -> f64 {
    let a = smooth_h(s);
    let b = smooth_h(1.0 - s);
    a / (a + b)
}

/// Cutoff profile: 1 on `[0, 3/2]`, 0 on `[5/3, inf)`, smooth in between.
pub fn zeta(t: f64) -> f64 {
    smooth_step((SUPPORT - t) / (SUPPORT - PLATEAU))
}

/// `phi_j(xi) = zeta(2^-j |xi|) - zeta(2^{1-j} |xi|)` for any integer `j`.
pub fn phi(j: i32, xi_norm: f64) -> f64 {
    zeta(xi_norm * 2f64.powi(-j)) - zeta(xi_norm * 2f64.powi(1 - j))
}

/// Sampled dyadic partition. `blocks[0]` holds `phi_(0)`, `blocks[j]` holds `phi_j` for `j >= 1`.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    j_max: usize,
    xi_norms: Vec<f64>,
    blocks: Vec<Vec<f64>>,
}

/// Largest `j` with `supp phi_j` inside the dealiased ball.
pub fn j_max_for(grid: &Grid) -> i64 {
    (grid.dealias_radius() / SUPPORT).log2().floor() as i64
}

pub fn build_partition(grid: &Grid) -> Result<DyadicPartition> {
    let j_max = j_max_for(grid);
    if j_max < 2 {
        return Err(Error::InvalidGrid(format!(
            "lattice resolves only {j_max} dyadic blocks; need at least 2"
        )));
    }
    let j_max = j_max as usize;
    let xi_norms = grid.xi_norms();
    let blocks = (0..=j_max)
        .map(|j| {
            xi_norms
                .iter()
                .map(|&r| if j == 0 { zeta(r) } else { phi(j as i32, r) })
                .collect()
        })
        .collect();
    Ok(DyadicPartition { grid: *grid, j_max, xi_norms, blocks })
}

impl DyadicPartition {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// `phi_(0)` for `j = 0`, else `phi_j`.
    pub fn block(&self, j: usize) -> Result<&[f64]> {
        self.blocks
            .get(j)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidParameter(format!("block {j} outside 0..={}", self.j_max)))
    }

    /// `Phi_(0) = phi_(0) + phi_1` and `Phi_j = phi_{j-1} + phi_j + phi_{j+1}`.
    pub fn widened(&self, j: usize) -> Result<Vec<f64>> {
        self.block(j)?;
        Ok(self
            .xi_norms
            .iter()
            .map(|&r| {
                if j == 0 {
                    zeta(r) + phi(1, r)
                } else {
                    let j = j as i32;
                    phi(j - 1, r) + phi(j, r) + phi(j + 1, r)
                }
            })
            .collect())
    }

    /// `|xi|` below which the retained blocks sum to one.
    pub fn covered_radius(&self) -> f64 {
        PLATEAU * 2f64.powi(self.j_max as i32)
    }

    /// `max |1 - sum_j phi_j|` over lattice frequencies inside the covered radius.
    pub fn unity_defect(&self) -> f64 {
        let cover = self.covered_radius();
        (0..self.grid.len())
            .filter(|&k| self.xi_norms[k] <= cover)
            .map(|k| (1.0 - self.blocks.iter().map(|b| b[k]).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    /// Whether `f` carries energy outside the covered radius, beyond round-off.
    pub fn truncates(&self, f: &SpectralField) -> bool {
        let cover = self.covered_radius();
        let floor = 1e-13 * f.max_abs();
        f.coeffs().iter().zip(&self.xi_norms).any(|(c, &r)| r > cover && c.norm() > floor)
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if f.grid() != &self.grid {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }
}

/// `Delta_j f`.
pub fn lp_block(f: &SpectralField, j: usize, part: &DyadicPartition) -> Result<SpectralField> {
    part.check(f)?;
    Ok(f.multiply(part.block(j)?))
}

/// Indices of a Besov-Lorentz norm `B^s_{(p,q),r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub norm: NormSpec,
    pub r: Index,
    #[serde(default)]
    pub lattice: CenterLattice,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: Index, r: Index) -> Result<Self> {
        let spec = Self { s, norm: NormSpec::new(p, q)?, r, lattice: CenterLattice::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter("Besov smoothness must be finite".into()));
        }
        self.norm.validate()?;
        match self.r {
            Index::Finite(r) if !(r >= 1.0 && r.is_finite()) => {
                Err(Error::InvalidParameter(format!("Besov r must lie in [1, inf], got {r}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNorm {
    pub j: usize,
    pub block_norm: f64,
    pub weighted: f64,
}

/// A finite-range Besov quantity with its block profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovValue {
    pub value: f64,
    pub j_max: usize,
    /// The input has spectral content beyond the last retained block.
    pub truncated: bool,
    pub blocks: Vec<BlockNorm>,
}

impl BesovValue {
    /// CSV with columns `j,block_ul_norm,weighted`.
    pub fn write_profile_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "j,block_ul_norm,weighted")?;
        for b in &self.blocks {
            writeln!(w, "{},{:e},{:e}", b.j, b.block_norm, b.weighted)?;
        }
        Ok(())
    }
}

/// `l^r` norm, summed in descending order of magnitude.
pub fn sequence_norm(terms: &[f64], r: Index) -> f64 {
    match r {
        Index::Infinity => terms.iter().fold(0.0, |m, t| m.max(t.abs())),
        Index::Finite(r) => {
            let mut mags: Vec<f64> = terms.iter().map(|t| t.abs()).collect();
            mags.sort_unstable_by(|a, b| b.total_cmp(a));
            let top = mags.first().copied().unwrap_or(0.0);
            if top == 0.0 {
                return 0.0;
            }
            // normalise by the largest term to keep powers in range
            top * mags.iter().map(|m| (m / top).powf(r)).sum::<f64>().powf(1.0 / r)
        }
    }
}

fn assemble(s: f64, r: Index, norms: Vec<f64>, part: &DyadicPartition, f: &SpectralField) -> BesovValue {
    let blocks: Vec<BlockNorm> = norms
        .into_iter()
        .enumerate()
        .map(|(j, n)| BlockNorm { j, block_norm: n, weighted: 2f64.powf(s * j as f64) * n })
        .collect();
    let weighted: Vec<f64> = blocks.iter().map(|b| b.weighted).collect();
    BesovValue {
        value: sequence_norm(&weighted, r),
        j_max: part.j_max,
        truncated: part.truncates(f),
        blocks,
    }
}

/// `||Delta_j f | L^{p,q}_ul||` for `j = 0..=j_max`.
pub fn block_ul_norms(f: &SpectralField, norm: &NormSpec, lattice: &CenterLattice, part: &DyadicPartition) -> Result<Vec<f64>> {
    part.check(f)?;
    (0..=part.j_max)
        .into_par_iter()
        .map(|j| {
            let block = lp_block(f, j, part)?.to_physical()?;
            uniformly_local_lorentz_norm(&block, norm, lattice)
        })
        .collect()
}

/// `|| {2^{sj} ||Delta_j f | L^{p,q}_ul||}_j | l^r ||` over `j <= j_max`.
pub fn besov_lorentz_norm(f: &SpectralField, spec: &BesovSpec, part: &DyadicPartition) -> Result<BesovValue> {
    spec.validate()?;
    let norms = block_ul_norms(f, &spec.norm, &spec.lattice, part)?;
    Ok(assemble(spec.s, spec.r, norms, part, f))
}

/// Classical inhomogeneous Besov norm `B^s_{p,r}` with global `L^p` block norms, `p in [1, inf]`.
pub fn besov_norm(f: &SpectralField, s: f64, p: Index, r: Index, part: &DyadicPartition) -> Result<BesovValue> {
    part.check(f)?;
    if let Index::Finite(p) = p {
        if p < 1.0 {
            return Err(Error::InvalidParameter(format!("Besov p must lie in [1, inf], got {p}")));
        }
    }
    let norms = (0..=part.j_max)
        .into_par_iter()
        .map(|j| {
            let block = lp_block(f, j, part)?.to_physical()?;
            Ok(match p {
                Index::Infinity => block.max_abs(),
                Index::Finite(p) => block.lp_norm(p),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(assemble(s, r, norms, part, f))
}

/// `sup |Delta_j f| / (2^{jN/p} ||Delta_j f | L^{p,inf}_ul||)`.
pub fn bernstein_check(f: &SpectralField, j: usize, p: f64, part: &DyadicPartition) -> Result<f64> {
    let block = lp_block(f, j, part)?.to_physical()?;
    let sup = block.max_abs();
    if sup == 0.0 {
        return Err(Error::EmptyBlock(j));
    }
    let weak = uniformly_local_lorentz_norm(&block, &NormSpec::weak(p)?, &CenterLattice::default())?;
    let n = f.grid().dim() as f64;
    Ok(sup / (2f64.powf(j as f64 * n / p) * weak))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailValue {
    pub value: f64,
    pub j0: usize,
    pub j_max: usize,
}

/// `sup_{j0 <= j <= j_max} 2^{(eps - theta) j} ||Delta_j f | L^{p_eff,inf}_ul||`.
pub fn tail_seminorm(f: &SpectralField, eps: f64, theta: f64, p_eff: f64, j0: usize, part: &DyadicPartition) -> Result<TailValue> {
    if !(eps > 0.0 && eps < theta) {
        return Err(Error::InvalidParameter(format!("need 0 < eps < theta, got eps={eps}, theta={theta}")));
    }
    if j0 > part.j_max {
        return Err(Error::InvalidParameter(format!("j0 = {j0} exceeds j_max = {}", part.j_max)));
    }
    let spec = NormSpec::weak(p_eff)?;
    let lattice = CenterLattice::default();
    let value = (j0..=part.j_max)
        .into_par_iter()
        .map(|j| {
            let block = lp_block(f, j, part)?.to_physical()?;
            Ok(2f64.powf((eps - theta) * j as f64) * uniformly_local_lorentz_norm(&block, &spec, &lattice)?)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(TailValue { value, j0, j_max: part.j_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PhysicalField;
    use num_complex::Complex64;

    fn grid() -> Grid {
        Grid::new(1, 4096, 16.0).unwrap()
    }

    #[test]
    fn zeta_plateau_and_support() {
        assert_eq!(zeta(1.0), 1.0);
        assert_eq!(zeta(1.5), 1.0);
        assert_eq!(zeta(2.0), 0.0);
        assert_eq!(zeta(5.0 / 3.0), 0.0);
        let mid = zeta(1.58);
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = zeta(1.5 + i as f64 / 600.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn j_max_default_grid() {
        let part = build_partition(&grid()).unwrap();
        assert_eq!(part.j_max(), 7);
        assert!(build_partition(&Grid::new(1, 16, 16.0).unwrap()).is_err());
    }

    #[test]
    fn neighbouring_blocks_sum_to_one() {
        let r = 1.6 * 8.0;
        assert!((phi(3, r) + phi(4, r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn telescoping_sum() {
        for r in [0.1, 1.0, 2.7, 9.3, 40.0, 150.0] {
            for n in 1..8 {
                let sum: f64 = zeta(r) + (1..=n).map(|j| phi(j, r)).sum::<f64>();
                assert!((sum - zeta(r * 2f64.powi(-n))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn partition_of_unity_and_reproduction() {
        let part = build_partition(&grid()).unwrap();
        assert!(part.unity_defect() <= 1e-12);
        for j in 0..=part.j_max() {
            let wide = part.widened(j).unwrap();
            let base = part.block(j).unwrap();
            let defect = base.iter().zip(&wide).map(|(b, w)| (b * w - b).abs()).fold(0.0, f64::max);
            assert!(defect <= 1e-12, "j={j} defect={defect}");
        }
        assert!(part.block(part.j_max() + 1).is_err());
    }

    fn single_mode(g: Grid, k: i64) -> SpectralField {
        let mut f = SpectralField::zeros(g);
        f.set_coeff_at(&[k], Complex64::new(0.5, 0.0));
        f.set_coeff_at(&[-k], Complex64::new(0.5, 0.0));
        f
    }

    #[test]
    fn single_mode_lives_in_neighbouring_blocks() {
        let g = grid();
        let part = build_partition(&g).unwrap();
        // |xi| = 2^4 exactly: k = 16 L / pi is not an integer, so take the nearest lattice mode
        let k = (16.0 / g.frequency_step()).round() as i64;
        let f = single_mode(g, k);
        let j0 = 4usize;
        for j in 0..=part.j_max() {
            let b = lp_block(&f, j, &part).unwrap();
            if (j as i64 - j0 as i64).abs() >= 2 {
                assert!(b.is_zero(), "block {j}");
            }
        }
        let sum = (0..=part.j_max())
            .map(|j| lp_block(&f, j, &part).unwrap())
            .reduce(|a, b| a.add(&b).unwrap())
            .unwrap();
        assert!(sum.sub(&f).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn disjoint_blocks_annihilate() {
        let g = grid();
        let part = build_partition(&g).unwrap();
        let f = PhysicalField::from_fn(g, |x| (-(x[0] * x[0]) * 4.0).exp()).to_spectral();
        for j in 1..=part.j_max() {
            for jj in (j + 2)..=part.j_max() {
                let twice = lp_block(&lp_block(&f, j, &part).unwrap(), jj, &part).unwrap();
                assert!(twice.is_zero());
            }
        }
    }

    #[test]
    fn reconstruction_on_covered_band() {
        let g = grid();
        let part = build_partition(&g).unwrap();
        // Gaussian of width 0.5 is negligible beyond |xi| ~ 60 < 192
        let f = PhysicalField::from_fn(g, |x| (-(x[0] * x[0]) * 4.0).exp() * (1.0 + x[0])).to_spectral();
        assert!(!part.truncates(&f));
        let sum = (0..=part.j_max())
            .map(|j| lp_block(&f, j, &part).unwrap())
            .reduce(|a, b| a.add(&b).unwrap())
            .unwrap();
        assert!(sum.sub(&f).unwrap().max_abs() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn zero_field_norms() {
        let g = grid();
        let part = build_partition(&g).unwrap();
        let z = SpectralField::zeros(g);
        let spec = BesovSpec::new(-1.0, 2.0, Index::Infinity, Index::Finite(1.0)).unwrap();
        assert_eq!(besov_lorentz_norm(&z, &spec, &part).unwrap().value, 0.0);
        assert_eq!(besov_norm(&z, 0.0, Index::Finite(1.0), Index::Infinity, &part).unwrap().value, 0.0);
        assert!(matches!(bernstein_check(&z, 3, 2.0, &part), Err(Error::EmptyBlock(3))));
    }

    #[test]
    fn single_block_norm_is_weighted_block_norm() {
        let g = grid();
        let part = build_partition(&g).unwrap();
        // a mode deep inside block 5's plateau, where phi_5 = 1
        let k = (45.0 / g.frequency_step()).round() as i64;
        let f = single_mode(g, k);
        assert!((part.block(5).unwrap()[k as usize] - 1.0).abs() < 1e-15);
        let spec = BesovSpec::new(0.7, 3.0, Index::Infinity, Index::Infinity).unwrap();
        let v = besov_lorentz_norm(&f, &spec, &part).unwrap();
        let direct = uniformly_local_lorentz_norm(&f.to_physical().unwrap(), &spec.norm, &spec.lattice).unwrap();
        assert!((v.value - 2f64.powf(0.7 * 5.0) * direct).abs() < 1e-12 * v.value);
    }

    #[test]
    fn delta_l1_blocks_are_uniform() {
        let g = grid();
        let part = build_partition(&g).unwrap();
        let delta = SpectralField::new(g, vec![Complex64::new(1.0 / 32.0, 0.0); g.len()]).unwrap();
        let v = besov_norm(&delta, 0.0, Index::Finite(1.0), Index::Infinity, &part).unwrap();
        // the lowest blocks feel the box: their kernels are wider than the transition scale allows
        let norms: Vec<f64> = v.blocks.iter().skip(3).map(|b| b.block_norm).collect();
        let (lo, hi) = norms.iter().fold((f64::MAX, 0.0f64), |(a, b), n| (a.min(*n), b.max(*n)));
        assert!(hi / lo < 1.02, "{norms:?}");
        assert!(v.truncated);
    }

    #[test]
    fn sequence_norms() {
        assert_eq!(sequence_norm(&[3.0, -4.0], Index::Infinity), 4.0);
        assert!((sequence_norm(&[3.0, -4.0], Index::Finite(2.0)) - 5.0).abs() < 1e-15);
        assert_eq!(sequence_norm(&[], Index::Finite(1.0)), 0.0);
    }

    #[test]
    fn tail_vanishes_for_low_band() {
        let g = grid();
        let part = build_partition(&g).unwrap();
        let f = single_mode(g, 3);
        let t = tail_seminorm(&f, 0.5, 2.0, 3.0, 3, &part).unwrap();
        assert_eq!(t.value, 0.0);
        assert!(tail_seminorm(&f, 2.5, 2.0, 3.0, 3, &part).is_err());
        assert!(tail_seminorm(&f, 0.5, 2.0, 3.0, 9, &part).is_err());
    }

    #[test]
    fn profile_csv() {
        let v = BesovValue {
            value: 1.0,
            j_max: 2,
            truncated: false,
            blocks: vec![BlockNorm { j: 0, block_norm: 0.5, weighted: 0.5 }],
        };
        let mut out = Vec::new();
        v.write_profile_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "j,block_ul_norm,weighted\n0,5e-1,5e-1\n");
    }
}
