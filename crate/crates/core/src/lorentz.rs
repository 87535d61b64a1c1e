//! Distribution functions, decreasing rearrangements, Lorentz quasi-norms
//! `L^{p,q}` and their uniformly local versions `L^{p,q}_ul`.
//!
//! Rearrangements are exact: samples are sorted and every lattice cell
//! contributes its full volume, so both branches of the Lorentz norm are
//! closed-form sums over the sorted levels of a lattice step function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid, PhysicalField};

/// Second (fine) index of a Lorentz space, or the summability index of a sequence space.
///
/// Serialized as a number, or as the string `"inf"` for the infinite index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexRepr", into = "IndexRepr")]
pub enum Index {
    Finite(f64),
    Infinity,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IndexRepr {
    Number(f64),
    Text(String),
}

impl From<Index> for IndexRepr {
    fn from(i: Index) -> Self {
        match i {
            Index::Finite(v) => IndexRepr::Number(v),
            Index::Infinity => IndexRepr::Text("inf".into()),
        }
    }
}

impl TryFrom<IndexRepr> for Index {
    type Error = String;

    fn try_from(r: IndexRepr) -> std::result::Result<Self, String> {
        match r {
            IndexRepr::Number(v) => Ok(Index::from_f64(v)),
            IndexRepr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(Index::Infinity),
            IndexRepr::Text(t) => Err(format!("expected a number or \"inf\", got {t:?}")),
        }
    }
}

impl Index {
    pub fn from_f64(v: f64) -> Self {
        if v.is_infinite() {
            Index::Infinity
        } else {
            Index::Finite(v)
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Index::Finite(v) => *v,
            Index::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Index::Infinity)
    }

    fn validate(&self, what: &str) -> Result<()> {
        match self {
            Index::Finite(v) if *v >= 1.0 && v.is_finite() => Ok(()),
            Index::Infinity => Ok(()),
            Index::Finite(v) => Err(Error::InvalidParameter(format!("{what} must lie in [1, inf], got {v}"))),
        }
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Index::Finite(v) => write!(f, "{v}"),
            Index::Infinity => write!(f, "inf"),
        }
    }
}

/// Lorentz indices `(p, q)` with `1 < p < inf` and `q in [1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub q: Index,
}

impl NormSpec {
    pub fn new(p: f64, q: Index) -> Result<Self> {
        let spec = Self { p, q };
        spec.validate()?;
        Ok(spec)
    }

    /// Weak space `L^{p,inf}`.
    pub fn weak(p: f64) -> Result<Self> {
        Self::new(p, Index::Infinity)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("Lorentz p must lie in (1, inf), got {}", self.p)));
        }
        self.q.validate("Lorentz q")
    }
}

/// Sorted levels of `|f|` with the measure of each superlevel set.
///
/// `values` is strictly decreasing and `cummeasure[i]` is the measure of
/// `{|f| >= values[i]}`, so the distribution function is
/// `alpha(sigma) = cummeasure[i]` for `values[i+1] <= sigma < values[i]`
/// and the rearrangement is `f*(lambda) = values[i]` on
/// `cummeasure[i-1] <= lambda < cummeasure[i]`, zero past the last entry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RearrangementTable {
    values: Vec<f64>,
    cummeasure: Vec<f64>,
}

impl RearrangementTable {
    /// Rearrangement of equally weighted cells.
    pub fn from_samples(samples: impl IntoIterator<Item = f64>, cell_volume: f64) -> Self {
        let mut mags: Vec<f64> = samples.into_iter().map(f64::abs).filter(|v| *v > 0.0).collect();
        mags.sort_unstable_by(|a, b| b.total_cmp(a));
        let mut values = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for (i, v) in mags.iter().enumerate() {
            if values.last() == Some(v) {
                *counts.last_mut().unwrap() = i + 1;
            } else {
                values.push(*v);
                counts.push(i + 1);
            }
        }
        let cummeasure = counts.into_iter().map(|c| c as f64 * cell_volume).collect();
        Self { values, cummeasure }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cummeasure(&self) -> &[f64] {
        &self.cummeasure
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Measure of the support of `f`.
    pub fn support_measure(&self) -> f64 {
        self.cummeasure.last().copied().unwrap_or(0.0)
    }

    /// `alpha_f(sigma) = |{|f| > sigma}|`.
    pub fn distribution(&self, sigma: f64) -> f64 {
        // number of levels strictly above sigma
        let above = self.values.partition_point(|v| *v > sigma);
        if above == 0 {
            0.0
        } else {
            self.cummeasure[above - 1]
        }
    }

    /// `f*(lambda) = sup {sigma > 0 : alpha_f(sigma) > lambda}` with `sup(empty) = 0`.
    pub fn rearranged(&self, lambda: f64) -> f64 {
        let i = self.cummeasure.partition_point(|c| *c <= lambda);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// `sup_lambda lambda^{1/p} f*(lambda) = max_i values[i] cummeasure[i]^{1/p}`.
    pub fn weak_norm(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.cummeasure)
            .fold(0.0, |m, (v, c)| m.max(v * c.powf(1.0 / p)))
    }

    /// `(int_0^inf (lambda^{1/p} f*(lambda))^q d lambda / lambda)^{1/q}`, integrated exactly
    /// over the piecewise-constant rearrangement.
    pub fn strong_norm(&self, p: f64, q: f64) -> f64 {
        let ratio = q / p;
        let mut prev = 0.0f64;
        let mut terms: Vec<f64> = Vec::with_capacity(self.values.len());
        for (v, c) in self.values.iter().zip(&self.cummeasure) {
            let next = c.powf(ratio);
            terms.push(v.powf(q) * (next - prev));
            prev = next;
        }
        // ascending summation of positive terms
        terms.sort_unstable_by(|a, b| a.total_cmp(b));
        let sum: f64 = terms.iter().sum();
        (sum / ratio).powf(1.0 / q)
    }

    pub fn norm(&self, spec: &NormSpec) -> f64 {
        match spec.q {
            Index::Infinity => self.weak_norm(spec.p),
            Index::Finite(q) => self.strong_norm(spec.p, q),
        }
    }
}

pub fn build_rearrangement(f: &PhysicalField) -> RearrangementTable {
    RearrangementTable::from_samples(f.samples().iter().copied(), f.grid().cell_volume())
}

/// Global `L^{p,q}` norm of the lattice step function.
pub fn lorentz_norm(f: &PhysicalField, spec: &NormSpec) -> f64 {
    build_rearrangement(f).norm(spec)
}

/// Ball centers used to approximate the supremum over `z` in the uniformly local norm.
///
/// Centers are lattice points spaced by `max(1, floor(spacing / h))` cells
/// along each axis, aligned so that the origin is a center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterLattice {
    pub spacing: f64,
}

impl Default for CenterLattice {
    fn default() -> Self {
        Self { spacing: 0.5 }
    }
}

impl CenterLattice {
    pub fn new(spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing <= 0.5) {
            return Err(Error::InvalidParameter(format!("center spacing must lie in (0, 0.5], got {spacing}")));
        }
        Ok(Self { spacing })
    }

    /// Every lattice point is a center.
    pub fn dense() -> Self {
        Self { spacing: f64::MIN_POSITIVE }
    }

    pub fn stride(&self, grid: &Grid) -> usize {
        ((self.spacing / grid.spacing()) * (1.0 + 1e-12)).floor().max(1.0) as usize
    }

    /// Flat indices of all centers in row-major order.
    pub fn centers(&self, grid: &Grid) -> Vec<usize> {
        let stride = self.stride(grid);
        let half = grid.points() / 2;
        let axis: Vec<usize> = (0..grid.points()).filter(|i| (*i as i64 - half as i64).rem_euclid(stride as i64) == 0).collect();
        let mut out = Vec::new();
        let mut idx = [0usize; 3];
        fn rec(grid: &Grid, axis: &[usize], depth: usize, idx: &mut [usize; 3], out: &mut Vec<usize>) {
            if depth == grid.dim() {
                out.push(grid.flatten(idx));
                return;
            }
            for &i in axis {
                idx[depth] = i;
                rec(grid, axis, depth + 1, idx, out);
            }
        }
        rec(grid, &axis, 0, &mut idx, &mut out);
        out
    }
}

/// Cell offsets whose centers lie in the open unit ball around a lattice point.
#[derive(Clone, Debug)]
pub struct UnitBallStencil {
    offsets: Vec<[i64; 3]>,
}

impl UnitBallStencil {
    pub fn new(grid: &Grid) -> Result<Self> {
        if grid.half_length() < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "unit ball does not fit in the box of half length {}",
                grid.half_length()
            )));
        }
        let h = grid.spacing();
        let reach = (1.0 / h).ceil() as i64;
        let dim = grid.dim();
        let mut offsets = Vec::new();
        let range = -reach..=reach;
        for a in range.clone() {
            for b in if dim >= 2 { range.clone() } else { 0..=0 } {
                for c in if dim >= 3 { range.clone() } else { 0..=0 } {
                    let r2 = ((a * a + b * b + c * c) as f64) * h * h;
                    if r2 < 1.0 {
                        offsets.push([a, b, c]);
                    }
                }
            }
        }
        Ok(Self { offsets })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Measure of the discrete ball.
    pub fn measure(&self, grid: &Grid) -> f64 {
        self.offsets.len() as f64 * grid.cell_volume()
    }

    /// Samples of `f chi_{B(center, 1)}` restricted to the ball, with periodic wrap.
    pub fn gather(&self, f: &PhysicalField, center: usize) -> Vec<f64> {
        let grid = f.grid();
        let m = grid.points() as i64;
        let base = grid.unflatten(center);
        let samples = f.samples();
        let mut idx = [0usize; 3];
        self.offsets
            .iter()
            .map(|off| {
                for axis in 0..grid.dim() {
                    idx[axis] = (base[axis] as i64 + off[axis]).rem_euclid(m) as usize;
                }
                samples[grid.flatten(&idx)]
            })
            .collect()
    }
}

/// Windowed norms `||f chi_{B(z,1)} | L^{p,q}||` for every center `z`, in center order.
pub fn windowed_norms(f: &PhysicalField, spec: &NormSpec, lattice: &CenterLattice) -> Result<Vec<(usize, f64)>> {
    spec.validate()?;
    let stencil = UnitBallStencil::new(f.grid())?;
    let cell = f.grid().cell_volume();
    let centers = lattice.centers(f.grid());
    Ok(centers
        .par_iter()
        .map(|&c| (c, RearrangementTable::from_samples(stencil.gather(f, c), cell).norm(spec)))
        .collect())
}

/// `sup_z ||f chi_{B(z,1)} | L^{p,q}||` over the center lattice.
pub fn uniformly_local_lorentz_norm(f: &PhysicalField, spec: &NormSpec, lattice: &CenterLattice) -> Result<f64> {
    Ok(windowed_norms(f, spec, lattice)?.into_iter().fold(0.0, |m, (_, v)| m.max(v)))
}

/// `||f | L^{p,inf}_ul||` with the default center lattice.
pub fn ul_weak_norm(f: &PhysicalField, p: f64) -> Result<f64> {
    uniformly_local_lorentz_norm(f, &NormSpec::weak(p)?, &CenterLattice::default())
}

/// `||fg||_{p,inf} / (||f||_{p0,inf} ||g||_{p1,inf})` with `1/p = 1/p0 + 1/p1`.
pub fn weak_product_check(f: &PhysicalField, g: &PhysicalField, p0: f64, p1: f64) -> Result<f64> {
    let inv = 1.0 / p0 + 1.0 / p1;
    if !(p0 > 1.0 && p1 > 1.0 && inv < 1.0) {
        return Err(Error::InvalidParameter(format!("need 1/p0 + 1/p1 < 1, got p0={p0}, p1={p1}")));
    }
    let p = 1.0 / inv;
    let nf = build_rearrangement(f).weak_norm(p0);
    let ng = build_rearrangement(g).weak_norm(p1);
    if nf == 0.0 || ng == 0.0 {
        return Err(Error::Degenerate("a factor has zero weak norm".into()));
    }
    let product = f.zip_map(g, |a, b| a * b)?;
    Ok(build_rearrangement(&product).weak_norm(p) / (nf * ng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1() -> Grid {
        Grid::new(1, 4096, 16.0).unwrap()
    }

    fn indicator(g: Grid, r: f64) -> PhysicalField {
        PhysicalField::from_fn(g, move |x| if x[0].abs() < r { 1.0 } else { 0.0 })
    }

    #[test]
    fn zero_field_has_empty_table() {
        let t = build_rearrangement(&PhysicalField::zeros(grid1()));
        assert!(t.is_empty());
        assert_eq!(t.rearranged(0.0), 0.0);
        assert_eq!(t.weak_norm(2.0), 0.0);
        assert_eq!(t.strong_norm(2.0, 3.0), 0.0);
    }

    #[test]
    fn indicator_table() {
        let g = grid1();
        let t = build_rearrangement(&indicator(g, 1.0));
        assert_eq!(t.values(), &[1.0]);
        // open interval (-1, 1) holds 2/h - 1 lattice points
        assert!((t.cummeasure()[0] - (2.0 - g.spacing())).abs() < 1e-12);
        for p in [1.5, 2.0, 7.0] {
            assert_eq!(t.weak_norm(p), t.cummeasure()[0].powf(1.0 / p));
        }
    }

    #[test]
    fn two_level_rearrangement_by_sorting() {
        // cell volume 0.25: levels 3 on 2 cells and 1 on 6 cells
        let samples = vec![1.0, 0.0, 3.0, -1.0, 1.0, 0.0, 1.0, -3.0, 1.0, 1.0];
        let t = RearrangementTable::from_samples(samples.clone(), 0.25);
        let brute = |lambda: f64| {
            let mut mags: Vec<f64> = samples.iter().map(|v: &f64| v.abs()).collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            let cell = (lambda / 0.25).floor() as usize;
            mags.get(cell).copied().unwrap_or(0.0)
        };
        for lambda in [0.0, 0.1, 0.49, 0.5, 1.0, 1.99, 2.0, 2.4, 5.0] {
            assert_eq!(t.rearranged(lambda), brute(lambda), "lambda={lambda}");
        }
        assert_eq!(t.rearranged(0.3), 3.0);
        assert_eq!(t.rearranged(0.7), 1.0);
        assert_eq!(t.rearranged(2.1), 0.0);
        assert_eq!(t.distribution(0.5), 2.0);
        assert_eq!(t.distribution(1.0), 0.5);
        assert_eq!(t.distribution(3.0), 0.0);
    }

    /// Composite Simpson in u = sqrt(lambda) over pieces found by brute-force counting.
    fn quadrature_norm(samples: &[f64], cell: f64, p: f64, q: f64) -> f64 {
        let mut mags: Vec<f64> = samples.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let f_star = |lambda: f64| mags.get((lambda / cell).floor() as usize).copied().unwrap_or(0.0);
        let mut total = 0.0;
        for i in 0..mags.len() {
            let (a, b) = (((i as f64) * cell).sqrt(), (((i + 1) as f64) * cell).sqrt());
            let mid_lambda = (((i as f64) + 0.5) * cell).max(0.0);
            let level = f_star(mid_lambda);
            let g = |u: f64| 2.0 * u.powf(2.0 * q / p - 1.0);
            let n = 8;
            let h = (b - a) / n as f64;
            let mut s = g(a) + g(b);
            for k in 1..n {
                s += g(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            total += level.powf(q) * s * h / 3.0;
        }
        total.powf(1.0 / q)
    }

    #[test]
    fn strong_norm_matches_quadrature() {
        let samples: Vec<f64> = (0..40).map(|i| ((i * 7919) % 13) as f64 * 0.3 - 1.2).collect();
        let t = RearrangementTable::from_samples(samples.clone(), 0.125);
        for (p, q) in [(2.0, 2.0), (2.0, 3.0), (3.0, 6.0), (1.5, 3.0)] {
            let exact = t.strong_norm(p, q);
            let quad = quadrature_norm(&samples, 0.125, p, q);
            assert!((exact - quad).abs() < 1e-10 * exact, "p={p} q={q} exact={exact} quad={quad}");
        }
    }

    #[test]
    fn lp_norm_coincides_with_lorentz_diagonal() {
        let g = Grid::new(1, 256, 4.0).unwrap();
        let f = PhysicalField::from_fn(g, |x| (-(x[0] * x[0])).exp() * (3.0 * x[0]).cos());
        let spec = NormSpec::new(2.5, Index::Finite(2.5)).unwrap();
        assert!((lorentz_norm(&f, &spec) - f.lp_norm(2.5)).abs() < 1e-12);
    }

    #[test]
    fn weak_norm_of_power_profile() {
        // |x|^{-1/p} clamped at radius c has weak norm (2 + h/c)^{1/p} on the lattice.
        let g = grid1();
        let p = 2.0;
        let mut last_err = f64::INFINITY;
        for c in [0.1, 0.2, 0.4] {
            let f = PhysicalField::from_fn(g, move |x| x[0].abs().max(c).powf(-1.0 / p));
            let n = lorentz_norm(&f, &NormSpec::weak(p).unwrap());
            let err = (n - 2f64.powf(1.0 / p)).abs() / 2f64.powf(1.0 / p);
            assert!(err < 0.05);
            assert!(err < last_err);
            last_err = err;
        }
    }

    #[test]
    fn ul_norm_of_localized_field_equals_global() {
        let g = grid1();
        let f = PhysicalField::from_fn(g, |x| if x[0].abs() < 0.6 { 1.0 + x[0] } else { 0.0 });
        let spec = NormSpec::weak(3.0).unwrap();
        let ul = uniformly_local_lorentz_norm(&f, &spec, &CenterLattice::default()).unwrap();
        assert!((ul - lorentz_norm(&f, &spec)).abs() < 1e-14);
    }

    #[test]
    fn ul_norm_of_constant() {
        let g = grid1();
        let stencil = UnitBallStencil::new(&g).unwrap();
        let f = PhysicalField::constant(g, 2.5);
        let ul = ul_weak_norm(&f, 2.0).unwrap();
        assert!((ul - 2.5 * stencil.measure(&g).sqrt()).abs() < 1e-12);
        assert!((stencil.measure(&g) - 2.0).abs() <= g.spacing());
    }

    #[test]
    fn separated_bumps_do_not_accumulate() {
        let g = grid1();
        let bump = |x: f64| if x.abs() < 1.0 { (1.0 - x * x).powi(2) } else { 0.0 };
        let one = PhysicalField::from_fn(g, move |x| bump(x[0]));
        let two = PhysicalField::from_fn(g, move |x| bump(x[0] + 3.0) + bump(x[0] - 3.0));
        let a = ul_weak_norm(&one, 2.0).unwrap();
        let b = ul_weak_norm(&two, 2.0).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(lorentz_norm(&two, &NormSpec::weak(2.0).unwrap()) > a);
    }

    #[test]
    fn ul_rejects_small_box() {
        let g = Grid::new(1, 64, 0.5).unwrap();
        assert!(ul_weak_norm(&PhysicalField::zeros(g), 2.0).is_err());
    }

    #[test]
    fn weak_product_of_indicators() {
        let g = grid1();
        let chi = indicator(g, 1.0);
        let r = weak_product_check(&chi, &chi, 3.0, 4.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(matches!(
            weak_product_check(&chi, &PhysicalField::zeros(g), 3.0, 4.0),
            Err(Error::Degenerate(_))
        ));
        assert!(weak_product_check(&chi, &chi, 1.5, 2.0).is_err());
    }

    #[test]
    fn dilation_scaling() {
        let g = grid1();
        let base = |x: f64| (-(x * x)).exp() * (1.0 + 0.3 * (2.0 * x).sin());
        let f = PhysicalField::from_fn(g, move |x| base(x[0]));
        let f2 = PhysicalField::from_fn(g, move |x| base(2.0 * x[0]));
        for spec in [NormSpec::weak(2.0).unwrap(), NormSpec::new(3.0, Index::Finite(1.5)).unwrap()] {
            let ratio = lorentz_norm(&f2, &spec) / lorentz_norm(&f, &spec);
            let expected = 2f64.powf(-1.0 / spec.p);
            assert!((ratio / expected - 1.0).abs() < 0.02);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn monotone_under_pointwise_domination(seed in 0u64..1000, shrink in 0.0f64..1.0, p in 1.2f64..6.0) {
            let g = Grid::new(1, 64, 2.0).unwrap();
            let f = PhysicalField::from_fn(g, |x| ((x[0] * 3.1 + seed as f64).sin() * 2.0).powi(3));
            let h = PhysicalField::from_fn(g, |x| (x[0] * 7.3 + seed as f64 * 0.37).cos());
            let dominated = f.zip_map(&h, |a, b| a * shrink * b.abs().min(1.0)).unwrap();
            for spec in [NormSpec::weak(p).unwrap(), NormSpec::new(p, Index::Finite(p + 1.0)).unwrap()] {
                prop_assert!(lorentz_norm(&dominated, &spec) <= lorentz_norm(&f, &spec) * (1.0 + 1e-12));
            }
        }

        #[test]
        fn power_identity(seed in 0u64..1000, p in 1.1f64..4.0, r in 0.3f64..3.0) {
            prop_assume!(p * r > 1.0);
            let g = Grid::new(1, 64, 2.0).unwrap();
            let f = PhysicalField::from_fn(g, |x| (x[0] * 2.3 + seed as f64).sin() + 0.2 * (x[0] * 5.1).cos());
            let lhs = lorentz_norm(&f.map(|v| v.abs().powf(r)), &NormSpec::weak(p).unwrap());
            let rhs = lorentz_norm(&f, &NormSpec::weak(p * r).unwrap()).powf(r);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn ul_norm_dominated_by_global(seed in 0u64..500, p in 1.2f64..5.0) {
            let g = Grid::new(1, 128, 4.0).unwrap();
            let f = PhysicalField::from_fn(g, |x| (x[0] * 1.7 + seed as f64).sin() * (-(x[0] * x[0]) / 4.0).exp());
            let spec = NormSpec::weak(p).unwrap();
            let ul = uniformly_local_lorentz_norm(&f, &spec, &CenterLattice::default()).unwrap();
            prop_assert!(ul <= lorentz_norm(&f, &spec) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn index_serializes_infinity_as_text() {
        assert_eq!(serde_json::to_string(&Index::Infinity).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Index::Finite(2.5)).unwrap(), "2.5");
        assert_eq!(serde_json::from_str::<Index>("\"infinity\"").unwrap(), Index::Infinity);
        assert_eq!(serde_json::from_str::<Index>("3").unwrap(), Index::Finite(3.0));
        assert!(serde_json::from_str::<Index>("\"big\"").is_err());
    }
}
