use serde::{Deserialize, Serialize};

use crate::fit::{PowerFit, INCONCLUSIVE_RESIDUAL};

/// Denominators below this are excluded instead of divided by.
pub const EXCLUSION_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStatus {
    Ok,
    /// Both sides vanish.
    ExcludedTrivial,
    /// Denominator below [`EXCLUSION_FLOOR`] with a nonzero numerator.
    ExcludedSmall,
    /// A norm evaluation failed; the message is kept in `note`.
    Error,
}

impl CaseStatus {
    pub fn name(&self) -> &'static str {
        match self {
            CaseStatus::Ok => "ok",
            CaseStatus::ExcludedTrivial => "excluded_trivial",
            CaseStatus::ExcludedSmall => "excluded_small",
            CaseStatus::Error => "error",
        }
    }
}

/// One measured quotient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCase {
    pub family: String,
    pub level: usize,
    pub points: usize,
    pub member: Option<usize>,
    pub kind: String,
    /// Time, horizon or other scanned parameter, when there is one.
    pub param: Option<f64>,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: Option<f64>,
    pub status: CaseStatus,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl RatioCase {
    pub fn new(family: &str, level: usize, points: usize, numerator: f64, denominator: f64) -> Self {
        let (ratio, status) = if denominator.abs() < EXCLUSION_FLOOR {
            if numerator.abs() < EXCLUSION_FLOOR {
                (None, CaseStatus::ExcludedTrivial)
            } else {
                (None, CaseStatus::ExcludedSmall)
            }
        } else {
            (Some(numerator / denominator), CaseStatus::Ok)
        };
        Self {
            family: family.to_string(),
            level,
            points,
            member: None,
            kind: String::new(),
            param: None,
            numerator,
            denominator,
            ratio,
            status,
            note: String::new(),
        }
    }

    pub fn failed(family: &str, level: usize, points: usize, note: String) -> Self {
        let mut c = Self::new(family, level, points, f64::NAN, f64::NAN);
        c.ratio = None;
        c.status = CaseStatus::Error;
        c.note = note;
        c
    }

    pub fn member(mut self, index: usize, kind: &str) -> Self {
        self.member = Some(index);
        self.kind = kind.to_string();
        self
    }

    pub fn kind(mut self, kind: &str) -> Self {
        self.kind = kind.to_string();
        self
    }

    pub fn param(mut self, v: f64) -> Self {
        self.param = Some(v);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|slope - target| <= tolerance`
    Within,
    /// `slope <= target + tolerance`
    AtMost,
    /// `slope >= target - tolerance`
    AtLeast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitVerdict {
    Pass,
    Fail,
    /// Residual above the inconclusive threshold.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub label: String,
    pub fit: PowerFit,
    pub target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub verdict: FitVerdict,
}

impl FitRecord {
    pub fn new(label: &str, fit: PowerFit, target: f64, tolerance: f64, comparison: Comparison) -> Self {
        let ok = match comparison {
            Comparison::Within => (fit.slope - target).abs() <= tolerance,
            Comparison::AtMost => fit.slope <= target + tolerance,
            Comparison::AtLeast => fit.slope >= target - tolerance,
        };
        let verdict = if fit.residual > INCONCLUSIVE_RESIDUAL {
            FitVerdict::Inconclusive
        } else if ok {
            FitVerdict::Pass
        } else {
            FitVerdict::Fail
        };
        Self { label: label.to_string(), fit, target, tolerance, comparison, verdict }
    }
}

/// A named scalar gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(label: &str, value: f64, threshold: f64) -> Self {
        Self { label: label.to_string(), value, threshold, pass: value <= threshold }
    }

    pub fn at_least(label: &str, value: f64, threshold: f64) -> Self {
        Self { label: label.to_string(), value, threshold, pass: value >= threshold }
    }

    pub fn flag(label: &str, pass: bool) -> Self {
        Self { label: label.to_string(), value: f64::from(u8::from(pass)), threshold: 1.0, pass }
    }
}

/// Quotients of an estimate over an ensemble and a grid ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub experiment: String,
    pub id: String,
    pub cases: Vec<RatioCase>,
    pub level_points: Vec<usize>,
    /// Largest admitted ratio on each grid level.
    pub level_max: Vec<f64>,
    pub max_ratio: f64,
    /// `level_max[i + 1] / level_max[i]`.
    pub trend: Vec<f64>,
    pub band: f64,
    pub trend_ok: bool,
    pub fits: Vec<FitRecord>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Within `band` of 1 at every step, or converging towards 1 and within it at the last step.
pub fn trend_acceptable(trend: &[f64], band: f64) -> bool {
    let dev: Vec<f64> = trend.iter().map(|t| (t - 1.0).abs()).collect();
    if dev.iter().any(|d| !d.is_finite()) {
        return false;
    }
    if dev.iter().all(|d| *d <= band) {
        return true;
    }
    dev.windows(2).all(|w| w[1] <= w[0]) && dev.last().is_some_and(|d| *d <= band)
}

impl RatioReport {
    pub fn assemble(
        experiment: &str,
        id: &str,
        level_points: Vec<usize>,
        cases: Vec<RatioCase>,
        band: f64,
        fits: Vec<FitRecord>,
        checks: Vec<Check>,
    ) -> Self {
        let level_max: Vec<f64> = (0..level_points.len())
            .map(|l| {
                cases
                    .iter()
                    .filter(|c| c.level == l)
                    .filter_map(|c| c.ratio)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let max_ratio = level_max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let trend: Vec<f64> = level_max.windows(2).map(|w| w[1] / w[0]).collect();
        let trend_ok = trend_acceptable(&trend, band);
        let no_errors = cases.iter().all(|c| c.status != CaseStatus::Error);
        let pass = max_ratio.is_finite()
            && trend_ok
            && no_errors
            && fits.iter().all(|f| f.verdict == FitVerdict::Pass)
            && checks.iter().all(|c| c.pass);
        Self {
            experiment: experiment.to_string(),
            id: id.to_string(),
            cases,
            level_points,
            level_max,
            max_ratio,
            trend,
            band,
            trend_ok,
            fits,
            checks,
            pass,
        }
    }

    /// Largest admitted ratio among the cases of one family.
    pub fn family_max(&self, family: &str) -> f64 {
        self.cases
            .iter()
            .filter(|c| c.family == family)
            .filter_map(|c| c.ratio)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn fit(&self, label: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.label == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excluded_cases() {
        assert_eq!(RatioCase::new("f", 0, 8, 0.0, 0.0).status, CaseStatus::ExcludedTrivial);
        assert_eq!(RatioCase::new("f", 0, 8, 1.0, 1e-16).status, CaseStatus::ExcludedSmall);
        assert_eq!(RatioCase::new("f", 0, 8, 1.0, 2.0).ratio, Some(0.5));
    }

    #[test]
    fn trend_rules() {
        assert!(trend_acceptable(&[1.1, 0.95], 0.15));
        assert!(trend_acceptable(&[1.3, 1.1], 0.15));
        assert!(!trend_acceptable(&[1.1, 1.3], 0.15));
        assert!(!trend_acceptable(&[f64::NAN], 0.15));
    }

    #[test]
    fn pass_requires_finite_max_and_trend() {
        let cases = vec![
            RatioCase::new("f", 0, 8, 1.0, 1.0),
            RatioCase::new("f", 1, 16, 1.05, 1.0),
            RatioCase::new("f", 2, 32, 1.06, 1.0),
        ];
        let r = RatioReport::assemble("e", "id", vec![8, 16, 32], cases.clone(), 0.1, vec![], vec![]);
        assert!(r.pass);
        assert_eq!(r.max_ratio, 1.06);
        let r = RatioReport::assemble("e", "id", vec![8, 16, 32], cases, 0.005, vec![], vec![]);
        assert!(!r.pass);
        let none = RatioReport::assemble("e", "id", vec![8, 16, 32], vec![], 0.1, vec![], vec![]);
        assert!(!none.pass);
    }

    #[test]
    fn fit_verdicts() {
        let fit = PowerFit { slope: -1.05, intercept: 0.0, residual: 0.01, points: 5 };
        assert_eq!(FitRecord::new("a", fit, -1.0, 0.1, Comparison::Within).verdict, FitVerdict::Pass);
        assert_eq!(FitRecord::new("a", fit, -1.3, 0.0, Comparison::AtLeast).verdict, FitVerdict::Pass);
        assert_eq!(FitRecord::new("a", fit, -2.0, 0.1, Comparison::AtMost).verdict, FitVerdict::Fail);
        let noisy = PowerFit { residual: 0.3, ..fit };
        assert_eq!(FitRecord::new("a", noisy, -1.0, 0.1, Comparison::Within).verdict, FitVerdict::Inconclusive);
    }
}
