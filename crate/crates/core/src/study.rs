//! Observed-study summary statistics, beliefs about the counterfactual
//! means, and the decision threshold.

use serde::{Deserialize, Serialize};

use crate::error::{PivError, Result};
use crate::normal::{std_normal_quantile, Probability};

/// Critical value used for a two-sided test at the 5% level.
pub const DEFAULT_CRITICAL: f64 = 1.96;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Summary statistics of the observed sample.
///
/// Variances are treated as known constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservedStudy {
    pub mean_treated_obs: f64,
    pub mean_control_obs: f64,
    pub var_treated: f64,
    pub var_control: f64,
    /// Total observed sample size, both arms.
    pub n_obs: u64,
    /// Proportion of the observed sample that was treated.
    pub prop_treated: f64,
}

impl ObservedStudy {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("mean_treated_obs", self.mean_treated_obs),
            ("mean_control_obs", self.mean_control_obs),
            ("var_treated", self.var_treated),
            ("var_control", self.var_control),
            ("prop_treated", self.prop_treated),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(PivError::validation(field, format!("{v} is not finite")));
            }
        }
        if self.var_treated <= 0.0 {
            return Err(PivError::validation(
                "var_treated",
                format!("variance must be positive, got {}", self.var_treated),
            ));
        }
        if self.var_control <= 0.0 {
            return Err(PivError::validation(
                "var_control",
                format!("variance must be positive, got {}", self.var_control),
            ));
        }
        if self.n_obs < 2 {
            return Err(PivError::validation(
                "n_obs",
                format!("need at least 2 observations, got {}", self.n_obs),
            ));
        }
        if !(self.prop_treated > 0.0 && self.prop_treated < 1.0) {
            return Err(PivError::validation(
                "prop_treated",
                format!(
                    "must lie strictly between 0 and 1, got {}",
                    self.prop_treated
                ),
            ));
        }
        Ok(())
    }

    /// Observed estimate `Ȳtᵒᵇ − Ȳcᵒᵇ`.
    pub fn observed_estimate(&self) -> f64 {
        self.mean_treated_obs - self.mean_control_obs
    }

    #[inline]
    pub(crate) fn n(&self) -> f64 {
        self.n_obs as f64
    }

    /// Standard error of the observed-sample difference in means, with arm
    /// sizes `π·n` and `(1 − π)·n`.
    pub fn se_observed(&self) -> f64 {
        let n_t = self.prop_treated * self.n();
        let n_c = (1.0 - self.prop_treated) * self.n();
        (self.var_treated / n_t + self.var_control / n_c).sqrt()
    }

    /// Two-sided z-test of `δ = 0` on the observed sample.
    pub fn observed_test(&self, critical: f64) -> ObservedTest {
        let estimate = self.observed_estimate();
        let se = self.se_observed();
        let t_ratio = estimate / se;
        ObservedTest {
            estimate,
            se,
            t_ratio,
            critical,
            significant: t_ratio.abs() > critical,
        }
    }
}

/// Returns the study unchanged iff every field is within its domain.
pub fn validate_study(raw: ObservedStudy) -> Result<ObservedStudy> {
    raw.validate()?;
    Ok(raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservedTest {
    pub estimate: f64,
    pub se: f64,
    pub t_ratio: f64,
    pub critical: f64,
    pub significant: bool,
}

/// A belief about one counterfactual mean: a known value or a closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointOrInterval {
    Point { point: f64 },
    Interval { lower: f64, upper: f64 },
}

impl PointOrInterval {
    pub fn point(value: f64) -> Self {
        PointOrInterval::Point { point: value }
    }

    pub fn interval(lower: f64, upper: f64) -> Self {
        PointOrInterval::Interval { lower, upper }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            PointOrInterval::Point { point } => point,
            PointOrInterval::Interval { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            PointOrInterval::Point { point } => point,
            PointOrInterval::Interval { upper, .. } => upper,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, PointOrInterval::Point { .. }) || self.lower() == self.upper()
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let (lo, hi) = (self.lower(), self.upper());
        if !lo.is_finite() || !hi.is_finite() {
            return Err(PivError::validation(
                field,
                "belief endpoints must be finite",
            ));
        }
        if lo > hi {
            return Err(PivError::validation(
                field,
                format!("lower bound {lo} exceeds upper bound {hi}"),
            ));
        }
        Ok(())
    }
}

/// Beliefs about `Ȳtᵘⁿ` (treated outcome of the controls) and `Ȳcᵘⁿ`
/// (control outcome of the treated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterfactualBelief {
    pub treated_un: PointOrInterval,
    pub control_un: PointOrInterval,
}

impl CounterfactualBelief {
    pub fn points(treated_un: f64, control_un: f64) -> Self {
        CounterfactualBelief {
            treated_un: PointOrInterval::point(treated_un),
            control_un: PointOrInterval::point(control_un),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.treated_un.validate("treated_un")?;
        self.control_un.validate("control_un")
    }
}

/// Decision threshold `δ#` for rejecting the null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSpec {
    /// A fixed value in outcome units.
    Fixed(f64),
    /// `±critical × se` of the ideal-sample estimator.
    Statistical { alpha: f64, critical: f64 },
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec::Statistical {
            alpha: DEFAULT_ALPHA,
            critical: DEFAULT_CRITICAL,
        }
    }
}

impl ThresholdSpec {
    /// Two-sided statistical threshold at level `alpha`.
    ///
    /// `alpha = 0.05` maps to the conventional 1.96; other levels use `Φ⁻¹(1 − α/2)`.
    pub fn statistical(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(PivError::validation(
                "alpha",
                format!("must lie strictly between 0 and 1, got {alpha}"),
            ));
        }
        let critical = if alpha == DEFAULT_ALPHA {
            DEFAULT_CRITICAL
        } else {
            std_normal_quantile(Probability::from_complement(alpha / 2.0)?)?
        };
        Ok(ThresholdSpec::Statistical { alpha, critical })
    }

    pub fn with_critical(alpha: f64, critical: f64) -> Result<Self> {
        let spec = ThresholdSpec::Statistical { alpha, critical };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdSpec::Fixed(v) if !v.is_finite() => Err(PivError::validation(
                "threshold",
                "fixed threshold must be finite",
            )),
            ThresholdSpec::Fixed(_) => Ok(()),
            ThresholdSpec::Statistical { alpha, critical } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(PivError::validation(
                        "alpha",
                        format!("must lie strictly between 0 and 1, got {alpha}"),
                    ));
                }
                if !(critical.is_finite() && critical > 0.0) {
                    return Err(PivError::validation(
                        "critical",
                        format!("must be positive and finite, got {critical}"),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn critical(&self) -> Option<f64> {
        match *self {
            ThresholdSpec::Statistical { critical, .. } => Some(critical),
            ThresholdSpec::Fixed(_) => None,
        }
    }
}

/// Which side the significant observed effect fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EffectDirection {
    #[serde(rename = "positive")]
    PositiveSignificant,
    #[serde(rename = "negative")]
    NegativeSignificant,
}

impl EffectDirection {
    /// `+1` for positive, `−1` for negative.
    pub fn sign(self) -> f64 {
        match self {
            EffectDirection::PositiveSignificant => 1.0,
            EffectDirection::NegativeSignificant => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            EffectDirection::PositiveSignificant => EffectDirection::NegativeSignificant,
            EffectDirection::NegativeSignificant => EffectDirection::PositiveSignificant,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EffectDirection::PositiveSignificant => "positive",
            EffectDirection::NegativeSignificant => "negative",
        }
    }
}

/// Direction from the sign of the observed estimate.
///
/// The threshold does not enter the decision; it is accepted so callers
/// can pass the full analysis setup.
pub fn infer_direction(study: &ObservedStudy, _spec: &ThresholdSpec) -> Result<EffectDirection> {
    let estimate = study.observed_estimate();
    if estimate > 0.0 {
        Ok(EffectDirection::PositiveSignificant)
    } else if estimate < 0.0 {
        Ok(EffectDirection::NegativeSignificant)
    } else {
        Err(PivError::AmbiguousDirection)
    }
}
