//! JSON study configuration.
//!
//! ```json
//! { "study": {"mean_treated_obs": 36.77, "mean_control_obs": 45.78,
//!             "var_treated": 143.26, "var_control": 138.83,
//!             "n_obs": 7639, "prop_treated": 0.0617},
//!   "belief": {"treated_un": {"lower": 36.77, "upper": 45.78},
//!              "control_un": {"point": 45.2}},
//!   "threshold": {"statistical": {"alpha": 0.05}},
//!   "direction": "auto" }
//! ```
//!
//! Every field may be left out of the file and supplied later (the CLI
//! fills gaps from flags); [`StudyConfig::resolve`] reports whichever
//! required field is still missing.

use serde::{Deserialize, Serialize};

use crate::error::{PivError, Result};
use crate::study::{
    infer_direction, validate_study, EffectDirection, ObservedStudy, PointOrInterval,
    ThresholdSpec, DEFAULT_ALPHA,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default)]
    pub study: StudyFields,
    #[serde(default)]
    pub belief: BeliefConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<DirectionChoice>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFields {
    pub mean_treated_obs: Option<f64>,
    pub mean_control_obs: Option<f64>,
    pub var_treated: Option<f64>,
    pub var_control: Option<f64>,
    pub n_obs: Option<u64>,
    pub prop_treated: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefConfig {
    pub treated_un: Option<PointOrInterval>,
    pub control_un: Option<PointOrInterval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdConfig {
    Fixed(f64),
    Statistical(StatisticalConfig),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticalConfig {
    pub alpha: Option<f64>,
    /// Overrides the critical value implied by `alpha` (e.g. 1.645 for a one-sided 5% test).
    pub critical: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionChoice {
    #[default]
    Auto,
    Positive,
    Negative,
}

impl ThresholdConfig {
    pub fn to_spec(self) -> Result<ThresholdSpec> {
        let spec = match self {
            ThresholdConfig::Fixed(v) => ThresholdSpec::Fixed(v),
            ThresholdConfig::Statistical(StatisticalConfig { alpha, critical }) => {
                let alpha = alpha.unwrap_or(DEFAULT_ALPHA);
                match critical {
                    Some(c) => ThresholdSpec::with_critical(alpha, c)?,
                    None => ThresholdSpec::statistical(alpha)?,
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl DirectionChoice {
    pub fn resolve(self, study: &ObservedStudy, spec: &ThresholdSpec) -> Result<EffectDirection> {
        match self {
            DirectionChoice::Auto => infer_direction(study, spec),
            DirectionChoice::Positive => Ok(EffectDirection::PositiveSignificant),
            DirectionChoice::Negative => Ok(EffectDirection::NegativeSignificant),
        }
    }
}

/// A configuration with every required field present and validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub study: ObservedStudy,
    pub belief: BeliefConfig,
    pub threshold: ThresholdSpec,
    pub direction: EffectDirection,
    pub direction_choice: DirectionChoice,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PivError::Validation {
            field: "config".into(),
            reason: e.to_string(),
        })
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        fn need<T>(v: Option<T>, field: &str) -> Result<T> {
            v.ok_or_else(|| PivError::validation(field, "missing"))
        }
        let s = &self.study;
        let study = validate_study(ObservedStudy {
            mean_treated_obs: need(s.mean_treated_obs, "mean_treated_obs")?,
            mean_control_obs: need(s.mean_control_obs, "mean_control_obs")?,
            var_treated: need(s.var_treated, "var_treated")?,
            var_control: need(s.var_control, "var_control")?,
            n_obs: need(s.n_obs, "n_obs")?,
            prop_treated: need(s.prop_treated, "prop_treated")?,
        })?;
        if let Some(b) = &self.belief.treated_un {
            b.validate("treated_un")?;
        }
        if let Some(b) = &self.belief.control_un {
            b.validate("control_un")?;
        }
        let threshold = self
            .threshold
            .unwrap_or(ThresholdConfig::Statistical(StatisticalConfig::default()))
            .to_spec()?;
        let direction_choice = self.direction.unwrap_or_default();
        let direction = direction_choice.resolve(&study, &threshold)?;
        Ok(ResolvedConfig {
            study,
            belief: self.belief,
            threshold,
            direction,
            direction_choice,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HONG: &str = r#"{
        "study": {"mean_treated_obs": 36.77, "mean_control_obs": 45.78,
                  "var_treated": 143.26, "var_control": 138.83,
                  "n_obs": 7639, "prop_treated": 0.0617},
        "belief": {"treated_un": {"lower": 36.77, "upper": 45.78},
                   "control_un": {"point": 45.2}},
        "threshold": {"statistical": {"alpha": 0.05}},
        "direction": "auto"
    }"#;

    #[test]
    fn parses_full_config() {
        let r = StudyConfig::from_json(HONG).unwrap().resolve().unwrap();
        assert_eq!(r.study.n_obs, 7639);
        assert_eq!(r.threshold, ThresholdSpec::default());
        assert_eq!(r.direction, EffectDirection::NegativeSignificant);
        assert_eq!(r.belief.control_un, Some(PointOrInterval::point(45.2)));
        assert_eq!(
            r.belief.treated_un,
            Some(PointOrInterval::interval(36.77, 45.78))
        );
    }

    #[test]
    fn threshold_variants() {
        let fixed: ThresholdConfig = serde_json::from_str(r#"{"fixed": 0.5}"#).unwrap();
        assert_eq!(fixed.to_spec().unwrap(), ThresholdSpec::Fixed(0.5));
        let one_sided: ThresholdConfig =
            serde_json::from_str(r#"{"statistical": {"alpha": 0.05, "critical": 1.645}}"#).unwrap();
        assert_eq!(one_sided.to_spec().unwrap().critical(), Some(1.645));
    }

    #[test]
    fn reports_offending_field() {
        let bad = HONG.replace("143.26", "-1");
        match StudyConfig::from_json(&bad).unwrap().resolve() {
            Err(PivError::Validation { field, .. }) => assert_eq!(field, "var_treated"),
            other => panic!("{other:?}"),
        }
        let missing = r#"{"study": {"mean_treated_obs": 1.0}}"#;
        match StudyConfig::from_json(missing).unwrap().resolve() {
            Err(PivError::Validation { field, .. }) => assert_eq!(field, "mean_control_obs"),
            other => panic!("{other:?}"),
        }
        assert!(StudyConfig::from_json(r#"{"studdy": {}}"#).is_err());
    }

    #[test]
    fn explicit_direction_overrides_sign() {
        let cfg = HONG.replace(r#""direction": "auto""#, r#""direction": "positive""#);
        let r = StudyConfig::from_json(&cfg).unwrap().resolve().unwrap();
        assert_eq!(r.direction, EffectDirection::PositiveSignificant);
    }
}
