//! Closed-form PIV: the ideal-sample distribution of the effect, its probit
//! link, bounds over belief rectangles, and inversion for threshold tables.
//!
//! Notation in comments follows the usual potential-outcomes shorthand:
//! `Ȳtᵒᵇ`, `Ȳcᵒᵇ` observed arm means, `Ȳtᵘⁿ`, `Ȳcᵘⁿ` counterfactual arm
//! means, `π` the treated share, `n` the total observed sample size.

use serde::Serialize;

use crate::error::{PivError, Result};
use crate::normal::{std_normal_cdf, std_normal_quantile, Probability};
use crate::study::{CounterfactualBelief, EffectDirection, ObservedStudy, ThresholdSpec};

/// Normal law of the effect given the ideal sample:
/// `δ ~ N(θt − θc, φt + φc)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealDistribution {
    /// `(1 − π)·Ȳtᵘⁿ + π·Ȳtᵒᵇ`
    pub theta_t: f64,
    /// `π·Ȳcᵘⁿ + (1 − π)·Ȳcᵒᵇ`
    pub theta_c: f64,
    /// `σt² / n`
    pub phi_t: f64,
    /// `σc² / n`
    pub phi_c: f64,
}

impl IdealDistribution {
    pub fn mean(&self) -> f64 {
        self.theta_t - self.theta_c
    }

    pub fn variance(&self) -> f64 {
        self.phi_t + self.phi_c
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Ideal-sample arm means and variances for point beliefs.
///
/// Each ideal arm holds all `n` subjects, observed or counterfactual, so
/// both variances divide by the same total `n`.
pub fn ideal_distribution(
    study: &ObservedStudy,
    treated_un: f64,
    control_un: f64,
) -> Result<IdealDistribution> {
    study.validate()?;
    check_point("treated_un", treated_un)?;
    check_point("control_un", control_un)?;
    let pi = study.prop_treated;
    let n = study.n();
    Ok(IdealDistribution {
        theta_t: (1.0 - pi) * treated_un + pi * study.mean_treated_obs,
        theta_c: pi * control_un + (1.0 - pi) * study.mean_control_obs,
        phi_t: study.var_treated / n,
        phi_c: study.var_control / n,
    })
}

fn check_point(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(PivError::validation(field, format!("{v} is not finite")))
    }
}

/// Standard error of the simple estimator over the ideal sample,
/// `sqrt((σt² + σc²) / n)`.
pub fn se_ideal(study: &ObservedStudy) -> f64 {
    ((study.var_treated + study.var_control) / study.n()).sqrt()
}

/// The realized decision threshold `δ#` in outcome units.
pub fn realize_threshold(
    spec: &ThresholdSpec,
    direction: EffectDirection,
    study: &ObservedStudy,
) -> f64 {
    match *spec {
        ThresholdSpec::Fixed(v) => v,
        ThresholdSpec::Statistical { critical, .. } => {
            direction.sign() * critical * se_ideal(study)
        }
    }
}

/// `sqrt(n) / sqrt(σt² + σc²)`, the reciprocal of [`se_ideal`].
fn scale(study: &ObservedStudy) -> f64 {
    study.n().sqrt() / (study.var_treated + study.var_control).sqrt()
}

/// Probit of the PIV as a function of the counterfactual means and the realized threshold.
///
/// Positive effect:
/// `√n/√(σt²+σc²) · [(1−π)Ȳtᵘⁿ − πȲcᵘⁿ + (Ȳtᵒᵇ+Ȳcᵒᵇ)π − Ȳcᵒᵇ − δ#]`.
/// Negative effect: the same expression with the bracket negated.
pub fn probit_piv(
    study: &ObservedStudy,
    treated_un: f64,
    control_un: f64,
    threshold: f64,
    direction: EffectDirection,
) -> f64 {
    let pi = study.prop_treated;
    let bracket = (1.0 - pi) * treated_un - pi * control_un
        + (study.mean_treated_obs + study.mean_control_obs) * pi
        - study.mean_control_obs
        - threshold;
    direction.sign() * scale(study) * bracket
}

/// Statistical-threshold specialization, with the critical value pulled out
/// of the bracket: `√n/√(σt²+σc²) · [...] − critical`.
pub fn probit_piv_with_critical(
    study: &ObservedStudy,
    treated_un: f64,
    control_un: f64,
    critical: f64,
    direction: EffectDirection,
) -> f64 {
    let pi = study.prop_treated;
    let bracket = (1.0 - pi) * treated_un - pi * control_un
        + (study.mean_treated_obs + study.mean_control_obs) * pi
        - study.mean_control_obs;
    direction.sign() * scale(study) * bracket - critical
}

/// The probit link written as an affine map
/// `coef_control_un·Ȳcᵘⁿ + coef_treated_un·Ȳtᵘⁿ + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbitModel {
    pub coef_control_un: f64,
    pub coef_treated_un: f64,
    pub intercept: f64,
}

impl ProbitModel {
    pub fn eval(&self, treated_un: f64, control_un: f64) -> f64 {
        self.coef_control_un * control_un + self.coef_treated_un * treated_un + self.intercept
    }

    /// Folds a fixed `Ȳcᵘⁿ` into the intercept.
    pub fn with_control_un(&self, control_un: f64) -> ProbitModel {
        ProbitModel {
            coef_control_un: 0.0,
            coef_treated_un: self.coef_treated_un,
            intercept: self.intercept + self.coef_control_un * control_un,
        }
    }
}

pub fn probit_model(
    study: &ObservedStudy,
    spec: &ThresholdSpec,
    direction: EffectDirection,
) -> Result<ProbitModel> {
    study.validate()?;
    spec.validate()?;
    let threshold = realize_threshold(spec, direction, study);
    let k = direction.sign() * scale(study);
    let pi = study.prop_treated;
    Ok(ProbitModel {
        coef_control_un: -k * pi,
        coef_treated_un: k * (1.0 - pi),
        intercept: k
            * ((study.mean_treated_obs + study.mean_control_obs) * pi
                - study.mean_control_obs
                - threshold),
    })
}

/// Closed-form PIV at one point of the belief space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivResult {
    pub treated_un: f64,
    pub control_un: f64,
    pub probit_value: f64,
    pub piv: Probability,
    pub direction: EffectDirection,
    /// `θt − θc`
    pub delta_hat_ideal: f64,
    pub se_ideal: f64,
    /// `delta_hat_ideal / se_ideal`
    pub t_ratio: f64,
    /// Realized `δ#`.
    pub threshold_value: f64,
    pub threshold: ThresholdSpec,
}

pub fn piv(
    study: &ObservedStudy,
    treated_un: f64,
    control_un: f64,
    spec: &ThresholdSpec,
    direction: EffectDirection,
) -> Result<PivResult> {
    spec.validate()?;
    let ideal = ideal_distribution(study, treated_un, control_un)?;
    let threshold_value = realize_threshold(spec, direction, study);
    let probit_value = probit_piv(study, treated_un, control_un, threshold_value, direction);
    let piv = std_normal_cdf(probit_value)?;
    let se = se_ideal(study);
    let delta_hat_ideal = ideal.mean();
    Ok(PivResult {
        treated_un,
        control_un,
        probit_value,
        piv,
        direction,
        delta_hat_ideal,
        se_ideal: se,
        t_ratio: delta_hat_ideal / se,
        threshold_value,
        threshold: *spec,
    })
}

/// PIV at the minimizing and maximizing corners of a belief rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivBounds {
    pub lower: PivResult,
    pub upper: PivResult,
}

/// Bounds the PIV over a belief rectangle.
///
/// The probit is affine in `(Ȳtᵘⁿ, Ȳcᵘⁿ)`; for a positive effect it increases
/// in `Ȳtᵘⁿ` and decreases in `Ȳcᵘⁿ`, for a negative effect the reverse.
/// The extrema therefore sit on opposite corners.
pub fn bound_piv(
    study: &ObservedStudy,
    belief: &CounterfactualBelief,
    spec: &ThresholdSpec,
    direction: EffectDirection,
) -> Result<PivBounds> {
    belief.validate()?;
    let (t, c) = (&belief.treated_un, &belief.control_un);
    let (min_corner, max_corner) = match direction {
        EffectDirection::PositiveSignificant => ((t.lower(), c.upper()), (t.upper(), c.lower())),
        EffectDirection::NegativeSignificant => ((t.upper(), c.lower()), (t.lower(), c.upper())),
    };
    Ok(PivBounds {
        lower: piv(study, min_corner.0, min_corner.1, spec, direction)?,
        upper: piv(study, max_corner.0, max_corner.1, spec, direction)?,
    })
}

/// Counterfactual treated mean at which the PIV equals a target level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inversion {
    pub target: Probability,
    pub treated_un: f64,
    pub delta_hat_ideal: f64,
}

/// Solves the affine probit relation for `Ȳtᵘⁿ` given `Ȳcᵘⁿ` and a target PIV.
pub fn invert_for_treated_un(
    study: &ObservedStudy,
    control_un: f64,
    target: Probability,
    spec: &ThresholdSpec,
    direction: EffectDirection,
) -> Result<Inversion> {
    study.validate()?;
    spec.validate()?;
    check_point("control_un", control_un)?;
    let z = std_normal_quantile(target)?;
    let pi = study.prop_treated;
    let se = se_ideal(study);
    let threshold = realize_threshold(spec, direction, study);
    // probit = sign·(Δ − δ#)/se  =>  Δ = δ# + sign·z·se
    let delta_hat_ideal = threshold + direction.sign() * z * se;
    let theta_c = pi * control_un + (1.0 - pi) * study.mean_control_obs;
    let treated_un = (delta_hat_ideal + theta_c - pi * study.mean_treated_obs) / (1.0 - pi);
    Ok(Inversion {
        target,
        treated_un,
        delta_hat_ideal,
    })
}

/// `±T − critical`, which equals the probit of the PIV whenever the threshold
/// is statistical: the PIV is the power of retesting `δ = 0` against
/// `δ = δ̂ⁱᵈ` on the ideal sample.
pub fn power_identity(result: &PivResult, critical: f64) -> Result<f64> {
    if let ThresholdSpec::Fixed(_) = result.threshold {
        return Err(PivError::Contract(
            "power identity only holds for a statistical threshold".into(),
        ));
    }
    Ok(result.direction.sign() * result.t_ratio - critical)
}
