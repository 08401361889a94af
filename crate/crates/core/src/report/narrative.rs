//! The eight-step robustness analysis as a structured report.
//!
//! Steps: (1) inputs, (2) decision threshold, (3) probit model, (4) beliefs
//! about the counterfactual means, (5) PIV cutoff, (6) PIV bounds,
//! (7) verdict, (8) joint analysis over both counterfactual means.

use serde::Serialize;

use super::sig4;
use crate::engine::{bound_piv, probit_model, realize_threshold, se_ideal, PivBounds, ProbitModel};
use crate::error::{PivError, Result};
use crate::normal::Probability;
use crate::study::{
    CounterfactualBelief, EffectDirection, ObservedStudy, ObservedTest, PointOrInterval,
    ThresholdSpec, DEFAULT_CRITICAL,
};

pub const DEFAULT_CUTOFF: f64 = 0.8;
/// Lower bounds this far below the cutoff are borderline rather than weak.
pub const DEFAULT_BORDERLINE_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Strong,
    Borderline,
    Weak,
}

impl Verdict {
    pub fn classify(lower_bound: f64, cutoff: f64, band: f64) -> Verdict {
        if lower_bound >= cutoff {
            Verdict::Strong
        } else if lower_bound >= cutoff - band {
            Verdict::Borderline
        } else {
            Verdict::Weak
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Strong => "strong",
            Verdict::Borderline => "borderline",
            Verdict::Weak => "weak",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub study: ObservedStudy,
    pub belief: CounterfactualBelief,
    pub threshold: ThresholdSpec,
    pub direction: EffectDirection,
    pub threshold_value: f64,
    pub se_ideal: f64,
    pub observed_test: ObservedTest,
    pub probit_model: ProbitModel,
    /// The model with a point belief about `Ȳcᵘⁿ` folded into the intercept.
    pub univariate_model: Option<ProbitModel>,
    pub bounds: PivBounds,
    pub cutoff: Probability,
    pub borderline_band: f64,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
    pub narrative: Vec<String>,
}

/// Renders `probit(PIV) = a·Ycun + b·Ytun + c` with three decimals.
pub fn format_probit_model(m: &ProbitModel) -> String {
    let term = |coef: f64, name: &str| {
        let sign = if coef < 0.0 { "-" } else { "+" };
        format!(" {sign} {:.3}·{name}", coef.abs())
    };
    let constant = {
        let sign = if m.intercept < 0.0 { "-" } else { "+" };
        format!(" {sign} {:.3}", m.intercept.abs())
    };
    if m.coef_control_un == 0.0 {
        let lead = format!("{:.3}", m.intercept);
        format!("probit(PIV) = {lead}{}", term(m.coef_treated_un, "Ytun"))
    } else {
        let lead = format!("{:.3}·Ycun", m.coef_control_un);
        format!(
            "probit(PIV) = {lead}{}{constant}",
            term(m.coef_treated_un, "Ytun")
        )
    }
}

fn describe(belief: &PointOrInterval, name: &str) -> String {
    match *belief {
        PointOrInterval::Point { point } => format!("{name} = {point}"),
        PointOrInterval::Interval { lower, upper } => format!("{lower} <= {name} <= {upper}"),
    }
}

/// Warning for an observed result that did not clear the test in the first place.
pub fn significance_warning(study: &ObservedStudy, spec: &ThresholdSpec) -> Option<String> {
    let critical = spec.critical().unwrap_or(DEFAULT_CRITICAL);
    let test = study.observed_test(critical);
    (!test.significant).then(|| {
        format!(
            "observed estimate {} (t = {}) is not significant at critical value {}; \
             the PIV presumes the null was already rejected",
            sig4(test.estimate),
            sig4(test.t_ratio),
            critical
        )
    })
}

pub fn build_report(
    study: &ObservedStudy,
    belief: &CounterfactualBelief,
    spec: &ThresholdSpec,
    direction: EffectDirection,
    cutoff: Probability,
    borderline_band: f64,
) -> Result<RobustnessReport> {
    if !(borderline_band.is_finite() && borderline_band >= 0.0) {
        return Err(PivError::validation(
            "borderline_band",
            format!("must be a non-negative number, got {borderline_band}"),
        ));
    }
    let model = probit_model(study, spec, direction)?;
    let bounds = bound_piv(study, belief, spec, direction)?;
    let threshold_value = realize_threshold(spec, direction, study);
    let se = se_ideal(study);
    let critical = spec.critical().unwrap_or(DEFAULT_CRITICAL);
    let observed_test = study.observed_test(critical);
    let univariate_model = belief
        .control_un
        .is_point()
        .then(|| model.with_control_un(belief.control_un.lower()));
    let verdict = Verdict::classify(bounds.lower.piv.value(), cutoff.value(), borderline_band);
    let warnings: Vec<String> = significance_warning(study, spec).into_iter().collect();

    let mut narrative = Vec::with_capacity(8);
    narrative.push(format!(
        "Step 1 (inputs): Ytob = {}, Ycob = {}, var_t = {}, var_c = {}, n_obs = {}, pi = {}; observed estimate {} with t = {}.",
        study.mean_treated_obs,
        study.mean_control_obs,
        study.var_treated,
        study.var_control,
        study.n_obs,
        study.prop_treated,
        sig4(observed_test.estimate),
        sig4(observed_test.t_ratio),
    ));
    narrative.push(match *spec {
        ThresholdSpec::Statistical { alpha, critical } => format!(
            "Step 2 (decision threshold): statistical at alpha = {alpha}; delta# = {}{critical} x se = {} with se over the ideal sample = {}.",
            if direction == EffectDirection::NegativeSignificant { "-" } else { "+" },
            sig4(threshold_value),
            sig4(se),
        ),
        ThresholdSpec::Fixed(v) => format!("Step 2 (decision threshold): fixed delta# = {v}."),
    });
    narrative.push(format!(
        "Step 3 (probit model, {} effect): {}.",
        direction.as_str(),
        format_probit_model(&model)
    ));
    let mut step4 = format!(
        "Step 4 (beliefs): {}; {}.",
        describe(&belief.treated_un, "Ytun"),
        describe(&belief.control_un, "Ycun")
    );
    if let Some(uni) = &univariate_model {
        step4.push_str(&format!(" With Ycun fixed: {}.", format_probit_model(uni)));
    }
    narrative.push(step4);
    narrative.push(format!(
        "Step 5 (cutoff): internal validity is called strong when the PIV is at least {}.",
        cutoff.value()
    ));
    narrative.push(format!(
        "Step 6 (PIV bounds): {} <= PIV <= {}; the lower bound is attained at Ytun = {}, Ycun = {}.",
        sig4(bounds.lower.piv.value()),
        sig4(bounds.upper.piv.value()),
        bounds.lower.treated_un,
        bounds.lower.control_un,
    ));
    narrative.push(format!(
        "Step 7 (verdict): {} (lower bound {} against cutoff {}, borderline band {}).",
        verdict.as_str(),
        sig4(bounds.lower.piv.value()),
        cutoff.value(),
        borderline_band
    ));
    narrative.push(
        if belief.treated_un.is_point() || belief.control_un.is_point() {
            "Step 8 (joint analysis): not applicable, one counterfactual mean is held at a point value.".to_string()
        } else {
            format!(
                "Step 8 (joint analysis): over the rectangle {} x {}, the PIV ranges from {} at (Ytun = {}, Ycun = {}) to {} at (Ytun = {}, Ycun = {}).",
                describe(&belief.treated_un, "Ytun"),
                describe(&belief.control_un, "Ycun"),
                sig4(bounds.lower.piv.value()),
                bounds.lower.treated_un,
                bounds.lower.control_un,
                sig4(bounds.upper.piv.value()),
                bounds.upper.treated_un,
                bounds.upper.control_un,
            )
        },
    );

    Ok(RobustnessReport {
        study: *study,
        belief: *belief,
        threshold: *spec,
        direction,
        threshold_value,
        se_ideal: se,
        observed_test,
        probit_model: model,
        univariate_model,
        bounds,
        cutoff,
        borderline_band,
        verdict,
        warnings,
        narrative,
    })
}
