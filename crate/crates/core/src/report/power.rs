//! Data behind the two-density power picture: the null `N(0, se²)`, the
//! alternative `N(δ̂ⁱᵈ, se²)`, and the rejection region beyond `δ#` whose
//! mass under the alternative is the PIV.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::dataset::{Columns, Dataset};
use super::inputs_metadata;
use crate::engine::piv;
use crate::error::Result;
use crate::normal::std_normal_pdf;
use crate::study::{EffectDirection, ObservedStudy, ThresholdSpec};

/// Minimum number of abscissae on the symmetric grid.
const MIN_POINTS: usize = 2001;
/// Grid spacing never exceeds `se / STEPS_PER_SE`.
const STEPS_PER_SE: f64 = 50.0;
const MAX_POINTS: usize = 400_001;
/// Half-width beyond the furthest feature, in standard errors.
const TAIL_SE: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub x: f64,
    pub null_density: f64,
    pub alt_density: f64,
    pub is_rejection_region: bool,
}

impl Columns for PowerRow {
    const COLUMNS: &'static [&'static str] =
        &["x", "null_density", "alt_density", "is_rejection_region"];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerFigure {
    pub data: Dataset<PowerRow>,
    pub threshold_value: f64,
    pub delta_hat_ideal: f64,
    pub se_ideal: f64,
    pub direction: EffectDirection,
    /// PIV from the normal CDF.
    pub shaded_mass_cdf: f64,
    /// Trapezoid integral of the emitted alternative density over the rejection region.
    pub shaded_mass_trapezoid: f64,
}

fn density(x: f64, mean: f64, sd: f64) -> f64 {
    std_normal_pdf((x - mean) / sd) / sd
}

pub fn emit_power_figure_data(
    study: &ObservedStudy,
    treated_un: f64,
    control_un: f64,
    spec: &ThresholdSpec,
    direction: EffectDirection,
) -> Result<PowerFigure> {
    let result = piv(study, treated_un, control_un, spec, direction)?;
    let se = result.se_ideal;
    let threshold = result.threshold_value;
    let alt_mean = result.delta_hat_ideal;

    let half_width = alt_mean.abs().max(threshold.abs()) + TAIL_SE * se;
    let wanted = (2.0 * half_width / (se / STEPS_PER_SE)).ceil() as usize + 1;
    let n = wanted.clamp(MIN_POINTS, MAX_POINTS);
    let step = 2.0 * half_width / (n - 1) as f64;

    let mut xs: Vec<f64> = (0..n).map(|i| -half_width + step * i as f64).collect();
    xs[n - 1] = half_width;
    // the threshold is always a node so the shaded region ends exactly on it
    if let Err(pos) = xs.binary_search_by(|x| x.total_cmp(&threshold)) {
        xs.insert(pos, threshold);
    }

    let rejects = |x: f64| match direction {
        EffectDirection::PositiveSignificant => x >= threshold,
        EffectDirection::NegativeSignificant => x <= threshold,
    };
    let rows: Vec<PowerRow> = xs
        .iter()
        .map(|&x| PowerRow {
            x,
            null_density: density(x, 0.0, se),
            alt_density: density(x, alt_mean, se),
            is_rejection_region: rejects(x),
        })
        .collect();

    let shaded_mass_trapezoid = rows
        .windows(2)
        .filter(|w| w[0].is_rejection_region && w[1].is_rejection_region)
        .map(|w| 0.5 * (w[1].x - w[0].x) * (w[0].alt_density + w[1].alt_density))
        .sum();

    let mut metadata = inputs_metadata(study, spec, direction);
    metadata.insert("dataset".into(), json!("power"));
    metadata.insert("treated_un".into(), json!(treated_un));
    metadata.insert("control_un".into(), json!(control_un));
    metadata.insert("delta_hat_ideal".into(), json!(alt_mean));
    metadata.insert("se_ideal".into(), json!(se));
    metadata.insert("threshold_value".into(), json!(threshold));
    metadata.insert("piv".into(), json!(result.piv.value()));

    Ok(PowerFigure {
        data: Dataset::new(metadata, rows),
        threshold_value: threshold,
        delta_hat_ideal: alt_mean,
        se_ideal: se,
        direction,
        shaded_mass_cdf: result.piv.value(),
        shaded_mass_trapezoid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::se_ideal;

    const NEG: EffectDirection = EffectDirection::NegativeSignificant;

    fn hong() -> ObservedStudy {
        ObservedStudy {
            mean_treated_obs: 36.77,
            mean_control_obs: 45.78,
            var_treated: 143.26,
            var_control: 138.83,
            n_obs: 7639,
            prop_treated: 0.0617,
        }
    }

    #[test]
    fn coincident_curves_give_alpha_over_two() {
        let s = hong();
        let pi = s.prop_treated;
        let control_un = 45.2;
        let theta_c = pi * control_un + (1.0 - pi) * s.mean_control_obs;
        let treated_un = (theta_c - pi * s.mean_treated_obs) / (1.0 - pi);
        let fig =
            emit_power_figure_data(&s, treated_un, control_un, &ThresholdSpec::default(), NEG)
                .unwrap();
        assert!(fig.delta_hat_ideal.abs() < 1e-12);
        assert!((fig.shaded_mass_cdf - 0.025).abs() < 1e-4);
        assert!((fig.shaded_mass_trapezoid - fig.shaded_mass_cdf).abs() <= 1e-4);
        for row in &fig.data.rows {
            assert!((row.null_density - row.alt_density).abs() < 1e-9);
        }
    }

    #[test]
    fn reference_point() {
        let fig =
            emit_power_figure_data(&hong(), 45.76, 45.2, &ThresholdSpec::default(), NEG).unwrap();
        assert!((fig.shaded_mass_cdf - 0.8).abs() <= 0.01);
        assert!((fig.shaded_mass_trapezoid - fig.shaded_mass_cdf).abs() <= 1e-4);
        assert!((fig.se_ideal - se_ideal(&hong())).abs() < 1e-15);
        let xs: Vec<f64> = fig.data.rows.iter().map(|r| r.x).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(xs[0], -xs[xs.len() - 1]);
        assert!(xs.contains(&fig.threshold_value));
    }
}
