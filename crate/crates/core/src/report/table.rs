use serde::{Deserialize, Serialize};
use serde_json::json;

use super::dataset::{Columns, Dataset};
use super::inputs_metadata;
use crate::engine::{invert_for_treated_un, se_ideal};
use crate::error::Result;
use crate::normal::Probability;
use crate::study::{EffectDirection, ObservedStudy, ThresholdSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub piv_level: f64,
    pub treated_un_threshold: f64,
    pub delta_hat_ideal: f64,
}

impl Columns for ThresholdRow {
    const COLUMNS: &'static [&'static str] =
        &["piv_level", "treated_un_threshold", "delta_hat_ideal"];
}

pub type ThresholdTable = Dataset<ThresholdRow>;

/// Thresholds of `Ȳtᵘⁿ` and of the ideal-sample estimate at each PIV level, `Ȳcᵘⁿ` held fixed.
pub fn emit_threshold_table(
    study: &ObservedStudy,
    control_un: f64,
    piv_levels: &[Probability],
    spec: &ThresholdSpec,
    direction: EffectDirection,
) -> Result<ThresholdTable> {
    let rows = piv_levels
        .iter()
        .map(|&level| {
            let inv = invert_for_treated_un(study, control_un, level, spec, direction)?;
            Ok(ThresholdRow {
                piv_level: level.value(),
                treated_un_threshold: inv.treated_un,
                delta_hat_ideal: inv.delta_hat_ideal,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut metadata = inputs_metadata(study, spec, direction);
    metadata.insert("dataset".into(), json!("threshold_table"));
    metadata.insert("control_un".into(), json!(control_un));
    metadata.insert("se_ideal".into(), json!(se_ideal(study)));
    Ok(Dataset::new(metadata, rows))
}
