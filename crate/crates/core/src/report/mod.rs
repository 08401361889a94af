//! Data products: contour grids over the plausible region, threshold
//! tables, power-figure data, SVG renderings and the step-by-step
//! robustness report.

pub mod dataset;
pub mod grid;
pub mod narrative;
pub mod power;
pub mod svg;
pub mod table;

use serde_json::{json, Map, Value};

use crate::study::{EffectDirection, ObservedStudy, ThresholdSpec};

pub use dataset::{Columns, Dataset};
pub use grid::{emit_contour_grid, ContourGrid, ContourRow, PlausibleRegion, DEFAULT_RESOLUTION};
pub use narrative::{
    build_report, RobustnessReport, Verdict, DEFAULT_BORDERLINE_BAND, DEFAULT_CUTOFF,
};
pub use power::{emit_power_figure_data, PowerFigure, PowerRow};
pub use table::{emit_threshold_table, ThresholdRow, ThresholdTable};

pub(crate) fn inputs_metadata(
    study: &ObservedStudy,
    spec: &ThresholdSpec,
    direction: EffectDirection,
) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(
        "tool".into(),
        json!(format!("piv {}", env!("CARGO_PKG_VERSION"))),
    );
    m.insert("study".into(), json!(study));
    m.insert("threshold".into(), json!(spec));
    m.insert("direction".into(), json!(direction));
    m
}

/// Formats a number with four significant digits (fixed notation).
pub fn sig4(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0.000".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new digit (9.9996 -> 10.000)
    let rounded: f64 = s.parse().unwrap_or(v);
    if rounded != 0.0 && (rounded.abs().log10().floor() as i32) > magnitude && decimals > 0 {
        format!("{v:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}
