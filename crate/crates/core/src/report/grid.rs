use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::dataset::{Columns, Dataset};
use super::inputs_metadata;
use crate::engine::{probit_piv, realize_threshold};
use crate::error::{PivError, Result};
use crate::normal::std_normal_cdf;
use crate::study::{EffectDirection, ObservedStudy, PointOrInterval, ThresholdSpec};

pub const DEFAULT_RESOLUTION: usize = 201;

/// Rectangle of belief-consistent counterfactual means, sampled on a regular grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibleRegion {
    pub treated_un_range: (f64, f64),
    pub control_un_range: (f64, f64),
    /// Grid points per axis.
    pub resolution: usize,
}

impl PlausibleRegion {
    pub fn new(
        treated_un_range: (f64, f64),
        control_un_range: (f64, f64),
        resolution: usize,
    ) -> Result<Self> {
        let region = PlausibleRegion {
            treated_un_range,
            control_un_range,
            resolution,
        };
        region.validate()?;
        Ok(region)
    }

    pub fn validate(&self) -> Result<()> {
        PointOrInterval::interval(self.treated_un_range.0, self.treated_un_range.1)
            .validate("treated_un_range")?;
        PointOrInterval::interval(self.control_un_range.0, self.control_un_range.1)
            .validate("control_un_range")?;
        if self.resolution < 2 {
            return Err(PivError::validation(
                "resolution",
                format!("need at least 2 points per axis, got {}", self.resolution),
            ));
        }
        Ok(())
    }

    pub fn treated_axis(&self) -> Vec<f64> {
        axis(self.treated_un_range, self.resolution)
    }

    pub fn control_axis(&self) -> Vec<f64> {
        axis(self.control_un_range, self.resolution)
    }
}

fn axis((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub control_un: f64,
    pub treated_un: f64,
    pub probit: f64,
    pub piv: f64,
}

impl Columns for ContourRow {
    const COLUMNS: &'static [&'static str] = &["control_un", "treated_un", "probit", "piv"];
}

/// PIV over the region; rows run over `control_un` (outer) then `treated_un` (inner).
pub type ContourGrid = Dataset<ContourRow>;

pub fn emit_contour_grid(
    study: &ObservedStudy,
    region: &PlausibleRegion,
    spec: &ThresholdSpec,
    direction: EffectDirection,
) -> Result<ContourGrid> {
    study.validate()?;
    spec.validate()?;
    region.validate()?;
    let threshold = realize_threshold(spec, direction, study);
    let treated = region.treated_axis();
    let control = region.control_axis();

    let rows = control
        .par_iter()
        .map(|&c| {
            treated
                .iter()
                .map(|&t| {
                    let probit = probit_piv(study, t, c, threshold, direction);
                    Ok(ContourRow {
                        control_un: c,
                        treated_un: t,
                        probit,
                        piv: std_normal_cdf(probit)?.value(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut metadata = inputs_metadata(study, spec, direction);
    metadata.insert("dataset".into(), json!("contour"));
    metadata.insert("region".into(), json!(region));
    metadata.insert("threshold_value".into(), json!(threshold));
    Ok(Dataset::new(metadata, rows))
}

/// Row nearest to a point of the belief space.
pub fn nearest_row(grid: &ContourGrid, treated_un: f64, control_un: f64) -> Option<&ContourRow> {
    grid.rows.iter().min_by(|a, b| {
        let da = (a.treated_un - treated_un).hypot(a.control_un - control_un);
        let db = (b.treated_un - treated_un).hypot(b.control_un - control_un);
        da.total_cmp(&db)
    })
}
