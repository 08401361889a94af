//! Command-line front end. Every subcommand resolves the JSON config plus
//! flag overrides, calls one library operation, and renders the result.
//!
//! Exit status: 0 success, 1 I/O error, 2 invalid input, 3 degenerate math
//! (saturated probability, zero observed effect).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{
    BeliefConfig, DirectionChoice, ResolvedConfig, StatisticalConfig, StudyConfig, ThresholdConfig,
};
use crate::engine::{bound_piv, invert_for_treated_un, piv};
use crate::error::PivError;
use crate::normal::Probability;
use crate::oracle::{
    simulate_piv, simulate_power_curve, SimConfig, SimMode, DEFAULT_REPLICATIONS, DEFAULT_SEED,
    RNG_ALGORITHM,
};
use crate::report::narrative::{format_probit_model, significance_warning};
use crate::report::svg::{contour_svg, power_svg};
use crate::report::{
    build_report, emit_contour_grid, emit_power_figure_data, emit_threshold_table, sig4, Dataset,
    PlausibleRegion, DEFAULT_BORDERLINE_BAND, DEFAULT_CUTOFF, DEFAULT_RESOLUTION,
};
use crate::study::{PointOrInterval, ThresholdSpec};

pub const SEED_ENV: &str = "PIV_SEED";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Piv(#[from] PivError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Piv(e) if e.is_degenerate() => 3,
            CliError::Piv(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "piv",
    version,
    about = "Probability that a causal inference is robust for internal validity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PIV at one point of the belief space.
    Piv(PointCmd),
    /// Lower and upper PIV over the belief rectangle.
    Bound(BoundCmd),
    /// Ytun at which the PIV reaches a target, Ycun fixed.
    Invert(InvertCmd),
    /// Ytun and ideal-estimate thresholds for a list of PIV levels.
    Table(TableCmd),
    /// PIV over a grid of the plausible region.
    Grid(GridCmd),
    /// Null and alternative densities with the rejection region.
    Power(PointCmd),
    /// Monte Carlo estimate of the PIV.
    Simulate(SimulateCmd),
    /// Step-by-step robustness report with a verdict.
    Report(ReportCmd),
}

#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// JSON study configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub mean_treated_obs: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mean_control_obs: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub var_treated: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub var_control: Option<f64>,
    #[arg(long)]
    pub n_obs: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub prop_treated: Option<f64>,
    /// Fixed decision threshold in outcome units.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["alpha", "critical"])]
    pub threshold_fixed: Option<f64>,
    /// Significance level of the statistical threshold.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Critical value of the statistical threshold (overrides the one implied by alpha).
    #[arg(long)]
    pub critical: Option<f64>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BeliefArgs {
    /// Point value for Ytun.
    #[arg(long, allow_hyphen_values = true)]
    pub treated_un: Option<f64>,
    /// Point value for Ycun.
    #[arg(long, allow_hyphen_values = true)]
    pub control_un: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub treated_un_lower: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub treated_un_upper: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub control_un_lower: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub control_un_upper: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Auto,
    Positive,
    Negative,
}

impl From<DirectionArg> for DirectionChoice {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Auto => DirectionChoice::Auto,
            DirectionArg::Positive => DirectionChoice::Positive,
            DirectionArg::Negative => DirectionChoice::Negative,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PointCmd {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub belief: BeliefArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundCmd {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub belief: BeliefArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InvertCmd {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub belief: BeliefArgs,
    /// Target PIV in (0, 1).
    #[arg(long)]
    pub target: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableCmd {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub belief: BeliefArgs,
    /// PIV levels as start:stop:step or a comma-separated list.
    #[arg(long, default_value = "0.1:0.9:0.1")]
    pub levels: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridCmd {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub belief: BeliefArgs,
    /// Ytun axis as lower:upper (defaults to the treated_un belief interval).
    #[arg(long, allow_hyphen_values = true)]
    pub treated_range: Option<String>,
    /// Ycun axis as lower:upper (defaults to the control_un belief interval).
    #[arg(long, allow_hyphen_values = true)]
    pub control_range: Option<String>,
    /// Grid points per axis.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateCmd {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub belief: BeliefArgs,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    pub replications: u64,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Estimator)]
    pub mode: ModeArg,
    /// Simulate along a Ytun grid (start:stop:step or list) instead of one point.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Estimator,
    Individuals,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Estimator => SimMode::SampleEstimator,
            ModeArg::Individuals => SimMode::SampleIndividuals,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReportCmd {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub belief: BeliefArgs,
    /// PIV at or above which internal validity is called strong.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: f64,
    /// Width of the borderline band below the cutoff.
    #[arg(long, default_value_t = DEFAULT_BORDERLINE_BAND)]
    pub band: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `start:stop:step` (inclusive) or `a,b,c`.
pub fn parse_list(spec: &str, field: &str) -> Result<Vec<f64>, PivError> {
    let bad = |why: &str| PivError::validation(field, format!("{why} in {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || stop < start || !start.is_finite() || !stop.is_finite() {
            return Err(bad("need start <= stop and a positive step"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // snap to 12 decimals so 0.1 + 2 * 0.1 prints as 0.3
        Ok((0..count)
            .map(|i| ((start + step * i as f64) * 1e12).round() / 1e12)
            .collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

fn parse_range(spec: &str, field: &str) -> Result<(f64, f64), PivError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| PivError::validation(field, format!("not a number in {spec:?}")))
    };
    if parts.len() != 2 {
        return Err(PivError::validation(
            field,
            format!("expected lower:upper, got {spec:?}"),
        ));
    }
    Ok((num(parts[0])?, num(parts[1])?))
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn merge_belief(
    base: Option<PointOrInterval>,
    point: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
    field: &str,
) -> Result<Option<PointOrInterval>, PivError> {
    if let Some(p) = point {
        return Ok(Some(PointOrInterval::point(p)));
    }
    if lower.is_none() && upper.is_none() {
        return Ok(base);
    }
    let lo = lower.or(base.map(|b| b.lower()));
    let hi = upper.or(base.map(|b| b.upper()));
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok(Some(PointOrInterval::interval(lo, hi))),
        _ => Err(PivError::validation(
            field,
            "an interval needs both a lower and an upper end",
        )),
    }
}

/// Config file (if any) with flag overrides applied, validated.
pub fn resolve_inputs(inputs: &InputArgs, belief: &BeliefArgs) -> Result<ResolvedConfig, CliError> {
    let mut cfg = match &inputs.config {
        Some(path) => StudyConfig::from_json(&read_to_string(path)?)?,
        None => StudyConfig::default(),
    };
    let s = &mut cfg.study;
    s.mean_treated_obs = inputs.mean_treated_obs.or(s.mean_treated_obs);
    s.mean_control_obs = inputs.mean_control_obs.or(s.mean_control_obs);
    s.var_treated = inputs.var_treated.or(s.var_treated);
    s.var_control = inputs.var_control.or(s.var_control);
    s.n_obs = inputs.n_obs.or(s.n_obs);
    s.prop_treated = inputs.prop_treated.or(s.prop_treated);

    if let Some(v) = inputs.threshold_fixed {
        cfg.threshold = Some(ThresholdConfig::Fixed(v));
    } else if inputs.alpha.is_some() || inputs.critical.is_some() {
        let base = match cfg.threshold {
            Some(ThresholdConfig::Statistical(st)) => st,
            _ => StatisticalConfig::default(),
        };
        // a new alpha without a new critical value recomputes the critical value
        let critical = match (inputs.alpha, inputs.critical) {
            (_, Some(c)) => Some(c),
            (Some(_), None) => None,
            (None, None) => base.critical,
        };
        cfg.threshold = Some(ThresholdConfig::Statistical(StatisticalConfig {
            alpha: inputs.alpha.or(base.alpha),
            critical,
        }));
    }
    if let Some(d) = inputs.direction {
        cfg.direction = Some(d.into());
    }
    cfg.belief = BeliefConfig {
        treated_un: merge_belief(
            cfg.belief.treated_un,
            belief.treated_un,
            belief.treated_un_lower,
            belief.treated_un_upper,
            "treated_un",
        )?,
        control_un: merge_belief(
            cfg.belief.control_un,
            belief.control_un,
            belief.control_un_lower,
            belief.control_un_upper,
            "control_un",
        )?,
    };
    Ok(cfg.resolve()?)
}

fn require_point(b: Option<PointOrInterval>, field: &str, flag: &str) -> Result<f64, PivError> {
    match b {
        Some(b) if b.is_point() => Ok(b.lower()),
        Some(_) => Err(PivError::validation(
            field,
            format!("this subcommand needs a point value (use {flag})"),
        )),
        None => Err(PivError::validation(field, format!("missing (use {flag})"))),
    }
}

fn require_belief(b: Option<PointOrInterval>, field: &str) -> Result<PointOrInterval, PivError> {
    b.ok_or_else(|| PivError::validation(field, "missing belief"))
}

fn provenance(subcommand: &str, resolved: &ResolvedConfig) -> Value {
    json!({
        "tool": "piv",
        "version": VERSION,
        "subcommand": subcommand,
        "inputs": resolved,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| PivError::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn echo_inputs(r: &ResolvedConfig) -> String {
    let s = &r.study;
    let threshold = match r.threshold {
        ThresholdSpec::Fixed(v) => format!("fixed {v}"),
        ThresholdSpec::Statistical { alpha, critical } => {
            format!("statistical (alpha {alpha}, critical {critical})")
        }
    };
    let belief = |b: Option<PointOrInterval>| match b {
        None => "-".to_string(),
        Some(PointOrInterval::Point { point }) => point.to_string(),
        Some(PointOrInterval::Interval { lower, upper }) => format!("[{lower}, {upper}]"),
    };
    format!(
        "inputs: Ytob {} Ycob {} var_t {} var_c {} n_obs {} pi {}\n\
         threshold: {threshold}; direction: {} ({})\n\
         belief: Ytun {} Ycun {}\n",
        s.mean_treated_obs,
        s.mean_control_obs,
        s.var_treated,
        s.var_control,
        s.n_obs,
        s.prop_treated,
        r.direction.as_str(),
        match r.direction_choice {
            DirectionChoice::Auto => "auto",
            DirectionChoice::Positive => "set to positive",
            DirectionChoice::Negative => "set to negative",
        },
        belief(r.belief.treated_un),
        belief(r.belief.control_un),
    )
}

fn warnings(r: &ResolvedConfig) -> Vec<String> {
    significance_warning(&r.study, &r.threshold)
        .into_iter()
        .collect()
}

fn warning_lines(r: &ResolvedConfig) -> String {
    warnings(r)
        .iter()
        .map(|w| format!("warning: {w}\n"))
        .collect()
}

fn unsupported(sub: &str, format: OutputFormat) -> CliError {
    CliError::Usage(format!(
        "`{sub}` does not support --output {}",
        format!("{format:?}").to_lowercase()
    ))
}

/// Runs one invocation and returns the rendered output.
pub fn execute(command: &Command) -> Result<(String, Option<PathBuf>), CliError> {
    match command {
        Command::Piv(cmd) => {
            let r = resolve_inputs(&cmd.inputs, &cmd.belief)?;
            let t = require_point(r.belief.treated_un, "treated_un", "--treated-un")?;
            let c = require_point(r.belief.control_un, "control_un", "--control-un")?;
            let res = piv(&r.study, t, c, &r.threshold, r.direction)?;
            let text = match cmd.output.output {
                OutputFormat::Text => format!(
                    "{}{}PIV = {}\nprobit(PIV) = {}\nideal estimate = {} (se {}, T = {})\nthreshold = {}\n",
                    echo_inputs(&r),
                    warning_lines(&r),
                    sig4(res.piv.value()),
                    sig4(res.probit_value),
                    sig4(res.delta_hat_ideal),
                    sig4(res.se_ideal),
                    sig4(res.t_ratio),
                    sig4(res.threshold_value),
                ),
                OutputFormat::Json => to_json(&json!({
                    "provenance": provenance("piv", &r),
                    "result": res,
                    "warnings": warnings(&r),
                }))?,
                f => return Err(unsupported("piv", f)),
            };
            Ok((text, cmd.output.out.clone()))
        }
        Command::Bound(cmd) => {
            let r = resolve_inputs(&cmd.inputs, &cmd.belief)?;
            let belief = crate::study::CounterfactualBelief {
                treated_un: require_belief(r.belief.treated_un, "treated_un")?,
                control_un: require_belief(r.belief.control_un, "control_un")?,
            };
            let b = bound_piv(&r.study, &belief, &r.threshold, r.direction)?;
            let text = match cmd.output.output {
                OutputFormat::Text => format!(
                    "{}{}PIV lower bound = {} at Ytun {} Ycun {}\nPIV upper bound = {} at Ytun {} Ycun {}\n",
                    echo_inputs(&r),
                    warning_lines(&r),
                    sig4(b.lower.piv.value()),
                    b.lower.treated_un,
                    b.lower.control_un,
                    sig4(b.upper.piv.value()),
                    b.upper.treated_un,
                    b.upper.control_un,
                ),
                OutputFormat::Json => to_json(&json!({
                    "provenance": provenance("bound", &r),
                    "bounds": b,
                    "warnings": warnings(&r),
                }))?,
                f => return Err(unsupported("bound", f)),
            };
            Ok((text, cmd.output.out.clone()))
        }
        Command::Invert(cmd) => {
            let r = resolve_inputs(&cmd.inputs, &cmd.belief)?;
            let c = require_point(r.belief.control_un, "control_un", "--control-un")?;
            let target = Probability::new(cmd.target).map_err(|_| {
                PivError::validation("target", format!("{} is not in [0, 1]", cmd.target))
            })?;
            let inv = invert_for_treated_un(&r.study, c, target, &r.threshold, r.direction)?;
            let text = match cmd.output.output {
                OutputFormat::Text => format!(
                    "{}{}PIV {} at Ytun = {} (ideal estimate = {})\n",
                    echo_inputs(&r),
                    warning_lines(&r),
                    cmd.target,
                    sig4(inv.treated_un),
                    sig4(inv.delta_hat_ideal),
                ),
                OutputFormat::Json => to_json(&json!({
                    "provenance": provenance("invert", &r),
                    "inversion": inv,
                    "warnings": warnings(&r),
                }))?,
                f => return Err(unsupported("invert", f)),
            };
            Ok((text, cmd.output.out.clone()))
        }
        Command::Table(cmd) => {
            let r = resolve_inputs(&cmd.inputs, &cmd.belief)?;
            let c = require_point(r.belief.control_un, "control_un", "--control-un")?;
            let levels = parse_list(&cmd.levels, "levels")?
                .into_iter()
                .map(|p| {
                    Probability::new(p).map_err(|_| {
                        PivError::validation("levels", format!("{p} is not in [0, 1]"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let table = emit_threshold_table(&r.study, c, &levels, &r.threshold, r.direction)?;
            let text = match cmd.output.output {
                OutputFormat::Text => {
                    let mut s = echo_inputs(&r) + &warning_lines(&r);
                    s.push_str(&format!(
                        "{:>8}  {:>10}  {:>10}\n",
                        "PIV", "Ytun", "delta_id"
                    ));
                    for row in &table.rows {
                        s.push_str(&format!(
                            "{:>8}  {:>10}  {:>10}\n",
                            row.piv_level,
                            sig4(row.treated_un_threshold),
                            sig4(row.delta_hat_ideal)
                        ));
                    }
                    s
                }
                OutputFormat::Csv => table.to_csv()?,
                OutputFormat::Json => to_json(&json!({
                    "provenance": provenance("table", &r),
                    "table": table,
                }))?,
                f => return Err(unsupported("table", f)),
            };
            Ok((text, cmd.output.out.clone()))
        }
        Command::Grid(cmd) => {
            let r = resolve_inputs(&cmd.inputs, &cmd.belief)?;
            let axis = |range: &Option<String>,
                        b: Option<PointOrInterval>,
                        field: &str,
                        flag: &str| {
                match (range, b) {
                    (Some(spec), _) => parse_range(spec, field),
                    (None, Some(PointOrInterval::Interval { lower, upper })) => Ok((lower, upper)),
                    _ => Err(PivError::validation(
                        field,
                        format!("grid needs an interval (use {flag} lower:upper)"),
                    )),
                }
            };
            let region = PlausibleRegion::new(
                axis(
                    &cmd.treated_range,
                    r.belief.treated_un,
                    "treated_range",
                    "--treated-range",
                )?,
                axis(
                    &cmd.control_range,
                    r.belief.control_un,
                    "control_range",
                    "--control-range",
                )?,
                cmd.resolution,
            )?;
            let grid = emit_contour_grid(&r.study, &region, &r.threshold, r.direction)?;
            let text = match cmd.output.output {
                OutputFormat::Text => {
                    let (lo, hi) = grid
                        .rows
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), row| {
                            (lo.min(row.piv), hi.max(row.piv))
                        });
                    format!(
                        "{}{}{}x{} grid over Ytun [{}, {}] x Ycun [{}, {}]: PIV from {} to {}\n",
                        echo_inputs(&r),
                        warning_lines(&r),
                        region.resolution,
                        region.resolution,
                        region.treated_un_range.0,
                        region.treated_un_range.1,
                        region.control_un_range.0,
                        region.control_un_range.1,
                        sig4(lo),
                        sig4(hi)
                    )
                }
                OutputFormat::Csv => grid.to_csv()?,
                OutputFormat::Json => grid.to_json()? + "\n",
                OutputFormat::Svg => contour_svg(&grid, &region),
            };
            Ok((text, cmd.output.out.clone()))
        }
        Command::Power(cmd) => {
            let r = resolve_inputs(&cmd.inputs, &cmd.belief)?;
            let t = require_point(r.belief.treated_un, "treated_un", "--treated-un")?;
            let c = require_point(r.belief.control_un, "control_un", "--control-un")?;
            let fig = emit_power_figure_data(&r.study, t, c, &r.threshold, r.direction)?;
            let text = match cmd.output.output {
                OutputFormat::Text => format!(
                    "{}{}ideal estimate = {} (se {}), threshold = {}\nshaded mass: {} (normal CDF), {} (trapezoid over {} points)\n",
                    echo_inputs(&r),
                    warning_lines(&r),
                    sig4(fig.delta_hat_ideal),
                    sig4(fig.se_ideal),
                    sig4(fig.threshold_value),
                    sig4(fig.shaded_mass_cdf),
                    sig4(fig.shaded_mass_trapezoid),
                    fig.data.len(),
                ),
                OutputFormat::Csv => fig.data.to_csv()?,
                OutputFormat::Json => to_json(&fig)?,
                OutputFormat::Svg => power_svg(&fig),
            };
            Ok((text, cmd.output.out.clone()))
        }
        Command::Simulate(cmd) => {
            let r = resolve_inputs(&cmd.inputs, &cmd.belief)?;
            let c = require_point(r.belief.control_un, "control_un", "--control-un")?;
            let cfg = SimConfig {
                n_replications: cmd.replications,
                seed: cmd.seed,
                mode: cmd.mode.into(),
            };
            let mut prov = provenance("simulate", &r);
            prov["seed"] = json!(cmd.seed);
            prov["replications"] = json!(cmd.replications);
            prov["mode"] = json!(cfg.mode);
            prov["rng"] = json!(RNG_ALGORITHM);

            let text = if let Some(grid) = &cmd.grid {
                let points = parse_list(grid, "grid")?;
                let curve =
                    simulate_power_curve(&r.study, c, &points, &r.threshold, r.direction, &cfg)?;
                match cmd.output.output {
                    OutputFormat::Text => {
                        let mut s = echo_inputs(&r) + &warning_lines(&r);
                        s.push_str(&format!(
                            "{:>10}  {:>8}  {:>8}  {:>9}  {:>8}\n",
                            "Ytun", "PIV", "sim", "mc_se", "T"
                        ));
                        for row in &curve.rows {
                            s.push_str(&format!(
                                "{:>10}  {:>8}  {:>8}  {:>9}  {:>8}\n",
                                row.treated_un,
                                sig4(row.piv),
                                sig4(row.piv_hat),
                                sig4(row.mc_stderr),
                                sig4(row.t_ratio)
                            ));
                        }
                        s.push_str(&format!("monotone: {}\n", curve.monotone));
                        s
                    }
                    OutputFormat::Csv => {
                        let mut meta = serde_json::Map::new();
                        if let Value::Object(m) = prov {
                            meta = m;
                        }
                        meta.insert("monotone".into(), json!(curve.monotone));
                        Dataset::new(meta, curve.rows).to_csv()?
                    }
                    OutputFormat::Json => to_json(&json!({
                        "provenance": prov,
                        "curve": curve,
                        "warnings": warnings(&r),
                    }))?,
                    f => return Err(unsupported("simulate", f)),
                }
            } else {
                let t = require_point(r.belief.treated_un, "treated_un", "--treated-un")?;
                let exact = piv(&r.study, t, c, &r.threshold, r.direction)?;
                let sim = simulate_piv(&r.study, t, c, &r.threshold, r.direction, &cfg)?;
                match cmd.output.output {
                    OutputFormat::Text => format!(
                        "{}{}simulated PIV = {} (mc se {}), closed form = {}\n{} replications, seed {}, mode {}, rng {}\n",
                        echo_inputs(&r),
                        warning_lines(&r),
                        sig4(sim.piv_hat.value()),
                        sig4(sim.mc_stderr),
                        sig4(exact.piv.value()),
                        cmd.replications,
                        cmd.seed,
                        match cfg.mode {
                            SimMode::SampleEstimator => "estimator",
                            SimMode::SampleIndividuals => "individuals",
                        },
                        RNG_ALGORITHM,
                    ),
                    OutputFormat::Json => to_json(&json!({
                        "provenance": prov,
                        "simulation": sim,
                        "closed_form": exact,
                        "warnings": warnings(&r),
                    }))?,
                    f => return Err(unsupported("simulate", f)),
                }
            };
            Ok((text, cmd.output.out.clone()))
        }
        Command::Report(cmd) => {
            let r = resolve_inputs(&cmd.inputs, &cmd.belief)?;
            let belief = crate::study::CounterfactualBelief {
                treated_un: require_belief(r.belief.treated_un, "treated_un")?,
                control_un: require_belief(r.belief.control_un, "control_un")?,
            };
            let cutoff = Probability::new(cmd.cutoff).map_err(|_| {
                PivError::validation("cutoff", format!("{} is not in [0, 1]", cmd.cutoff))
            })?;
            let report = build_report(
                &r.study,
                &belief,
                &r.threshold,
                r.direction,
                cutoff,
                cmd.band,
            )?;
            let text = match cmd.output.output {
                OutputFormat::Text => {
                    let mut s = echo_inputs(&r);
                    for w in &report.warnings {
                        s.push_str(&format!("warning: {w}\n"));
                    }
                    for line in &report.narrative {
                        s.push_str(line);
                        s.push('\n');
                    }
                    s
                }
                OutputFormat::Json => to_json(&json!({
                    "provenance": provenance("report", &r),
                    "probit_model_text": format_probit_model(&report.probit_model),
                    "report": report,
                }))?,
                f => return Err(unsupported("report", f)),
            };
            Ok((text, cmd.output.out.clone()))
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (text, out) = execute(&cli.command)?;
    match out {
        Some(path) => fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Entry point shared by the binary: parse, run, map errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
