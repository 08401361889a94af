//! Monte Carlo oracle for the closed-form PIV.
//!
//! Each replication draws an ideal-sample estimate of the effect and re-runs
//! the test against `δ#`; the fraction that rejects again in the significant
//! direction estimates the PIV.
//!
//! Randomness: ChaCha8 keyed by the seed, with the replication index as the
//! stream id. Replication `i` therefore sees the same numbers regardless of
//! how replications are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{ideal_distribution, piv, realize_threshold, se_ideal};
use crate::error::{PivError, Result};
use crate::normal::{std_normal_quantile_approx, Probability};
use crate::report::Columns;
use crate::study::{EffectDirection, ObservedStudy, ThresholdSpec};

pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9), key = seed_from_u64(seed), stream = replication index";
pub const DEFAULT_REPLICATIONS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_050_205;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// One draw of the estimator from its sampling distribution per replication.
    SampleEstimator,
    /// `n` treated and `n` control outcomes per replication; the estimate is the mean difference.
    SampleIndividuals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_replications: u64,
    pub seed: u64,
    pub mode: SimMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            mode: SimMode::SampleEstimator,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_replications == 0 {
            return Err(PivError::validation(
                "n_replications",
                "need at least one replication",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimOutcome {
    pub piv_hat: Probability,
    pub mc_stderr: f64,
    pub rejections: u64,
    pub config: SimConfig,
    pub rng: &'static str,
}

#[inline]
fn open_unit(bits: u64) -> f64 {
    // 53 random bits, shifted half a step off zero
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    std_normal_quantile_approx(open_unit(rng.next_u64()))
}

fn mean_of_std_normals(rng: &mut ChaCha8Rng, n: u64) -> f64 {
    let mut sum = 0.0;
    for _ in 0..n {
        sum += std_normal(rng);
    }
    sum / n as f64
}

/// Simulates the PIV at one point of the belief space.
pub fn simulate_piv(
    study: &ObservedStudy,
    treated_un: f64,
    control_un: f64,
    spec: &ThresholdSpec,
    direction: EffectDirection,
    cfg: &SimConfig,
) -> Result<SimOutcome> {
    cfg.validate()?;
    spec.validate()?;
    let ideal = ideal_distribution(study, treated_un, control_un)?;
    let threshold = realize_threshold(spec, direction, study);
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    let se = se_ideal(study);
    let (sd_t, sd_c) = (study.var_treated.sqrt(), study.var_control.sqrt());
    let n = study.n_obs;
    let mode = cfg.mode;

    let rejects = move |estimate: f64| match direction {
        EffectDirection::PositiveSignificant => estimate > threshold,
        EffectDirection::NegativeSignificant => estimate < threshold,
    };

    let rejections: u64 = (0..cfg.n_replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = base.clone();
            rng.set_stream(rep);
            let estimate = match mode {
                SimMode::SampleEstimator => ideal.mean() + se * std_normal(&mut rng),
                SimMode::SampleIndividuals => {
                    let mean_t = ideal.theta_t + sd_t * mean_of_std_normals(&mut rng, n);
                    let mean_c = ideal.theta_c + sd_c * mean_of_std_normals(&mut rng, n);
                    mean_t - mean_c
                }
            };
            u64::from(rejects(estimate))
        })
        .sum();

    let reps = cfg.n_replications as f64;
    let p_hat = rejections as f64 / reps;
    Ok(SimOutcome {
        piv_hat: Probability::new(p_hat)?,
        mc_stderr: (p_hat * (1.0 - p_hat) / reps).sqrt(),
        rejections,
        config: *cfg,
        rng: RNG_ALGORITHM,
    })
}

/// `|p̂ − p| <= 3·sqrt(p(1 − p)/reps)`, with `p` the closed-form value.
pub fn within_three_sigma(p_hat: f64, p: f64, reps: u64) -> bool {
    (p_hat - p).abs() <= 3.0 * (p * (1.0 - p) / reps as f64).sqrt()
}

/// Tracks oracle/closed-form agreement across a sequence of checks; a run
/// fails only after `limit` consecutive violations.
#[derive(Debug, Clone)]
pub struct AgreementMonitor {
    limit: usize,
    consecutive: usize,
    pub violations: usize,
    pub checks: usize,
}

impl AgreementMonitor {
    pub fn new(limit: usize) -> Self {
        AgreementMonitor {
            limit,
            consecutive: 0,
            violations: 0,
            checks: 0,
        }
    }

    /// Records one comparison using the outcome's own standard error.
    pub fn observe(&mut self, outcome: &SimOutcome, closed_form: f64) -> bool {
        self.checks += 1;
        let ok = (outcome.piv_hat.value() - closed_form).abs() <= 3.0 * outcome.mc_stderr;
        if ok {
            self.consecutive = 0;
        } else {
            self.violations += 1;
            self.consecutive += 1;
        }
        ok
    }

    pub fn failed(&self) -> bool {
        self.consecutive >= self.limit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerCurveRow {
    pub treated_un: f64,
    pub piv: f64,
    pub piv_hat: f64,
    pub mc_stderr: f64,
    pub t_ratio: f64,
    pub delta_hat_ideal: f64,
}

impl Columns for PowerCurveRow {
    const COLUMNS: &'static [&'static str] = &[
        "treated_un",
        "piv",
        "piv_hat",
        "mc_stderr",
        "t_ratio",
        "delta_hat_ideal",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCurve {
    pub control_un: f64,
    pub rows: Vec<PowerCurveRow>,
    /// Closed-form PIV moves monotonically along the grid as the ideal
    /// estimate moves away from the threshold.
    pub monotone: bool,
    pub config: SimConfig,
    pub rng: &'static str,
}

/// Closed-form and simulated PIV along a grid of `Ȳtᵘⁿ` values.
///
/// Every grid point reuses the same seed, so the simulated curve shares
/// its random numbers across points.
pub fn simulate_power_curve(
    study: &ObservedStudy,
    control_un: f64,
    treated_un_grid: &[f64],
    spec: &ThresholdSpec,
    direction: EffectDirection,
    cfg: &SimConfig,
) -> Result<PowerCurve> {
    if treated_un_grid.is_empty() {
        return Err(PivError::validation("treated_un_grid", "grid is empty"));
    }
    let mut rows = Vec::with_capacity(treated_un_grid.len());
    for &treated_un in treated_un_grid {
        let exact = piv(study, treated_un, control_un, spec, direction)?;
        let sim = simulate_piv(study, treated_un, control_un, spec, direction, cfg)?;
        rows.push(PowerCurveRow {
            treated_un,
            piv: exact.piv.value(),
            piv_hat: sim.piv_hat.value(),
            mc_stderr: sim.mc_stderr,
            t_ratio: exact.t_ratio,
            delta_hat_ideal: exact.delta_hat_ideal,
        });
    }

    let mut order: Vec<&PowerCurveRow> = rows.iter().collect();
    order.sort_by(|a, b| a.treated_un.total_cmp(&b.treated_un));
    // positive effects gain power as Ȳtᵘⁿ rises, negative effects as it falls
    let monotone = order.windows(2).all(|w| match direction {
        EffectDirection::PositiveSignificant => w[1].piv >= w[0].piv,
        EffectDirection::NegativeSignificant => w[1].piv <= w[0].piv,
    });

    Ok(PowerCurve {
        control_un,
        rows,
        monotone,
        config: *cfg,
        rng: RNG_ALGORITHM,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn cfg(n: u64, mode: SimMode) -> SimConfig {
        SimConfig {
            n_replications: n,
            seed: 7,
            mode,
        }
    }

    #[test]
    fn estimator_mode_matches_closed_form() {
        let spec = ThresholdSpec::default();
        let exact = piv(&hong(), 45.78, 45.2, &spec, NEG).unwrap().piv.value();
        let sim = simulate_piv(
            &hong(),
            45.78,
            45.2,
            &spec,
            NEG,
            &cfg(200_000, SimMode::SampleEstimator),
        )
        .unwrap();
        assert!(within_three_sigma(sim.piv_hat.value(), exact, 200_000));
        assert!((sim.piv_hat.value() - 0.775).abs() < 0.01);
    }

    #[test]
    fn boundary_and_saturation() {
        let s = hong();
        let spec = ThresholdSpec::default();
        let th = realize_threshold(&spec, NEG, &s);
        let pi = s.prop_treated;
        let control_un = 45.2;
        let theta_c = pi * control_un + (1.0 - pi) * s.mean_control_obs;
        let at = |delta: f64| (delta + theta_c - pi * s.mean_treated_obs) / (1.0 - pi);

        let c = cfg(100_000, SimMode::SampleEstimator);
        let mid = simulate_piv(&s, at(th), control_un, &spec, NEG, &c).unwrap();
        assert!((mid.piv_hat.value() - 0.5).abs() <= 3.0 * mid.mc_stderr);

        let far =
            simulate_piv(&s, at(th - 10.0 * se_ideal(&s)), control_un, &spec, NEG, &c).unwrap();
        assert_eq!(far.piv_hat.value(), 1.0);
        assert_eq!(far.mc_stderr, 0.0);
    }

    #[test]
    fn deterministic_for_seed() {
        let spec = ThresholdSpec::default();
        let c = cfg(20_000, SimMode::SampleEstimator);
        let a = simulate_piv(&hong(), 45.8, 45.2, &spec, NEG, &c).unwrap();
        let b = simulate_piv(&hong(), 45.8, 45.2, &spec, NEG, &c).unwrap();
        assert_eq!(a, b);
        let other = SimConfig { seed: 8, ..c };
        let d = simulate_piv(&hong(), 45.8, 45.2, &spec, NEG, &other).unwrap();
        assert_ne!(a.rejections, d.rejections);
    }

    #[test]
    fn independent_of_thread_count() {
        let spec = ThresholdSpec::default();
        let small = ObservedStudy {
            n_obs: 40,
            ..hong()
        };
        let c = cfg(5_000, SimMode::SampleIndividuals);
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let wide = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = serial.install(|| simulate_piv(&small, 45.0, 44.0, &spec, NEG, &c).unwrap());
        let b = wide.install(|| simulate_piv(&small, 45.0, 44.0, &spec, NEG, &c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn modes_agree_on_small_study() {
        let spec = ThresholdSpec::default();
        let s = ObservedStudy {
            n_obs: 60,
            ..hong()
        };
        let exact = piv(&s, 44.0, 42.0, &spec, NEG).unwrap().piv.value();
        let reps = 100_000;
        let a = simulate_piv(
            &s,
            44.0,
            42.0,
            &spec,
            NEG,
            &cfg(reps, SimMode::SampleEstimator),
        )
        .unwrap();
        let b = simulate_piv(
            &s,
            44.0,
            42.0,
            &spec,
            NEG,
            &cfg(reps, SimMode::SampleIndividuals),
        )
        .unwrap();
        assert!(within_three_sigma(a.piv_hat.value(), exact, reps));
        assert!(within_three_sigma(b.piv_hat.value(), exact, reps));
        let joint = (a.mc_stderr.powi(2) + b.mc_stderr.powi(2)).sqrt();
        assert!((a.piv_hat.value() - b.piv_hat.value()).abs() <= 3.0 * joint);
    }

    #[test]
    fn power_curve_reference_grid() {
        let spec = ThresholdSpec::default();
        let curve = simulate_power_curve(
            &hong(),
            45.2,
            &[46.19, 45.93, 45.67],
            &spec,
            NEG,
            &cfg(50_000, SimMode::SampleEstimator),
        )
        .unwrap();
        let expected = [0.1, 0.5, 0.9];
        for (row, e) in curve.rows.iter().zip(expected) {
            assert!((row.piv - e).abs() <= 0.01, "{row:?}");
        }
        assert!(curve.monotone);

        let single = simulate_power_curve(
            &hong(),
            45.2,
            &[45.78],
            &spec,
            NEG,
            &cfg(50_000, SimMode::SampleEstimator),
        )
        .unwrap();
        let direct = simulate_piv(
            &hong(),
            45.78,
            45.2,
            &spec,
            NEG,
            &cfg(50_000, SimMode::SampleEstimator),
        )
        .unwrap();
        assert_eq!(single.rows[0].piv_hat, direct.piv_hat.value());

        assert!(
            simulate_power_curve(&hong(), 45.2, &[], &spec, NEG, &SimConfig::default()).is_err()
        );
    }

    #[test]
    fn monitor_fails_only_on_runs() {
        let ok = SimOutcome {
            piv_hat: Probability::new(0.5).unwrap(),
            mc_stderr: 0.01,
            rejections: 0,
            config: SimConfig::default(),
            rng: RNG_ALGORITHM,
        };
        let mut m = AgreementMonitor::new(5);
        for _ in 0..4 {
            assert!(!m.observe(&ok, 0.9));
        }
        assert!(m.observe(&ok, 0.5));
        assert!(!m.failed());
        for _ in 0..5 {
            m.observe(&ok, 0.9);
        }
        assert!(m.failed());
        assert_eq!(m.violations, 9);
    }

    #[test]
    fn rejects_zero_replications() {
        let spec = ThresholdSpec::default();
        let c = cfg(0, SimMode::SampleEstimator);
        assert!(simulate_piv(&hong(), 45.0, 45.0, &spec, NEG, &c).is_err());
    }
}
