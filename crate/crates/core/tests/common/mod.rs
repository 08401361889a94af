//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use piv::study::{ObservedStudy, ThresholdSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn hong() -> ObservedStudy {
    ObservedStudy {
        mean_treated_obs: 36.77,
        mean_control_obs: 45.78,
        var_treated: 143.26,
        var_control: 138.83,
        n_obs: 7639,
        prop_treated: 0.0617,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A valid study whose observed estimate is significant at 1.96, with
/// either sign, sample size in `n_range`.
pub fn random_study(rng: &mut impl Rng, n_range: (u64, u64)) -> ObservedStudy {
    let mean_control_obs = rng.random_range(-50.0..50.0);
    let var_treated = rng.random_range(0.5..200.0);
    let var_control = rng.random_range(0.5..200.0);
    let n_obs = rng.random_range(n_range.0..=n_range.1);
    let prop_treated = rng.random_range(0.05..0.95);
    let mut s = ObservedStudy {
        mean_treated_obs: mean_control_obs,
        mean_control_obs,
        var_treated,
        var_control,
        n_obs,
        prop_treated,
    };
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    s.mean_treated_obs = mean_control_obs + sign * rng.random_range(2.5..8.0) * s.se_observed();
    s
}

/// A statistical threshold with a random alpha, or the 0.05 default.
pub fn random_statistical(rng: &mut impl Rng) -> ThresholdSpec {
    if rng.random_bool(0.3) {
        ThresholdSpec::default()
    } else {
        ThresholdSpec::statistical(rng.random_range(0.001..0.2)).unwrap()
    }
}

/// Counterfactual means within a few standard deviations of the observed ones.
pub fn random_beliefs(rng: &mut impl Rng, s: &ObservedStudy) -> (f64, f64) {
    let t = s.mean_treated_obs + rng.random_range(-2.0..2.0) * s.var_treated.sqrt();
    let c = s.mean_control_obs + rng.random_range(-2.0..2.0) * s.var_control.sqrt();
    (t, c)
}
