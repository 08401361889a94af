//! Conjugate-normal reading of the ideal-sample distribution.
//!
//! The counterfactual mean of each arm acts as the prior mean, with prior
//! variance `σ² / n_other` where `n_other` is the size of the opposite
//! observed arm; the observed arm supplies the likelihood. The posterior of
//! `μt − μc` must coincide with [`IdealDistribution`].

use serde::Serialize;

use crate::engine::{ideal_distribution, IdealDistribution};
use crate::error::Result;
use crate::study::ObservedStudy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalLaw {
    pub mean: f64,
    pub variance: f64,
}

/// Posterior of a normal mean with known per-observation variance.
pub fn conjugate_update(prior: NormalLaw, data_mean: f64, data_variance: f64, n: f64) -> NormalLaw {
    let precision = 1.0 / prior.variance + n / data_variance;
    let mean = (prior.mean / prior.variance + n * data_mean / data_variance) / precision;
    NormalLaw {
        mean,
        variance: 1.0 / precision,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub posterior_treated: NormalLaw,
    pub posterior_control: NormalLaw,
    /// Posterior of `μt − μc` under independence.
    pub posterior_effect: NormalLaw,
    pub frequentist: IdealDistribution,
    /// Largest relative discrepancy over `θt, θc, φt, φc` and the effect mean and variance.
    pub max_relative_error: f64,
}

impl IdentityReport {
    pub fn is_identical(&self, tolerance: f64) -> bool {
        self.max_relative_error <= tolerance
    }
}

fn relative_error(a: f64, b: f64, scale: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(scale);
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

pub fn bayesian_posterior_check(
    study: &ObservedStudy,
    treated_un: f64,
    control_un: f64,
) -> Result<IdentityReport> {
    let frequentist = ideal_distribution(study, treated_un, control_un)?;
    let n = study.n();
    let n_t = study.prop_treated * n;
    let n_c = (1.0 - study.prop_treated) * n;

    let posterior_treated = conjugate_update(
        NormalLaw {
            mean: treated_un,
            variance: study.var_treated / n_c,
        },
        study.mean_treated_obs,
        study.var_treated,
        n_t,
    );
    let posterior_control = conjugate_update(
        NormalLaw {
            mean: control_un,
            variance: study.var_control / n_t,
        },
        study.mean_control_obs,
        study.var_control,
        n_c,
    );
    let posterior_effect = NormalLaw {
        mean: posterior_treated.mean - posterior_control.mean,
        variance: posterior_treated.variance + posterior_control.variance,
    };

    // the effect mean is a difference; measure its error against the size of its terms
    let mean_scale = frequentist.theta_t.abs().max(frequentist.theta_c.abs());
    let max_relative_error = [
        relative_error(posterior_treated.mean, frequentist.theta_t, 0.0),
        relative_error(posterior_control.mean, frequentist.theta_c, 0.0),
        relative_error(posterior_treated.variance, frequentist.phi_t, 0.0),
        relative_error(posterior_control.variance, frequentist.phi_c, 0.0),
        relative_error(posterior_effect.mean, frequentist.mean(), mean_scale),
        relative_error(posterior_effect.variance, frequentist.variance(), 0.0),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    Ok(IdentityReport {
        posterior_treated,
        posterior_control,
        posterior_effect,
        frequentist,
        max_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_study_is_identical() {
        let s = ObservedStudy {
            mean_treated_obs: 36.77,
            mean_control_obs: 45.78,
            var_treated: 143.26,
            var_control: 138.83,
            n_obs: 7639,
            prop_treated: 0.0617,
        };
        let r = bayesian_posterior_check(&s, 45.78, 45.2).unwrap();
        assert!(r.is_identical(1e-12), "{}", r.max_relative_error);
    }

    #[test]
    fn symmetric_study_is_identical() {
        let s = ObservedStudy {
            mean_treated_obs: 1.0,
            mean_control_obs: 0.0,
            var_treated: 2.0,
            var_control: 2.0,
            n_obs: 50,
            prop_treated: 0.5,
        };
        let r = bayesian_posterior_check(&s, 0.5, 0.5).unwrap();
        assert!(r.is_identical(1e-12));
        assert!((r.posterior_effect.mean - 0.5).abs() < 1e-15);
    }

    #[test]
    fn conjugate_update_with_flat_data_returns_prior() {
        let prior = NormalLaw {
            mean: 3.0,
            variance: 2.0,
        };
        assert_eq!(conjugate_update(prior, 10.0, 1.0, 0.0), prior);
    }
}
