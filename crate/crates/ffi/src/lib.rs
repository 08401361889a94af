//! C ABI over the `piv` library.
//!
//! Every function returns a [`PivStatus`]; outputs go through pointers and
//! are written only on success. A study is an opaque [`PivStudy`] handle
//! created by [`piv_study_new`] and released with [`piv_study_free`].
//! After a failure, [`piv_last_error_message`] describes it; the message is
//! per thread and stays valid until the next call on that thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use piv::engine;
use piv::error::PivError;
use piv::normal::{std_normal_cdf, std_normal_quantile, Probability};
use piv::oracle::{simulate_piv, SimConfig, SimMode};
use piv::study::{
    infer_direction, validate_study, CounterfactualBelief, EffectDirection, ObservedStudy,
    PointOrInterval, ThresholdSpec,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    AmbiguousDirection = 3,
    Saturated = 4,
    Domain = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivDirection {
    /// Take the sign of the observed estimate.
    Auto = 0,
    Positive = 1,
    Negative = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivThresholdKind {
    Statistical = 0,
    Fixed = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivSimMode {
    SampleEstimator = 0,
    SampleIndividuals = 1,
}

/// Summary statistics of the observed study.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PivStudyParams {
    pub mean_treated_obs: f64,
    pub mean_control_obs: f64,
    pub var_treated: f64,
    pub var_control: f64,
    pub n_obs: u64,
    pub prop_treated: f64,
}

/// Decision threshold. For `Statistical`, a NaN `critical` means "derive it
/// from `alpha`"; `fixed_value` is read only for `Fixed`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PivThreshold {
    pub kind: PivThresholdKind,
    pub alpha: f64,
    pub critical: f64,
    pub fixed_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PivPoint {
    pub treated_un: f64,
    pub control_un: f64,
    pub piv: f64,
    pub probit: f64,
    pub delta_hat_ideal: f64,
    pub se_ideal: f64,
    pub t_ratio: f64,
    pub threshold_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PivBounds {
    pub lower: PivPoint,
    pub upper: PivPoint,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PivSimResult {
    pub piv_hat: f64,
    pub mc_stderr: f64,
    pub rejections: u64,
}

/// Opaque study handle.
pub struct PivStudy {
    study: ObservedStudy,
    threshold: ThresholdSpec,
    direction: EffectDirection,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &PivError) -> PivStatus {
    match err {
        PivError::Validation { .. } | PivError::Contract(_) | PivError::Format(_) => {
            PivStatus::InvalidArgument
        }
        PivError::AmbiguousDirection => PivStatus::AmbiguousDirection,
        PivError::Saturation(_) => PivStatus::Saturated,
        PivError::Domain(_) => PivStatus::Domain,
    }
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard<F: FnOnce() -> Result<(), PivError>>(f: F) -> PivStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PivStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            PivStatus::Internal
        }
    }
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        if $($p.is_null())||+ {
            set_last_error("null pointer argument");
            return PivStatus::NullPointer;
        }
    };
}

fn to_spec(t: &PivThreshold) -> Result<ThresholdSpec, PivError> {
    let spec = match t.kind {
        PivThresholdKind::Fixed => ThresholdSpec::Fixed(t.fixed_value),
        PivThresholdKind::Statistical if t.critical.is_nan() => {
            ThresholdSpec::statistical(t.alpha)?
        }
        PivThresholdKind::Statistical => ThresholdSpec::with_critical(t.alpha, t.critical)?,
    };
    spec.validate()?;
    Ok(spec)
}

fn to_point(r: &engine::PivResult) -> PivPoint {
    PivPoint {
        treated_un: r.treated_un,
        control_un: r.control_un,
        piv: r.piv.value(),
        probit: r.probit_value,
        delta_hat_ideal: r.delta_hat_ideal,
        se_ideal: r.se_ideal,
        t_ratio: r.t_ratio,
        threshold_value: r.threshold_value,
    }
}

/// Validates the inputs and allocates a study handle into `*out`.
///
/// # Safety
/// `params` and `threshold` must point to valid structs; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn piv_study_new(
    params: *const PivStudyParams,
    threshold: *const PivThreshold,
    direction: PivDirection,
    out: *mut *mut PivStudy,
) -> PivStatus {
    nonnull!(params, threshold, out);
    let (p, t) = (*params, *threshold);
    guard(|| {
        let study = validate_study(ObservedStudy {
            mean_treated_obs: p.mean_treated_obs,
            mean_control_obs: p.mean_control_obs,
            var_treated: p.var_treated,
            var_control: p.var_control,
            n_obs: p.n_obs,
            prop_treated: p.prop_treated,
        })?;
        let threshold = to_spec(&t)?;
        let direction = match direction {
            PivDirection::Auto => infer_direction(&study, &threshold)?,
            PivDirection::Positive => EffectDirection::PositiveSignificant,
            PivDirection::Negative => EffectDirection::NegativeSignificant,
        };
        let handle = Box::new(PivStudy {
            study,
            threshold,
            direction,
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `study` must come from [`piv_study_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn piv_study_free(study: *mut PivStudy) {
    if !study.is_null() {
        drop(Box::from_raw(study));
    }
}

/// Direction the handle resolved to (`Positive` or `Negative`).
///
/// # Safety
/// `study` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn piv_study_direction(
    study: *const PivStudy,
    out: *mut PivDirection,
) -> PivStatus {
    nonnull!(study, out);
    let s = &*study;
    guard(|| {
        *out = match s.direction {
            EffectDirection::PositiveSignificant => PivDirection::Positive,
            EffectDirection::NegativeSignificant => PivDirection::Negative,
        };
        Ok(())
    })
}

/// PIV at one point `(treated_un, control_un)`.
///
/// # Safety
/// `study` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn piv_compute(
    study: *const PivStudy,
    treated_un: f64,
    control_un: f64,
    out: *mut PivPoint,
) -> PivStatus {
    nonnull!(study, out);
    let s = &*study;
    guard(|| {
        let r = engine::piv(&s.study, treated_un, control_un, &s.threshold, s.direction)?;
        *out = to_point(&r);
        Ok(())
    })
}

/// PIV bounds over the rectangle `[treated_lo, treated_hi] x [control_lo, control_hi]`.
///
/// # Safety
/// `study` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn piv_bound(
    study: *const PivStudy,
    treated_lo: f64,
    treated_hi: f64,
    control_lo: f64,
    control_hi: f64,
    out: *mut PivBounds,
) -> PivStatus {
    nonnull!(study, out);
    let s = &*study;
    guard(|| {
        let belief = CounterfactualBelief {
            treated_un: PointOrInterval::interval(treated_lo, treated_hi),
            control_un: PointOrInterval::interval(control_lo, control_hi),
        };
        let b = engine::bound_piv(&s.study, &belief, &s.threshold, s.direction)?;
        *out = PivBounds {
            lower: to_point(&b.lower),
            upper: to_point(&b.upper),
        };
        Ok(())
    })
}

/// `treated_un` at which the PIV equals `target`, with `control_un` fixed.
///
/// # Safety
/// `study` must be a live handle; both output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn piv_invert(
    study: *const PivStudy,
    control_un: f64,
    target: f64,
    out_treated_un: *mut f64,
    out_delta_hat_ideal: *mut f64,
) -> PivStatus {
    nonnull!(study, out_treated_un, out_delta_hat_ideal);
    let s = &*study;
    guard(|| {
        let target = Probability::new(target)?;
        let inv =
            engine::invert_for_treated_un(&s.study, control_un, target, &s.threshold, s.direction)?;
        *out_treated_un = inv.treated_un;
        *out_delta_hat_ideal = inv.delta_hat_ideal;
        Ok(())
    })
}

/// Monte Carlo estimate of the PIV. Same seed, same result.
///
/// # Safety
/// `study` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn piv_simulate(
    study: *const PivStudy,
    treated_un: f64,
    control_un: f64,
    replications: u64,
    seed: u64,
    mode: PivSimMode,
    out: *mut PivSimResult,
) -> PivStatus {
    nonnull!(study, out);
    let s = &*study;
    guard(|| {
        let cfg = SimConfig {
            n_replications: replications,
            seed,
            mode: match mode {
                PivSimMode::SampleEstimator => SimMode::SampleEstimator,
                PivSimMode::SampleIndividuals => SimMode::SampleIndividuals,
            },
        };
        let o = simulate_piv(
            &s.study,
            treated_un,
            control_un,
            &s.threshold,
            s.direction,
            &cfg,
        )?;
        *out = PivSimResult {
            piv_hat: o.piv_hat.value(),
            mc_stderr: o.mc_stderr,
            rejections: o.rejections,
        };
        Ok(())
    })
}

/// Standard normal CDF.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn piv_normal_cdf(z: f64, out: *mut f64) -> PivStatus {
    nonnull!(out);
    guard(|| {
        *out = std_normal_cdf(z)?.value();
        Ok(())
    })
}

/// Standard normal quantile for `p` in (0, 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn piv_normal_quantile(p: f64, out: *mut f64) -> PivStatus {
    nonnull!(out);
    guard(|| {
        *out = std_normal_quantile(Probability::new(p)?)?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or "" after a success.
#[no_mangle]
pub extern "C" fn piv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn piv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
