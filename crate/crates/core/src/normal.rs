//! Standard normal distribution kernel: density, CDF and quantile (probit).
//!
//! The CDF is evaluated on the lower tail only and reflected, so that
//! `Φ(z)` and `1 − Φ(z)` are both carried with full relative precision.
//! [`Probability`] keeps both tails for the same reason: the quantile of a
//! probability near one is taken from its (exact) complement.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PivError, Result};

/// Beyond this many standard deviations the CDF saturates to exactly 0 or 1.
pub const SATURATION_Z: f64 = 8.0;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Below this |z| the CDF uses the power series, above it the Laplace continued fraction.
const SERIES_LIMIT: f64 = 3.0;
const CONTINUED_FRACTION_TERMS: u32 = 80;

/// A probability in `[0, 1]`, stored together with its complement.
#[derive(Clone, Copy, PartialEq)]
pub struct Probability {
    lower: f64,
    upper: f64,
}

impl Probability {
    pub const ZERO: Probability = Probability {
        lower: 0.0,
        upper: 1.0,
    };
    pub const ONE: Probability = Probability {
        lower: 1.0,
        upper: 0.0,
    };
    pub const HALF: Probability = Probability {
        lower: 0.5,
        upper: 0.5,
    };

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(PivError::validation(
                "probability",
                format!("{value} is not in [0, 1]"),
            ));
        }
        Ok(Probability {
            lower: value,
            upper: 1.0 - value,
        })
    }

    /// Builds a probability from its complement `1 − p`.
    pub fn from_complement(complement: f64) -> Result<Self> {
        let p = Probability::new(complement)?;
        Ok(Probability {
            lower: p.upper,
            upper: p.lower,
        })
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.lower
    }

    /// `1 − p`, accurate even when `p` is within an ulp of one.
    #[inline]
    pub fn complement(self) -> f64 {
        self.upper
    }

    pub fn is_saturated(self) -> bool {
        self.lower == 0.0 || self.upper == 0.0
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Probability({})", self.lower)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.lower, f)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.lower
    }
}

impl TryFrom<f64> for Probability {
    type Error = PivError;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.lower)
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Probability::new(v).map_err(serde::de::Error::custom)
    }
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// `Φ(x)` for `x <= 0`.
fn lower_tail(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    let a = -x;
    if a > SATURATION_Z {
        return 0.0;
    }
    if a < SERIES_LIMIT {
        // Φ(x) = 1/2 + φ(x) Σ x^(2k+1) / (2k+1)!!
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 1.0;
        loop {
            term *= x2 / (2.0 * k + 1.0);
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            k += 1.0;
        }
        0.5 + std_normal_pdf(x) * sum
    } else {
        // Laplace continued fraction, evaluated back to front.
        let mut t = 0.0;
        for k in (1..=CONTINUED_FRACTION_TERMS).rev() {
            t = f64::from(k) / (a + t);
        }
        std_normal_pdf(x) / (a + t)
    }
}

/// Standard normal CDF `Φ(z)`. Saturates to exactly 0 or 1 for `|z| > 8`.
pub fn std_normal_cdf(z: f64) -> Result<Probability> {
    if !z.is_finite() {
        return Err(PivError::Domain(format!(
            "normal CDF argument must be finite, got {z}"
        )));
    }
    let tail = lower_tail(-z.abs());
    Ok(if z <= 0.0 {
        Probability {
            lower: tail,
            upper: 1.0 - tail,
        }
    } else {
        Probability {
            lower: 1.0 - tail,
            upper: tail,
        }
    })
}

/// Acklam's rational approximation to the normal quantile (relative error < 1.15e-9).
///
/// Used directly for variate generation, where one Halley step per draw is not worth it.
pub fn std_normal_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };

    if p < P_LOW {
        tail(p)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(1.0 - p)
    }
}

/// Quantile for `0 < p <= 1/2`: Acklam's start refined by one Halley step.
fn lower_quantile(p: f64) -> f64 {
    let z = std_normal_quantile_approx(p);
    let err = lower_tail(z) - p;
    let u = err * SQRT_2PI * (0.5 * z * z).exp();
    z - u / (1.0 + 0.5 * z * u)
}

/// Standard normal quantile `Φ⁻¹(p)` for `0 < p < 1`.
pub fn std_normal_quantile(p: Probability) -> Result<f64> {
    if p.is_saturated() {
        return Err(PivError::Saturation(p.value()));
    }
    if p.lower <= 0.5 {
        Ok(lower_quantile(p.lower))
    } else {
        Ok(-lower_quantile(p.upper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson integration of the density over `[z, 0]`.
    fn quadrature_cdf(z: f64) -> f64 {
        let (a, b) = if z < 0.0 { (z, 0.0) } else { (0.0, z) };
        let n = 2 * ((b - a) / 1e-3).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        let mut s = std_normal_pdf(a) + std_normal_pdf(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * std_normal_pdf(a + i as f64 * h);
        }
        let area = s * h / 3.0;
        if z < 0.0 {
            0.5 - area
        } else {
            0.5 + area
        }
    }

    fn bisect_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if std_normal_cdf(mid).unwrap().value() < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_reference_values() {
        assert_eq!(std_normal_cdf(0.0).unwrap().value(), 0.5);
        assert!((std_normal_cdf(0.756).unwrap().value() - 0.775).abs() <= 1e-3);
        assert!((std_normal_cdf(1.959964).unwrap().value() - 0.975).abs() <= 1e-6);
        assert!((quadrature_cdf(1.959964) - 0.975).abs() <= 1e-6);
    }

    #[test]
    fn cdf_matches_quadrature() {
        let mut z = -8.0;
        while z <= 8.0 {
            let diff = (std_normal_cdf(z).unwrap().value() - quadrature_cdf(z)).abs();
            assert!(diff <= 1e-10, "z={z} diff={diff}");
            z += 0.01;
        }
    }

    #[test]
    fn cdf_symmetry_and_saturation() {
        let mut z = -8.0;
        while z <= 8.0 {
            let s = std_normal_cdf(z).unwrap().value() + std_normal_cdf(-z).unwrap().value();
            assert!((s - 1.0).abs() <= 1e-14, "z={z}");
            z += 0.003;
        }
        assert_eq!(std_normal_cdf(8.5).unwrap(), Probability::ONE);
        assert_eq!(std_normal_cdf(-209.77).unwrap(), Probability::ZERO);
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn quantile_reference_values() {
        let q = |p| std_normal_quantile(Probability::new(p).unwrap()).unwrap();
        assert_eq!(q(0.5), 0.0);
        assert!((bisect_quantile(0.8) - 0.8416).abs() <= 1e-4);
        assert!((q(0.8) - 0.8416).abs() <= 1e-4);
        assert!((bisect_quantile(0.975) - 1.959964).abs() <= 1e-6);
        assert!((q(0.975) - 1.959964).abs() <= 1e-6);
        for p in [1e-12, 1e-6, 0.01, 0.3, 0.7, 0.99] {
            let z = q(p);
            assert!((std_normal_cdf(z).unwrap().value() - p).abs() <= 1e-12);
        }
    }

    #[test]
    fn quantile_rejects_saturated() {
        assert!(matches!(
            std_normal_quantile(Probability::ZERO),
            Err(PivError::Saturation(_))
        ));
        assert!(std_normal_quantile(Probability::ONE).is_err());
        assert!(Probability::new(1.5).is_err());
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(f64::NAN).is_err());
    }

    #[test]
    fn round_trip_on_grid() {
        let mut z = -6.0;
        while z <= 6.0 {
            let back = std_normal_quantile(std_normal_cdf(z).unwrap()).unwrap();
            assert!((back - z).abs() <= 1e-9, "z={z} back={back}");
            z += 0.001;
        }
    }

    #[test]
    fn strictly_increasing() {
        // the upper half is checked through the complement, which keeps full precision near 1
        let mut prev = std_normal_cdf(-8.0).unwrap();
        let mut z = -7.99;
        while z <= 8.0 {
            let c = std_normal_cdf(z).unwrap();
            if z <= 0.0 {
                assert!(c.value() > prev.value(), "z={z}");
            } else {
                assert!(c.complement() < prev.complement(), "z={z}");
            }
            prev = c;
            z += 0.01;
        }
        let mut prev_q = f64::NEG_INFINITY;
        for i in 1..1000 {
            let z = std_normal_quantile(Probability::new(i as f64 / 1000.0).unwrap()).unwrap();
            assert!(z > prev_q);
            prev_q = z;
        }
    }

    #[test]
    fn approx_quantile_accuracy() {
        for i in 1..10_000 {
            let p = i as f64 / 10_000.0;
            let exact = std_normal_quantile(Probability::new(p).unwrap()).unwrap();
            let approx = std_normal_quantile_approx(p);
            assert!((exact - approx).abs() <= 1.2e-9 * exact.abs().max(1.0));
        }
    }
}
