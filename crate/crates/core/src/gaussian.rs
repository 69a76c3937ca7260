//! Standard normal helpers and the moment-matching corrections for a
//! Gaussian truncated to the "winner exceeds loser" half-line.

use std::f64::consts::FRAC_1_SQRT_2;

use libm::erfc;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Below this argument `v` is evaluated through the continued fraction of
/// the Mills ratio instead of `pdf / cdf`.
const ASYMPTOTIC_BELOW: f64 = -8.0;

pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of [`cdf`] for `p` in (0, 1): Acklam's rational approximation
/// polished by one Halley step.
pub fn inv_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
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
    const P_LOW: f64 = 0.024_25;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = cdf(x) - p;
    let u = e / pdf(x);
    x - u / (1.0 + x * u / 2.0)
}

/// Mills ratio `(1 - Φ(x)) / φ(x)` for `x > 0`, via its continued fraction
/// `1 / (x + 1/(x + 2/(x + 3/(x + ...))))` evaluated from the tail.
fn mills_ratio(x: f64) -> f64 {
    let mut tail = x;
    for n in (1..=80).rev() {
        tail = x + n as f64 / tail;
    }
    1.0 / tail
}

/// Mean correction `v(d) = φ(d) / Φ(d)`.
pub fn v_win(d: f64) -> Result<f64> {
    if !d.is_finite() {
        return Err(Error::Domain(format!("v(d) needs a finite argument, got {d}")));
    }
    if d < ASYMPTOTIC_BELOW {
        // Φ(d) = φ(d) · R(-d), so v = 1 / R(-d); tends to -d.
        return Ok(1.0 / mills_ratio(-d));
    }
    Ok(pdf(d) / cdf(d))
}

/// Variance correction `w(d) = v(d) · (v(d) + d)`, in (0, 1); tends to 1 as
/// `d → -∞` and to 0 as `d → +∞`.
pub fn w_win(d: f64) -> Result<f64> {
    let v = v_win(d)?;
    Ok(v * (v + d))
}

/// Both corrections at once.
pub fn truncated_gaussian_moments(d: f64) -> Result<(f64, f64)> {
    let v = v_win(d)?;
    Ok((v, v * (v + d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn analytic_at_zero() {
        let (v, w) = truncated_gaussian_moments(0.0).unwrap();
        assert!(rel(v, (2.0 / std::f64::consts::PI).sqrt()) < 1e-12);
        assert!(rel(w, 2.0 / std::f64::consts::PI) < 1e-12);
    }

    // Reference values from 50-digit evaluation of φ(d)/Φ(d).
    #[test]
    fn deep_tail_matches_extended_precision() {
        let cases = [
            (-10.0, 10.098_093_233_962_512, 0.990_554_622_174_343_7),
            (-40.0, 40.024_968_847_207_26, 0.999_377_331_621_408_6),
        ];
        for (d, v_ref, w_ref) in cases {
            let (v, w) = truncated_gaussian_moments(d).unwrap();
            assert!(rel(v, v_ref) < 1e-12, "v({d}) = {v}");
            assert!(rel(w, w_ref) < 1e-9, "w({d}) = {w}");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let below = 1.0 / mills_ratio(8.0);
        let above = pdf(-8.0) / cdf(-8.0);
        assert!(rel(below, above) < 1e-12);
    }

    #[test]
    fn positive_tail_vanishes() {
        let (v, w) = truncated_gaussian_moments(5.0).unwrap();
        assert!(rel(v, 1.486_719_940_904_905_7e-6) < 1e-9);
        assert!(rel(w, 7.433_601_914_860_711e-6) < 1e-6);
        let (v, w) = truncated_gaussian_moments(60.0).unwrap();
        assert!((0.0..1e-300).contains(&v) && (0.0..1e-300).contains(&w));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(v_win(f64::NAN).is_err());
        assert!(w_win(f64::INFINITY).is_err());
    }

    #[test]
    fn bounds_over_a_sweep() {
        let mut d = -60.0;
        while d < 30.0 {
            let (v, w) = truncated_gaussian_moments(d).unwrap();
            assert!(v > 0.0, "v({d})");
            assert!(w > 0.0 && w < 1.0, "w({d}) = {w}");
            d += 0.37;
        }
    }

    #[test]
    fn inverse_cdf_round_trips() {
        for p in [1e-6, 0.01, 0.3, 0.55, 0.9, 0.999] {
            assert!(((cdf(inv_cdf(p)) - p) / p).abs() < 1e-14);
        }
    }
}
