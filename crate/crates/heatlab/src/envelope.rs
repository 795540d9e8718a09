//! Comparison envelopes: the explicit right-hand sides that heat kernels,
//! Green functions, and Riesz potentials on exterior domains are squeezed
//! between, up to multiplicative constants.
//!
//! All logarithms are natural; the additive shift is e, so every log factor
//! is ≥ 1. Two-sided comparisons hold with different constants per side, so
//! every envelope takes explicit `EnvelopeParams` and verification fits the
//! Gaussian constant separately for upper and lower bounds.

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};

const E: f64 = std::f64::consts::E;

/// The adjustable constants of an envelope: amplitude C and the Gaussian
/// exponent constant c in e^{−|x−y|²/(ct)}.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeParams {
    amplitude: f64,
    c_gauss: f64,
}

impl EnvelopeParams {
    pub fn new(amplitude: f64, c_gauss: f64) -> Result<Self> {
        if !(amplitude > 0.0 && c_gauss > 0.0) {
            return Err(Error::OutOfRange(format!(
                "envelope constants must be positive, got C={amplitude}, c={c_gauss}"
            )));
        }
        Ok(EnvelopeParams { amplitude, c_gauss })
    }

    /// C = 1 with the exact-Gaussian exponent c = 4.
    pub fn unit() -> Self {
        EnvelopeParams { amplitude: 1.0, c_gauss: 4.0 }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn c_gauss(&self) -> f64 {
        self.c_gauss
    }
}

/// Nonnegative result of an envelope evaluation; zero exactly when a
/// boundary-distance factor vanishes.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EnvelopeValue(f64);

impl EnvelopeValue {
    fn new(v: f64) -> Self {
        debug_assert!(v >= 0.0 && v.is_finite(), "envelope value {v}");
        EnvelopeValue(v.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn log_e_plus(v: f64) -> f64 {
    (E + v).ln()
}

/// Clamp factor (ρ/(√t∧1)) ∧ 1: linear profile near the boundary.
fn boundary_clamp(rho: f64, scale: f64) -> f64 {
    (rho / scale).min(1.0)
}

/// Planar heat-kernel envelope:
/// log(e+ρ(x))log(e+ρ(y)) / [t(log(e+√t)+log(e+ρ(x)∨ρ(y)))²]
///   · (ρ(x)/(√t∧1) ∧ 1)(ρ(y)/(√t∧1) ∧ 1) · e^{−|x−y|²/(ct)},
/// times the amplitude. Symmetric in x, y; the variant with ρ(x) alone in
/// the denominator is comparable (see tests) but asymmetric, so the ∨ form
/// is the implementation.
pub fn heat_envelope_2d<D: Domain + ?Sized>(
    t: f64,
    x: &Point,
    y: &Point,
    domain: &D,
    params: &EnvelopeParams,
) -> EnvelopeValue {
    assert!(t > 0.0, "heat envelope needs t > 0");
    let (rx, ry) = (domain.rho(x), domain.rho(y));
    let sqrt_t = t.sqrt();
    let near_scale = sqrt_t.min(1.0);
    let log_num = log_e_plus(rx) * log_e_plus(ry);
    let log_den = log_e_plus(sqrt_t) + log_e_plus(rx.max(ry));
    let r2 = {
        let d = x.dist(y);
        d * d
    };
    let value = params.amplitude * log_num / (t * log_den * log_den)
        * boundary_clamp(rx, near_scale)
        * boundary_clamp(ry, near_scale)
        * (-r2 / (params.c_gauss * t)).exp();
    EnvelopeValue::new(value)
}

/// Heat-kernel envelope for n ≥ 3:
/// t^{−n/2}(ρ(x)/(√t∧1) ∧ 1)(ρ(y)/(√t∧1) ∧ 1)e^{−|x−y|²/(ct)}.
/// The planar case has its own log-corrected shape; requesting n < 3 here
/// is a wrong-branch error.
pub fn heat_envelope_hd<D: Domain + ?Sized>(
    t: f64,
    x: &Point,
    y: &Point,
    domain: &D,
    n: usize,
    params: &EnvelopeParams,
) -> Result<EnvelopeValue> {
    assert!(t > 0.0, "heat envelope needs t > 0");
    if n < 3 {
        return Err(Error::OutOfRange(format!(
            "dimension branch n >= 3 required, got {n}; use the planar envelope"
        )));
    }
    let (rx, ry) = (domain.rho(x), domain.rho(y));
    let near_scale = t.sqrt().min(1.0);
    let r2 = {
        let d = x.dist(y);
        d * d
    };
    let value = params.amplitude
        * t.powf(-0.5 * n as f64)
        * boundary_clamp(rx, near_scale)
        * boundary_clamp(ry, near_scale)
        * (-r2 / (params.c_gauss * t)).exp();
    Ok(EnvelopeValue::new(value))
}

/// Planar Green-function envelope, piecewise in |x−y|:
/// near (|x−y| < ρ(x)∧ρ(y)∧1, strictly): 1 + log[(ρ(x)∧ρ(y))/|x−y|];
/// far (including ties): (ρ(x)∧1)(ρ(y)∧1)/(|x−y|²∧1) · log(e+ρ(x)∧ρ(y)).
/// The tie-break at equality is free since the envelope is only determined
/// up to constants; ties take the far branch.
pub fn green_envelope_2d<D: Domain + ?Sized>(
    x: &Point,
    y: &Point,
    domain: &D,
) -> Result<EnvelopeValue> {
    let dist = x.dist(y);
    if dist == 0.0 {
        return Err(Error::OutOfRange("Green envelope is singular at x = y".into()));
    }
    let (rx, ry) = (domain.rho(x), domain.rho(y));
    let rmin = rx.min(ry);
    let value = if dist < rmin.min(1.0) {
        1.0 + (rmin / dist).ln()
    } else {
        rx.min(1.0) * ry.min(1.0) / (dist * dist).min(1.0) * log_e_plus(rmin)
    };
    Ok(EnvelopeValue::new(value))
}

/// Riesz-potential envelope for 0 < s < n:
/// |x−y|^{s−n}(ρ(x)/(|x−y|∧1) ∧ 1)(ρ(y)/(|x−y|∧1) ∧ 1), with the extra
/// planar factor log(e+ρ(x)∧ρ(y))/log(e+ρ(x)∨ρ(y)) when n = 2.
pub fn riesz_envelope<D: Domain + ?Sized>(
    x: &Point,
    y: &Point,
    s: f64,
    domain: &D,
    n: usize,
) -> Result<EnvelopeValue> {
    if !(s > 0.0 && s < n as f64) {
        return Err(Error::OutOfRange(format!(
            "Riesz order must satisfy 0 < s < n, got s={s}, n={n}"
        )));
    }
    let dist = x.dist(y);
    if dist == 0.0 {
        return Err(Error::OutOfRange("Riesz envelope is singular at x = y".into()));
    }
    let (rx, ry) = (domain.rho(x), domain.rho(y));
    let near_scale = dist.min(1.0);
    let log_ratio = if n == 2 {
        log_e_plus(rx.min(ry)) / log_e_plus(rx.max(ry))
    } else {
        1.0
    };
    let value = dist.powf(s - n as f64)
        * boundary_clamp(rx, near_scale)
        * boundary_clamp(ry, near_scale)
        * log_ratio;
    Ok(EnvelopeValue::new(value))
}

/// Weighted volume model r²[log(e+r)+log(e+ρ(x))]² of the ball B(x,r) under
/// the harmonic-weight measure; strictly increasing in r.
pub fn weighted_volume<D: Domain + ?Sized>(x: &Point, r: f64, domain: &D) -> f64 {
    assert!(r > 0.0, "weighted volume needs r > 0");
    let log_sum = log_e_plus(r) + log_e_plus(domain.rho(x));
    r * r * log_sum * log_sum
}

/// Growth model log(e+ρ(x)) ≥ 1 for the harmonic weight.
pub fn phi_model<D: Domain + ?Sized>(x: &Point, domain: &D) -> f64 {
    log_e_plus(domain.rho(x))
}

/// Upper envelope for the whole-space-minus-domain kernel difference:
/// C t^{−n/2} e^{−(|x−y|²+ρ(x)²+ρ(y)²)/(ct)}.
pub fn difference_envelope<D: Domain + ?Sized>(
    t: f64,
    x: &Point,
    y: &Point,
    domain: &D,
    n: usize,
    params: &EnvelopeParams,
) -> EnvelopeValue {
    assert!(t > 0.0, "difference envelope needs t > 0");
    let (rx, ry) = (domain.rho(x), domain.rho(y));
    let r2 = {
        let d = x.dist(y);
        d * d
    };
    let exponent = -(r2 + rx * rx + ry * ry) / (params.c_gauss * t);
    EnvelopeValue::new(params.amplitude * t.powf(-0.5 * n as f64) * exponent.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ExteriorDomain, Obstacle};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn disk() -> ExteriorDomain {
        ExteriorDomain::exterior_unit_disk()
    }

    fn ball() -> ExteriorDomain {
        ExteriorDomain::new(
            Obstacle::Disk { center: Point::new3(0.0, 0.0, 0.0), radius: 1.0 },
            3,
        )
        .unwrap()
    }

    /// Point on the positive x-axis at boundary distance rho from the unit disk.
    fn at_rho(rho: f64) -> Point {
        Point::new2(1.0 + rho, 0.0)
    }

    #[test]
    fn heat_2d_reference_value() {
        // x = y, ρ = 10, t = 1: log(e+10)² / (log(e+1)+log(e+10))²
        let x = at_rho(10.0);
        let v = heat_envelope_2d(1.0, &x, &x, &disk(), &EnvelopeParams::unit());
        let expected = log_e_plus(10.0).powi(2) / (log_e_plus(1.0) + log_e_plus(10.0)).powi(2);
        assert_abs_diff_eq!(v.value(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(v.value(), 0.4349, epsilon = 5e-5);
    }

    #[test]
    fn heat_2d_vanishes_on_boundary() {
        let b = Point::new2(1.0, 0.0);
        let v = heat_envelope_2d(1.0, &b, &at_rho(2.0), &disk(), &EnvelopeParams::unit());
        assert_eq!(v.value(), 0.0);
    }

    #[test]
    fn heat_hd_reference_values() {
        let params = EnvelopeParams::unit();
        let x = Point::new3(0.0, 0.0, 2.5); // ρ = 1.5 ≥ 1
        let v = heat_envelope_hd(1.0, &x, &x, &ball(), 3, &params).unwrap();
        assert_abs_diff_eq!(v.value(), 1.0, epsilon = 1e-14);
        let y = Point::new3(0.0, 0.0, 2.0); // ρ = 1
        let v = heat_envelope_hd(4.0, &y, &y, &ball(), 3, &params).unwrap();
        assert_abs_diff_eq!(v.value(), 0.125, epsilon = 1e-14);
        let boundary = Point::new3(0.0, 0.0, 1.0);
        let v = heat_envelope_hd(1.0, &x, &boundary, &ball(), 3, &params).unwrap();
        assert_eq!(v.value(), 0.0);
        assert!(heat_envelope_hd(1.0, &x, &x, &ball(), 2, &params).is_err());
    }

    #[test]
    fn green_reference_values() {
        let d = disk();
        // near branch: ρ = 10 both, |x−y| = 0.1
        let x = Point::new2(11.0, 0.0);
        let y = Point::new2(11.0, 0.1);
        // ρ(y) = √(121.01) − 1 ≈ 10.00045: rmin within 5e-4 of 10
        let v = green_envelope_2d(&x, &y, &d).unwrap();
        assert_abs_diff_eq!(v.value(), 1.0 + 100.0f64.ln(), epsilon = 1e-3);
        assert_abs_diff_eq!(v.value(), 5.6052, epsilon = 1e-3);
        // far branch: ρ = 2 both, |x−y| = 5 (chord of the radius-3 circle)
        let x = Point::new2(3.0, 0.0);
        let theta = 2.0 * (5.0f64 / 6.0).asin();
        let y = Point::new2(3.0 * theta.cos(), 3.0 * theta.sin());
        assert_abs_diff_eq!(x.dist(&y), 5.0, epsilon = 1e-12);
        let v = green_envelope_2d(&x, &y, &d).unwrap();
        assert_abs_diff_eq!(v.value(), log_e_plus(2.0), epsilon = 1e-12);
        assert_abs_diff_eq!(v.value(), 1.5514, epsilon = 1e-4);
        // boundary point forces zero through the far branch
        let v = green_envelope_2d(&Point::new2(1.0, 0.0), &Point::new2(3.0, 0.0), &d).unwrap();
        assert_eq!(v.value(), 0.0);
        assert!(green_envelope_2d(&x, &x, &d).is_err());
    }

    #[test]
    fn green_branch_tiebreak_takes_far_branch() {
        // |x−y| exactly equal to ρ∧ρ∧1 = 1: far branch applies
        let d = disk();
        let x = Point::new2(3.0, 0.0);
        let y = Point::new2(3.0, 1.0);
        let v = green_envelope_2d(&x, &y, &d).unwrap();
        let far = d.rho(&x).min(1.0) * d.rho(&y).min(1.0) * log_e_plus(d.rho(&x).min(d.rho(&y)));
        assert_abs_diff_eq!(v.value(), far, epsilon = 1e-14);
    }

    #[test]
    fn riesz_reference_values() {
        let d = disk();
        // n=2, s=1, equal ρ: log ratio is exactly 1
        let x = Point::new2(0.0, 3.0);
        let y = Point::new2(3.0, 0.0);
        let dist = x.dist(&y);
        let v = riesz_envelope(&x, &y, 1.0, &d, 2).unwrap();
        assert_abs_diff_eq!(v.value(), 1.0 / dist, epsilon = 1e-14);
        // n=3, s=1, both ρ ≥ |x−y| ≥ 1, |x−y| = 2 → 1/4
        let b = ball();
        let x3 = Point::new3(4.0, 0.0, 0.0);
        let y3 = Point::new3(6.0, 0.0, 0.0);
        let v = riesz_envelope(&x3, &y3, 1.0, &b, 3).unwrap();
        assert_abs_diff_eq!(v.value(), 0.25, epsilon = 1e-14);
        // boundary vanishing and order validation
        let v = riesz_envelope(&Point::new2(1.0, 0.0), &y, 1.0, &d, 2).unwrap();
        assert_eq!(v.value(), 0.0);
        assert!(riesz_envelope(&x, &y, 0.0, &d, 2).is_err());
        assert!(riesz_envelope(&x, &y, 2.0, &d, 2).is_err());
    }

    #[test]
    fn weighted_volume_reference_values() {
        let d = disk();
        let boundary = Point::new2(1.0, 0.0);
        assert_abs_diff_eq!(
            weighted_volume(&boundary, 1.0, &d),
            (log_e_plus(1.0) + 1.0).powi(2),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(weighted_volume(&boundary, 1.0, &d), 5.3512, epsilon = 1e-4);
        let far = at_rho(E * E - E); // log(e+ρ) = 2
        assert_abs_diff_eq!(
            weighted_volume(&far, 1.0, &d),
            (log_e_plus(1.0) + 2.0).powi(2),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(weighted_volume(&far, 1.0, &d), 10.978, epsilon = 1e-3);
    }

    #[test]
    fn phi_model_values_and_floor() {
        let d = disk();
        assert_abs_diff_eq!(phi_model(&Point::new2(1.0, 0.0), &d), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(phi_model(&at_rho(E * E - E), &d), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn difference_envelope_reference_values() {
        let d = disk();
        let params = EnvelopeParams::new(1.0, 8.0).unwrap();
        let x = at_rho(1.0);
        let v = difference_envelope(1.0, &x, &x, &d, 2, &params);
        assert_abs_diff_eq!(v.value(), (-0.25f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(v.value(), 0.7788, epsilon = 1e-4);
        let boundary = Point::new2(1.0, 0.0);
        let v = difference_envelope(1.0, &boundary, &boundary, &d, 2, &params);
        assert_abs_diff_eq!(v.value(), 1.0, epsilon = 1e-14);
    }

    /// Denominator variant with ρ(x) alone; comparable to the ∨ form.
    fn heat_envelope_2d_asymmetric(t: f64, x: &Point, y: &Point, d: &ExteriorDomain) -> f64 {
        let (rx, ry) = (d.rho(x), d.rho(y));
        let sqrt_t = t.sqrt();
        let near = sqrt_t.min(1.0);
        let den = log_e_plus(sqrt_t) + log_e_plus(rx);
        let r2 = x.dist(y).powi(2);
        log_e_plus(rx) * log_e_plus(ry) / (t * den * den)
            * (rx / near).min(1.0)
            * (ry / near).min(1.0)
            * (-r2 / (4.0 * t)).exp()
    }

    #[test]
    fn denominator_variants_comparable_within_factor_four() {
        let d = disk();
        let rhos = [0.05, 0.2, 1.0, 5.0, 20.0];
        let times = [0.25, 1.0, 4.0, 25.0, 100.0];
        for &t in &times {
            for &ra in &rhos {
                for &rb in &rhos {
                    // same ray keeps |x−y| ≤ 20 so the shared Gaussian factor
                    // stays representable and cancels in the ratio
                    let x = at_rho(ra);
                    let y = at_rho(rb);
                    let sym = heat_envelope_2d(t, &x, &y, &d, &EnvelopeParams::unit()).value();
                    let asym = heat_envelope_2d_asymmetric(t, &x, &y, &d);
                    let ratio = sym / asym;
                    assert!(
                        (0.25..=4.0).contains(&ratio),
                        "ratio {ratio} at t={t}, ρ=({ra},{rb})"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn heat_2d_symmetric_and_nonnegative(
            t in 0.01..100.0f64,
            ax in 1.05..30.0f64, ath in 0.0..6.28f64,
            bx in 1.05..30.0f64, bth in 0.0..6.28f64,
        ) {
            let d = disk();
            let x = Point::new2(ax * ath.cos(), ax * ath.sin());
            let y = Point::new2(bx * bth.cos(), bx * bth.sin());
            let params = EnvelopeParams::unit();
            // keep the Gaussian exponent representable; positivity is only
            // meaningful above the underflow threshold
            prop_assume!(x.dist(&y).powi(2) / (params.c_gauss() * t) < 600.0);
            let v_xy = heat_envelope_2d(t, &x, &y, &d, &params).value();
            let v_yx = heat_envelope_2d(t, &y, &x, &d, &params).value();
            prop_assert!(v_xy > 0.0);
            prop_assert!((v_xy - v_yx).abs() <= 1e-12 * v_xy.max(1e-300));
        }

        #[test]
        fn green_and_riesz_symmetric(
            ax in 1.05..20.0f64, ath in 0.0..6.28f64,
            bx in 1.05..20.0f64, bth in 0.0..6.28f64,
        ) {
            let d = disk();
            let x = Point::new2(ax * ath.cos(), ax * ath.sin());
            let y = Point::new2(bx * bth.cos(), bx * bth.sin());
            prop_assume!(x.dist(&y) > 1e-9);
            let g_xy = green_envelope_2d(&x, &y, &d).unwrap().value();
            let g_yx = green_envelope_2d(&y, &x, &d).unwrap().value();
            prop_assert!((g_xy - g_yx).abs() <= 1e-12 * g_xy.max(1e-300));
            let r_xy = riesz_envelope(&x, &y, 0.7, &d, 2).unwrap().value();
            let r_yx = riesz_envelope(&y, &x, 0.7, &d, 2).unwrap().value();
            prop_assert!((r_xy - r_yx).abs() <= 1e-12 * r_xy.max(1e-300));
        }

        #[test]
        fn weighted_volume_monotone_in_r(
            rho in 0.0..10.0f64, r1 in 0.001..50.0f64, r2 in 0.001..50.0f64,
        ) {
            let d = disk();
            let x = at_rho(rho);
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            prop_assume!(lo < hi);
            prop_assert!(weighted_volume(&x, lo, &d) < weighted_volume(&x, hi, &d));
        }

        #[test]
        fn phi_model_monotone_in_rho(r1 in 0.0..50.0f64, r2 in 0.0..50.0f64) {
            let d = disk();
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            let v_lo = phi_model(&at_rho(lo), &d);
            let v_hi = phi_model(&at_rho(hi), &d);
            prop_assert!(v_lo >= 1.0 - 1e-15);
            prop_assert!(v_lo <= v_hi + 1e-12);
        }

        #[test]
        fn heat_2d_continuous_in_t(
            t in 0.1..50.0f64, rho in 0.1..10.0f64,
        ) {
            let d = disk();
            let x = at_rho(rho);
            let params = EnvelopeParams::unit();
            let v = heat_envelope_2d(t, &x, &x, &d, &params).value();
            let v_eps = heat_envelope_2d(t * (1.0 + 1e-9), &x, &x, &d, &params).value();
            prop_assert!((v - v_eps).abs() <= 1e-6 * v);
        }
    }
}
