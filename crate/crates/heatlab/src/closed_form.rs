//! Closed-form reference solutions.
//!
//! Whole-space Gaussian kernel, half-plane kernel by reflection, the
//! exterior-of-unit-disk Green function and harmonic weight, and the unit
//! disk's ground Dirichlet eigenpair. Every stochastic or discretized
//! estimator in this crate is validated against something here.
//!
//! Convention fixed once, used everywhere: the heat equation is
//! ∂_t u = Δu, so the kernel is p(t,x,y) = (4πt)^{−n/2} exp(−|x−y|²/(4t))
//! and Brownian increments carry variance 2·dt per coordinate.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::special;

/// Whole-space kernel (4πt)^{−n/2} exp(−|x−y|²/(4t)). Panics on t ≤ 0 or
/// mismatched dimensions; those are programmer errors, not data.
pub fn gauss_kernel(t: f64, x: &Point, y: &Point) -> f64 {
    assert!(t > 0.0, "gauss_kernel needs t > 0");
    let n = x.dim() as f64;
    let r2 = {
        let d = x.dist(y);
        d * d
    };
    (4.0 * std::f64::consts::PI * t).powf(-0.5 * n) * (-r2 / (4.0 * t)).exp()
}

/// Heat kernel of the open upper half-plane {x₂ > 0} by the reflection
/// formula p(t,x,y) − p(t,x,ȳ), ȳ = (y₁, −y₂). Zero when either point is
/// on the boundary; error when either lies strictly below it.
pub fn halfplane_kernel(t: f64, x: &Point, y: &Point) -> Result<f64> {
    assert!(t > 0.0, "halfplane_kernel needs t > 0");
    if x.dim() != 2 || y.dim() != 2 {
        return Err(Error::InvalidPoint("half-plane kernel is 2D".into()));
    }
    if x.y() < 0.0 || y.y() < 0.0 {
        return Err(Error::InvalidPoint(format!(
            "points must satisfy x2 >= 0, got {} and {}",
            x.y(),
            y.y()
        )));
    }
    let mirrored = Point::new2(y.x(), -y.y());
    Ok((gauss_kernel(t, x, y) - gauss_kernel(t, x, &mirrored)).max(0.0))
}

/// Green function of the exterior of the unit disk with Dirichlet boundary:
/// (1/2π) ln(|x − y*|·|y| / |x − y|) with y* = y/|y|² the inversion of y.
/// Symmetric, vanishing on |x| = 1, harmonic away from y.
pub fn exterior_disk_green(x: &Point, y: &Point) -> Result<f64> {
    if x.dim() != 2 || y.dim() != 2 {
        return Err(Error::InvalidPoint("exterior disk Green function is 2D".into()));
    }
    let (rx, ry) = (x.norm(), y.norm());
    if rx < 1.0 || ry < 1.0 {
        return Err(Error::InvalidPoint(format!(
            "points must lie outside the unit disk, |x| = {rx}, |y| = {ry}"
        )));
    }
    let diff = x.dist(y);
    if diff == 0.0 {
        return Err(Error::OutOfRange("Green function is singular at x = y".into()));
    }
    let inverted = Point::new2(y.x() / (ry * ry), y.y() / (ry * ry));
    Ok((x.dist(&inverted) * ry / diff).ln() / (2.0 * std::f64::consts::PI))
}

/// Harmonic weight of the exterior unit disk: φ(x) = 1 + ln|x| for |x| ≥ 1.
/// Harmonic in |x| > 1, equal to 1 on the boundary circle.
pub fn exterior_disk_phi(x: &Point) -> Result<f64> {
    let r = x.norm();
    if r < 1.0 {
        return Err(Error::InvalidPoint(format!(
            "harmonic weight is defined for |x| >= 1, got {r}"
        )));
    }
    Ok(1.0 + r.ln())
}

/// Radial profile of the unit disk's Dirichlet ground state.
#[derive(Debug, Clone, Copy)]
pub struct DiskGroundProfile {
    root: f64,
}

impl DiskGroundProfile {
    /// J₀(j₀,₁ · r); positive on [0,1), zero at r = 1.
    pub fn eval(&self, r: f64) -> f64 {
        special::bessel_j0(self.root * r)
    }
}

/// First Dirichlet eigenpair of the unit disk: (j₀,₁², r ↦ J₀(j₀,₁ r)).
pub fn disk_first_eigenpair() -> (f64, DiskGroundProfile) {
    let root = special::j0_first_zero();
    (root * root, DiskGroundProfile { root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn gauss_reference_values() {
        let origin = Point::new2(0.0, 0.0);
        assert_abs_diff_eq!(
            gauss_kernel(1.0, &origin, &origin),
            1.0 / (4.0 * PI),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            gauss_kernel(1.0, &origin, &Point::new2(2.0, 0.0)),
            (-1.0f64).exp() / (4.0 * PI),
            epsilon = 1e-15
        );
        let origin3 = Point::new3(0.0, 0.0, 0.0);
        assert_abs_diff_eq!(
            gauss_kernel(0.25, &origin3, &origin3),
            PI.powf(-1.5),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(PI.powf(-1.5), 0.179_587_1, epsilon = 1e-7);
    }

    #[test]
    fn gauss_integrates_to_one() {
        // radial quadrature: ∫_{ℝ²} p = 2π ∫ r p(r) dr, ∫_{ℝ³} p = 4π ∫ r² p(r) dr
        for (n, t) in [(2usize, 0.7f64), (2, 3.0), (3, 0.5)] {
            let x = if n == 2 {
                Point::new2(0.0, 0.0)
            } else {
                Point::new3(0.0, 0.0, 0.0)
            };
            let r_max = 20.0 * t.sqrt();
            let samples = 40_000;
            let dr = r_max / samples as f64;
            let mut total = 0.0;
            for i in 0..samples {
                let r = (i as f64 + 0.5) * dr;
                let y = if n == 2 {
                    Point::new2(r, 0.0)
                } else {
                    Point::new3(r, 0.0, 0.0)
                };
                let shell = if n == 2 { 2.0 * PI * r } else { 4.0 * PI * r * r };
                total += shell * gauss_kernel(t, &x, &y) * dr;
            }
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn halfplane_reference_values() {
        let x = Point::new2(0.0, 1.0);
        assert_abs_diff_eq!(
            halfplane_kernel(1.0, &x, &x).unwrap(),
            (1.0 - (-1.0f64).exp()) / (4.0 * PI),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            halfplane_kernel(1.0, &x, &x).unwrap(),
            0.050_302_6,
            epsilon = 1e-7
        );
        let far = Point::new2(0.0, 3.0);
        assert_abs_diff_eq!(
            halfplane_kernel(1.0, &x, &far).unwrap(),
            ((-1.0f64).exp() - (-4.0f64).exp()) / (4.0 * PI),
            epsilon = 1e-15
        );
        assert_eq!(
            halfplane_kernel(1.0, &x, &Point::new2(2.0, 0.0)).unwrap(),
            0.0
        );
        assert!(halfplane_kernel(1.0, &x, &Point::new2(0.0, -0.1)).is_err());
    }

    #[test]
    fn halfplane_equals_gauss_times_survival_factor() {
        // algebraic identity: p_H = p · (1 − e^{−x₂y₂/t})
        for &t in &[0.25, 1.0, 4.0] {
            for &(x2, y2, dx) in &[(0.5, 0.5, 0.0), (1.0, 2.0, 1.5), (0.1, 3.0, -2.0), (2.0, 2.0, 4.0)] {
                let x = Point::new2(0.0, x2);
                let y = Point::new2(dx, y2);
                let lhs = halfplane_kernel(t, &x, &y).unwrap();
                let rhs = gauss_kernel(t, &x, &y) * (1.0 - (-x2 * y2 / t).exp());
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-15 * rhs.max(1.0));
                assert!(lhs <= gauss_kernel(t, &x, &y) * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn green_reference_value_and_symmetry() {
        let x = Point::new2(2.0, 0.0);
        let y = Point::new2(3.0, 0.0);
        let g = exterior_disk_green(&x, &y).unwrap();
        assert_abs_diff_eq!(g, 5.0f64.ln() / (2.0 * PI), epsilon = 1e-14);
        assert_abs_diff_eq!(g, 0.256_150_0, epsilon = 1e-7);
        assert_abs_diff_eq!(
            g,
            exterior_disk_green(&y, &x).unwrap(),
            epsilon = 1e-14
        );
        // generic off-axis pair
        let p = Point::new2(1.3, -0.8);
        let q = Point::new2(-2.0, 2.5);
        assert_abs_diff_eq!(
            exterior_disk_green(&p, &q).unwrap(),
            exterior_disk_green(&q, &p).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn green_vanishes_on_boundary() {
        let y = Point::new2(3.0, 0.0);
        assert_abs_diff_eq!(
            exterior_disk_green(&Point::new2(1.0, 0.0), &y).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        for k in 0..8 {
            let th = 2.0 * PI * k as f64 / 8.0;
            let r = 1.0 + 1e-8;
            let x = Point::new2(r * th.cos(), r * th.sin());
            assert!(exterior_disk_green(&x, &y).unwrap() < 1e-6);
        }
        assert!(exterior_disk_green(&Point::new2(0.5, 0.0), &y).is_err());
        assert!(exterior_disk_green(&y, &y).is_err());
    }

    #[test]
    fn green_is_discretely_harmonic() {
        // 5-point stencil residual h^{-2}(Σ neighbors − 4·center) at spacing
        // h = 1e-3; fourth derivatives of G are O(1) at these points, so the
        // residual is O(h²) ≈ 1e-6, well under the 1e-4 gate.
        let y = Point::new2(3.0, 0.0);
        let h = 1e-3;
        for center in [
            Point::new2(2.0, 0.5),
            Point::new2(-1.5, 1.0),
            Point::new2(0.0, -2.0),
            Point::new2(4.0, 4.0),
        ] {
            let g = |dx: f64, dy: f64| {
                exterior_disk_green(&Point::new2(center.x() + dx, center.y() + dy), &y).unwrap()
            };
            let residual =
                (g(h, 0.0) + g(-h, 0.0) + g(0.0, h) + g(0.0, -h) - 4.0 * g(0.0, 0.0)) / (h * h);
            assert!(
                residual.abs() < 1e-4,
                "stencil residual {residual} at ({}, {})",
                center.x(),
                center.y()
            );
        }
    }

    #[test]
    fn phi_reference_values() {
        assert_abs_diff_eq!(
            exterior_disk_phi(&Point::new2(1.0, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(
            exterior_disk_phi(&Point::new2(e, 0.0)).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            exterior_disk_phi(&Point::new2(0.0, e * e)).unwrap(),
            3.0,
            epsilon = 1e-14
        );
        assert!(exterior_disk_phi(&Point::new2(0.5, 0.0)).is_err());
    }

    #[test]
    fn circle_mean_of_log_distance_is_log_radius() {
        // (1/2π) ∮ ln|x − e^{iθ}| dθ = ln|x| for |x| ≥ 1; the identity behind
        // the harmonic-weight construction, checked by trapezoid quadrature.
        let m = 4096;
        for &r in &[1.5, std::f64::consts::E, 5.0] {
            let x = Point::new2(r, 0.0);
            let mut mean = 0.0;
            for j in 0..m {
                let th = 2.0 * PI * j as f64 / m as f64;
                let b = Point::new2(th.cos(), th.sin());
                mean += x.dist(&b).ln();
            }
            mean /= m as f64;
            assert_abs_diff_eq!(mean, r.ln(), epsilon = 1e-10);
        }
    }

    #[test]
    fn disk_ground_state() {
        let (lambda, profile) = disk_first_eigenpair();
        assert_abs_diff_eq!(lambda, 5.7832, epsilon = 5e-5);
        assert_abs_diff_eq!(lambda, special::J0_FIRST_ZERO.powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(profile.eval(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(profile.eval(1.0), 0.0, epsilon = 1e-10);
        assert!(profile.eval(0.5) > 0.0);
    }
}
