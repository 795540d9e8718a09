//! Exterior domains Ω = ℝⁿ \ closure(U) for bounded obstacles U.
//!
//! Everything downstream consumes two geometric primitives: the distance
//! ρ(x) = dist(x, Ω^c), which vanishes exactly on the obstacle closure, and
//! a boundary quadrature (nodes, outward normals, arclength weights) for
//! layer potentials. Boundary points belong to Ω^c: ρ = 0 and
//! `contains` = false there, matching the Dirichlet convention that kernels
//! vanish on the boundary.

use crate::error::{Error, Result};

/// Spatial point in dimension 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: usize,
}

impl Point {
    /// 2D point. Panics on non-finite coordinates.
    pub fn new2(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "coordinates must be finite");
        Point { coords: [x, y, 0.0], dim: 2 }
    }

    /// 3D point. Panics on non-finite coordinates.
    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        assert!(
            x.is_finite() && y.is_finite() && z.is_finite(),
            "coordinates must be finite"
        );
        Point { coords: [x, y, z], dim: 3 }
    }

    /// Builds from a slice of length 2 or 3.
    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        match coords {
            [x, y] => Ok(Point::new2(*x, *y)),
            [x, y, z] => Ok(Point::new3(*x, *y, *z)),
            _ => Err(Error::InvalidPoint(format!(
                "expected 2 or 3 coordinates, got {}",
                coords.len()
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates as a slice of length `dim`.
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coords()
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distance; both points must share a dimension.
    pub fn dist(&self, other: &Point) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Smooth, strictly positive, 2π-periodic radial profile
/// r(θ) = base + Σ_k (a_k cos kθ + b_k sin kθ) for star-shaped obstacles.
///
/// Finite trigonometric polynomials are C^∞, hence C^{1,1}; positivity is
/// checked on a dense θ grid at construction.
#[derive(Debug, Clone)]
pub struct StarProfile {
    base: f64,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
}

impl StarProfile {
    pub fn new(base: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Result<Self> {
        let profile = StarProfile { base, cos_coeffs, sin_coeffs };
        let samples = 4096;
        let min_r = (0..samples)
            .map(|i| profile.eval(2.0 * std::f64::consts::PI * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min);
        if !(min_r > 0.0) {
            return Err(Error::OutOfRange(format!(
                "star profile must stay positive; sampled minimum {min_r}"
            )));
        }
        Ok(profile)
    }

    /// r(θ)
    pub fn eval(&self, theta: f64) -> f64 {
        let mut r = self.base;
        for (k, a) in self.cos_coeffs.iter().enumerate() {
            r += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, b) in self.sin_coeffs.iter().enumerate() {
            r += b * ((k + 1) as f64 * theta).sin();
        }
        r
    }

    /// dr/dθ
    pub fn deriv(&self, theta: f64) -> f64 {
        let mut d = 0.0;
        for (k, a) in self.cos_coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            d -= a * k * (k * theta).sin();
        }
        for (k, b) in self.sin_coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            d += b * k * (k * theta).cos();
        }
        d
    }

    /// d²r/dθ²
    pub fn deriv2(&self, theta: f64) -> f64 {
        let mut d = 0.0;
        for (k, a) in self.cos_coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            d -= a * k * k * (k * theta).cos();
        }
        for (k, b) in self.sin_coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            d -= b * k * k * (k * theta).sin();
        }
        d
    }
}

/// Bounded obstacle with C^{1,1} boundary. Ellipse and StarShaped are
/// origin-centered; translation is the caller's business.
#[derive(Debug, Clone)]
pub enum Obstacle {
    /// Disk in 2D, ball in 3D.
    Disk { center: Point, radius: f64 },
    /// Axis-aligned, semi-axes a ≥ b > 0.
    Ellipse { a: f64, b: f64 },
    /// Region {r < profile(θ)} in polar coordinates.
    StarShaped { profile: StarProfile },
}

impl Obstacle {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Obstacle::Disk { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::OutOfRange(format!("disk radius {radius} must be > 0")));
                }
                if center.dim() != dim {
                    return Err(Error::InvalidPoint(format!(
                        "disk center has dimension {}, domain has {}",
                        center.dim(),
                        dim
                    )));
                }
                Ok(())
            }
            Obstacle::Ellipse { a, b } => {
                if !(*a >= *b && *b > 0.0) {
                    return Err(Error::OutOfRange(format!(
                        "ellipse semi-axes must satisfy a >= b > 0, got a={a}, b={b}"
                    )));
                }
                if dim != 2 {
                    return Err(Error::OutOfRange("ellipse obstacles are 2D only".into()));
                }
                Ok(())
            }
            Obstacle::StarShaped { .. } => {
                if dim != 2 {
                    return Err(Error::OutOfRange("star-shaped obstacles are 2D only".into()));
                }
                Ok(())
            }
        }
    }

    /// Diameter of the obstacle.
    pub fn diameter(&self) -> f64 {
        match self {
            Obstacle::Disk { radius, .. } => 2.0 * radius,
            Obstacle::Ellipse { a, .. } => 2.0 * a,
            Obstacle::StarShaped { profile } => {
                // max over antipodal sums r(θ) + r(θ+π)
                let samples = 4096;
                (0..samples)
                    .map(|i| {
                        let th = std::f64::consts::PI * i as f64 / samples as f64;
                        profile.eval(th) + profile.eval(th + std::f64::consts::PI)
                    })
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// Region with a distance-to-complement function; implemented by exterior
/// domains and by the upper half-plane oracle geometry.
pub trait Domain: Sync {
    fn dim(&self) -> usize;

    /// ρ(x) = dist(x, Ω^c); zero on the obstacle closure.
    fn rho(&self, x: &Point) -> f64;

    /// x ∈ Ω (open): equivalent to ρ(x) > 0.
    fn contains(&self, x: &Point) -> bool {
        self.rho(x) > 0.0
    }
}

/// Ω = ℝⁿ \ closure(U): the complement of a bounded obstacle.
#[derive(Debug, Clone)]
pub struct ExteriorDomain {
    obstacle: Obstacle,
    dim: usize,
}

impl ExteriorDomain {
    /// dim must be 2, or 3 with a Disk (=ball) obstacle.
    pub fn new(obstacle: Obstacle, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::OutOfRange(format!("dimension {dim} unsupported (2 or 3)")));
        }
        obstacle.validate(dim)?;
        Ok(ExteriorDomain { obstacle, dim })
    }

    /// Exterior of the unit disk centered at the origin, the workhorse domain.
    pub fn exterior_unit_disk() -> Self {
        ExteriorDomain::new(
            Obstacle::Disk { center: Point::new2(0.0, 0.0), radius: 1.0 },
            2,
        )
        .expect("unit disk is valid")
    }

    pub fn obstacle(&self) -> &Obstacle {
        &self.obstacle
    }

    /// Diameter of the obstacle (not of Ω).
    pub fn obstacle_diameter(&self) -> f64 {
        self.obstacle.diameter()
    }

    /// Quadrature nodes traversing ∂Ω once, counterclockwise: position,
    /// unit outward normal (pointing into Ω), arclength weight, and
    /// curvature. Uniform parameter trapezoid rule; spectrally accurate for
    /// these smooth closed curves. 2D only.
    pub fn boundary_trace(&self, m: usize) -> Result<Vec<BoundaryNode>> {
        self.boundary_trace_offset(m, 0.0)
    }

    /// Like [`boundary_trace`](Self::boundary_trace) but with nodes shifted
    /// by `offset` grid fractions (in `[0, 1)`) along the parameter; a
    /// half-step shift keeps quadrature nodes away from collocation points.
    pub fn boundary_trace_offset(&self, m: usize, offset: f64) -> Result<Vec<BoundaryNode>> {
        if self.dim != 2 {
            return Err(Error::OutOfRange("boundary_trace is 2D only".into()));
        }
        if m < 8 {
            return Err(Error::InsufficientResolution(format!(
                "boundary trace needs m >= 8 nodes, got {m}"
            )));
        }
        if !(0.0..1.0).contains(&offset) {
            return Err(Error::OutOfRange(format!(
                "node offset must lie in [0, 1), got {offset}"
            )));
        }
        let step = 2.0 * std::f64::consts::PI / m as f64;
        let nodes = (0..m)
            .map(|j| {
                let th = (j as f64 + offset) * step;
                let (sin, cos) = th.sin_cos();
                match &self.obstacle {
                    Obstacle::Disk { center, radius } => BoundaryNode {
                        point: Point::new2(center.x() + radius * cos, center.y() + radius * sin),
                        normal: Point::new2(cos, sin),
                        weight: radius * step,
                        curvature: 1.0 / radius,
                    },
                    Obstacle::Ellipse { a, b } => {
                        let speed = ((a * sin) * (a * sin) + (b * cos) * (b * cos)).sqrt();
                        // outward normal ∝ gradient of x²/a² + y²/b²
                        let (nx, ny) = (cos / a, sin / b);
                        let nn = (nx * nx + ny * ny).sqrt();
                        BoundaryNode {
                            point: Point::new2(a * cos, b * sin),
                            normal: Point::new2(nx / nn, ny / nn),
                            weight: speed * step,
                            curvature: a * b / speed.powi(3),
                        }
                    }
                    Obstacle::StarShaped { profile } => {
                        let r = profile.eval(th);
                        let dr = profile.deriv(th);
                        let ddr = profile.deriv2(th);
                        // tangent (r'cos − r sin, r'sin + r cos); rotate -90° for
                        // the outward normal of a counterclockwise curve
                        let (tx, ty) = (dr * cos - r * sin, dr * sin + r * cos);
                        let speed = (tx * tx + ty * ty).sqrt();
                        BoundaryNode {
                            point: Point::new2(r * cos, r * sin),
                            normal: Point::new2(ty / speed, -tx / speed),
                            weight: speed * step,
                            curvature: (r * r + 2.0 * dr * dr - r * ddr) / speed.powi(3),
                        }
                    }
                }
            })
            .collect();
        Ok(nodes)
    }
}

/// One boundary quadrature node.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryNode {
    pub point: Point,
    /// Unit normal pointing out of the obstacle, into Ω.
    pub normal: Point,
    /// Arclength weight; weights sum to the perimeter.
    pub weight: f64,
    /// Counterclockwise signed curvature; positive where the obstacle is convex.
    pub curvature: f64,
}

impl Domain for ExteriorDomain {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rho(&self, x: &Point) -> f64 {
        assert_eq!(x.dim(), self.dim, "point dimension mismatch");
        match &self.obstacle {
            Obstacle::Disk { center, radius } => (x.dist(center) - radius).max(0.0),
            Obstacle::Ellipse { a, b } => ellipse_distance(*a, *b, x.x(), x.y()),
            Obstacle::StarShaped { profile } => star_distance(profile, x.x(), x.y()),
        }
    }
}

/// Open upper half-plane {x₂ > 0}: the geometry with an exact kernel, used
/// as the Monte Carlo oracle. Not an `ExteriorDomain` (its complement is
/// unbounded) but the same `Domain` contract.
#[derive(Debug, Clone, Copy)]
pub struct UpperHalfPlane;

impl Domain for UpperHalfPlane {
    fn dim(&self) -> usize {
        2
    }

    fn rho(&self, x: &Point) -> f64 {
        x.y().max(0.0)
    }
}

/// Open unit disk as a bounded oracle geometry.
#[derive(Debug, Clone, Copy)]
pub struct UnitDiskInterior;

impl Domain for UnitDiskInterior {
    fn dim(&self) -> usize {
        2
    }

    fn rho(&self, x: &Point) -> f64 {
        (1.0 - x.norm()).max(0.0)
    }
}

/// Open unit square (0,1)² as a bounded oracle geometry.
#[derive(Debug, Clone, Copy)]
pub struct UnitSquareInterior;

impl Domain for UnitSquareInterior {
    fn dim(&self) -> usize {
        2
    }

    fn rho(&self, x: &Point) -> f64 {
        let side = x.x().min(1.0 - x.x()).min(x.y()).min(1.0 - x.y());
        side.max(0.0)
    }
}

/// Distance from (px, py) to the origin-centered ellipse with semi-axes
/// a ≥ b; zero inside. Bisection on the stationarity equation of the
/// squared distance in the first quadrant (unique root there for exterior
/// points), 60 iterations.
fn ellipse_distance(a: f64, b: f64, px: f64, py: f64) -> f64 {
    let (px, py) = (px.abs(), py.abs());
    if px * px / (a * a) + py * py / (b * b) <= 1.0 {
        return 0.0;
    }
    // d/dθ ½|x−(a cosθ, b sinθ)|² = (a²−b²) sinθ cosθ − a px sinθ + b py cosθ
    let grad = |th: f64| {
        let (s, c) = th.sin_cos();
        (a * a - b * b) * s * c - a * px * s + b * py * c
    };
    // grad(0) = b·py ≥ 0, grad(π/2) = −sinθ terms ≤ 0: bracket guaranteed
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if grad(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let th = 0.5 * (lo + hi);
    let (s, c) = th.sin_cos();
    ((px - a * c).powi(2) + (py - b * s).powi(2)).sqrt()
}

/// Distance from (px, py) to the star-shaped curve r = profile(θ); zero
/// inside the obstacle. Newton on the squared-distance objective seeded at
/// the angular argument of the point, with a dense-scan bisection fallback.
fn star_distance(profile: &StarProfile, px: f64, py: f64) -> f64 {
    let pr = (px * px + py * py).sqrt();
    let pang = py.atan2(px);
    if pr <= profile.eval(pang) {
        return 0.0;
    }
    let sq_dist = |th: f64| {
        let r = profile.eval(th);
        let (s, c) = th.sin_cos();
        (px - r * c).powi(2) + (py - r * s).powi(2)
    };
    // g'(θ)/2 = (x(θ)−p)·x'(θ)
    let half_grad = |th: f64| {
        let r = profile.eval(th);
        let dr = profile.deriv(th);
        let (s, c) = th.sin_cos();
        (r * c - px) * (dr * c - r * s) + (r * s - py) * (dr * s + r * c)
    };

    // Newton from the angular seed
    let mut th = pang;
    let mut converged = false;
    for _ in 0..30 {
        let g = half_grad(th);
        let h = 1e-6;
        let dg = (half_grad(th + h) - half_grad(th - h)) / (2.0 * h);
        if dg.abs() < 1e-14 {
            break;
        }
        let step = g / dg;
        th -= step;
        if step.abs() < 1e-12 {
            converged = true;
            break;
        }
    }
    let newton_val = if converged { sq_dist(th) } else { f64::INFINITY };

    // Dense scan + bisection fallback; also guards Newton against landing
    // in a non-global critical point.
    let samples = 256;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..samples {
        let t = pang + 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        let v = sq_dist(t);
        if v < best.0 {
            best = (v, t);
        }
    }
    let width = 2.0 * std::f64::consts::PI / samples as f64;
    let (mut lo, mut hi) = (best.1 - width, best.1 + width);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if half_grad(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scan_val = sq_dist(0.5 * (lo + hi));

    newton_val.min(scan_val).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ellipse21() -> ExteriorDomain {
        ExteriorDomain::new(Obstacle::Ellipse { a: 2.0, b: 1.0 }, 2).unwrap()
    }

    fn wavy_star() -> ExteriorDomain {
        let profile = StarProfile::new(1.0, vec![0.0, 0.15], vec![0.1]).unwrap();
        ExteriorDomain::new(Obstacle::StarShaped { profile }, 2).unwrap()
    }

    #[test]
    fn disk_distance_is_exact() {
        let d = ExteriorDomain::exterior_unit_disk();
        assert_eq!(d.rho(&Point::new2(2.0, 0.0)), 1.0);
        assert_eq!(d.rho(&Point::new2(0.5, 0.0)), 0.0);
        assert_eq!(d.rho(&Point::new2(1.0, 0.0)), 0.0); // boundary is in Ω^c
        assert!(!d.contains(&Point::new2(1.0, 0.0)));
        assert!(d.contains(&Point::new2(2.0, 0.0)));
        assert!(!d.contains(&Point::new2(0.0, 0.0)));
    }

    #[test]
    fn ball_distance_in_3d() {
        let d = ExteriorDomain::new(
            Obstacle::Disk { center: Point::new3(0.0, 0.0, 0.0), radius: 1.0 },
            3,
        )
        .unwrap();
        assert_abs_diff_eq!(d.rho(&Point::new3(0.0, 0.0, 2.0)), 1.0, epsilon = 1e-15);
        assert_eq!(d.rho(&Point::new3(0.3, 0.3, 0.3)), 0.0);
    }

    /// Dense boundary-sampling oracle: min distance over many boundary points.
    fn dense_distance_oracle(domain: &ExteriorDomain, x: &Point, samples: usize) -> f64 {
        if !domain.contains(x) {
            return 0.0;
        }
        let nodes = domain.boundary_trace(samples).unwrap();
        nodes
            .iter()
            .map(|n| n.point.dist(x))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn ellipse_distance_on_axis() {
        let d = ellipse21();
        assert_abs_diff_eq!(d.rho(&Point::new2(3.0, 0.0)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.rho(&Point::new2(0.0, 3.0)), 2.0, epsilon = 1e-12);
        assert_eq!(d.rho(&Point::new2(0.0, 0.0)), 0.0);
    }

    #[test]
    fn ellipse_distance_matches_dense_sampling() {
        let d = ellipse21();
        // 10⁶ boundary points, agreement to 1e-6
        for p in [
            Point::new2(3.0, 0.0),
            Point::new2(2.5, 1.5),
            Point::new2(-1.8, -1.1),
            Point::new2(0.3, 1.05),
        ] {
            let oracle = dense_distance_oracle(&d, &p, 1_000_000);
            assert_abs_diff_eq!(d.rho(&p), oracle, epsilon = 1e-6);
        }
    }

    #[test]
    fn star_distance_matches_dense_sampling() {
        let d = wavy_star();
        for p in [
            Point::new2(2.0, 0.0),
            Point::new2(-1.5, 2.0),
            Point::new2(0.1, -1.9),
            Point::new2(1.4, 1.4),
        ] {
            let oracle = dense_distance_oracle(&d, &p, 1_000_000);
            assert_abs_diff_eq!(d.rho(&p), oracle, epsilon = 1e-6);
        }
    }

    #[test]
    fn boundary_trace_rejects_small_m() {
        let d = ExteriorDomain::exterior_unit_disk();
        assert!(matches!(
            d.boundary_trace(4),
            Err(Error::InsufficientResolution(_))
        ));
    }

    #[test]
    fn disk_trace_weights_sum_to_perimeter() {
        let d = ExteriorDomain::exterior_unit_disk();
        let nodes = d.boundary_trace(256).unwrap();
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        assert_abs_diff_eq!(total, 2.0 * std::f64::consts::PI, epsilon = 1e-6);
        // m = 8 nodes sit at angles 2πj/8 starting from 0
        let nodes = d.boundary_trace(8).unwrap();
        assert_abs_diff_eq!(nodes[0].point.x(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nodes[2].point.y(), 1.0, epsilon = 1e-15);
    }

    /// Adaptive Simpson arclength oracle for the ellipse perimeter.
    fn simpson_arclength(a: f64, b: f64) -> f64 {
        fn speed(a: f64, b: f64, th: f64) -> f64 {
            let (s, c) = th.sin_cos();
            ((a * s) * (a * s) + (b * c) * (b * c)).sqrt()
        }
        fn recurse(a: f64, b: f64, lo: f64, hi: f64, f_lo: f64, f_mid: f64, f_hi: f64, whole: f64, depth: u32) -> f64 {
            let mid = 0.5 * (lo + hi);
            let lm = 0.5 * (lo + mid);
            let mh = 0.5 * (mid + hi);
            let f_lm = speed(a, b, lm);
            let f_mh = speed(a, b, mh);
            let left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid);
            let right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_mh + f_hi);
            if depth == 0 || (left + right - whole).abs() < 1e-12 {
                left + right
            } else {
                recurse(a, b, lo, mid, f_lo, f_lm, f_mid, left, depth - 1)
                    + recurse(a, b, mid, hi, f_mid, f_mh, f_hi, right, depth - 1)
            }
        }
        let (lo, hi) = (0.0, 2.0 * std::f64::consts::PI);
        let mid = 0.5 * (lo + hi);
        let (f_lo, f_mid, f_hi) = (speed(a, b, lo), speed(a, b, mid), speed(a, b, hi));
        let whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
        recurse(a, b, lo, hi, f_lo, f_mid, f_hi, whole, 24)
    }

    #[test]
    fn ellipse_trace_matches_adaptive_arclength() {
        let d = ellipse21();
        let nodes = d.boundary_trace(1024).unwrap();
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        let oracle = simpson_arclength(2.0, 1.0);
        assert_abs_diff_eq!(oracle, 9.688_448_2, epsilon = 5e-7);
        assert_abs_diff_eq!(total, oracle, epsilon = 1e-6);
    }

    #[test]
    fn trace_weight_refinement_stability() {
        // doubling m moves the perimeter by < 1e-4 relative at m >= 512
        for d in [ellipse21(), wavy_star()] {
            let p512: f64 = d.boundary_trace(512).unwrap().iter().map(|n| n.weight).sum();
            let p1024: f64 = d.boundary_trace(1024).unwrap().iter().map(|n| n.weight).sum();
            assert!(((p512 - p1024) / p1024).abs() < 1e-4);
            assert!(p512 > 0.0);
        }
    }

    #[test]
    fn trace_curvature_matches_turning_rate() {
        // curvature = d(tangent angle)/d(arclength), estimated from
        // neighboring nodes of a fine trace
        for d in [
            ExteriorDomain::exterior_unit_disk(),
            ellipse21(),
            wavy_star(),
        ] {
            let nodes = d.boundary_trace(4096).unwrap();
            let m = nodes.len();
            for idx in (0..m).step_by(171) {
                let prev = &nodes[(idx + m - 1) % m];
                let next = &nodes[(idx + 1) % m];
                let angle = |n: &BoundaryNode| f64::atan2(-n.normal.x(), n.normal.y());
                let mut dtheta = angle(next) - angle(prev);
                while dtheta > std::f64::consts::PI {
                    dtheta -= 2.0 * std::f64::consts::PI;
                }
                while dtheta < -std::f64::consts::PI {
                    dtheta += 2.0 * std::f64::consts::PI;
                }
                let ds = 0.5 * (prev.weight + next.weight) + nodes[idx].weight;
                let numeric = dtheta / (0.5 * ds * 2.0);
                assert_abs_diff_eq!(numeric, nodes[idx].curvature, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn trace_offset_shifts_nodes() {
        let d = ExteriorDomain::exterior_unit_disk();
        let half = d.boundary_trace_offset(64, 0.5).unwrap();
        let step = 2.0 * std::f64::consts::PI / 64.0;
        assert_abs_diff_eq!(half[0].point.x(), (0.5 * step).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(half[0].point.y(), (0.5 * step).sin(), epsilon = 1e-14);
        assert!(d.boundary_trace_offset(64, 1.0).is_err());
        assert!(d.boundary_trace_offset(64, -0.1).is_err());
    }

    #[test]
    fn star_normals_point_outward() {
        let d = wavy_star();
        for n in d.boundary_trace(64).unwrap() {
            let eps = 1e-4;
            let outside = Point::new2(
                n.point.x() + eps * n.normal.x(),
                n.point.y() + eps * n.normal.y(),
            );
            let inside = Point::new2(
                n.point.x() - eps * n.normal.x(),
                n.point.y() - eps * n.normal.y(),
            );
            assert!(d.rho(&outside) > 0.0, "outward offset must be in Ω");
            assert_eq!(d.rho(&inside), 0.0, "inward offset must be in the obstacle");
        }
    }

    #[test]
    fn invalid_constructions_are_rejected() {
        assert!(ExteriorDomain::new(Obstacle::Ellipse { a: 1.0, b: 2.0 }, 2).is_err());
        assert!(ExteriorDomain::new(Obstacle::Ellipse { a: 2.0, b: 1.0 }, 3).is_err());
        assert!(ExteriorDomain::new(
            Obstacle::Disk { center: Point::new2(0.0, 0.0), radius: 0.0 },
            2
        )
        .is_err());
        assert!(StarProfile::new(1.0, vec![1.5], vec![]).is_err()); // dips negative
    }

    #[test]
    fn half_plane_rho() {
        let h = UpperHalfPlane;
        assert_eq!(h.rho(&Point::new2(5.0, 2.0)), 2.0);
        assert_eq!(h.rho(&Point::new2(5.0, -1.0)), 0.0);
        assert!(!h.contains(&Point::new2(0.0, 0.0)));
    }

    proptest! {
        #[test]
        fn rho_is_one_lipschitz(
            ax in -6.0..6.0f64, ay in -6.0..6.0f64,
            bx in -6.0..6.0f64, by in -6.0..6.0f64,
            which in 0..3usize,
        ) {
            let domain = match which {
                0 => ExteriorDomain::exterior_unit_disk(),
                1 => ellipse21(),
                _ => wavy_star(),
            };
            let p = Point::new2(ax, ay);
            let q = Point::new2(bx, by);
            let lhs = (domain.rho(&p) - domain.rho(&q)).abs();
            prop_assert!(lhs <= p.dist(&q) + 1e-9);
        }

        #[test]
        fn contains_iff_rho_positive(
            x in -6.0..6.0f64, y in -6.0..6.0f64, which in 0..3usize,
        ) {
            let domain = match which {
                0 => ExteriorDomain::exterior_unit_disk(),
                1 => ellipse21(),
                _ => wavy_star(),
            };
            let p = Point::new2(x, y);
            prop_assert_eq!(domain.contains(&p), domain.rho(&p) > 0.0);
        }
    }
}
