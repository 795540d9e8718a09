//! Harmonic weight on an exterior domain built from boundary layer
//! potentials: an averaged single-layer log potential `u0`, the bounded
//! exterior Dirichlet extension `u1` of its boundary trace, the far-field
//! log slope `c0` of their difference, and the weight
//!
//! `phi = 1 + (u0 - u1)/c0` on the exterior, `phi = 1` on the obstacle.
//!
//! For the unit disk this collapses to `phi(x) = 1 + ln|x|`, which the tests
//! pin. The Dirichlet solve is a double-layer Nystrom method with the
//! curvature diagonal and a rank-one completion fixing the solution class of
//! bounded harmonic functions; the completion constant is the value at
//! infinity.

use std::os::raw::{c_char, c_int};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryNode, Domain, ExteriorDomain, Point};

/// Quadrature nodes sit half a step off the collocation grid so that
/// log-singular integrands are always sampled mid-interval.
const QUAD_OFFSET: f64 = 0.5;

/// Reciprocal condition number below which the boundary system is refused.
const RCOND_FLOOR: f64 = 1e-12;

/// Averaged single-layer potential of the boundary: the mean of
/// `ln|y - x|` over arclength, divided by `2π`. Decays like `ln|x|/(2π)`
/// plus `O(1/|x|)` at infinity; for a circle of radius `a` it equals
/// `ln(max(|x|, a))/(2π)` exactly.
pub fn single_layer_u0(domain: &ExteriorDomain, x: &Point, m: usize) -> Result<f64> {
    if m < 64 {
        return Err(Error::InsufficientResolution(format!(
            "single-layer quadrature needs m >= 64 nodes, got {m}"
        )));
    }
    let nodes = domain.boundary_trace_offset(m, QUAD_OFFSET)?;
    let tiny = 1e-12 * (1.0 + domain.obstacle_diameter());
    let mut perimeter = 0.0;
    let mut acc = 0.0;
    for node in &nodes {
        let r = node.point.dist(x);
        if r < tiny {
            return Err(Error::InvalidPoint(format!(
                "evaluation point ({}, {}) coincides with a quadrature node",
                x.x(),
                x.y()
            )));
        }
        perimeter += node.weight;
        acc += node.weight * r.ln();
    }
    Ok(acc / (2.0 * std::f64::consts::PI * perimeter))
}

/// Double-layer kernel `ν(y)·(y−x) / (2π |y−x|²)` for `x` off the node.
fn double_layer_kernel(x: &Point, node: &BoundaryNode) -> f64 {
    let dx = node.point.x() - x.x();
    let dy = node.point.y() - x.y();
    let rr = dx * dx + dy * dy;
    (node.normal.x() * dx + node.normal.y() * dy) / (2.0 * std::f64::consts::PI * rr)
}

/// Bounded harmonic function on the exterior domain, represented as a
/// double-layer potential plus its value at infinity.
#[derive(Debug, Clone)]
pub struct ExteriorHarmonic {
    nodes: Vec<BoundaryNode>,
    density: Vec<f64>,
    value_at_infinity: f64,
}

impl ExteriorHarmonic {
    /// Evaluate at `x` in the open exterior. Accuracy degrades within about
    /// one node spacing of the boundary (plain Nystrom near-evaluation).
    pub fn eval(&self, x: &Point) -> f64 {
        let mut acc = self.value_at_infinity;
        for (node, psi) in self.nodes.iter().zip(&self.density) {
            acc += node.weight * double_layer_kernel(x, node) * psi;
        }
        acc
    }

    /// Limit value at infinity (the rank-one completion constant).
    pub fn value_at_infinity(&self) -> f64 {
        self.value_at_infinity
    }
}

/// Solve the exterior Dirichlet problem with continuous boundary data `g`,
/// returning the bounded harmonic extension. Nystrom discretization at `m`
/// collocation nodes.
pub fn solve_exterior_dirichlet<F: Fn(&Point) -> f64>(
    domain: &ExteriorDomain,
    g: F,
    m: usize,
) -> Result<ExteriorHarmonic> {
    let nodes = domain.boundary_trace(m)?;
    let data: Vec<f64> = nodes.iter().map(|n| g(&n.point)).collect();
    solve_with_node_values(nodes, &data)
}

/// Nystrom system: exterior trace of the double layer is `PV − ψ/2`, the
/// diagonal takes the curvature limit `κ/(4π)`, and the zero-mean density
/// constraint pairs with the added constant to pin the solution class.
fn solve_with_node_values(nodes: Vec<BoundaryNode>, data: &[f64]) -> Result<ExteriorHarmonic> {
    let m = nodes.len();
    assert_eq!(data.len(), m);
    let n = m + 1;
    // column-major (m+1) x (m+1)
    let mut a = vec![0.0f64; n * n];
    for (j, node_j) in nodes.iter().enumerate() {
        for (i, node_i) in nodes.iter().enumerate() {
            let kernel = if i == j {
                -0.5 + node_j.weight * node_j.curvature / (4.0 * std::f64::consts::PI)
            } else {
                node_j.weight * double_layer_kernel(&node_i.point, node_j)
            };
            a[j * n + i] = kernel;
        }
        // zero-mean density constraint
        a[j * n + m] = node_j.weight;
    }
    for i in 0..m {
        // constant completing the bounded solution class
        a[m * n + i] = 1.0;
    }

    let mut rhs: Vec<f64> = data.to_vec();
    rhs.push(0.0);
    solve_dense(&mut a, &mut rhs)?;

    let value_at_infinity = rhs[m];
    rhs.truncate(m);
    Ok(ExteriorHarmonic { nodes, density: rhs, value_at_infinity })
}

/// LU solve with a reciprocal-condition estimate; refuses nearly singular
/// systems instead of returning garbage.
fn solve_dense(a: &mut [f64], rhs: &mut [f64]) -> Result<()> {
    let n = rhs.len();
    assert_eq!(a.len(), n * n);
    let anorm = (0..n)
        .map(|j| a[j * n..(j + 1) * n].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);

    let nn = n as c_int;
    let mut ipiv = vec![0 as c_int; n];
    let mut info: c_int = 0;
    unsafe {
        lapack_sys::dgetrf_(&nn, &nn, a.as_mut_ptr(), &nn, ipiv.as_mut_ptr(), &mut info);
    }
    if info != 0 {
        return Err(Error::SolverFailure(format!(
            "LU factorization of the boundary system failed (info = {info})"
        )));
    }

    let mut rcond = 0.0f64;
    let mut work = vec![0.0f64; 4 * n];
    let mut iwork = vec![0 as c_int; n];
    let norm_one = b'1' as c_char;
    unsafe {
        lapack_sys::dgecon_(
            &norm_one,
            &nn,
            a.as_ptr(),
            &nn,
            &anorm,
            &mut rcond,
            work.as_mut_ptr(),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::SolverFailure(format!(
            "condition estimate failed (info = {info})"
        )));
    }
    if rcond < RCOND_FLOOR {
        return Err(Error::SolverFailure(format!(
            "boundary system nearly singular: reciprocal condition {rcond:.3e}"
        )));
    }

    let one: c_int = 1;
    let trans = b'N' as c_char;
    unsafe {
        lapack_sys::dgetrs_(
            &trans,
            &nn,
            &one,
            a.as_ptr(),
            &nn,
            ipiv.as_ptr(),
            rhs.as_mut_ptr(),
            &nn,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::SolverFailure(format!(
            "back substitution failed (info = {info})"
        )));
    }
    Ok(())
}

/// Far-field log slope of `u0 - u1`, fitted by least squares (with
/// intercept) against `ln|x|` over circles of the given radii, eight angles
/// per circle. The construction assumes the orientation in which the
/// difference grows like `+c0·ln|x|`; a non-positive fitted slope is refused.
pub fn estimate_c0(
    domain: &ExteriorDomain,
    extension: &ExteriorHarmonic,
    m: usize,
    radii: &[f64],
) -> Result<f64> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange(
            "far-field fit needs at least two strictly increasing radii".into(),
        ));
    }
    let min_far = 50.0 * domain.obstacle_diameter();
    let &max_radius = radii.last().expect("nonempty radii");
    if max_radius < min_far {
        return Err(Error::OutOfRange(format!(
            "largest fit radius {max_radius} is below the far-field threshold {min_far}"
        )));
    }

    let mut samples = Vec::with_capacity(radii.len() * 8);
    for &r in radii {
        for k in 0..8 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
            let x = Point::new2(r * th.cos(), r * th.sin());
            let diff = single_layer_u0(domain, &x, m)? - extension.eval(&x);
            samples.push((r.ln(), diff));
        }
    }
    let slope = fit_log_slope(&samples)?;
    Ok(slope)
}

/// Least-squares slope of `d` against `ln r`; errors if not positive.
fn fit_log_slope(samples: &[(f64, f64)]) -> Result<f64> {
    let n = samples.len() as f64;
    let sx: f64 = samples.iter().map(|s| s.0).sum();
    let sy: f64 = samples.iter().map(|s| s.1).sum();
    let sxx: f64 = samples.iter().map(|s| s.0 * s.0).sum();
    let sxy: f64 = samples.iter().map(|s| s.0 * s.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::SolverFailure("degenerate far-field fit abscissae".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    if !(slope > 0.0) {
        return Err(Error::SolverFailure(format!(
            "far-field slope {slope:.3e} not positive; the weight construction \
             assumes the orientation with growing difference"
        )));
    }
    Ok(slope)
}

/// Harmonic weight: 1 on the obstacle, `1 + (u0 - u1)/c0` on the exterior.
/// Grows like `log(e + ρ(x))` up to constants.
#[derive(Debug, Clone)]
pub struct HarmonicWeight {
    domain: ExteriorDomain,
    quad_size: usize,
    extension: ExteriorHarmonic,
    c0: f64,
}

impl HarmonicWeight {
    /// Build the weight for `domain` with `m` boundary nodes. The far-field
    /// slope is fitted on circles of radius {64, 128, 256} obstacle
    /// diameters.
    pub fn build(domain: &ExteriorDomain, m: usize) -> Result<Self> {
        let nodes = domain.boundary_trace(m)?;
        let perimeter: f64 = nodes.iter().map(|n| n.weight).sum();
        // On-curve values need the staggered rule's log-moment error removed:
        // the midpoint sum of ln(2 sin(τ/2)) over a period is exactly
        // (2π/m)·ln 2 while the integral vanishes, so the boundary data is
        // biased by weight·ln2/(2π·perimeter) at each node. Off-curve
        // evaluation has no singularity and needs no correction.
        let correction = 2.0f64.ln() / (2.0 * std::f64::consts::PI * perimeter);
        let data = nodes
            .iter()
            .map(|node| {
                single_layer_u0(domain, &node.point, m)
                    .map(|u0| u0 - node.weight * correction)
            })
            .collect::<Result<Vec<f64>>>()?;
        let extension = solve_with_node_values(nodes, &data)?;
        let diam = domain.obstacle_diameter();
        let radii = [64.0 * diam, 128.0 * diam, 256.0 * diam];
        let c0 = estimate_c0(domain, &extension, m, &radii)?;
        Ok(Self { domain: domain.clone(), quad_size: m, extension, c0 })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn domain(&self) -> &ExteriorDomain {
        &self.domain
    }

    /// `u0(x) − u1(x)`; vanishes on the boundary, grows like `c0·ln|x|`.
    pub fn difference(&self, x: &Point) -> Result<f64> {
        Ok(single_layer_u0(&self.domain, x, self.quad_size)? - self.extension.eval(x))
    }

    /// The weight itself. Exactly 1 on the obstacle and its boundary.
    pub fn eval(&self, x: &Point) -> Result<f64> {
        if self.domain.rho(x) == 0.0 {
            return Ok(1.0);
        }
        Ok(1.0 + self.difference(x)? / self.c0)
    }
}
