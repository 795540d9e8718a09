//! Special functions needed by the closed-form kernels and quadratures:
//! Bessel J0/J1, the first zero of J0, the exponential integral E1, and a
//! C^2 smoothstep.
//!
//! J0/J1 use the ascending power series for |z| <= 12 and the Hankel
//! asymptotic expansion beyond. The switch point is chosen so both branches
//! meet the 1e-10 accuracy target: the power series loses ~3e-12 to
//! cancellation at z = 12, while the optimally truncated Hankel series is
//! only good to ~6e-9 at z = 8 but reaches ~1e-11 from z = 12 on.

/// Switch point between the power series and the asymptotic expansion.
const BESSEL_SERIES_MAX: f64 = 12.0;

/// First positive zero of J0, refined by `j0_first_zero` at test time.
pub const J0_FIRST_ZERO: f64 = 2.404825557695773;

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(z: f64) -> f64 {
    bessel_j(0, z.abs())
}

/// Bessel function of the first kind, order 1. Odd in z.
pub fn bessel_j1(z: f64) -> f64 {
    let v = bessel_j(1, z.abs());
    if z < 0.0 {
        -v
    } else {
        v
    }
}

fn bessel_j(order: u32, z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z <= BESSEL_SERIES_MAX {
        bessel_series(order, z)
    } else {
        bessel_asymptotic(order, z)
    }
}

/// Ascending series J_nu(z) = (z/2)^nu Σ_k (-1)^k (z^2/4)^k / (k! (k+nu)!).
fn bessel_series(order: u32, z: f64) -> f64 {
    let q = 0.25 * z * z;
    // term_0 = (z/2)^nu / nu!
    let mut term = match order {
        0 => 1.0,
        1 => 0.5 * z,
        _ => unreachable!("only orders 0 and 1 are provided"),
    };
    let mut sum = term;
    let nu = order as f64;
    for k in 1..200 {
        let k = k as f64;
        term *= -q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-3) {
            break;
        }
    }
    sum
}

/// Hankel expansion J_nu(z) ~ sqrt(2/(pi z)) [P cos w - Q sin w],
/// w = z - nu pi/2 - pi/4, with P, Q the even/odd asymptotic sums in 1/z.
fn bessel_asymptotic(order: u32, z: f64) -> f64 {
    let mu = 4.0 * (order as f64) * (order as f64);
    // a_{k+1} = a_k (mu - (2k+1)^2) / (8 (k+1)); terms a_k / z^k.
    let mut a = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..40 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf + 1.0) * (2.0 * kf + 1.0)) / (8.0 * (kf + 1.0));
        let term = a / z.powi(k as i32 + 1);
        if term.abs() > prev {
            break; // past optimal truncation
        }
        prev = term.abs();
        // term index m = k+1 carries sign (-1)^{floor(m/2)}
        let signed = if ((k + 1) / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            q += signed;
        } else {
            p += signed;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let w = z - (order as f64) * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * w.cos() - q * w.sin())
}

/// First positive zero of J0 by Newton iteration (J0' = -J1) from 2.4.
pub fn j0_first_zero() -> f64 {
    let mut x = 2.4_f64;
    for _ in 0..60 {
        let f = bessel_j0(x);
        let df = -bessel_j1(x);
        let step = f / df;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

/// Exponential integral E1(x) = ∫_x^∞ e^{-t}/t dt for x > 0.
///
/// Series for x <= 1, modified Lentz continued fraction beyond; both
/// branches are good to ~1e-13 relative.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires x > 0");
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        // E1 = -gamma - ln x + Σ_{k>=1} (-1)^{k+1} x^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            let k = k as f64;
            term *= -x / k;
            let contrib = -term / k;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // E1(x) = e^{-x} * K(x), K the continued fraction
        // 1/(x+1- 1^2/(x+3- 2^2/(x+5- ...))) evaluated by modified Lentz.
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let i = i as f64;
            let a = -i * i;
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        (-x).exp() * h
    }
}

/// Quintic smoothstep: 0 for u <= 0, 1 for u >= 1, C^2 across both ends.
pub fn smoothstep_quintic(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}
