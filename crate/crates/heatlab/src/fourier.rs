//! Fractional Laplacian on a periodic box via the Fourier multiplier `|ξ|^s`.
//!
//! Whole-plane reference operator for the Hardy and decay experiments. The box
//! is centred at the origin and the input is expected to be supported well
//! inside it, so periodic wrap-around is negligible for the functions we feed
//! in. Frequencies are the discrete lattice `ξ = 2πk/L`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Uniform M×M sampling of the square `[-L/2, L/2)²` with periodic topology.
#[derive(Debug, Clone)]
pub struct PeriodicGrid {
    box_size: f64,
    resolution: usize,
}

impl PeriodicGrid {
    /// A square box of side `box_size` sampled at `resolution` points per axis.
    /// `resolution` must be a power of two so the transform stays exact-radix.
    pub fn new(box_size: f64, resolution: usize) -> Result<Self> {
        if !(box_size > 0.0) || !box_size.is_finite() {
            return Err(Error::OutOfRange(format!(
                "box size must be positive and finite, got {box_size}"
            )));
        }
        if resolution < 4 || !resolution.is_power_of_two() {
            return Err(Error::OutOfRange(format!(
                "resolution must be a power of two at least 4, got {resolution}"
            )));
        }
        Ok(Self { box_size, resolution })
    }

    pub fn box_size(&self) -> f64 {
        self.box_size
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Grid spacing `L/M`.
    pub fn spacing(&self) -> f64 {
        self.box_size / self.resolution as f64
    }

    /// Node `(i, j)` in row-major order; coordinates lie in `[-L/2, L/2)`.
    pub fn node(&self, i: usize, j: usize) -> Point {
        let m = self.resolution as f64;
        let x = (i as f64 / m - 0.5) * self.box_size;
        let y = (j as f64 / m - 0.5) * self.box_size;
        Point::new2(x, y)
    }

    /// Row-major samples of `f` over all nodes.
    pub fn sample<F: Fn(&Point) -> f64>(&self, f: F) -> Vec<f64> {
        let m = self.resolution;
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(f(&self.node(i, j)));
            }
        }
        out
    }

    /// Discrete `L^p` norm with cell measure `(L/M)²`.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        assert_eq!(values.len(), self.resolution * self.resolution);
        assert!(p >= 1.0, "lp_norm needs p >= 1, got {p}");
        let cell = self.spacing() * self.spacing();
        let sum: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
        (sum * cell).powf(1.0 / p)
    }

    /// Signed frequency component for axis index `i`: `2πk/L` with `k` wrapped
    /// to `(-M/2, M/2]`.
    fn frequency(&self, i: usize) -> f64 {
        let m = self.resolution;
        let k = if i <= m / 2 { i as i64 } else { i as i64 - m as i64 };
        2.0 * std::f64::consts::PI * k as f64 / self.box_size
    }

    /// `(-Δ)^{s/2} f` by the multiplier `|ξ|^s` on the frequency lattice.
    ///
    /// `s = 0` is the identity (the zero mode keeps multiplier 1); for `s > 0`
    /// the zero mode is annihilated, so the output has vanishing mean.
    pub fn frac_laplacian(&self, values: &[f64], s: f64) -> Result<Vec<f64>> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::OutOfRange(format!(
                "fractional order must be finite and nonnegative, got {s}"
            )));
        }
        let m = self.resolution;
        if values.len() != m * m {
            return Err(Error::OutOfRange(format!(
                "expected {} samples, got {}",
                m * m,
                values.len()
            )));
        }

        let mut field: Vec<Complex64> =
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);

        transform_rows(&mut field, m, |row| forward.process(row));
        transpose(&mut field, m);
        transform_rows(&mut field, m, |row| forward.process(row));

        // after the transpose the layout is [j][i]: row index j carries the
        // second axis frequency, column index i the first
        for j in 0..m {
            let xi_j = self.frequency(j);
            for i in 0..m {
                let xi_i = self.frequency(i);
                let sq = xi_i * xi_i + xi_j * xi_j;
                let mult = if s == 0.0 { 1.0 } else { sq.powf(0.5 * s) };
                field[j * m + i] *= mult;
            }
        }

        transform_rows(&mut field, m, |row| inverse.process(row));
        transpose(&mut field, m);
        transform_rows(&mut field, m, |row| inverse.process(row));

        let scale = 1.0 / (m * m) as f64;
        Ok(field.into_iter().map(|z| z.re * scale).collect())
    }
}

fn transform_rows<F: FnMut(&mut [Complex64])>(field: &mut [Complex64], m: usize, mut op: F) {
    for row in field.chunks_exact_mut(m) {
        op(row);
    }
}

fn transpose(field: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            field.swap(i * m + j, j * m + i);
        }
    }
}
