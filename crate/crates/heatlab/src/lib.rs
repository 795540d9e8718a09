//! Numerical laboratory for heat kernels on exterior planar domains.

// Anchors the BLAS/LAPACK backend so its link flags reach the final binary.
use openblas_src as _;

pub mod bridge;
pub mod closed_form;
pub mod envelope;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod layer;
pub mod parallel;
pub mod potentials;
pub mod scan;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
