//! Torus discretization and the function-space toolkit: Fourier
//! coefficients, Bessel potentials, Sobolev and Lipschitz norms,
//! Leray projection and Friedrichs mollifiers.

mod field;
mod grid;
mod ops;
mod snapshot;

pub use field::{product, TorusField};
pub use grid::{wavenumber, TorusGrid};
pub use num_complex::Complex64;
pub use ops::{
    bessel_potential, bump, cutoff, leray_project, mollifier_symbol, mollify, multi_indices,
    partial, smooth_step, sobolev_inner, sobolev_norm, wpinf_norm, zero_mean,
};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("dimension {0} outside 1..=3")]
    BadDimension(usize),
    #[error("resolution {0} must be even and at least 4")]
    BadResolution(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} components, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot format: {0}")]
    Format(String),
}

/// Regularity indices used by the dynamics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevIndex {
    pub s: f64,
    pub theta: f64,
    pub sigma: f64,
    pub p: usize,
}

impl SobolevIndex {
    /// Checks θ < s and σ > d/2 + p.
    pub fn validate(&self, d: usize) -> Result<(), String> {
        if self.theta >= self.s {
            return Err(format!("theta {} must be below s {}", self.theta, self.s));
        }
        if self.sigma <= d as f64 / 2.0 + self.p as f64 {
            return Err(format!("sigma {} must exceed d/2 + p", self.sigma));
        }
        Ok(())
    }

    /// s > d/2 + p + max(3ζ, 1).
    pub fn admits_dynamics(&self, d: usize, zeta: f64) -> bool {
        self.s > d as f64 / 2.0 + self.p as f64 + (3.0 * zeta).max(1.0)
    }
}
