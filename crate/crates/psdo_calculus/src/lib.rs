//! Noise-amplitude operators: frequency-only multipliers, x-dependent
//! Bessel transport, homogeneous Riesz-type operators, their mollified
//! renormalizations, cancellation probes and dense-matrix oracles.

mod dense;
mod operator;
mod probe;

pub use dense::{basis_for, cancel_exact, dense_matrix, dense_of, spectral_norm, DenseOperator, DENSE_CAP};
pub use operator::{
    build_bessel_transport, build_fractional_riesz, MatrixSymbol, OperatorKind, PsdoOperator,
    ScalarSymbol, Symbol, TransportCoeffs,
};
pub use probe::{cancel_probe, cancel_probe_family, cancellation_ratios, sample_rng, CancellationReport};

#[derive(Debug, thiserror::Error)]
pub enum PsdoError {
    #[error("invalid operator: {0}")]
    Invalid(String),
    #[error("homogeneous operator applied to a field with mean {0:e}")]
    NonzeroMean(f64),
    #[error("dense matrix of size {0} exceeds the cap")]
    TooLarge(usize),
    #[error(transparent)]
    Spectral(#[from] spectral_core::SpectralError),
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
