//! Time-averaged occupation measures of incompressible runs and the
//! stabilization and tightness diagnostics built on them.

mod diagnostics;
mod occupation;

pub use diagnostics::{
    cdf_distance, stabilization_diagnostic, tightness_diagnostic, write_stabilization_csv, write_tightness_csv,
    StabilizationRow, TailRow, STABILIZATION_HEADER, TIGHTNESS_HEADER,
};
pub use occupation::{
    accumulate, field_digest, observe, write_histograms_csv, Histogram, Observable, OccupationMeasure, Part,
    PathTrace, BINS, HISTOGRAM_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum ErgodicError {
    #[error("inconsistent ensemble: {0}")]
    Inconsistent(String),
    #[error("no usable samples: {0}")]
    Empty(String),
    #[error("unknown observable {0}")]
    UnknownObservable(String),
    #[error(transparent)]
    Simulation(#[from] incompressible_dynamics::IncompressibleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
