//! Transformed compressible Euler system X = (ϱ, u) with mollified, cut-off
//! drift, mixed Stratonovich/Itô/Marcus noise on the velocity and the
//! transport maximum principle.

mod config;
mod drift;
mod maxprinciple;
mod scheme;
mod simulate;
mod state;

pub use config::{ItoSpec, NoiseSpec, SchemeConfig};
pub use drift::{
    cutoff_drift, cutoff_factor, distance_to_reference, drift_f, drift_fields, ito_correction, mollified_cutoff_drift};
pub use maxprinciple::{transport_max_principle, MaxPrincipleReport, MaxPrincipleSample};
pub use scheme::{apply_jumps, coarsen, sample_increments, step, Increments, StepInfo};
pub use simulate::{
    ensemble_sup_moment, self_convergence, simulate, simulate_with_increments, ConvergenceReport, write_trajectory_csv, MomentEstimate, Trajectory,
    TrajectorySample, BLOWUP_THRESHOLD, TRAJECTORY_HEADER,
};
pub use state::{CompressibleState, Reference};

#[derive(Debug, thiserror::Error)]
pub enum CompressibleError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Psdo(#[from] psdo_calculus::PsdoError),
    #[error(transparent)]
    Pressure(#[from] pressure_laws::PressureError),
    #[error("non-finite state at t = {time} (step {step}): {what}")]
    NonFinite { time: f64, step: usize, what: String },
    #[error("maximum principle violated at t = {time}, x = {point:?}: f = {value}, bound = {bound}")]
    Violation { time: f64, point: Vec<f64>, value: f64, bound: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
