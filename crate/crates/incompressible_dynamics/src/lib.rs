//! Damped incompressible Euler with mixed noise on divergence-free fields,
//! the damping–noise Lyapunov functional and its hypothesis checkers.

mod dni;
mod drift;
mod gronwall;
mod monitor;
mod simulate;
mod state;

pub use dni::{check_dni, dni_functional, random_div_free, DniLevel, DniReport, DniSpec, HSpec, VKind};
pub use drift::{advection, embedding_constant, estimate_nl_constant, nl_ratio, projected_drift};
pub use gronwall::{generate_admissible, gronwall_verify, GronwallReport};
pub use monitor::{lyapunov_monitor, write_monitor_csv, MonitorReport, MonitorRow, MONITOR_HEADER};
pub use simulate::{
    ensemble, simulate, step, IncompressibleConfig, IncompressibleSample, IncompressibleTrajectory, StepIncrements,
    BLOWUP_THRESHOLD,
};
pub use state::IncompressibleState;

#[derive(Debug, thiserror::Error)]
pub enum IncompressibleError {
    #[error("invalid state: {0}")]
    State(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Psdo(#[from] psdo_calculus::PsdoError),
    #[error(transparent)]
    Spectral(#[from] spectral_core::SpectralError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
