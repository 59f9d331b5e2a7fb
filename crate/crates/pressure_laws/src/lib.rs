//! Pressure laws and their generalized Makino transforms: ϱ = r(ρ) with
//! P′ = (ρ r′)², the sound-speed function Θ and its extension Λ.

mod checks;
mod law;
mod quad;
mod transform;

pub use checks::{
    admissibility_check, composition_ratio, compose_lambda, structural_residual_differenced, theta_prime_acoustics,
    verify_structural_identity, Admissibility,
};
pub use law::{Hermite, LawKind, PiecewiseGamma, PressureLaw, Tabulated};
pub use quad::{integrate, Spline};
pub use transform::{acoustics, build_transform, PressureTransform, SoundMode};

#[derive(Debug, thiserror::Error)]
pub enum PressureError {
    #[error("invalid law parameters: {0}")]
    InvalidParams(String),
    #[error("law is not strictly increasing: {0}")]
    NotMonotone(String),
    #[error("unknown pressure law '{0}'")]
    UnknownLaw(String),
    #[error("pressure table: {0}")]
    Table(String),
    #[error("value {value} outside the admissible interval ({lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("inverse transform did not converge at {0}")]
    NoConvergence(f64),
    #[error("acoustics parameter mismatch: differenced {numeric}, closed form {closed}")]
    AcousticsMismatch { numeric: f64, closed: f64 },
}
