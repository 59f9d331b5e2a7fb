use spectral_core::{sobolev_norm, TorusField};

use crate::law::PressureLaw;
use crate::transform::{acoustics, PressureTransform};
use crate::PressureError;

/// max over the grid of |P′(ρ) − (ρ r′(ρ))²| / max(1, P′(ρ)).
pub fn verify_structural_identity(law: &PressureLaw, tr: &PressureTransform, rho_grid: &[f64]) -> f64 {
    residual(law, rho_grid, |r| tr.r_prime(r))
}

/// Same residual with r′ always taken by central differences of r.
pub fn structural_residual_differenced(law: &PressureLaw, tr: &PressureTransform, rho_grid: &[f64]) -> f64 {
    residual(law, rho_grid, |r| tr.r_prime_differenced(r))
}

fn residual<F: Fn(f64) -> f64>(law: &PressureLaw, rho_grid: &[f64], rp: F) -> f64 {
    rho_grid
        .iter()
        .map(|&rho| {
            let p = law.pprime_reference(rho);
            (p - (rho * rp(rho)).powi(2)).abs() / p.max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Θ′ at ϱ = r(ρ), by differencing Θ and by the closed form ½ρP″/P′; errors
/// if the two disagree beyond 10⁻⁶ relative.
pub fn theta_prime_acoustics(law: &PressureLaw, tr: &PressureTransform, rho: f64) -> Result<f64, PressureError> {
    if !(rho > 0.0) {
        return Err(PressureError::InvalidParams(format!("density {rho} must be positive")));
    }
    let h = 1e-4;
    let (lo, hi) = (rho * (1.0 - h), rho * (1.0 + h));
    // Θ(r(ρ)) = √P′(ρ)
    let dtheta = law.pprime(hi).sqrt() - law.pprime(lo).sqrt();
    let dy = match &law.kind {
        crate::LawKind::Gamma { .. } | crate::LawKind::Chaplygin { .. } => tr.r(hi) - tr.r(lo),
        _ => tr.r_diff(lo, hi),
    };
    let numeric = dtheta / dy;
    let closed = acoustics(law, rho);
    if (numeric - closed).abs() > 1e-6 * closed.abs().max(1.0) {
        return Err(PressureError::AcousticsMismatch { numeric, closed });
    }
    Ok(closed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// min over grid points of the distance to (r₀, r∞); negative when violated.
    pub margin: f64,
}

/// r₀ < ϱ(x) < r∞ at every grid point.
pub fn admissibility_check(tr: &PressureTransform, varrho: &TorusField) -> Admissibility {
    let margin = varrho
        .to_real_component(0)
        .iter()
        .map(|&v| (v - tr.r0).min(tr.r_inf - v))
        .fold(f64::INFINITY, f64::min);
    Admissibility {
        admissible: margin > 0.0,
        margin,
    }
}

/// Λ(ϱ) evaluated pointwise on the grid.
pub fn compose_lambda(tr: &PressureTransform, varrho: &TorusField) -> TorusField {
    let vals: Vec<f64> = varrho.to_real_component(0).iter().map(|&v| tr.lambda(v)).collect();
    TorusField::from_real(varrho.grid(), &[vals])
}

/// ‖Λ(ϱ)‖_{H^s} / ‖ϱ‖_{H^s}, recorded as an empirical stand-in for Φ_Λ.
pub fn composition_ratio(tr: &PressureTransform, varrho: &TorusField, s: f64) -> f64 {
    sobolev_norm(s, &compose_lambda(tr, varrho)) / sobolev_norm(s, varrho)
}
