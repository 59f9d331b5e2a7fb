use std::sync::Arc;

use incompressible_dynamics::{DniSpec, HSpec, IncompressibleState};
use levy_marcus::LevyMeasure;
use psdo_calculus::{build_bessel_transport, build_fractional_riesz, PsdoOperator, TransportCoeffs};
use spectral_core::{SobolevIndex, TorusField, TorusGrid};

use crate::config::{DniProfile, ExperimentConfig, InitialProfile, LevySpec, OperatorSpec};
use crate::HarnessError;

pub fn grid(cfg: &ExperimentConfig) -> Result<TorusGrid, HarnessError> {
    TorusGrid::new(cfg.grid.d, cfg.grid.n).map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn indices(cfg: &ExperimentConfig) -> SobolevIndex {
    SobolevIndex {
        s: cfg.indices.s,
        theta: cfg.indices.theta,
        sigma: cfg.indices.sigma,
        p: cfg.indices.p,
    }
}

pub fn operator(spec: &OperatorSpec) -> Result<Option<PsdoOperator>, HarnessError> {
    let q = match spec {
        OperatorSpec::Zero => return Ok(None),
        OperatorSpec::Transport { coeffs, alpha } => {
            build_bessel_transport(TransportCoeffs::Constant(coeffs.clone()), *alpha)
        }
        OperatorSpec::Riesz { c, varsigma } => build_fractional_riesz(c.clone(), *varsigma),
        OperatorSpec::Bessel { s } => Ok(PsdoOperator::bessel(*s)),
    };
    q.map(Some).map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn levy(spec: &LevySpec) -> Option<LevyMeasure> {
    match *spec {
        LevySpec::None => None,
        LevySpec::TwoPoint { l0, rate } => Some(LevyMeasure::TwoPoint { l0, rate }),
        LevySpec::Stable { a, c, eps } => Some(LevyMeasure::TruncatedStable { a, c, eps }),
    }
}

/// Forcing direction (sin x_d, 0, …) for the additive profile.
pub fn forcing_field(g: &TorusGrid) -> TorusField {
    let d = g.dim();
    TorusField::from_fn(g, d, move |x, c| if c == 0 { x[d - 1].sin() } else { 0.0 })
}

pub fn incompressible_initial(cfg: &ExperimentConfig) -> Result<IncompressibleState, HarnessError> {
    let g = grid(cfg)?;
    let d = g.dim();
    if d < 2 {
        return Err(HarnessError::Config("incompressible runs need d >= 2".into()));
    }
    let amp = cfg.incompressible.amplitude;
    let u = match cfg.incompressible.initial {
        InitialProfile::Zero => TorusField::zeros(&g, d),
        InitialProfile::TaylorGreen => TorusField::from_fn(&g, d, |x, c| match c {
            0 => amp * x[0].sin() * x[1].cos(),
            1 => -amp * x[0].cos() * x[1].sin(),
            _ => 0.0,
        }),
        // u = (∂₂ψ, −∂₁ψ), ψ = cos x₁ + ½ sin(x₁ + 2x₂) + 0.3 cos(2x₁ − x₂)
        InitialProfile::Smooth => TorusField::from_fn(&g, d, |x, c| {
            let (a, b) = (x[0], x[1]);
            amp * match c {
                0 => (a + 2.0 * b).cos() + 0.3 * (2.0 * a - b).sin(),
                1 => a.sin() - 0.5 * (a + 2.0 * b).cos() + 0.6 * (2.0 * a - b).sin(),
                _ => 0.0,
            }
        }),
    };
    IncompressibleState::new(u, indices(cfg)).map_err(|e| HarnessError::Config(e.to_string()))
}

/// Lyapunov spec for the configured profile with measured constants.
pub fn dni_spec(cfg: &ExperimentConfig, g: &TorusGrid, c_nl: f64, m: f64, a1: f64, a2: f64) -> DniSpec {
    let (sigma, p) = (cfg.indices.sigma, cfg.indices.p);
    let dni = &cfg.dni;
    let mut spec = match dni.profile {
        DniProfile::LogDamped => DniSpec::log_damped(c_nl, m, a1, dni.a_target, dni.excess, sigma, p),
        DniProfile::Identity => {
            let mut s = DniSpec::identity(c_nl, m, sigma, p);
            s.gamma = dni.gamma;
            s.a1 = a1;
            s.h = if dni.g == 0.0 { HSpec::Zero } else { HSpec::Linear { g: dni.g } };
            s
        }
        DniProfile::LinearAdditive => {
            let mut s = DniSpec::identity(c_nl, m, sigma, p);
            s.gamma = dni.gamma;
            s.a1 = a1;
            let phi = forcing_field(g).scale(dni.g);
            s.h = HSpec::Custom(Arc::new(move |_| phi.clone()));
            s
        }
    };
    spec.a2 = a2;
    spec
}
