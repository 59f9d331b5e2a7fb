use std::fmt;
use std::sync::Arc;

use levy_marcus::LevyMeasure;
use psdo_calculus::PsdoOperator;
use spectral_core::TorusField;

use crate::CompressibleError;

type ItoFn = Arc<dyn Fn(f64, &TorusField, &TorusField) -> TorusField + Send + Sync>;
type GrowthFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Itô coefficient z(t, ϱ, u) acting on the velocity.
#[derive(Clone, Default)]
pub enum ItoSpec {
    #[default]
    Zero,
    /// z = g·u
    Linear { g: f64 },
    /// User coefficient with its growth function K.
    Custom { z: ItoFn, growth: GrowthFn },
}

impl fmt::Debug for ItoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ItoSpec::Zero => write!(f, "Zero"),
            ItoSpec::Linear { g } => write!(f, "Linear {{ g: {g} }}"),
            ItoSpec::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl ItoSpec {
    pub fn eval(&self, t: f64, varrho: &TorusField, u: &TorusField) -> Option<TorusField> {
        match self {
            ItoSpec::Zero => None,
            ItoSpec::Linear { g } => Some(u.scale(*g)),
            ItoSpec::Custom { z, .. } => Some(z(t, varrho, u)),
        }
    }

    /// K(x) with ‖z(t, ϱ, u)‖ ≤ K(‖X‖)·(1 + ‖X‖).
    pub fn growth(&self, x: f64) -> f64 {
        match self {
            ItoSpec::Zero => 0.0,
            ItoSpec::Linear { g } => g.abs(),
            ItoSpec::Custom { growth, .. } => growth(x),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NoiseSpec {
    pub q1: Option<PsdoOperator>,
    pub q2: Option<PsdoOperator>,
    pub levy: Option<LevyMeasure>,
    pub z: ItoSpec,
}

impl NoiseSpec {
    pub fn is_zero(&self) -> bool {
        self.q1.is_none() && (self.q2.is_none() || self.levy.is_none()) && matches!(self.z, ItoSpec::Zero)
    }
}

#[derive(Clone, Debug)]
pub struct SchemeConfig {
    /// Mollification level n.
    pub n: usize,
    /// Cut-off radius R.
    pub radius: f64,
    pub dt: f64,
    pub t_final: f64,
    pub noise: NoiseSpec,
    pub seed: u64,
    /// Steps between recorded samples.
    pub sample_every: usize,
}

impl SchemeConfig {
    pub fn deterministic(n: usize, radius: f64, dt: f64, t_final: f64) -> Self {
        SchemeConfig {
            n,
            radius,
            dt,
            t_final,
            noise: NoiseSpec::default(),
            seed: 0,
            sample_every: 1,
        }
    }

    pub fn validate(&self) -> Result<(), CompressibleError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(CompressibleError::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final >= 0.0) {
            return Err(CompressibleError::Config(format!("T = {} must be non-negative", self.t_final)));
        }
        if !(self.radius >= 1.0) {
            return Err(CompressibleError::Config(format!("cut-off radius {} must be at least 1", self.radius)));
        }
        if self.n == 0 {
            return Err(CompressibleError::Config("mollification level must be at least 1".into()));
        }
        if self.sample_every == 0 {
            return Err(CompressibleError::Config("sample cadence must be at least 1".into()));
        }
        if let Some(m) = &self.noise.levy {
            m.validate().map_err(CompressibleError::Config)?;
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub(crate) fn q1n(&self) -> Option<PsdoOperator> {
        self.noise.q1.as_ref().map(|q| q.renormalize(self.n))
    }

    pub(crate) fn q2n(&self) -> Option<PsdoOperator> {
        match (&self.noise.q2, &self.noise.levy) {
            (Some(q), Some(_)) => Some(q.renormalize(self.n)),
            _ => None,
        }
    }
}
