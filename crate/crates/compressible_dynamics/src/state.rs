use std::sync::Arc;

use pressure_laws::{admissibility_check, Admissibility, PressureTransform};
use spectral_core::{mollify, sobolev_norm, wpinf_norm, SobolevIndex, TorusField};

use crate::CompressibleError;

/// Ξ = (r(ρ₀), u₀), the centre of the cut-off ball.
#[derive(Clone, Debug)]
pub struct Reference {
    pub varrho: TorusField,
    pub u: TorusField,
}

#[derive(Clone, Debug)]
pub struct CompressibleState {
    pub varrho: TorusField,
    pub u: TorusField,
    pub time: f64,
    pub transform: Arc<PressureTransform>,
    pub indices: SobolevIndex,
    pub reference: Arc<Reference>,
}

impl CompressibleState {
    /// State at t = 0 whose reference Ξ is the data itself.
    pub fn new(
        varrho: TorusField,
        u: TorusField,
        transform: Arc<PressureTransform>,
        indices: SobolevIndex,
    ) -> Result<Self, CompressibleError> {
        let d = varrho.grid().dim();
        if varrho.components() != 1 || u.components() != d || u.grid() != varrho.grid() {
            return Err(CompressibleError::Config(format!(
                "need a scalar density and a {d}-component velocity on one grid"
            )));
        }
        let reference = Arc::new(Reference {
            varrho: varrho.clone(),
            u: u.clone(),
        });
        Ok(CompressibleState {
            varrho,
            u,
            time: 0.0,
            transform,
            indices,
            reference,
        })
    }

    /// Builds ϱ = r(ρ) pointwise from a positive density.
    pub fn from_density(
        rho: &TorusField,
        u: TorusField,
        transform: Arc<PressureTransform>,
        indices: SobolevIndex,
    ) -> Result<Self, CompressibleError> {
        let vals = rho.to_real_component(0);
        if let Some(v) = vals.iter().find(|v| !(**v > 0.0)) {
            return Err(CompressibleError::Config(format!("density must be positive, found {v}")));
        }
        let r: Vec<f64> = vals.iter().map(|&v| transform.r(v)).collect();
        let varrho = TorusField::from_real(rho.grid(), &[r]);
        Self::new(varrho, u, transform, indices)
    }

    /// ρ = r⁻¹(ϱ) on the grid.
    pub fn density(&self) -> Result<Vec<f64>, CompressibleError> {
        self.varrho
            .to_real_component(0)
            .iter()
            .map(|&y| self.transform.r_inv(y).map_err(CompressibleError::from))
            .collect()
    }

    pub fn admissibility(&self) -> Admissibility {
        admissibility_check(&self.transform, &self.varrho)
    }

    /// ‖X‖_{H^s} = (‖ϱ‖² + ‖u‖²)^{1/2}.
    pub fn hs_norm(&self, s: f64) -> f64 {
        sobolev_norm(s, &self.varrho).hypot(sobolev_norm(s, &self.u))
    }

    pub fn wpinf_norm(&self) -> f64 {
        let p = self.indices.p;
        wpinf_norm(p, &self.varrho) + wpinf_norm(p, &self.u)
    }

    /// ‖(I − J_{N/4})X‖_{H^θ}, a proxy for unresolved regularity.
    pub fn tail_proxy(&self) -> f64 {
        let n = (self.varrho.grid().n() / 4).max(1);
        let th = self.indices.theta;
        let a = self.varrho.sub(&mollify(n, &self.varrho));
        let b = self.u.sub(&mollify(n, &self.u));
        sobolev_norm(th, &a).hypot(sobolev_norm(th, &b))
    }

    pub fn is_finite(&self) -> bool {
        self.varrho.is_finite() && self.u.is_finite()
    }
}
