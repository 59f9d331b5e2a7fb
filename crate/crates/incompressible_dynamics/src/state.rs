use spectral_core::{leray_project, sobolev_norm, wpinf_norm, SobolevIndex, TorusField};

use crate::IncompressibleError;

const DIV_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct IncompressibleState {
    pub u: TorusField,
    pub time: f64,
    pub indices: SobolevIndex,
}

/// ‖div u‖_{L²} relative to ‖u‖_{H¹}, and the largest |mean|.
pub fn divergence_defect(u: &TorusField) -> (f64, f64) {
    let div = sobolev_norm(0.0, &u.divergence());
    let scale = sobolev_norm(1.0, u).max(1e-300);
    let mean = u.mean().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (div / scale, mean)
}

impl IncompressibleState {
    pub fn new(u: TorusField, indices: SobolevIndex) -> Result<Self, IncompressibleError> {
        let d = u.grid().dim();
        if u.components() != d {
            return Err(IncompressibleError::State(format!(
                "velocity needs {d} components, got {}",
                u.components()
            )));
        }
        let (div, mean) = divergence_defect(&u);
        let scale = sobolev_norm(0.0, &u).max(1.0);
        if div > DIV_TOL || mean > DIV_TOL * scale {
            return Err(IncompressibleError::State(format!(
                "velocity must be divergence-free with zero mean (div {div:e}, mean {mean:e})"
            )));
        }
        Ok(IncompressibleState { u, time: 0.0, indices })
    }

    /// Projects an arbitrary field onto divergence-free, zero-mean fields first.
    pub fn projected(u: &TorusField, indices: SobolevIndex) -> Result<Self, IncompressibleError> {
        Self::new(leray_project(u)?, indices)
    }

    pub fn hs_norm(&self) -> f64 {
        sobolev_norm(self.indices.s, &self.u)
    }

    pub fn htheta_norm(&self) -> f64 {
        sobolev_norm(self.indices.theta, &self.u)
    }

    pub fn wpinf_norm(&self) -> f64 {
        wpinf_norm(self.indices.p, &self.u)
    }

    pub fn l2_norm(&self) -> f64 {
        sobolev_norm(0.0, &self.u)
    }
}
