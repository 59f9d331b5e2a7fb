use levy_marcus::generator;
use pressure_laws::PressureTransform;
use psdo_calculus::PsdoOperator;
use spectral_core::{cutoff, mollify, wpinf_norm, TorusField};

use crate::state::{CompressibleState, Reference};
use crate::{CompressibleError, SchemeConfig};

/// F(X) for the transformed system, products formed on the grid and dealiased.
pub fn drift_fields(tr: &PressureTransform, varrho: &TorusField, u: &TorusField) -> (TorusField, TorusField) {
    let grid = varrho.grid();
    let d = grid.dim();
    let len = grid.len();
    let rho = varrho.to_real_component(0);
    let lam: Vec<f64> = rho.iter().map(|&y| tr.lambda(y)).collect();
    let grad = varrho.gradient().to_real();
    let uv = u.to_real();
    let div = u.divergence().to_real_component(0);

    let mut f1 = vec![0.0; len];
    for i in 0..len {
        let mut adv = 0.0;
        for k in 0..d {
            adv += uv[k][i] * grad[k][i];
        }
        f1[i] = lam[i] * div[i] + adv;
    }
    let mut f2 = vec![vec![0.0; len]; d];
    for j in 0..d {
        let uj = u.component(j);
        for k in 0..d {
            let duj = uj.derivative(k).to_real_component(0);
            for i in 0..len {
                f2[j][i] += uv[k][i] * duj[i];
            }
        }
        for i in 0..len {
            f2[j][i] += lam[i] * grad[j][i];
        }
    }
    (
        TorusField::from_real(grid, &[f1]).dealiased(),
        TorusField::from_real(grid, &f2).dealiased(),
    )
}

pub fn drift_f(state: &CompressibleState) -> (TorusField, TorusField) {
    drift_fields(&state.transform, &state.varrho, &state.u)
}

/// ‖X − Ξ‖_{W^{p,∞}}.
pub fn distance_to_reference(reference: &Reference, p: usize, varrho: &TorusField, u: &TorusField) -> f64 {
    wpinf_norm(p, &varrho.sub(&reference.varrho)) + wpinf_norm(p, &u.sub(&reference.u))
}

pub(crate) fn chi(radius: f64, dist: f64) -> f64 {
    if radius.is_infinite() {
        1.0
    } else {
        cutoff(radius, dist)
    }
}

/// χ_R(‖X − Ξ‖_{W^{p,∞}}) at the current state.
pub fn cutoff_factor(state: &CompressibleState, cfg: &SchemeConfig) -> f64 {
    let dist = distance_to_reference(&state.reference, state.indices.p, &state.varrho, &state.u);
    chi(cfg.radius, dist)
}

/// −χ_R·J_nF(J_nX) together with the χ_R value used.
pub fn cutoff_drift(
    tr: &PressureTransform,
    reference: &Reference,
    p: usize,
    cfg: &SchemeConfig,
    varrho: &TorusField,
    u: &TorusField,
) -> (TorusField, TorusField, f64) {
    let c = chi(cfg.radius, distance_to_reference(reference, p, varrho, u));
    if c == 0.0 {
        return (
            TorusField::zeros(varrho.grid(), 1),
            TorusField::zeros(u.grid(), u.components()),
            0.0,
        );
    }
    let (f1, f2) = drift_fields(tr, &mollify(cfg.n, varrho), &mollify(cfg.n, u));
    (mollify(cfg.n, &f1).scale(-c), mollify(cfg.n, &f2).scale(-c), c)
}

/// ½𝒬²_{1,n}u, zero without a Stratonovich amplitude.
pub fn ito_correction(q1n: Option<&PsdoOperator>, u: &TorusField) -> Result<TorusField, CompressibleError> {
    match q1n {
        None => Ok(TorusField::zeros(u.grid(), u.components())),
        Some(q) => Ok(generator(q, &generator(q, u)?)?.scale(0.5)),
    }
}

/// G_{n,R}(X) = −χ_R J_nF(J_nX) + ½𝐐²_{1,n}X, the Itô-form drift of the scheme.
pub fn mollified_cutoff_drift(
    state: &CompressibleState,
    cfg: &SchemeConfig,
) -> Result<(TorusField, TorusField), CompressibleError> {
    let (g1, mut g2, _) = cutoff_drift(
        &state.transform,
        &state.reference,
        state.indices.p,
        cfg,
        &state.varrho,
        &state.u,
    );
    g2.axpy(1.0, &ito_correction(cfg.q1n().as_ref(), &state.u)?);
    Ok((g1, g2))
}
