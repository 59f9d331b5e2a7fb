use levy_marcus::{marcus_flow, sample_jumps, small_jump_correction, LevyMeasure};
use psdo_calculus::PsdoOperator;
use rand::Rng;
use rand_distr::StandardNormal;
use spectral_core::TorusField;

use crate::drift::{chi, cutoff_drift, distance_to_reference};
use crate::{CompressibleError, CompressibleState, SchemeConfig};

/// Noise increments over one step [t, t + dt).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Increments {
    pub dt: f64,
    pub dw: f64,
    pub dw_tilde: f64,
    /// (time, size), time ordered.
    pub jumps: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    /// χ_R at the start of the step.
    pub chi: f64,
    pub njumps: usize,
}

pub fn sample_increments<R: Rng + ?Sized>(cfg: &SchemeConfig, rng: &mut R, t0: f64, dt: f64) -> Increments {
    let sd = dt.sqrt();
    let dw: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
    let dw_tilde: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
    let jumps = match &cfg.noise.levy {
        Some(m) => sample_jumps(m, rng, t0, t0 + dt),
        None => Vec::new(),
    };
    Increments {
        dt,
        dw,
        dw_tilde,
        jumps,
    }
}

/// Merges consecutive pairs, giving the increments of the doubled step.
pub fn coarsen(fine: &[Increments]) -> Vec<Increments> {
    fine.chunks(2)
        .map(|c| {
            let mut out = c[0].clone();
            for x in &c[1..] {
                out.dt += x.dt;
                out.dw += x.dw;
                out.dw_tilde += x.dw_tilde;
                out.jumps.extend_from_slice(&x.jumps);
            }
            out
        })
        .collect()
}

/// Applies ℘ₙ(1, l, ·) for every jump and the small-jump drift over dt.
pub fn apply_jumps(
    q2n: &PsdoOperator,
    measure: &LevyMeasure,
    u: &TorusField,
    jumps: &[(f64, f64)],
    dt: f64,
    s: f64,
) -> Result<TorusField, CompressibleError> {
    let mut v = u.clone();
    for &(_, l) in jumps {
        v = marcus_flow(q2n, l, &v, 1.0, s)?.endpoint;
    }
    let corr = small_jump_correction(q2n, measure, &v)?;
    v.axpy(dt, &corr);
    Ok(v)
}

fn rk4_drift(state: &CompressibleState, cfg: &SchemeConfig, h: f64) -> (TorusField, TorusField, f64) {
    let tr = &state.transform;
    let xi = &state.reference;
    let p = state.indices.p;
    let f = |a: &TorusField, b: &TorusField| cutoff_drift(tr, xi, p, cfg, a, b);
    let stage = |a: &TorusField, k: &TorusField, c: f64| {
        let mut v = a.clone();
        v.axpy(c, k);
        v
    };
    let (r0, u0) = (&state.varrho, &state.u);
    let (k1r, k1u, c0) = f(r0, u0);
    let (k2r, k2u, _) = f(&stage(r0, &k1r, h / 2.0), &stage(u0, &k1u, h / 2.0));
    let (k3r, k3u, _) = f(&stage(r0, &k2r, h / 2.0), &stage(u0, &k2u, h / 2.0));
    let (k4r, k4u, _) = f(&stage(r0, &k3r, h), &stage(u0, &k3u, h));
    let mut r = r0.clone();
    let mut u = u0.clone();
    for (w, kr, ku) in [(1.0, &k1r, &k1u), (2.0, &k2r, &k2u), (2.0, &k3r, &k3u), (1.0, &k4r, &k4u)] {
        r.axpy(h * w / 6.0, kr);
        u.axpy(h * w / 6.0, ku);
    }
    (r, u, c0)
}

/// One Lie-split step: drift, Stratonovich exponential, Itô forcing, jumps.
pub fn step(
    state: &CompressibleState,
    cfg: &SchemeConfig,
    inc: &Increments,
) -> Result<(CompressibleState, StepInfo), CompressibleError> {
    let s = state.indices.s;
    let h = inc.dt;
    let (varrho, mut u, chi0) = rk4_drift(state, cfg, h);

    if let Some(q) = cfg.q1n() {
        if inc.dw != 0.0 {
            u = marcus_flow(&q, inc.dw, &u, 1.0, s)?.endpoint;
        }
    }

    if inc.dw_tilde != 0.0 {
        if let Some(z) = cfg.noise.z.eval(state.time, &varrho, &u) {
            let c = chi(
                cfg.radius,
                distance_to_reference(&state.reference, state.indices.p, &varrho, &u),
            );
            u.axpy(c * inc.dw_tilde, &z);
        }
    }

    let mut njumps = 0;
    if let (Some(q), Some(m)) = (cfg.q2n(), cfg.noise.levy.as_ref()) {
        u = apply_jumps(&q, m, &u, &inc.jumps, h, s)?;
        njumps = inc.jumps.len();
    }

    let next = CompressibleState {
        varrho,
        u,
        time: state.time + h,
        transform: state.transform.clone(),
        indices: state.indices,
        reference: state.reference.clone(),
    };
    if !next.is_finite() {
        return Err(CompressibleError::NonFinite {
            time: next.time,
            step: (next.time / cfg.dt).round() as usize,
            what: "state has NaN or infinite coefficients".into(),
        });
    }
    Ok((next, StepInfo { chi: chi0, njumps }))
}
