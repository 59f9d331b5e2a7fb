use levy_marcus::{marcus_flow, sample_jumps, small_jump_correction, LevyMeasure};
use psdo_calculus::{sample_rng, PsdoOperator};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use spectral_core::{leray_project, mollify, TorusField};

use crate::drift::advection;
use crate::{DniSpec, IncompressibleError, IncompressibleState};

pub const BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct IncompressibleConfig {
    /// Mollification level of the nonlinearity and the noise amplitudes.
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Switch for Π(u·∇)u.
    pub nonlinear: bool,
    pub q1: Option<PsdoOperator>,
    pub q2: Option<PsdoOperator>,
    pub levy: Option<LevyMeasure>,
    pub seed: u64,
    pub sample_every: usize,
    /// Keep the velocity at every sample.
    pub keep_states: bool,
}

impl IncompressibleConfig {
    pub fn deterministic(n: usize, dt: f64, t_final: f64) -> Self {
        IncompressibleConfig {
            n,
            dt,
            t_final,
            nonlinear: true,
            q1: None,
            q2: None,
            levy: None,
            seed: 0,
            sample_every: 1,
            keep_states: false,
        }
    }

    pub fn validate(&self) -> Result<(), IncompressibleError> {
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) || self.n == 0 || self.sample_every == 0 {
            return Err(IncompressibleError::Config(
                "need dt > 0, T ≥ 0, n ≥ 1 and a positive sample cadence".into(),
            ));
        }
        if let Some(m) = &self.levy {
            m.validate().map_err(IncompressibleError::Config)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepIncrements {
    pub dt: f64,
    pub dw: f64,
    pub dw_tilde: f64,
    pub jumps: Vec<(f64, f64)>,
}

fn deterministic_rhs(u: &TorusField, gamma: f64, cfg: &IncompressibleConfig) -> TorusField {
    let mut out = if cfg.nonlinear {
        mollify(cfg.n, &advection(&mollify(cfg.n, u))).scale(-1.0)
    } else {
        TorusField::zeros(u.grid(), u.components())
    };
    if gamma != 0.0 {
        out.axpy(-gamma, u);
    }
    out
}

fn rk4(u: &TorusField, gamma: f64, cfg: &IncompressibleConfig, h: f64) -> TorusField {
    let f = |v: &TorusField| deterministic_rhs(v, gamma, cfg);
    let shifted = |k: &TorusField, c: f64| {
        let mut v = u.clone();
        v.axpy(c, k);
        v
    };
    let k1 = f(u);
    let k2 = f(&shifted(&k1, h / 2.0));
    let k3 = f(&shifted(&k2, h / 2.0));
    let k4 = f(&shifted(&k3, h));
    let mut out = u.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}

fn project(u: &TorusField) -> TorusField {
    leray_project(u).expect("velocity has d components")
}

/// Drift (projected), Stratonovich exponential, Itô forcing (projected), jumps (projected).
pub fn step(
    state: &IncompressibleState,
    spec: &DniSpec,
    cfg: &IncompressibleConfig,
    inc: &StepIncrements,
) -> Result<IncompressibleState, IncompressibleError> {
    let s = state.indices.s;
    let mut u = project(&rk4(&state.u, spec.gamma, cfg, inc.dt));
    if let Some(q) = &cfg.q1 {
        if inc.dw != 0.0 {
            u = marcus_flow(&q.renormalize(cfg.n), inc.dw, &u, 1.0, s)?.endpoint;
        }
    }
    if inc.dw_tilde != 0.0 {
        if let Some(h) = spec.h.eval(&u) {
            u.axpy(inc.dw_tilde, &h);
            u = project(&u);
        }
    }
    if let (Some(q), Some(m)) = (&cfg.q2, &cfg.levy) {
        let qn = q.renormalize(cfg.n);
        let had = !inc.jumps.is_empty();
        for &(_, l) in &inc.jumps {
            u = marcus_flow(&qn, l, &u, 1.0, s)?.endpoint;
        }
        let corr = small_jump_correction(&qn, m, &u)?;
        if corr.max_abs_coeff() > 0.0 {
            u.axpy(inc.dt, &corr);
        }
        if had && !qn.is_multiplier() {
            u = project(&u);
        }
    }
    if !u.is_finite() {
        return Err(IncompressibleError::State(format!(
            "non-finite velocity at t = {}",
            state.time + inc.dt
        )));
    }
    Ok(IncompressibleState {
        u,
        time: state.time + inc.dt,
        indices: state.indices,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncompressibleSample {
    pub time: f64,
    pub l2_norm: f64,
    pub hs_norm: f64,
    pub htheta_norm: f64,
    pub wpinf_norm: f64,
    /// V(‖u‖²_{H^σ}) for the spec's V.
    pub v_monitor: f64,
    /// V(‖u‖²_{W^{p,∞}}/M²).
    pub decay: f64,
    pub njumps: usize,
}

#[derive(Clone, Debug)]
pub struct IncompressibleTrajectory {
    pub samples: Vec<IncompressibleSample>,
    pub final_state: IncompressibleState,
    pub truncated: Option<String>,
    pub states: Vec<TorusField>,
}

fn sample(st: &IncompressibleState, spec: &DniSpec, njumps: usize) -> IncompressibleSample {
    let sig = spectral_core::sobolev_norm(spec.sigma, &st.u);
    IncompressibleSample {
        time: st.time,
        l2_norm: st.l2_norm(),
        hs_norm: st.hs_norm(),
        htheta_norm: st.htheta_norm(),
        wpinf_norm: st.wpinf_norm(),
        v_monitor: spec.v.v(sig * sig),
        decay: if spec.m_embed > 0.0 { spec.decay_integrand(&st.u) } else { 0.0 },
        njumps,
    }
}

/// One path with noise from stream `path` of the configured seed.
pub fn simulate(
    spec: &DniSpec,
    cfg: &IncompressibleConfig,
    u0: &IncompressibleState,
    path: u64,
) -> Result<IncompressibleTrajectory, IncompressibleError> {
    cfg.validate()?;
    let mut rng = sample_rng(cfg.seed, path);
    let mut st = u0.clone();
    let mut samples = vec![sample(&st, spec, 0)];
    let mut states = if cfg.keep_states { vec![st.u.clone()] } else { Vec::new() };
    let mut njumps = 0;
    let mut truncated = None;
    let mut k = 0;
    let noisy_w = cfg.q1.is_some();
    let noisy_h = !matches!(spec.h, crate::HSpec::Zero);
    while st.time < cfg.t_final - 1e-12 {
        let h = cfg.dt.min(cfg.t_final - st.time);
        let sd = h.sqrt();
        let mut inc = StepIncrements {
            dt: h,
            ..Default::default()
        };
        if noisy_w {
            inc.dw = sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        }
        if noisy_h {
            inc.dw_tilde = sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        }
        if let (Some(_), Some(m)) = (&cfg.q2, &cfg.levy) {
            inc.jumps = sample_jumps(m, &mut rng, st.time, st.time + h);
        }
        st = match step(&st, spec, cfg, &inc) {
            Ok(next) => next,
            Err(IncompressibleError::State(why)) => {
                truncated = Some(why);
                break;
            }
            Err(e) => return Err(e),
        };
        njumps += inc.jumps.len();
        k += 1;
        let w = st.wpinf_norm();
        let last = st.time >= cfg.t_final - 1e-12;
        if w > BLOWUP_THRESHOLD {
            samples.push(sample(&st, spec, njumps));
            truncated = Some(format!("W^{{p,inf}} norm {w:.3e} exceeded the blow-up proxy at t = {:.6}", st.time));
            break;
        }
        if k % cfg.sample_every == 0 || last {
            samples.push(sample(&st, spec, njumps));
            if cfg.keep_states {
                states.push(st.u.clone());
            }
        }
    }
    Ok(IncompressibleTrajectory {
        samples,
        final_state: st,
        truncated,
        states,
    })
}

/// Independent paths 0..paths, run in parallel.
pub fn ensemble(
    spec: &DniSpec,
    cfg: &IncompressibleConfig,
    u0: &IncompressibleState,
    paths: usize,
) -> Result<Vec<IncompressibleTrajectory>, IncompressibleError> {
    (0..paths as u64)
        .into_par_iter()
        .map(|p| simulate(spec, cfg, u0, p))
        .collect()
}
