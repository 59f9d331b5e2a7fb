//! Config-driven simulation experiments.

use std::f64::consts::PI;
use std::sync::Arc;

use compressible_dynamics::{
    self_convergence, simulate as simulate_scheme, write_trajectory_csv, CompressibleState, ItoSpec, NoiseSpec,
    SchemeConfig, Trajectory,
};
use ergodic_lab::{
    accumulate, observe, stabilization_diagnostic, tightness_diagnostic, Observable, OccupationMeasure, Part,
    STABILIZATION_HEADER, TIGHTNESS_HEADER,
};
use incompressible_dynamics::{
    check_dni, embedding_constant, ensemble, estimate_nl_constant, lyapunov_monitor, random_div_free,
    write_monitor_csv, DniLevel, DniSpec, IncompressibleConfig, IncompressibleSample, IncompressibleTrajectory,
};
use pressure_laws::{PressureLaw, PressureTransform};
use psdo_calculus::{cancel_probe, sample_rng, PsdoOperator};
use rayon::prelude::*;
use spectral_core::{sobolev_norm, TorusField, TorusGrid};

use crate::config::{DniProfile, ExperimentConfig};
use crate::plotdata::{CONVERGENCE_HEADER, SAMPLES_HEADER};
use crate::report::{Check, Sink};
use crate::{criteria, setup, HarnessError};

fn module<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Module(e.to_string())
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Below this the measured cancellation constant is round-off of an exactly
/// skew operator and is used as zero.
const SKEW_FLOOR: f64 = 1e-10;
const PROBE_SAMPLES: usize = 20;

#[derive(Clone, Debug)]
pub struct Measured {
    pub c_nl: f64,
    pub m_embed: f64,
    pub a1: f64,
    pub a2: f64,
    pub a1_raw: f64,
    pub a2_raw: f64,
}

fn cancellation_constant(q: Option<&PsdoOperator>, g: &TorusGrid, sigma: f64, seed: u64) -> Result<f64, HarnessError> {
    match q {
        None => Ok(0.0),
        Some(q) => Ok(cancel_probe(q, g, g.dim(), sigma, PROBE_SAMPLES, seed).map_err(module)?.c2_hat),
    }
}

pub fn measure_constants(cfg: &ExperimentConfig, g: &TorusGrid) -> Result<Measured, HarnessError> {
    let sigma = cfg.indices.sigma;
    let nonlinear = cfg.dni.nonlinear && cfg.dni.profile != DniProfile::LinearAdditive;
    let c_nl = if nonlinear { estimate_nl_constant(g, sigma, cfg.dni.nl_samples, cfg.seed) } else { 0.0 };
    let m_embed = embedding_constant(g, sigma, cfg.indices.p, g.dim());
    let q1 = setup::operator(&cfg.q1)?;
    let q2 = setup::operator(&cfg.q2)?;
    let a1_raw = cancellation_constant(q1.as_ref(), g, sigma, cfg.seed)?;
    let a2_raw = cancellation_constant(q2.as_ref(), g, sigma, cfg.seed)?;
    let floor = |v: f64| if v < SKEW_FLOOR { 0.0 } else { v };
    Ok(Measured {
        c_nl,
        m_embed,
        a1: floor(a1_raw),
        a2: floor(a2_raw),
        a1_raw,
        a2_raw,
    })
}

fn write_constants(sink: &mut Sink, m: &Measured, spec: &DniSpec) -> Result<(), HarnessError> {
    let rows: Vec<Vec<String>> = [
        ("c_nl", m.c_nl),
        ("m_embed", m.m_embed),
        ("a1_measured", m.a1_raw),
        ("a2_measured", m.a2_raw),
        ("a1", spec.a1),
        ("a2", spec.a2),
        ("gamma", spec.gamma),
        ("g1", spec.g1),
        ("g2", spec.g2),
        ("g3", spec.g3),
    ]
    .iter()
    .map(|(k, v)| vec![k.to_string(), num(*v)])
    .collect();
    sink.rows("constants.csv", &["name", "value"], &rows)
}

pub fn incompressible_config(cfg: &ExperimentConfig, keep_states: bool) -> Result<IncompressibleConfig, HarnessError> {
    let q2 = setup::operator(&cfg.q2)?;
    Ok(IncompressibleConfig {
        n: cfg.grid.n,
        dt: cfg.dt,
        t_final: cfg.t_final,
        nonlinear: cfg.dni.nonlinear && cfg.dni.profile != DniProfile::LinearAdditive,
        q1: setup::operator(&cfg.q1)?,
        levy: q2.as_ref().and_then(|_| setup::levy(&cfg.levy)),
        q2,
        seed: cfg.seed,
        sample_every: cfg.sample_every,
        keep_states,
    })
}

fn sample_rows(samples: &[IncompressibleSample]) -> Vec<Vec<String>> {
    samples
        .iter()
        .map(|s| {
            vec![
                num(s.time),
                num(s.l2_norm),
                num(s.hs_norm),
                num(s.htheta_norm),
                num(s.wpinf_norm),
                num(s.v_monitor),
                num(s.decay),
                s.njumps.to_string(),
            ]
        })
        .collect()
}

fn truncation_check(trajs: &[Option<String>]) -> Check {
    let bad: Vec<usize> = trajs.iter().enumerate().filter(|(_, t)| t.is_some()).map(|(i, _)| i).collect();
    let detail = match bad.first() {
        None => format!("{} paths", trajs.len()),
        Some(&p) => format!("{} truncated; path {p}: {}", bad.len(), trajs[p].as_deref().unwrap_or("")),
    };
    Check::new("paths reach the final time", bad.is_empty(), detail)
}

/// L²-energy conservation allowance: relative drift per unit time.
pub const ENERGY_TOL: f64 = 1e-6;
const DIV_TOL: f64 = 1e-10;

pub fn simulate_incompressible(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<Check>, HarnessError> {
    let g = setup::grid(cfg)?;
    let u0 = setup::incompressible_initial(cfg)?;
    let m = measure_constants(cfg, &g)?;
    let spec = setup::dni_spec(cfg, &g, m.c_nl, m.m_embed, m.a1, m.a2);
    let icfg = incompressible_config(cfg, false)?;
    let trajs = ensemble(&spec, &icfg, &u0, cfg.paths).map_err(module)?;
    for (p, tr) in trajs.iter().enumerate() {
        sink.rows(&format!("samples_{p}.csv"), &SAMPLES_HEADER, &sample_rows(&tr.samples))?;
    }
    write_constants(sink, &m, &spec)?;
    let mut checks = vec![truncation_check(&trajs.iter().map(|t| t.truncated.clone()).collect::<Vec<_>>())];
    let div = trajs
        .iter()
        .map(|t| {
            let u = &t.final_state.u;
            sobolev_norm(0.0, &u.divergence()) / sobolev_norm(1.0, u).max(1e-300)
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("final velocity divergence-free", div < DIV_TOL, format!("max relative divergence {div:.3e}")));
    if cfg.incompressible.conserve_energy {
        let mut worst: f64 = 0.0;
        for tr in &trajs {
            let e0 = tr.samples[0].l2_norm;
            for s in &tr.samples {
                worst = worst.max(((s.l2_norm - e0) / e0).abs() / s.time.max(1.0));
            }
        }
        checks.push(Check::new(
            "L2 energy conserved",
            worst < ENERGY_TOL,
            format!("max relative drift per unit time {worst:.3e} over {} paths", trajs.len()),
        ));
    }
    Ok(checks)
}

/// Random divergence-free fields with H^σ norms spread over 1e-2..1e2.
pub fn random_class(g: &TorusGrid, sigma: f64, n: usize, seed: u64) -> Vec<TorusField> {
    (0..n)
        .map(|i| {
            let mut rng = sample_rng(seed, 1_000_000 + i as u64);
            let norm = 10f64.powf(-2.0 + 4.0 * i as f64 / (n - 1) as f64);
            random_div_free(g, sigma, norm, &mut rng)
        })
        .collect()
}

const CLASS_SIZE: usize = 40;
pub const D3_VIOLATION_RATE: f64 = 0.05;

fn states_and_class(trajs: &[IncompressibleTrajectory], class: &[TorusField]) -> Vec<TorusField> {
    let mut v: Vec<TorusField> = trajs.iter().flat_map(|t| t.states.iter().cloned()).collect();
    v.extend_from_slice(class);
    v
}

pub fn dni_check(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<Check>, HarnessError> {
    let g = setup::grid(cfg)?;
    let u0 = setup::incompressible_initial(cfg)?;
    let m = measure_constants(cfg, &g)?;
    let mut spec = setup::dni_spec(cfg, &g, m.c_nl, m.m_embed, m.a1, m.a2);
    let icfg = incompressible_config(cfg, true)?;
    let trajs = ensemble(&spec, &icfg, &u0, cfg.paths).map_err(module)?;
    let fields = states_and_class(&trajs, &random_class(&g, cfg.indices.sigma, CLASS_SIZE, cfg.seed));
    let mut checks = vec![truncation_check(&trajs.iter().map(|t| t.truncated.clone()).collect::<Vec<_>>())];

    let d1 = check_dni(DniLevel::D1, &spec, &fields);
    spec.g1 = d1.g1;
    spec.g2 = d1.g2;
    let log_damped = cfg.dni.profile == DniProfile::LogDamped;
    if log_damped {
        let d2 = check_dni(DniLevel::D2, &spec, &fields);
        checks.push(Check::new(
            "D2 inequality on states and random class",
            d2.holds,
            format!("{}; worst margin {:.3e}", d2.note, d2.worst_margin),
        ));
        let d3 = check_dni(DniLevel::D3, &spec, &fields);
        checks.push(Check::new(
            "D3 inequality on states and random class",
            d3.holds,
            format!("{}; fitted G3 {:.3e}", d3.note, d3.g3),
        ));
        spec.g3 = d3.g3;
    }
    let rep = lyapunov_monitor(&trajs, &spec, cfg.seed);
    sink.with_path("monitor.csv", |p| write_monitor_csv(p, &rep).map_err(module))?;
    sink.rows("samples_0.csv", &SAMPLES_HEADER, &sample_rows(&trajs[0].samples))?;
    write_constants(sink, &m, &spec)?;
    if log_damped {
        checks.push(Check::new(
            "D2 monitor non-increasing",
            rep.d2_holds,
            format!("{} paths, {} samples", trajs.len(), rep.rows.len()),
        ));
        checks.push(Check::new(
            "D3 cumulative decay bound",
            rep.d3_violation_rate <= D3_VIOLATION_RATE,
            format!("bootstrap violation rate {:.3}", rep.d3_violation_rate),
        ));
    } else {
        let worst = rep
            .rows
            .iter()
            .map(|r| (r.mean_v - 1.6448536269514722 * r.se_v) / r.bound_d1)
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "D1 moment bound (95% one-sided)",
            rep.d1_holds,
            format!("G1 {:.3e}, G2 {:.3e}; max lower-CI/bound {worst:.3}", spec.g1, spec.g2),
        ));
    }
    checks.extend(criteria::gronwall(sink, cfg.seed)?);
    Ok(checks)
}

fn mode_observable(d: usize) -> Observable {
    let mut wave = vec![0i64; d];
    wave[d - 1] = 1;
    Observable::Mode {
        component: 0,
        wave,
        part: Part::Im,
    }
}

/// Stationary variance of the forced mode under linear damping Υ and
/// additive forcing g·sin(x_d)e₁: the coefficient has amplitude g(2π)^d/2.
pub fn stationary_variance(d: usize, g: f64, gamma: f64) -> f64 {
    let c = g * (2.0 * PI).powi(d as i32) / 2.0;
    c * c / (2.0 * gamma)
}

pub const VARIANCE_TOL: f64 = 0.05;

fn histogram_rows(mu: &OccupationMeasure, j: usize) -> Vec<Vec<String>> {
    let h = &mu.histograms[j];
    (0..h.mass.len())
        .map(|b| {
            let (l, r) = h.edges(b);
            vec![num(l), num(r), num(h.mass[b])]
        })
        .collect()
}

pub fn ergodic(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<Check>, HarnessError> {
    let g = setup::grid(cfg)?;
    let d = g.dim();
    let u0 = setup::incompressible_initial(cfg)?;
    let m = measure_constants(cfg, &g)?;
    let spec = setup::dni_spec(cfg, &g, m.c_nl, m.m_embed, m.a1, m.a2);
    let icfg = incompressible_config(cfg, false)?;
    let observables = vec![mode_observable(d), Observable::L2Norm, Observable::HthetaNorm, Observable::HsNorm];
    let traces = observe(&spec, &icfg, &u0, cfg.paths, &observables).map_err(module)?;
    let mut horizons: Vec<f64> = cfg.ergodic.horizons.iter().copied().filter(|&h| h <= cfg.t_final + 1e-9).collect();
    if horizons.is_empty() {
        horizons.push(cfg.t_final);
    }
    let mus: Vec<OccupationMeasure> =
        horizons.iter().map(|&h| accumulate(&traces, h)).collect::<Result<_, _>>().map_err(module)?;
    let last = mus.last().expect("one horizon");
    for (j, name) in last.names.iter().enumerate() {
        sink.rows(&format!("histograms/{name}.csv"), &ergodic_lab::HISTOGRAM_HEADER, &histogram_rows(last, j))?;
    }
    write_constants(sink, &m, &spec)?;
    let mut checks = vec![Check::new(
        "paths kept in the occupation measure",
        last.dropped_paths == 0,
        format!("{} kept, {} dropped", last.paths, last.dropped_paths),
    )];

    let mut stab = Vec::new();
    let mut htheta = Vec::new();
    for w in mus.windows(2) {
        let rows = stabilization_diagnostic(&w[0], &w[1]).map_err(module)?;
        for r in &rows {
            if r.observable == "htheta_norm" {
                htheta.push(r.distance);
            }
            stab.push(vec![r.observable.clone(), num(r.t1), num(r.t2), num(r.distance)]);
        }
    }
    sink.rows("stabilization.csv", &STABILIZATION_HEADER, &stab)?;
    if cfg.ergodic.stabilization_check {
        let pass = htheta.len() >= 2 && htheta.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::new(
            "H^theta stabilization distances strictly decrease",
            pass,
            format!(
                "distances {} over horizons {:?}",
                htheta.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", "),
                horizons
            ),
        ));
    }

    let tails = tightness_diagnostic(last, "hs_norm", &cfg.ergodic.r_grid, spec.v).map_err(module)?;
    let rows: Vec<Vec<String>> =
        tails.iter().map(|r| vec![num(r.r), num(r.tail), num(r.envelope), num(r.mean_v)]).collect();
    sink.rows("tightness.csv", &TIGHTNESS_HEADER, &rows)?;
    let worst = tails
        .iter()
        .filter(|r| r.envelope > 0.0)
        .map(|r| r.tail / r.envelope)
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "tightness tail within 2x Chebyshev envelope",
        tails.iter().all(|r| r.tail <= 2.0 * r.envelope),
        format!("max tail/envelope {worst:.3} over {} radii", tails.len()),
    ));

    if cfg.ergodic.stationary_check {
        if cfg.dni.profile != DniProfile::LinearAdditive {
            return Err(HarnessError::Config("stationary_check needs the linear-additive profile".into()));
        }
        let j = last.index(&mode_observable(d).name()).map_err(module)?;
        let exact = stationary_variance(d, cfg.dni.g, cfg.dni.gamma);
        let var = last.variance(j);
        let rel = var / exact - 1.0;
        checks.push(Check::new(
            "forced-mode occupation variance matches stationary law",
            rel.abs() < VARIANCE_TOL,
            format!("variance {var:.4e} vs exact {exact:.4e} (rel {rel:+.4})"),
        ));
        let mean = last.mean(j);
        checks.push(Check::new(
            "forced-mode occupation mean near zero",
            mean.abs() < 0.1 * exact.sqrt(),
            format!("mean {mean:.3e}, stationary sd {:.3e}", exact.sqrt()),
        ));
    }
    Ok(checks)
}

pub fn transform(cfg: &ExperimentConfig) -> Result<PressureTransform, HarnessError> {
    let law = PressureLaw::from_name(&cfg.law.name, &cfg.law.params).map_err(|e| HarnessError::Config(e.to_string()))?;
    PressureTransform::build(law).map_err(module)
}

pub fn compressible_initial(cfg: &ExperimentConfig) -> Result<CompressibleState, HarnessError> {
    let g = setup::grid(cfg)?;
    let c = &cfg.compressible;
    let rho = TorusField::from_fn(&g, 1, |x, _| c.density_mean + c.density_amp * x[0].sin());
    let u = TorusField::from_fn(&g, g.dim(), |x, k| if k == 0 { c.velocity_amp * x[0].cos() } else { 0.0 });
    CompressibleState::from_density(&rho, u, Arc::new(transform(cfg)?), setup::indices(cfg))
        .map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn scheme_config(cfg: &ExperimentConfig) -> Result<SchemeConfig, HarnessError> {
    let c = &cfg.compressible;
    let q2 = setup::operator(&cfg.q2)?;
    let sc = SchemeConfig {
        n: if c.mollify == 0 { cfg.grid.n } else { c.mollify },
        radius: c.radius,
        dt: cfg.dt,
        t_final: cfg.t_final,
        noise: NoiseSpec {
            q1: setup::operator(&cfg.q1)?,
            levy: q2.as_ref().and_then(|_| setup::levy(&cfg.levy)),
            q2,
            z: if c.ito_g == 0.0 { ItoSpec::Zero } else { ItoSpec::Linear { g: c.ito_g } },
        },
        seed: cfg.seed,
        sample_every: cfg.sample_every,
    };
    sc.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(sc)
}

pub const CONVERGENCE_ORDER: f64 = 0.5;

/// Runs the configured paths; returns the checks and the trajectories.
pub fn simulate_compressible(
    cfg: &ExperimentConfig,
    sink: &mut Sink,
) -> Result<(Vec<Check>, Vec<Trajectory>), HarnessError> {
    let st = compressible_initial(cfg)?;
    let sc = scheme_config(cfg)?;
    let trajs: Vec<Trajectory> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|p| simulate_scheme(&sc, &st, p))
        .collect::<Result<_, _>>()
        .map_err(module)?;
    for (p, tr) in trajs.iter().enumerate() {
        sink.with_path(&format!("trajectory_{p}.csv"), |path| write_trajectory_csv(path, tr).map_err(module))?;
    }
    let mut checks = vec![truncation_check(&trajs.iter().map(|t| t.truncated.clone()).collect::<Vec<_>>())];
    let margin = trajs
        .iter()
        .flat_map(|t| t.samples.iter().map(|s| s.admiss_margin))
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        "state stays admissible",
        margin > 0.0,
        format!("smallest admissibility margin {margin:.3e}"),
    ));
    if cfg.compressible.convergence_levels > 0 {
        let rep = self_convergence(&sc, &st, cfg.paths, cfg.compressible.convergence_levels).map_err(module)?;
        let rows: Vec<Vec<String>> = rep.dts.iter().zip(&rep.errors).map(|(h, e)| vec![num(*h), num(*e)]).collect();
        sink.rows("convergence.csv", &CONVERGENCE_HEADER, &rows)?;
        checks.push(Check::new(
            "strong self-convergence order",
            rep.order >= CONVERGENCE_ORDER,
            format!("order {:.3} over dt {:?}", rep.order, rep.dts),
        ));
    }
    Ok((checks, trajs))
}
