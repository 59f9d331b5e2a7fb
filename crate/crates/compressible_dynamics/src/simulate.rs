use std::fs;
use std::path::Path;

use psdo_calculus::sample_rng;
use rayon::prelude::*;

use crate::scheme::{sample_increments, step, Increments};
use crate::{CompressibleError, CompressibleState, SchemeConfig};

pub const BLOWUP_THRESHOLD: f64 = 1e6;
pub const TRAJECTORY_HEADER: [&str; 6] = ["time", "Hs_norm", "Wpinf_norm", "admiss_margin", "chi_active", "njumps"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub hs_norm: f64,
    pub wpinf_norm: f64,
    pub admiss_margin: f64,
    /// Fraction of steps since the previous sample with χ_R < 1.
    pub chi_active: f64,
    /// Jumps applied so far.
    pub njumps: usize,
    pub tail: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub final_state: CompressibleState,
    pub truncated: Option<String>,
    /// Jump times and sizes applied along the path.
    pub jumps: Vec<(f64, f64)>,
    /// sup_t ‖X(t)‖²_{H^s} over all steps.
    pub sup_hs_sq: f64,
}

fn sample(state: &CompressibleState, chi_active: f64, njumps: usize) -> TrajectorySample {
    TrajectorySample {
        time: state.time,
        hs_norm: state.hs_norm(state.indices.s),
        wpinf_norm: state.wpinf_norm(),
        admiss_margin: state.admissibility().margin,
        chi_active,
        njumps,
        tail: state.tail_proxy(),
    }
}

fn run<F>(cfg: &SchemeConfig, initial: &CompressibleState, mut next_inc: F) -> Result<Trajectory, CompressibleError>
where
    F: FnMut(usize, f64, f64) -> Option<Increments>,
{
    cfg.validate()?;
    let mut state = initial.clone();
    let mut samples = vec![sample(&state, 0.0, 0)];
    let mut sup = state.hs_norm(state.indices.s).powi(2);
    let mut jumps = Vec::new();
    let mut truncated = None;
    let (mut active, mut since) = (0usize, 0usize);
    let mut k = 0;
    while state.time < cfg.t_final - 1e-12 {
        let h = cfg.dt.min(cfg.t_final - state.time);
        let Some(inc) = next_inc(k, state.time, h) else {
            break;
        };
        match step(&state, cfg, &inc) {
            Ok((next, info)) => {
                state = next;
                if info.chi < 1.0 {
                    active += 1;
                }
                jumps.extend_from_slice(&inc.jumps);
            }
            Err(CompressibleError::NonFinite { time, what, .. }) => {
                truncated = Some(format!("non-finite state at t = {time:.6} (step {k}): {what}"));
                break;
            }
            Err(e) => return Err(e),
        }
        k += 1;
        since += 1;
        sup = sup.max(state.hs_norm(state.indices.s).powi(2));
        let w = state.wpinf_norm();
        let last = state.time >= cfg.t_final - 1e-12;
        if w > BLOWUP_THRESHOLD {
            samples.push(sample(&state, active as f64 / since as f64, jumps.len()));
            truncated = Some(format!("W^{{p,inf}} norm {w:.3e} exceeded the blow-up proxy at t = {:.6}", state.time));
            break;
        }
        if k % cfg.sample_every == 0 || last {
            samples.push(sample(&state, active as f64 / since as f64, jumps.len()));
            active = 0;
            since = 0;
        }
    }
    Ok(Trajectory {
        samples,
        final_state: state,
        truncated,
        jumps,
        sup_hs_sq: sup,
    })
}

/// Runs one path; its noise comes from stream `path` of the configured seed.
pub fn simulate(cfg: &SchemeConfig, initial: &CompressibleState, path: u64) -> Result<Trajectory, CompressibleError> {
    let mut rng = sample_rng(cfg.seed, path);
    let noisy = !cfg.noise.is_zero();
    run(cfg, initial, |_, t, h| {
        Some(if noisy {
            sample_increments(cfg, &mut rng, t, h)
        } else {
            Increments {
                dt: h,
                ..Default::default()
            }
        })
    })
}

/// Runs one path on prescribed increments; stops early if they run out.
pub fn simulate_with_increments(
    cfg: &SchemeConfig,
    initial: &CompressibleState,
    incs: &[Increments],
) -> Result<Trajectory, CompressibleError> {
    run(cfg, initial, |k, _, _| incs.get(k).cloned())
}

#[derive(Clone, Debug)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub values: Vec<f64>,
    pub truncated: usize,
}

/// Monte Carlo estimate of E[sup_t ‖X(t)‖²_{H^s}] over independent paths.
pub fn ensemble_sup_moment(
    cfg: &SchemeConfig,
    initial: &CompressibleState,
    paths: usize,
) -> Result<MomentEstimate, CompressibleError> {
    let runs: Vec<Trajectory> = (0..paths as u64)
        .into_par_iter()
        .map(|p| simulate(cfg, initial, p))
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = runs.iter().map(|t| t.sup_hs_sq).collect();
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(MomentEstimate {
        mean,
        std_err: (var / n).sqrt(),
        truncated: runs.iter().filter(|t| t.truncated.is_some()).count(),
        values,
    })
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CompressibleError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        w.write_record(TRAJECTORY_HEADER)?;
        for s in &traj.samples {
            w.write_record(&[
                format!("{:.10e}", s.time),
                format!("{:.10e}", s.hs_norm),
                format!("{:.10e}", s.wpinf_norm),
                format!("{:.10e}", s.admiss_margin),
                format!("{:.6}", s.chi_active),
                s.njumps.to_string(),
            ])?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// RMS over paths of ‖X_dt(T) − X_ref(T)‖_{L²}.
    pub errors: Vec<f64>,
    pub order: f64,
}

fn l2_distance(a: &CompressibleState, b: &CompressibleState) -> f64 {
    use spectral_core::sobolev_norm;
    sobolev_norm(0.0, &a.varrho.sub(&b.varrho)).hypot(sobolev_norm(0.0, &a.u.sub(&b.u)))
}

/// Strong self-convergence: `levels` step sizes cfg.dt, cfg.dt/2, … compared
/// with a run at half the smallest step on the same noise path.
pub fn self_convergence(
    cfg: &SchemeConfig,
    initial: &CompressibleState,
    paths: usize,
    levels: usize,
) -> Result<ConvergenceReport, CompressibleError> {
    cfg.validate()?;
    let fine_dt = cfg.dt / (1u64 << levels) as f64;
    let steps = (cfg.t_final / fine_dt).round() as usize;
    let per_path: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|p| -> Result<Vec<f64>, CompressibleError> {
            let mut rng = sample_rng(cfg.seed, p);
            let mut incs = Vec::with_capacity(steps);
            for k in 0..steps {
                incs.push(sample_increments(cfg, &mut rng, k as f64 * fine_dt, fine_dt));
            }
            let mut c = cfg.clone();
            c.dt = fine_dt;
            let reference = simulate_with_increments(&c, initial, &incs)?.final_state;
            let mut errs = Vec::with_capacity(levels);
            for _ in 0..levels {
                incs = crate::scheme::coarsen(&incs);
                c.dt *= 2.0;
                let end = simulate_with_increments(&c, initial, &incs)?.final_state;
                errs.push(l2_distance(&end, &reference).powi(2));
            }
            errs.reverse();
            Ok(errs)
        })
        .collect::<Result<_, _>>()?;
    let dts: Vec<f64> = (0..levels).map(|j| cfg.dt / (1u64 << j) as f64).collect();
    let errors: Vec<f64> = (0..levels)
        .map(|j| (per_path.iter().map(|e| e[j]).sum::<f64>() / paths as f64).sqrt())
        .collect();
    let order = psdo_calculus::loglog_slope(&dts, &errors);
    Ok(ConvergenceReport { dts, errors, order })
}
