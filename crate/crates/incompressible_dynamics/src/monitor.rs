use std::fs;
use std::path::Path;

use psdo_calculus::sample_rng;
use rand::Rng;

use crate::{DniSpec, IncompressibleError, IncompressibleTrajectory};

pub const MONITOR_HEADER: [&str; 7] = [
    "time",
    "mean_V",
    "bound_D1",
    "bound_D2",
    "cum_decay_lhs",
    "cum_decay_rhs",
    "n_paths",
];

/// One-sided 95% normal quantile.
const Z95: f64 = 1.6448536269514722;
const BOOTSTRAP: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorRow {
    pub time: f64,
    pub mean_v: f64,
    pub se_v: f64,
    pub bound_d1: f64,
    pub bound_d2: f64,
    pub cum_decay_lhs: f64,
    pub cum_decay_rhs: f64,
    pub n_paths: usize,
}

#[derive(Clone, Debug)]
pub struct MonitorReport {
    pub rows: Vec<MonitorRow>,
    /// Mean below the D1 envelope at every time (95% one-sided).
    pub d1_holds: bool,
    /// Mean below V(‖u₀‖²) and non-increasing between samples (95% one-sided, paired).
    pub d2_holds: bool,
    /// Fraction of bootstrap resamples whose cumulative decay integral exceeds the bound.
    pub d3_violation_rate: f64,
    pub truncated_paths: usize,
}

/// Compares ensemble statistics against the three Lyapunov bounds with the
/// spec's constants (𝒢₁, 𝒢₂, 𝒢₃) and V₀ = V(‖u₀‖²_{H^σ}).
pub fn lyapunov_monitor(trajs: &[IncompressibleTrajectory], spec: &DniSpec, seed: u64) -> MonitorReport {
    let (g1, g2, g3) = (spec.g1, spec.g2, spec.g3);
    let full: Vec<&IncompressibleTrajectory> = trajs.iter().filter(|t| t.truncated.is_none()).collect();
    let truncated = trajs.len() - full.len();
    let n = full.len();
    let len = full.iter().map(|t| t.samples.len()).min().unwrap_or(0);
    if n == 0 || len == 0 {
        return MonitorReport {
            rows: Vec::new(),
            d1_holds: false,
            d2_holds: false,
            d3_violation_rate: 1.0,
            truncated_paths: truncated,
        };
    }
    let v0 = full[0].samples[0].v_monitor;
    let times: Vec<f64> = full[0].samples[..len].iter().map(|s| s.time).collect();
    let vals = |i: usize| full.iter().map(move |t| t.samples[i].v_monitor);
    let decay: Vec<Vec<f64>> = full.iter().map(|t| t.samples[..len].iter().map(|s| s.decay).collect()).collect();
    let rhs = |t: f64| if g3 > 0.0 { v0 / g3 * (1.0 - (-g3 * t).exp()) } else { f64::INFINITY };

    // cumulative trapezoid of the decay integrand for a set of path indices
    let cumulative = |idx: &[usize]| -> Vec<f64> {
        let m = idx.len() as f64;
        let mean: Vec<f64> = (0..len).map(|i| idx.iter().map(|&p| decay[p][i]).sum::<f64>() / m).collect();
        let mut out = vec![0.0; len];
        for i in 1..len {
            out[i] = out[i - 1] + 0.5 * (times[i] - times[i - 1]) * (mean[i] + mean[i - 1]);
        }
        out
    };
    let all: Vec<usize> = (0..n).collect();
    let cum = cumulative(&all);

    let mut rows = Vec::with_capacity(len);
    let mut d1 = true;
    let mut d2 = true;
    let nf = n as f64;
    for i in 0..len {
        let mean = vals(i).sum::<f64>() / nf;
        let var = vals(i).map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
        let se = (var / nf).sqrt();
        let t = times[i];
        let b1 = (v0 + g2 * t) * (g1 * t).exp();
        if mean - Z95 * se > b1 * (1.0 + 1e-12) {
            d1 = false;
        }
        if mean - Z95 * se > v0 * (1.0 + 1e-12) {
            d2 = false;
        }
        if i > 0 {
            let diffs: Vec<f64> = full.iter().map(|tr| tr.samples[i].v_monitor - tr.samples[i - 1].v_monitor).collect();
            let md = diffs.iter().sum::<f64>() / nf;
            let vd = diffs.iter().map(|d| (d - md).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
            if md - Z95 * (vd / nf).sqrt() > 1e-12 * v0.abs().max(1e-300) {
                d2 = false;
            }
        }
        rows.push(MonitorRow {
            time: t,
            mean_v: mean,
            se_v: se,
            bound_d1: b1,
            bound_d2: v0,
            cum_decay_lhs: cum[i],
            cum_decay_rhs: rhs(t),
            n_paths: n,
        });
    }

    let mut rng = sample_rng(seed, u64::MAX);
    let mut violations = 0;
    let mut idx = vec![0usize; n];
    for _ in 0..BOOTSTRAP {
        for v in idx.iter_mut() {
            *v = rng.random_range(0..n);
        }
        let c = cumulative(&idx);
        if c.iter().zip(&times).any(|(l, &t)| *l > rhs(t)) {
            violations += 1;
        }
    }
    MonitorReport {
        rows,
        d1_holds: d1,
        d2_holds: d2,
        d3_violation_rate: violations as f64 / BOOTSTRAP as f64,
        truncated_paths: truncated,
    }
}

pub fn write_monitor_csv(path: &Path, report: &MonitorReport) -> Result<(), IncompressibleError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        w.write_record(MONITOR_HEADER)?;
        for r in &report.rows {
            w.write_record(&[
                format!("{:.10e}", r.time),
                format!("{:.10e}", r.mean_v),
                format!("{:.10e}", r.bound_d1),
                format!("{:.10e}", r.bound_d2),
                format!("{:.10e}", r.cum_decay_lhs),
                format!("{:.10e}", r.cum_decay_rhs),
                r.n_paths.to_string(),
            ])?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
