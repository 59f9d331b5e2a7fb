use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::Path;

use incompressible_dynamics::{simulate, DniSpec, IncompressibleConfig, IncompressibleState};
use rayon::prelude::*;
use spectral_core::{sobolev_norm, SobolevIndex, TorusField};

use crate::ErgodicError;

pub const BINS: usize = 256;
pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_left", "bin_right", "mass"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Scalar functionals of the velocity field.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// One Fourier coefficient of one component.
    Mode { component: usize, wave: Vec<i64>, part: Part },
    L2Norm,
    HthetaNorm,
    HsNorm,
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::Mode { component, wave, part } => {
                let k: Vec<String> = wave.iter().map(|k| k.to_string()).collect();
                let p = if *part == Part::Re { "re" } else { "im" };
                format!("mode_{component}_{}_{p}", k.join("_"))
            }
            Observable::L2Norm => "l2_norm".into(),
            Observable::HthetaNorm => "htheta_norm".into(),
            Observable::HsNorm => "hs_norm".into(),
        }
    }

    pub fn eval(&self, u: &TorusField, idx: &SobolevIndex) -> f64 {
        match self {
            Observable::Mode { component, wave, part } => {
                let c = u.coeffs(*component)[u.grid().index_of(wave)];
                if *part == Part::Re {
                    c.re
                } else {
                    c.im
                }
            }
            Observable::L2Norm => sobolev_norm(0.0, u),
            Observable::HthetaNorm => sobolev_norm(idx.theta, u),
            Observable::HsNorm => sobolev_norm(idx.s, u),
        }
    }
}

/// Stable within one build; used only to match initial conditions.
pub fn field_digest(u: &TorusField) -> u64 {
    let mut h = DefaultHasher::new();
    u.grid().dim().hash(&mut h);
    u.grid().n().hash(&mut h);
    for c in 0..u.components() {
        for z in u.coeffs(c) {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Observable values along one path at its sample times.
#[derive(Clone, Debug)]
pub struct PathTrace {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `values[j][i]` is observable j at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub x0_digest: u64,
    pub truncated: Option<String>,
}

/// Runs `paths` trajectories and keeps only observable values, one path per
/// worker at a time.
pub fn observe(
    spec: &DniSpec,
    cfg: &IncompressibleConfig,
    u0: &IncompressibleState,
    paths: usize,
    observables: &[Observable],
) -> Result<Vec<PathTrace>, ErgodicError> {
    if observables.is_empty() {
        return Err(ErgodicError::Empty("no observables".into()));
    }
    let mut cfg = cfg.clone();
    cfg.keep_states = true;
    let digest = field_digest(&u0.u);
    let names: Vec<String> = observables.iter().map(Observable::name).collect();
    (0..paths as u64)
        .into_par_iter()
        .map(|p| {
            let tr = simulate(spec, &cfg, u0, p)?;
            let n = tr.states.len();
            let times = tr.samples.iter().take(n).map(|s| s.time).collect();
            let values = observables
                .iter()
                .map(|o| tr.states.iter().map(|u| o.eval(u, &u0.indices)).collect())
                .collect();
            Ok(PathTrace {
                names: names.clone(),
                times,
                values,
                x0_digest: digest,
                truncated: tr.truncated,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub mass: Vec<f64>,
}

impl Histogram {
    /// Normalized counts on `bins` equal bins over [lo, hi]; values outside
    /// are clamped to the end bins. A degenerate range puts everything in bin 0.
    pub fn build(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0usize; bins];
        let width = hi - lo;
        for &v in values {
            let b = if width > 0.0 {
                (((v - lo) / width * bins as f64).floor().max(0.0) as usize).min(bins - 1)
            } else {
                0
            };
            counts[b] += 1;
        }
        let n = values.len().max(1) as f64;
        let mass = counts.into_iter().map(|c| c as f64 / n).collect();
        Histogram { lo, hi, mass }
    }

    pub fn edges(&self, b: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.mass.len() as f64;
        (self.lo + b as f64 * w, self.lo + (b + 1) as f64 * w)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.mass
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect()
    }
}

/// Empirical time-averaged law of each observable over (0, T], pooled over paths.
#[derive(Clone, Debug)]
pub struct OccupationMeasure {
    pub names: Vec<String>,
    /// Sorted pooled samples per observable.
    pub samples: Vec<Vec<f64>>,
    pub histograms: Vec<Histogram>,
    pub horizon: f64,
    pub x0_digest: u64,
    pub paths: usize,
    pub dropped_paths: usize,
}

/// Pools samples with 0 < t ≤ horizon. Truncated paths are dropped and counted.
pub fn accumulate(traces: &[PathTrace], horizon: f64) -> Result<OccupationMeasure, ErgodicError> {
    let first = traces.first().ok_or_else(|| ErgodicError::Empty("no paths".into()))?;
    let tol = 1e-9 * horizon.max(1.0);
    for t in traces {
        if t.names != first.names {
            return Err(ErgodicError::Inconsistent("observable lists differ".into()));
        }
        if t.x0_digest != first.x0_digest {
            return Err(ErgodicError::Inconsistent("initial conditions differ".into()));
        }
    }
    let kept: Vec<&PathTrace> = traces.iter().filter(|t| t.truncated.is_none()).collect();
    let reference = kept.first().ok_or_else(|| ErgodicError::Empty("every path was truncated".into()))?;
    let window: Vec<usize> = (0..reference.times.len())
        .filter(|&i| reference.times[i] > tol && reference.times[i] <= horizon + tol)
        .collect();
    if window.is_empty() {
        return Err(ErgodicError::Empty(format!("no sample times in (0, {horizon}]")));
    }
    for t in &kept {
        if t.times.len() != reference.times.len()
            || t.times.iter().zip(&reference.times).any(|(a, b)| (a - b).abs() > tol)
        {
            return Err(ErgodicError::Inconsistent("sample times differ between paths".into()));
        }
    }
    let samples: Vec<Vec<f64>> = (0..first.names.len())
        .into_par_iter()
        .map(|j| {
            let mut v: Vec<f64> = kept.iter().flat_map(|t| window.iter().map(move |&i| t.values[j][i])).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let histograms = samples
        .iter()
        .map(|v| Histogram::build(v, v[0], v[v.len() - 1], BINS))
        .collect();
    Ok(OccupationMeasure {
        names: first.names.clone(),
        samples,
        histograms,
        horizon,
        x0_digest: first.x0_digest,
        paths: kept.len(),
        dropped_paths: traces.len() - kept.len(),
    })
}

impl OccupationMeasure {
    pub fn index(&self, name: &str) -> Result<usize, ErgodicError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ErgodicError::UnknownObservable(name.into()))
    }

    pub fn count(&self) -> usize {
        self.samples[0].len()
    }

    pub fn mean(&self, j: usize) -> f64 {
        self.samples[j].iter().sum::<f64>() / self.count() as f64
    }

    pub fn variance(&self, j: usize) -> f64 {
        let m = self.mean(j);
        self.samples[j].iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.count() as f64
    }

    /// Fraction of samples strictly above `x`.
    pub fn tail(&self, j: usize, x: f64) -> f64 {
        let s = &self.samples[j];
        let below = s.partition_point(|&v| v <= x);
        (s.len() - below) as f64 / s.len() as f64
    }
}

/// One file `<name>.csv` per observable in `dir`.
pub fn write_histograms_csv(dir: &Path, mu: &OccupationMeasure) -> Result<(), ErgodicError> {
    std::fs::create_dir_all(dir)?;
    for (name, h) in mu.names.iter().zip(&mu.histograms) {
        let mut w = csv::Writer::from_path(dir.join(format!("{name}.csv")))?;
        w.write_record(HISTOGRAM_HEADER)?;
        for (b, m) in h.mass.iter().enumerate() {
            let (l, r) = h.edges(b);
            w.write_record([l.to_string(), r.to_string(), m.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}
