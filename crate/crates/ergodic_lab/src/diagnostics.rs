use std::path::Path;

use incompressible_dynamics::VKind;

use crate::{ErgodicError, Histogram, OccupationMeasure, BINS};

pub const STABILIZATION_HEADER: [&str; 4] = ["observable", "t1", "t2", "distance"];
pub const TIGHTNESS_HEADER: [&str; 4] = ["r", "tail", "envelope", "mean_v"];

/// Mean squared CDF difference over a shared grid spanning both samples.
/// Lies in [0, (bins − 1)/bins].
pub fn cdf_distance(a: &[f64], b: &[f64], bins: usize) -> f64 {
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return 0.0;
    }
    let fa = Histogram::build(a, lo, hi, bins).cdf();
    let fb = Histogram::build(b, lo, hi, bins).cdf();
    fa.iter().zip(&fb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / bins as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizationRow {
    pub observable: String,
    pub t1: f64,
    pub t2: f64,
    pub distance: f64,
}

pub fn stabilization_diagnostic(
    mu1: &OccupationMeasure,
    mu2: &OccupationMeasure,
) -> Result<Vec<StabilizationRow>, ErgodicError> {
    if mu1.names != mu2.names {
        return Err(ErgodicError::Inconsistent("observable lists differ".into()));
    }
    Ok(mu1
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| StabilizationRow {
            observable: name.clone(),
            t1: mu1.horizon,
            t2: mu2.horizon,
            distance: cdf_distance(&mu1.samples[j], &mu2.samples[j], BINS),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailRow {
    pub r: f64,
    /// Occupation mass of {x² > R} for the observable value x.
    pub tail: f64,
    /// mean V(x²) / V(R).
    pub envelope: f64,
    pub mean_v: f64,
}

/// Tail table of the squared norm observable `name` against the Chebyshev
/// envelope built from the occupation mean of V.
pub fn tightness_diagnostic(
    mu: &OccupationMeasure,
    name: &str,
    r_grid: &[f64],
    v: VKind,
) -> Result<Vec<TailRow>, ErgodicError> {
    let j = mu.index(name)?;
    let mean_v = mu.samples[j].iter().map(|x| v.v(x * x)).sum::<f64>() / mu.count() as f64;
    Ok(r_grid
        .iter()
        .map(|&r| {
            let vr = v.v(r);
            TailRow {
                r,
                tail: mu.tail(j, r.max(0.0).sqrt()),
                envelope: if vr > 0.0 { mean_v / vr } else { f64::INFINITY },
                mean_v,
            }
        })
        .collect())
}

pub fn write_stabilization_csv(path: &Path, rows: &[StabilizationRow]) -> Result<(), ErgodicError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(STABILIZATION_HEADER)?;
    for r in rows {
        w.write_record([r.observable.clone(), r.t1.to_string(), r.t2.to_string(), r.distance.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tightness_csv(path: &Path, rows: &[TailRow]) -> Result<(), ErgodicError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TIGHTNESS_HEADER)?;
    for r in rows {
        w.write_record([r.r.to_string(), r.tail.to_string(), r.envelope.to_string(), r.mean_v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
