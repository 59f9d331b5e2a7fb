use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use spectral_core::{sobolev_inner, zero_mean, TorusField, TorusGrid};

use crate::{PsdoError, PsdoOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct CancellationReport {
    pub kind: String,
    pub order: f64,
    pub s: f64,
    pub n_max: Option<usize>,
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub sample_count: usize,
    pub seed: u64,
}

impl CancellationReport {
    pub const CSV_HEADER: &'static str = "kind,order,s,n_max,c1_hat,c2_hat,samples,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:e},{:e},{},{}",
            self.kind,
            self.order,
            self.s,
            self.n_max.map_or(String::from("none"), |n| n.to_string()),
            self.c1_hat,
            self.c2_hat,
            self.sample_count,
            self.seed
        )
    }
}

/// Per-sample RNG: the master seed selects the key, the sample index the stream.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Both cancellation ratios for one field.
pub fn cancellation_ratios(q: &PsdoOperator, s: f64, f: &TorusField) -> Result<(f64, f64), PsdoError> {
    let nf = sobolev_inner(s, f, f)?;
    let qf = q.apply(f)?;
    let qqf = q.apply(&qf)?;
    let c1 = sobolev_inner(s, &qf, f)?.abs() / nf;
    let c2 = (sobolev_inner(s, &qqf, f)? + sobolev_inner(s, &qf, &qf)?).abs() / nf;
    Ok((c1, c2))
}

/// Empirical sups of the two cancellation ratios over random band-limited fields.
pub fn cancel_probe(
    q: &PsdoOperator,
    grid: &TorusGrid,
    components: usize,
    s: f64,
    samples: usize,
    seed: u64,
) -> Result<CancellationReport, PsdoError> {
    let ratios: Result<Vec<(f64, f64)>, PsdoError> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let mut f = TorusField::random_band_limited(grid, components, s, &mut rng);
            if q.kind == crate::OperatorKind::Mikhlin {
                f = zero_mean(&f);
            }
            cancellation_ratios(q, s, &f)
        })
        .collect();
    let ratios = ratios?;
    let (c1, c2) = ratios
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), (x, y)| (a.max(*x), b.max(*y)));
    Ok(CancellationReport {
        kind: q.kind.to_string(),
        order: q.order,
        s,
        n_max: q.mollify_level,
        c1_hat: c1,
        c2_hat: c2,
        sample_count: samples,
        seed,
    })
}

/// Probe over a family of renormalizations; returns per-level reports and their max.
pub fn cancel_probe_family(
    q: &PsdoOperator,
    levels: &[usize],
    grid: &TorusGrid,
    components: usize,
    s: f64,
    samples: usize,
    seed: u64,
) -> Result<(Vec<CancellationReport>, CancellationReport), PsdoError> {
    let reports: Result<Vec<_>, _> = levels
        .iter()
        .map(|&n| cancel_probe(&q.renormalize(n), grid, components, s, samples, seed))
        .collect();
    let reports = reports?;
    let mut max = reports[0].clone();
    for r in &reports[1..] {
        max.c1_hat = max.c1_hat.max(r.c1_hat);
        max.c2_hat = max.c2_hat.max(r.c2_hat);
    }
    max.n_max = levels.iter().copied().max();
    Ok((reports, max))
}
