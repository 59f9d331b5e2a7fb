use rand::Rng;
use rand_distr::{Distribution, Exp};

/// Lévy measure supported on [-1, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevyMeasure {
    /// (λ/2)(δ_{ℓ₀} + δ_{-ℓ₀})
    TwoPoint { l0: f64, rate: f64 },
    /// c|l|^{-1-a} dl on ε ≤ |l| ≤ 1; jumps below ε enter as a drift correction.
    TruncatedStable { a: f64, c: f64, eps: f64 },
}

impl Default for LevyMeasure {
    fn default() -> Self {
        LevyMeasure::TwoPoint { l0: 0.5, rate: 4.0 }
    }
}

impl LevyMeasure {
    pub fn stable(a: f64, c: f64) -> Self {
        LevyMeasure::TruncatedStable { a, c, eps: 1e-2 }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            LevyMeasure::TwoPoint { l0, rate } => {
                if !(l0 > 0.0 && l0 <= 1.0) {
                    return Err(format!("jump size {l0} outside (0,1]"));
                }
                if !(rate >= 0.0) {
                    return Err(format!("rate {rate} must be non-negative"));
                }
            }
            LevyMeasure::TruncatedStable { a, c, eps } => {
                if !(a > 0.0 && a < 2.0) {
                    return Err(format!("stability index {a} outside (0,2)"));
                }
                if !(c > 0.0) || !(eps > 0.0 && eps < 1.0) {
                    return Err("stable measure needs c > 0 and 0 < eps < 1".into());
                }
            }
        }
        Ok(())
    }

    /// ν of the simulated (active) jump set.
    pub fn total_rate(&self) -> f64 {
        match *self {
            LevyMeasure::TwoPoint { rate, .. } => rate,
            LevyMeasure::TruncatedStable { a, c, eps } => 2.0 * c / a * (eps.powf(-a) - 1.0),
        }
    }

    /// ∫ l² ν(dl) over the active set.
    pub fn second_moment(&self) -> f64 {
        match *self {
            LevyMeasure::TwoPoint { l0, rate } => rate * l0 * l0,
            LevyMeasure::TruncatedStable { a, c, eps } => {
                2.0 * c * (1.0 - eps.powf(2.0 - a)) / (2.0 - a)
            }
        }
    }

    /// ∫_{|l|<ε} l² ν(dl), folded into the drift.
    pub fn small_jump_second_moment(&self) -> f64 {
        match *self {
            LevyMeasure::TwoPoint { .. } => 0.0,
            LevyMeasure::TruncatedStable { a, c, eps } => 2.0 * c * eps.powf(2.0 - a) / (2.0 - a),
        }
    }

    /// E|l| of one simulated jump.
    pub fn mean_abs_size(&self) -> f64 {
        match *self {
            LevyMeasure::TwoPoint { l0, .. } => l0,
            LevyMeasure::TruncatedStable { a, c, eps } => {
                let first = if (a - 1.0).abs() < 1e-14 {
                    -2.0 * c * eps.ln()
                } else {
                    2.0 * c * (1.0 - eps.powf(1.0 - a)) / (1.0 - a)
                };
                first / self.total_rate()
            }
        }
    }

    pub fn sample_size<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        match *self {
            LevyMeasure::TwoPoint { l0, .. } => sign * l0,
            LevyMeasure::TruncatedStable { a, eps, .. } => {
                // inverse CDF of the density ∝ l^{-1-a} on [ε, 1]
                let u: f64 = rng.random();
                let lo = eps.powf(-a);
                sign * (lo - u * (lo - 1.0)).powf(-1.0 / a)
            }
        }
    }
}

/// Jump source with its own RNG stream.
#[derive(Clone, Debug)]
pub struct LevyDriver<R> {
    pub measure: LevyMeasure,
    pub rng: R,
}

impl<R: Rng> LevyDriver<R> {
    pub fn new(measure: LevyMeasure, rng: R) -> Self {
        LevyDriver { measure, rng }
    }

    pub fn sample_jumps(&mut self, t0: f64, t1: f64) -> Vec<(f64, f64)> {
        sample_jumps(&self.measure, &mut self.rng, t0, t1)
    }
}

/// Jump times and sizes in [t0, t1), ordered in time.
pub fn sample_jumps<R: Rng + ?Sized>(
    measure: &LevyMeasure,
    rng: &mut R,
    t0: f64,
    t1: f64,
) -> Vec<(f64, f64)> {
    let rate = measure.total_rate();
    let mut out = Vec::new();
    if !(t1 > t0) || rate <= 0.0 {
        return out;
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut t = t0 + exp.sample(rng);
    while t < t1 {
        out.push((t, measure.sample_size(rng)));
        t += exp.sample(rng);
    }
    out
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}
