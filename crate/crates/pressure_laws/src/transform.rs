use crate::law::{LawKind, Piece, PressureLaw};
use crate::quad::integrate;
use crate::PressureError;

const VACUUM_SPLIT: f64 = 1e-6;
const KNOT_TOP: f64 = 1e6;
const PANEL_TOL: f64 = 1e-12;
const DIFF_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoundMode {
    ConstantSound,
    GeneralSound,
}

/// Makino-type transform ϱ = r(ρ) with its sound-speed function Θ and extension Λ.
#[derive(Clone, Debug)]
pub struct PressureTransform {
    pub law: PressureLaw,
    pub r0: f64,
    pub r_inf: f64,
    pub mode: SoundMode,
    pub lambda_lip: f64,
    knots: Vec<f64>,
    cum: Vec<f64>,
}

fn integrand(law: &PressureLaw, y: f64) -> f64 {
    law.pprime(y).sqrt() / y
}

/// Analytic r below the vacuum split, where the law's leading behaviour is known.
fn vacuum_r(law: &PressureLaw, rho: f64) -> f64 {
    match &law.kind {
        LawKind::PiecewiseGamma(pw) => {
            let (a, g) = pw.segments[0];
            2.0 * (a * g).sqrt() / (g - 1.0) * rho.powf((g - 1.0) / 2.0)
        }
        LawKind::WhiteDwarf { c1, c2, c3 } => {
            // √P′/y = A y^{-2/3}(1+X²)^{-1/4}, X² = c₂²y^{2/3}/c₃, expanded to second order
            let a = (c1 * c2.powi(5) / (3.0 * c3.sqrt())).sqrt();
            let q = c2 * c2 / c3;
            a * (3.0 * rho.cbrt() - q * rho / 4.0 + 5.0 * q * q / 32.0 * 0.6 * rho.powf(5.0 / 3.0))
        }
        LawKind::SoftVacuum { .. } => -1.0 / rho.ln(),
        LawKind::Custom(t) => {
            let r0 = t.rho[0];
            let p0 = law.pprime(r0);
            let m = t.m_lo;
            let base = if m > 0.0 { 2.0 * p0.sqrt() / m } else { 0.0 };
            base + tail_integral(p0, m, r0, rho)
        }
        LawKind::Gamma { .. } | LawKind::Chaplygin { .. } => unreachable!("closed-form laws"),
    }
}

/// ∫_{x0}^{x} √(p0 (y/x0)^m)/y dy.
fn tail_integral(p0: f64, m: f64, x0: f64, x: f64) -> f64 {
    if m.abs() < 1e-14 {
        p0.sqrt() * (x / x0).ln()
    } else {
        p0.sqrt() * 2.0 / m * ((x / x0).powf(m / 2.0) - 1.0)
    }
}

impl PressureTransform {
    pub fn build(law: PressureLaw) -> Result<Self, PressureError> {
        let (r0, r_inf, mode) = match &law.kind {
            LawKind::Gamma { gamma, .. } if *gamma == 1.0 => (f64::NEG_INFINITY, f64::INFINITY, SoundMode::ConstantSound),
            LawKind::Gamma { .. } => (0.0, f64::INFINITY, SoundMode::GeneralSound),
            LawKind::Chaplygin { .. } => (f64::NEG_INFINITY, 0.0, SoundMode::GeneralSound),
            LawKind::Custom(t) => (
                if t.m_lo > 0.0 { 0.0 } else { f64::NEG_INFINITY },
                f64::INFINITY,
                SoundMode::GeneralSound,
            ),
            _ => (0.0, f64::INFINITY, SoundMode::GeneralSound),
        };
        let mut tr = PressureTransform {
            law,
            r0,
            r_inf,
            mode,
            lambda_lip: 0.0,
            knots: Vec::new(),
            cum: Vec::new(),
        };
        tr.build_knots();
        if let LawKind::Custom(t) = &tr.law.kind {
            if t.m_hi < 0.0 {
                let last = *tr.knots.last().unwrap();
                tr.r_inf = *tr.cum.last().unwrap() + 2.0 * tr.law.pprime(last).sqrt() / (-t.m_hi);
            }
        }
        tr.lambda_lip = tr.sample_lipschitz();
        Ok(tr)
    }

    fn build_knots(&mut self) {
        let mut knots: Vec<f64> = match &self.law.kind {
            LawKind::Gamma { .. } | LawKind::Chaplygin { .. } => return,
            LawKind::Custom(t) => t.rho.clone(),
            _ => {
                let decades = (KNOT_TOP / VACUUM_SPLIT).log10().round() as i32;
                (0..=decades * 10)
                    .map(|i| VACUUM_SPLIT * 10f64.powf(i as f64 / 10.0))
                    .collect()
            }
        };
        match &self.law.kind {
            LawKind::PiecewiseGamma(pw) => knots.extend(pw.c.iter().chain(&pw.b)),
            LawKind::SoftVacuum { lo, hi, .. } => knots.extend([*lo, *hi]),
            _ => {}
        }
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup();
        let mut cum = Vec::with_capacity(knots.len());
        let mut acc = vacuum_r(&self.law, knots[0]);
        cum.push(acc);
        for w in knots.windows(2) {
            acc += integrate(|y| integrand(&self.law, y), w[0], w[1], PANEL_TOL);
            cum.push(acc);
        }
        self.knots = knots;
        self.cum = cum;
    }

    /// r(b) − r(a) by quadrature, for a, b > 0.
    pub fn r_diff(&self, a: f64, b: f64) -> f64 {
        integrate(|y| integrand(&self.law, y), a, b, PANEL_TOL * (b - a).abs().max(1e-300).min(1.0))
    }

    pub fn r(&self, rho: f64) -> f64 {
        match &self.law.kind {
            LawKind::Gamma { a, gamma } if *gamma == 1.0 => a.sqrt() * rho.ln(),
            LawKind::Gamma { a, gamma } => 2.0 * (a * gamma).sqrt() / (gamma - 1.0) * rho.powf((gamma - 1.0) / 2.0),
            LawKind::Chaplygin { a, kappa } => -(a * (2.0 * kappa - 1.0)).sqrt() / kappa * rho.powf(-kappa),
            LawKind::Custom(t) if rho > *self.knots.last().unwrap() => {
                let last = *self.knots.last().unwrap();
                *self.cum.last().unwrap() + tail_integral(self.law.pprime(last), t.m_hi, last, rho)
            }
            _ => {
                if rho < self.knots[0] {
                    return vacuum_r(&self.law, rho);
                }
                let i = self.knots.partition_point(|k| *k <= rho) - 1;
                self.cum[i] + integrate(|y| integrand(&self.law, y), self.knots[i], rho, PANEL_TOL)
            }
        }
    }

    /// r′ from a formula independent of the P′ evaluation, where one exists.
    pub fn r_prime_closed(&self, rho: f64) -> Option<f64> {
        match &self.law.kind {
            LawKind::Gamma { a, gamma } => Some((a * gamma).sqrt() * rho.powf((gamma - 3.0) / 2.0)),
            LawKind::Chaplygin { a, kappa } => Some((a * (2.0 * kappa - 1.0)).sqrt() * rho.powf(-kappa - 1.0)),
            LawKind::PiecewiseGamma(pw) => match pw.piece(rho) {
                Piece::Pure(i) => {
                    let (a, g) = pw.segments[i];
                    Some((a * g).sqrt() * rho.powf((g - 3.0) / 2.0))
                }
                Piece::Transition(_) => None,
            },
            LawKind::WhiteDwarf { c1, c2, c3 } => {
                let k = (3.0 * c1 * c2.powi(3) * c3.sqrt()).sqrt();
                let x = c2 * rho.cbrt() / c3.sqrt();
                Some(k * (1.0 + x * x).powf(-0.25) * c2 / (3.0 * c3.sqrt()) * rho.powf(-2.0 / 3.0))
            }
            LawKind::SoftVacuum { lo, .. } if rho < *lo => Some(1.0 / (rho * rho.ln().powi(2))),
            _ => None,
        }
    }

    /// Central difference (r(ρ+h) − r(ρ−h))/2h with h = 10⁻⁶ρ.
    pub fn r_prime_differenced(&self, rho: f64) -> f64 {
        let h = DIFF_STEP * rho;
        let (lo, hi) = (rho - h, rho + h);
        match &self.law.kind {
            LawKind::Gamma { .. } | LawKind::Chaplygin { .. } => (self.r(hi) - self.r(lo)) / (hi - lo),
            _ => self.r_diff(lo, hi) / (hi - lo),
        }
    }

    pub fn r_prime(&self, rho: f64) -> f64 {
        self.r_prime_closed(rho).unwrap_or_else(|| self.r_prime_differenced(rho))
    }

    pub fn contains(&self, y: f64) -> bool {
        y > self.r0 && y < self.r_inf
    }

    /// r⁻¹ by bracketing in log ρ and safeguarded Newton, to 10⁻¹² in ϱ.
    pub fn r_inv(&self, y: f64) -> Result<f64, PressureError> {
        if !self.contains(y) || !y.is_finite() {
            return Err(PressureError::OutOfRange {
                value: y,
                lo: self.r0,
                hi: self.r_inf,
            });
        }
        match &self.law.kind {
            LawKind::Gamma { a, gamma } if *gamma == 1.0 => return Ok((y / a.sqrt()).exp()),
            LawKind::Gamma { a, gamma } => {
                let k = 2.0 * (a * gamma).sqrt() / (gamma - 1.0);
                return Ok((y / k).powf(2.0 / (gamma - 1.0)));
            }
            LawKind::Chaplygin { a, kappa } => {
                let k = (a * (2.0 * kappa - 1.0)).sqrt() / kappa;
                return Ok((-y / k).powf(-1.0 / kappa));
            }
            _ => {}
        }
        let f = |u: f64| self.r(u.exp()) - y;
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut step = 1.0;
        if f(0.0) < 0.0 {
            while f(hi) < 0.0 {
                lo = hi;
                hi += step;
                step *= 2.0;
                if hi > 690.0 {
                    return Err(PressureError::NoConvergence(y));
                }
            }
        } else {
            while f(lo) > 0.0 {
                hi = lo;
                lo -= step;
                step *= 2.0;
                if lo < -690.0 {
                    return Err(PressureError::NoConvergence(y));
                }
            }
        }
        let tol = 1e-12 * y.abs().max(1.0);
        let mut u = 0.5 * (lo + hi);
        for _ in 0..200 {
            let v = f(u);
            if v.abs() <= tol {
                return Ok(u.exp());
            }
            if v < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let slope = self.law.pprime(u.exp()).sqrt();
            let next = u - v / slope;
            u = if next > lo && next < hi && slope > 0.0 {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 * u.abs().max(1.0) {
                return Ok(u.exp());
            }
        }
        Err(PressureError::NoConvergence(y))
    }

    /// Θ(y) = r′(r⁻¹(y))·r⁻¹(y) on (r₀, r∞).
    pub fn theta(&self, y: f64) -> Result<f64, PressureError> {
        match &self.law.kind {
            LawKind::Gamma { a, gamma } if *gamma == 1.0 => Ok(a.sqrt()),
            LawKind::Gamma { gamma, .. } if self.contains(y) => Ok((gamma - 1.0) / 2.0 * y),
            LawKind::Chaplygin { kappa, .. } if self.contains(y) => Ok(-kappa * y),
            _ => Ok(self.law.pprime(self.r_inv(y)?).sqrt()),
        }
    }

    /// Θ′(y) = ½ρP″(ρ)/P′(ρ) at ρ = r⁻¹(y).
    pub fn theta_prime(&self, y: f64) -> Result<f64, PressureError> {
        let rho = self.r_inv(y)?;
        Ok(acoustics(&self.law, rho))
    }

    /// Smooth extension Λ of Θ to ℝ.
    pub fn lambda(&self, y: f64) -> f64 {
        self.lambda_pair(y).0
    }

    pub fn lambda_prime(&self, y: f64) -> f64 {
        self.lambda_pair(y).1
    }

    fn inside(&self, y: f64) -> (f64, f64) {
        let rho = self.r_inv(y).expect("inside the admissible interval");
        (self.law.pprime(rho).sqrt(), acoustics(&self.law, rho))
    }

    /// (Λ(y), Λ′(y)).
    pub fn lambda_pair(&self, y: f64) -> (f64, f64) {
        match &self.law.kind {
            LawKind::Gamma { a, gamma } if *gamma == 1.0 => (a.sqrt(), 0.0),
            LawKind::Gamma { gamma, .. } => ((gamma - 1.0) / 2.0 * y, (gamma - 1.0) / 2.0),
            LawKind::Chaplygin { kappa, .. } => (-kappa * y, -*kappa),
            LawKind::PiecewiseGamma(pw) => {
                if y > 0.0 {
                    self.inside(y)
                } else {
                    let c = (pw.segments[0].1 - 1.0) / 2.0;
                    (c * y, c)
                }
            }
            LawKind::WhiteDwarf { .. } => {
                if y > 0.0 {
                    self.inside(y)
                } else if y < 0.0 {
                    let (v, d) = self.inside(-y);
                    (-v, d)
                } else {
                    (0.0, 1.0 / 3.0)
                }
            }
            LawKind::SoftVacuum { .. } => {
                if y == 0.0 {
                    (0.0, 0.0)
                } else {
                    let (v, d) = self.inside(y.abs());
                    (v, d * y.signum())
                }
            }
            LawKind::Custom(t) => {
                if self.contains(y) {
                    self.inside(y)
                } else if y <= self.r0 {
                    // r₀ finite means P′ ~ ρ^m with m > 0 near vacuum: Θ → 0, Θ′ → m/2
                    blend(self.r0 - y, t.m_lo / 2.0, -1.0)
                } else {
                    blend(y - self.r_inf, t.m_hi / 2.0, 1.0)
                }
            }
        }
    }

    fn sample_lipschitz(&self) -> f64 {
        if self.mode == SoundMode::ConstantSound {
            return 0.0;
        }
        let mut ys: Vec<f64> = (0..=320)
            .map(|i| self.r(10f64.powf(-8.0 + i as f64 * 0.05)))
            .collect();
        let extra: Vec<f64> = ys.iter().map(|y| -y).collect();
        ys.extend(extra);
        for off in [0.1, 0.5, 0.9] {
            if self.r0.is_finite() {
                ys.push(self.r0 - off);
            }
            if self.r_inf.is_finite() {
                ys.push(self.r_inf + off);
            }
        }
        ys.iter()
            .filter(|y| y.is_finite())
            .map(|&y| self.lambda_prime(y).abs())
            .fold(0.0, f64::max)
    }
}

/// C¹ cubic from (dist=1, 0, 0) to (dist=0, 0, slope); `dir` is the sign of y − edge.
fn blend(dist: f64, slope: f64, dir: f64) -> (f64, f64) {
    if dist >= 1.0 {
        return (0.0, 0.0);
    }
    // s = 1 − dist runs 0 → 1 towards the edge; value s²(s−1)·slope·(−dir)
    let s = 1.0 - dist;
    let v = (s * s * s - s * s) * slope * (-dir);
    let dv_ds = (3.0 * s * s - 2.0 * s) * slope * (-dir);
    (v, dv_ds * (-dir))
}

/// ½ρP″/P′, the nonlinear acoustics parameter.
pub fn acoustics(law: &PressureLaw, rho: f64) -> f64 {
    let (d, dd) = law.derivatives(rho);
    0.5 * rho * dd / d
}

pub fn build_transform(law: PressureLaw) -> Result<PressureTransform, PressureError> {
    PressureTransform::build(law)
}
