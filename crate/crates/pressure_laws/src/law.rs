use std::path::Path;

use spectral_core::smooth_step;

use crate::quad::{integrate, Spline};
use crate::PressureError;

/// Cubic Hermite piece on [x0, x1] matching values and slopes at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermite {
    pub x0: f64,
    pub x1: f64,
    pub p0: f64,
    pub p1: f64,
    pub d0: f64,
    pub d1: f64,
}

impl Hermite {
    /// Value and first two derivatives.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let h = self.x1 - self.x0;
        let t = (x - self.x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.p0
            + (t3 - 2.0 * t2 + t) * h * self.d0
            + (-2.0 * t3 + 3.0 * t2) * self.p1
            + (t3 - t2) * h * self.d1;
        let d = ((6.0 * t2 - 6.0 * t) * self.p0
            + (3.0 * t2 - 4.0 * t + 1.0) * h * self.d0
            + (-6.0 * t2 + 6.0 * t) * self.p1
            + (3.0 * t2 - 2.0 * t) * h * self.d1)
            / h;
        let dd = ((12.0 * t - 6.0) * self.p0
            + (6.0 * t - 4.0) * h * self.d0
            + (-12.0 * t + 6.0) * self.p1
            + (6.0 * t - 2.0) * h * self.d1)
            / (h * h);
        (v, d, dd)
    }
}

/// Pure γ-laws a_iρ^{γ_i} on [b_{i-1}, c_i] joined by Hermite transitions on [c_i, b_i].
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseGamma {
    pub segments: Vec<(f64, f64)>,
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub transitions: Vec<Hermite>,
}

fn power(a: f64, g: f64, rho: f64) -> (f64, f64, f64) {
    (
        a * rho.powf(g),
        a * g * rho.powf(g - 1.0),
        a * g * (g - 1.0) * rho.powf(g - 2.0),
    )
}

pub(crate) enum Piece {
    Pure(usize),
    Transition(usize),
}

impl PiecewiseGamma {
    pub fn new(segments: Vec<(f64, f64)>, c: Vec<f64>, b: Vec<f64>) -> Result<Self, PressureError> {
        let k = segments.len();
        let bad = |m: &str| Err(PressureError::InvalidParams(m.to_string()));
        if k < 2 || c.len() != k - 1 || b.len() != k - 1 {
            return bad("piecewise law needs k ≥ 2 segments and k−1 pairs of breakpoints");
        }
        let mut prev = 0.0;
        for i in 0..k - 1 {
            if !(c[i] > prev && b[i] > c[i]) {
                return bad("breakpoints must satisfy 0 < c₁ < b₁ < c₂ < …");
            }
            prev = b[i];
        }
        for (i, &(a, g)) in segments.iter().enumerate() {
            let edge = i == 0 || i == k - 1;
            if !(a > 0.0) || g < 1.0 || (edge && g <= 1.0) {
                return bad("segment needs a > 0, γ ≥ 1, and γ > 1 on the first and last segment");
            }
        }
        let mut transitions = Vec::with_capacity(k - 1);
        for i in 0..k - 1 {
            let (a0, g0) = segments[i];
            let (a1, g1) = segments[i + 1];
            let (p0, d0, _) = power(a0, g0, c[i]);
            let (p1, d1, _) = power(a1, g1, b[i]);
            if p0 >= p1 {
                return bad("need a_i c_i^{γ_i} < a_{i+1} b_i^{γ_{i+1}}");
            }
            let h = Hermite {
                x0: c[i],
                x1: b[i],
                p0,
                p1,
                d0,
                d1,
            };
            let n = 2000;
            if (0..=n).any(|j| h.eval(c[i] + (b[i] - c[i]) * j as f64 / n as f64).1 <= 0.0) {
                return Err(PressureError::NotMonotone(format!(
                    "cubic transition on [{}, {}] is not increasing",
                    c[i], b[i]
                )));
            }
            transitions.push(h);
        }
        Ok(PiecewiseGamma {
            segments,
            c,
            b,
            transitions,
        })
    }

    pub(crate) fn piece(&self, rho: f64) -> Piece {
        for i in 0..self.c.len() {
            if rho <= self.c[i] {
                return Piece::Pure(i);
            }
            if rho < self.b[i] {
                return Piece::Transition(i);
            }
        }
        Piece::Pure(self.segments.len() - 1)
    }

    fn eval(&self, rho: f64) -> (f64, f64, f64) {
        match self.piece(rho) {
            Piece::Pure(i) => power(self.segments[i].0, self.segments[i].1, rho),
            Piece::Transition(i) => self.transitions[i].eval(rho),
        }
    }
}

/// Law from a table of (ρ, P, P′) rows, splined in log ρ.
#[derive(Clone, Debug)]
pub struct Tabulated {
    pub rho: Vec<f64>,
    pub p: Spline,
    pub log_pprime: Spline,
    pub m_lo: f64,
    pub m_hi: f64,
}

impl Tabulated {
    pub fn from_rows(rows: &[(f64, f64, f64)]) -> Result<Self, PressureError> {
        if rows.len() < 4 {
            return Err(PressureError::InvalidParams("table needs at least 4 rows".into()));
        }
        if rows.windows(2).any(|w| w[1].0 <= w[0].0) || rows[0].0 <= 0.0 {
            return Err(PressureError::InvalidParams("ρ column must be positive and increasing".into()));
        }
        if rows.iter().any(|r| !(r.2 > 0.0)) {
            return Err(PressureError::NotMonotone("tabulated P′ must be positive".into()));
        }
        let u: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
        let p = Spline::new(u.clone(), rows.iter().map(|r| r.1).collect());
        let lpp = Spline::new(u.clone(), rows.iter().map(|r| r.2.ln()).collect());
        let m_lo = lpp.eval3(u[0]).1;
        let m_hi = lpp.eval3(u[u.len() - 1]).1;
        Ok(Tabulated {
            rho: rows.iter().map(|r| r.0).collect(),
            p,
            log_pprime: lpp,
            m_lo,
            m_hi,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, PressureError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_path(path)
            .map_err(|e| PressureError::Table(e.to_string()))?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| PressureError::Table(e.to_string()))?;
            let vals: Result<Vec<f64>, _> = rec.iter().map(|s| s.parse::<f64>()).collect();
            match vals {
                Ok(v) if v.len() == 3 => rows.push((v[0], v[1], v[2])),
                // a header row of column names
                Err(_) if rows.is_empty() => continue,
                _ => {
                    return Err(PressureError::Table(format!(
                        "line {}: expected three numbers rho,P,P'",
                        rec.position().map_or(0, |p| p.line())
                    )))
                }
            }
        }
        Self::from_rows(&rows)
    }

    fn first(&self) -> f64 {
        self.rho[0]
    }

    fn last(&self) -> f64 {
        self.rho[self.rho.len() - 1]
    }

    /// P′ and P″ from the P′ column, power-law beyond the table.
    fn pprime(&self, rho: f64) -> (f64, f64) {
        let u = rho.ln();
        let (lo, hi) = (self.first(), self.last());
        let (lp, slope) = if rho < lo {
            (self.log_pprime.eval(lo.ln()) + self.m_lo * (u - lo.ln()), self.m_lo)
        } else if rho > hi {
            (self.log_pprime.eval(hi.ln()) + self.m_hi * (u - hi.ln()), self.m_hi)
        } else {
            let (v, d, _) = self.log_pprime.eval3(u);
            (v, d)
        };
        let pp = lp.exp();
        (pp, pp * slope / rho)
    }

    /// P from the P column and its spline derivative (used as the independent P′).
    fn p_and_derivative(&self, rho: f64) -> (f64, f64) {
        let (lo, hi) = (self.first(), self.last());
        if rho < lo || rho > hi {
            let edge = if rho < lo { lo } else { hi };
            let base = self.p.eval(edge.ln());
            let extra = integrate(|y| self.pprime(y).0, edge, rho, 1e-12);
            return (base + extra, self.pprime(rho).0);
        }
        let (v, d, _) = self.p.eval3(rho.ln());
        (v, d / rho)
    }
}

#[derive(Clone, Debug)]
pub enum LawKind {
    Gamma { a: f64, gamma: f64 },
    Chaplygin { a: f64, kappa: f64 },
    PiecewiseGamma(PiecewiseGamma),
    WhiteDwarf { c1: f64, c2: f64, c3: f64 },
    /// P′ = (log ρ)^{-4} below `lo`, blended smoothly on [lo, hi] into `tail`·ρ.
    SoftVacuum { tail: f64, lo: f64, hi: f64 },
    Custom(Tabulated),
}

#[derive(Clone, Debug)]
pub struct PressureLaw {
    pub kind: LawKind,
    pub domain_note: String,
}

/// h′ for the smooth step h(t) = φ(t)/(φ(t)+φ(1−t)), φ(t) = e^{-1/t}.
fn smooth_step_prime(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = ((-1.0 / t).exp(), (-1.0 / (1.0 - t)).exp());
    let (da, db) = (a / (t * t), b / ((1.0 - t) * (1.0 - t)));
    (da * b + a * db) / ((a + b) * (a + b))
}

impl PressureLaw {
    fn with(kind: LawKind, note: &str) -> Self {
        PressureLaw {
            kind,
            domain_note: note.to_string(),
        }
    }

    pub fn gamma(a: f64, gamma: f64) -> Result<Self, PressureError> {
        if !(a > 0.0 && gamma >= 1.0) {
            return Err(PressureError::InvalidParams(format!("gamma law needs a>0, γ≥1 (got {a}, {gamma})")));
        }
        Ok(Self::with(LawKind::Gamma { a, gamma }, "P = aρ^γ on (0,∞)"))
    }

    pub fn isothermal(a: f64) -> Result<Self, PressureError> {
        Self::gamma(a, 1.0)
    }

    pub fn chaplygin(a: f64, kappa: f64) -> Result<Self, PressureError> {
        if !(a > 0.0 && kappa > 0.5 && kappa <= 1.0) {
            return Err(PressureError::InvalidParams(format!("Chaplygin law needs a>0, κ∈(½,1] (got {a}, {kappa})")));
        }
        Ok(Self::with(LawKind::Chaplygin { a, kappa }, "P = −aρ^{1−2κ} on (0,∞), negative pressure"))
    }

    pub fn piecewise(segments: Vec<(f64, f64)>, c: Vec<f64>, b: Vec<f64>) -> Result<Self, PressureError> {
        Ok(Self::with(
            LawKind::PiecewiseGamma(PiecewiseGamma::new(segments, c, b)?),
            "pure γ-segments with C¹ cubic transitions",
        ))
    }

    /// 2ρ^{5/3} on (0,1], 3ρ on [2,3], 2ρ^{3/2} on [4,∞).
    pub fn piecewise_example() -> Self {
        Self::piecewise(vec![(2.0, 5.0 / 3.0), (3.0, 1.0), (2.0, 1.5)], vec![1.0, 3.0], vec![2.0, 4.0])
            .expect("example parameters are admissible")
    }

    pub fn white_dwarf(c1: f64, c2: f64, c3: f64) -> Result<Self, PressureError> {
        if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0) {
            return Err(PressureError::InvalidParams("white dwarf law needs c₁,c₂,c₃ > 0".into()));
        }
        Ok(Self::with(LawKind::WhiteDwarf { c1, c2, c3 }, "P = c₁∫₀^{c₂ρ^{1/3}} y⁴/√(c₃+y²) dy"))
    }

    pub fn soft_vacuum() -> Self {
        let lo: f64 = 0.5;
        Self::with(
            LawKind::SoftVacuum {
                tail: lo.ln().powi(4).recip() / lo,
                lo,
                hi: 0.6,
            },
            "P′ = (log ρ)^{-4} on (0,½), γ=2 tail beyond 0.6",
        )
    }

    pub fn custom(table: Tabulated) -> Self {
        Self::with(LawKind::Custom(table), "tabulated; Λ outside (r₀,r∞) is a C¹ cubic blend to 0")
    }

    pub fn custom_from_file(path: &Path) -> Result<Self, PressureError> {
        Ok(Self::custom(Tabulated::from_file(path)?))
    }

    /// Registry lookup by CLI name; `params` overrides the defaults in order.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, PressureError> {
        let p = |i: usize, d: f64| params.get(i).copied().unwrap_or(d);
        match name {
            "gamma" => Self::gamma(p(0, 2.0), p(1, 5.0 / 3.0)),
            "isothermal" => Self::isothermal(p(0, 1.0)),
            "chaplygin" => Self::chaplygin(p(0, 1.0), p(1, 1.0)),
            "piecewise-gamma" => Ok(Self::piecewise_example()),
            "white-dwarf" => Self::white_dwarf(p(0, 1.0), p(1, 1.0), p(2, 1.0)),
            "soft-vacuum" => Ok(Self::soft_vacuum()),
            other => match other.strip_prefix("custom:") {
                Some(file) => Self::custom_from_file(Path::new(file)),
                None => Err(PressureError::UnknownLaw(other.to_string())),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match &self.kind {
            LawKind::Gamma { gamma, .. } if *gamma == 1.0 => "isothermal",
            LawKind::Gamma { .. } => "gamma",
            LawKind::Chaplygin { .. } => "chaplygin",
            LawKind::PiecewiseGamma(_) => "piecewise-gamma",
            LawKind::WhiteDwarf { .. } => "white-dwarf",
            LawKind::SoftVacuum { .. } => "soft-vacuum",
            LawKind::Custom(_) => "custom",
        }
    }

    /// (P′, P″) at ρ > 0.
    pub fn derivatives(&self, rho: f64) -> (f64, f64) {
        match &self.kind {
            LawKind::Gamma { a, gamma } => {
                let (_, d, dd) = power(*a, *gamma, rho);
                (d, dd)
            }
            LawKind::Chaplygin { a, kappa } => {
                let d = a * (2.0 * kappa - 1.0) * rho.powf(-2.0 * kappa);
                (d, -2.0 * kappa * d / rho)
            }
            LawKind::PiecewiseGamma(pw) => {
                let (_, d, dd) = pw.eval(rho);
                (d, dd)
            }
            LawKind::WhiteDwarf { c1, c2, c3 } => {
                let q = c2 * c2 * rho.powf(2.0 / 3.0);
                let d = c1 * c2.powi(5) / 3.0 * rho.powf(2.0 / 3.0) / (c3 + q).sqrt();
                let log_slope = 2.0 / (3.0 * rho) - q / (3.0 * rho * (c3 + q));
                (d, d * log_slope)
            }
            LawKind::SoftVacuum { tail, lo, hi } => {
                let l = rho.ln();
                let soft = l.powi(-4);
                let soft_d = -4.0 * l.powi(-5) / rho;
                if rho <= *lo {
                    return (soft, soft_d);
                }
                let w = hi - lo;
                let t = (rho - lo) / w;
                let hh = smooth_step(t);
                let hp = smooth_step_prime(t) / w;
                let hard = tail * rho;
                if rho >= *hi {
                    return (hard, *tail);
                }
                (
                    (1.0 - hh) * soft + hh * hard,
                    (1.0 - hh) * soft_d + hh * tail + hp * (hard - soft),
                )
            }
            LawKind::Custom(t) => t.pprime(rho),
        }
    }

    pub fn pprime(&self, rho: f64) -> f64 {
        self.derivatives(rho).0
    }

    pub fn pprime2(&self, rho: f64) -> f64 {
        self.derivatives(rho).1
    }

    /// P′ used on the left of the structural identity. Equals `pprime` except for
    /// tabulated laws, where it is the derivative of the P column.
    pub fn pprime_reference(&self, rho: f64) -> f64 {
        match &self.kind {
            LawKind::Custom(t) => t.p_and_derivative(rho).1,
            _ => self.pprime(rho),
        }
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        match &self.kind {
            LawKind::Gamma { a, gamma } => a * rho.powf(*gamma),
            LawKind::Chaplygin { a, kappa } => -a * rho.powf(1.0 - 2.0 * kappa),
            LawKind::PiecewiseGamma(pw) => pw.eval(rho).0,
            LawKind::WhiteDwarf { c1, c2, c3 } => {
                let y = c2 * rho.cbrt();
                let t2 = y * y / c3;
                if t2 < 1e-4 {
                    let sc = c3.sqrt();
                    c1 * (y.powi(5) / (5.0 * sc) - y.powi(7) / (14.0 * sc * c3) + y.powi(9) / (24.0 * sc * c3 * c3))
                } else {
                    let s = (c3 + y * y).sqrt();
                    c1 * ((y.powi(3) / 4.0 - 3.0 * c3 * y / 8.0) * s + 3.0 * c3 * c3 / 8.0 * (y / c3.sqrt()).asinh())
                }
            }
            LawKind::SoftVacuum { .. } => integrate(|y| self.pprime(y), 0.0, rho, 1e-13),
            LawKind::Custom(t) => t.p_and_derivative(rho).0,
        }
    }

    /// Sampled strict hyperbolicity P′ > 0.
    pub fn is_strictly_hyperbolic(&self, samples: &[f64]) -> bool {
        samples.iter().all(|&r| self.pprime(r) > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_matches_figure_transitions() {
        let law = PressureLaw::piecewise_example();
        for x in [1.2, 1.5, 1.9] {
            let fig = -5.0 / 3.0 * x * x * x + 22.0 / 3.0 * x * x - 19.0 / 3.0 * x + 8.0 / 3.0;
            assert!((law.pressure(x) - fig).abs() < 1e-12);
        }
        for x in [3.1, 3.5, 3.9] {
            let fig = -5.0 * x * x * x + 54.0 * x * x - 186.0 * x + 216.0;
            assert!((law.pressure(x) - fig).abs() < 1e-10);
        }
    }

    #[test]
    fn white_dwarf_pressure_derivative() {
        let law = PressureLaw::white_dwarf(1.0, 2.0, 0.5).unwrap();
        for rho in [1e-9, 1e-3, 0.7, 40.0] {
            let h = 1e-5 * rho;
            let fd = (law.pressure(rho + h) - law.pressure(rho - h)) / (2.0 * h);
            assert!((fd - law.pprime(rho)).abs() < 1e-6 * law.pprime(rho), "{rho}");
        }
    }

    #[test]
    fn soft_vacuum_is_smooth_and_positive() {
        let law = PressureLaw::soft_vacuum();
        let (d_lo, _) = law.derivatives(0.5);
        assert!((d_lo - 0.5f64.ln().powi(-4)).abs() < 1e-14);
        for i in 1..400 {
            let r = 0.45 + 0.2 * i as f64 / 400.0;
            let (d, dd) = law.derivatives(r);
            assert!(d > 0.0);
            let h = 1e-6;
            let fd = (law.pprime(r + h) - law.pprime(r - h)) / (2.0 * h);
            assert!((fd - dd).abs() < 1e-5 * (1.0 + dd.abs()), "{r}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PressureLaw::gamma(-1.0, 2.0).is_err());
        assert!(PressureLaw::chaplygin(1.0, 0.4).is_err());
        assert!(PressureLaw::piecewise(vec![(1.0, 1.0), (1.0, 2.0)], vec![2.0], vec![3.0]).is_err());
        assert!(matches!(PressureLaw::from_name("nope", &[]), Err(PressureError::UnknownLaw(_))));
    }
}
