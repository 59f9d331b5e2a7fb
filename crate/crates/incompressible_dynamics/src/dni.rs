use std::fmt;
use std::sync::Arc;

use rand::Rng;
use spectral_core::{leray_project, sobolev_inner, sobolev_norm, wpinf_norm, TorusField, TorusGrid};

/// Lyapunov profile V with V(0) = 0, V′ > 0, V″ ≤ 0, V → ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VKind {
    Identity,
    Log1p,
}

impl VKind {
    pub fn v(&self, x: f64) -> f64 {
        match self {
            VKind::Identity => x,
            VKind::Log1p => x.ln_1p(),
        }
    }

    pub fn dv(&self, x: f64) -> f64 {
        match self {
            VKind::Identity => 1.0,
            VKind::Log1p => 1.0 / (1.0 + x),
        }
    }

    pub fn d2v(&self, x: f64) -> f64 {
        match self {
            VKind::Identity => 0.0,
            VKind::Log1p => -1.0 / (1.0 + x).powi(2),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VKind::Identity => "identity",
            VKind::Log1p => "log1p",
        }
    }
}

type HFn = Arc<dyn Fn(&TorusField) -> TorusField + Send + Sync>;

/// Itô coefficient h̃(u) of the velocity equation.
#[derive(Clone, Default)]
pub enum HSpec {
    #[default]
    Zero,
    /// h̃(u) = g·u
    Linear { g: f64 },
    /// h̃(u) = 𝔤(‖u‖_{W^{1,∞}}/M)·u with 𝔤(x) = g₀(1+x)^{1/2}
    NormScaled { g0: f64, m: f64 },
    Custom(HFn),
}

impl fmt::Debug for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HSpec::Zero => write!(f, "Zero"),
            HSpec::Linear { g } => write!(f, "Linear {{ g: {g} }}"),
            HSpec::NormScaled { g0, m } => write!(f, "NormScaled {{ g0: {g0}, m: {m} }}"),
            HSpec::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl HSpec {
    pub fn eval(&self, u: &TorusField) -> Option<TorusField> {
        match self {
            HSpec::Zero => None,
            HSpec::Linear { g } => Some(u.scale(*g)),
            HSpec::NormScaled { g0, m } => {
                let x = wpinf_norm(1, u) / m;
                Some(u.scale(g0 * (1.0 + x).sqrt()))
            }
            HSpec::Custom(h) => Some(h(u)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DniSpec {
    pub v: VKind,
    /// Damping Υ.
    pub gamma: f64,
    pub a1: f64,
    pub a2: f64,
    pub c_nl: f64,
    /// Embedding constant for ‖·‖_{W^{p,∞}} ≤ M‖·‖_{H^σ}.
    pub m_embed: f64,
    pub sigma: f64,
    pub p: usize,
    pub h: HSpec,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl DniSpec {
    /// V = identity and no noise beyond what the caller adds.
    pub fn identity(c_nl: f64, m_embed: f64, sigma: f64, p: usize) -> Self {
        DniSpec {
            v: VKind::Identity,
            gamma: 0.0,
            a1: 0.0,
            a2: 0.0,
            c_nl,
            m_embed,
            sigma,
            p,
            h: HSpec::Zero,
            g1: 0.0,
            g2: 0.0,
            g3: 0.0,
        }
    }

    /// V = log(1+x) with h̃ = 𝔤(‖u‖_{W^{1,∞}}/M)u, g₀ chosen so that
    /// sup 2𝒸x/𝔤²(x/M) equals `a_target`, and 2Υ = 2(𝔞₁ + g₀²) + `excess`.
    pub fn log_damped(c_nl: f64, m_embed: f64, a1: f64, a_target: f64, excess: f64, sigma: f64, p: usize) -> Self {
        let g0 = (2.0 * c_nl * m_embed / a_target).sqrt();
        let gamma = (a1 + g0 * g0) + 0.5 * excess;
        DniSpec {
            v: VKind::Log1p,
            gamma,
            a1,
            a2: 0.0,
            c_nl,
            m_embed,
            sigma,
            p,
            h: HSpec::NormScaled { g0, m: m_embed },
            g1: 0.0,
            g2: 0.0,
            g3: 0.0,
        }
    }

    /// A = sup_x 2𝒸x/𝔤²(x/M) for the norm-scaled coefficient.
    pub fn a_constant(&self) -> Option<f64> {
        match self.h {
            HSpec::NormScaled { g0, m } => Some(2.0 * self.c_nl * m / (g0 * g0)),
            _ => None,
        }
    }

    /// 𝐕(u) − 2ΥV′(‖u‖²)‖u‖².
    pub fn damped_functional(&self, u: &TorusField) -> f64 {
        let x = sobolev_norm(self.sigma, u).powi(2);
        dni_functional(self, u) - 2.0 * self.gamma * self.v.dv(x) * x
    }

    /// V(‖u‖²_{W^{p,∞}}/M²).
    pub fn decay_integrand(&self, u: &TorusField) -> f64 {
        self.v.v((wpinf_norm(self.p, u) / self.m_embed).powi(2))
    }
}

/// 𝐕(u) = V′(‖u‖²)[(𝔞₁ + 2𝒸‖u‖_{W^{1,∞}})‖u‖² + ‖h̃(u)‖²] + 2V″(‖u‖²)⟨h̃(u), u⟩² + 𝔞₂V(‖u‖²), norms in H^σ.
pub fn dni_functional(spec: &DniSpec, u: &TorusField) -> f64 {
    let s = spec.sigma;
    let x = sobolev_norm(s, u).powi(2);
    let w1 = wpinf_norm(1, u);
    let (hh, hu) = match spec.h.eval(u) {
        Some(h) => (sobolev_norm(s, &h).powi(2), sobolev_inner(s, &h, u).expect("same grid")),
        None => (0.0, 0.0),
    };
    spec.v.dv(x) * ((spec.a1 + 2.0 * spec.c_nl * w1) * x + hh) + 2.0 * spec.v.d2v(x) * hu * hu + spec.a2 * spec.v.v(x)
}

/// Random divergence-free, zero-mean field with ‖u‖_{H^s} = `norm`.
pub fn random_div_free<R: Rng + ?Sized>(grid: &TorusGrid, s: f64, norm: f64, rng: &mut R) -> TorusField {
    let f = leray_project(&TorusField::random_band_limited(grid, grid.dim(), s, rng)).expect("d components");
    let n = sobolev_norm(s, &f);
    f.scale(norm / n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DniLevel {
    D1,
    D2,
    D3,
}

#[derive(Clone, Debug)]
pub struct DniReport {
    pub level: DniLevel,
    /// Smallest slack of the inequality over the samples; negative means falsified.
    pub worst_margin: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub holds: bool,
    pub note: String,
}

const REL_TOL: f64 = 1e-12;

/// Evaluates the chosen inequality on the given fields. Constants left at
/// zero in the spec are fitted from the samples.
pub fn check_dni(level: DniLevel, spec: &DniSpec, fields: &[TorusField]) -> DniReport {
    let mut report = DniReport {
        level,
        worst_margin: f64::INFINITY,
        g1: spec.g1,
        g2: spec.g2,
        g3: spec.g3,
        holds: true,
        note: String::new(),
    };
    if level != DniLevel::D1 && spec.a2 != 0.0 {
        report.holds = false;
        report.worst_margin = f64::NEG_INFINITY;
        report.note = "requires a skew frequency-only jump amplitude (a2 = 0)".into();
        return report;
    }
    match level {
        DniLevel::D1 => {
            let pts: Vec<(f64, f64)> = fields
                .iter()
                .map(|u| (spec.v.v(sobolev_norm(spec.sigma, u).powi(2)), dni_functional(spec, u)))
                .collect();
            if spec.g1 == 0.0 && spec.g2 == 0.0 {
                report.g1 = pts
                    .iter()
                    .filter(|(v, _)| *v > 0.0)
                    .map(|(v, f)| f / v)
                    .fold(0.0, f64::max);
                report.g2 = pts.iter().map(|(v, f)| f - report.g1 * v).fold(0.0, f64::max);
            }
            for (v, f) in &pts {
                let bound = report.g1 * v + report.g2;
                report.worst_margin = report.worst_margin.min(bound - f);
                if *f > bound + REL_TOL * bound.abs().max(1.0) {
                    report.holds = false;
                }
            }
        }
        DniLevel::D2 => {
            for u in fields {
                let f = spec.damped_functional(u);
                report.worst_margin = report.worst_margin.min(-f);
                if f > REL_TOL * dni_functional(spec, u).abs().max(1e-300) {
                    report.holds = false;
                }
            }
        }
        DniLevel::D3 => {
            let pts: Vec<(f64, f64)> = fields
                .iter()
                .map(|u| (spec.damped_functional(u), spec.decay_integrand(u)))
                .filter(|(_, w)| *w > 0.0)
                .collect();
            if spec.g3 == 0.0 {
                report.g3 = pts.iter().map(|(f, w)| -f / w).fold(f64::INFINITY, f64::min);
                if !report.g3.is_finite() {
                    report.g3 = 0.0;
                }
            }
            for (f, w) in &pts {
                report.worst_margin = report.worst_margin.min(-f - report.g3 * w);
            }
            report.holds = report.g3 > 0.0 && report.worst_margin >= -REL_TOL;
        }
    }
    report.note = if report.holds {
        "not falsified on sample class".into()
    } else if report.note.is_empty() {
        "falsified on sample class".into()
    } else {
        report.note
    };
    report
}
