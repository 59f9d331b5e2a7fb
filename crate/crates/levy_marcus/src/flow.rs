use nalgebra::DVector;
use psdo_calculus::{OperatorKind, PsdoError, PsdoOperator, Symbol};
use spectral_core::{sobolev_inner, sobolev_norm, zero_mean, Complex64, TorusField};

use crate::driver::{gauss_legendre, LevyMeasure};

/// Largest r·|l|·‖Q‖ handled by one RK4 substep.
const STEP_SCALE: f64 = 0.015;
const MIN_SUBSTEPS: usize = 8;
pub const QUAD_NODES: usize = 16;

#[derive(Clone, Debug)]
pub struct MarcusFlowResult {
    pub endpoint: TorusField,
    pub norm_defect: f64,
    pub linearized_defect: f64,
    pub substeps: usize,
}

/// Q applied as the flow generator. Homogeneous symbols vanish at k=0, so the
/// mean is dropped rather than rejected.
pub fn generator(q: &PsdoOperator, f: &TorusField) -> Result<TorusField, PsdoError> {
    if q.kind == OperatorKind::Mikhlin {
        q.apply(&zero_mean(f))
    } else {
        q.apply(f)
    }
}

/// Substep count used for x-dependent generators.
pub fn default_substeps(q: &PsdoOperator, f: &TorusField, l: f64, r: f64) -> usize {
    let lam = q.norm_estimate(f.grid(), f.components());
    let need = (r * l.abs() * lam / STEP_SCALE).ceil();
    if need.is_finite() {
        MIN_SUBSTEPS.max(need as usize)
    } else {
        MIN_SUBSTEPS
    }
}

fn exp_flow(q: &PsdoOperator, l: f64, f: &TorusField, r: f64) -> Result<TorusField, PsdoError> {
    let grid = f.grid().clone();
    let t = Complex64::new(r * l, 0.0);
    match &q.symbol {
        Symbol::Scalar(_) => Ok(f.apply_multiplier(|i| (q.scalar_multiplier(&grid, i).unwrap() * t).exp())),
        _ => {
            let m = f.components();
            let mut out = TorusField::zeros(&grid, m);
            let mut v = DVector::<Complex64>::zeros(m);
            for i in 0..grid.len() {
                if grid.is_nyquist(i) {
                    continue;
                }
                let a = q.matrix_multiplier(&grid, i, m).unwrap();
                if a.nrows() != m {
                    return Err(PsdoError::Invalid(format!(
                        "symbol is {}x{} but field has {m} components",
                        a.nrows(),
                        a.ncols()
                    )));
                }
                let e = (a * t).exp();
                for c in 0..m {
                    v[c] = f.coeffs(c)[i];
                }
                let w = e * &v;
                for c in 0..m {
                    out.coeffs_mut(c)[i] = w[c];
                }
            }
            Ok(out)
        }
    }
}

fn shifted(u: &TorusField, a: f64, k: &TorusField) -> TorusField {
    let mut v = u.clone();
    v.axpy(a, k);
    v
}

fn rk4_flow(q: &PsdoOperator, l: f64, f: &TorusField, r: f64, m: usize) -> Result<TorusField, PsdoError> {
    let h = r / m as f64;
    let mut u = f.clone();
    for _ in 0..m {
        let k1 = generator(q, &u)?.scale(l);
        let k2 = generator(q, &shifted(&u, h / 2.0, &k1))?.scale(l);
        let k3 = generator(q, &shifted(&u, h / 2.0, &k2))?.scale(l);
        let k4 = generator(q, &shifted(&u, h, &k3))?.scale(l);
        u.axpy(h / 6.0, &k1);
        u.axpy(h / 3.0, &k2);
        u.axpy(h / 3.0, &k3);
        u.axpy(h / 6.0, &k4);
    }
    Ok(u)
}

/// ℘(r, l, f) with an explicit substep count for x-dependent generators.
pub fn marcus_flow_substeps(
    q: &PsdoOperator,
    l: f64,
    f: &TorusField,
    r: f64,
    s: f64,
    substeps: usize,
) -> Result<MarcusFlowResult, PsdoError> {
    let (endpoint, used) = if q.is_multiplier() {
        (exp_flow(q, l, f, r)?, 0)
    } else if r == 0.0 || l == 0.0 {
        (f.clone(), 0)
    } else {
        (rk4_flow(q, l, f, r, substeps.max(1))?, substeps.max(1))
    };
    let v0 = sobolev_inner(s, f, f)?;
    let v1 = sobolev_inner(s, &endpoint, &endpoint)?;
    let qf = generator(q, f)?;
    let slope = 2.0 * l * sobolev_inner(s, &qf, f)?;
    Ok(MarcusFlowResult {
        endpoint,
        norm_defect: v1 - v0,
        linearized_defect: v1 - v0 - r * slope,
        substeps: used,
    })
}

/// Solves d℘/dr = l·Q℘, ℘(0) = f, up to time r; defects are measured in H^s.
pub fn marcus_flow(q: &PsdoOperator, l: f64, f: &TorusField, r: f64, s: f64) -> Result<MarcusFlowResult, PsdoError> {
    let m = default_substeps(q, f, l, r);
    marcus_flow_substeps(q, l, f, r, s, m)
}

/// Cancellation constants used in the flow bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConstants {
    pub c1: f64,
    pub c2: f64,
}

impl FlowConstants {
    pub const SLACK: f64 = 1.5;

    pub fn inflated(c1: f64, c2: f64) -> Self {
        FlowConstants {
            c1: c1 * Self::SLACK,
            c2: c2 * Self::SLACK,
        }
    }

    pub fn from_report(r: &psdo_calculus::CancellationReport) -> Self {
        Self::inflated(r.c1_hat, r.c2_hat)
    }

    /// (e^{2C₁|l|r} − 1), the relative bound on the norm defect.
    pub fn norm_bound(&self, l: f64, r: f64) -> f64 {
        (2.0 * self.c1 * l.abs() * r).exp_m1()
    }

    /// (C₂/2C₁²)(e^{b} − b − 1) with b = 2C₁|l|r, the relative bound on the linearized defect.
    pub fn linearized_bound(&self, l: f64, r: f64) -> f64 {
        let b = 2.0 * self.c1 * l.abs() * r;
        if b < 1e-4 {
            // (e^b − 1 − b)/b² ≤ e^b/2
            self.c2 * l * l * r * r * b.exp()
        } else {
            self.c2 / (2.0 * self.c1 * self.c1) * (b.exp_m1() - b)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectRow {
    pub l: f64,
    pub r: f64,
    pub norm_defect: f64,
    pub norm_bound: f64,
    pub linearized_defect: f64,
    pub linearized_bound: f64,
}

impl DefectRow {
    pub fn norm_pass(&self) -> bool {
        self.norm_defect.abs() <= self.norm_bound
    }

    pub fn linearized_pass(&self) -> bool {
        self.linearized_defect.abs() <= self.linearized_bound
    }

    pub fn pass(&self) -> bool {
        self.norm_pass() && self.linearized_pass()
    }

    pub fn norm_margin(&self) -> f64 {
        self.norm_bound - self.norm_defect.abs()
    }

    pub fn linearized_margin(&self) -> f64 {
        self.linearized_bound - self.linearized_defect.abs()
    }
}

/// Flow defects against their exponential bounds at r = 1 for each l.
pub fn flow_defect_bounds(
    q: &PsdoOperator,
    f: &TorusField,
    s: f64,
    l_grid: &[f64],
    consts: FlowConstants,
) -> Result<Vec<DefectRow>, PsdoError> {
    let nf = sobolev_inner(s, f, f)?;
    l_grid
        .iter()
        .map(|&l| {
            let res = marcus_flow(q, l, f, 1.0, s)?;
            Ok(DefectRow {
                l,
                r: 1.0,
                norm_defect: res.norm_defect,
                norm_bound: consts.norm_bound(l, 1.0) * nf,
                linearized_defect: res.linearized_defect,
                linearized_bound: consts.linearized_bound(l, 1.0) * nf,
            })
        })
        .collect()
}

fn symmetric_increment(q: &PsdoOperator, l: f64, u: &TorusField, s: f64) -> Result<TorusField, PsdoError> {
    let plus = marcus_flow(q, l, u, 1.0, s)?.endpoint;
    let minus = marcus_flow(q, -l, u, 1.0, s)?.endpoint;
    let mut out = plus.add(&minus);
    out.axpy(-2.0, u);
    Ok(out)
}

/// ½·∫_{|l|<ε} l²ν(dl)·Q²u, the drift standing in for the discarded small jumps.
pub fn small_jump_correction(q: &PsdoOperator, measure: &LevyMeasure, u: &TorusField) -> Result<TorusField, PsdoError> {
    let m = measure.small_jump_second_moment();
    if m == 0.0 {
        return Ok(TorusField::zeros(u.grid(), u.components()));
    }
    let qq = generator(q, &generator(q, u)?)?;
    Ok(qq.scale(0.5 * m))
}

/// ∫(℘(1,l,u) − u − l·Qu) ν(dl) with the given node count per sign.
pub fn compensator_drift_nodes(
    q: &PsdoOperator,
    measure: &LevyMeasure,
    u: &TorusField,
    nodes: usize,
) -> Result<TorusField, PsdoError> {
    let zero = TorusField::zeros(u.grid(), u.components());
    match *measure {
        LevyMeasure::TwoPoint { l0, rate } => {
            if rate == 0.0 {
                return Ok(zero);
            }
            Ok(symmetric_increment(q, l0, u, 0.0)?.scale(0.5 * rate))
        }
        LevyMeasure::TruncatedStable { a, c, eps } => {
            // l = e^t on [ln ε, 0]; ν(dl) = c·l^{-a} dt
            let (x, w) = gauss_legendre(nodes);
            let lo = eps.ln();
            let half = -lo / 2.0;
            let mut acc = zero;
            for (xi, wi) in x.iter().zip(&w) {
                let t = lo + half * (xi + 1.0);
                let l = t.exp();
                let inc = symmetric_increment(q, l, u, 0.0)?;
                acc.axpy(wi * half * c * l.powf(-a), &inc);
            }
            Ok(acc.add(&small_jump_correction(q, measure, u)?))
        }
    }
}

pub fn compensator_drift(q: &PsdoOperator, measure: &LevyMeasure, u: &TorusField) -> Result<TorusField, PsdoError> {
    compensator_drift_nodes(q, measure, u, QUAD_NODES)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    pub difference: f64,
    pub bound: f64,
}

impl StabilityReport {
    pub fn pass(&self) -> bool {
        self.difference <= self.bound
    }
}

/// ‖℘(1,l,f) − ℘(1,l,g)‖²_{H^θ} against ‖f−g‖²_{H^θ}·e^{2C₁|l|}, with C₁ the
/// H^θ cancellation constant.
pub fn flow_stability(
    q: &PsdoOperator,
    f: &TorusField,
    g: &TorusField,
    l: f64,
    s: f64,
    theta: f64,
    c1: f64,
) -> Result<StabilityReport, PsdoError> {
    if theta > s {
        return Err(PsdoError::Invalid(format!("theta {theta} exceeds s {s}")));
    }
    let pf = marcus_flow(q, l, f, 1.0, theta)?.endpoint;
    let pg = marcus_flow(q, l, g, 1.0, theta)?.endpoint;
    let diff = sobolev_norm(theta, &pf.sub(&pg)).powi(2);
    let base = sobolev_norm(theta, &f.sub(g)).powi(2);
    Ok(StabilityReport {
        difference: diff,
        bound: base * (2.0 * c1 * l.abs()).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use psdo_calculus::{build_bessel_transport, TransportCoeffs};
    use spectral_core::TorusGrid;

    #[test]
    fn zero_time_is_identity() {
        let g = TorusGrid::new(1, 16).unwrap();
        let q = build_bessel_transport(TransportCoeffs::Constant(vec![1.0]), 0.0).unwrap();
        let f = TorusField::from_fn(&g, 1, |x, _| x[0].cos() + 0.3);
        let res = marcus_flow(&q, 0.7, &f, 0.0, 1.0).unwrap();
        assert!(res.endpoint.sub(&f).max_abs_coeff() < 1e-15);
        assert_eq!(res.norm_defect, 0.0);
        assert_eq!(res.linearized_defect, 0.0);
    }

    #[test]
    fn bounds_vanish_at_zero_jump() {
        let c = FlowConstants::inflated(0.3, 0.8);
        assert_eq!(c.norm_bound(0.0, 1.0), 0.0);
        assert_eq!(c.linearized_bound(0.0, 1.0), 0.0);
        let z = FlowConstants { c1: 0.0, c2: 1.0 };
        assert!((z.linearized_bound(0.5, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn linearized_bound_branches_agree() {
        let c = FlowConstants { c1: 1e-5, c2: 2.0 };
        let b = 2.0 * c.c1 * 0.8;
        let closed = c.c2 / (2.0 * c.c1 * c.c1) * (b.exp_m1() - b);
        let series = c.linearized_bound(0.8, 1.0);
        assert!(series >= closed && (series - closed) / closed < 1e-4);
    }
}
