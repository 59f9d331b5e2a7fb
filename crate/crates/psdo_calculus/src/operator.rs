use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use spectral_core::{mollifier_symbol, Complex64, TorusField, TorusGrid};

use crate::PsdoError;

pub type ScalarSymbol = Arc<dyn Fn(&[i64]) -> Complex64 + Send + Sync>;
pub type MatrixSymbol = Arc<dyn Fn(&[i64]) -> DMatrix<Complex64> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    FreqOnly,
    XDependent,
    Mikhlin,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OperatorKind::FreqOnly => "freq-only",
            OperatorKind::XDependent => "x-dependent",
            OperatorKind::Mikhlin => "mikhlin",
        };
        f.write_str(s)
    }
}

#[derive(Clone)]
pub enum Symbol {
    /// Same multiplier on every component.
    Scalar(ScalarSymbol),
    /// m×m multiplier per mode.
    Matrix(MatrixSymbol),
    /// Σ a_i(x) ∂_i (I-Δ)^α plus a zero-order multiplication g(x).
    Transport {
        coeffs: Vec<TorusField>,
        alpha: f64,
        zero_order: Option<TorusField>,
    },
}

#[derive(Clone, Debug)]
pub enum TransportCoeffs {
    Constant(Vec<f64>),
    Fields(Vec<TorusField>),
}

/// Pseudo-differential noise amplitude.
#[derive(Clone)]
pub struct PsdoOperator {
    pub kind: OperatorKind,
    pub order: f64,
    pub skew_exact: bool,
    pub symbol: Symbol,
    pub mollify_level: Option<usize>,
}

impl fmt::Debug for PsdoOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PsdoOperator({}, order={}, skew={}, n={:?})",
            self.kind, self.order, self.skew_exact, self.mollify_level
        )
    }
}

fn i_times(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

pub fn build_bessel_transport(
    coeffs: TransportCoeffs,
    alpha: f64,
) -> Result<PsdoOperator, PsdoError> {
    if !alpha.is_finite() || 1.0 + 2.0 * alpha < 0.0 {
        return Err(PsdoError::Invalid(format!("alpha {alpha} gives negative order")));
    }
    let order = 1.0 + 2.0 * alpha;
    match coeffs {
        TransportCoeffs::Constant(c) => {
            let sym: ScalarSymbol = Arc::new(move |k: &[i64]| {
                let k2: f64 = k.iter().map(|v| (v * v) as f64).sum();
                let dot: f64 = c.iter().zip(k).map(|(a, b)| a * *b as f64).sum();
                i_times(dot) * (1.0 + k2).powf(alpha)
            });
            Ok(PsdoOperator {
                kind: OperatorKind::FreqOnly,
                order,
                skew_exact: true,
                symbol: Symbol::Scalar(sym),
                mollify_level: None,
            })
        }
        TransportCoeffs::Fields(fields) => {
            if !(0.0..=1.0).contains(&order) {
                return Err(PsdoError::Invalid(format!(
                    "x-dependent transport needs order 1+2α in [0,1], got {order}"
                )));
            }
            let grid = fields
                .first()
                .ok_or_else(|| PsdoError::Invalid("no coefficient fields".into()))?
                .grid()
                .clone();
            if fields.len() != grid.dim() {
                return Err(PsdoError::Invalid(format!(
                    "need {} coefficient fields, got {}",
                    grid.dim(),
                    fields.len()
                )));
            }
            for f in &fields {
                check_coefficient(f, &grid)?;
            }
            Ok(PsdoOperator {
                kind: OperatorKind::XDependent,
                order,
                skew_exact: false,
                symbol: Symbol::Transport {
                    coeffs: fields,
                    alpha,
                    zero_order: None,
                },
                mollify_level: None,
            })
        }
    }
}

fn check_coefficient(f: &TorusField, grid: &TorusGrid) -> Result<(), PsdoError> {
    if f.grid() != grid || f.components() != 1 {
        return Err(PsdoError::Invalid("coefficients must be scalar fields on one grid".into()));
    }
    if !f.is_finite() || f.hermitian_defect() > 1e-10 * f.max_abs_coeff().max(1.0) {
        return Err(PsdoError::Invalid("coefficient field is not a real smooth field".into()));
    }
    // the dealiased product is exact only for coefficients resolved well inside the mask
    let lim = (grid.n() / 6) as i64;
    let tail = (0..grid.len())
        .filter(|&i| grid.wave(i).iter().any(|k| k.abs() > lim))
        .fold(0.0f64, |m, i| m.max(f.coeffs(0)[i].norm()));
    if tail > 1e-10 * f.max_abs_coeff().max(1e-300) {
        return Err(PsdoError::Invalid(
            "coefficient field carries modes beyond N/6 and would alias".into(),
        ));
    }
    Ok(())
}

/// Σ c_i R_i (-Δ)^{ς/2} with R_j = multiplier -i k_j/|k|.
pub fn build_fractional_riesz(c: Vec<f64>, varsigma: f64) -> Result<PsdoOperator, PsdoError> {
    if !(varsigma >= 0.0) {
        return Err(PsdoError::Invalid(format!("varsigma {varsigma} must be non-negative")));
    }
    let sym: ScalarSymbol = Arc::new(move |k: &[i64]| {
        let k2: f64 = k.iter().map(|v| (v * v) as f64).sum();
        if k2 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let kn = k2.sqrt();
        let dot: f64 = c.iter().zip(k).map(|(a, b)| a * *b as f64).sum();
        i_times(-dot / kn) * kn.powf(varsigma)
    });
    Ok(PsdoOperator {
        kind: OperatorKind::Mikhlin,
        order: varsigma,
        skew_exact: true,
        symbol: Symbol::Scalar(sym),
        mollify_level: None,
    })
}

impl PsdoOperator {
    pub fn from_scalar_symbol(
        kind: OperatorKind,
        order: f64,
        skew_exact: bool,
        sym: ScalarSymbol,
    ) -> Self {
        PsdoOperator {
            kind,
            order,
            skew_exact,
            symbol: Symbol::Scalar(sym),
            mollify_level: None,
        }
    }

    pub fn zero() -> Self {
        Self::from_scalar_symbol(
            OperatorKind::FreqOnly,
            0.0,
            true,
            Arc::new(|_| Complex64::new(0.0, 0.0)),
        )
    }

    pub fn identity() -> Self {
        Self::from_scalar_symbol(
            OperatorKind::FreqOnly,
            0.0,
            false,
            Arc::new(|_| Complex64::new(1.0, 0.0)),
        )
    }

    /// (I-Δ)^{s/2}: self-adjoint, used as a negative control.
    pub fn bessel(s: f64) -> Self {
        Self::from_scalar_symbol(
            OperatorKind::FreqOnly,
            s,
            false,
            Arc::new(move |k: &[i64]| {
                let k2: f64 = k.iter().map(|v| (v * v) as f64).sum();
                Complex64::new((1.0 + k2).powf(s / 2.0), 0.0)
            }),
        )
    }

    /// Per-mode matrix symbol acting on `m`-component fields.
    pub fn from_matrix_symbol(order: f64, skew_exact: bool, sym: MatrixSymbol) -> Self {
        PsdoOperator {
            kind: OperatorKind::FreqOnly,
            order,
            skew_exact,
            symbol: Symbol::Matrix(sym),
            mollify_level: None,
        }
    }

    /// Adds a zero-order multiplication by a scalar field (x-dependent only).
    pub fn with_zero_order(mut self, g: TorusField) -> Result<Self, PsdoError> {
        match &mut self.symbol {
            Symbol::Transport {
                coeffs, zero_order, ..
            } => {
                check_coefficient(&g, coeffs[0].grid())?;
                *zero_order = Some(g);
                Ok(self)
            }
            _ => Err(PsdoError::Invalid("zero-order part needs an x-dependent operator".into())),
        }
    }

    pub fn renormalize(&self, n: usize) -> PsdoOperator {
        let mut q = self.clone();
        q.mollify_level = Some(n.max(1));
        q
    }

    /// Scalar multiplier at mode `idx` including the mollifier factor.
    pub fn scalar_multiplier(&self, grid: &TorusGrid, idx: usize) -> Option<Complex64> {
        match &self.symbol {
            Symbol::Scalar(p) => {
                let j = self.mollify_level.map_or(1.0, |n| mollifier_symbol(grid, n, idx));
                Some(p(grid.wave(idx)) * (j * j))
            }
            _ => None,
        }
    }

    /// Matrix multiplier at mode `idx` including the mollifier factor.
    pub fn matrix_multiplier(&self, grid: &TorusGrid, idx: usize, m: usize) -> Option<DMatrix<Complex64>> {
        let j = self.mollify_level.map_or(1.0, |n| mollifier_symbol(grid, n, idx));
        match &self.symbol {
            Symbol::Scalar(p) => Some(DMatrix::identity(m, m) * (p(grid.wave(idx)) * (j * j))),
            Symbol::Matrix(p) => Some(p(grid.wave(idx)) * Complex64::new(j * j, 0.0)),
            Symbol::Transport { .. } => None,
        }
    }

    pub fn is_multiplier(&self) -> bool {
        !matches!(self.symbol, Symbol::Transport { .. })
    }

    /// Adjoint for multiplier operators (conjugate-transposed symbol).
    pub fn adjoint(&self) -> Option<PsdoOperator> {
        let mut q = self.clone();
        q.symbol = match &self.symbol {
            Symbol::Scalar(p) => {
                let p = p.clone();
                Symbol::Scalar(Arc::new(move |k: &[i64]| p(k).conj()))
            }
            Symbol::Matrix(p) => {
                let p = p.clone();
                Symbol::Matrix(Arc::new(move |k: &[i64]| p(k).adjoint()))
            }
            Symbol::Transport { .. } => return None,
        };
        Some(q)
    }

    /// Largest |p(-k) - conj p(k)| over the grid.
    pub fn reality_defect(&self, grid: &TorusGrid) -> f64 {
        match &self.symbol {
            Symbol::Scalar(p) => (0..grid.len())
                .filter(|&i| !grid.is_nyquist(i))
                .map(|i| {
                    let k = grid.wave(i);
                    let nk: Vec<i64> = k.iter().map(|v| -v).collect();
                    (p(&nk) - p(k).conj()).norm()
                })
                .fold(0.0, f64::max),
            Symbol::Matrix(p) => (0..grid.len())
                .filter(|&i| !grid.is_nyquist(i))
                .map(|i| {
                    let k = grid.wave(i);
                    let nk: Vec<i64> = k.iter().map(|v| -v).collect();
                    (p(&nk) - p(k).map(|z| z.conj())).norm()
                })
                .fold(0.0, f64::max),
            Symbol::Transport { .. } => 0.0,
        }
    }

    /// Upper estimate of the operator's largest multiplier modulus on `grid`.
    pub fn norm_estimate(&self, grid: &TorusGrid, m: usize) -> f64 {
        let jn = |i: usize| self.mollify_level.map_or(1.0, |n| mollifier_symbol(grid, n, i));
        match &self.symbol {
            Symbol::Transport {
                coeffs,
                alpha,
                zero_order,
            } => {
                let sups: Vec<f64> = coeffs
                    .iter()
                    .map(|c| c.to_real_component(0).iter().fold(0.0f64, |a, v| a.max(v.abs())))
                    .collect();
                let g = zero_order.as_ref().map_or(0.0, |z| {
                    z.to_real_component(0).iter().fold(0.0f64, |a, v| a.max(v.abs()))
                });
                (0..grid.len())
                    .filter(|&i| grid.dealias(i))
                    .map(|i| {
                        let k = grid.wave(i);
                        let lead: f64 = sups.iter().zip(k).map(|(a, b)| a * (*b as f64).abs()).sum();
                        let j = jn(i);
                        j * j * (lead * (1.0 + grid.k2(i)).powf(*alpha) + g)
                    })
                    .fold(0.0, f64::max)
            }
            _ => (0..grid.len())
                .map(|i| self.matrix_multiplier(grid, i, m).unwrap().norm())
                .fold(0.0, f64::max),
        }
    }

    pub fn apply(&self, f: &TorusField) -> Result<TorusField, PsdoError> {
        let grid = f.grid().clone();
        if self.kind == OperatorKind::Mikhlin {
            let mean = (0..f.components()).fold(0.0f64, |a, c| a.max(f.coeffs(c)[0].norm()));
            if mean > 1e-12 * f.max_abs_coeff().max(1e-300) {
                return Err(PsdoError::NonzeroMean(mean));
            }
        }
        match &self.symbol {
            Symbol::Scalar(_) => Ok(f.apply_multiplier(|i| self.scalar_multiplier(&grid, i).unwrap())),
            Symbol::Matrix(_) => {
                let m = f.components();
                let mut out = TorusField::zeros(&grid, m);
                let mut v = nalgebra::DVector::<Complex64>::zeros(m);
                for i in 0..grid.len() {
                    if grid.is_nyquist(i) {
                        continue;
                    }
                    let a = self.matrix_multiplier(&grid, i, m).unwrap();
                    if a.nrows() != m {
                        return Err(PsdoError::Invalid(format!(
                            "symbol is {}x{} but field has {m} components",
                            a.nrows(),
                            a.ncols()
                        )));
                    }
                    for c in 0..m {
                        v[c] = f.coeffs(c)[i];
                    }
                    let w = a * &v;
                    for c in 0..m {
                        out.coeffs_mut(c)[i] = w[c];
                    }
                }
                Ok(out)
            }
            Symbol::Transport {
                coeffs,
                alpha,
                zero_order,
            } => {
                if coeffs[0].grid() != &grid {
                    return Err(PsdoError::Invalid("operator and field grids differ".into()));
                }
                let input = match self.mollify_level {
                    Some(n) => spectral_core::mollify(n, f),
                    None => f.clone(),
                }
                .dealiased();
                let a_vals: Vec<Vec<f64>> = coeffs.iter().map(|c| c.to_real_component(0)).collect();
                let g_vals = zero_order.as_ref().map(|z| z.to_real_component(0));
                let mut outs = Vec::with_capacity(f.components());
                for c in 0..f.components() {
                    let comp = input.component(c);
                    let smooth = comp.apply_multiplier(|i| {
                        Complex64::new((1.0 + grid.k2(i)).powf(*alpha), 0.0)
                    });
                    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
                    for (axis, a) in a_vals.iter().enumerate() {
                        let d = smooth.derivative(axis).to_grid_complex(0);
                        for ((o, dv), av) in acc.iter_mut().zip(&d).zip(a) {
                            *o += dv * *av;
                        }
                    }
                    if let Some(gv) = &g_vals {
                        let base = comp.to_grid_complex(0);
                        for ((o, b), gx) in acc.iter_mut().zip(&base).zip(gv) {
                            *o += b * *gx;
                        }
                    }
                    outs.push(acc);
                }
                let out = TorusField::from_grid_complex(&grid, outs).dealiased();
                Ok(match self.mollify_level {
                    Some(n) => spectral_core::mollify(n, &out),
                    None => out,
                })
            }
        }
    }
}
