use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{SpectralError, TorusField};

/// φ(t) = e^{-1/t} for t > 0, else 0.
fn phi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    let a = phi(t);
    let b = phi(1.0 - t);
    a / (a + b)
}

/// Mollifier bump j(y) = h(2 - |y|).
pub fn bump(y_norm: f64) -> f64 {
    smooth_step(2.0 - y_norm)
}

/// Cut-off χ_R(x) = h((2R - x)/R).
pub fn cutoff(r: f64, x: f64) -> f64 {
    smooth_step((2.0 * r - x) / r)
}

/// Friedrichs multiplier j(k/n) at mode `idx`.
pub fn mollifier_symbol(grid: &crate::TorusGrid, n: usize, idx: usize) -> f64 {
    bump(grid.k2(idx).sqrt() / n as f64)
}

pub fn bessel_potential(s: f64, f: &TorusField) -> TorusField {
    let g = f.grid().clone();
    f.apply_multiplier(|i| Complex64::new((1.0 + g.k2(i)).powf(0.5 * s), 0.0))
}

pub fn sobolev_inner(s: f64, f: &TorusField, g: &TorusField) -> Result<f64, SpectralError> {
    if f.grid() != g.grid() {
        return Err(SpectralError::GridMismatch);
    }
    if f.components() != g.components() {
        return Err(SpectralError::ComponentMismatch {
            expected: f.components(),
            found: g.components(),
        });
    }
    let grid = f.grid();
    let mut acc = 0.0;
    for c in 0..f.components() {
        for (i, (a, b)) in f.coeffs(c).iter().zip(g.coeffs(c)).enumerate() {
            let w = if s == 0.0 { 1.0 } else { (1.0 + grid.k2(i)).powf(s) };
            acc += w * (a * b.conj()).re;
        }
    }
    Ok(acc * (2.0 * PI).powi(-(grid.dim() as i32)))
}

pub fn sobolev_norm(s: f64, f: &TorusField) -> f64 {
    sobolev_inner(s, f, f).unwrap().max(0.0).sqrt()
}

/// All multi-indices α ∈ ℕ^d with |α|₁ ≤ p.
pub fn multi_indices(d: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|a: Vec<usize>| {
                let used: usize = a.iter().sum();
                (0..=p - used).map(move |k| {
                    let mut b = a.clone();
                    b.push(k);
                    b
                })
            })
            .collect();
    }
    out
}

/// ∂^α f computed spectrally.
pub fn partial(f: &TorusField, alpha: &[usize]) -> TorusField {
    let g = f.grid().clone();
    f.apply_multiplier(|i| {
        let k = g.wave(i);
        alpha
            .iter()
            .zip(k)
            .fold(Complex64::new(1.0, 0.0), |acc, (a, kv)| {
                acc * Complex64::new(0.0, *kv as f64).powu(*a as u32)
            })
    })
}

pub fn wpinf_norm(p: usize, f: &TorusField) -> f64 {
    let d = f.grid().dim();
    let alphas = multi_indices(d, p);
    let mut total = 0.0;
    for alpha in &alphas {
        let df = partial(f, alpha);
        for c in 0..f.components() {
            total += df.to_real_component(c).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
    }
    total
}

/// Sets the k = 0 mode to zero.
pub fn zero_mean(f: &TorusField) -> TorusField {
    let mut out = f.clone();
    for c in 0..out.components() {
        out.coeffs_mut(c)[0] = Complex64::new(0.0, 0.0);
    }
    out
}

/// Π = Π_d Π_0: zero-average then per-mode δ_ij - k_i k_j/|k|².
pub fn leray_project(f: &TorusField) -> Result<TorusField, SpectralError> {
    let grid = f.grid().clone();
    let d = grid.dim();
    if f.components() != d {
        return Err(SpectralError::ComponentMismatch {
            expected: d,
            found: f.components(),
        });
    }
    let mut out = zero_mean(f);
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    for i in 1..grid.len() {
        let k = grid.wave(i);
        let k2 = grid.k2(i);
        let mut dot = Complex64::new(0.0, 0.0);
        for a in 0..d {
            v[a] = out.coeffs(a)[i];
            dot += v[a] * k[a] as f64;
        }
        for a in 0..d {
            out.coeffs_mut(a)[i] = v[a] - dot * (k[a] as f64 / k2);
        }
    }
    out.zero_nyquist();
    Ok(out)
}

pub fn mollify(n: usize, f: &TorusField) -> TorusField {
    let g = f.grid().clone();
    f.apply_multiplier(|i| Complex64::new(mollifier_symbol(&g, n, i), 0.0))
}
