use std::f64::consts::PI;

use psdo_calculus::sample_rng;
use spectral_core::{leray_project, multi_indices, sobolev_inner, sobolev_norm, wpinf_norm, TorusField, TorusGrid};

use crate::dni::random_div_free;

/// (u·∇)u with products formed on the grid and dealiased.
fn convective(u: &TorusField) -> TorusField {
    let grid = u.grid();
    let d = grid.dim();
    let len = grid.len();
    let uv = u.to_real();
    let mut out = vec![vec![0.0; len]; d];
    for j in 0..d {
        let uj = u.component(j);
        for k in 0..d {
            let duj = uj.derivative(k).to_real_component(0);
            for i in 0..len {
                out[j][i] += uv[k][i] * duj[i];
            }
        }
    }
    TorusField::from_real(grid, &out).dealiased()
}

/// Π[(u·∇)u].
pub fn advection(u: &TorusField) -> TorusField {
    leray_project(&convective(u)).expect("velocity has d components")
}

/// Π[(u·∇)u] + Υu.
pub fn projected_drift(u: &TorusField, gamma: f64) -> TorusField {
    let mut out = advection(u);
    if gamma != 0.0 {
        out.axpy(gamma, u);
    }
    out
}

/// ⟨Π(u·∇)u, u⟩_{H^s} / (‖u‖_{W^{1,∞}}‖u‖²_{H^s}).
pub fn nl_ratio(s: f64, u: &TorusField) -> f64 {
    let num = sobolev_inner(s, &advection(u), u).expect("same grid");
    let den = wpinf_norm(1, u) * sobolev_norm(s, u).powi(2);
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Empirical sup of the nonlinear growth ratio over random divergence-free fields.
pub fn estimate_nl_constant(grid: &TorusGrid, s: f64, samples: usize, seed: u64) -> f64 {
    (0..samples)
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            nl_ratio(s, &random_div_free(grid, s, 1.0, &mut rng))
        })
        .fold(0.0, f64::max)
}

/// M with ‖f‖_{W^{p,∞}} ≤ M‖f‖_{H^σ} for every m-component field on the grid:
/// √m·(2π)^{-d/2}·Σ_{|α|≤p} (Σ_k k^{2α}(1+|k|²)^{-σ})^{1/2}.
pub fn embedding_constant(grid: &TorusGrid, sigma: f64, p: usize, m: usize) -> f64 {
    let d = grid.dim();
    let mut total = 0.0;
    for alpha in multi_indices(d, p) {
        let mut acc = 0.0;
        for i in 0..grid.len() {
            if grid.is_nyquist(i) {
                continue;
            }
            let k = grid.wave(i);
            let w: f64 = alpha.iter().zip(k).map(|(a, kv)| (*kv as f64).powi(2 * *a as i32)).product();
            acc += w * (1.0 + grid.k2(i)).powf(-sigma);
        }
        total += acc.sqrt();
    }
    (m as f64).sqrt() * (2.0 * PI).powf(-(d as f64) / 2.0) * total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn damping_is_linear() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = leray_project(&TorusField::from_fn(&g, 2, |x, c| (x[1 - c] + c as f64).sin())).unwrap();
        let diff = projected_drift(&u, 1.0).sub(&projected_drift(&u, 0.0));
        assert!(diff.sub(&u).max_abs_coeff() < 1e-15);
        assert_eq!(projected_drift(&TorusField::zeros(&g, 2), 3.0).max_abs_coeff(), 0.0);
    }

    #[test]
    fn embedding_bounds_grid_fields() {
        let g = TorusGrid::new(2, 16).unwrap();
        let m = embedding_constant(&g, 2.5, 1, 2);
        let mut rng = sample_rng(3, 0);
        for _ in 0..20 {
            let f = random_div_free(&g, 2.5, 1.0, &mut rng);
            assert!(wpinf_norm(1, &f) <= m * sobolev_norm(2.5, &f));
        }
    }
}
