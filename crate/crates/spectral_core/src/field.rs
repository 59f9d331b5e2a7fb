use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{SpectralError, TorusGrid};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Real vector field on the torus, held as Fourier coefficients
/// f̂(k) = ∫ f e^{-ik·x} dx per component.
#[derive(Clone, Debug)]
pub struct TorusField {
    grid: TorusGrid,
    comps: Vec<Vec<Complex64>>,
}

impl TorusField {
    pub fn zeros(grid: &TorusGrid, m: usize) -> Self {
        TorusField {
            grid: grid.clone(),
            comps: vec![vec![ZERO; grid.len()]; m],
        }
    }

    /// Wraps raw coefficients; Nyquist modes are zeroed.
    pub fn from_coeffs(grid: &TorusGrid, comps: Vec<Vec<Complex64>>) -> Self {
        assert!(comps.iter().all(|c| c.len() == grid.len()));
        let mut f = TorusField {
            grid: grid.clone(),
            comps,
        };
        f.zero_nyquist();
        f
    }

    pub fn from_real(grid: &TorusGrid, values: &[Vec<f64>]) -> Self {
        let scale = grid.cell();
        let comps = values
            .iter()
            .map(|v| {
                assert_eq!(v.len(), grid.len());
                let mut buf: Vec<Complex64> = v.iter().map(|x| Complex64::new(*x, 0.0)).collect();
                grid.fft_nd(&mut buf, false);
                buf.iter_mut().for_each(|c| *c *= scale);
                buf
            })
            .collect();
        Self::from_coeffs(grid, comps)
    }

    /// Complex grid values to coefficients, without symmetrization.
    pub fn from_grid_complex(grid: &TorusGrid, values: Vec<Vec<Complex64>>) -> Self {
        let scale = grid.cell();
        let comps = values
            .into_iter()
            .map(|mut buf| {
                assert_eq!(buf.len(), grid.len());
                grid.fft_nd(&mut buf, false);
                buf.iter_mut().for_each(|c| *c *= scale);
                buf
            })
            .collect();
        Self::from_coeffs(grid, comps)
    }

    /// Samples `f(x, component)` at the grid points.
    pub fn from_fn<F: Fn(&[f64], usize) -> f64>(grid: &TorusGrid, m: usize, f: F) -> Self {
        let values: Vec<Vec<f64>> = (0..m)
            .map(|c| (0..grid.len()).map(|i| f(&grid.point(i), c)).collect())
            .collect();
        Self::from_real(grid, &values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.comps.len()
    }

    pub fn coeffs(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn coeffs_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn into_coeffs(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Complex grid values of one component.
    pub fn to_grid_complex(&self, c: usize) -> Vec<Complex64> {
        let mut buf = self.comps[c].clone();
        self.grid.fft_nd(&mut buf, true);
        let scale = (2.0 * PI).powi(-(self.grid.dim() as i32));
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    pub fn to_real_component(&self, c: usize) -> Vec<f64> {
        self.to_grid_complex(c).iter().map(|v| v.re).collect()
    }

    pub fn to_real(&self) -> Vec<Vec<f64>> {
        (0..self.components()).map(|c| self.to_real_component(c)).collect()
    }

    /// Largest imaginary part of the real-space view.
    pub fn max_imag(&self) -> f64 {
        (0..self.components())
            .flat_map(|c| self.to_grid_complex(c))
            .fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Largest violation of f̂(-k) = conj f̂(k).
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for comp in &self.comps {
            for (i, v) in comp.iter().enumerate() {
                worst = worst.max((comp[self.grid.mirror(i)] - v.conj()).norm());
            }
        }
        worst
    }

    pub fn zero_nyquist(&mut self) {
        for comp in self.comps.iter_mut() {
            for (i, v) in comp.iter_mut().enumerate() {
                if self.grid.is_nyquist(i) {
                    *v = ZERO;
                }
            }
        }
    }

    /// Projects onto real fields: f̂(k) ← (f̂(k) + conj f̂(-k))/2.
    pub fn symmetrize(&mut self) {
        for comp in self.comps.iter_mut() {
            let old = comp.clone();
            for (i, v) in comp.iter_mut().enumerate() {
                *v = 0.5 * (old[i] + old[self.grid.mirror(i)].conj());
            }
        }
        self.zero_nyquist();
    }

    /// Zeroes every mode outside the 2/3 mask.
    pub fn dealias(&mut self) {
        for comp in self.comps.iter_mut() {
            for (i, v) in comp.iter_mut().enumerate() {
                if !self.grid.dealias(i) {
                    *v = ZERO;
                }
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    fn check(&self, other: &TorusField) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        if self.components() != other.components() {
            return Err(SpectralError::ComponentMismatch {
                expected: self.components(),
                found: other.components(),
            });
        }
        Ok(())
    }

    /// self + a·other
    pub fn axpy(&mut self, a: f64, other: &TorusField) {
        self.check(other).expect("axpy on incompatible fields");
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (u, v) in x.iter_mut().zip(y) {
                *u += a * v;
            }
        }
    }

    pub fn add(&self, other: &TorusField) -> TorusField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &TorusField) -> TorusField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn scale(&self, a: f64) -> TorusField {
        let mut out = self.clone();
        out.scale_mut(a);
        out
    }

    pub fn scale_mut(&mut self, a: f64) {
        self.comps.iter_mut().flatten().for_each(|v| *v *= a);
    }

    /// Multiplies every component by the scalar multiplier `m(idx)`.
    pub fn apply_multiplier<F: Fn(usize) -> Complex64>(&self, m: F) -> TorusField {
        let mut out = self.clone();
        for comp in out.comps.iter_mut() {
            for (i, v) in comp.iter_mut().enumerate() {
                *v *= m(i);
            }
        }
        out.zero_nyquist();
        out
    }

    pub fn component(&self, c: usize) -> TorusField {
        TorusField {
            grid: self.grid.clone(),
            comps: vec![self.comps[c].clone()],
        }
    }

    pub fn stack(parts: &[&TorusField]) -> TorusField {
        let grid = parts[0].grid.clone();
        let comps = parts
            .iter()
            .flat_map(|p| {
                assert!(p.grid == grid);
                p.comps.iter().cloned()
            })
            .collect();
        TorusField { grid, comps }
    }

    /// Spectral partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> TorusField {
        let g = self.grid.clone();
        self.apply_multiplier(|i| Complex64::new(0.0, g.wave(i)[axis] as f64))
    }

    /// Gradient of a scalar field.
    pub fn gradient(&self) -> TorusField {
        assert_eq!(self.components(), 1);
        let parts: Vec<TorusField> = (0..self.grid.dim()).map(|a| self.derivative(a)).collect();
        TorusField::stack(&parts.iter().collect::<Vec<_>>())
    }

    /// Divergence of a d-component field.
    pub fn divergence(&self) -> TorusField {
        assert_eq!(self.components(), self.grid.dim());
        let mut out = TorusField::zeros(&self.grid, 1);
        for a in 0..self.grid.dim() {
            let d = self.component(a).derivative(a);
            out.axpy(1.0, &d);
        }
        out
    }

    /// Mean value of each component.
    pub fn mean(&self) -> Vec<f64> {
        let vol = (2.0 * PI).powi(self.grid.dim() as i32);
        self.comps.iter().map(|c| c[0].re / vol).collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Random real field: i.i.d. Gaussian coefficients on |k| ≤ N/4,
    /// Hermitian-symmetrized and normalized to unit H^s norm.
    pub fn random_band_limited<R: Rng + ?Sized>(
        grid: &TorusGrid,
        m: usize,
        s: f64,
        rng: &mut R,
    ) -> TorusField {
        let band = (grid.n() as f64 / 4.0).powi(2);
        let comps = (0..m)
            .map(|_| {
                (0..grid.len())
                    .map(|i| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        if grid.k2(i) <= band {
                            Complex64::new(re, im)
                        } else {
                            ZERO
                        }
                    })
                    .collect()
            })
            .collect();
        let mut f = TorusField::from_coeffs(grid, comps);
        f.symmetrize();
        let norm = crate::sobolev_norm(s, &f);
        f.scale(1.0 / norm)
    }
}

/// Pointwise product of two scalar fields, dealiased.
pub fn product(a: &TorusField, b: &TorusField) -> TorusField {
    let g = a.grid();
    let x = a.to_grid_complex(0);
    let y = b.to_grid_complex(0);
    let vals: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p.re * q.re).collect();
    TorusField::from_real(g, &[vals]).dealiased()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_real() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = TorusField::from_fn(&g, 1, |x, _| (x[0]).sin() + 0.3 * (2.0 * x[1]).cos());
        let back = f.to_real_component(0);
        for (i, v) in back.iter().enumerate() {
            let x = g.point(i);
            assert!((v - (x[0].sin() + 0.3 * (2.0 * x[1]).cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn single_mode_coefficient() {
        // ∫ cos(x) e^{-ix} dx over [0,2π) = π
        let g = TorusGrid::new(1, 16).unwrap();
        let f = TorusField::from_fn(&g, 1, |x, _| x[0].cos());
        let c = f.coeffs(0)[g.index_of(&[1])];
        assert!((c - Complex64::new(PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn random_fields_are_real() {
        let g = TorusGrid::new(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = TorusField::random_band_limited(&g, 2, 1.0, &mut rng);
        assert!(f.max_imag() < 1e-12);
        assert!(f.hermitian_defect() < 1e-14);
        assert!((crate::sobolev_norm(1.0, &f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_sine() {
        let g = TorusGrid::new(1, 16).unwrap();
        let f = TorusField::from_fn(&g, 1, |x, _| (2.0 * x[0]).sin());
        let d = f.derivative(0).to_real_component(0);
        for (i, v) in d.iter().enumerate() {
            let x = g.point(i)[0];
            assert!((v - 2.0 * (2.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let g = TorusGrid::new(1, 32).unwrap();
        let a = TorusField::from_fn(&g, 1, |x, _| x[0].sin());
        let b = TorusField::from_fn(&g, 1, |x, _| (2.0 * x[0]).cos());
        let p = product(&a, &b).to_real_component(0);
        for (i, v) in p.iter().enumerate() {
            let x = g.point(i)[0];
            assert!((v - x.sin() * (2.0 * x).cos()).abs() < 1e-12);
        }
    }
}
