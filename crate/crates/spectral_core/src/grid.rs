use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::SpectralError;

struct GridData {
    dim: usize,
    n: usize,
    // per mode, flattened row-major with axis 0 slowest
    waves: Vec<[i64; 3]>,
    k2: Vec<f64>,
    mask: Vec<bool>,
    nyquist: Vec<bool>,
    mirror: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform grid on the torus [0, 2π)^d with N points per axis.
#[derive(Clone)]
pub struct TorusGrid {
    data: Arc<GridData>,
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.data.dim == other.data.dim && self.data.n == other.data.n
    }
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusGrid(d={}, N={})", self.data.dim, self.data.n)
    }
}

/// Signed wavenumber of FFT index `i` on an axis of length `n`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self, SpectralError> {
        if !(1..=3).contains(&dim) {
            return Err(SpectralError::BadDimension(dim));
        }
        if n % 2 != 0 || n < 4 {
            return Err(SpectralError::BadResolution(n));
        }
        let total = n.pow(dim as u32);
        let cut = (n / 3) as i64;
        let half = (n / 2) as i64;
        let mut waves = Vec::with_capacity(total);
        let mut k2 = Vec::with_capacity(total);
        let mut mask = Vec::with_capacity(total);
        let mut nyquist = Vec::with_capacity(total);
        let mut mirror = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut k = [0i64; 3];
            let mut mi = 0usize;
            for a in (0..dim).rev() {
                let i = rem % n;
                rem /= n;
                k[a] = wavenumber(i, n);
                let stride = n.pow((dim - 1 - a) as u32);
                mi += ((n - i) % n) * stride;
            }
            let kk: i64 = k.iter().map(|v| v * v).sum();
            waves.push(k);
            k2.push(kk as f64);
            mask.push(k[..dim].iter().all(|v| v.abs() <= cut));
            nyquist.push(k[..dim].iter().any(|v| *v == half));
            mirror.push(mi);
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(TorusGrid {
            data: Arc::new(GridData {
                dim,
                n,
                waves,
                k2,
                mask,
                nyquist,
                mirror,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.data.dim
    }

    pub fn n(&self) -> usize {
        self.data.n
    }

    /// Number of grid points (equivalently, Fourier modes).
    pub fn len(&self) -> usize {
        self.data.waves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.waves.is_empty()
    }

    pub fn wave(&self, idx: usize) -> &[i64] {
        &self.data.waves[idx][..self.data.dim]
    }

    pub fn k2(&self, idx: usize) -> f64 {
        self.data.k2[idx]
    }

    pub fn k2_all(&self) -> &[f64] {
        &self.data.k2
    }

    pub fn dealias(&self, idx: usize) -> bool {
        self.data.mask[idx]
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.data.nyquist[idx]
    }

    /// Index of the mode -k.
    pub fn mirror(&self, idx: usize) -> usize {
        self.data.mirror[idx]
    }

    pub fn unmasked_count(&self) -> usize {
        self.data.mask.iter().filter(|m| **m).count()
    }

    /// Coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let n = self.data.n;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut x = vec![0.0; self.data.dim];
        let mut rem = idx;
        for a in (0..self.data.dim).rev() {
            x[a] = (rem % n) as f64 * h;
            rem /= n;
        }
        x
    }

    /// Index of the mode with wavenumber `k` (components reduced mod N).
    pub fn index_of(&self, k: &[i64]) -> usize {
        let n = self.data.n as i64;
        k.iter()
            .take(self.data.dim)
            .fold(0usize, |acc, v| acc * self.data.n + v.rem_euclid(n) as usize)
    }

    /// Volume of one grid cell.
    pub fn cell(&self) -> f64 {
        (2.0 * std::f64::consts::PI / self.data.n as f64).powi(self.data.dim as i32)
    }

    pub(crate) fn fft_nd(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.data.n;
        let dim = self.data.dim;
        let plan = if inverse { &self.data.inverse } else { &self.data.forward };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for a in 0..dim {
            let stride = n.pow((dim - 1 - a) as u32);
            let block = stride * n;
            for start in 0..buf.len() / block {
                for off in 0..stride {
                    let base = start * block + off;
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = buf[base + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        buf[base + i * stride] = *v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dim_eight() {
        let g = TorusGrid::new(1, 8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wave(i)[0]).collect();
        let mut sorted = ks.clone();
        sorted.sort();
        assert_eq!(sorted, vec![-3, -2, -1, 0, 1, 2, 3, 4]);
        let kept: Vec<i64> = (0..8).filter(|&i| g.dealias(i)).map(|i| g.wave(i)[0]).collect();
        assert!(kept.iter().all(|k| k.abs() <= 2));
        assert_eq!(kept.len(), 5);
    }

    #[test]
    fn two_dim_four() {
        let g = TorusGrid::new(2, 4).unwrap();
        assert_eq!(g.len(), 16);
        // enumerate the lattice {-1,0,1,2}^2 and keep |k_i| <= 1
        let mut expect = 0;
        for a in -1i64..=2 {
            for b in -1i64..=2 {
                if a.abs() <= 1 && b.abs() <= 1 {
                    expect += 1;
                }
            }
        }
        // N/3 = 1 for N = 4
        assert_eq!(g.unmasked_count(), expect);
        assert_eq!(expect, 9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TorusGrid::new(1, 3).is_err());
        assert!(TorusGrid::new(4, 8).is_err());
        assert!(TorusGrid::new(1, 2).is_err());
    }

    #[test]
    fn mirror_and_index() {
        let g = TorusGrid::new(3, 6).unwrap();
        for idx in 0..g.len() {
            let k = g.wave(idx).to_vec();
            assert_eq!(g.index_of(&k), idx);
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            assert_eq!(g.mirror(idx), g.index_of(&neg));
        }
    }
}
