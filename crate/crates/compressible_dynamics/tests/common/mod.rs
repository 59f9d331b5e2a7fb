//! Independent pseudo-spectral solver for the 1-D barotropic system in the
//! original variables ρ_t + (ρu)_x = 0, u_t + u u_x + P′(ρ)/ρ·ρ_x = 0 with
//! P = aρ³.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

pub struct Reference1d {
    pub n: usize,
    pub a: f64,
}

impl Reference1d {
    fn wave(&self, i: usize) -> f64 {
        let n = self.n as i64;
        let k = if (i as i64) <= n / 2 { i as i64 } else { i as i64 - n };
        if 2 * k.abs() == n {
            0.0
        } else {
            k as f64
        }
    }

    fn dx_and_filter(&self, v: &[f64], derive: bool) -> Vec<f64> {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(self.n);
        let inv = planner.plan_fft_inverse(self.n);
        let mut buf: Vec<Complex64> = v.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        fwd.process(&mut buf);
        let lim = (self.n / 3) as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            let k = self.wave(i);
            let keep = k.abs() <= lim && !(i == self.n / 2);
            *c = if !keep {
                Complex64::new(0.0, 0.0)
            } else if derive {
                *c * Complex64::new(0.0, k)
            } else {
                *c
            };
        }
        inv.process(&mut buf);
        buf.iter().map(|c| c.re / self.n as f64).collect()
    }

    fn rhs(&self, rho: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let flux: Vec<f64> = rho.iter().zip(u).map(|(r, v)| r * v).collect();
        let drho = self.dx_and_filter(&flux, true);
        let ux = self.dx_and_filter(u, true);
        let rx = self.dx_and_filter(rho, true);
        let mut fr = Vec::with_capacity(self.n);
        let mut fu = Vec::with_capacity(self.n);
        for i in 0..self.n {
            fr.push(-drho[i]);
            fu.push(-(u[i] * ux[i] + 3.0 * self.a * rho[i] * rx[i]));
        }
        (self.dx_and_filter(&fr, false), self.dx_and_filter(&fu, false))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| 2.0 * PI * i as f64 / self.n as f64).collect()
    }

    /// RK4 from (ρ₀, u₀) to time t.
    pub fn solve(&self, rho0: &[f64], u0: &[f64], t: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
        let mut rho = self.dx_and_filter(rho0, false);
        let mut u = self.dx_and_filter(u0, false);
        let steps = (t / dt).round() as usize;
        let h = t / steps as f64;
        let comb = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, y)| x + c * y).collect() };
        for _ in 0..steps {
            let (k1r, k1u) = self.rhs(&rho, &u);
            let (k2r, k2u) = self.rhs(&comb(&rho, &k1r, h / 2.0), &comb(&u, &k1u, h / 2.0));
            let (k3r, k3u) = self.rhs(&comb(&rho, &k2r, h / 2.0), &comb(&u, &k2u, h / 2.0));
            let (k4r, k4u) = self.rhs(&comb(&rho, &k3r, h), &comb(&u, &k3u, h));
            for i in 0..self.n {
                rho[i] += h / 6.0 * (k1r[i] + 2.0 * k2r[i] + 2.0 * k3r[i] + k4r[i]);
                u[i] += h / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
            }
        }
        (rho, u)
    }
}
