use nalgebra::DMatrix;
use spectral_core::{Complex64, TorusField, TorusGrid};

use crate::{PsdoError, PsdoOperator};

pub const DENSE_CAP: usize = 4096;

/// Matrix of an operator on the truncated Fourier basis (Nyquist modes
/// excluded). `basis[j] = (component, mode index)`.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub grid: TorusGrid,
    pub components: usize,
    pub basis: Vec<(usize, usize)>,
    pub mat: DMatrix<Complex64>,
}

pub fn basis_for(grid: &TorusGrid, m: usize) -> Vec<(usize, usize)> {
    (0..m)
        .flat_map(|c| (0..grid.len()).filter(|&i| !grid.is_nyquist(i)).map(move |i| (c, i)))
        .collect()
}

/// Dense matrix of any linear map on `m`-component fields.
pub fn dense_of<F>(grid: &TorusGrid, m: usize, op: F) -> Result<DenseOperator, PsdoError>
where
    F: Fn(&TorusField) -> Result<TorusField, PsdoError>,
{
    if grid.len() * m > DENSE_CAP {
        return Err(PsdoError::TooLarge(grid.len() * m));
    }
    let basis = basis_for(grid, m);
    let nb = basis.len();
    let mut mat = DMatrix::<Complex64>::zeros(nb, nb);
    for (j, &(c, i)) in basis.iter().enumerate() {
        let mut e = TorusField::zeros(grid, m);
        e.coeffs_mut(c)[i] = Complex64::new(1.0, 0.0);
        let col = op(&e)?;
        for (r, &(cr, ir)) in basis.iter().enumerate() {
            mat[(r, j)] = col.coeffs(cr)[ir];
        }
    }
    Ok(DenseOperator {
        grid: grid.clone(),
        components: m,
        basis,
        mat,
    })
}

pub fn dense_matrix(q: &PsdoOperator, grid: &TorusGrid, m: usize) -> Result<DenseOperator, PsdoError> {
    dense_of(grid, m, |f| q.apply(f))
}

impl DenseOperator {
    /// Diagonal Sobolev weights (1+|k|²)^{s/2} over the basis.
    pub fn weights(&self, s: f64) -> Vec<f64> {
        self.basis
            .iter()
            .map(|&(_, i)| (1.0 + self.grid.k2(i)).powf(s / 2.0))
            .collect()
    }

    /// Weighted matrix D_θ A D_s^{-1}, whose 2-norm is the H^s → H^θ norm.
    pub fn weighted(&self, s: f64, theta: f64) -> DMatrix<Complex64> {
        let ws = self.weights(s);
        let wt = self.weights(theta);
        let mut b = self.mat.clone();
        for j in 0..b.ncols() {
            for r in 0..b.nrows() {
                b[(r, j)] *= wt[r] / ws[j];
            }
        }
        b
    }

    /// ‖A‖ from H^s to H^θ.
    pub fn operator_norm(&self, s: f64, theta: f64) -> f64 {
        spectral_norm(&self.weighted(s, theta))
    }

    /// sup |⟨Af, f⟩_{H^s}| / ‖f‖²_{H^s}: spectral radius of the Hermitian part.
    pub fn symmetric_sup(&self, s: f64) -> f64 {
        let b = self.weighted(s, s);
        let h = (&b + b.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = h.symmetric_eigenvalues();
        eig.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn compose(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            grid: self.grid.clone(),
            components: self.components,
            basis: self.basis.clone(),
            mat: &self.mat * &other.mat,
        }
    }

    pub fn minus(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            grid: self.grid.clone(),
            components: self.components,
            basis: self.basis.clone(),
            mat: &self.mat - &other.mat,
        }
    }

    /// Bessel potential 𝒟^μ on the same basis.
    pub fn bessel(&self, mu: f64) -> DenseOperator {
        let w = self.weights(mu);
        let mut mat = DMatrix::<Complex64>::zeros(w.len(), w.len());
        for (i, v) in w.iter().enumerate() {
            mat[(i, i)] = Complex64::new(*v, 0.0);
        }
        DenseOperator {
            grid: self.grid.clone(),
            components: self.components,
            basis: self.basis.clone(),
            mat,
        }
    }

    /// Commutator [self, other].
    pub fn commutator(&self, other: &DenseOperator) -> DenseOperator {
        self.compose(other).minus(&other.compose(self))
    }
}

pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0f64, |a, v| a.max(*v))
}

/// Exact sups of both cancellation ratios of `q` on the truncated basis.
pub fn cancel_exact(q: &PsdoOperator, grid: &TorusGrid, m: usize, s: f64) -> Result<(f64, f64), PsdoError> {
    let a = dense_matrix(q, grid, m)?;
    let w: Vec<f64> = a.weights(s);
    let nb = w.len();
    // B = D A D^{-1}; forms become f^H (B + B^H)/2 f and f^H ((B² + B²^H)/2 + B^H B) f
    let b = a.weighted(s, s);
    let half = Complex64::new(0.5, 0.0);
    let h1 = (&b + b.adjoint()) * half;
    let b2 = &b * &b;
    let h2 = (&b2 + b2.adjoint()) * half + b.adjoint() * &b;
    let rad = |h: DMatrix<Complex64>| {
        h.symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    };
    debug_assert_eq!(nb, b.nrows());
    Ok((rad(h1), rad(h2)))
}
