use spectral_core::TorusField;

use crate::CompressibleError;

const SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxPrincipleSample {
    pub time: f64,
    pub min: f64,
    pub max: f64,
    pub lower: f64,
    pub upper: f64,
    /// ∫₀ᵗ C‖div v‖_{L^∞}
    pub integral: f64,
}

#[derive(Clone, Debug)]
pub struct MaxPrincipleReport {
    pub samples: Vec<MaxPrincipleSample>,
    /// Smallest distance to either envelope over all points and times.
    pub worst_margin: f64,
    pub final_field: TorusField,
}

fn sup_abs(f: &TorusField) -> f64 {
    f.to_real_component(0).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn rhs<V, T>(v: &V, vartheta: &T, t: f64, f: &TorusField) -> (TorusField, f64)
where
    V: Fn(f64) -> TorusField,
    T: Fn(f64) -> f64,
{
    let vel = v(t);
    let div = vel.divergence();
    let dv = div.to_real_component(0);
    let fv = f.to_real_component(0);
    let grad = f.gradient().to_real();
    let vv = vel.to_real();
    let out: Vec<f64> = (0..fv.len())
        .map(|i| {
            let adv: f64 = (0..vv.len()).map(|k| vv[k][i] * grad[k][i]).sum();
            -(vartheta(fv[i]) * dv[i] + adv)
        })
        .collect();
    (TorusField::from_real(f.grid(), &[out]).dealiased(), sup_abs(&div))
}

/// Solves ∂ₜf + ϑ(f)·div v + v·∇f = 0 and checks the exponential envelope
/// at every grid point after every step.
pub fn transport_max_principle<V, T>(
    v: V,
    vartheta: T,
    c: f64,
    f0: &TorusField,
    t_final: f64,
    dt: f64,
) -> Result<MaxPrincipleReport, CompressibleError>
where
    V: Fn(f64) -> TorusField,
    T: Fn(f64) -> f64,
{
    if f0.components() != 1 || !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(CompressibleError::Config("need a scalar f0, dt > 0 and T ≥ 0".into()));
    }
    let vals = f0.to_real_component(0);
    let a0 = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let b0 = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let positive = if a0 > 0.0 {
        true
    } else if b0 < 0.0 {
        false
    } else {
        return Err(CompressibleError::Config(format!(
            "initial data must have one sign, found range [{a0}, {b0}]"
        )));
    };
    let envelope = |i: f64| {
        if positive {
            (a0 * (-i).exp(), b0 * i.exp())
        } else {
            (a0 * i.exp(), b0 * (-i).exp())
        }
    };
    let grid = f0.grid().clone();
    let mut f = f0.clone();
    let mut t = 0.0;
    let mut integral = 0.0;
    let mut samples = vec![MaxPrincipleSample {
        time: 0.0,
        min: a0,
        max: b0,
        lower: a0,
        upper: b0,
        integral: 0.0,
    }];
    let mut worst = f64::INFINITY;
    while t < t_final - 1e-12 {
        let h = dt.min(t_final - t);
        let (k1, g0) = rhs(&v, &vartheta, t, &f);
        let mut s = f.clone();
        s.axpy(h / 2.0, &k1);
        let (k2, gm) = rhs(&v, &vartheta, t + h / 2.0, &s);
        let mut s = f.clone();
        s.axpy(h / 2.0, &k2);
        let (k3, _) = rhs(&v, &vartheta, t + h / 2.0, &s);
        let mut s = f.clone();
        s.axpy(h, &k3);
        let (k4, g1) = rhs(&v, &vartheta, t + h, &s);
        f.axpy(h / 6.0, &k1);
        f.axpy(h / 3.0, &k2);
        f.axpy(h / 3.0, &k3);
        f.axpy(h / 6.0, &k4);
        t += h;
        integral += c * h / 6.0 * (g0 + 4.0 * gm + g1);

        let (lo, hi) = envelope(integral);
        let vals = f.to_real_component(0);
        let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, &x) in vals.iter().enumerate() {
            if !x.is_finite() || x < lo - SLACK || x > hi + SLACK {
                let bound = if x < lo { lo } else { hi };
                return Err(CompressibleError::Violation {
                    time: t,
                    point: grid.point(i),
                    value: x,
                    bound,
                });
            }
            worst = worst.min(x - lo).min(hi - x);
            mn = mn.min(x);
            mx = mx.max(x);
        }
        samples.push(MaxPrincipleSample {
            time: t,
            min: mn,
            max: mx,
            lower: lo,
            upper: hi,
            integral,
        });
    }
    Ok(MaxPrincipleReport {
        samples,
        worst_margin: worst,
        final_field: f,
    })
}
