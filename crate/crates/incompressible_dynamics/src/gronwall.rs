use rand::Rng;

#[derive(Clone, Debug)]
pub struct GronwallReport {
    pub holds: bool,
    /// Hypotheses f₂ ≤ f₁ and f₁′ ≤ −q f₂ hold on the samples.
    pub preconditions: bool,
    pub problems: Vec<String>,
    /// min over sample times of rhs − lhs.
    pub worst_margin: f64,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

/// Checks ∫₀ᵗ q f₂ ≤ f₁(0)(1 − e^{−∫₀ᵗ q}) at every sample time (trapezoid rule).
/// Precondition failures are reported, not asserted.
pub fn gronwall_verify(t: &[f64], f1: &[f64], f2: &[f64], q: &[f64], tol: f64) -> GronwallReport {
    let n = t.len();
    let mut problems = Vec::new();
    if f1.len() != n || f2.len() != n || q.len() != n || n == 0 {
        return GronwallReport {
            holds: false,
            preconditions: false,
            problems: vec!["series lengths differ or are empty".into()],
            worst_margin: f64::NEG_INFINITY,
            lhs: Vec::new(),
            rhs: Vec::new(),
        };
    }
    for i in 0..n {
        if f2[i] > f1[i] + tol || f1[i] < 0.0 || f2[i] < 0.0 || q[i] < 0.0 {
            problems.push(format!("sample {i}: need 0 ≤ f2 ≤ f1 and q ≥ 0"));
        }
    }
    let mut lhs = vec![0.0; n];
    let mut iq = vec![0.0; n];
    for i in 1..n {
        let h = t[i] - t[i - 1];
        let inc = 0.5 * h * (q[i] * f2[i] + q[i - 1] * f2[i - 1]);
        lhs[i] = lhs[i - 1] + inc;
        iq[i] = iq[i - 1] + 0.5 * h * (q[i] + q[i - 1]);
        if f1[i] - f1[i - 1] > -inc + tol {
            problems.push(format!("interval {i}: f1 decreases less than ∫q f2"));
        }
    }
    let rhs: Vec<f64> = iq.iter().map(|a| f1[0] * (1.0 - (-a).exp())).collect();
    let worst = lhs.iter().zip(&rhs).map(|(l, r)| r - l).fold(f64::INFINITY, f64::min);
    GronwallReport {
        holds: worst >= -tol,
        preconditions: problems.is_empty(),
        problems,
        worst_margin: worst,
        lhs,
        rhs,
    }
}

/// Admissible triple from f₁′ = −q f₂ − s f₁ with f₂ = κ f₁, κ ∈ (0, 1].
pub fn generate_admissible<R: Rng + ?Sized>(rng: &mut R, t_final: f64, dt: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = (t_final / dt).round() as usize + 1;
    let f0 = rng.random_range(0.1..10.0);
    let (qa, qb, qw) = (rng.random_range(0.0..2.0), rng.random_range(0.0..1.0), rng.random_range(0.5..4.0));
    let (ka, kw) = (rng.random_range(0.1..0.9), rng.random_range(0.5..4.0));
    let slack = rng.random_range(0.0..0.5);
    let q = |t: f64| qa + qb * (1.0 + (qw * t).sin());
    let kappa = |t: f64| ka + (1.0 - ka) * 0.5 * (1.0 + (kw * t).cos());
    let rate = |t: f64| q(t) * kappa(t) + slack;
    let mut ts = Vec::with_capacity(n);
    let mut f1 = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    let mut qs = Vec::with_capacity(n);
    let mut expo = 0.0;
    for i in 0..n {
        let t = i as f64 * dt;
        if i > 0 {
            // Simpson on the exponent keeps f₁ consistent with its derivative
            let a = t - dt;
            expo += dt / 6.0 * (rate(a) + 4.0 * rate(a + dt / 2.0) + rate(t));
        }
        let v = f0 * (-expo).exp();
        ts.push(t);
        f1.push(v);
        f2.push(kappa(t) * v);
        qs.push(q(t));
    }
    (ts, f1, f2, qs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_f2() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let f1 = vec![1.0; 11];
        let rep = gronwall_verify(&t, &f1, &vec![0.0; 11], &vec![1.0; 11], 1e-12);
        assert!(rep.holds && rep.preconditions);
        assert!(rep.lhs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn reports_bad_preconditions() {
        let t = [0.0, 1.0];
        let rep = gronwall_verify(&t, &[1.0, 1.0], &[2.0, 2.0], &[1.0, 1.0], 1e-9);
        assert!(!rep.preconditions);
        assert!(!rep.problems.is_empty());
    }
}
