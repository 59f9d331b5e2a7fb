use std::io::Write;

use pressure_laws::*;
use proptest::prelude::*;
use spectral_core::{TorusField, TorusGrid};

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn all_laws() -> Vec<PressureLaw> {
    vec![
        PressureLaw::gamma(2.0, 5.0 / 3.0).unwrap(),
        PressureLaw::isothermal(1.5).unwrap(),
        PressureLaw::chaplygin(1.0, 1.0).unwrap(),
        PressureLaw::chaplygin(2.0, 0.75).unwrap(),
        PressureLaw::piecewise_example(),
        PressureLaw::white_dwarf(1.0, 1.0, 1.0).unwrap(),
        PressureLaw::soft_vacuum(),
        PressureLaw::custom(gamma_table(2.0, 1.4, 1.0)),
    ]
}

fn gamma_table(a: f64, g: f64, perturb: f64) -> Tabulated {
    let rows: Vec<(f64, f64, f64)> = log_grid(1e-3, 1e3, 241)
        .into_iter()
        .map(|r| (r, a * r.powf(g), perturb * a * g * r.powf(g - 1.0)))
        .collect();
    Tabulated::from_rows(&rows).unwrap()
}

#[test]
fn gamma_example_values() {
    let tr = build_transform(PressureLaw::gamma(2.0, 5.0 / 3.0).unwrap()).unwrap();
    for rho in [0.001, 1.0, 27.0] {
        assert!((tr.r(rho) - 5.4772 * rho.cbrt()).abs() < 1e-4 * rho.cbrt());
    }
    assert_eq!((tr.r0, tr.r_inf), (0.0, f64::INFINITY));
    assert_eq!(tr.mode, SoundMode::GeneralSound);
}

#[test]
fn chaplygin_example_values() {
    let tr = build_transform(PressureLaw::chaplygin(1.0, 1.0).unwrap()).unwrap();
    for rho in [0.1, 1.0, 7.0] {
        assert!((tr.r(rho) + 1.0 / rho).abs() < 1e-14);
    }
    for x in [-5.0, -1.0, -0.01] {
        assert!((tr.theta(x).unwrap() + x).abs() < 1e-14);
    }
    assert_eq!((tr.r0, tr.r_inf), (f64::NEG_INFINITY, 0.0));
    assert!((tr.lambda(2.0) + 2.0).abs() < 1e-15);
}

#[test]
fn isothermal_example_values() {
    let tr = build_transform(PressureLaw::gamma(1.0, 1.0).unwrap()).unwrap();
    assert!((tr.r(std::f64::consts::E) - 1.0).abs() < 1e-15);
    for y in [-30.0, 0.0, 4.0] {
        assert_eq!(tr.theta(y).unwrap(), 1.0);
    }
    assert_eq!(tr.mode, SoundMode::ConstantSound);
    assert_eq!((tr.r0, tr.r_inf), (f64::NEG_INFINITY, f64::INFINITY));
    // Θ ≡ √P(1)
    assert_eq!(tr.theta(0.3).unwrap(), tr.law.pressure(1.0).sqrt());
}

#[test]
fn round_trip_and_monotone() {
    let grid = log_grid(1e-6, 1e6, 121);
    for law in all_laws() {
        let name = law.name();
        let tr = build_transform(law).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for &rho in &grid {
            let y = tr.r(rho);
            assert!(y > prev, "{name}: r not increasing at {rho}");
            prev = y;
            assert!(tr.r_prime(rho) > 0.0);
            let back = tr.r_inv(y).unwrap();
            assert!((back - rho).abs() <= 1e-9 * rho, "{name}: {rho} -> {y} -> {back}");
        }
    }
}

#[test]
fn r_inv_rejects_outside_interval() {
    let tr = build_transform(PressureLaw::chaplygin(1.0, 1.0).unwrap()).unwrap();
    assert!(matches!(tr.r_inv(0.5), Err(PressureError::OutOfRange { .. })));
    let tr = build_transform(PressureLaw::white_dwarf(1.0, 1.0, 1.0).unwrap()).unwrap();
    assert!(tr.r_inv(-0.1).is_err());
}

#[test]
fn extension_restricts_to_theta_and_vanishes_at_zero() {
    for law in all_laws() {
        let name = law.name();
        let tr = build_transform(law).unwrap();
        if tr.mode == SoundMode::ConstantSound {
            continue;
        }
        assert!(tr.lambda(0.0).abs() < 1e-12, "{name}");
        for rho in log_grid(1e-4, 1e4, 17) {
            let y = tr.r(rho);
            let t = tr.theta(y).unwrap();
            assert!((tr.lambda(y) - t).abs() <= 1e-9 * t.abs().max(1.0), "{name}");
        }
        assert!(tr.lambda_lip.is_finite() && tr.lambda_lip > 0.0);
    }
}

#[test]
fn structural_identity_for_analytic_laws() {
    let grid = log_grid(1e-3, 1e3, 97);
    for law in [
        PressureLaw::gamma(2.0, 5.0 / 3.0).unwrap(),
        PressureLaw::isothermal(3.0).unwrap(),
        PressureLaw::chaplygin(1.0, 0.8).unwrap(),
        PressureLaw::soft_vacuum(),
        PressureLaw::white_dwarf(1.0, 1.0, 1.0).unwrap(),
    ] {
        let tr = build_transform(law.clone()).unwrap();
        let res = verify_structural_identity(&law, &tr, &grid);
        assert!(res < 1e-10, "{}: {res}", law.name());
    }
    // piecewise: closed r′ on pure segments, differenced across the cubic transitions
    let law = PressureLaw::piecewise_example();
    let tr = build_transform(law.clone()).unwrap();
    let pure: Vec<f64> = grid.iter().copied().filter(|r| !(1.0..2.0).contains(r) && !(3.0..4.0).contains(r)).collect();
    assert!(verify_structural_identity(&law, &tr, &pure) < 1e-10);
    let trans: Vec<f64> = (1..40).flat_map(|i| [1.0 + i as f64 / 40.0, 3.0 + i as f64 / 40.0]).collect();
    assert!(verify_structural_identity(&law, &tr, &trans) < 1e-8);
}

#[test]
fn white_dwarf_quadrature_against_refined_oracle() {
    let (c1, c2, c3) = (1.0, 1.0, 1.0);
    let law = PressureLaw::white_dwarf(c1, c2, c3).unwrap();
    let tr = build_transform(law.clone()).unwrap();
    let grid = log_grid(1e-3, 1e3, 61);
    assert!(structural_residual_differenced(&law, &tr, &grid) < 1e-6);
    // r = K∫₀^X (1+x²)^{-1/4} dx with X = c₂ρ^{1/3}/√c₃, integrated much more tightly
    let k = (3.0 * c1 * c2 * c2 * c2 * c3.sqrt()).sqrt();
    for &rho in &grid {
        let x = c2 * rho.cbrt() / c3.sqrt();
        let oracle = k * integrate(|t: f64| (1.0 + t * t).powf(-0.25), 0.0, x, 1e-15);
        assert!((tr.r(rho) - oracle).abs() < 1e-9 * oracle.max(1.0), "{rho}");
    }
}

#[test]
fn custom_law_identity_and_negative_control() {
    let grid = log_grid(2e-3, 5e2, 50);
    let good = PressureLaw::custom(gamma_table(2.0, 1.4, 1.0));
    let tr = build_transform(good.clone()).unwrap();
    let res = verify_structural_identity(&good, &tr, &grid);
    assert!(res < 1e-4, "{res}");
    let bad = PressureLaw::custom(gamma_table(2.0, 1.4, 1.01));
    let tr = build_transform(bad.clone()).unwrap();
    let res = verify_structural_identity(&bad, &tr, &grid);
    assert!(res > 5e-3 && res < 3e-2, "{res}");
    // the tabulated γ-law keeps its closed-form transform
    let exact = build_transform(PressureLaw::gamma(2.0, 1.4).unwrap()).unwrap();
    let tr = build_transform(good).unwrap();
    assert_eq!(tr.r0, 0.0);
    for &rho in &grid {
        assert!((tr.r(rho) - exact.r(rho)).abs() < 1e-5 * exact.r(rho), "{rho}");
    }
}

#[test]
fn custom_law_from_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "rho,P,Pprime").unwrap();
    writeln!(f, "# isothermal a=4").unwrap();
    for rho in log_grid(0.01, 100.0, 41) {
        writeln!(f, "{rho},{},{}", 4.0 * rho, 4.0).unwrap();
    }
    f.flush().unwrap();
    let name = format!("custom:{}", f.path().display());
    let law = PressureLaw::from_name(&name, &[]).unwrap();
    let tr = build_transform(law).unwrap();
    // P′ = 4: r = 2 log ρ + const, unbounded below
    assert_eq!(tr.r0, f64::NEG_INFINITY);
    assert!((tr.r(10.0) - tr.r(1.0) - 2.0 * 10f64.ln()).abs() < 1e-8);
    assert!(PressureLaw::from_name("custom:/nonexistent/table.csv", &[]).is_err());
}

#[test]
fn acoustics_parameter() {
    let g = PressureLaw::gamma(2.0, 5.0 / 3.0).unwrap();
    let tr = build_transform(g.clone()).unwrap();
    for rho in [1e-3, 0.5, 20.0] {
        assert!((theta_prime_acoustics(&g, &tr, rho).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }
    let c = PressureLaw::chaplygin(1.0, 1.0).unwrap();
    let tr = build_transform(c.clone()).unwrap();
    for rho in [0.01, 1.0, 100.0] {
        assert!((theta_prime_acoustics(&c, &tr, rho).unwrap() + 1.0).abs() < 1e-12);
    }
    let w = PressureLaw::white_dwarf(1.0, 1.0, 1.0).unwrap();
    let tr = build_transform(w.clone()).unwrap();
    let small = theta_prime_acoustics(&w, &tr, 1e-9).unwrap();
    assert!((small - 1.0 / 3.0).abs() < 1e-6);
    // large-density limit of ½ρP″/P′ is 1/6
    assert!((theta_prime_acoustics(&w, &tr, 1e12).unwrap() - 1.0 / 6.0).abs() < 1e-3);
    for law in [PressureLaw::piecewise_example(), PressureLaw::soft_vacuum()] {
        let tr = build_transform(law.clone()).unwrap();
        for rho in [0.01, 0.3, 0.55, 1.5, 2.5, 3.5, 10.0] {
            theta_prime_acoustics(&law, &tr, rho).unwrap();
        }
    }
    assert!(theta_prime_acoustics(&g, &build_transform(g.clone()).unwrap(), 0.0).is_err());
}

#[test]
fn white_dwarf_lipschitz_constant() {
    let tr = build_transform(PressureLaw::white_dwarf(1.0, 1.0, 1.0).unwrap()).unwrap();
    assert!(tr.lambda_lip <= 1.0 / 3.0 + 1e-6);
    assert!(tr.lambda_lip > 1.0 / 3.0 - 1e-3);
    // odd extension
    for y in [0.05, 0.7, 3.0] {
        assert!((tr.lambda(-y) + tr.lambda(y)).abs() < 1e-14);
    }
}

#[test]
fn piecewise_theta_on_pure_segments() {
    let law = PressureLaw::piecewise_example();
    let tr = build_transform(law).unwrap();
    // first segment: Θ = ((γ₁−1)/2)ϱ exactly
    for rho in [0.01, 0.3, 0.9] {
        let y = tr.r(rho);
        assert!((tr.theta(y).unwrap() - y / 3.0).abs() < 1e-10);
    }
    // γ₂ = 1 on [2,3]: Θ = √a₂
    for rho in [2.1, 2.5, 2.9] {
        assert!((tr.theta(tr.r(rho)).unwrap() - 3f64.sqrt()).abs() < 1e-9);
    }
    // last segment γ₃ = 3/2: Θ affine in ϱ with slope 1/4
    let (y1, y2) = (tr.r(5.0), tr.r(50.0));
    let slope = (tr.theta(y2).unwrap() - tr.theta(y1).unwrap()) / (y2 - y1);
    assert!((slope - 0.25).abs() < 1e-9);
    // extension below zero continues the first segment
    assert!((tr.lambda(-0.6) + 0.2).abs() < 1e-15);
}

#[test]
fn soft_vacuum_closed_forms() {
    let tr = build_transform(PressureLaw::soft_vacuum()).unwrap();
    for rho in log_grid(1e-8, 0.49, 40) {
        assert!((tr.r(rho) + 1.0 / rho.ln()).abs() < 1e-8);
    }
    let top = 1.0 / 2f64.ln();
    for i in 1..40 {
        let y = top * i as f64 / 40.0;
        assert!((tr.theta(y).unwrap() - y * y).abs() < 1e-8);
        // even extension
        assert!((tr.lambda(-y) - tr.lambda(y)).abs() < 1e-14);
    }
    assert_eq!(tr.lambda_prime(0.0), 0.0);
}

#[test]
fn admissibility_examples() {
    let g = TorusGrid::new(1, 64).unwrap();
    let chap = build_transform(PressureLaw::chaplygin(1.0, 1.0).unwrap()).unwrap();
    let inside = TorusField::from_fn(&g, 1, |_, _| -1.0);
    assert!(admissibility_check(&chap, &inside).admissible);
    let crossing = TorusField::from_fn(&g, 1, |x, _| x[0].sin());
    assert!(!admissibility_check(&chap, &crossing).admissible);
    let gam = build_transform(PressureLaw::gamma(1.0, 2.0).unwrap()).unwrap();
    let v = TorusField::from_fn(&g, 1, |x, _| 0.1 + 0.05 * x[0].sin());
    let a = admissibility_check(&gam, &v);
    // pointwise minimum on the grid
    let oracle = v.to_real_component(0).iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(a.admissible && (a.margin - oracle).abs() < 1e-15 && (a.margin - 0.05).abs() < 1e-12);
}

#[test]
fn composition_ratio_recorded() {
    let g = TorusGrid::new(1, 32).unwrap();
    let v = TorusField::from_fn(&g, 1, |x, _| 0.4 + 0.2 * x[0].cos());
    let lin = build_transform(PressureLaw::gamma(1.0, 3.0).unwrap()).unwrap();
    // linear Λ: ratio is the slope
    assert!((composition_ratio(&lin, &v, 1.0) - 1.0).abs() < 1e-12);
    let wd = build_transform(PressureLaw::white_dwarf(1.0, 1.0, 1.0).unwrap()).unwrap();
    let r = composition_ratio(&wd, &v, 1.0);
    assert!(r.is_finite() && r > 0.0);
}

#[test]
fn registry_names() {
    for (name, expect) in [
        ("gamma", "gamma"),
        ("isothermal", "isothermal"),
        ("chaplygin", "chaplygin"),
        ("piecewise-gamma", "piecewise-gamma"),
        ("white-dwarf", "white-dwarf"),
        ("soft-vacuum", "soft-vacuum"),
    ] {
        assert_eq!(PressureLaw::from_name(name, &[]).unwrap().name(), expect);
    }
    let law = PressureLaw::from_name("gamma", &[3.0, 2.0]).unwrap();
    assert!((law.pressure(2.0) - 12.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_round_trip(a in 0.1f64..5.0, g in 1.0f64..3.0, lr in -10.0f64..10.0) {
        let tr = build_transform(PressureLaw::gamma(a, g).unwrap()).unwrap();
        let rho = lr.exp();
        let back = tr.r_inv(tr.r(rho)).unwrap();
        prop_assert!((back - rho).abs() <= 1e-9 * rho);
        let law = tr.law.clone();
        prop_assert!(verify_structural_identity(&law, &tr, &[rho]) < 1e-10);
    }

    #[test]
    fn white_dwarf_round_trip(c1 in 0.2f64..3.0, c2 in 0.2f64..3.0, c3 in 0.2f64..3.0, lr in -12.0f64..12.0) {
        let tr = build_transform(PressureLaw::white_dwarf(c1, c2, c3).unwrap()).unwrap();
        let rho = lr.exp();
        let back = tr.r_inv(tr.r(rho)).unwrap();
        prop_assert!((back - rho).abs() <= 1e-9 * rho);
        prop_assert!(tr.lambda_lip <= 1.0 / 3.0 + 1e-6);
    }

    #[test]
    fn chaplygin_theta_linear(a in 0.1f64..5.0, k in 0.51f64..1.0, lr in -8.0f64..8.0) {
        let tr = build_transform(PressureLaw::chaplygin(a, k).unwrap()).unwrap();
        let y = tr.r(lr.exp());
        prop_assert!(y < 0.0);
        prop_assert!((tr.theta(y).unwrap() + k * y).abs() <= 1e-12 * y.abs().max(1.0));
    }
}
