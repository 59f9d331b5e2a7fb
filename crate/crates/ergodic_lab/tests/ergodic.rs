use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use ergodic_lab::*;
use incompressible_dynamics::{
    embedding_constant, estimate_nl_constant, DniSpec, HSpec, IncompressibleConfig, IncompressibleState, VKind,
};
use proptest::prelude::*;
use psdo_calculus::{build_bessel_transport, PsdoOperator, TransportCoeffs};
use spectral_core::{SobolevIndex, TorusField, TorusGrid};

fn idx() -> SobolevIndex {
    SobolevIndex {
        s: 4.0,
        theta: 2.5,
        sigma: 2.5,
        p: 1,
    }
}

fn shear(g: &TorusGrid, amp: f64) -> TorusField {
    TorusField::from_fn(g, 2, |x, c| if c == 0 { amp * x[1].sin() } else { 0.0 })
}

fn smooth_field(g: &TorusGrid, amp: f64) -> TorusField {
    TorusField::from_fn(g, 2, |x, c| {
        let (a, b) = (x[0], x[1]);
        let v = if c == 0 {
            (a + 2.0 * b).cos() + 0.3 * (2.0 * a - b).sin()
        } else {
            a.sin() - 0.5 * (a + 2.0 * b).cos() + 0.6 * (2.0 * a - b).sin()
        };
        amp * v
    })
}

fn all_observables() -> Vec<Observable> {
    vec![
        Observable::Mode {
            component: 0,
            wave: vec![0, 1],
            part: Part::Im,
        },
        Observable::L2Norm,
        Observable::HthetaNorm,
        Observable::HsNorm,
    ]
}

#[test]
fn constant_trajectory_gives_point_masses() {
    let g = TorusGrid::new(2, 8).unwrap();
    let u0 = IncompressibleState::new(shear(&g, 1.0), idx()).unwrap();
    let spec = DniSpec::identity(0.0, 1.0, 2.5, 1);
    let mut cfg = IncompressibleConfig::deterministic(8, 0.1, 5.0);
    cfg.nonlinear = false;
    let traces = observe(&spec, &cfg, &u0, 2, &all_observables()).unwrap();
    let mu = accumulate(&traces, 5.0).unwrap();
    assert_eq!(mu.count(), 100);
    for h in &mu.histograms {
        assert_eq!(h.mass[0], 1.0);
    }
    let half = accumulate(&traces, 2.5).unwrap();
    for row in stabilization_diagnostic(&half, &mu).unwrap() {
        assert_eq!(row.distance, 0.0);
    }
}

#[test]
fn decaying_path_concentrates_near_zero() {
    let g = TorusGrid::new(2, 8).unwrap();
    let u0 = IncompressibleState::new(shear(&g, 1.0), idx()).unwrap();
    let mut spec = DniSpec::identity(0.0, 1.0, 2.5, 1);
    spec.gamma = 1.0;
    let mut cfg = IncompressibleConfig::deterministic(8, 0.05, 100.0);
    cfg.nonlinear = false;
    let traces = observe(&spec, &cfg, &u0, 1, &[Observable::L2Norm]).unwrap();
    let mu = accumulate(&traces, 100.0).unwrap();
    assert!(mu.histograms[0].mass[0] > 0.9);
    let tail_free = tightness_diagnostic(&mu, "l2_norm", &[PI * PI * 2.0 + 1e-9, 0.0], VKind::Log1p).unwrap();
    // sup ‖u‖² = ‖u₀‖² = 2π²
    assert_eq!(tail_free[0].tail, 0.0);
    assert_eq!(tail_free[1].tail, 1.0);
}

#[test]
fn linear_damped_variance_matches_stationary_law() {
    let g = TorusGrid::new(2, 8).unwrap();
    let (gamma, amp) = (1.0, 0.5);
    let phi = shear(&g, amp);
    let mut spec = DniSpec::identity(0.0, 1.0, 2.5, 1);
    spec.gamma = gamma;
    spec.h = HSpec::Custom(Arc::new(move |_| phi.clone()));
    let mut cfg = IncompressibleConfig::deterministic(8, 1e-2, 50.0);
    cfg.nonlinear = false;
    cfg.seed = 21;
    cfg.sample_every = 50;
    let u0 = IncompressibleState::new(TorusField::zeros(&g, 2), idx()).unwrap();
    let clock = Instant::now();
    let traces = observe(&spec, &cfg, &u0, 128, &all_observables()).unwrap();
    let mu = accumulate(&traces, 50.0).unwrap();
    // the (0,1) coefficient of amp·sin y is −2π²·amp·i, driven as an OU process
    let c = 2.0 * PI * PI * amp;
    let exact = c * c / (2.0 * gamma);
    let j = mu.index("mode_0_0_1_im").unwrap();
    let var = mu.variance(j);
    assert!((var / exact - 1.0).abs() < 0.05, "{var} vs {exact}");
    assert!(mu.mean(j).abs() < 0.1 * exact.sqrt());
    let m = mu.mean(j);
    let m4 = mu.samples[j].iter().map(|v| (v - m).powi(4)).sum::<f64>() / mu.count() as f64;
    assert!((m4 / (var * var) / 3.0 - 1.0).abs() < 0.1);
    assert!((mu.histograms[j].total() - 1.0).abs() < 1e-12);
    assert!(clock.elapsed().as_secs() < 120);
}

fn d2_setup(seed: u64) -> (DniSpec, IncompressibleConfig, IncompressibleState) {
    let g = TorusGrid::new(2, 16).unwrap();
    let c = estimate_nl_constant(&g, 2.5, 50, 3);
    let m = embedding_constant(&g, 2.5, 1, 2);
    let spec = DniSpec::log_damped(c, m, 0.0, 0.5, 1.0, 2.5, 1);
    let mut cfg = IncompressibleConfig::deterministic(16, 0.05, 40.0);
    cfg.q1 = Some(transport());
    cfg.seed = seed;
    cfg.sample_every = 2;
    let u0 = IncompressibleState::new(smooth_field(&g, 0.5), idx()).unwrap();
    (spec, cfg, u0)
}

fn transport() -> PsdoOperator {
    build_bessel_transport(TransportCoeffs::Constant(vec![0.4, 0.2]), 0.0).unwrap()
}

fn distances(seed: u64) -> (Vec<f64>, OccupationMeasure) {
    let (spec, cfg, u0) = d2_setup(seed);
    let traces = observe(&spec, &cfg, &u0, 16, &all_observables()).unwrap();
    let mus: Vec<OccupationMeasure> = [5.0, 10.0, 20.0, 40.0].iter().map(|&t| accumulate(&traces, t).unwrap()).collect();
    let d = mus
        .windows(2)
        .map(|w| {
            let rows = stabilization_diagnostic(&w[0], &w[1]).unwrap();
            rows.iter().find(|r| r.observable == "htheta_norm").unwrap().distance
        })
        .collect();
    (d, mus.into_iter().last().unwrap())
}

#[test]
fn d2_run_stabilizes_and_is_tight() {
    let (d, mu) = distances(5);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    let (d_other, _) = distances(6);
    for (a, b) in d.iter().zip(&d_other) {
        assert!(a / b <= 2.0 && b / a <= 2.0, "{d:?} {d_other:?}");
    }
    let r: Vec<f64> = (0..12).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect();
    for row in tightness_diagnostic(&mu, "hs_norm", &r, VKind::Log1p).unwrap() {
        assert!(row.tail <= 2.0 * row.envelope, "{row:?}");
    }

    let dir = tempfile::tempdir().unwrap();
    write_histograms_csv(dir.path(), &mu).unwrap();
    let text = std::fs::read_to_string(dir.path().join("hs_norm.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), HISTOGRAM_HEADER.join(","));
    assert_eq!(text.lines().count(), BINS + 1);
    let mass: f64 = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-12);
    let rows = stabilization_diagnostic(&mu, &mu).unwrap();
    let p = dir.path().join("stab.csv");
    write_stabilization_csv(&p, &rows).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), rows.len() + 1);
    let p = dir.path().join("tight.csv");
    write_tightness_csv(&p, &tightness_diagnostic(&mu, "hs_norm", &r, VKind::Log1p).unwrap()).unwrap();
    assert!(std::fs::read_to_string(&p).unwrap().starts_with(&TIGHTNESS_HEADER.join(",")));
}

#[test]
fn accumulate_rejects_mixed_ensembles() {
    let g = TorusGrid::new(2, 8).unwrap();
    let spec = DniSpec::identity(0.0, 1.0, 2.5, 1);
    let cfg = IncompressibleConfig::deterministic(8, 0.1, 1.0);
    let a = observe(&spec, &cfg, &IncompressibleState::new(shear(&g, 1.0), idx()).unwrap(), 1, &[Observable::L2Norm]).unwrap();
    let b = observe(&spec, &cfg, &IncompressibleState::new(shear(&g, 2.0), idx()).unwrap(), 1, &[Observable::L2Norm]).unwrap();
    let mixed = [a[0].clone(), b[0].clone()];
    assert!(matches!(accumulate(&mixed, 1.0), Err(ErgodicError::Inconsistent(_))));
    assert!(matches!(accumulate(&a, 1e-3), Err(ErgodicError::Empty(_))));
    let mu = accumulate(&a, 1.0).unwrap();
    assert!(matches!(tightness_diagnostic(&mu, "nope", &[1.0], VKind::Identity), Err(ErgodicError::UnknownObservable(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn histogram_mass_is_one(v in proptest::collection::vec(-1e3f64..1e3, 1..400)) {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let h = Histogram::build(&v, lo, hi, BINS);
        prop_assert!((h.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_symmetric_and_bounded(
        a in proptest::collection::vec(-5.0f64..5.0, 1..100),
        b in proptest::collection::vec(-5.0f64..5.0, 1..100),
    ) {
        let d = cdf_distance(&a, &b, BINS);
        prop_assert!((d - cdf_distance(&b, &a, BINS)).abs() < 1e-15);
        prop_assert!((0.0..=(BINS - 1) as f64 / BINS as f64 + 1e-15).contains(&d));
        prop_assert_eq!(cdf_distance(&a, &a, BINS), 0.0);
    }
}
