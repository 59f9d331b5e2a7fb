//! Fixed checks on the operator calculus, the flows, the pressure laws,
//! the maximum principle and the Grönwall verifier.

use compressible_dynamics::{transport_max_principle, CompressibleError, MaxPrincipleReport};
use incompressible_dynamics::{generate_admissible, gronwall_verify};
use levy_marcus::{default_substeps, flow_defect_bounds, marcus_flow, marcus_flow_substeps, FlowConstants, DEFECT_HEADER};
use pressure_laws::{build_transform, structural_residual_differenced, verify_structural_identity, PressureLaw};
use psdo_calculus::{
    build_bessel_transport, build_fractional_riesz, cancel_exact, cancel_probe, dense_matrix, dense_of, loglog_slope,
    sample_rng, CancellationReport, DenseOperator, PsdoError, PsdoOperator, TransportCoeffs,
};
use spectral_core::{mollify, sobolev_inner, TorusField, TorusGrid};

use crate::report::{Check, Sink};
use crate::HarnessError;

fn module<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Module(e.to_string())
}

fn grid(d: usize, n: usize) -> Result<TorusGrid, HarnessError> {
    TorusGrid::new(d, n).map_err(module)
}

fn csv_cells(line: &str) -> Vec<String> {
    line.split(',').map(str::to_string).collect()
}

/// 1 + 0.5 sin x + 0.1 cos x transport of class order 1 + 2α, plus 0.3 cos x.
fn x_dependent(g: &TorusGrid, alpha: f64, zero_order: bool) -> Result<PsdoOperator, HarnessError> {
    let a = TorusField::from_fn(g, 1, |x, _| 1.0 + 0.5 * x[0].sin() + 0.1 * x[0].cos());
    let q = build_bessel_transport(TransportCoeffs::Fields(vec![a]), alpha).map_err(module)?;
    if zero_order {
        q.with_zero_order(TorusField::from_fn(g, 1, |x, _| 0.3 * x[0].cos())).map_err(module)
    } else {
        Ok(q)
    }
}

pub const CANCEL_TOL: f64 = 1e-10;

/// Both cancellation ratios of the constant-coefficient skew families.
pub fn skew_cancellation(sink: &mut Sink, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let g = grid(2, 32)?;
    let mut ops: Vec<(String, PsdoOperator)> = Vec::new();
    for alpha in [0.0, 0.5, 1.0] {
        let q = build_bessel_transport(TransportCoeffs::Constant(vec![1.0, -0.5]), alpha).map_err(module)?;
        ops.push((format!("transport alpha={alpha}"), q));
    }
    for vs in [0.5, 1.0] {
        ops.push((format!("riesz varsigma={vs}"), build_fractional_riesz(vec![1.0, 0.5], vs).map_err(module)?));
    }
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (name, q) in &ops {
        let mut worst: f64 = 0.0;
        for s in [0.0, 1.0, 2.0, 4.0] {
            let rep = cancel_probe(q, &g, 1, s, 50, seed).map_err(module)?;
            worst = worst.max(rep.c1_hat).max(rep.c2_hat);
            rows.push(csv_cells(&rep.csv_row()));
        }
        checks.push(Check::new(
            format!("skew cancellation {name}"),
            worst < CANCEL_TOL,
            format!("max ratio {worst:.3e} over s in {{0,1,2,4}}, 50 fields"),
        ));
    }
    let header = csv_cells(CancellationReport::CSV_HEADER);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    sink.rows("cancellation.csv", &header, &rows)?;
    Ok(checks)
}

pub const RENORM_LEVELS: [usize; 4] = [2, 4, 8, 16];

/// Exact c₂ of J_nQJ_n for n = 2..16 against twice its n = 2 value. The
/// order-1 class misses the factor by design of the mollifier band and is
/// reported as a documented deviation.
pub fn renormalized_cancellation(sink: &mut Sink) -> Result<Vec<Check>, HarnessError> {
    let g = grid(1, 128)?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for order in [0.0, 0.5, 1.0] {
        let q = x_dependent(&g, (order - 1.0) / 2.0, false)?;
        let mut c2 = Vec::new();
        for &n in &RENORM_LEVELS {
            let (a, b) = cancel_exact(&q.renormalize(n), &g, 1, 1.0).map_err(module)?;
            rows.push(vec![order.to_string(), n.to_string(), format!("{a:e}"), format!("{b:e}")]);
            c2.push(b);
        }
        let max = c2.iter().cloned().fold(0.0, f64::max);
        let pass = max <= 2.0 * c2[0];
        let detail = format!(
            "c2 = {}; max/first = {:.3}",
            c2.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", "),
            max / c2[0]
        );
        let name = format!("uniform renormalized c2, class order {order}");
        checks.push(if order < 1.0 {
            Check::new(name, pass, detail)
        } else {
            Check::documented(name, pass, detail)
        });
    }
    sink.rows("renormalized.csv", &["order", "n", "c1", "c2"], &rows)?;
    Ok(checks)
}

pub struct RateFit {
    pub levels: Vec<usize>,
    /// ‖J_n − J_{n/2}‖, ‖Q_n − Q_{n/2}‖, ‖Q_n² − Q_{n/2}²‖ from H^s to H^θ.
    pub norms: [Vec<f64>; 3],
    pub slopes: [f64; 3],
}

pub const RATE_S: f64 = 4.0;
pub const RATE_THETA: f64 = 1.0;
pub const RATE_DELTA: f64 = 0.5;

/// Dense-matrix rates on a 1-D grid of size `n`, pairs (l, l/2).
pub fn mollifier_rates(n: usize, levels: &[usize]) -> Result<RateFit, HarnessError> {
    let g = grid(1, n)?;
    let q = build_bessel_transport(TransportCoeffs::Constant(vec![1.0]), (RATE_DELTA - 1.0) / 2.0).map_err(module)?;
    let j = |l: usize| dense_of(&g, 1, |f| Ok::<_, PsdoError>(mollify(l, f))).map_err(module);
    let qn = |l: usize| dense_matrix(&q.renormalize(l), &g, 1).map_err(module);
    let norm = |a: &DenseOperator, b: &DenseOperator| a.minus(b).operator_norm(RATE_S, RATE_THETA);
    let mut norms: [Vec<f64>; 3] = Default::default();
    for &l in levels {
        let (ja, jb) = (j(l)?, j(l / 2)?);
        let (qa, qb) = (qn(l)?, qn(l / 2)?);
        norms[0].push(norm(&ja, &jb));
        norms[1].push(norm(&qa, &qb));
        norms[2].push(norm(&qa.compose(&qa), &qb.compose(&qb)));
    }
    let x: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
    let slopes = [0, 1, 2].map(|k| loglog_slope(&x, &norms[k]));
    Ok(RateFit {
        levels: levels.to_vec(),
        norms,
        slopes,
    })
}

pub fn rate_targets() -> [f64; 3] {
    let d = RATE_S - RATE_THETA;
    [-d, -(d - RATE_DELTA), -(d - 2.0 * RATE_DELTA)]
}

/// Slopes within ±0.3 of the targets on N = 16 (documented) and N = 64.
pub fn convergence_rates(sink: &mut Sink) -> Result<Vec<Check>, HarnessError> {
    let targets = rate_targets();
    let labels = ["J_n", "Q_n", "Q_n^2"];
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (n, levels, hard) in [(16, vec![2, 4, 8], false), (64, vec![8, 16, 32], true)] {
        let fit = mollifier_rates(n, &levels)?;
        for k in 0..3 {
            for (l, v) in fit.levels.iter().zip(&fit.norms[k]) {
                rows.push(vec![n.to_string(), labels[k].into(), l.to_string(), format!("{v:e}")]);
            }
            let pass = (fit.slopes[k] - targets[k]).abs() <= 0.3;
            let name = format!("rate {} on N={n}", labels[k]);
            let detail = format!("slope {:.3}, target {:.2}", fit.slopes[k], targets[k]);
            checks.push(if hard {
                Check::new(name, pass, detail)
            } else {
                Check::documented(name, pass, detail)
            });
        }
    }
    sink.rows("rates.csv", &["grid", "operator", "n", "norm"], &rows)?;
    Ok(checks)
}

fn rel_err(a: &TorusField, b: &TorusField) -> f64 {
    a.sub(b).max_abs_coeff() / b.max_abs_coeff()
}

/// Translation, isometry, defect bounds and step doubling of Marcus flows.
pub fn marcus_flows(sink: &mut Sink, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let mut checks = Vec::new();

    let g2 = grid(2, 16)?;
    let q = build_bessel_transport(TransportCoeffs::Constant(vec![1.0, 0.0]), 0.0).map_err(module)?;
    let f = TorusField::from_fn(&g2, 1, |x, _| x[0].sin());
    let out = marcus_flow(&q, 0.5, &f, 1.0, 1.0).map_err(module)?.endpoint.to_real_component(0);
    let err = out
        .iter()
        .enumerate()
        .map(|(i, v)| (v - (g2.point(i)[0] + 0.5).sin()).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new("transport flow is translation", err < 1e-10, format!("max error {err:.3e}")));

    let mut rng = sample_rng(seed, 0);
    let f = TorusField::random_band_limited(&g2, 1, 2.0, &mut rng);
    let norm2 = sobolev_inner(2.0, &f, &f).map_err(module)?;
    let skew = [
        build_bessel_transport(TransportCoeffs::Constant(vec![1.0, -0.5]), 0.5).map_err(module)?,
        build_fractional_riesz(vec![0.3, 1.0], 0.7).map_err(module)?,
        build_bessel_transport(TransportCoeffs::Constant(vec![1.0, 0.0]), 0.0).map_err(module)?.renormalize(3),
    ];
    let mut worst: f64 = 0.0;
    for q in &skew {
        for l in [-1.0, -0.3, 0.2, 1.0] {
            worst = worst.max(marcus_flow(q, l, &f, 1.0, 2.0).map_err(module)?.norm_defect.abs() / norm2);
        }
    }
    checks.push(Check::new("skew flows are isometries", worst < 1e-10, format!("max relative defect {worst:.3e}")));

    let g1 = grid(1, 32)?;
    let s = 1.0;
    let q = x_dependent(&g1, -0.25, true)?.renormalize(5);
    let report = cancel_probe(&q, &g1, 1, s, 64, seed).map_err(module)?;
    let consts = FlowConstants::from_report(&report);
    let f = TorusField::random_band_limited(&g1, 1, s, &mut sample_rng(seed, 1000));
    let ls: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let rows = flow_defect_bounds(&q, &f, s, &ls, consts).map_err(module)?;
    let header: Vec<&str> = DEFECT_HEADER.split(',').collect();
    let table = |pick: &dyn Fn(&levy_marcus::DefectRow) -> (f64, f64, bool)| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| {
                let (d, b, p) = pick(r);
                vec![r.l.to_string(), r.r.to_string(), format!("{d:e}"), format!("{b:e}"), p.to_string()]
            })
            .collect()
    };
    sink.rows("defects_norm.csv", &header, &table(&|r| (r.norm_defect, r.norm_bound, r.norm_pass())))?;
    sink.rows(
        "defects_linearized.csv",
        &header,
        &table(&|r| (r.linearized_defect, r.linearized_bound, r.linearized_pass())),
    )?;
    let failed = rows.iter().filter(|r| !r.pass()).count();
    checks.push(Check::new(
        "defect bounds with 1.5x empirical constants",
        failed == 0 && rows.len() == 10,
        format!("{failed} of {} l values fail; C1 {:.3e}, C2 {:.3e}", rows.len(), consts.c1, consts.c2),
    ));

    let f = TorusField::random_band_limited(&g1, 1, 1.0, &mut sample_rng(seed, 1));
    let mut worst: f64 = 0.0;
    for alpha in [-0.5, -0.25, 0.0] {
        let q = x_dependent(&g1, alpha, true)?.renormalize(5);
        for l in [0.3, 1.0] {
            let m = default_substeps(&q, &f, l, 1.0);
            let a = marcus_flow_substeps(&q, l, &f, 1.0, 1.0, m).map_err(module)?.endpoint;
            let b = marcus_flow_substeps(&q, l, &f, 1.0, 1.0, 2 * m).map_err(module)?.endpoint;
            worst = worst.max(rel_err(&a, &b));
        }
    }
    checks.push(Check::new("step doubling of x-dependent flow", worst < 1e-8, format!("max change {worst:.3e}")));
    Ok(checks)
}

pub const LAW_NAMES: [&str; 6] = ["gamma", "isothermal", "chaplygin", "piecewise-gamma", "white-dwarf", "soft-vacuum"];

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Pressure-law checks, optionally restricted to one registry name.
pub fn pressure(sink: &mut Sink, only: Option<&str>) -> Result<Vec<Check>, HarnessError> {
    if let Some(name) = only {
        if !LAW_NAMES.contains(&name) {
            return Err(HarnessError::Config(format!(
                "unknown law '{name}'; expected one of {}",
                LAW_NAMES.join(", ")
            )));
        }
    }
    let law = |r: Result<PressureLaw, pressure_laws::PressureError>| r.map_err(module);
    let laws: Vec<(&str, PressureLaw)> = vec![
        ("gamma", law(PressureLaw::gamma(2.0, 5.0 / 3.0))?),
        ("isothermal", law(PressureLaw::isothermal(3.0))?),
        ("chaplygin", law(PressureLaw::chaplygin(1.0, 1.0))?),
        ("chaplygin", law(PressureLaw::chaplygin(1.0, 0.8))?),
        ("piecewise-gamma", PressureLaw::piecewise_example()),
        ("white-dwarf", law(PressureLaw::white_dwarf(1.0, 1.0, 1.0))?),
        ("soft-vacuum", PressureLaw::soft_vacuum()),
    ];
    let wanted = |n: &str| only.is_none_or(|o| o == n);
    let ident = log_grid(1e-3, 1e3, 97);
    let round = log_grid(1e-6, 1e6, 121);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut record = |checks: &mut Vec<Check>, law: &str, what: &str, value: f64, tol: f64| {
        rows.push(vec![law.to_string(), what.to_string(), format!("{value:e}"), format!("{tol:e}")]);
        checks.push(Check::new(
            format!("{law} {what}"),
            value < tol,
            format!("{value:.3e} (tolerance {tol:e})"),
        ));
    };
    for (name, law) in laws.iter().filter(|(n, _)| wanted(n)) {
        let tr = build_transform(law.clone()).map_err(module)?;
        let label = law.name();
        let label = match law.kind {
            pressure_laws::LawKind::Chaplygin { kappa, .. } => format!("{label}(kappa={kappa})"),
            _ => label.to_string(),
        };
        if *name == "piecewise-gamma" {
            let pure: Vec<f64> = ident
                .iter()
                .copied()
                .filter(|r| !(1.0..2.0).contains(r) && !(3.0..4.0).contains(r))
                .collect();
            let trans: Vec<f64> = (1..40).flat_map(|i| [1.0 + i as f64 / 40.0, 3.0 + i as f64 / 40.0]).collect();
            record(&mut checks, &label, "structural identity, pure segments", verify_structural_identity(law, &tr, &pure), 1e-10);
            record(&mut checks, &label, "structural identity, transitions", verify_structural_identity(law, &tr, &trans), 1e-8);
        } else {
            record(&mut checks, &label, "structural identity", verify_structural_identity(law, &tr, &ident), 1e-10);
        }
        let mut trip: f64 = 0.0;
        for &rho in &round {
            let back = tr.r_inv(tr.r(rho)).map_err(module)?;
            trip = trip.max((back - rho).abs() / rho);
        }
        record(&mut checks, &label, "round trip r_inv(r(rho))", trip, 1e-9);
        match *name {
            "chaplygin" => {
                let kappa = match law.kind {
                    pressure_laws::LawKind::Chaplygin { kappa, .. } => kappa,
                    _ => unreachable!(),
                };
                let mut worst: f64 = 0.0;
                for &rho in &log_grid(1e-4, 1e4, 81) {
                    let y = tr.r(rho);
                    worst = worst.max((tr.theta(y).map_err(module)? + kappa * y).abs() / y.abs().max(1.0));
                }
                record(&mut checks, &label, "Theta(x) = -kappa x", worst, 1e-12);
            }
            "white-dwarf" => {
                let grid = log_grid(1e-3, 1e3, 61);
                record(&mut checks, &label, "differenced structural identity", structural_residual_differenced(law, &tr, &grid), 1e-6);
                record(&mut checks, &label, "Lambda Lipschitz excess over 1/3", (tr.lambda_lip - 1.0 / 3.0).max(0.0), 1e-6);
            }
            "soft-vacuum" => {
                let worst = log_grid(1e-8, 0.49, 40)
                    .iter()
                    .map(|&rho| (tr.r(rho) + 1.0 / rho.ln()).abs())
                    .fold(0.0, f64::max);
                record(&mut checks, &label, "r = -1/log rho below 1/2", worst, 1e-8);
            }
            _ => {}
        }
    }
    sink.rows("pressure.csv", &["law", "check", "value", "tolerance"], &rows)?;
    Ok(checks)
}

pub const ENVELOPE_SLACK: f64 = 1e-6;

fn envelope_rows(rep: &MaxPrincipleReport) -> Vec<Vec<String>> {
    rep.samples
        .iter()
        .map(|s| {
            [s.time, s.min, s.max, s.lower, s.upper, s.integral]
                .iter()
                .map(|v| format!("{v:e}"))
                .collect()
        })
        .collect()
}

/// Exponential envelope of ∂ₜf + f·div v + v·∇f = 0 on three velocity fields.
pub fn max_principle(sink: &mut Sink) -> Result<Vec<Check>, HarnessError> {
    let g1 = grid(1, 32)?;
    let g2 = grid(2, 16)?;
    let g3 = grid(1, 64)?;
    let runs: Vec<(&str, Result<MaxPrincipleReport, CompressibleError>)> = vec![
        (
            "translation",
            transport_max_principle(
                |_t: f64| TorusField::from_fn(&g1, 1, |_, _| 0.7),
                |f| f,
                1.0,
                &TorusField::from_fn(&g1, 1, |x, _| 2.0 + x[0].sin()),
                1.0,
                0.01,
            ),
        ),
        (
            "rest",
            transport_max_principle(
                |_t: f64| TorusField::zeros(&g2, 2),
                |f| f,
                1.0,
                &TorusField::from_fn(&g2, 1, |x, _| 3.0 + x[0].cos() * x[1].sin()),
                0.5,
                0.05,
            ),
        ),
        (
            "oscillatory",
            transport_max_principle(
                |t: f64| TorusField::from_fn(&g3, 1, |x, _| x[0].sin() * (-t).exp()),
                |f| f,
                1.0,
                &TorusField::from_fn(&g3, 1, |x, _| 2.0 + x[0].sin()),
                1.0,
                1e-3,
            ),
        ),
    ];
    let mut checks = Vec::new();
    for (name, res) in runs {
        let check = match res {
            Ok(rep) => {
                sink.rows(
                    &format!("envelope_{name}.csv"),
                    &["time", "min", "max", "lower", "upper", "integral"],
                    &envelope_rows(&rep),
                )?;
                Check::new(
                    format!("envelope {name}"),
                    rep.worst_margin >= -ENVELOPE_SLACK,
                    format!("worst margin {:.3e} over {} samples", rep.worst_margin, rep.samples.len()),
                )
            }
            Err(e @ CompressibleError::Violation { .. }) => Check::new(format!("envelope {name}"), false, e.to_string()),
            Err(e) => return Err(module(e)),
        };
        checks.push(check);
    }
    Ok(checks)
}

/// Saturating case and 100 generated admissible triples.
pub fn gronwall(sink: &mut Sink, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let dt = 1e-3;
    let t: Vec<f64> = (0..=5000).map(|i| i as f64 * dt).collect();
    let f: Vec<f64> = t.iter().map(|s| (-s).exp()).collect();
    let q = vec![1.0; t.len()];
    let rep = gronwall_verify(&t, &f, &f, &q, 1e-4);
    let gap = rep.lhs.iter().zip(&rep.rhs).map(|(l, r)| (l - r).abs()).fold(0.0, f64::max);
    let rows: Vec<Vec<String>> = (0..t.len())
        .step_by(50)
        .map(|i| vec![t[i].to_string(), format!("{:e}", rep.lhs[i]), format!("{:e}", rep.rhs[i])])
        .collect();
    sink.rows("gronwall_saturating.csv", &["t", "lhs", "rhs"], &rows)?;
    let mut checks = vec![Check::new(
        "Gronwall saturating case reproduces equality",
        rep.holds && rep.preconditions && gap < 1e-4,
        format!("max |lhs - rhs| {gap:.3e}"),
    )];
    let mut rng = sample_rng(seed, 0);
    let mut failed = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let (t, f1, f2, q) = generate_admissible(&mut rng, 5.0, dt);
        let rep = gronwall_verify(&t, &f1, &f2, &q, 1e-6);
        if !(rep.preconditions && rep.holds) {
            failed += 1;
        }
        worst = worst.min(rep.worst_margin);
    }
    checks.push(Check::new(
        "Gronwall generated triples",
        failed == 0,
        format!("{failed} of 100 fail; worst margin {worst:.3e}"),
    ));
    Ok(checks)
}
