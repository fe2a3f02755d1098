use std::f64::consts::PI;

use maass_lowlying::error::QuadError;
use maass_lowlying::quadrature::*;
use num_complex::Complex64;

fn re(f: impl Fn(f64) -> f64 + Sync) -> impl Fn(f64) -> Complex64 + Sync {
    move |x| Complex64::new(f(x), 0.0)
}

#[test]
fn polynomials_are_exact() {
    let r = integrate_interval(re(|x| 3.0 * x * x - 2.0 * x + 1.0), -1.0, 2.0, 1e-12).unwrap();
    assert!((r.re() - 9.0).abs() < 1e-13);
    assert_eq!(r.evaluations, 21);
}

#[test]
fn smooth_and_oscillatory() {
    let r = integrate_interval(re(f64::exp), 0.0, 1.0, 1e-13).unwrap();
    assert!((r.re() - (1f64.exp() - 1.0)).abs() < 1e-13);
    // int_0^{200} cos(50 x) dx = sin(10000)/50
    let opts = QuadOptions::with_tol(1e-12).max_panel_width(0.5);
    let r = integrate_interval_with(re(|x| (50.0 * x).cos()), 0.0, 200.0, &opts).unwrap();
    assert!((r.re() - 10000f64.sin() / 50.0).abs() < 1e-11);
    let r = integrate_interval(|x| Complex64::new(0.0, x).exp(), 0.0, PI, 1e-13).unwrap();
    assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
}

#[test]
fn reversed_and_empty_intervals_are_rejected() {
    let f = re(|x| x.sin());
    assert!(matches!(
        integrate_interval(&f, 2.0, 0.0, 1e-13),
        Err(QuadError::Invalid(_))
    ));
    assert!(matches!(
        integrate_interval(&f, 1.0, 1.0, 1e-13),
        Err(QuadError::Invalid(_))
    ));
    assert!(matches!(
        integrate_interval(&f, 0.0, 1.0, 0.0),
        Err(QuadError::Invalid(_))
    ));
}

#[test]
fn tolerance_below_rounding_reports_floor() {
    let r = integrate_interval(re(|x| x.cos()), 0.0, 1.0, 1e-30).unwrap();
    assert!((r.re() - 1f64.sin()).abs() < 1e-15);
    assert!(r.error_estimate > 1e-30 && r.error_estimate < 1e-13);
}

#[test]
fn linearity_and_parity() {
    let opts = QuadOptions::with_tol(1e-12);
    let f = re(|x| (-x * x).exp());
    let g = re(|x| x.cos() * (-x * x / 50.0).exp());
    let a = integrate_interval_with(&f, -3.0, 5.0, &opts).unwrap().value;
    let b = integrate_interval_with(&g, -3.0, 5.0, &opts).unwrap().value;
    let c = integrate_interval_with(|x| f(x) * 2.0 - g(x) * 3.0, -3.0, 5.0, &opts)
        .unwrap()
        .value;
    assert!((c - (a * 2.0 - b * 3.0)).norm() < 5.0 * 2e-12);
    let odd = integrate_real_line(re(|x| x * (-x * x).exp()), 6.0, 1e-12).unwrap();
    assert!(odd.value.norm() < 1e-12);
    let full = integrate_real_line(&g, 20.0, 1e-9).unwrap().re();
    let half = integrate_half_line_with(&g, 20.0, &QuadOptions::with_tol(1e-9))
        .unwrap()
        .re();
    assert!((full - 2.0 * half).abs() < 4e-9);
}

#[test]
fn infinite_ranges() {
    let g = integrate_real_line(re(|x| (-x * x).exp()), 3.0, 1e-13).unwrap();
    assert!((g.re() - PI.sqrt()).abs() < 1e-12);
    let opts = QuadOptions::with_tol(1e-9);
    let h =
        integrate_half_line_with(re(|x| 1.0 / (1.0 + x * x) / (1.0 + x * x)), 10.0, &opts).unwrap();
    assert!((h.re() - PI / 4.0).abs() < 1e-8);
}

#[test]
fn failures_are_typed() {
    assert!(matches!(
        integrate_interval(re(|x| x), 0.0, f64::INFINITY, 1e-10),
        Err(QuadError::Invalid(_))
    ));
    assert!(matches!(
        integrate_interval(re(|x| 1.0 / (x - 0.5)), 0.0, 1.0, 1e-10),
        Err(QuadError::NonFinite { .. }) | Err(QuadError::Convergence { .. })
    ));
    let tight = QuadOptions {
        abs_tol: 1e-15,
        max_panels: 4,
        ..QuadOptions::default()
    };
    let err =
        integrate_interval_with(re(|x| (1.0 / (x + 1e-3)).sin()), 0.0, 1.0, &tight).unwrap_err();
    match err {
        QuadError::Convergence {
            panels,
            error_estimate,
            ..
        } => {
            assert!(panels >= 4);
            assert!(error_estimate > 1e-15);
        }
        other => panic!("unexpected {other:?}"),
    }
    let slow = integrate_real_line(re(|x| 1.0 / (1.0 + x.abs())), 1.0, 1e-10);
    assert!(matches!(slow, Err(QuadError::Divergence { .. })));
}

#[test]
fn deterministic_across_calls() {
    let opts = QuadOptions::with_tol(1e-12).max_panel_width(0.01);
    let f = re(|x| (x * 37.0).sin() * (-x).exp());
    let a = integrate_interval_with(&f, 0.0, 5.0, &opts).unwrap();
    let b = integrate_interval_with(&f, 0.0, 5.0, &opts).unwrap();
    assert_eq!(a.value, b.value);
}
