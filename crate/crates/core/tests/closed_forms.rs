//! Pipeline output against closed-form solutions of the corpus systems.

mod common;

use complin_core::corpus;
use complin_core::pipeline::run;
use complin_core::solve::{Bindings, SolveOptions};
use complin_core::verify::{integrate_rk4, residual_check, uniform_grid, Tolerances};
use num_complex::Complex64;

#[test]
fn sys3_rk4_tracks_closed_form() {
    let a = Complex64::new(2.0, 0.5);
    let ap = a * a;
    let (f0, d0) = common::sys3_closed_form(ap, a, -1.0, 0.0);
    let sys = corpus::system("sys3").compile().unwrap();
    let r = integrate_rk4(&sys, &[], [f0[0], f0[1], d0[0], d0[1]], 0.0, 1.0, 1e-3, &Tolerances::default()).unwrap();
    for (&x, &f) in r.trajectory.x.iter().zip(&r.trajectory.f) {
        assert!(common::dist(f, common::sys3_closed_form(ap, a, -1.0, x).0) <= 1e-8, "x = {x}");
    }
}

#[test]
fn sys3_inversion_matches_square_root_form() {
    // The relation x + u^2/2 - a u - b = 0 is u = b_p -+ sqrt(a_p - 2x)
    // with b_p = a and a_p = a^2 + 2b (Im a_p >= 0 for the realified form).
    let (a, b) = (Complex64::new(1.5, 0.25), Complex64::new(0.5, 0.5));
    let bind = Bindings::new().with("a", a.re, a.im).with("b", b.re, b.im);
    let grid = uniform_grid(0.0, 0.5, 1e-3).unwrap();
    let r = run(&corpus::system("sys3"), &bind, &grid, &SolveOptions::default(), Some(Complex64::new(0.0, 0.0)), &Tolerances::default());
    let ap = a * a + 2.0 * b;
    let r = r.unwrap();
    for (&x, &f) in r.trajectory.x.iter().zip(&r.trajectory.f) {
        let plus = common::sys3_closed_form(ap, a, 1.0, x).0;
        let minus = common::sys3_closed_form(ap, a, -1.0, x).0;
        assert!(common::dist(f, plus).min(common::dist(f, minus)) <= 1e-8, "x = {x}");
    }
}

#[test]
fn sys7_rk4_tracks_rational_solution() {
    let (a1, a2, b1, b2) = (0.0, 0.0, 1.0, 1.0);
    let p = |x: f64| common::sys7_rational(a1, a2, b1, b2, x);
    let h = 1e-6;
    let d = |c: usize| (p(1.0 + h)[c] - p(1.0 - h)[c]) / (2.0 * h);
    let ic = [p(1.0)[0], p(1.0)[1], d(0), d(1)];
    let sys = corpus::system("sys7").compile().unwrap();
    let r = integrate_rk4(&sys, &[], ic, 1.0, 2.0, 1e-3, &Tolerances::default()).unwrap();
    for (&x, &f) in r.trajectory.x.iter().zip(&r.trajectory.f) {
        assert!(common::dist(f, p(x)) <= 1e-8, "x = {x}");
    }
}

#[test]
fn sys7_rational_form_for_complex_constants() {
    let (a1, a2, b1, b2) = (0.3, -0.2, 1.5, 0.7);
    let bind = Bindings::parse_list(&format!("a1={a1},a2={a2},b1={b1},b2={b2}")).unwrap();
    let grid = uniform_grid(1.0, 2.0, 1e-3).unwrap();
    let r = run(&corpus::system("sys7"), &bind, &grid, &SolveOptions::default(), None, &Tolerances::default()).unwrap();
    for (&x, &f) in r.trajectory.x.iter().zip(&r.trajectory.f) {
        assert!(common::dist(f, common::sys7_rational(a1, a2, b1, b2, x)) <= 1e-8, "x = {x}");
    }
    assert!(r.check.deviation <= 1e-6);
}

/// With real `c1` and `c2 = i*k`, the relation `c1 u + ln(c1 u - 1) = c1^2 (x + c2)`
/// splits into
///   2 c1 f1 + ln((c1 f1 - 1)^2 + c1^2 f2^2) - 2 c1^2 x = 0,
///   c1 f2 + arg(c1 u - 1) = c1^2 k.
/// The variant with arctan((c1 f1 - 1)/(c1 f2)) in place of the argument is
/// not conserved along solutions.
#[test]
fn sys1_real_and_imaginary_parts() {
    let (c1, k) = (1.0, 0.3);
    let bind = Bindings::new().with("c1", c1, 0.0).with("c2", 0.0, k);
    let grid = uniform_grid(0.0, 1.0, 1e-3).unwrap();
    let r = run(&corpus::system("sys1"), &bind, &grid, &SolveOptions::default(), None, &Tolerances::default()).unwrap();
    assert!(r.check.deviation <= 1e-6, "{}", r.check.deviation);
    let mut variant = Vec::new();
    for (&x, &[f1, f2]) in r.trajectory.x.iter().zip(&r.trajectory.f) {
        let re = 2.0 * c1 * f1 + ((c1 * f1 - 1.0).powi(2) + c1 * c1 * f2 * f2).ln() - 2.0 * c1 * c1 * x;
        assert!(re.abs() <= 1e-10, "x = {x}: {re:e}");
        let arg = (c1 * f2).atan2(c1 * f1 - 1.0);
        let im = c1 * f2 + arg - c1 * c1 * k;
        let wrapped = im - (im / std::f64::consts::TAU).round() * std::f64::consts::TAU;
        assert!(wrapped.abs() <= 1e-10, "x = {x}: {im:e}");
        variant.push(c1 * f2 + ((c1 * f1 - 1.0) / (c1 * f2)).atan());
    }
    let spread = variant.iter().cloned().fold(f64::MIN, f64::max) - variant.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 1e-3, "arctan variant is conserved after all ({spread:e})");
}

#[test]
fn rk4_residuals_stay_small_on_standard_runs() {
    let tol = Tolerances::default();
    for run in &corpus::STANDARD_RUNS {
        let sys = corpus::system(run.name);
        let r = complin_core::pipeline::run_standard(&sys, run, &tol).unwrap();
        assert!(r.check.rk4_residual <= tol.residual, "{}: {:e}", run.name, r.check.rk4_residual);
        if run.name == "sys4" {
            let cs = sys.compile().unwrap();
            let params = Bindings::parse_list(run.bindings).unwrap().values_for(sys.params()).unwrap();
            assert!(residual_check(&cs, &params, &r.check.rk4.trajectory).unwrap().max <= 1e-6);
        }
    }
}
