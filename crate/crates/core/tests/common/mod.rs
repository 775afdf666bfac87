#![allow(dead_code)]

use num_complex::Complex64;

/// Closed form for sys3: `u = b -+ sqrt(a - 2x)`, realified with
/// the principal square root (valid for `a2 >= 0`). Returns `(f, f')`.
pub fn sys3_closed_form(a: Complex64, b: Complex64, sign: f64, x: f64) -> ([f64; 2], [f64; 2]) {
    let (a1, a2) = (a.re, a.im);
    let m = ((a1 - 2.0 * x).powi(2) + a2 * a2).sqrt();
    let re = ((a1 - 2.0 * x + m) / 2.0).sqrt();
    let im = ((-a1 + 2.0 * x + m) / 2.0).sqrt();
    let f = [sign * re + b.re, sign * im + b.im];
    // d/dx sqrt(a - 2x) = -1/sqrt(a - 2x)
    let d = -sign / Complex64::new(re, im);
    (f, [d.re, d.im])
}

/// Rational solution of sys7 for `a = a1 + i a2`, `b = b1 + i b2`.
pub fn sys7_rational(a1: f64, a2: f64, b1: f64, b2: f64, x: f64) -> [f64; 2] {
    let k = a2 * a2 + a1 * a1 - b1;
    let den = x.powi(4) - 4.0 * x.powi(3) * a1 + 4.0 * (k * x * x + 2.0 * (a2 * b2 + a1 * b1) * x + b1 * b1 + b2 * b2);
    let n1 = 2.0 * x.powi(3) - 6.0 * x * x * a1 + 4.0 * k * x + 4.0 * a1 * b1 + 4.0 * a2 * b2;
    let n2 = (2.0 * x * x + 4.0 * b1) * a2 + 4.0 * b2 * (x - a1);
    [n1 / den, n2 / den]
}

pub fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}
