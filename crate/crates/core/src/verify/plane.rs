use serde::Serialize;

use super::VerifyError;
use crate::expr::{Expr, ExprError};

/// The two planes `F1 = c1*chi1 + c2*chi2 + c3`, `F2 = c2*chi1 - c1*chi2 + c4`
/// (real and imaginary parts of a linear complex function) drawn in a
/// common `(chi1, chi2, F)` space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneGeometry {
    pub c: [f64; 4],
    pub n1: [f64; 2],
    pub n2: [f64; 2],
    pub dot: f64,
    /// Intersection line of the embedded planes.
    pub line: Line,
    /// Sample points of each plane over `[-1, 1]^2`.
    pub patches: [Vec<[f64; 3]>; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Line {
    pub point: [f64; 3],
    pub direction: [f64; 3],
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn plane_geometry(c: [f64; 4]) -> Result<PlaneGeometry, VerifyError> {
    let [c1, c2, c3, c4] = c;
    if c1 == 0.0 && c2 == 0.0 {
        return Err(VerifyError::DegenerateNormal);
    }
    let n1 = [c1, c2];
    let n2 = [c2, -c1];
    let dot = n1[0] * n2[0] + n1[1] * n2[1];
    // Plane k: n_k . chi - F = -d_k, embedded normal (n_k, -1).
    let e1 = [c1, c2, -1.0];
    let e2 = [c2, -c1, -1.0];
    let direction = cross(e1, e2);
    // Least-norm point solving e1.p = -c3, e2.p = -c4.
    let g11 = c1 * c1 + c2 * c2 + 1.0;
    let g12 = 1.0;
    let det = g11 * g11 - g12 * g12;
    let (r1, r2) = (-c3, -c4);
    let y1 = (g11 * r1 - g12 * r2) / det;
    let y2 = (g11 * r2 - g12 * r1) / det;
    let point = std::array::from_fn(|i| y1 * e1[i] + y2 * e2[i]);
    let sample = |n: [f64; 2], d: f64| {
        let mut v = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let (a, b) = (-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64);
                v.push([a, b, n[0] * a + n[1] * b + d]);
            }
        }
        v
    };
    Ok(PlaneGeometry {
        c,
        n1,
        n2,
        dot,
        line: Line { point, direction },
        patches: [sample(n1, c3), sample(n2, c4)],
    })
}

/// `n1 . n2` for symbolic constants, normalized.
pub fn plane_dot_symbolic(c1: &Expr, c2: &Expr) -> Result<Expr, ExprError> {
    (c1.clone() * c2.clone() + c2.clone() * (-c1.clone())).normalize()
}
