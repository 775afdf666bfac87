//! Numerical ground truth: fixed-step RK4 on the real system, stencil
//! residuals, trajectory comparison, and the plane geometry of linear
//! complex solutions.

mod plane;

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use plane::{plane_dot_symbolic, plane_geometry, PlaneGeometry};

use crate::expr::EvalError;
use crate::system::CompiledSystem;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("trajectory needs at least {0} points")]
    TooFewPoints(usize),
    #[error("x samples must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("step {h} does not divide [{x0}, {x1}]")]
    InvalidStep { x0: f64, x1: f64, h: f64 },
    #[error("state exceeded {limit:e} at x = {x}")]
    BlowUp { x: f64, limit: f64 },
    #[error("right-hand side could not be evaluated at x = {x}: {source}")]
    PoleEncountered { x: f64, source: EvalError },
    #[error("parameter {0} is not real")]
    ComplexParameter(usize),
    #[error("grid is not uniform at index {0}")]
    NonUniformGrid(usize),
    #[error("row {0} has fewer than three columns")]
    TooFewColumns(usize),
    #[error("trajectories are sampled on different grids")]
    GridMismatch,
    #[error("normals vanish when c1 = c2 = 0")]
    DegenerateNormal,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Every numeric threshold used by verification and inversion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub branch_tol: f64,
    pub blowup: f64,
    pub rk4_step: f64,
    pub deviation: f64,
    pub residual: f64,
    pub closed_form: f64,
    pub series_tail: f64,
    pub series_radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            newton_tol: 1e-12,
            newton_max_iter: 50,
            branch_tol: 1e-10,
            blowup: 1e12,
            rk4_step: 1e-3,
            deviation: 1e-6,
            residual: 1e-5,
            closed_form: 1e-8,
            series_tail: 1e-12,
            series_radius: 2.0,
        }
    }
}

/// Samples of a real solution `(f1(x), f2(x))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub f: Vec<[f64; 2]>,
    /// First derivatives, when the producer knows them.
    pub df: Option<Vec<[f64; 2]>>,
    /// Per-point diagnostic (Newton residual or step-halving deviation).
    pub diag: Vec<f64>,
}

impl Trajectory {
    pub fn new(x: Vec<f64>, f: Vec<[f64; 2]>, df: Option<Vec<[f64; 2]>>, diag: Vec<f64>) -> Result<Self, VerifyError> {
        if x.len() < 2 {
            return Err(VerifyError::TooFewPoints(2));
        }
        assert_eq!(x.len(), f.len(), "sample arrays differ in length");
        for i in 0..x.len() {
            if i > 0 && x[i] <= x[i - 1] {
                return Err(VerifyError::NotIncreasing(i));
            }
            let dfi = df.as_ref().map_or([0.0; 2], |d| d[i]);
            if !x[i].is_finite() || f[i].iter().chain(&dfi).any(|v| !v.is_finite()) {
                return Err(VerifyError::NonFinite(i));
            }
        }
        Ok(Trajectory { x, f, df, diag })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `(f1, f2, f1', f2')` at sample `i`, when derivatives are known.
    pub fn state(&self, i: usize) -> Option<[f64; 4]> {
        let d = self.df.as_ref()?[i];
        Some([self.f[i][0], self.f[i][1], d[0], d[1]])
    }
}

/// Uniform grid `x0, x0 + h, ..., x1`.
pub fn uniform_grid(x0: f64, x1: f64, h: f64) -> Result<Vec<f64>, VerifyError> {
    let n = (x1 - x0) / h;
    let steps = n.round();
    if !(h > 0.0) || steps < 1.0 || (n - steps).abs() > 1e-6 {
        return Err(VerifyError::InvalidStep { x0, x1, h });
    }
    Ok((0..=steps as usize).map(|k| x0 + k as f64 * h).collect())
}

fn rhs(sys: &CompiledSystem, params: &[Complex64], x: f64, s: &[f64; 4]) -> Result<[f64; 4], VerifyError> {
    let w = sys.eval(x, s, params).map_err(|source| VerifyError::PoleEncountered { x, source })?;
    if !w[0].re.is_finite() || !w[1].re.is_finite() {
        return Err(VerifyError::PoleEncountered { x, source: EvalError::Pole });
    }
    Ok([s[2], s[3], w[0].re, w[1].re])
}

fn rk4_path(
    sys: &CompiledSystem,
    params: &[Complex64],
    ic: [f64; 4],
    grid: &[f64],
    substeps: usize,
    limit: f64,
) -> Result<Vec<[f64; 4]>, VerifyError> {
    let mut out = Vec::with_capacity(grid.len());
    let mut s = ic;
    out.push(s);
    let axpy = |s: &[f64; 4], k: &[f64; 4], a: f64| std::array::from_fn::<f64, 4, _>(|i| s[i] + a * k[i]);
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        for j in 0..substeps {
            let x = w[0] + j as f64 * h;
            let k1 = rhs(sys, params, x, &s)?;
            let k2 = rhs(sys, params, x + h / 2.0, &axpy(&s, &k1, h / 2.0))?;
            let k3 = rhs(sys, params, x + h / 2.0, &axpy(&s, &k2, h / 2.0))?;
            let k4 = rhs(sys, params, x + h, &axpy(&s, &k3, h))?;
            for i in 0..4 {
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if s.iter().any(|v| !v.is_finite() || v.abs() > limit) {
                return Err(VerifyError::BlowUp { x: x + h, limit });
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Result of [`integrate_rk4`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rk4Run {
    pub trajectory: Trajectory,
    pub step: f64,
    /// Largest deviation from the same integration at half the step.
    pub halving_deviation: f64,
}

/// Classical RK4 on the first-order form of the real system, sampled on
/// `x0, x0 + h, ..., x1`, plus a half-step rerun as an error estimate.
pub fn integrate_rk4(
    sys: &CompiledSystem,
    params: &[Complex64],
    ic: [f64; 4],
    x0: f64,
    x1: f64,
    h: f64,
    tol: &Tolerances,
) -> Result<Rk4Run, VerifyError> {
    let grid = uniform_grid(x0, x1, h)?;
    integrate_rk4_on(sys, params, ic, &grid, tol)
}

/// RK4 on an explicit grid (one step per interval).
pub fn integrate_rk4_on(
    sys: &CompiledSystem,
    params: &[Complex64],
    ic: [f64; 4],
    grid: &[f64],
    tol: &Tolerances,
) -> Result<Rk4Run, VerifyError> {
    if let Some(i) = params.iter().position(|p| p.im != 0.0) {
        return Err(VerifyError::ComplexParameter(i));
    }
    let coarse = rk4_path(sys, params, ic, grid, 1, tol.blowup)?;
    let fine = rk4_path(sys, params, ic, grid, 2, tol.blowup)?;
    let diag: Vec<f64> = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
        .collect();
    let halving_deviation = diag.iter().copied().fold(0.0, f64::max);
    let f = coarse.iter().map(|s| [s[0], s[1]]).collect();
    let df = coarse.iter().map(|s| [s[2], s[3]]).collect();
    let step = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    Ok(Rk4Run { trajectory: Trajectory::new(grid.to_vec(), f, Some(df), diag)?, step, halving_deviation })
}

/// Stencil residuals `|f_i'' - w_i|` at interior points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max: f64,
    /// One entry per sample; the two points at each end are zero.
    pub per_point: Vec<[f64; 2]>,
}

/// Five-point central differences for `f'` and `f''`, then the residual of
/// the original system.
pub fn residual_check(sys: &CompiledSystem, params: &[Complex64], traj: &Trajectory) -> Result<ResidualReport, VerifyError> {
    let n = traj.len();
    if n < 5 {
        return Err(VerifyError::TooFewPoints(5));
    }
    let h = traj.x[1] - traj.x[0];
    for i in 1..n - 1 {
        let hi = traj.x[i + 1] - traj.x[i];
        if (hi - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(VerifyError::NonUniformGrid(i));
        }
    }
    let mut per_point = vec![[0.0; 2]; n];
    let mut max: f64 = 0.0;
    for i in 2..n - 2 {
        let mut s = [traj.f[i][0], traj.f[i][1], 0.0, 0.0];
        let mut d2 = [0.0; 2];
        for c in 0..2 {
            let v = |k: usize| traj.f[k][c];
            s[2 + c] = (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2)) / (12.0 * h);
            d2[c] = (-v(i - 2) + 16.0 * v(i - 1) - 30.0 * v(i) + 16.0 * v(i + 1) - v(i + 2)) / (12.0 * h * h);
        }
        let w = rhs(sys, params, traj.x[i], &s)?;
        per_point[i] = [(d2[0] - w[2]).abs(), (d2[1] - w[3]).abs()];
        max = max.max(per_point[i][0]).max(per_point[i][1]);
    }
    Ok(ResidualReport { max, per_point })
}

/// Sup-norm of the Euclidean distance in `(f1, f2)`.
pub fn compare_trajectories(a: &Trajectory, b: &Trajectory) -> Result<f64, VerifyError> {
    if a.len() != b.len() || a.x.iter().zip(&b.x).any(|(p, q)| (p - q).abs() > 1e-12 * (1.0 + p.abs())) {
        return Err(VerifyError::GridMismatch);
    }
    Ok(a.f
        .iter()
        .zip(&b.f)
        .map(|(p, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
        .fold(0.0, f64::max))
}

/// CSV with header `x,f1,f2,res1,res2`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, residuals: Option<&[[f64; 2]]>, out: W) -> Result<(), VerifyError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "f1", "f2", "res1", "res2"])?;
    for i in 0..traj.len() {
        let r = residuals.map_or([0.0; 2], |r| r[i]);
        w.serialize((traj.x[i], traj.f[i][0], traj.f[i][1], r[0], r[1]))?;
    }
    w.flush()?;
    Ok(())
}

/// Write a trajectory CSV to `path`.
pub fn emit_trajectory(traj: &Trajectory, residuals: Option<&[[f64; 2]]>, path: &Path) -> Result<(), VerifyError> {
    write_trajectory_csv(traj, residuals, std::fs::File::create(path)?)
}

/// Read the `x,f1,f2` columns of a trajectory CSV; extra columns are ignored.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory, VerifyError> {
    let mut r = csv::Reader::from_reader(input);
    let (mut x, mut f) = (Vec::new(), Vec::new());
    for row in r.deserialize() {
        let row: Vec<f64> = row?;
        if row.len() < 3 {
            return Err(VerifyError::TooFewColumns(x.len()));
        }
        x.push(row[0]);
        f.push([row[1], row[2]]);
    }
    let n = x.len();
    Trajectory::new(x, f, None, vec![0.0; n])
}

/// Write the plane geometry as pretty JSON to `path`.
pub fn emit_plane(geom: &PlaneGeometry, path: &Path) -> Result<(), VerifyError> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, geom)?;
    f.write_all(b"\n")?;
    Ok(())
}
