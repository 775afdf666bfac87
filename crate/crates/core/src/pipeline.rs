//! End-to-end runs: solve the complex equation, invert on a grid, and
//! check the result against RK4 on the original real system.

use num_complex::Complex64;
use serde::Serialize;

use crate::corpus::StandardRun;
use crate::expr::EvalError;
use crate::solve::{invert_to_trajectory, solve_system, Bindings, ComplexSolution, SolveError, SolveOptions};
use crate::system::OdeSystem;
use crate::verify::{
    compare_trajectories, integrate_rk4_on, residual_check, uniform_grid, ResidualReport, Rk4Run, Tolerances, Trajectory, VerifyError,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("system cannot be compiled: {0}")]
    Eval(#[from] EvalError),
}

/// RK4 baseline and stencil residuals for a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub deviation: f64,
    pub residual: ResidualReport,
    #[serde(skip)]
    pub rk4: Rk4Run,
    pub rk4_halving: f64,
    pub rk4_residual: f64,
}

impl CrossCheck {
    pub fn passed(&self, tol: &Tolerances) -> bool {
        self.deviation <= tol.deviation
    }
}

/// Integrate the real system from `ic` on the trajectory's grid and compare.
pub fn cross_check(
    sys: &OdeSystem,
    params: &[Complex64],
    traj: &Trajectory,
    ic: [f64; 4],
    tol: &Tolerances,
) -> Result<CrossCheck, PipelineError> {
    let cs = sys.compile()?;
    let rk4 = integrate_rk4_on(&cs, params, ic, &traj.x, tol)?;
    let deviation = compare_trajectories(traj, &rk4.trajectory)?;
    let residual = residual_check(&cs, params, traj)?;
    let rk4_residual = residual_check(&cs, params, &rk4.trajectory)?.max;
    Ok(CrossCheck { deviation, residual, rk4_halving: rk4.halving_deviation, rk4, rk4_residual })
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub solution: ComplexSolution,
    pub trajectory: Trajectory,
    pub check: CrossCheck,
}

/// Solve, invert on `grid`, and cross-check against RK4 started from the
/// inverted initial state.
pub fn run(
    sys: &OdeSystem,
    bindings: &Bindings,
    grid: &[f64],
    opts: &SolveOptions,
    anchor: Option<Complex64>,
    tol: &Tolerances,
) -> Result<PipelineRun, PipelineError> {
    let solution = solve_system(sys, opts)?;
    let trajectory = invert_to_trajectory(&solution, bindings, grid, anchor, tol)?;
    let params = bindings.values_for(sys.params())?;
    let ic = trajectory.state(0).expect("inversion records derivatives");
    let check = cross_check(sys, &params, &trajectory, ic, tol)?;
    Ok(PipelineRun { solution, trajectory, check })
}

/// [`run`] with the bindings and grid of a corpus entry.
pub fn run_standard(sys: &OdeSystem, setup: &StandardRun, tol: &Tolerances) -> Result<PipelineRun, PipelineError> {
    let bindings = Bindings::parse_list(setup.bindings).expect("corpus bindings parse");
    let grid = uniform_grid(setup.start, setup.end, setup.step)?;
    let mut opts = SolveOptions::default();
    opts.series.radius = setup.series_radius;
    opts.series.tail_tolerance = tol.series_tail;
    run(sys, &bindings, &grid, &opts, None, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, standard_run};

    #[test]
    fn free_particle_run_is_exact() {
        let r = run_standard(&corpus::system("free"), standard_run("free").unwrap(), &Tolerances::default()).unwrap();
        assert_eq!(r.check.deviation, 0.0);
        assert!(r.check.passed(&Tolerances::default()));
    }

    #[test]
    fn sys4_run_matches_rk4() {
        let tol = Tolerances::default();
        let r = run_standard(&corpus::system("sys4"), standard_run("sys4").unwrap(), &tol).unwrap();
        assert!(r.check.deviation < 1e-7, "{}", r.check.deviation);
        assert!(r.check.residual.max < tol.residual);
    }

    #[test]
    fn complex_system_parameter_is_rejected() {
        let b = Bindings::parse_list("c1=1+i,c2=0.5,a=1,b=1").unwrap();
        let grid = uniform_grid(0.0, 0.1, 0.01).unwrap();
        let e = run(&corpus::system("sys2"), &b, &grid, &SolveOptions::default(), None, &Tolerances::default()).unwrap_err();
        assert!(matches!(e, PipelineError::Verify(VerifyError::ComplexParameter(_))), "{e}");
    }
}
