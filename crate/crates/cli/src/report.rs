//! The JSON report written by every subcommand, and its text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use complin_core::linearizability::ClassificationReport;
use complin_core::solve::ComplexSolution;
use complin_core::symmetry::{Relation, StructureConstants, VectorField};
use complin_core::verify::PlaneGeometry;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Input {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct SymmetrySection {
    pub degree_cap: u32,
    pub dimension: usize,
    pub lower_bound: bool,
    pub nullspace_dim: usize,
    pub equations: usize,
    pub unknowns: usize,
    pub generators: Vec<VectorField>,
    /// Every generator passes the exact prolongation check.
    pub verified: bool,
    pub structure_constants: StructureConstants,
    pub brackets: Vec<Relation>,
    pub abelian: bool,
    pub jacobi: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

/// What `verify` needs to rebuild the RK4 baseline.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Run {
    pub bindings: BTreeMap<String, String>,
    pub grid: GridSpec,
    pub points: usize,
    /// `(f1, f2, f1', f2')` at the first grid point.
    pub initial_state: [f64; 4],
    pub trajectory_csv: String,
    pub newton_max_residual: f64,
}

#[derive(Serialize)]
pub struct SolutionSection {
    pub complex: ComplexSolution,
    pub run: Run,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub residual_max: f64,
    pub residual_tolerance: f64,
    pub rk4_residual_max: f64,
    pub rk4_halving_deviation: f64,
    pub residual_csv: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub exit_code: u8,
    pub message: String,
}

#[derive(Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: &'static str,
    pub input: Option<Input>,
    pub options: serde_json::Value,
    pub classification: Option<ClassificationReport>,
    pub symmetries: Option<SymmetrySection>,
    pub solution: Option<SolutionSection>,
    pub verification: Option<Verification>,
    pub planes: Option<PlaneGeometry>,
    pub outputs: Vec<String>,
    /// Set when the command exits nonzero.
    pub error: Option<Failure>,
    /// Wall-clock milliseconds per phase; the only nondeterministic field.
    pub timings_ms: BTreeMap<&'static str, f64>,
}

impl Report {
    pub fn new(command: &'static str, input: Option<Input>, options: serde_json::Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: Tool { name: "complin", version: env!("CARGO_PKG_VERSION") },
            command,
            input,
            options,
            classification: None,
            symmetries: None,
            solution: None,
            verification: None,
            planes: None,
            outputs: Vec::new(),
            error: None,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if let Some(i) = &self.input {
            let _ = writeln!(out, "input: {} (sha256 {})", i.path, &i.sha256[..12]);
        }
        if let Some(c) = &self.classification {
            render_classification(&mut out, c);
        }
        if let Some(s) = &self.symmetries {
            render_symmetries(&mut out, s);
        }
        if let Some(s) = &self.solution {
            render_solution(&mut out, s);
        }
        if let Some(v) = &self.verification {
            let verdict = if v.passed { "pass" } else { "FAIL" };
            let _ = writeln!(out, "deviation from RK4: {:.3e} (tolerance {:.0e}) {verdict}", v.deviation, v.tolerance);
            let _ = writeln!(out, "stencil residual: {:.3e}; RK4 residual {:.3e}; RK4 step-halving {:.3e}", v.residual_max, v.rk4_residual_max, v.rk4_halving_deviation);
        }
        if let Some(g) = &self.planes {
            let _ = writeln!(out, "normals: n1 = {:?}, n2 = {:?}, n1.n2 = {}", g.n1, g.n2, g.dot);
            let _ = writeln!(out, "intersection: point {:?}, direction {:?}", g.line.point, g.line.direction);
        }
        for o in &self.outputs {
            let _ = writeln!(out, "wrote {o}");
        }
        out
    }
}

fn render_classification(out: &mut String, c: &ClassificationReport) {
    let cr = if c.cr.verdict { "satisfied".to_string() } else { format!("violated ({})", c.cr.violated.join(", ")) };
    let _ = writeln!(out, "Cauchy-Riemann: {cr}");
    if let Some(ode) = &c.complex_ode {
        let _ = writeln!(out, "complex form: {}'' = {}", ode.dep, ode.rhs_expr());
    }
    if let Some(k) = &c.cubic {
        let nz: Vec<String> = complin_core::linearizability::COEFF_NAMES
            .iter()
            .zip(k.as_array())
            .filter(|(_, r)| !r.is_zero())
            .map(|(n, r)| format!("{n} = {}", r.to_expr()))
            .collect();
        let shown = if nz.is_empty() { "all zero".to_string() } else { nz.join(", ") };
        let _ = writeln!(out, "cubic coefficients: {shown}");
    } else if let Some(e) = &c.cubic_error {
        let _ = writeln!(out, "cubic coefficients: not cubic ({e})");
    }
    if let Some(k) = &c.constraints {
        let _ = writeln!(out, "linearizability constraints: {}", if k.verdict { "all four vanish" } else { "not satisfied" });
    }
    let _ = writeln!(out, "geodesic form: {}", if c.geodesic.is_some() { "yes" } else { "no" });
    if let Some(t) = &c.canonical_type {
        let _ = writeln!(out, "canonical type: {t}");
    }
    if let Some(s) = &c.symmetry {
        let _ = writeln!(out, "symmetries (degree <= {}): {}{}", s.degree_cap, s.dimension, if s.lower_bound { " (lower bound)" } else { "" });
    } else if let Some(e) = &c.symmetry_error {
        let _ = writeln!(out, "symmetries: unavailable ({e})");
    }
    let _ = writeln!(out, "class: {} ({})", c.label, c.reason);
}

fn render_symmetries(out: &mut String, s: &SymmetrySection) {
    let _ = writeln!(out, "generators (degree <= {}): {}", s.degree_cap, s.dimension);
    for (k, g) in s.generators.iter().enumerate() {
        let _ = writeln!(out, "  X{} = {}", k + 1, g);
    }
    if s.abelian {
        let _ = writeln!(out, "all brackets vanish");
    } else {
        for r in &s.brackets {
            let _ = writeln!(out, "  {r}");
        }
    }
    let _ = writeln!(out, "generators verified: {}; Jacobi identity: {}", s.verified, s.jacobi);
}

fn render_solution(out: &mut String, s: &SolutionSection) {
    let c = &s.complex;
    let names = c.chain.names();
    let recipe = c.recipe.to_string();
    if names.len() > 1 || names.first().is_some_and(|n| *n != recipe) {
        let _ = writeln!(out, "recipe: {recipe} ({})", names.join(" -> "));
    } else {
        let _ = writeln!(out, "recipe: {recipe}");
    }
    if let Some(t) = &c.target {
        let _ = writeln!(out, "target: {t}");
    }
    let _ = writeln!(out, "relation: {} = 0", c.relation.to_expr());
    for a in &c.aliases {
        let _ = writeln!(out, "  with {a}");
    }
    let b: Vec<String> = s.run.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(
        out,
        "trajectory: {} points on [{}, {}], bindings {}",
        s.run.points,
        s.run.grid.start,
        s.run.grid.end,
        b.join(", ")
    );
}
