use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use complin_core::analyticity::{cr_check, realify, ComplexOde};
use complin_core::linearizability::{classify, ClassifyError, ClassifyOptions};
use complin_core::parser::{parse_document, Document};
use complin_core::pipeline::{self, CrossCheck};
use complin_core::solve::{fmt_complex, parse_complex, Bindings, SolveOptions};
use complin_core::symmetry::{find_symmetries_with, is_symmetry, jacobi_holds, structure_constants, SymmetryError, SymmetryOptions, MAX_DEGREE_CAP};
use complin_core::system::OdeSystem;
use complin_core::verify::{emit_plane, emit_trajectory, plane_geometry, read_trajectory_csv, uniform_grid, Tolerances, VerifyError};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{code, CliError};
use crate::report::{GridSpec, Input, Report, Run, SolutionSection, SymmetrySection, Verification};

const MIN_POINTS: usize = 5;

pub struct Loaded {
    pub system: OdeSystem,
    pub input: Input,
}

/// Read a `.odesys` file; complex documents are realified.
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::input(format!("{} is not UTF-8", path.display())))?;
    let parse_err = |e: &dyn std::fmt::Display| CliError::input(format!("{}:{e}", path.display()));
    let system = match parse_document(&text).map_err(|e| parse_err(&e))? {
        Document::System(doc) => OdeSystem::from_document(&doc).map_err(|e| parse_err(&e))?,
        Document::Complex(doc) => {
            let ode = ComplexOde::from_document(&doc).map_err(|e| parse_err(&e))?;
            realify(&ode).map_err(|e| parse_err(&e))?
        }
    };
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    Ok(Loaded { system, input: Input { path: path.display().to_string(), sha256 } })
}

fn ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn degree(flag: Option<u32>, cfg: &Config) -> Result<u32, CliError> {
    let d = flag.unwrap_or(cfg.symmetry.degree);
    if d == 0 || d > MAX_DEGREE_CAP {
        return Err(CliError::input(format!("degree must be between 1 and {MAX_DEGREE_CAP}, got {d}")));
    }
    Ok(d)
}

fn symmetry_error(e: SymmetryError) -> CliError {
    match e {
        SymmetryError::InvalidDegree(_) => CliError::input(e.to_string()),
        e => CliError::internal(e.to_string()),
    }
}

pub fn classify_cmd(file: &Path, deg: Option<u32>, cfg: &Config) -> Result<Report, CliError> {
    let t = Instant::now();
    let Loaded { system, input } = load(file)?;
    let d = degree(deg, cfg)?;
    let mut report = Report::new("classify", Some(input), json!({ "degree": d, "max_entries": cfg.symmetry.max_entries }));
    report.timings_ms.insert("parse", ms(t));
    let t = Instant::now();
    let opts = ClassifyOptions { symmetry: SymmetryOptions { degree_cap: d, max_entries: cfg.symmetry.max_entries } };
    let c = classify(&system, &opts).map_err(|e| match e {
        ClassifyError::Inconsistent(m) => CliError::internal(format!("inconsistent analysis: {m}")),
        e => CliError::internal(e.to_string()),
    })?;
    report.timings_ms.insert("classify", ms(t));
    let consistent = c.is_consistent();
    let label = c.label;
    report.classification = Some(c);
    if !consistent {
        return Err(CliError::internal(format!("label {label} contradicts the evidence")).with_report(report));
    }
    Ok(report)
}

pub fn symmetries_cmd(file: &Path, deg: Option<u32>, cfg: &Config) -> Result<Report, CliError> {
    let t = Instant::now();
    let Loaded { system, input } = load(file)?;
    let d = degree(deg, cfg)?;
    let mut report = Report::new("symmetries", Some(input), json!({ "degree": d, "max_entries": cfg.symmetry.max_entries }));
    report.timings_ms.insert("parse", ms(t));
    let t = Instant::now();
    let basis = find_symmetries_with(&system, &SymmetryOptions { degree_cap: d, max_entries: cfg.symmetry.max_entries }).map_err(symmetry_error)?;
    report.timings_ms.insert("determining_equations", ms(t));
    let t = Instant::now();
    let mut verified = true;
    for f in &basis.fields {
        verified &= is_symmetry(f, &system).map_err(symmetry_error)?.holds;
    }
    let sc = structure_constants(&basis.fields).map_err(symmetry_error)?;
    let jacobi = jacobi_holds(&basis.fields).map_err(|e| CliError::internal(e.to_string()))?;
    report.timings_ms.insert("algebra", ms(t));
    report.symmetries = Some(SymmetrySection {
        degree_cap: basis.degree_cap,
        dimension: basis.dimension(),
        lower_bound: true,
        nullspace_dim: basis.nullspace_dim,
        equations: basis.equations,
        unknowns: basis.unknowns,
        brackets: sc.relations(),
        abelian: sc.is_abelian(),
        structure_constants: sc,
        generators: basis.fields,
        verified,
        jacobi,
    });
    if !verified || !jacobi {
        return Err(CliError::internal("symmetry basis failed its own checks").with_report(report));
    }
    Ok(report)
}

pub fn parse_grid(s: &str) -> Result<GridSpec, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::input(format!("grid must be start:end:step, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok(GridSpec { start: v[0], end: v[1], step: v[2] })
}

pub fn parse_bindings(params: &[String]) -> Result<Bindings, CliError> {
    let mut b = Bindings::new();
    for p in params {
        b.extend_from_str(p).map_err(CliError::input)?;
    }
    Ok(b)
}

fn bindings_map(b: &Bindings) -> BTreeMap<String, String> {
    b.iter().map(|(k, v)| (k.clone(), fmt_complex(*v))).collect()
}

fn verification(check: &CrossCheck, tol: &Tolerances, residual_csv: Option<String>) -> Verification {
    Verification {
        deviation: check.deviation,
        tolerance: tol.deviation,
        passed: check.passed(tol),
        residual_max: check.residual.max,
        residual_tolerance: tol.residual,
        rk4_residual_max: check.rk4_residual,
        rk4_halving_deviation: check.rk4_halving,
        residual_csv,
    }
}

pub struct SolveArgs<'a> {
    pub file: &'a Path,
    pub params: &'a [String],
    pub grid: &'a str,
    pub series_order: Option<usize>,
    pub radius: Option<f64>,
    pub force_series: bool,
    pub anchor: Option<&'a str>,
    pub csv: Option<PathBuf>,
}

fn default_output(file: &Path, suffix: &str) -> PathBuf {
    let stem = file.file_stem().map_or("out".into(), |s| s.to_string_lossy().into_owned());
    PathBuf::from(format!("{stem}.{suffix}"))
}

pub fn solve_cmd(a: SolveArgs<'_>, cfg: &Config) -> Result<Report, CliError> {
    let t = Instant::now();
    let Loaded { system, input } = load(a.file)?;
    let tol = cfg.tolerances;
    let bindings = parse_bindings(a.params)?;
    let grid_spec = parse_grid(a.grid)?;
    let anchor = a.anchor.map(|s| parse_complex(s).ok_or_else(|| CliError::input(format!("cannot parse anchor `{s}`")))).transpose()?;
    let mut opts = SolveOptions::default();
    opts.series.order = a.series_order.or(cfg.series.order);
    opts.series.radius = a.radius.unwrap_or(tol.series_radius);
    opts.series.tail_tolerance = tol.series_tail;
    opts.force_series = a.force_series || cfg.series.force;
    let csv = a.csv.unwrap_or_else(|| default_output(a.file, "trajectory.csv"));
    let options = json!({
        "params": bindings_map(&bindings),
        "grid": grid_spec,
        "series_order": opts.series.order,
        "series_radius": opts.series.radius,
        "force_series": opts.force_series,
        "anchor": anchor.map(fmt_complex),
        "tolerances": tol,
    });
    let mut report = Report::new("solve", Some(input), options);
    report.timings_ms.insert("parse", ms(t));
    let cr = cr_check(&system).map_err(|e| CliError::internal(e.to_string()))?;
    if !cr.verdict {
        return Err(CliError::new(code::NO_RECIPE, format!("no complex recipe: Cauchy-Riemann violated ({})", cr.violated.join(", "))).with_report(report));
    }
    let grid = uniform_grid(grid_spec.start, grid_spec.end, grid_spec.step)?;
    if grid.len() < MIN_POINTS {
        return Err(CliError::input(format!("grid has {} points; the residual stencil needs at least {MIN_POINTS}", grid.len())));
    }
    let t = Instant::now();
    let run = match pipeline::run(&system, &bindings, &grid, &opts, anchor, &tol) {
        Ok(r) => r,
        Err(e) => return Err(CliError::from(e).with_report(report)),
    };
    report.timings_ms.insert("solve_and_verify", ms(t));
    emit_trajectory(&run.trajectory, Some(&run.check.residual.per_point), &csv)?;
    report.outputs.push(csv.display().to_string());
    let ic = run.trajectory.state(0).expect("inversion records derivatives");
    report.solution = Some(SolutionSection {
        complex: run.solution,
        run: Run {
            bindings: bindings_map(&bindings),
            grid: grid_spec,
            points: run.trajectory.len(),
            initial_state: ic,
            trajectory_csv: csv.display().to_string(),
            newton_max_residual: run.trajectory.diag.iter().copied().fold(0.0, f64::max),
        },
    });
    let v = verification(&run.check, &tol, None);
    let passed = v.passed;
    report.verification = Some(v);
    if !passed {
        let dev = run.check.deviation;
        return Err(CliError::new(code::VERIFY, format!("deviation {dev:e} exceeds {:e}", tol.deviation)).with_report(report));
    }
    Ok(report)
}

/// Resolve a path recorded in a report: as given, else next to the report.
fn resolve_recorded(recorded: &str, report_path: &Path) -> PathBuf {
    let p = PathBuf::from(recorded);
    if p.is_absolute() || p.exists() {
        return p;
    }
    report_path.parent().map_or(p.clone(), |d| d.join(&p))
}

pub fn verify_cmd(file: &Path, solution: &Path, grid: Option<&str>, csv: Option<PathBuf>, cfg: &Config) -> Result<Report, CliError> {
    let t = Instant::now();
    let Loaded { system, input } = load(file)?;
    let tol = cfg.tolerances;
    let text = std::fs::read_to_string(solution).map_err(|e| CliError::input(format!("cannot read {}: {e}", solution.display())))?;
    let corrupt = |m: String| CliError::new(code::VERIFY, format!("{}: {m}", solution.display()));
    let prior: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let run: Run = serde_json::from_value(prior["solution"]["run"].clone()).map_err(|e| corrupt(format!("not a solve report: {e}")))?;
    let recorded: Option<Input> = serde_json::from_value(prior["input"].clone()).ok();
    if recorded.as_ref().is_some_and(|r| r.sha256 != input.sha256) {
        return Err(corrupt("produced for a different system file".into()));
    }
    let options = json!({ "solution": solution.display().to_string(), "grid": grid, "tolerances": tol });
    let mut report = Report::new("verify", Some(input), options);
    let traj_path = resolve_recorded(&run.trajectory_csv, solution);
    let f = std::fs::File::open(&traj_path).map_err(|e| CliError::input(format!("cannot read {}: {e}", traj_path.display())))?;
    let traj = match read_trajectory_csv(f) {
        Ok(t) => t,
        Err(e) => return Err(CliError::new(code::VERIFY, format!("{}: {e}", traj_path.display())).with_report(report)),
    };
    if let Some(g) = grid {
        let g = parse_grid(g)?;
        let want = uniform_grid(g.start, g.end, g.step)?;
        if want.len() != traj.len() || want.iter().zip(&traj.x).any(|(p, q)| (p - q).abs() > 1e-12 * (1.0 + p.abs())) {
            return Err(CliError::from(VerifyError::GridMismatch).with_report(report));
        }
    }
    let bindings = parse_bindings(&run.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>())?;
    let params = bindings.values_for(system.params())?;
    report.timings_ms.insert("load", ms(t));
    let t = Instant::now();
    let check = match pipeline::cross_check(&system, &params, &traj, run.initial_state, &tol) {
        Ok(c) => c,
        Err(e) => return Err(CliError::from(e).with_report(report)),
    };
    report.timings_ms.insert("rk4", ms(t));
    let out = csv.unwrap_or_else(|| default_output(file, "residuals.csv"));
    emit_trajectory(&traj, Some(&check.residual.per_point), &out)?;
    report.outputs.push(out.display().to_string());
    let v = verification(&check, &tol, Some(out.display().to_string()));
    let passed = v.passed;
    report.verification = Some(v);
    if !passed {
        return Err(CliError::new(code::VERIFY, format!("deviation {:e} exceeds {:e}", check.deviation, tol.deviation)).with_report(report));
    }
    Ok(report)
}

pub fn plot_planes_cmd(coeffs: &str, out: &Path) -> Result<Report, CliError> {
    let c: Vec<f64> = coeffs
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::input(format!("cannot parse `{v}` as a number"))))
        .collect::<Result<_, _>>()?;
    let c: [f64; 4] = c.try_into().map_err(|_| CliError::input("expected four coefficients c1,c2,c3,c4"))?;
    let mut report = Report::new("plot-planes", None, json!({ "coeffs": c }));
    let t = Instant::now();
    let geom = plane_geometry(c).map_err(|e| CliError::input(e.to_string()))?;
    emit_plane(&geom, out)?;
    report.timings_ms.insert("geometry", ms(t));
    report.outputs.push(out.display().to_string());
    report.planes = Some(geom);
    Ok(report)
}
