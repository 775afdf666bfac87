use std::fmt;

use serde::Serialize;

use super::{check_linearizability, detect_geodesic_form, extract_cubic_coefficients, ConstraintResiduals, CubicCoefficients, GeodesicForm};
use crate::analyticity::{complexify, cr_check, ComplexOde, CrReport};
use crate::expr::ExprError;
use crate::solve::{match_canonical_type, match_h_family, CanonicalType, HFamily};
use crate::symmetry::{find_symmetries_with, SymmetryBasis, SymmetryOptions, DEFAULT_DEGREE_CAP};
use crate::system::OdeSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClassLabel {
    #[serde(rename = "Y1-solvable")]
    Y1Solvable,
    Y2,
    Y3,
    #[serde(rename = "CR-fail")]
    CrFail,
    #[serde(rename = "CR-ok-unclassified")]
    CrOkUnclassified,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Y1Solvable => "Y1-solvable",
            ClassLabel::Y2 => "Y2",
            ClassLabel::Y3 => "Y3",
            ClassLabel::CrFail => "CR-fail",
            ClassLabel::CrOkUnclassified => "CR-ok-unclassified",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub symmetry: SymmetryOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { symmetry: SymmetryOptions { degree_cap: DEFAULT_DEGREE_CAP, ..SymmetryOptions::default() } }
    }
}

/// Symmetry count from the polynomial ansatz, a lower bound on the true
/// dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetrySummary {
    pub dimension: usize,
    pub degree_cap: u32,
    pub lower_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub label: ClassLabel,
    pub cr: CrReport,
    pub complex_ode: Option<ComplexOde>,
    pub cubic: Option<CubicCoefficients>,
    pub cubic_error: Option<String>,
    pub constraints: Option<ConstraintResiduals>,
    pub geodesic: Option<GeodesicForm>,
    pub canonical_type: Option<CanonicalType>,
    pub h_family: Option<HFamily>,
    pub symmetry: Option<SymmetrySummary>,
    pub symmetry_error: Option<String>,
    pub reason: String,
}

impl ClassificationReport {
    /// The label follows from the evidence fields by the classification rules.
    pub fn is_consistent(&self) -> bool {
        let constraints_ok = self.constraints.as_ref().is_some_and(|c| c.verdict);
        let dim = self.symmetry.as_ref().map(|s| s.dimension);
        match self.label {
            ClassLabel::CrFail => !self.cr.verdict,
            ClassLabel::Y2 => self.cr.verdict && (self.geodesic.is_some() || (constraints_ok && dim.is_some_and(|d| d > 4))),
            ClassLabel::Y3 => self.cr.verdict && self.geodesic.is_none() && constraints_ok && dim.is_some_and(|d| d <= 4),
            ClassLabel::Y1Solvable => self.cr.verdict && (self.canonical_type.is_some() || self.h_family.is_some()),
            ClassLabel::CrOkUnclassified => self.cr.verdict,
        }
    }
}

/// Classify with symmetries computed on demand.
pub fn classify(sys: &OdeSystem, opts: &ClassifyOptions) -> Result<ClassificationReport, ClassifyError> {
    classify_with_basis(sys, None, opts)
}

/// Classify, reusing a symmetry basis when one is supplied.
pub fn classify_with_basis(
    sys: &OdeSystem,
    basis: Option<&SymmetryBasis>,
    opts: &ClassifyOptions,
) -> Result<ClassificationReport, ClassifyError> {
    let cr = cr_check(sys)?;
    let mut r = ClassificationReport {
        label: ClassLabel::CrFail,
        cr,
        complex_ode: None,
        cubic: None,
        cubic_error: None,
        constraints: None,
        geodesic: None,
        canonical_type: None,
        h_family: None,
        symmetry: None,
        symmetry_error: None,
        reason: String::new(),
    };
    if !r.cr.verdict {
        r.reason = format!("violated: {}", r.cr.violated.join(", "));
        return Ok(r);
    }
    let ode = complexify(sys).map_err(|e| ClassifyError::Inconsistent(e.to_string()))?;
    r.canonical_type = match_canonical_type(&ode);
    r.h_family = match_h_family(&ode);
    r.complex_ode = Some(ode);
    r.geodesic = detect_geodesic_form(sys)?;
    match extract_cubic_coefficients(sys) {
        Ok(c) => {
            r.constraints = Some(check_linearizability(&c)?);
            r.cubic = Some(c);
        }
        Err(e) => r.cubic_error = Some(e.to_string()),
    }
    let constraints_ok = r.constraints.as_ref().is_some_and(|c| c.verdict);
    if constraints_ok && r.geodesic.is_none() {
        match basis {
            Some(b) => r.symmetry = Some(summary(b)),
            None => match find_symmetries_with(sys, &opts.symmetry) {
                Ok(b) => r.symmetry = Some(summary(&b)),
                Err(e) => r.symmetry_error = Some(e.to_string()),
            },
        }
    } else if let Some(b) = basis {
        r.symmetry = Some(summary(b));
    }
    let dim = r.symmetry.as_ref().map(|s| s.dimension);
    (r.label, r.reason) = if r.geodesic.is_some() {
        (ClassLabel::Y2, "geodesic-type system, linearizable by the exponential transform".into())
    } else if constraints_ok && dim.is_some_and(|d| d > 4) {
        (ClassLabel::Y2, format!("linearizability constraints hold and {} symmetries exceed 4", dim.unwrap()))
    } else if let (true, Some(d)) = (constraints_ok, dim) {
        (ClassLabel::Y3, format!("linearizability constraints hold with only {d} symmetr{}", if d == 1 { "y" } else { "ies" }))
    } else if let Some(t) = &r.canonical_type {
        (ClassLabel::Y1Solvable, format!("complex equation has {t}"))
    } else if let Some(h) = &r.h_family {
        (ClassLabel::Y1Solvable, format!("complex equation is u'' = h(u)*u' with h = ({})*u^{}", h.alpha.to_expr(), h.p))
    } else if constraints_ok {
        (ClassLabel::CrOkUnclassified, "constraints hold but the symmetry count is unavailable".into())
    } else {
        (ClassLabel::CrOkUnclassified, "no linearization or canonical-type pattern applies".into())
    };
    Ok(r)
}

fn summary(b: &SymmetryBasis) -> SymmetrySummary {
    SymmetrySummary { dimension: b.dimension(), degree_cap: b.degree_cap, lower_bound: true }
}
