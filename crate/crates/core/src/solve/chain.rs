//! Point transformations `(x, u) -> (chi, U)` of scalar complex ODEs and
//! their pushforward certificates.

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::analyticity::{realify_function, AnalyticityError, ComplexOde};
use crate::expr::{ExprError, RatFn, Symbol};

/// `D = d/dx + u' d/du`, optionally with `w d/du'`.
fn total(g: &RatFn, ode: &ComplexOde, with_second: bool) -> Result<RatFn, ExprError> {
    let up = ode.dep_prime();
    let mut out = g.diff(&ode.indep)?.add(&RatFn::symbol(&up).mul(&g.diff(&ode.dep)?));
    if with_second {
        let d = g.diff(&up)?;
        if !d.is_zero() {
            out = out.add(&ode.rhs.mul(&d));
        }
    }
    Ok(out)
}

/// `U'` and `U''` written in the source variables, on solutions of the
/// source equation.
pub fn pushforward(source: &ComplexOde, chi: &RatFn, big_u: &RatFn) -> Result<[RatFn; 2], ExprError> {
    let dchi = total(chi, source, false)?;
    let u1 = total(big_u, source, false)?.div(&dchi)?;
    let u2 = total(&u1, source, true)?.div(&dchi)?;
    Ok([u1, u2])
}

/// One invertible step with its certificate residual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformStep {
    pub name: String,
    pub source: ComplexOde,
    pub target: ComplexOde,
    /// New independent variable in the source variables.
    pub chi: RatFn,
    /// New dependent variable in the source variables.
    pub big_u: RatFn,
    /// `U''` minus the target right-hand side, in the source variables.
    pub certificate: RatFn,
}

impl TransformStep {
    pub fn new(name: &str, source: ComplexOde, chi: RatFn, big_u: RatFn, target: ComplexOde) -> Result<Self, ExprError> {
        let [u1, u2] = pushforward(&source, &chi, &big_u)?;
        let mut m = BTreeMap::new();
        m.insert(target.indep.clone(), chi.clone());
        m.insert(target.dep.clone(), big_u.clone());
        m.insert(target.dep_prime(), u1);
        let certificate = u2.sub(&target.rhs.subs(&m)?);
        Ok(TransformStep { name: name.to_string(), source, target, chi, big_u, certificate })
    }

    pub fn certified(&self) -> bool {
        self.certificate.is_zero()
    }

    /// `(chi1, chi2, F1, F2)` with `x` real and `u = f1 + i*f2`.
    pub fn realified(&self) -> Result<[RatFn; 4], AnalyticityError> {
        let (c1, c2) = realify_function(&self.chi, &self.source.indep, &self.source.dep)?;
        let (f1, f2) = realify_function(&self.big_u, &self.source.indep, &self.source.dep)?;
        Ok([c1, c2, f1, f2])
    }
}

impl Serialize for TransformStep {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TransformStep", 6)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("source", &self.source.to_string())?;
        st.serialize_field("target", &self.target.to_string())?;
        st.serialize_field(
            "forward",
            &[
                format!("{} = {}", self.target.indep, self.chi.to_expr()),
                format!("{} = {}", self.target.dep, self.big_u.to_expr()),
            ],
        )?;
        st.serialize_field("certificate", &self.certificate.to_expr().to_string())?;
        st.serialize_field("certified", &self.certified())?;
        st.end()
    }
}

/// Steps applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TransformChain {
    pub steps: Vec<TransformStep>,
}

impl TransformChain {
    pub fn names(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn certified(&self) -> bool {
        self.steps.iter().all(TransformStep::certified)
    }

    /// The step acting on the source variables.
    pub fn first(&self) -> Option<&TransformStep> {
        self.steps.first()
    }
}

pub(crate) fn chi_symbol() -> Symbol {
    Symbol::new("chi")
}

pub(crate) fn big_u_symbol() -> Symbol {
    Symbol::new("U")
}
