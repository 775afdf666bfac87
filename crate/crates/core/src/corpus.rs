//! The bundled `.odesys` systems.

use crate::system::{OdeSystem, SystemError};

pub const SOURCES: [(&str, &str); 9] = [
    ("sys1", include_str!("../../../corpus/sys1.odesys")),
    ("sys2", include_str!("../../../corpus/sys2.odesys")),
    ("sys3", include_str!("../../../corpus/sys3.odesys")),
    ("sys4", include_str!("../../../corpus/sys4.odesys")),
    ("sys5", include_str!("../../../corpus/sys5.odesys")),
    ("sys6", include_str!("../../../corpus/sys6.odesys")),
    ("sys7", include_str!("../../../corpus/sys7.odesys")),
    ("free", include_str!("../../../corpus/free.odesys")),
    ("noncr", include_str!("../../../corpus/noncr.odesys")),
];

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parse a bundled system by name.
pub fn load(name: &str) -> Option<Result<OdeSystem, SystemError>> {
    source(name).map(OdeSystem::parse)
}

/// Parse a bundled system that is known to be well-formed.
pub fn system(name: &str) -> OdeSystem {
    load(name).unwrap_or_else(|| panic!("no corpus entry `{name}`")).expect("corpus entry parses")
}

/// Parameter bindings and grid for the end-to-end run of a corpus entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardRun {
    pub name: &'static str,
    pub bindings: &'static str,
    pub start: f64,
    pub end: f64,
    pub step: f64,
    /// Disc radius for series solutions of the target equation.
    pub series_radius: f64,
    /// Intervals where the inversion is singular for these bindings; the
    /// grid stays clear of them.
    pub excluded: &'static [(f64, f64)],
}

pub const STANDARD_RUNS: [StandardRun; 8] = [
    StandardRun { name: "sys1", bindings: "c1=1+0.5i,c2=0", start: 0.0, end: 1.0, step: 1e-3, series_radius: 2.0, excluded: &[] },
    StandardRun { name: "sys2", bindings: "c1=1,c2=0.5,a=1,b=1", start: 0.0, end: 1.0, step: 1e-3, series_radius: 2.0, excluded: &[] },
    // The branch point x = a^2/2 is off the real axis.
    StandardRun { name: "sys3", bindings: "a=2+0.5i,b=0", start: 0.0, end: 1.0, step: 1e-3, series_radius: 2.0, excluded: &[] },
    StandardRun { name: "sys4", bindings: "a=1,b=1+i", start: 0.0, end: 1.0, step: 1e-3, series_radius: 2.0, excluded: &[] },
    StandardRun { name: "sys5", bindings: "a=1+i,b=0", start: 0.0, end: 1.0, step: 1e-3, series_radius: 2.0, excluded: &[] },
    // dx/du vanishes on the Airy relation near x = 0.536; stencil
    // residuals grow as the grid approaches it.
    StandardRun { name: "sys6", bindings: "c1=1,c2=0", start: 0.0, end: 0.45, step: 1e-3, series_radius: 3.0, excluded: &[(0.535, 0.537)] },
    StandardRun { name: "sys7", bindings: "a1=0,a2=0,b1=1,b2=1", start: 1.0, end: 2.0, step: 1e-3, series_radius: 2.0, excluded: &[] },
    StandardRun { name: "free", bindings: "a=1,b=0", start: 0.0, end: 1.0, step: 1e-3, series_radius: 2.0, excluded: &[] },
];

pub fn standard_run(name: &str) -> Option<&'static StandardRun> {
    STANDARD_RUNS.iter().find(|r| r.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses() {
        for (name, _) in SOURCES {
            assert!(load(name).unwrap().is_ok(), "{name}");
        }
    }

    #[test]
    fn runs_avoid_their_exclusions() {
        for r in &STANDARD_RUNS {
            assert!(source(r.name).is_some());
            assert!(r.excluded.iter().all(|&(a, b)| b < r.start || a > r.end), "{}", r.name);
        }
    }
}
