//! `complin.toml`: tolerances, degree caps and series settings. Values set
//! on the command line win over the file, which wins over built-in defaults.

use std::path::{Path, PathBuf};

use complin_core::symmetry::{DEFAULT_DEGREE_CAP, DEFAULT_MAX_ENTRIES};
use complin_core::verify::Tolerances;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_ENV: &str = "COMPLIN_CONFIG";
pub const CONFIG_FILE: &str = "complin.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymmetryConfig {
    pub degree: u32,
    pub max_entries: usize,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        SymmetryConfig { degree: DEFAULT_DEGREE_CAP, max_entries: DEFAULT_MAX_ENTRIES }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesConfig {
    /// Fixed truncation order; unset picks one from the tail tolerance.
    pub order: Option<usize>,
    pub force: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tolerances: Tolerances,
    pub symmetry: SymmetryConfig,
    pub series: SeriesConfig,
}

impl Config {
    /// `explicit`, else `$COMPLIN_CONFIG`, else `./complin.toml` if present.
    pub fn locate(explicit: Option<&Path>) -> Option<PathBuf> {
        if let Some(p) = explicit {
            return Some(p.to_path_buf());
        }
        if let Some(p) = std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty()) {
            return Some(PathBuf::from(p));
        }
        let local = PathBuf::from(CONFIG_FILE);
        local.is_file().then_some(local)
    }

    pub fn load(explicit: Option<&Path>) -> Result<(Config, Option<PathBuf>), CliError> {
        let Some(path) = Config::locate(explicit) else {
            return Ok((Config::default(), None));
        };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let cfg = Config::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Ok((cfg, Some(path)))
    }

    pub fn parse(text: &str) -> Result<Config, toml::de::Error> {
        toml::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c = Config::parse("[tolerances]\ndeviation = 1e-9\n[symmetry]\ndegree = 3\n").unwrap();
        assert_eq!(c.tolerances.deviation, 1e-9);
        assert_eq!(c.tolerances.newton_tol, Tolerances::default().newton_tol);
        assert_eq!(c.symmetry.degree, 3);
        assert_eq!(c.series, SeriesConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse("[symmetry]\ndegre = 3\n").is_err());
        assert!(Config::parse("[tolerances]\nfoo = 1\n").is_err());
    }
}
