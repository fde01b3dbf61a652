//! Layered run configuration: command-line flag, then config file, then
//! built-in default. The config file is flat TOML; unknown keys are
//! rejected so typos fail loudly instead of silently running defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub restarts: Option<usize>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub fine_grid: Option<usize>,
    pub tol: Option<f64>,
    pub b_pair: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub trials: Option<usize>,
    pub suite: Option<String>,
    pub cert: Option<PathBuf>,
    pub polynomial: Option<PathBuf>,
    pub tuple: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub op: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

/// `flag.or(config).unwrap_or(default)`, the precedence rule for every
/// parameter.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// As [`pick`], for parameters with no default (stay optional).
pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub struct Bound {
    pub name: &'static str,
    pub min: u64,
    pub max: u64,
}

/// Documented bounds for every numeric parameter.
pub const BOUNDS: &[Bound] = &[
    Bound { name: "n", min: 2, max: 16 },
    Bound { name: "restarts", min: 1, max: 1_000_000 },
    Bound { name: "budget", min: 1, max: u64::MAX },
    Bound { name: "grid", min: 4, max: 1 << 20 },
    Bound { name: "fine_grid", min: 4, max: 1 << 20 },
    Bound { name: "workers", min: 0, max: 4096 },
    Bound { name: "trials", min: 1, max: 10_000_000 },
];

pub fn check_bound(name: &str, value: u64) -> Result<(), String> {
    let bound = BOUNDS
        .iter()
        .find(|b| b.name == name)
        .unwrap_or_else(|| panic!("unknown bound {name}"));
    if value < bound.min || value > bound.max {
        return Err(format!(
            "{name} = {value} outside the documented range [{}, {}]",
            bound.min, bound.max
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_fail() {
        let err = toml::from_str::<FileConfig>("bogus = 1").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn precedence_is_flag_config_default() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick::<usize>(None, None, 3), 3);
    }

    #[test]
    fn bounds_reject_out_of_range() {
        assert!(check_bound("n", 1).is_err());
        assert!(check_bound("n", 2).is_ok());
        assert!(check_bound("grid", 3).is_err());
    }
}
