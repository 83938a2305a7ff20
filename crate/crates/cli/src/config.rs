//! Run configuration: flat `key = value` files plus command-line flags.
//!
//! Resolution order is default, then file, then flag. Keys are written with
//! underscores in files; the matching flag uses hyphens (`weight_tol` and
//! `--weight-tol`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CliError, Result};

/// Every recognised key with its default. `None` means the key is required
/// by the commands that use it.
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("model", None),
    ("n", None),
    ("j", Some("1")),
    ("beta", Some("1")),
    ("phi", Some("auto")),
    ("t0", Some("0")),
    ("dt", Some("0.1")),
    ("count", Some("2048")),
    ("ensemble", Some("pure")),
    ("out", Some("out")),
    ("seed", Some("0")),
    ("samples", Some("100")),
    ("steps", Some("20")),
    ("state", Some("all-up")),
    ("compare", Some("auto")),
    ("weight_tol", Some("1e-3")),
    ("degeneracy_tol", Some("auto")),
    ("peak_rel", Some("0.01")),
    ("stability_tol", Some("1e-10")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    GhzProj,
    XyString,
    Hj,
    Ising,
    DtcEff,
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ghz-proj" => Ok(Model::GhzProj),
            "xy-string" => Ok(Model::XyString),
            "hj" => Ok(Model::Hj),
            "ising" => Ok(Model::Ising),
            "dtc-eff" => Ok(Model::DtcEff),
            _ => Err("expected one of ghz-proj, xy-string, hj, ising, dtc-eff".into()),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::GhzProj => "ghz-proj",
            Model::XyString => "xy-string",
            Model::Hj => "hj",
            Model::Ising => "ising",
            Model::DtcEff => "dtc-eff",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    Pure,
    Mixed,
    Thermal,
}

impl FromStr for Ensemble {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pure" => Ok(Ensemble::Pure),
            "mixed" => Ok(Ensemble::Mixed),
            "thermal" => Ok(Ensemble::Thermal),
            _ => Err("expected one of pure, mixed, thermal".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    AllUp,
    GhzPlus,
    GhzMinus,
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all-up" => Ok(InitialState::AllUp),
            "ghz+" => Ok(InitialState::GhzPlus),
            "ghz-" => Ok(InitialState::GhzMinus),
            _ => Err("expected one of all-up, ghz+, ghz-".into()),
        }
    }
}

/// Uniform Ising phase per bond, or `auto` for `-1/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phi {
    Auto,
    Value(f64),
}

impl Phi {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Phi::Auto => -1.0 / n as f64,
            Phi::Value(v) => v,
        }
    }
}

/// A file value replaced by a flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Override {
    pub key: String,
    pub file: String,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Option<Model>,
    pub n: usize,
    pub coupling: f64,
    pub beta: f64,
    pub phi: Phi,
    pub t0: f64,
    pub dt: f64,
    pub count: usize,
    pub ensemble: Ensemble,
    pub out: PathBuf,
    pub seed: u64,
    pub samples: usize,
    pub steps: usize,
    pub state: InitialState,
    pub compare: Option<bool>,
    pub weight_tol: f64,
    /// Absolute tolerance; `None` scales with the spectral span.
    pub degeneracy_tol: Option<f64>,
    pub peak_rel: f64,
    pub stability_tol: f64,
    /// Effective `key -> value` strings after precedence.
    pub resolved: BTreeMap<String, String>,
    pub overrides: Vec<Override>,
    pub source: Option<PathBuf>,
}

impl RunConfig {
    pub fn require_model(&self) -> Result<Model> {
        self.model
            .ok_or_else(|| CliError::MissingKey("model".into()))
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

/// Parses `key = value` lines. `#` starts a comment line.
pub fn parse_config_text(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Syntax {
                path: origin.to_path_buf(),
                line: idx + 1,
                message: "expected `key = value`".into(),
            });
        };
        let key = normalize_key(key);
        if !known(&key) {
            return Err(CliError::UnknownKey(key));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Syntax {
                path: origin.to_path_buf(),
                line: idx + 1,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(map)
}

fn typed<T: FromStr>(map: &BTreeMap<String, String>, key: &str, what: &str) -> Result<T> {
    let raw = map
        .get(key)
        .ok_or_else(|| CliError::MissingKey(key.to_string()))?;
    raw.parse().map_err(|_| CliError::InvalidValue {
        key: key.to_string(),
        message: format!("expected {what}, got {raw:?}"),
    })
}

fn choice<T: FromStr<Err = String>>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = map
        .get(key)
        .ok_or_else(|| CliError::MissingKey(key.to_string()))?;
    raw.parse().map_err(|message| CliError::InvalidValue {
        key: key.to_string(),
        message: format!("{message}, got {raw:?}"),
    })
}

fn invalid(key: &str, message: impl Into<String>) -> CliError {
    CliError::InvalidValue {
        key: key.to_string(),
        message: message.into(),
    }
}

fn finite(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let v: f64 = typed(map, key, "a number")?;
    if !v.is_finite() {
        return Err(invalid(key, format!("expected a finite number, got {v}")));
    }
    Ok(v)
}

fn positive(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let v = finite(map, key)?;
    if v <= 0.0 {
        return Err(invalid(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

/// Merges defaults, an optional file and flags into a validated config.
pub fn resolve(file: Option<&Path>, flags: &[(&str, String)]) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = KEYS
        .iter()
        .filter_map(|(k, d)| d.map(|d| (k.to_string(), d.to_string())))
        .collect();
    let file_values = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            parse_config_text(&text, path)?
        }
        None => BTreeMap::new(),
    };
    map.extend(file_values.clone());
    let mut overrides = Vec::new();
    for (key, value) in flags {
        let key = normalize_key(key);
        if !known(&key) {
            return Err(CliError::UnknownKey(key));
        }
        if let Some(old) = file_values.get(&key) {
            if old != value {
                overrides.push(Override {
                    key: key.clone(),
                    file: old.clone(),
                    flag: value.clone(),
                });
            }
        }
        map.insert(key, value.clone());
    }

    let model = match map.get("model") {
        Some(_) => Some(choice::<Model>(&map, "model")?),
        None => None,
    };
    let n: usize = typed(&map, "n", "a non-negative integer")?;
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    tc_core::check_capacity(n).map_err(|err| invalid("n", err.to_string()))?;

    let beta = finite(&map, "beta")?;
    if beta < 0.0 {
        return Err(invalid("beta", format!("must be non-negative, got {beta}")));
    }
    let phi = match map["phi"].as_str() {
        "auto" => Phi::Auto,
        _ => Phi::Value(finite(&map, "phi")?),
    };
    let count: usize = typed(&map, "count", "a non-negative integer")?;
    if count < 2 {
        return Err(invalid("count", format!("must be at least 2, got {count}")));
    }
    let compare = match map["compare"].as_str() {
        "auto" => None,
        _ => Some(typed(&map, "compare", "true, false or auto")?),
    };
    let degeneracy_tol = match map["degeneracy_tol"].as_str() {
        "auto" => None,
        _ => Some(positive(&map, "degeneracy_tol")?),
    };
    let steps: usize = typed(&map, "steps", "a non-negative integer")?;
    if steps == 0 {
        return Err(invalid("steps", "must be at least 1"));
    }

    Ok(RunConfig {
        model,
        n,
        coupling: finite(&map, "j")?,
        beta,
        phi,
        t0: finite(&map, "t0")?,
        dt: positive(&map, "dt")?,
        count,
        ensemble: choice(&map, "ensemble")?,
        out: PathBuf::from(&map["out"]),
        seed: typed(&map, "seed", "a non-negative integer")?,
        samples: typed(&map, "samples", "a non-negative integer")?,
        steps,
        state: choice(&map, "state")?,
        compare,
        weight_tol: positive(&map, "weight_tol")?,
        degeneracy_tol,
        peak_rel: positive(&map, "peak_rel")?,
        stability_tol: positive(&map, "stability_tol")?,
        resolved: map,
        overrides,
        source: file.map(Path::to_path_buf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&'static str, &str)]) -> Vec<(&'static str, String)> {
        pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
    }

    #[test]
    fn defaults_apply() {
        let cfg = resolve(None, &flags(&[("model", "xy-string"), ("n", "6")])).unwrap();
        assert_eq!(cfg.model, Some(Model::XyString));
        assert_eq!(cfg.n, 6);
        assert_eq!(cfg.dt, 0.1);
        assert_eq!(cfg.count, 2048);
        assert_eq!(cfg.t0, 0.0);
        assert_eq!(cfg.coupling, 1.0);
        assert_eq!(cfg.ensemble, Ensemble::Pure);
        assert_eq!(cfg.phi, Phi::Auto);
        assert_eq!(cfg.compare, None);
        assert!(cfg.overrides.is_empty());
    }

    #[test]
    fn file_syntax() {
        let text = "# comment\n\nmodel = hj\nn=8\n weight-tol = 1e-4 \n";
        let map = parse_config_text(text, Path::new("x.cfg")).unwrap();
        assert_eq!(map["model"], "hj");
        assert_eq!(map["n"], "8");
        assert_eq!(map["weight_tol"], "1e-4");

        let err = parse_config_text("colour = red\n", Path::new("x.cfg")).unwrap_err();
        assert!(err.to_string().contains("`colour`"));
        let err = parse_config_text("n = 3\nn = 4\n", Path::new("x.cfg")).unwrap_err();
        assert!(err.to_string().contains("`n`"));
        assert!(parse_config_text("just words\n", Path::new("x.cfg")).is_err());
    }

    #[test]
    fn errors_name_the_key() {
        let err = resolve(None, &flags(&[("n", "six")])).unwrap_err();
        assert!(err.to_string().contains("`n`"), "{err}");
        let err = resolve(None, &flags(&[("n", "4"), ("dt", "-1")])).unwrap_err();
        assert!(err.to_string().contains("`dt`"), "{err}");
        let err = resolve(None, &flags(&[("n", "4"), ("count", "1")])).unwrap_err();
        assert!(err.to_string().contains("`count`"), "{err}");
        let err = resolve(None, &flags(&[("n", "4"), ("beta", "-0.5")])).unwrap_err();
        assert!(err.to_string().contains("`beta`"), "{err}");
        let err = resolve(None, &flags(&[("n", "4"), ("model", "heisenberg")])).unwrap_err();
        assert!(err.to_string().contains("`model`"), "{err}");
        let err = resolve(None, &flags(&[("n", "4"), ("compare", "maybe")])).unwrap_err();
        assert!(err.to_string().contains("`compare`"), "{err}");
        let err = resolve(None, &flags(&[("model", "hj")])).unwrap_err();
        assert!(matches!(err, CliError::MissingKey(ref k) if k == "n"));
    }

    #[test]
    fn capacity_limit() {
        let err = resolve(None, &flags(&[("model", "hj"), ("n", "20")])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`n`") && msg.contains("2^14"), "{msg}");
    }

    #[test]
    fn phi_and_tolerances() {
        let cfg = resolve(
            None,
            &flags(&[
                ("n", "5"),
                ("phi", "0.25"),
                ("degeneracy_tol", "1e-6"),
                ("compare", "false"),
            ]),
        )
        .unwrap();
        assert_eq!(cfg.phi.resolve(5), 0.25);
        assert_eq!(Phi::Auto.resolve(5), -0.2);
        assert_eq!(cfg.degeneracy_tol, Some(1e-6));
        assert_eq!(cfg.compare, Some(false));
    }
}
