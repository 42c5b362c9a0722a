//! Structured-text run configuration.
//!
//! Sections `[wavefunction]`, `[ensemble]`, `[encounters]`, `[output]` with
//! `key = value` lines; `term` may repeat inside `[wavefunction]`. `#` and `;`
//! start comments.

use num_complex::Complex64;
use thiserror::Error;

use crate::nodal::Family;
use crate::wavefield::{Term, WaveSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing required key '{0}'")]
    MissingKey(String),
    #[error("invalid value for '{key}': {msg}")]
    BadValue { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parsed key-value sections, preserving repeated keys in order.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig, ConfigError> {
        let mut cfg = RawConfig::default();
        let mut current: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(&['#', ';'][..]).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(ConfigError::Parse {
                        line: lineno + 1,
                        msg: "unterminated section header".into(),
                    });
                }
                let name = line[1..line.len() - 1].trim().to_lowercase();
                cfg.sections.push((name, Vec::new()));
                current = Some(cfg.sections.len() - 1);
            } else if let Some((key, value)) = line.split_once('=') {
                let idx = current.ok_or(ConfigError::Parse {
                    line: lineno + 1,
                    msg: "key outside any [section]".into(),
                })?;
                cfg.sections[idx]
                    .1
                    .push((key.trim().to_lowercase(), value.trim().to_string()));
            } else {
                return Err(ConfigError::Parse {
                    line: lineno + 1,
                    msg: format!("expected 'key = value', got '{line}'"),
                });
            }
        }
        Ok(cfg)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .filter(|(s, _)| s == section)
            .flat_map(|(_, kv)| kv.iter())
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_all(&self, section: &str, key: &str) -> Vec<&str> {
        self.sections
            .iter()
            .filter(|(s, _)| s == section)
            .flat_map(|(_, kv)| kv.iter())
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|e| ConfigError::BadValue { key: key.into(), msg: e.to_string() }),
        }
    }
}

/// The default frequency ratio `omega_2/omega_1 = sqrt(2)/2`.
pub const DEFAULT_C: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A wavefunction given either as a named model family or as raw terms.
#[derive(Debug, Clone)]
pub enum WaveConfig {
    Preset(Family),
    Raw(WaveSpec),
}

impl WaveConfig {
    pub fn spec(&self) -> WaveSpec {
        match self {
            WaveConfig::Preset(f) => f.spec(),
            WaveConfig::Raw(s) => s.clone(),
        }
    }

    pub fn family(&self) -> Option<&Family> {
        match self {
            WaveConfig::Preset(f) => Some(f),
            WaveConfig::Raw(_) => None,
        }
    }
}

/// Build a model family from a preset name and parameters.
pub fn family_from_name(
    name: &str,
    a: f64,
    b: f64,
    eps: f64,
    c: f64,
) -> Result<Family, ConfigError> {
    match name {
        "ekc" => Ok(Family::Ekc { a, b, c }),
        "case-eps20" | "eps20" => Ok(Family::Eps20 { a, b, eps, c }),
        "case-20" | "case20" => Ok(Family::Case20 { a, b, c }),
        "case-30" | "case30" => Ok(Family::Case30 { a, b, c }),
        other => Err(ConfigError::BadValue {
            key: "preset".into(),
            msg: format!("unknown preset '{other}' (ekc, case-eps20, case-20, case-30)"),
        }),
    }
}

/// Parse the `[wavefunction]` section.
pub fn parse_wavefunction(cfg: &RawConfig) -> Result<WaveConfig, ConfigError> {
    let c = cfg.get_f64("wavefunction", "c")?.unwrap_or(DEFAULT_C);
    if let Some(preset) = cfg.get("wavefunction", "preset") {
        let a = cfg.get_f64("wavefunction", "a")?.unwrap_or(1.0);
        let b = cfg.get_f64("wavefunction", "b")?.unwrap_or(1.0);
        let eps = cfg.get_f64("wavefunction", "eps")?.unwrap_or(0.1);
        return Ok(WaveConfig::Preset(family_from_name(preset, a, b, eps, c)?));
    }
    let term_lines = cfg.get_all("wavefunction", "term");
    if term_lines.is_empty() {
        return Err(ConfigError::MissingKey(
            "[wavefunction] needs 'preset' or at least one 'term'".into(),
        ));
    }
    let mut terms = Vec::new();
    for line in term_lines {
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(ConfigError::BadValue {
                key: "term".into(),
                msg: format!("expected 'n1, n2, re, im', got '{line}'"),
            });
        }
        let parse_u = |s: &str| {
            s.parse::<u32>().map_err(|e| ConfigError::BadValue {
                key: "term".into(),
                msg: e.to_string(),
            })
        };
        let parse_f = |s: &str| {
            s.parse::<f64>().map_err(|e| ConfigError::BadValue {
                key: "term".into(),
                msg: e.to_string(),
            })
        };
        terms.push(Term {
            n1: parse_u(parts[0])?,
            n2: parse_u(parts[1])?,
            coeff: Complex64::new(parse_f(parts[2])?, parse_f(parts[3])?),
        });
    }
    let spec = WaveSpec::new(terms, c).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(WaveConfig::Raw(spec))
}

/// Full ensemble-run configuration.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub wave: WaveConfig,
    pub box_bounds: (f64, f64, f64, f64),
    pub n_orbits: usize,
    pub t_end: f64,
    pub seed: u64,
    pub d_max: f64,
    pub window: f64,
    pub bin_width: f64,
    pub tol: f64,
    pub workers: Option<usize>,
}

impl EnsembleConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        let wave = parse_wavefunction(&raw)?;
        let box_bounds = match raw.get("ensemble", "box") {
            None => (-1.5, 1.5, 0.0, 1.5),
            Some(v) => {
                let parts: Result<Vec<f64>, _> =
                    v.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let parts = parts.map_err(|e| ConfigError::BadValue {
                    key: "box".into(),
                    msg: e.to_string(),
                })?;
                if parts.len() != 4 {
                    return Err(ConfigError::BadValue {
                        key: "box".into(),
                        msg: "expected 'x_min, x_max, y_min, y_max'".into(),
                    });
                }
                (parts[0], parts[1], parts[2], parts[3])
            }
        };
        if box_bounds.0 >= box_bounds.1 || box_bounds.2 >= box_bounds.3 {
            return Err(ConfigError::Invalid("empty ensemble box".into()));
        }
        let n_orbits = match raw.get("ensemble", "n_orbits") {
            None => 100,
            Some(v) => v.parse::<usize>().map_err(|e| ConfigError::BadValue {
                key: "n_orbits".into(),
                msg: e.to_string(),
            })?,
        };
        if n_orbits == 0 {
            return Err(ConfigError::Invalid("n_orbits must be >= 1".into()));
        }
        let seed = match raw.get("ensemble", "seed") {
            None => 0,
            Some(v) => v.parse::<u64>().map_err(|e| ConfigError::BadValue {
                key: "seed".into(),
                msg: e.to_string(),
            })?,
        };
        let bin_width = raw.get_f64("output", "bin_width")?.unwrap_or(0.005);
        if !(bin_width > 0.0) {
            return Err(ConfigError::Invalid("bin_width must be positive".into()));
        }
        Ok(EnsembleConfig {
            wave,
            box_bounds,
            n_orbits,
            t_end: raw.get_f64("ensemble", "t_end")?.unwrap_or(1e4),
            seed,
            d_max: raw.get_f64("encounters", "d_max")?.unwrap_or(0.2),
            window: raw.get_f64("encounters", "window")?.unwrap_or(0.1),
            bin_width,
            tol: raw.get_f64("ensemble", "tol")?.unwrap_or(1e-10),
            workers: None,
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }
}
