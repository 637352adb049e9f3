//! Flat `name = value` config files.
//!
//! Keys mirror the [`SystemConfig`] fields. Anything not given keeps its
//! reference value. Powers and noise variances may also be given in dB
//! with a `_db` suffix (`pp1_db = 40`). When a key appears more than once
//! the last occurrence wins, which is also how `--set` overrides apply.
//!
//! ```text
//! # reference point at 30 dB
//! pp1_db = 30
//! pp2_db = 30
//! rho1 = 0.37
//! rho2 = 0.37
//! geometry = line      # or `explicit` with d1..d5
//! noise_mode = combined
//! ```

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{db_to_linear, layout_distances, Geometry, NoiseMode, SystemConfig};

/// Keys holding a linear power or variance; each also accepts a `_db` form.
const POWER_KEYS: &[&str] = &["pp1", "pp2", "sigma2", "sigma2_su1", "sigma2_c", "sigma2_pu1", "sigma2_pu2", "sigma2_su2"];

const PLAIN_KEYS: &[&str] = &[
    "eta", "alpha", "rho1", "rho2", "m", "rp", "rs", "lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "lambda6",
    "lambda7", "L", "d1", "d2", "d3", "d4", "d5", "su2_offset",
];

const WORD_KEYS: &[&str] = &["noise_mode", "geometry"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `name = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Conflict(String),
    #[error("override `{0}` must look like key=value")]
    BadOverride(String),
}

/// Every key the parser accepts.
pub fn known_keys() -> Vec<String> {
    let mut keys: Vec<String> = POWER_KEYS.iter().flat_map(|k| [k.to_string(), format!("{k}_db")]).collect();
    keys.extend(PLAIN_KEYS.iter().chain(WORD_KEYS).map(|k| k.to_string()));
    keys
}

fn is_known(key: &str) -> bool {
    let base = key.strip_suffix("_db").unwrap_or(key);
    (key != base && POWER_KEYS.contains(&base))
        || POWER_KEYS.contains(&key)
        || PLAIN_KEYS.contains(&key)
        || WORD_KEYS.contains(&key)
}

/// Raw key/value pairs in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: Vec<(String, String)>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = ConfigMap::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
            map.set(key.trim(), value.trim())?;
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !is_known(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.entries.push((key.to_string(), value.to_string()));
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (k, v) = spec.split_once('=').ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        self.set(k.trim(), v.trim())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Resolves the entries on top of [`SystemConfig::reference`]. The result
    /// still needs [`crate::model::validate`].
    pub fn to_system_config(&self) -> Result<SystemConfig, ConfigError> {
        let mut numbers: HashMap<&str, f64> = HashMap::new();
        let mut words: HashMap<&str, &str> = HashMap::new();
        for (key, value) in &self.entries {
            if WORD_KEYS.contains(&key.as_str()) {
                words.insert(key, value);
                continue;
            }
            let x: f64 = value
                .parse()
                .map_err(|_| ConfigError::BadValue { key: key.clone(), value: value.clone() })?;
            match key.strip_suffix("_db") {
                Some(base) if POWER_KEYS.contains(&base) => numbers.insert(base, db_to_linear(x)),
                _ => numbers.insert(key, x),
            };
        }

        let mut cfg = SystemConfig::reference();
        let get = |k: &str, default: f64| numbers.get(k).copied().unwrap_or(default);

        cfg.pp1 = get("pp1", cfg.pp1);
        cfg.pp2 = get("pp2", cfg.pp2);
        cfg.eta = get("eta", cfg.eta);
        cfg.alpha = get("alpha", cfg.alpha);
        cfg.rho1 = get("rho1", cfg.rho1);
        cfg.rho2 = get("rho2", cfg.rho2);
        cfg.path_loss_exp = get("m", cfg.path_loss_exp);
        cfg.rate_pu = get("rp", cfg.rate_pu);
        cfg.rate_su = get("rs", cfg.rate_su);
        cfg.sigma2_pu1 = get("sigma2_pu1", cfg.sigma2_pu1);
        cfg.sigma2_pu2 = get("sigma2_pu2", cfg.sigma2_pu2);
        cfg.sigma2_su2 = get("sigma2_su2", cfg.sigma2_su2);
        for (i, l) in cfg.lambdas.iter_mut().enumerate() {
            *l = get(&format!("lambda{}", i + 1), *l);
        }

        cfg.noise_mode = match words.get("noise_mode").copied().unwrap_or("combined") {
            "combined" => {
                reject_present(&numbers, &["sigma2_su1", "sigma2_c"], "noise_mode = combined")?;
                NoiseMode::Combined { sigma2: get("sigma2", 1.0) }
            }
            "split" => {
                reject_present(&numbers, &["sigma2"], "noise_mode = split")?;
                NoiseMode::Split { sigma2_su1: get("sigma2_su1", 1.0), sigma2_c: get("sigma2_c", 1.0) }
            }
            other => return Err(ConfigError::BadValue { key: "noise_mode".into(), value: other.into() }),
        };

        cfg.geometry = match words.get("geometry").copied().unwrap_or("line") {
            "line" => {
                reject_present(&numbers, &["d2", "d3", "d4", "d5"], "geometry = line")?;
                Geometry::LineLayout { length: get("L", 2.0), d1: get("d1", 1.0), su2_offset: get("su2_offset", 1.0) }
            }
            "explicit" => {
                reject_present(&numbers, &["L", "su2_offset"], "geometry = explicit")?;
                let r = layout_distances(2.0, 1.0, 1.0).expect("reference layout is valid");
                Geometry::Explicit {
                    d1: get("d1", r.d1),
                    d2: get("d2", r.d2),
                    d3: get("d3", r.d3),
                    d4: get("d4", r.d4),
                    d5: get("d5", r.d5),
                }
            }
            other => return Err(ConfigError::BadValue { key: "geometry".into(), value: other.into() }),
        };
        Ok(cfg)
    }
}

fn reject_present(numbers: &HashMap<&str, f64>, keys: &[&str], context: &str) -> Result<(), ConfigError> {
    match keys.iter().find(|k| numbers.contains_key(**k)) {
        Some(k) => Err(ConfigError::Conflict(format!("`{k}` is not used with {context}"))),
        None => Ok(()),
    }
}

/// Parses a config file and applies `key=value` overrides on top.
pub fn load_config<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<SystemConfig, ConfigError> {
    let mut map = ConfigMap::parse(text)?;
    for o in overrides {
        map.apply_override(o.as_ref())?;
    }
    map.to_system_config()
}
