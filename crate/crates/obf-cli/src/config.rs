//! Key = value config files and flag/config/env precedence.

use crate::CliError;
use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Defaults loaded from a `--config` file. Flags win over file entries,
/// which win over environment fallbacks.
pub struct Settings {
    map: HashMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!(
                        "config line {} is not `key = value`: {raw}",
                        lineno + 1
                    ))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self { map })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    /// Flag if present, else the config entry parsed as T.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key} = {raw}: {e}"))),
        }
    }

    pub fn resolve_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.resolve(flag, key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.resolve(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing required value: --{key} or config key {key}")))
    }

    /// Seed precedence: flag, config, OBF_SEED, then zero.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(seed) = self.resolve(flag, "seed")? {
            return Ok(seed);
        }
        match std::env::var("OBF_SEED") {
            Ok(raw) => raw
                .parse()
                .map_err(|e| CliError::Usage(format!("OBF_SEED = {raw}: {e}"))),
            Err(_) => Ok(0),
        }
    }

    /// Sample counts accept scientific notation like `1e6`.
    pub fn samples(&self, flag: Option<String>, default: u64) -> Result<u64, CliError> {
        let raw = match self.resolve(flag, "samples")? {
            Some(raw) => raw,
            None => return Ok(default),
        };
        parse_count(&raw)
    }
}

pub fn parse_count(raw: &str) -> Result<u64, CliError> {
    let value: f64 = raw
        .parse()
        .map_err(|e| CliError::Usage(format!("sample count {raw}: {e}")))?;
    if !value.is_finite() || value < 0.0 || value > 1e15 {
        return Err(CliError::Usage(format!("sample count out of range: {raw}")));
    }
    Ok(value.round() as u64)
}

pub fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("{what} entry {part}: {e}")))
        })
        .collect()
}

pub fn parse_usize_list(raw: &str, what: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("{what} entry {part}: {e}")))
        })
        .collect()
}
