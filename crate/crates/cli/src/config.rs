//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names without the leading dashes; `-` and `_` are
//! interchangeable. `#` starts a comment. Values given on the command line
//! win over values from the file, which win over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected `key = value`", i + 1))
            })?;
            entries.insert(normalize_key(key), (i + 1, value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self
            .entries
            .iter()
            .find(|(k, _)| !allowed.contains(&k.as_str()))
        {
            Some((k, (line, _))) => Err(CliError::Usage(format!(
                "config line {line}: unknown key `{k}`"
            ))),
            None => Ok(()),
        }
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|(line, v)| {
                v.parse().map_err(|_| {
                    CliError::Usage(format!(
                        "config line {line}: invalid value {v:?} for `{key}`"
                    ))
                })
            })
            .transpose()
    }

    /// Comma-separated list value.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.raw(key)
            .map(|(line, v)| {
                v.split(',')
                    .map(|item| {
                        item.trim().parse().map_err(|_| {
                            CliError::Usage(format!(
                                "config line {line}: invalid list item {item:?} for `{key}`"
                            ))
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Flag, else file, else default.
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    file: &ConfigFile,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

pub fn resolve_opt<T: FromStr>(
    flag: Option<T>,
    file: &ConfigFile,
    key: &str,
) -> Result<Option<T>, CliError> {
    Ok(match flag {
        Some(v) => Some(v),
        None => file.get(key)?,
    })
}

pub fn resolve_list<T: FromStr>(
    flag: Option<Vec<T>>,
    file: &ConfigFile,
    key: &str,
    default: Vec<T>,
) -> Result<Vec<T>, CliError> {
    Ok(match flag {
        Some(v) => v,
        None => file.get_list(key)?.unwrap_or(default),
    })
}
