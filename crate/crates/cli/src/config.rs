//! Flat `key = value` experiment files.
//!
//! Keys are the long flag names without dashes. Blank lines and lines
//! starting with `#` are ignored. Command-line flags take precedence over
//! file values, which take precedence over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{usage, CliError};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                usage(format!(
                    "config line {}: expected `key = value`",
                    lineno + 1
                ))
            })?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Fails on keys the command does not understand.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(usage(format!("config file: unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

/// Resolved flag values, recorded in the JSON manifest.
#[derive(Debug, Default)]
pub struct Resolver<'a> {
    file: Option<&'a ConfigFile>,
    pub resolved: BTreeMap<String, String>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: Option<&'a ConfigFile>) -> Self {
        Self {
            file,
            resolved: BTreeMap::new(),
        }
    }

    pub fn file(&self) -> Option<&'a ConfigFile> {
        self.file
    }

    /// Flag, then file, then default.
    pub fn pick(&mut self, key: &str, flag: Option<&str>, default: &str) -> String {
        let value = flag
            .map(str::to_string)
            .or_else(|| self.file.and_then(|f| f.get(key)).map(str::to_string))
            .unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), value.clone());
        value
    }

    pub fn pick_opt(&mut self, key: &str, flag: Option<&str>) -> Option<String> {
        let value = flag
            .map(str::to_string)
            .or_else(|| self.file.and_then(|f| f.get(key)).map(str::to_string));
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.clone());
        }
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let file = ConfigFile::parse("# manifest\nn = 80\ns=0.95\n\nseed = 4").unwrap();
        let mut r = Resolver::new(Some(&file));
        assert_eq!(r.pick("n", Some("60"), "50"), "60");
        assert_eq!(r.pick("s", None, "0.99"), "0.95");
        assert_eq!(r.pick("instances", None, "10000"), "10000");
        assert_eq!(r.pick_opt("seed", None).as_deref(), Some("4"));
        assert_eq!(r.resolved.len(), 4);
    }

    #[test]
    fn rejects_malformed_lines_and_unknown_keys() {
        assert!(ConfigFile::parse("n 80").is_err());
        let file = ConfigFile::parse("bogus = 1").unwrap();
        assert!(file.check_keys(&["n"]).is_err());
        assert!(file.check_keys(&["bogus"]).is_ok());
    }
}
