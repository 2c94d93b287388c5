//! Flat key-value configuration files.
//!
//! Lines of the form `key = value`; `#` and `;` start comments; `[section]`
//! headers are allowed for organization and otherwise ignored. Keys use the
//! long flag names, with `_` accepted in place of `-`. Command-line flags
//! override file values.

use std::collections::BTreeMap;

use twistion::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find(['#', ';']) {
                Some(idx) => &raw[..idx],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Unsupported(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            values.insert(key, value.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// CLI value if present, else config value parsed into `T`, else default.
    pub fn resolve<T: std::str::FromStr>(
        &self,
        cli: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T> {
        if let Some(v) = cli {
            return Ok(v);
        }
        match self.get(key) {
            Some(raw) => raw.parse().map_err(|_| {
                Error::Unsupported(format!("config key `{key}`: cannot parse `{raw}`"))
            }),
            None => Ok(default),
        }
    }

    /// Same, but the fallback stays `None` when neither source has a value.
    pub fn resolve_opt<T: std::str::FromStr>(
        &self,
        cli: Option<T>,
        key: &str,
    ) -> Result<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.get(key) {
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::Unsupported(format!("config key `{key}`: cannot parse `{raw}`"))
            }),
            None => Ok(None),
        }
    }
}
