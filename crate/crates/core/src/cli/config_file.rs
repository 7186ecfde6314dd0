//! Flat `key = value` configuration files.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Keys are the long flag names without the leading dashes
//! (`eps = 0.5`, `audit-global = true`, `sweep-eps = 0.1,0.2`).

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    path: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            entries.insert(key, (idx + 1, value.trim().to_string()));
        }
        Ok(Self {
            path: path.display().to_string(),
            entries,
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Parses `key` with `FromStr`, reporting the file line on failure.
    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some((line, value)) = self.entries.get(key) else {
            return Ok(None);
        };
        value.parse().map(Some).map_err(|_| Error::Parse {
            path: self.path.clone().into(),
            line: *line,
            message: format!("bad value for `{key}`: `{value}`"),
        })
    }

    pub fn get_list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some((line, value)) = self.entries.get(key) else {
            return Ok(None);
        };
        value
            .split(',')
            .map(|v| v.trim().parse())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map(Some)
            .map_err(|_| Error::Parse {
                path: self.path.clone().into(),
                line: *line,
                message: format!("bad list for `{key}`: `{value}`"),
            })
    }
}
