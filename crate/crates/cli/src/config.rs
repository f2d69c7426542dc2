//! Plain-text configuration files.
//!
//! The format is one `key = value` pair per line; `#` starts a comment and
//! blank lines are ignored. Keys use the same names as the corresponding
//! command-line flags, and a flag always wins over its file entry.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        FileConfig::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<FileConfig> {
        let mut entries = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`, got `{line}`", index + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                bail!("line {}: missing key before `=`", index + 1);
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                bail!("line {}: duplicate key `{key}`", index + 1);
            }
        }
        Ok(FileConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Resolves one setting: the flag value if given, else the config-file
/// entry parsed as `T`, else `None`.
pub fn pick<T>(flag: Option<T>, file: &FileConfig, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(value) => Ok(Some(value)),
        None => file
            .get(key)
            .map(|raw| raw.parse().map_err(|e| anyhow!("config key `{key}`: {e}")))
            .transpose(),
    }
}

/// As [`pick`], but the setting must come from somewhere.
pub fn require<T>(flag: Option<T>, file: &FileConfig, key: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    pick(flag, file, key)?
        .ok_or_else(|| anyhow!("`{key}` must be set by flag or config file"))
}
