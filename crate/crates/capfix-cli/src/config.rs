//! Optional flat key-value config file mirroring long flag names.
//!
//! One `key = value` pair per line; `#` starts a comment. Flags override
//! config values, config values override built-in defaults.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| format!("cannot read config file {}: {err}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!(
                    "config line {}: expected `key = value`, found {raw:?}",
                    lineno + 1
                )
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| format!("config key {key:?} has invalid value {raw:?}")),
        }
    }
}
