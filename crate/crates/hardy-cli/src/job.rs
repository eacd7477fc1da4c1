//! Flat `key = value` job files mirroring the CLI flags. Flags override the
//! file, so a job file is a reproducible experiment record.

use std::collections::BTreeMap;
use std::path::Path;

pub struct JobFile {
    values: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "command",
    "p",
    "q",
    "interval",
    "mu",
    "nu",
    "a",
    "b",
    "theta",
    "boundary",
    "out",
    "p-range",
    "r-range",
    "step",
    "diagonal",
    "delta1-reading",
    "quick",
    "tol",
    "grid-n",
];

impl JobFile {
    pub fn empty() -> Self {
        JobFile { values: BTreeMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read job file {}: {}", path.display(), e))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(format!("{}:{}: unknown key '{}'", path.display(), lineno + 1, key));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(JobFile { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// The command recorded in the file, if any; must match the subcommand.
    pub fn check_command(&self, actual: &str) -> Result<(), String> {
        match self.get("command") {
            Some(c) if c != actual => Err(format!(
                "job file says command = {}, but the {} subcommand was invoked",
                c, actual
            )),
            _ => Ok(()),
        }
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("job file: cannot parse {} = {}", key, v)),
        }
    }
}
