//! Flat `key = value` settings with layered precedence.

use anyhow::{anyhow, bail, Context, Result};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Parameters for one experiment run. Later layers win.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            let k = k.trim();
            if k.is_empty() {
                bail!("line {}: empty key", n + 1);
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Apply `key=value` assignments.
    pub fn set_pairs<'a>(&mut self, pairs: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for p in pairs {
            let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("expected key=value, got {p:?}"))?;
            self.set(k.trim(), v.trim());
        }
        Ok(())
    }

    /// `self` overridden by `other`.
    pub fn overlay(mut self, other: &Settings) -> Self {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| anyhow!("setting {key} = {v:?}: {e}")),
        }
    }

    /// Comma-separated list.
    pub fn list<T>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: FromStr + Clone,
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e| anyhow!("setting {key} item {s:?}: {e}")))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_layer() {
        let file = Settings::parse("# grid\nseed = 3\nsizes = 2, 4,8\n\nmode=implicit # inline\n").unwrap();
        assert_eq!(file.get("seed", 0u64).unwrap(), 3);
        assert_eq!(file.list("sizes", &[1usize]).unwrap(), vec![2, 4, 8]);
        let mut cli = Settings::new();
        cli.set_pairs(["seed=9"]).unwrap();
        let merged = Settings::new().overlay(&file).overlay(&cli);
        assert_eq!(merged.get("seed", 0u64).unwrap(), 9);
        assert_eq!(merged.raw("mode"), Some("implicit"));
        assert_eq!(merged.get("missing", 5usize).unwrap(), 5);
    }

    #[test]
    fn errors() {
        assert!(Settings::parse("novalue").is_err());
        assert!(Settings::parse(" = 3").is_err());
        let s = Settings::parse("seed = x").unwrap();
        assert!(s.get("seed", 0u64).is_err());
    }
}
