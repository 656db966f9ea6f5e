//! Flat `key = value` configuration files and flag/file/default resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Values read from a config file. Blank lines and lines starting with `#`
/// are ignored; keys use the long flag names, with `-` or `_`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("config line {}: expected `key = value`", i + 1);
            };
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                bail!("config line {}: empty key", i + 1);
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                bail!("config line {}: duplicate key `{key}`", i + 1);
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Fails on keys outside `known`, so typos do not pass silently.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        for k in self.values.keys() {
            if !known.contains(&k.as_str()) {
                bail!("unknown config key `{k}`");
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag when given, else the file value, else `None`.
    pub fn pick<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key `{key}` = {s:?}: {e}")),
        }
    }

    /// [`pick`](Self::pick) falling back to `default`.
    pub fn get<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(key, flag)?.unwrap_or(default))
    }
}

/// Parses a comma-separated list such as `5,10,20`.
pub fn parse_list<T>(s: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|e| anyhow::anyhow!("{p:?}: {e}")))
        .collect()
}

/// Parses `name:weight` pairs; a bare name weighs 1.
pub fn parse_weights(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| match p.split_once(':') {
            None => Ok((p.to_string(), 1.0)),
            Some((name, w)) => {
                let w: f64 = w.trim().parse().with_context(|| format!("weight in {p:?}"))?;
                Ok((name.trim().to_string(), w))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let f = ConfigFile::parse("# comment\nradius = 150\nn_experiments=20\n\n").unwrap();
        assert_eq!(f.get("radius", Some(300.0), 200.0).unwrap(), 300.0);
        assert_eq!(f.get("radius", None, 200.0).unwrap(), 150.0);
        assert_eq!(f.get("n-experiments", None, 1000usize).unwrap(), 20);
        assert_eq!(f.get("seed", None, 7u64).unwrap(), 7);
        assert!(f.check_keys(&["radius", "n-experiments"]).is_ok());
        assert!(f.check_keys(&["radius"]).is_err());
    }

    #[test]
    fn bad_lines() {
        assert!(ConfigFile::parse("radius 200").is_err());
        assert!(ConfigFile::parse("= 3").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2").is_err());
        let f = ConfigFile::parse("radius = wide").unwrap();
        assert!(f.get("radius", None, 1.0f64).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<usize>("5, 10,20").unwrap(), vec![5, 10, 20]);
        assert!(parse_list::<usize>("5,x").is_err());
        assert_eq!(
            parse_weights("Food:3,Shop").unwrap(),
            vec![("Food".to_string(), 3.0), ("Shop".to_string(), 1.0)]
        );
    }
}
