//! Flat `key = value` text format shared by run configs and scene specs.
//!
//! One entry per line. Blank lines and lines starting with `#` are ignored,
//! keys are case-sensitive and may not repeat.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvMap {
    entries: BTreeMap<String, (String, usize)>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: n + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse {
                    line: n + 1,
                    reason: "empty key".into(),
                });
            }
            if entries.insert(k.to_string(), (v.trim().to_string(), n + 1)).is_some() {
                return Err(Error::Parse {
                    line: n + 1,
                    reason: format!("duplicate key `{k}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), (value.to_string(), 0));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Parses `key` if present, naming the key and line on failure.
    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|e| Error::Parse {
                line: *line,
                reason: format!("field `{key}`: cannot parse `{v}`: {e}"),
            }),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_opt(key)?.ok_or_else(|| Error::Parse {
            line: 0,
            reason: format!("missing field `{key}`"),
        })
    }

    /// Parses `key` with a custom parser.
    pub fn parse_with<T>(
        &self,
        key: &str,
        f: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => f(v).map(Some).map_err(|reason| Error::Parse {
                line: *line,
                reason: format!("field `{key}`: {reason}"),
            }),
        }
    }

    /// Error for the first key not accepted by `known`.
    pub fn reject_unknown(&self, known: impl Fn(&str) -> bool) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !known(k)) {
            None => Ok(()),
            Some((k, (_, line))) => Err(Error::Parse {
                line: *line,
                reason: format!("unknown field `{k}`"),
            }),
        }
    }

    /// Serialises in key order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, (v, _)) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Parses `a<sep>b<sep>...` into exactly `N` numbers.
pub fn parse_tuple<T, const N: usize>(s: &str, sep: char) -> std::result::Result<[T; N], String>
where
    T: FromStr + Copy + Default,
    T::Err: std::fmt::Display,
{
    let parts: Vec<&str> = s.split(sep).map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} values separated by `{sep}`, got `{s}`"));
    }
    let mut out = [T::default(); N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(out)
}
