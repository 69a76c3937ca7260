//! The value vocabulary every annotation is resolved against.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Canonical form of a value name: surrounding whitespace trimmed, then NFC.
///
/// Comparison after normalization is case-sensitive.
pub fn normalize_name(name: &str) -> String {
    name.trim().nfc().collect()
}

/// An ordered list of distinct value names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ValueSystem {
    values: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl ValueSystem {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut values = Vec::new();
        let mut index = HashMap::new();
        for raw in names {
            let name = normalize_name(raw.as_ref());
            if name.is_empty() {
                return Err(Error::Domain("value names must be non-empty".into()));
            }
            if index.insert(name.clone(), values.len()).is_some() {
                return Err(Error::Domain(format!("duplicate value name `{name}`")));
            }
            values.push(name);
        }
        if values.is_empty() {
            return Err(Error::Domain("a value system needs at least one value".into()));
        }
        Ok(Self { values, index })
    }

    /// Parses either a JSON array of strings or one name per line
    /// (blank lines and `#` comments ignored).
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('[') {
            let names: Vec<String> = serde_json::from_str(trimmed)?;
            return Self::new(names);
        }
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(&normalize_name(name))
    }

    /// Returns the stored spelling when `name` normalizes to a member.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        self.index
            .get(&normalize_name(name))
            .map(|&i| self.values[i].as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(&normalize_name(name)).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.values.iter().map(String::as_str)
    }
}

impl TryFrom<Vec<String>> for ValueSystem {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ValueSystem> for Vec<String> {
    fn from(v: ValueSystem) -> Self {
        v.values
    }
}
