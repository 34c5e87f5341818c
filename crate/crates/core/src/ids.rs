//! Identifier newtypes shared across modules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A Wikidata item identifier such as `Q619`.
///
/// Always matches `^Q[0-9]+$`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qid(String);

impl Qid {
    pub fn new(raw: &str) -> Result<Self, Error> {
        let digits = raw.strip_prefix('Q').ok_or_else(|| Error::invalid(format!("malformed QID {raw:?}")))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::invalid(format!("malformed QID {raw:?}")));
        }
        Ok(Qid(raw.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Qid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Qid::new(s)
    }
}

impl fmt::Display for Qid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Qid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Qid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Qid::new(&raw).map_err(serde::de::Error::custom)
    }
}

/// An ISO 3166-1 alpha-3 country code (three ASCII uppercase letters).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iso3(String);

impl Iso3 {
    pub fn new(raw: &str) -> Result<Self, Error> {
        if raw.len() == 3 && raw.bytes().all(|b| b.is_ascii_uppercase()) {
            Ok(Iso3(raw.to_owned()))
        } else {
            Err(Error::invalid(format!("malformed ISO 3166-1 alpha-3 code {raw:?}")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Iso3 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Iso3::new(s)
    }
}

impl fmt::Display for Iso3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Iso3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Iso3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Iso3::new(&raw).map_err(serde::de::Error::custom)
    }
}
