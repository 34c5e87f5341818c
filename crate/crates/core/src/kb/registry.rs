use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{Iso3, Qid};

/// Bundled registry of modern countries and territories.
pub const DEFAULT_REGISTRY: &str = include_str!("../../data/registry.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    Africa,
    Americas,
    Asia,
    Europe,
    Oceania,
}

impl Region {
    pub const ALL: [Region; 5] = [Region::Africa, Region::Americas, Region::Asia, Region::Europe, Region::Oceania];
}

/// A region, or the bucket for entities tied only to historical polities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionKey {
    Africa,
    Americas,
    Asia,
    Europe,
    Oceania,
    History,
}

impl From<Region> for RegionKey {
    fn from(r: Region) -> Self {
        match r {
            Region::Africa => RegionKey::Africa,
            Region::Americas => RegionKey::Americas,
            Region::Asia => RegionKey::Asia,
            Region::Europe => RegionKey::Europe,
            Region::Oceania => RegionKey::Oceania,
        }
    }
}

impl fmt::Display for RegionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryEntry {
    pub qid: Qid,
    pub iso3: Iso3,
    pub region: Region,
    /// (latitude, longitude) in degrees.
    pub centroid: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// The universe of modern countries: anything not listed here is treated as
/// a historical polity when reached through a country-valued claim.
#[derive(Debug, Clone, Default)]
pub struct CountryRegistry {
    entries: Vec<CountryEntry>,
    by_qid: HashMap<Qid, usize>,
    by_iso: BTreeMap<Iso3, usize>,
}

impl CountryRegistry {
    pub fn from_entries(entries: Vec<CountryEntry>) -> Result<Self> {
        let mut registry = CountryRegistry::default();
        for entry in entries {
            registry.insert(entry)?;
        }
        Ok(registry)
    }

    fn insert(&mut self, entry: CountryEntry) -> Result<()> {
        let (lat, lon) = entry.centroid;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::invalid(format!("centroid of {} out of range: ({lat}, {lon})", entry.iso3)));
        }
        if self.by_iso.contains_key(&entry.iso3) {
            return Err(Error::invalid(format!("duplicate iso3 {}", entry.iso3)));
        }
        if self.by_qid.contains_key(&entry.qid) {
            return Err(Error::invalid(format!("duplicate qid {}", entry.qid)));
        }
        let idx = self.entries.len();
        self.by_qid.insert(entry.qid.clone(), idx);
        self.by_iso.insert(entry.iso3.clone(), idx);
        self.entries.push(entry);
        Ok(())
    }

    /// Reads a registry in JSON-lines form.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut registry = CountryRegistry::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: CountryEntry =
                serde_json::from_str(&line).map_err(|e| Error::Parse { line: idx + 1, message: e.to_string() })?;
            registry.insert(entry).map_err(|e| Error::Parse { line: idx + 1, message: e.to_string() })?;
        }
        Ok(registry)
    }

    /// The registry bundled with the crate.
    pub fn bundled() -> Self {
        Self::from_jsonl(DEFAULT_REGISTRY.as_bytes()).expect("bundled registry is valid")
    }

    pub fn by_qid(&self, qid: &Qid) -> Option<&CountryEntry> {
        self.by_qid.get(qid).map(|&i| &self.entries[i])
    }

    pub fn by_iso3(&self, iso: &Iso3) -> Option<&CountryEntry> {
        self.by_iso.get(iso).map(|&i| &self.entries[i])
    }

    pub fn contains_qid(&self, qid: &Qid) -> bool {
        self.by_qid.contains_key(qid)
    }

    /// All iso3 codes in ascending order.
    pub fn iso3_codes(&self) -> impl Iterator<Item = &Iso3> {
        self.by_iso.keys()
    }

    pub fn entries(&self) -> &[CountryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
