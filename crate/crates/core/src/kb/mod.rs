//! Knowledge-snapshot access and entity-to-country resolution.
//!
//! Entities are read from a local JSON-lines snapshot of Wikidata claims.
//! [`CachedKb`] layers an on-disk cache and an optional remote fetcher over
//! the snapshot so that records fetched once are available offline on the
//! next run.

mod registry;
mod remote;
mod resolve;

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::Qid;

pub use registry::{CountryEntry, CountryRegistry, Region, RegionKey, DEFAULT_REGISTRY};
pub use remote::{CachedKb, EntityFetcher, HttpFetcher, DEFAULT_ENDPOINT, RELEVANT_PROPERTIES};
pub use resolve::{
    build_dataset_map, resolve_entity, resolve_mention, resolve_place, unit_regions, Outcome, Resolution,
};

/// Country (P17).
pub const COUNTRY: &str = "P17";
/// Place of birth (P19).
pub const PLACE_OF_BIRTH: &str = "P19";
/// Place of death (P20).
pub const PLACE_OF_DEATH: &str = "P20";
/// Country of citizenship (P27).
pub const CITIZENSHIP: &str = "P27";
/// Headquarters location (P159).
pub const HEADQUARTERS: &str = "P159";
/// Location (P276).
pub const LOCATION: &str = "P276";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityType {
    Person,
    Location,
    Organization,
}

impl EntityType {
    pub fn from_ner(label: crate::ingest::NerLabel) -> Option<Self> {
        use crate::ingest::NerLabel;
        match label {
            NerLabel::Per => Some(EntityType::Person),
            NerLabel::Loc => Some(EntityType::Location),
            NerLabel::Org => Some(EntityType::Organization),
            NerLabel::Other | NerLabel::Unknown => None,
        }
    }
}

/// One snapshot record: a QID with its property claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbEntity {
    pub qid: Qid,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub type_hint: Option<EntityType>,
    #[serde(default)]
    pub claims: BTreeMap<String, Vec<Qid>>,
}

impl KbEntity {
    pub fn values(&self, property: &str) -> &[Qid] {
        self.claims.get(property).map(Vec::as_slice).unwrap_or(&[])
    }

    fn validate(&self) -> Result<()> {
        for prop in self.claims.keys() {
            let ok = prop.strip_prefix('P').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()));
            if !ok {
                return Err(Error::invalid(format!("{}: malformed property id {prop:?}", self.qid)));
            }
        }
        Ok(())
    }
}

/// Read access to knowledge records.
pub trait EntityLookup: Sync {
    fn entity(&self, qid: &Qid) -> Option<Arc<KbEntity>>;
}

/// In-memory knowledge snapshot keyed by QID.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    entities: HashMap<Qid, Arc<KbEntity>>,
}

impl Snapshot {
    /// Reads a JSON-lines snapshot. Later records for the same QID replace
    /// earlier ones.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut snapshot = Snapshot::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entity: KbEntity =
                serde_json::from_str(&line).map_err(|e| Error::Parse { line: idx + 1, message: e.to_string() })?;
            entity.validate().map_err(|e| Error::Parse { line: idx + 1, message: e.to_string() })?;
            snapshot.insert(entity);
        }
        Ok(snapshot)
    }

    pub fn insert(&mut self, entity: KbEntity) {
        self.entities.insert(entity.qid.clone(), Arc::new(entity));
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

impl FromIterator<KbEntity> for Snapshot {
    fn from_iter<I: IntoIterator<Item = KbEntity>>(iter: I) -> Self {
        let mut s = Snapshot::default();
        iter.into_iter().for_each(|e| s.insert(e));
        s
    }
}

impl EntityLookup for Snapshot {
    fn entity(&self, qid: &Qid) -> Option<Arc<KbEntity>> {
        self.entities.get(qid).cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_line_format() {
        let line = r#"{"qid":"Q619","type":"person","claims":{"P19":["Q47554"],"P20":["Q497115"],"P27":["Q1649871"]}}"#;
        let snap = Snapshot::from_jsonl(line.as_bytes()).unwrap();
        let e = snap.entity(&Qid::new("Q619").unwrap()).unwrap();
        assert_eq!(e.type_hint, Some(EntityType::Person));
        assert_eq!(e.values("P19"), [Qid::new("Q47554").unwrap()]);
        assert!(e.values("P17").is_empty());
    }

    #[test]
    fn snapshot_rejects_bad_property() {
        let line = r#"{"qid":"Q1","claims":{"country":["Q2"]}}"#;
        assert!(matches!(Snapshot::from_jsonl(line.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let line = r#"{"qid":"X1","claims":{}}"#;
        assert!(Snapshot::from_jsonl(line.as_bytes()).is_err());
    }
}
