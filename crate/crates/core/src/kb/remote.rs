use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use serde_json::Value;

use super::{EntityLookup, KbEntity, Snapshot};
use crate::error::{Error, Result};
use crate::ids::Qid;

/// Wikidata's per-entity JSON export.
pub const DEFAULT_ENDPOINT: &str = "https://www.wikidata.org/wiki/Special:EntityData";

/// Properties consulted by the resolver; other claims are not cached.
pub const RELEVANT_PROPERTIES: [&str; 6] = ["P17", "P19", "P20", "P27", "P159", "P276"];

const CACHE_FILE: &str = "entities.jsonl";

/// Source of knowledge records that are missing from the local snapshot.
pub trait EntityFetcher: Send + Sync {
    /// `Ok(None)` when the entity does not exist upstream.
    fn fetch(&self, qid: &Qid) -> Result<Option<KbEntity>>;
}

/// Fetches entities from a Wikidata-style `Special:EntityData` endpoint.
#[derive(Debug)]
pub struct HttpFetcher {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpFetcher {
    pub fn new(endpoint: &str, timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(timeout)
            .user_agent(concat!("geocorpus/", env!("CARGO_PKG_VERSION")))
            .build();
        HttpFetcher { endpoint: endpoint.trim_end_matches('/').to_owned(), agent }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Extracts the resolver-relevant item claims from an entity document.
    /// Deprecated statements and non-item values are skipped.
    pub fn parse_entity_document(qid: &Qid, doc: &Value) -> Result<Option<KbEntity>> {
        let Some(entities) = doc.get("entities").and_then(Value::as_object) else {
            return Err(Error::Remote(format!("{qid}: document has no entities object")));
        };
        let Some(record) = entities.get(qid.as_str()).or_else(|| entities.values().next()) else {
            return Ok(None);
        };
        if record.get("missing").is_some() {
            return Ok(None);
        }
        let mut claims = BTreeMap::new();
        if let Some(all) = record.get("claims").and_then(Value::as_object) {
            for prop in RELEVANT_PROPERTIES {
                let Some(statements) = all.get(prop).and_then(Value::as_array) else { continue };
                let values: Vec<Qid> = statements
                    .iter()
                    .filter(|s| s.get("rank").and_then(Value::as_str) != Some("deprecated"))
                    .filter_map(|s| s.pointer("/mainsnak/datavalue/value/id")?.as_str())
                    .filter_map(|id| Qid::new(id).ok())
                    .collect();
                if !values.is_empty() {
                    claims.insert(prop.to_owned(), values);
                }
            }
        }
        Ok(Some(KbEntity { qid: qid.clone(), type_hint: None, claims }))
    }
}

impl EntityFetcher for HttpFetcher {
    fn fetch(&self, qid: &Qid) -> Result<Option<KbEntity>> {
        let url = format!("{}/{}.json", self.endpoint, qid);
        let response = match self.agent.get(&url).call() {
            Ok(r) => r,
            Err(ureq::Error::Status(404, _)) => return Ok(None),
            Err(e) => return Err(Error::Remote(format!("{url}: {e}"))),
        };
        let body = response.into_string().map_err(|e| Error::Remote(format!("{url}: {e}")))?;
        let doc: Value = serde_json::from_str(&body).map_err(|e| Error::Remote(format!("{url}: {e}")))?;
        Self::parse_entity_document(qid, &doc)
    }
}

/// Snapshot-first entity lookup with an append-only on-disk cache and an
/// optional remote fetcher.
///
/// Lookup order: snapshot, cache, fetcher. Fetched records are appended to
/// `<cache_dir>/entities.jsonl` in snapshot format. Reads take a shared
/// lock; cache insertions and file appends are serialized.
pub struct CachedKb {
    snapshot: Snapshot,
    cache: RwLock<HashMap<Qid, Option<Arc<KbEntity>>>>,
    cache_file: Option<Mutex<File>>,
    cache_path: Option<PathBuf>,
    fetcher: Option<Box<dyn EntityFetcher>>,
}

impl std::fmt::Debug for CachedKb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CachedKb")
            .field("snapshot", &self.snapshot.len())
            .field("cache_path", &self.cache_path)
            .field("remote", &self.fetcher.is_some())
            .finish()
    }
}

impl CachedKb {
    pub fn new(snapshot: Snapshot) -> Self {
        CachedKb { snapshot, cache: RwLock::default(), cache_file: None, cache_path: None, fetcher: None }
    }

    /// Loads any previously cached records from `dir` and appends new ones there.
    pub fn with_cache_dir(mut self, dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        if path.exists() {
            let cached = Snapshot::from_jsonl(BufReader::new(File::open(&path)?))?;
            let mut map = self.cache.write().expect("cache lock");
            for (qid, entity) in cached.entities {
                map.insert(qid, Some(entity));
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        self.cache_file = Some(Mutex::new(file));
        self.cache_path = Some(path);
        Ok(self)
    }

    pub fn with_fetcher(mut self, fetcher: Box<dyn EntityFetcher>) -> Self {
        self.fetcher = Some(fetcher);
        self
    }

    pub fn cache_path(&self) -> Option<&Path> {
        self.cache_path.as_deref()
    }

    /// Number of cached positive records.
    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("cache lock").values().filter(|v| v.is_some()).count()
    }

    fn remember(&self, qid: &Qid, fetched: Option<KbEntity>) -> Option<Arc<KbEntity>> {
        let mut cache = self.cache.write().expect("cache lock");
        if let Some(existing) = cache.get(qid) {
            return existing.clone();
        }
        let entry = fetched.map(Arc::new);
        if let (Some(entity), Some(file)) = (&entry, &self.cache_file) {
            let line = serde_json::to_string(entity.as_ref()).expect("entity serializes");
            let mut file = file.lock().expect("cache file lock");
            if let Err(e) = writeln!(file, "{line}") {
                log::warn!("failed to append {qid} to entity cache: {e}");
            }
        }
        cache.insert(qid.clone(), entry.clone());
        entry
    }
}

impl EntityLookup for CachedKb {
    fn entity(&self, qid: &Qid) -> Option<Arc<KbEntity>> {
        if let Some(e) = self.snapshot.entity(qid) {
            return Some(e);
        }
        if let Some(hit) = self.cache.read().expect("cache lock").get(qid) {
            return hit.clone();
        }
        let fetcher = self.fetcher.as_ref()?;
        match fetcher.fetch(qid) {
            Ok(found) => self.remember(qid, found),
            Err(e) => {
                log::warn!("fetch {qid} failed: {e}");
                None
            }
        }
    }
}
