use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    CountryRegistry, EntityLookup, EntityType, RegionKey, CITIZENSHIP, COUNTRY, HEADQUARTERS, LOCATION, PLACE_OF_BIRTH,
    PLACE_OF_DEATH,
};
use crate::error::{Error, Result};
use crate::ids::{Iso3, Qid};
use crate::ingest::LinkedMention;
use crate::map::DatasetMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "countries", rename_all = "lowercase")]
pub enum Outcome {
    /// Non-empty set of modern countries.
    Countries(BTreeSet<Iso3>),
    /// Every chain that ended somewhere ended at an unregistered polity.
    Historical,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub qid: Qid,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Default)]
struct Evidence {
    countries: BTreeSet<Iso3>,
    historical: bool,
}

impl Evidence {
    fn absorb(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Countries(set) => self.countries.extend(set),
            Outcome::Historical => self.historical = true,
            Outcome::Unresolved => {}
        }
    }

    fn finish(self) -> Outcome {
        if !self.countries.is_empty() {
            Outcome::Countries(self.countries)
        } else if self.historical {
            Outcome::Historical
        } else {
            Outcome::Unresolved
        }
    }
}

fn place_outcome(qid: &Qid, kb: &dyn EntityLookup, registry: &CountryRegistry) -> Outcome {
    if let Some(entry) = registry.by_qid(qid) {
        return Outcome::Countries(BTreeSet::from([entry.iso3.clone()]));
    }
    let Some(entity) = kb.entity(qid) else {
        return Outcome::Unresolved;
    };
    // A single association step: P17 targets are never followed further.
    let mut evidence = Evidence::default();
    for target in entity.values(COUNTRY) {
        match registry.by_qid(target) {
            Some(entry) => {
                evidence.countries.insert(entry.iso3.clone());
            }
            None => evidence.historical = true,
        }
    }
    evidence.finish()
}

/// Maps a place to modern countries: the place itself when it is a
/// registered country, otherwise the targets of its `P17` claims.
pub fn resolve_place(qid: &Qid, kb: &dyn EntityLookup, registry: &CountryRegistry) -> Resolution {
    Resolution { qid: qid.clone(), outcome: place_outcome(qid, kb, registry) }
}

/// Outcome of a country-valued claim (citizenship). An unregistered value
/// that does not itself lead to a modern country counts as a historical
/// terminal.
fn country_value_outcome(value: &Qid, kb: &dyn EntityLookup, registry: &CountryRegistry) -> Outcome {
    match place_outcome(value, kb, registry) {
        Outcome::Unresolved => Outcome::Historical,
        other => other,
    }
}

/// Resolves an entity to countries through the property chains selected by
/// its type:
///
/// * person: places of birth (P19) and death (P20), citizenship (P27)
/// * location: the location itself, then its country (P17)
/// * organization: location (P276) and headquarters (P159)
///
/// Without a type all three rule sets apply and their results are unioned.
/// A modern country reached by any chain wins over historical evidence.
pub fn resolve_entity(
    qid: &Qid,
    type_hint: Option<EntityType>,
    kb: &dyn EntityLookup,
    registry: &CountryRegistry,
) -> Resolution {
    let (person, location, organization) = match type_hint {
        Some(EntityType::Person) => (true, false, false),
        Some(EntityType::Location) => (false, true, false),
        Some(EntityType::Organization) => (false, false, true),
        None => (true, true, true),
    };

    let mut evidence = Evidence::default();
    if location {
        evidence.absorb(place_outcome(qid, kb, registry));
    }
    if person || organization {
        if let Some(entity) = kb.entity(qid) {
            let place_props: &[&str] = match (person, organization) {
                (true, true) => &[PLACE_OF_BIRTH, PLACE_OF_DEATH, LOCATION, HEADQUARTERS],
                (true, false) => &[PLACE_OF_BIRTH, PLACE_OF_DEATH],
                _ => &[LOCATION, HEADQUARTERS],
            };
            for prop in place_props {
                for value in entity.values(prop) {
                    evidence.absorb(place_outcome(value, kb, registry));
                }
            }
            if person {
                for value in entity.values(CITIZENSHIP) {
                    evidence.absorb(country_value_outcome(value, kb, registry));
                }
            }
        }
    }
    Resolution { qid: qid.clone(), outcome: evidence.finish() }
}

/// Resolves a mention through its top-`k` candidates in rank order, keeping
/// the first outcome that is not [`Outcome::Unresolved`].
pub fn resolve_mention(
    mention: &LinkedMention,
    top_k: usize,
    kb: &dyn EntityLookup,
    registry: &CountryRegistry,
) -> Outcome {
    let hint = EntityType::from_ner(mention.ner_label);
    mention
        .top_qids(top_k)
        .map(|qid| resolve_entity(qid, hint, kb, registry).outcome)
        .find(|o| *o != Outcome::Unresolved)
        .unwrap_or(Outcome::Unresolved)
}

/// Aggregates mentions into a [`DatasetMap`].
///
/// Resolution runs in parallel; accumulation happens afterwards in mention
/// order so the floating-point sums do not depend on the thread count.
pub fn build_dataset_map(
    mentions: &[LinkedMention],
    kb: &dyn EntityLookup,
    registry: &CountryRegistry,
    top_k: usize,
    corpus_id: &str,
    language: &str,
) -> Result<DatasetMap> {
    if top_k == 0 {
        return Err(Error::invalid("top_k must be at least 1"));
    }
    let outcomes: Vec<Outcome> = mentions.par_iter().map(|m| resolve_mention(m, top_k, kb, registry)).collect();

    let mut map = DatasetMap::new(corpus_id, language);
    map.mentions = mentions.len();
    for outcome in outcomes {
        match outcome {
            Outcome::Countries(set) => {
                let share = 1.0 / set.len() as f64;
                for iso in set {
                    *map.weights.entry(iso).or_insert(0.0) += share;
                }
            }
            Outcome::Historical => map.historical += 1.0,
            Outcome::Unresolved => map.unresolved += 1.0,
        }
    }
    Ok(map)
}

/// Regions reached by each unit's mentions, in mention order: one entry per
/// resolved country plus [`RegionKey::History`] for historical outcomes.
/// Units whose mentions all stay unresolved map to an empty list.
pub fn unit_regions(
    mentions: &[LinkedMention],
    kb: &dyn EntityLookup,
    registry: &CountryRegistry,
    top_k: usize,
) -> Result<BTreeMap<String, Vec<RegionKey>>> {
    if top_k == 0 {
        return Err(Error::invalid("top_k must be at least 1"));
    }
    let outcomes: Vec<Outcome> = mentions.par_iter().map(|m| resolve_mention(m, top_k, kb, registry)).collect();
    let mut out: BTreeMap<String, Vec<RegionKey>> = BTreeMap::new();
    for (mention, outcome) in mentions.iter().zip(outcomes) {
        let regions = out.entry(mention.unit_id.clone()).or_default();
        match outcome {
            Outcome::Countries(set) => {
                for iso in set {
                    let entry = registry.by_iso3(&iso).ok_or_else(|| Error::UnknownCountry(iso.to_string()))?;
                    regions.push(entry.region.into());
                }
            }
            Outcome::Historical => regions.push(RegionKey::History),
            Outcome::Unresolved => {}
        }
    }
    Ok(out)
}
