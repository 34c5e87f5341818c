use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ids::Iso3;

/// Per-country entity mass for one corpus and language.
///
/// Each resolved mention contributes a total weight of 1, split uniformly
/// across the countries it resolved to. Mentions that only reached
/// historical polities or could not be resolved are tallied separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMap {
    pub corpus_id: String,
    pub language: String,
    /// Number of mentions that went into the map.
    #[serde(default)]
    pub mentions: usize,
    pub weights: BTreeMap<Iso3, f64>,
    pub historical: f64,
    pub unresolved: f64,
}

impl DatasetMap {
    pub fn new(corpus_id: impl Into<String>, language: impl Into<String>) -> Self {
        DatasetMap {
            corpus_id: corpus_id.into(),
            language: language.into(),
            mentions: 0,
            weights: BTreeMap::new(),
            historical: 0.0,
            unresolved: 0.0,
        }
    }

    /// Builds a map directly from country weights (no tallies).
    pub fn from_weights<I: IntoIterator<Item = (Iso3, f64)>>(weights: I) -> Self {
        let mut map = DatasetMap::new("", "");
        for (iso, w) in weights {
            *map.weights.entry(iso).or_insert(0.0) += w;
        }
        map
    }

    pub fn weight(&self, iso: &Iso3) -> f64 {
        self.weights.get(iso).copied().unwrap_or(0.0)
    }

    /// Sum of all country weights (the resolved mention count).
    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Country weights plus historical and unresolved tallies.
    pub fn conserved_total(&self) -> f64 {
        self.total_weight() + self.historical + self.unresolved
    }

    /// Returns a copy with every weight and tally multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.weights.values_mut().for_each(|w| *w *= factor);
        out.historical *= factor;
        out.unresolved *= factor;
        out
    }
}
