//! JSON reports and SVG figures for dataset maps.

mod geometry;
mod svg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use geometry::{Ring, WorldGeometry, BUNDLED_EXCEPTIONS, DEFAULT_GEOMETRY};
pub use svg::{emit_bars, emit_choropleth, ColorScale};

use crate::error::{Error, Result};
use crate::ids::Iso3;
use crate::kb::{CountryRegistry, RegionKey};
use crate::map::DatasetMap;
use crate::stats::{self, LanguageProfile, Unrepresented};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub mentions: usize,
    /// Mass assigned to modern countries.
    pub resolved: f64,
    pub historical: f64,
    pub unresolved: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerSection {
    pub countries: Vec<Iso3>,
    pub entity_share: Vec<f64>,
    pub speaker_share: Vec<f64>,
    pub bhattacharyya: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub corpus_id: String,
    pub language: String,
    pub generated_at: Option<String>,
    pub tool_version: String,
    pub totals: Totals,
    pub country_weights: BTreeMap<Iso3, f64>,
    pub in_country_share: Option<f64>,
    pub unrepresented: Option<Unrepresented>,
    pub gini: Option<f64>,
    pub speaker_comparison: Option<SpeakerSection>,
    pub region_rollup: Option<BTreeMap<RegionKey, f64>>,
    /// Reason for each statistic left null, keyed by field name.
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Weight at or below which a country counts as unrepresented.
    pub threshold: f64,
    /// Timestamp to embed; `None` leaves the field null.
    pub generated_at: Option<String>,
}

fn record<T>(notes: &mut BTreeMap<String, String>, field: &str, value: Result<T>) -> Option<T> {
    match value {
        Ok(v) => Some(v),
        Err(e) => {
            notes.insert(field.to_string(), e.to_string());
            None
        }
    }
}

fn note_missing(notes: &mut BTreeMap<String, String>, field: &str) {
    notes.insert(field.to_string(), "no language profile".to_string());
}

/// Collects the representativeness statistics of `map`.
///
/// The registry is the country universe for the unrepresented count and the
/// Gini index. A statistic that cannot be computed is left null and its
/// error message is stored under the field name in `notes`.
pub fn emit_report(
    map: &DatasetMap,
    profile: Option<&LanguageProfile>,
    registry: &CountryRegistry,
    options: &ReportOptions,
) -> Report {
    let mut notes = BTreeMap::new();
    let empty = map.total_weight() <= 0.0;
    let mut report = Report {
        corpus_id: map.corpus_id.clone(),
        language: map.language.clone(),
        generated_at: options.generated_at.clone(),
        tool_version: TOOL_VERSION.to_string(),
        totals: Totals {
            mentions: map.mentions,
            resolved: map.total_weight(),
            historical: map.historical,
            unresolved: map.unresolved,
        },
        country_weights: map.weights.clone(),
        in_country_share: None,
        unrepresented: None,
        gini: None,
        speaker_comparison: None,
        region_rollup: None,
        notes: BTreeMap::new(),
    };
    if empty {
        for field in ["in_country_share", "unrepresented", "gini", "speaker_comparison", "region_rollup"] {
            notes.insert(field.to_string(), Error::EmptyMap.to_string());
        }
        report.notes = notes;
        return report;
    }

    match profile {
        Some(profile) => {
            report.in_country_share = record(&mut notes, "in_country_share", stats::in_country_share(map, profile));
            report.speaker_comparison = record(
                &mut notes,
                "speaker_comparison",
                stats::speaker_comparison(map, profile).map(|c| SpeakerSection {
                    bhattacharyya: c.coefficient(),
                    countries: c.countries,
                    entity_share: c.entity_share,
                    speaker_share: c.speaker_share,
                }),
            );
        }
        None => {
            note_missing(&mut notes, "in_country_share");
            note_missing(&mut notes, "speaker_comparison");
        }
    }
    report.unrepresented = Some(stats::unrepresented(map, registry.iso3_codes(), options.threshold));
    report.gini = record(&mut notes, "gini", stats::gini(map, registry.iso3_codes()));
    report.region_rollup = record(&mut notes, "region_rollup", stats::region_rollup(map, registry));
    report.notes = notes;
    report
}

impl Report {
    /// Pretty-printed JSON with object keys in sorted order.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::invalid(e.to_string()))?;
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::invalid(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json { offset: 0, message: e.to_string() })
    }

    /// Rebuilds a map from the embedded weights and totals.
    pub fn to_map(&self) -> DatasetMap {
        let mut map = DatasetMap::from_weights(self.country_weights.clone());
        map.corpus_id = self.corpus_id.clone();
        map.language = self.language.clone();
        map.mentions = self.totals.mentions;
        map.historical = self.totals.historical;
        map.unresolved = self.totals.unresolved;
        map
    }
}
