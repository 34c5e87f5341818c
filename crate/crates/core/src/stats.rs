//! Representativeness measures over a [`DatasetMap`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::Iso3;
use crate::kb::{CountryRegistry, RegionKey};
use crate::map::DatasetMap;

const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Countries where a language is largely spoken, with speaker populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub language: String,
    pub speakers: BTreeMap<Iso3, u64>,
}

impl LanguageProfile {
    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let profile: LanguageProfile =
            serde_json::from_reader(reader).map_err(|e| Error::Json { offset: 0, message: e.to_string() })?;
        if profile.speakers.is_empty() {
            return Err(Error::invalid(format!("profile for {} lists no countries", profile.language)));
        }
        Ok(profile)
    }

    pub fn contains(&self, iso: &Iso3) -> bool {
        self.speakers.contains_key(iso)
    }

    pub fn total_speakers(&self) -> u64 {
        self.speakers.values().sum()
    }
}

/// Fraction of country-resolved entity mass that falls in the profile's
/// countries.
pub fn in_country_share(map: &DatasetMap, profile: &LanguageProfile) -> Result<f64> {
    let total = map.total_weight();
    if total <= 0.0 {
        return Err(Error::EmptyMap);
    }
    let inside: f64 = map.weights.iter().filter(|(iso, _)| profile.contains(iso)).map(|(_, w)| w).sum();
    Ok((inside / total).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unrepresented {
    pub count: usize,
    pub threshold: f64,
    pub countries: Vec<Iso3>,
}

/// Countries of `universe` whose weight is at or below `threshold`.
pub fn unrepresented<'a, I>(map: &DatasetMap, universe: I, threshold: f64) -> Unrepresented
where
    I: IntoIterator<Item = &'a Iso3>,
{
    let countries: BTreeSet<Iso3> = universe.into_iter().filter(|iso| map.weight(iso) <= threshold).cloned().collect();
    Unrepresented { count: countries.len(), threshold, countries: countries.into_iter().collect() }
}

/// Population Gini index of a non-negative vector.
///
/// Equal to `sum_i sum_j |x_i - x_j| / (2 n sum x)`, evaluated in
/// `O(n log n)` from the sorted values.
pub fn gini_values(values: &[f64]) -> Result<f64> {
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("gini requires finite non-negative values"));
    }
    let total: f64 = values.iter().sum();
    if values.is_empty() || total <= 0.0 {
        return Err(Error::EmptyMap);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // sum_{i<j} (x_j - x_i) = sum_i (2i - n + 1) x_i for 0-based sorted i
    let weighted: f64 = sorted.iter().enumerate().map(|(i, x)| (2.0 * i as f64 - n + 1.0) * x).sum();
    Ok((weighted / (n * total)).max(0.0))
}

/// Gini index of the map's weights over `universe` (absent countries count
/// as zero). Weighted countries outside the universe are ignored.
pub fn gini<'a, I>(map: &DatasetMap, universe: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a Iso3>,
{
    let values: Vec<f64> = universe.into_iter().map(|iso| map.weight(iso)).collect();
    gini_values(&values)
}

/// Bhattacharyya coefficient between two distributions keyed by country.
/// Keys missing from one side carry zero probability.
pub fn bhattacharyya(p: &BTreeMap<Iso3, f64>, q: &BTreeMap<Iso3, f64>) -> Result<f64> {
    for dist in [p, q] {
        let sum: f64 = dist.values().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE || dist.values().any(|v| *v < 0.0) {
            return Err(Error::Unnormalized(sum));
        }
    }
    let bc: f64 = p.iter().filter_map(|(k, pv)| q.get(k).map(|qv| (pv * qv).sqrt())).sum();
    Ok(bc.clamp(0.0, 1.0))
}

/// Entity and speaker distributions over a profile's countries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerComparison {
    pub countries: Vec<Iso3>,
    pub entity_share: Vec<f64>,
    pub speaker_share: Vec<f64>,
    /// Set when the map has no mass in any profile country; `entity_share`
    /// is then all zeros.
    pub entity_empty: bool,
}

impl SpeakerComparison {
    pub fn entity_distribution(&self) -> BTreeMap<Iso3, f64> {
        self.countries.iter().cloned().zip(self.entity_share.iter().copied()).collect()
    }

    pub fn speaker_distribution(&self) -> BTreeMap<Iso3, f64> {
        self.countries.iter().cloned().zip(self.speaker_share.iter().copied()).collect()
    }

    /// Bhattacharyya coefficient of the pair; `None` when either side is empty.
    pub fn coefficient(&self) -> Option<f64> {
        if self.entity_empty || self.speaker_share.iter().all(|s| *s == 0.0) {
            return None;
        }
        bhattacharyya(&self.entity_distribution(), &self.speaker_distribution()).ok()
    }

    pub fn is_empty(&self) -> bool {
        self.countries.is_empty()
    }
}

/// Restricts the map to the profile's countries and normalizes both the
/// entity mass and the speaker populations there.
pub fn speaker_comparison(map: &DatasetMap, profile: &LanguageProfile) -> Result<SpeakerComparison> {
    if profile.speakers.is_empty() {
        return Err(Error::invalid("empty language profile"));
    }
    let countries: Vec<Iso3> = profile.speakers.keys().cloned().collect();
    let entity: Vec<f64> = countries.iter().map(|c| map.weight(c)).collect();
    let entity_total: f64 = entity.iter().sum();
    let speaker_total = profile.total_speakers() as f64;

    let entity_empty = entity_total <= 0.0;
    let entity_share =
        if entity_empty { vec![0.0; countries.len()] } else { entity.iter().map(|w| w / entity_total).collect() };
    let speaker_share = if speaker_total > 0.0 {
        profile.speakers.values().map(|&s| s as f64 / speaker_total).collect()
    } else {
        vec![0.0; countries.len()]
    };
    Ok(SpeakerComparison { countries, entity_share, speaker_share, entity_empty })
}

/// Sums country weights by region; the historical tally goes under
/// [`RegionKey::History`]. Regions with zero mass are omitted.
pub fn region_rollup(map: &DatasetMap, registry: &CountryRegistry) -> Result<BTreeMap<RegionKey, f64>> {
    let mut out = BTreeMap::new();
    for (iso, w) in &map.weights {
        let entry = registry.by_iso3(iso).ok_or_else(|| Error::UnknownCountry(iso.to_string()))?;
        *out.entry(RegionKey::from(entry.region)).or_insert(0.0) += w;
    }
    if map.historical > 0.0 {
        out.insert(RegionKey::History, map.historical);
    }
    out.retain(|_, w| *w > 0.0);
    Ok(out)
}

/// How an item whose entities span several regions is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionMode {
    /// The item's score counts once towards every region it touches.
    #[default]
    All,
    /// The item counts only towards its most frequent region (ties go to the
    /// first region in `Africa, Americas, Asia, Europe, Oceania, History`).
    Dominant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBreakdown {
    pub means: BTreeMap<RegionKey, f64>,
    pub counts: BTreeMap<RegionKey, usize>,
    /// Population standard deviation of the non-empty regions' means.
    pub macro_stdev: f64,
    /// Scored items with no region.
    pub excluded: usize,
}

/// Population (divide-by-N) standard deviation.
pub fn population_stdev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    // Welford's single-pass update
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    (m2 / values.len() as f64).sqrt()
}

/// Mean score per region and the macro standard deviation across regions.
///
/// `item_regions` lists one region per resolved entity of the item, so
/// repeats express how strongly an item leans towards a region.
pub fn region_performance(
    item_scores: &BTreeMap<String, f64>,
    item_regions: &BTreeMap<String, Vec<RegionKey>>,
    mode: RegionMode,
) -> RegionBreakdown {
    let mut sums: BTreeMap<RegionKey, f64> = BTreeMap::new();
    let mut counts: BTreeMap<RegionKey, usize> = BTreeMap::new();
    let mut excluded = 0;
    for (item, score) in item_scores {
        let regions = item_regions.get(item).map(Vec::as_slice).unwrap_or(&[]);
        if regions.is_empty() {
            excluded += 1;
            continue;
        }
        let targets: Vec<RegionKey> = match mode {
            RegionMode::All => regions.iter().copied().collect::<BTreeSet<_>>().into_iter().collect(),
            RegionMode::Dominant => {
                let mut tally: BTreeMap<RegionKey, usize> = BTreeMap::new();
                for r in regions {
                    *tally.entry(*r).or_insert(0) += 1;
                }
                let best = tally.values().copied().max().unwrap_or(0);
                tally.into_iter().find(|(_, c)| *c == best).map(|(r, _)| r).into_iter().collect()
            }
        };
        for r in targets {
            *sums.entry(r).or_insert(0.0) += score;
            *counts.entry(r).or_insert(0) += 1;
        }
    }
    let means: BTreeMap<RegionKey, f64> = sums.iter().map(|(r, s)| (*r, s / counts[r] as f64)).collect();
    let macro_stdev = population_stdev(&means.values().copied().collect::<Vec<_>>());
    RegionBreakdown { means, counts, macro_stdev, excluded }
}
