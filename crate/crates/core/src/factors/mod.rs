//! Socioeconomic factor regression.
//!
//! Predicts the (log) entity count of each country from its population,
//! GDP, GDP per capita, land area and distance to the language's
//! countries, then scores the linear model with seeded k-fold
//! cross-validation.

mod cv;
mod ols;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::Iso3;
use crate::map::DatasetMap;
use crate::stats::LanguageProfile;

pub use cv::{cross_validate, FoldMetrics, RegressionResult, SplitMix64};
pub use ols::{fit_ols, OlsFit};

/// Mean Earth radius used for great-circle distances, in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Pop,
    Gdp,
    Gdppc,
    Land,
    Geo,
}

impl Feature {
    pub fn name(self) -> &'static str {
        match self {
            Feature::Pop => "pop",
            Feature::Gdp => "gdp",
            Feature::Gdppc => "gdppc",
            Feature::Land => "land",
            Feature::Geo => "geo",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pop" => Ok(Feature::Pop),
            "gdp" => Ok(Feature::Gdp),
            "gdppc" => Ok(Feature::Gdppc),
            "land" => Ok(Feature::Land),
            "geo" => Ok(Feature::Geo),
            other => Err(Error::invalid(format!("unknown feature {other:?}"))),
        }
    }
}

/// Parses a `+`-separated feature list such as `pop+gdp+geo`.
pub fn parse_features(spec: &str) -> Result<Vec<Feature>> {
    let mut out = Vec::new();
    for part in spec.split('+') {
        let f: Feature = part.parse()?;
        if out.contains(&f) {
            return Err(Error::invalid(format!("feature {f} listed twice")));
        }
        out.push(f);
    }
    Ok(out)
}

/// Covariates of one country. Missing cells are `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorRow {
    pub pop: Option<f64>,
    pub gdp: Option<f64>,
    pub gdppc: Option<f64>,
    pub land: Option<f64>,
    /// (latitude, longitude) in degrees.
    pub centroid: Option<(f64, f64)>,
}

impl FactorRow {
    fn scalar(&self, feature: Feature) -> Option<f64> {
        match feature {
            Feature::Pop => self.pop,
            Feature::Gdp => self.gdp,
            Feature::Gdppc => self.gdppc,
            Feature::Land => self.land,
            Feature::Geo => None,
        }
    }

    /// Features from `features` this row cannot supply.
    pub fn missing(&self, features: &[Feature]) -> Vec<Feature> {
        features
            .iter()
            .copied()
            .filter(|f| match f {
                Feature::Geo => self.centroid.is_none(),
                _ => self.scalar(*f).is_none(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorTable {
    pub rows: BTreeMap<Iso3, FactorRow>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    iso3: String,
    pop: Option<f64>,
    gdp: Option<f64>,
    gdppc: Option<f64>,
    land_km2: Option<f64>,
    centroid_lat: Option<f64>,
    centroid_lon: Option<f64>,
}

impl FactorTable {
    /// Reads `iso3,pop,gdp,gdppc,land_km2,centroid_lat,centroid_lon` CSV
    /// with a header row. Empty cells mark missing covariates.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = FactorTable::default();
        for (idx, record) in rdr.deserialize::<CsvRow>().enumerate() {
            let line = idx + 2;
            let row = record?;
            let iso = Iso3::new(&row.iso3).map_err(|e| Error::Parse { line, message: e.to_string() })?;
            for (name, v) in [("pop", row.pop), ("gdp", row.gdp), ("gdppc", row.gdppc), ("land_km2", row.land_km2)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::Parse { line, message: format!("{name} must be positive, got {v}") });
                    }
                }
            }
            let centroid = match (row.centroid_lat, row.centroid_lon) {
                (Some(lat), Some(lon)) if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) => {
                    Some((lat, lon))
                }
                (None, None) => None,
                _ => return Err(Error::Parse { line, message: "invalid centroid".into() }),
            };
            let parsed = FactorRow { pop: row.pop, gdp: row.gdp, gdppc: row.gdppc, land: row.land_km2, centroid };
            if table.rows.insert(iso.clone(), parsed).is_some() {
                return Err(Error::Parse { line, message: format!("duplicate row for {iso}") });
            }
        }
        Ok(table)
    }

    pub fn centroid(&self, iso: &Iso3) -> Result<(f64, f64)> {
        self.rows.get(iso).and_then(|r| r.centroid).ok_or_else(|| Error::MissingCentroid(iso.to_string()))
    }
}

/// Great-circle distance between two (lat, lon) points in degrees, in km.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Speaker-weighted mean distance (km) from `target` to the profile's countries.
pub fn geo_feature(target: &Iso3, profile: &LanguageProfile, table: &FactorTable) -> Result<f64> {
    let total = profile.total_speakers() as f64;
    if total <= 0.0 {
        return Err(Error::invalid(format!("profile {} has no speakers", profile.language)));
    }
    let origin = table.centroid(target)?;
    let mut acc = 0.0;
    for (iso, &speakers) in &profile.speakers {
        let c = table.centroid(iso)?;
        acc += speakers as f64 / total * haversine_km(origin, c);
    }
    Ok(acc)
}

/// How the per-country target is derived from entity weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    /// `ln(1 + weight)` over every row, zero-weight countries included.
    #[default]
    LogOnePlus,
    /// `ln(weight)`, rows with zero weight dropped.
    PositiveOnly,
}

/// A standardized design matrix with its target vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub features: Vec<Feature>,
    pub countries: Vec<Iso3>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Countries skipped because a selected covariate was missing.
    pub skipped: Vec<Iso3>,
}

/// Builds the regression inputs for `countries` (typically the registry
/// universe). Rows appear in ascending iso3 order, so the input order of the
/// factor table does not matter.
///
/// `pop`, `gdp`, `gdppc` and `land` enter as natural logs, `geo` as
/// thousands of km; every column is then standardized to zero mean and unit
/// (population) variance. Constant columns are centered only.
pub fn build_design<'a, I>(
    map: &DatasetMap,
    table: &FactorTable,
    profile: &LanguageProfile,
    features: &[Feature],
    countries: I,
    target: TargetMode,
) -> Result<Design>
where
    I: IntoIterator<Item = &'a Iso3>,
{
    if features.is_empty() {
        return Err(Error::invalid("at least one feature is required"));
    }
    let mut universe: Vec<&Iso3> = countries.into_iter().collect();
    universe.sort();
    universe.dedup();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut ys = Vec::new();
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    for iso in universe {
        let Some(row) = table.rows.get(iso) else { continue };
        if !row.missing(features).is_empty() {
            skipped.push(iso.clone());
            continue;
        }
        let weight = map.weight(iso);
        let y = match target {
            TargetMode::LogOnePlus => weight.ln_1p(),
            TargetMode::PositiveOnly if weight > 0.0 => weight.ln(),
            TargetMode::PositiveOnly => continue,
        };
        let mut values = Vec::with_capacity(features.len());
        for f in features {
            values.push(match f {
                Feature::Geo => geo_feature(iso, profile, table)? * 1e-3,
                other => row.scalar(*other).expect("checked above").ln(),
            });
        }
        rows.push(values);
        ys.push(y);
        used.push(iso.clone());
    }
    if rows.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 usable rows, found {}", rows.len())));
    }

    let n = rows.len();
    let mut x = DMatrix::from_fn(n, features.len(), |i, j| rows[i][j]);
    standardize_columns(&mut x);
    Ok(Design { features: features.to_vec(), countries: used, x, y: DVector::from_vec(ys), skipped })
}

fn standardize_columns(x: &mut DMatrix<f64>) {
    let n = x.nrows() as f64;
    for mut col in x.column_iter_mut() {
        let mean = col.iter().sum::<f64>() / n;
        col.iter_mut().for_each(|v| *v -= mean);
        let sd = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        if sd > f64::EPSILON * mean.abs().max(1.0) {
            col.iter_mut().for_each(|v| *v /= sd);
        } else {
            col.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}
