use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use geojson::{FeatureCollection, GeoJson, Value};

use crate::error::{Error, Result};
use crate::ids::Iso3;
use crate::kb::CountryRegistry;

/// Bundled simplified world outlines (Natural Earth 1:50m, public domain),
/// one feature per country with an `iso3` property.
pub const DEFAULT_GEOMETRY: &str = include_str!("../../data/world.geojson");

/// Registry countries with no outline in [`DEFAULT_GEOMETRY`]: overseas
/// departments folded into their parent's outline and territories too small
/// for the source scale.
pub const BUNDLED_EXCEPTIONS: [&str; 14] =
    ["BES", "BVT", "CCK", "CXR", "GIB", "GLP", "GUF", "MTQ", "MYT", "REU", "SJM", "TKL", "TUV", "UMI"];

/// A ring of `(lon, lat)` vertices in degrees.
pub type Ring = Vec<(f64, f64)>;

/// Polygons (outer ring followed by holes) keyed by country.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorldGeometry {
    shapes: BTreeMap<Iso3, Vec<Vec<Ring>>>,
}

fn ring(points: &[Vec<f64>]) -> Result<Ring> {
    points
        .iter()
        .map(|p| match p.as_slice() {
            [lon, lat, ..] if lon.is_finite() && lat.is_finite() => Ok((*lon, *lat)),
            _ => Err(Error::invalid("geometry position must hold finite lon and lat")),
        })
        .collect()
}

fn polygon(rings: &[Vec<Vec<f64>>]) -> Result<Vec<Ring>> {
    rings.iter().map(|r| ring(r)).collect()
}

impl WorldGeometry {
    /// Reads a GeoJSON FeatureCollection whose features carry an `iso3`
    /// string property and a Polygon or MultiPolygon geometry. Features of
    /// the same country are merged.
    pub fn from_geojson<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let geojson: GeoJson = text.parse().map_err(|e: geojson::Error| Error::invalid(format!("geojson: {e}")))?;
        let collection = FeatureCollection::try_from(geojson).map_err(|e| Error::invalid(format!("geojson: {e}")))?;
        let mut shapes: BTreeMap<Iso3, Vec<Vec<Ring>>> = BTreeMap::new();
        for (i, feature) in collection.features.iter().enumerate() {
            let code = feature
                .property("iso3")
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::invalid(format!("feature {i} has no iso3 property")))?;
            let iso: Iso3 = code.parse()?;
            let polygons = match feature.geometry.as_ref().map(|g| &g.value) {
                Some(Value::Polygon(rings)) => vec![polygon(rings)?],
                Some(Value::MultiPolygon(polys)) => polys.iter().map(|p| polygon(p)).collect::<Result<_>>()?,
                _ => return Err(Error::invalid(format!("feature {code} is not a polygon"))),
            };
            shapes.entry(iso).or_default().extend(polygons);
        }
        Ok(WorldGeometry { shapes })
    }

    pub fn bundled() -> Self {
        WorldGeometry::from_geojson(DEFAULT_GEOMETRY.as_bytes()).expect("bundled geometry is valid")
    }

    pub fn insert(&mut self, iso: Iso3, polygons: Vec<Vec<Ring>>) {
        self.shapes.insert(iso, polygons);
    }

    pub fn get(&self, iso: &Iso3) -> Option<&[Vec<Ring>]> {
        self.shapes.get(iso).map(Vec::as_slice)
    }

    pub fn countries(&self) -> impl Iterator<Item = &Iso3> {
        self.shapes.keys()
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Registry countries without an outline.
    pub fn missing_from(&self, registry: &CountryRegistry) -> BTreeSet<Iso3> {
        registry.iso3_codes().filter(|iso| !self.shapes.contains_key(*iso)).cloned().collect()
    }
}
