//! Geographic representativeness analysis for NLP datasets.
//!
//! Entity mentions are resolved to modern countries through Wikidata
//! property chains ([`kb`]), accumulated into a per-country [`DatasetMap`],
//! and summarized by the measures in [`stats`]. [`factors`] relates entity
//! counts to socioeconomic covariates, [`consistency`] compares linker runs,
//! and [`report`] renders JSON reports and SVG figures.

pub mod consistency;
pub mod error;
pub mod factors;
pub mod ids;
pub mod ingest;
pub mod kb;
pub mod map;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
pub use ids::{Iso3, Qid};
pub use ingest::{LinkedMention, TextUnit};
pub use kb::{CountryRegistry, KbEntity, RegionKey};
pub use map::DatasetMap;
pub use stats::LanguageProfile;
