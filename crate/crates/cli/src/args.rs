use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geocorpus::kb::DEFAULT_ENDPOINT;

/// Map NLP datasets onto countries and measure how representative they are.
///
/// A typical run stages through files: `ingest` turns a corpus into
/// mentions, `resolve` maps mentions to countries, and `report`, `render`,
/// `factors` and `regions` analyse the resulting map. Paths given as `-`
/// read from stdin or write to stdout.
#[derive(Debug, Parser)]
#[command(name = "geocorpus", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads for parallel stages [default: one per core]
    #[arg(long, global = true, env = "GEOCORPUS_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a corpus into text units and entity mentions
    Ingest(IngestArgs),
    /// Resolve linked mentions to countries and build a dataset map
    Resolve(ResolveArgs),
    /// Compute representativeness statistics for a dataset map
    Report(ReportArgs),
    /// Fit and cross-validate the socioeconomic factor model
    Factors(FactorsArgs),
    /// Compare two linking runs or score cross-lingual consistency
    Compare(CompareArgs),
    /// Break item scores down by world region
    Regions(RegionsArgs),
    /// Draw a dataset map as an SVG choropleth or bar chart
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// token<TAB>tag[<TAB>qid] lines, blank line between sentences
    Conll,
    /// QA records as a JSON document or JSON lines
    Qa,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub format: InputFormat,

    /// Language code recorded on every text unit
    #[arg(long)]
    pub lang: String,

    #[arg(long, default_value = "corpus")]
    pub corpus_id: String,

    /// Corpus file
    #[arg(long = "in", default_value = "-")]
    pub input: PathBuf,

    /// Mentions (conll) or text units (qa) as JSON lines
    #[arg(long, default_value = "-")]
    pub out: PathBuf,

    /// Linker output (links-jsonl) joined onto CoNLL mentions by unit and span
    #[arg(long)]
    pub links: Option<PathBuf>,

    /// Also write the CoNLL text units here
    #[arg(long)]
    pub units_out: Option<PathBuf>,

    /// QA field holding the text
    #[arg(long, default_value = "question")]
    pub text_field: String,

    /// QA field holding the record id
    #[arg(long, default_value = "id")]
    pub id_field: String,

    /// Drop QA records whose text repeats an earlier record
    #[arg(long)]
    pub dedup: bool,
}

#[derive(Debug, Args)]
pub struct KbArgs {
    /// Knowledge snapshot (JSON lines of entity claims)
    #[arg(long, required_unless_present = "remote")]
    pub kb: Option<PathBuf>,

    /// Country registry (JSON lines) [default: bundled registry]
    #[arg(long)]
    pub registry: Option<PathBuf>,

    /// Directory for the entity cache
    #[arg(long, env = "GEOCORPUS_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,

    /// Fetch entities missing from the snapshot and cache from the remote endpoint
    #[arg(long)]
    pub remote: bool,

    /// Remote entity endpoint
    #[arg(long, env = "GEOCORPUS_KB_ENDPOINT", default_value = DEFAULT_ENDPOINT)]
    pub endpoint: String,

    /// Remote request timeout in seconds
    #[arg(long, env = "GEOCORPUS_KB_TIMEOUT", default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub timeout: u64,

    /// Candidates tried per mention, in rank order
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub top_k: u32,
}

#[derive(Debug, Args)]
pub struct ResolveArgs {
    #[command(flatten)]
    pub kb: KbArgs,

    /// Mentions in links-jsonl format
    #[arg(long = "in", default_value = "-")]
    pub input: PathBuf,

    /// Dataset map (JSON)
    #[arg(long, default_value = "-")]
    pub out: PathBuf,

    #[arg(long, default_value = "corpus")]
    pub corpus_id: String,

    #[arg(long, default_value = "und")]
    pub lang: String,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Dataset map (JSON)
    #[arg(long = "in", default_value = "-")]
    pub input: PathBuf,

    /// Language profile with speaker counts per country
    #[arg(long)]
    pub profile: Option<PathBuf>,

    /// Country registry (JSON lines) [default: bundled registry]
    #[arg(long)]
    pub registry: Option<PathBuf>,

    #[arg(long, default_value = "-")]
    pub out: PathBuf,

    /// Weight at or below which a country counts as unrepresented
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,

    /// Leave `generated_at` null so reruns are byte-identical
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// ln(1 + weight) over all rows
    LogOnePlus,
    /// ln(weight), rows with zero weight dropped
    PositiveOnly,
}

#[derive(Debug, Args)]
pub struct FactorsArgs {
    /// Dataset map (JSON)
    #[arg(long = "in", visible_alias = "map", default_value = "-")]
    pub input: PathBuf,

    /// Factor table CSV: iso3,pop,gdp,gdppc,land_km2,centroid_lat,centroid_lon
    #[arg(long)]
    pub table: PathBuf,

    /// Language profile (weights for the geo feature)
    #[arg(long)]
    pub profile: PathBuf,

    /// Country registry limiting the rows [default: bundled registry]
    #[arg(long)]
    pub registry: Option<PathBuf>,

    /// `+`-separated subset of pop, gdp, gdppc, land, geo
    #[arg(long, visible_alias = "factors", default_value = "pop+gdp+gdppc+land+geo")]
    pub features: String,

    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(2..))]
    pub folds: u32,

    /// Seed for the fold shuffle
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Target::LogOnePlus)]
    pub target: Target,

    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// agreement@k between an informed (--a) and a relaxed (--b) run
    Agreement,
    /// rank-biased overlap of two rankings or dataset maps (--a, --b)
    Rbo,
    /// entity-linking consistency over parallel sentence pairs (--pairs)
    El,
    /// precision/recall/F1 of predicted (--b) against projected (--a) CoNLL labels
    Prf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Ext,
    Min,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Denominator {
    /// common / (common + relaxed_only)
    Relaxed,
    /// common / informed total
    Informed,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_enum)]
    pub metric: Metric,

    /// First input: informed run, ranking, or projected labels
    #[arg(long, required_if_eq_any = [("metric", "agreement"), ("metric", "rbo"), ("metric", "prf")])]
    pub a: Option<PathBuf>,

    /// Second input: relaxed run, ranking, or predicted labels
    #[arg(long, required_if_eq_any = [("metric", "agreement"), ("metric", "rbo"), ("metric", "prf")])]
    pub b: Option<PathBuf>,

    /// Parallel pairs (JSON lines) for the el metric
    #[arg(long, required_if_eq("metric", "el"))]
    pub pairs: Option<PathBuf>,

    /// Depth / top-k cut-off
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,

    /// RBO persistence, 0 < p < 1
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,

    #[arg(long, value_enum, default_value_t = Variant::Ext)]
    pub variant: Variant,

    #[arg(long, value_enum, default_value_t = Denominator::Relaxed)]
    pub denominator: Denominator,

    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// An item counts towards every region it touches
    All,
    /// An item counts towards its most frequent region only
    Dominant,
}

#[derive(Debug, Args)]
pub struct RegionsArgs {
    /// Item scores as JSON lines: {"item_id": ..., "score": ...}
    #[arg(long)]
    pub scores: PathBuf,

    /// Item regions as JSON lines: {"item_id": ..., "regions": ["Africa", ...]}
    #[arg(long, conflicts_with = "mentions")]
    pub item_regions: Option<PathBuf>,

    /// Linked mentions whose unit ids are the item ids (needs --kb)
    #[arg(long, required_unless_present = "item_regions", requires = "kb")]
    pub mentions: Option<PathBuf>,

    /// Knowledge snapshot used with --mentions
    #[arg(long)]
    pub kb: Option<PathBuf>,

    /// Country registry (JSON lines) [default: bundled registry]
    #[arg(long)]
    pub registry: Option<PathBuf>,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub top_k: u32,

    #[arg(long, value_enum, default_value_t = Mode::All)]
    pub mode: Mode,

    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Chart {
    /// World map shaded by country weight
    Choropleth,
    /// Dataset share against speaker share per profile country
    Bars,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Dataset map (JSON)
    #[arg(long = "in", default_value = "-")]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = Chart::Choropleth)]
    pub kind: Chart,

    /// SVG output
    #[arg(long, default_value = "-")]
    pub out: PathBuf,

    /// GeoJSON outlines with an iso3 property [default: bundled outlines]
    #[arg(long)]
    pub geometry: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Scale::Log)]
    pub scale: Scale,

    /// Language profile (required for bars)
    #[arg(long, required_if_eq("kind", "bars"))]
    pub profile: Option<PathBuf>,

    /// Number of countries in the bar chart
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub top_k: u32,
}
