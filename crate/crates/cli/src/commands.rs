use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::Path;
use std::time::Duration;

use geocorpus::consistency::{
    agreement_at_k, el_consistency, parse_pairs_jsonl, projection_prf_sentences, rbo, AgreementDenominator,
    CountryRanking, RboVariant, RunOutput,
};
use geocorpus::factors::{build_design, cross_validate, parse_features, FactorTable, RegressionResult, TargetMode};
use geocorpus::ingest::{
    attach_candidates, parse_conll, parse_links_jsonl, parse_qa_json, write_links_jsonl, write_units_jsonl, QaOptions,
};
use geocorpus::kb::{build_dataset_map, unit_regions, CachedKb, HttpFetcher, Snapshot};
use geocorpus::report::{emit_bars, emit_choropleth, emit_report, ColorScale, ReportOptions, WorldGeometry};
use geocorpus::stats::{region_performance, speaker_comparison, RegionBreakdown, RegionMode};
use geocorpus::{CountryRegistry, DatasetMap, Iso3, LanguageProfile, RegionKey};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::*;
use crate::failure::Failure;
use crate::io::{check_input, open, parse_json, read_string, to_json, write};

type Outcome = Result<(), Failure>;

fn load_registry(path: Option<&Path>) -> Result<CountryRegistry, Failure> {
    match path {
        Some(p) => {
            check_input("registry", p)?;
            Ok(CountryRegistry::from_jsonl(open(p)?)?)
        }
        None => Ok(CountryRegistry::bundled()),
    }
}

fn load_profile(path: &Path) -> Result<LanguageProfile, Failure> {
    check_input("profile", path)?;
    Ok(LanguageProfile::from_json(open(path)?)?)
}

fn load_map(path: &Path) -> Result<DatasetMap, Failure> {
    check_input("in", path)?;
    let text = read_string(path)?;
    parse_json(path, &text)
}

fn load_kb(args: &KbArgs) -> Result<CachedKb, Failure> {
    let snapshot = match &args.kb {
        Some(p) => {
            check_input("kb", p)?;
            Snapshot::from_jsonl(open(p)?)?
        }
        None => Snapshot::default(),
    };
    let mut kb = CachedKb::new(snapshot);
    if let Some(dir) = &args.cache_dir {
        kb = kb.with_cache_dir(dir)?;
    }
    if args.remote {
        kb = kb.with_fetcher(Box::new(HttpFetcher::new(&args.endpoint, Duration::from_secs(args.timeout))));
    }
    Ok(kb)
}

pub fn ingest(args: &IngestArgs) -> Outcome {
    check_input("in", &args.input)?;
    match args.format {
        InputFormat::Conll => {
            let mut corpus = parse_conll(open(&args.input)?, &args.corpus_id, &args.lang)?;
            if corpus.warnings > 0 {
                log::warn!("{} I- tags did not continue a run and started a new mention", corpus.warnings);
            }
            if let Some(links) = &args.links {
                check_input("links", links)?;
                let parsed = parse_links_jsonl(open(links)?)?;
                if parsed.rejected > 0 {
                    log::warn!("{} linker records rejected", parsed.rejected);
                }
                let stats = attach_candidates(&mut corpus.mentions, &parsed.mentions);
                log::info!("{} mentions linked, {} without a linker record", stats.linked, stats.unlinked);
            }
            let total = corpus.mentions.len();
            corpus.mentions.retain(|m| !m.candidates.is_empty());
            if corpus.mentions.len() < total {
                log::warn!(
                    "{} of {total} mentions have no candidates and were not written",
                    total - corpus.mentions.len()
                );
            }
            let mut buf = Vec::new();
            write_links_jsonl(&mut buf, &corpus.mentions)?;
            write(&args.out, &buf)?;
            if let Some(path) = &args.units_out {
                let mut buf = Vec::new();
                write_units_jsonl(&mut buf, &corpus.units)?;
                write(path, &buf)?;
            }
        }
        InputFormat::Qa => {
            if args.links.is_some() || args.units_out.is_some() {
                return Err(Failure::input("invalid_input", "--links and --units-out apply to conll input only"));
            }
            let opts = QaOptions {
                corpus_id: &args.corpus_id,
                language: &args.lang,
                text_field: &args.text_field,
                id_field: &args.id_field,
                dedup: args.dedup,
            };
            let corpus = parse_qa_json(open(&args.input)?, &opts)?;
            if corpus.skipped > 0 {
                log::warn!("{} records skipped", corpus.skipped);
            }
            if corpus.duplicates > 0 {
                log::info!("{} duplicate records dropped", corpus.duplicates);
            }
            let mut buf = Vec::new();
            write_units_jsonl(&mut buf, &corpus.units)?;
            write(&args.out, &buf)?;
        }
    }
    Ok(())
}

pub fn resolve(args: &ResolveArgs) -> Outcome {
    check_input("in", &args.input)?;
    let registry = load_registry(args.kb.registry.as_deref())?;
    let kb = load_kb(&args.kb)?;
    let parsed = parse_links_jsonl(open(&args.input)?)?;
    if parsed.rejected > 0 {
        log::warn!("{} mention records rejected", parsed.rejected);
    }
    let map = build_dataset_map(&parsed.mentions, &kb, &registry, args.kb.top_k as usize, &args.corpus_id, &args.lang)?;
    write(&args.out, to_json(&map)?.as_bytes())
}

pub fn report(args: &ReportArgs) -> Outcome {
    if !args.threshold.is_finite() || args.threshold < 0.0 {
        return Err(Failure::input("invalid_input", "--threshold must be a non-negative number"));
    }
    let map = load_map(&args.input)?;
    let profile = args.profile.as_deref().map(load_profile).transpose()?;
    let registry = load_registry(args.registry.as_deref())?;
    let generated_at =
        (!args.reproducible).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let options = ReportOptions { threshold: args.threshold, generated_at };
    let report = emit_report(&map, profile.as_ref(), &registry, &options);
    write(&args.out, report.to_json()?.as_bytes())
}

#[derive(Serialize)]
struct FactorsOutput<'a> {
    #[serde(flatten)]
    result: RegressionResult,
    features: Vec<&'static str>,
    countries: &'a [Iso3],
    skipped: &'a [Iso3],
    target: TargetMode,
}

pub fn factors(args: &FactorsArgs) -> Outcome {
    let map = load_map(&args.input)?;
    check_input("table", &args.table)?;
    let table = FactorTable::from_csv(open(&args.table)?)?;
    let profile = load_profile(&args.profile)?;
    let registry = load_registry(args.registry.as_deref())?;
    let features = parse_features(&args.features)?;
    let target = match args.target {
        Target::LogOnePlus => TargetMode::LogOnePlus,
        Target::PositiveOnly => TargetMode::PositiveOnly,
    };
    let design = build_design(&map, &table, &profile, &features, registry.iso3_codes(), target)?;
    if !design.skipped.is_empty() {
        log::warn!("{} countries skipped for missing covariates", design.skipped.len());
    }
    let names: Vec<String> = features.iter().map(|f| f.name().to_string()).collect();
    let result = cross_validate(&design.x, &design.y, &names, args.folds as usize, args.seed)?;
    let out = FactorsOutput {
        result,
        features: features.iter().map(|f| f.name()).collect(),
        countries: &design.countries,
        skipped: &design.skipped,
        target,
    };
    write(&args.out, to_json(&out)?.as_bytes())
}

fn required<'a>(flag: &str, value: &'a Option<std::path::PathBuf>) -> Result<&'a Path, Failure> {
    let path = value.as_deref().ok_or_else(|| Failure::input("invalid_input", format!("--{flag} is required")))?;
    check_input(flag, path)?;
    Ok(path)
}

/// A ranking file holds either a JSON array of items or a dataset map.
fn load_ranking(path: &Path) -> Result<Vec<String>, Failure> {
    let text = read_string(path)?;
    let value: Value = parse_json(path, &text)?;
    if value.is_array() {
        return parse_json(path, &text);
    }
    let map: DatasetMap = serde_json::from_value(value).map_err(|e| {
        Failure::input("json", format!("{}: expected a JSON array or a dataset map: {e}", path.display()))
    })?;
    Ok(CountryRanking::from_map(&map).as_slice().iter().map(|c| c.to_string()).collect())
}

fn conll_tags(path: &Path) -> Result<Vec<Vec<String>>, Failure> {
    Ok(parse_conll(open(path)?, "compare", "und")?.tags)
}

pub fn compare(args: &CompareArgs) -> Outcome {
    let k = args.k as usize;
    let value = match args.metric {
        Metric::Agreement => {
            let informed = RunOutput::from_jsonl(open(required("a", &args.a)?)?)?;
            let relaxed = RunOutput::from_jsonl(open(required("b", &args.b)?)?)?;
            let counts = agreement_at_k(&informed, &relaxed, k)?;
            let denominator = match args.denominator {
                Denominator::Relaxed => AgreementDenominator::Relaxed,
                Denominator::Informed => AgreementDenominator::Informed,
            };
            if counts.has_coverage_gaps() {
                log::warn!(
                    "{} units missing from the informed run, {} from the relaxed run",
                    counts.missing_in_informed,
                    counts.missing_in_relaxed
                );
            }
            let mut obj = serde_json::to_value(&counts).map_err(|e| Failure::internal("serialize", e.to_string()))?;
            obj["agreement"] = serde_json::json!(counts.ratio(denominator));
            obj["denominator"] = serde_json::to_value(denominator).expect("enum serializes");
            obj
        }
        Metric::Rbo => {
            let a = load_ranking(required("a", &args.a)?)?;
            let b = load_ranking(required("b", &args.b)?)?;
            let variant = match args.variant {
                Variant::Ext => RboVariant::Ext,
                Variant::Min => RboVariant::Min,
                Variant::Average => RboVariant::Average,
            };
            serde_json::json!(rbo(&a, &b, args.p, k, variant)?)
        }
        Metric::El => {
            let pairs = parse_pairs_jsonl(open(required("pairs", &args.pairs)?)?)?;
            serde_json::to_value(el_consistency(&pairs, k)?)
                .map_err(|e| Failure::internal("serialize", e.to_string()))?
        }
        Metric::Prf => {
            let projected = conll_tags(required("a", &args.a)?)?;
            let predicted = conll_tags(required("b", &args.b)?)?;
            serde_json::to_value(projection_prf_sentences(&projected, &predicted)?)
                .map_err(|e| Failure::internal("serialize", e.to_string()))?
        }
    };
    let mut text = value.to_string();
    text.push('\n');
    write(&args.out, text.as_bytes())
}

#[derive(Deserialize)]
struct ScoreRecord {
    item_id: String,
    score: f64,
}

#[derive(Deserialize)]
struct RegionRecord {
    item_id: String,
    regions: Vec<RegionKey>,
}

fn jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, Failure> {
    let text = read_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Failure::input("parse", format!("{}: line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

#[derive(Serialize)]
struct RegionsOutput {
    #[serde(flatten)]
    breakdown: RegionBreakdown,
    mode: RegionMode,
}

pub fn regions(args: &RegionsArgs) -> Outcome {
    check_input("scores", &args.scores)?;
    let mut scores = BTreeMap::new();
    for r in jsonl::<ScoreRecord>(&args.scores)? {
        if !r.score.is_finite() {
            return Err(Failure::input("invalid_input", format!("item {}: score is not finite", r.item_id)));
        }
        if scores.insert(r.item_id.clone(), r.score).is_some() {
            return Err(Failure::input("invalid_input", format!("item {} scored twice", r.item_id)));
        }
    }
    let item_regions: BTreeMap<String, Vec<RegionKey>> = if let Some(path) = &args.item_regions {
        check_input("item-regions", path)?;
        let mut out: BTreeMap<String, Vec<RegionKey>> = BTreeMap::new();
        for r in jsonl::<RegionRecord>(path)? {
            out.entry(r.item_id).or_default().extend(r.regions);
        }
        out
    } else {
        let mentions = required("mentions", &args.mentions)?;
        let kb_path = required("kb", &args.kb)?;
        let registry = load_registry(args.registry.as_deref())?;
        let kb = Snapshot::from_jsonl(BufReader::new(open(kb_path)?))?;
        let parsed = parse_links_jsonl(open(mentions)?)?;
        if parsed.rejected > 0 {
            log::warn!("{} mention records rejected", parsed.rejected);
        }
        unit_regions(&parsed.mentions, &kb, &registry, args.top_k as usize)?
    };
    let mode = match args.mode {
        Mode::All => RegionMode::All,
        Mode::Dominant => RegionMode::Dominant,
    };
    let breakdown = region_performance(&scores, &item_regions, mode);
    if breakdown.excluded > 0 {
        log::warn!("{} scored items have no region", breakdown.excluded);
    }
    write(&args.out, to_json(&RegionsOutput { breakdown, mode })?.as_bytes())
}

pub fn render(args: &RenderArgs) -> Outcome {
    let map = load_map(&args.input)?;
    let svg = match args.kind {
        Chart::Choropleth => {
            let geometry = match &args.geometry {
                Some(p) => {
                    check_input("geometry", p)?;
                    WorldGeometry::from_geojson(open(p)?)?
                }
                None => WorldGeometry::bundled(),
            };
            let scale = match args.scale {
                Scale::Log => ColorScale::Log,
                Scale::Linear => ColorScale::Linear,
            };
            emit_choropleth(&map, &geometry, scale)
        }
        Chart::Bars => {
            let path = required("profile", &args.profile)?;
            let profile = load_profile(path)?;
            emit_bars(&speaker_comparison(&map, &profile)?, args.top_k as usize)
        }
    };
    write(&args.out, svg.as_bytes())
}
