//! Agreement between entity-linking runs and cross-lingual consistency scores.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Display;
use std::hash::Hash;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{Iso3, Qid};
use crate::ingest::{json_records, read_text};
use crate::map::DatasetMap;

fn dedup<T: Eq + Hash + Clone>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

fn top_k_set<T: Eq + Hash>(items: &[T], k: usize) -> HashSet<&T> {
    items.iter().take(k).collect()
}

// ---------------------------------------------------------------------------
// Runs and agreement@k

/// Linked QIDs per unit, in rank order and without repeats.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOutput {
    units: BTreeMap<String, Vec<Qid>>,
}

#[derive(Deserialize)]
struct RunRecord {
    unit_id: String,
    qids: Vec<Qid>,
}

impl RunOutput {
    /// Records `qids` for `unit_id`, appending to any earlier list.
    pub fn insert(&mut self, unit_id: impl Into<String>, qids: impl IntoIterator<Item = Qid>) {
        let entry = self.units.entry(unit_id.into()).or_default();
        let merged = dedup(entry.drain(..).chain(qids));
        *entry = merged;
    }

    /// Reads `{"unit_id": ..., "qids": [...]}` records.
    pub fn from_jsonl<R: Read>(reader: R) -> Result<Self> {
        let text = read_text(reader)?;
        let mut run = RunOutput::default();
        for (i, value) in json_records(&text)?.into_iter().enumerate() {
            let record: RunRecord =
                serde_json::from_value(value).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
            run.insert(record.unit_id, record.qids);
        }
        Ok(run)
    }

    pub fn get(&self, unit_id: &str) -> &[Qid] {
        self.units.get(unit_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn unit_ids(&self) -> impl Iterator<Item = &str> {
        self.units.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, Vec<Qid>)> for RunOutput {
    fn from_iter<I: IntoIterator<Item = (S, Vec<Qid>)>>(iter: I) -> Self {
        let mut run = RunOutput::default();
        for (unit, qids) in iter {
            run.insert(unit, qids);
        }
        run
    }
}

/// Denominator of the agreement ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgreementDenominator {
    /// `common / (common + relaxed_only)`: everything the relaxed run kept.
    #[default]
    Relaxed,
    /// `common / informed_total`: everything the informed run kept.
    Informed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementCounts {
    pub k: usize,
    pub common: u64,
    pub relaxed_only: u64,
    pub informed_total: u64,
    pub units: usize,
    /// Units present only in the relaxed run.
    pub missing_in_informed: usize,
    /// Units present only in the informed run.
    pub missing_in_relaxed: usize,
}

impl AgreementCounts {
    /// Builds counts from published totals.
    pub fn from_totals(common: u64, relaxed_only: u64) -> Self {
        AgreementCounts { common, relaxed_only, ..Default::default() }
    }

    /// Agreement ratio, or `None` when the denominator is zero.
    pub fn ratio(&self, denominator: AgreementDenominator) -> Option<f64> {
        let denom = match denominator {
            AgreementDenominator::Relaxed => self.common + self.relaxed_only,
            AgreementDenominator::Informed => self.informed_total,
        };
        (denom > 0).then(|| self.common as f64 / denom as f64)
    }

    pub fn has_coverage_gaps(&self) -> bool {
        self.missing_in_informed + self.missing_in_relaxed > 0
    }
}

/// Compares the top-`k` QID sets of two runs unit by unit.
///
/// A unit found in one run only is compared against an empty list and
/// counted in the matching `missing_in_*` field.
pub fn agreement_at_k(informed: &RunOutput, relaxed: &RunOutput, k: usize) -> Result<AgreementCounts> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut counts = AgreementCounts { k, ..Default::default() };
    let units: BTreeSet<&str> = informed.unit_ids().chain(relaxed.unit_ids()).collect();
    for unit in units {
        if !informed.units.contains_key(unit) {
            counts.missing_in_informed += 1;
        }
        if !relaxed.units.contains_key(unit) {
            counts.missing_in_relaxed += 1;
        }
        let a = top_k_set(informed.get(unit), k);
        let b = top_k_set(relaxed.get(unit), k);
        let common = a.intersection(&b).count() as u64;
        counts.common += common;
        counts.relaxed_only += b.len() as u64 - common;
        counts.informed_total += a.len() as u64;
        counts.units += 1;
    }
    Ok(counts)
}

// ---------------------------------------------------------------------------
// Rankings and RBO

/// Countries ordered by descending weight, ties broken by ascending code.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountryRanking(Vec<Iso3>);

impl CountryRanking {
    /// Ranks the countries of `map` with positive weight.
    pub fn from_map(map: &DatasetMap) -> Self {
        let mut entries: Vec<(&Iso3, f64)> =
            map.weights.iter().filter(|(_, w)| **w > 0.0).map(|(c, w)| (c, *w)).collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        CountryRanking(entries.into_iter().map(|(c, _)| c.clone()).collect())
    }

    pub fn from_list(countries: Vec<Iso3>) -> Result<Self> {
        check_unique(&countries)?;
        Ok(CountryRanking(countries))
    }

    pub fn as_slice(&self) -> &[Iso3] {
        &self.0
    }

    pub fn top(&self, k: usize) -> &[Iso3] {
        &self.0[..k.min(self.0.len())]
    }
}

fn check_unique<T: Eq + Hash + Display>(items: &[T]) -> Result<()> {
    let mut seen = HashSet::new();
    match items.iter().find(|x| !seen.insert(*x)) {
        Some(dup) => Err(Error::DuplicateInRanking(dup.to_string())),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RboVariant {
    /// Extrapolated RBO: `sum_{d<=k} ((1-p)/p) p^d A_d + A_k p^k`.
    #[default]
    Ext,
    /// Lower bound on the full RBO given the observed prefixes.
    Min,
    /// Plain average overlap `(1/k) sum_{d<=k} A_d`; ignores `p`.
    Average,
}

impl std::str::FromStr for RboVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ext" => Ok(RboVariant::Ext),
            "min" => Ok(RboVariant::Min),
            "average" => Ok(RboVariant::Average),
            other => Err(Error::invalid(format!("unknown RBO variant {other:?} (expected ext, min or average)"))),
        }
    }
}

/// `X_d` for d = 1..=depth, the overlap size of the two depth-d prefixes.
fn overlaps<T: Eq + Hash>(a: &[T], b: &[T], depth: usize) -> Vec<usize> {
    let mut seen_a = HashSet::new();
    let mut seen_b = HashSet::new();
    let mut x = 0;
    let mut out = Vec::with_capacity(depth);
    for d in 0..depth {
        match (a.get(d), b.get(d)) {
            (Some(ia), Some(ib)) if ia == ib => x += 1,
            (ia, ib) => {
                if let Some(ia) = ia {
                    x += usize::from(seen_b.contains(ia));
                    seen_a.insert(ia);
                }
                if let Some(ib) = ib {
                    x += usize::from(seen_a.contains(ib));
                    seen_b.insert(ib);
                }
            }
        }
        out.push(x);
    }
    out
}

/// Rank-biased overlap of two rankings truncated to depth `k`.
///
/// The evaluation depth is `min(k, longer list length)`; a shorter list
/// contributes its whole length at deeper prefixes. Identical truncated
/// rankings score exactly 1 under `Ext` and `Average`.
pub fn rbo<T: Eq + Hash + Display>(a: &[T], b: &[T], p: f64, k: usize, variant: RboVariant) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1), got {p}")));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    check_unique(a)?;
    check_unique(b)?;
    let (a, b) = (&a[..k.min(a.len())], &b[..k.min(b.len())]);
    let depth = a.len().max(b.len());
    if a == b && variant != RboVariant::Min {
        return Ok(1.0);
    }
    if depth == 0 {
        return Ok(0.0);
    }
    let x = overlaps(a, b, depth);
    let agreement = |d: usize| x[d - 1] as f64 / d as f64;
    let value = match variant {
        RboVariant::Ext => {
            let scale = (1.0 - p) / p;
            let sum: f64 = (1..=depth).map(|d| scale * p.powi(d as i32) * agreement(d)).sum();
            sum + agreement(depth) * p.powi(depth as i32)
        }
        RboVariant::Min => {
            let xk = x[depth - 1] as f64;
            let sum: f64 = (1..=depth).map(|d| (x[d - 1] as f64 - xk) * p.powi(d as i32) / d as f64).sum();
            (1.0 - p) / p * (sum - xk * (1.0 - p).ln())
        }
        RboVariant::Average => (1..=depth).map(agreement).sum::<f64>() / depth as f64,
    };
    Ok(value.clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Parallel sentences

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub pair_id: String,
    pub src_qids: Vec<Qid>,
    pub tgt_qids: Vec<Qid>,
}

pub fn parse_pairs_jsonl<R: Read>(reader: R) -> Result<Vec<ParallelPair>> {
    let text = read_text(reader)?;
    json_records(&text)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| serde_json::from_value(v).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElConsistency {
    /// Mean per-pair overlap times 100; `None` when no pair was scored.
    pub percentage: Option<f64>,
    pub scored: usize,
    /// Pairs whose source side has no entity.
    pub skipped: usize,
}

/// Mean of `|S_k ∩ T_k| / |S_k|` over pairs with a nonempty source set,
/// as a percentage.
pub fn el_consistency(pairs: &[ParallelPair], k: usize) -> Result<ElConsistency> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut ratios = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    for pair in pairs {
        let src = dedup(pair.src_qids.iter().cloned());
        let tgt = dedup(pair.tgt_qids.iter().cloned());
        let s = top_k_set(&src, k);
        if s.is_empty() {
            skipped += 1;
            continue;
        }
        let t = top_k_set(&tgt, k);
        ratios.push(s.intersection(&t).count() as f64 / s.len() as f64);
    }
    let scored = ratios.len();
    let percentage = (scored > 0).then(|| 100.0 * ratios.iter().sum::<f64>() / scored as f64);
    Ok(ElConsistency { percentage, scored, skipped })
}

// ---------------------------------------------------------------------------
// Projection precision / recall

/// Entity types scored by [`projection_prf`].
pub const SHARED_TYPES: [&str; 3] = ["PER", "LOC", "ORG"];

fn collapse(label: &str) -> &str {
    let bare = match label.split_once('-') {
        Some(("B" | "I" | "E" | "S", rest)) => rest,
        _ => label,
    };
    if SHARED_TYPES.contains(&bare) {
        bare
    } else {
        "O"
    }
}

/// Maximal runs of one entity type as `(start, end, type)`, end exclusive.
fn chunks<S: AsRef<str>>(labels: &[S]) -> HashSet<(usize, usize, &str)> {
    let mut out = HashSet::new();
    let mut start = 0;
    for i in 1..=labels.len() {
        let prev = collapse(labels[i - 1].as_ref());
        if i == labels.len() || collapse(labels[i].as_ref()) != prev {
            if prev != "O" {
                out.insert((start, i, prev));
            }
            start = i;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Entity-level precision, recall and F1 of `predicted` against
/// `projected`.
///
/// Labels are reduced to their type (`B-PER`, `I-PER` and `PER` all become
/// `PER`); types outside [`SHARED_TYPES`] become `O`. An entity is a maximal
/// run of one type and matches only with identical span and type. Scores
/// follow [`Prf::from_counts`].
pub fn projection_prf<S: AsRef<str>, T: AsRef<str>>(projected: &[S], predicted: &[T]) -> Result<Prf> {
    if projected.len() != predicted.len() {
        return Err(Error::LengthMismatch(format!(
            "{} projected labels vs {} predicted labels",
            projected.len(),
            predicted.len()
        )));
    }
    let gold = chunks(projected);
    let pred = chunks(predicted);
    let tp = gold.intersection(&pred).count();
    Ok(Prf::from_counts(tp, pred.len() - tp, gold.len() - tp))
}

/// [`projection_prf`] over aligned sentences, pooling entity counts before
/// computing the scores. Entities never span a sentence boundary.
pub fn projection_prf_sentences<S: AsRef<str>, T: AsRef<str>>(
    projected: &[Vec<S>],
    predicted: &[Vec<T>],
) -> Result<Prf> {
    if projected.len() != predicted.len() {
        return Err(Error::LengthMismatch(format!(
            "{} projected sentences vs {} predicted sentences",
            projected.len(),
            predicted.len()
        )));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (i, (g, p)) in projected.iter().zip(predicted).enumerate() {
        let prf = projection_prf(g, p).map_err(|e| Error::LengthMismatch(format!("sentence {}: {e}", i + 1)))?;
        tp += prf.true_positives;
        fp += prf.false_positives;
        fn_ += prf.false_negatives;
    }
    Ok(Prf::from_counts(tp, fp, fn_))
}

impl Prf {
    /// Scores from entity counts. With no entity on either side all three
    /// scores are 1; otherwise an empty denominator gives 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let (precision, recall) = if tp + fp + fn_ == 0 {
            (1.0, 1.0)
        } else {
            let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
            (ratio(tp, tp + fp), ratio(tp, tp + fn_))
        };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Prf { precision, recall, f1, true_positives: tp, false_positives: fp, false_negatives: fn_ }
    }
}
