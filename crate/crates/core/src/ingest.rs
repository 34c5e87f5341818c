//! Corpus readers.
//!
//! Three input formats are supported:
//!
//! * CoNLL-style NER files (`token<TAB>tag`, blank line between sentences),
//!   producing one [`TextUnit`] per sentence and span-only mentions. An
//!   optional third column holds a gold Wikidata link.
//! * QA datasets as a JSON document or JSON lines, producing one
//!   [`TextUnit`] per record (questions only, contexts are ignored).
//! * Linker output in the links-jsonl interchange format, producing
//!   [`LinkedMention`]s with ranked Wikidata candidates.
//!
//! All spans are half-open character (not byte) offsets into the unit text.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ids::Qid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextUnit {
    pub corpus_id: String,
    pub unit_id: String,
    pub language: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum NerLabel {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "ORG")]
    Org,
    #[serde(rename = "OTHER")]
    Other,
    #[default]
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

impl NerLabel {
    /// Maps an entity type name from a tag (`PER`, `LOC`, `MISC`, ...) to a label.
    pub fn from_type(name: &str) -> Self {
        match name {
            "PER" => NerLabel::Per,
            "LOC" => NerLabel::Loc,
            "ORG" => NerLabel::Org,
            _ => NerLabel::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub qid: Qid,
    pub score: f64,
    /// 1-based position in the linker's ranking.
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkedMention {
    pub unit_id: String,
    pub surface: String,
    pub span: (usize, usize),
    pub ner_label: NerLabel,
    pub candidates: Vec<Candidate>,
}

impl LinkedMention {
    pub fn top_qids(&self, k: usize) -> impl Iterator<Item = &Qid> {
        self.candidates.iter().take(k).map(|c| &c.qid)
    }
}

/// Slice `text` by a half-open character span.
pub fn slice_chars(text: &str, span: (usize, usize)) -> Option<&str> {
    let (start, end) = span;
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let begin = indices.nth(start)?;
    let finish = if end == start { begin } else { indices.nth(end - start - 1)? };
    Some(&text[begin..finish])
}

// ---------------------------------------------------------------------------
// CoNLL

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConllCorpus {
    pub units: Vec<TextUnit>,
    /// Mentions in text order. `candidates` holds the gold link when the
    /// file has a link column, and is empty otherwise.
    pub mentions: Vec<LinkedMention>,
    /// Raw tag sequence of every sentence, aligned with `units`.
    pub tags: Vec<Vec<String>>,
    /// Number of `I-X` tags that did not continue an `X` run.
    pub warnings: usize,
}

struct SentenceBuilder {
    tokens: Vec<String>,
    tags: Vec<String>,
    links: Vec<Option<Qid>>,
}

/// Link-column values meaning "no link".
const NO_LINK: [&str; 5] = ["-", "_", "O", "--NME--", "NIL"];

enum Tag<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

fn parse_tag(tag: &str) -> Option<Tag<'_>> {
    if tag == "O" {
        return Some(Tag::Outside);
    }
    let (prefix, kind) = tag.split_once('-')?;
    if kind.is_empty() {
        return None;
    }
    match prefix {
        "B" | "S" => Some(Tag::Begin(kind)),
        "I" | "E" => Some(Tag::Inside(kind)),
        _ => None,
    }
}

/// Parses a CoNLL-style NER file.
///
/// Lines hold a token and a tag separated by a tab (a single run of spaces is
/// accepted when no tab is present). Blank lines and `-DOCSTART-` lines end a
/// sentence. Sentence text is the tokens joined by single spaces; mention
/// spans refer to that reconstructed text.
///
/// A third column may carry a QID (or one of `-`, `_`, `O`, `--NME--`,
/// `NIL` for none). The QID on the first token of a mention becomes its
/// rank-1 candidate with score 1.
pub fn parse_conll<R: BufRead>(reader: R, corpus_id: &str, language: &str) -> Result<ConllCorpus> {
    let mut corpus = ConllCorpus::default();
    let mut current = SentenceBuilder { tokens: Vec::new(), tags: Vec::new(), links: Vec::new() };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with("-DOCSTART-") {
            flush_sentence(&mut corpus, &mut current, corpus_id, language);
            continue;
        }
        let fields: Vec<&str> =
            if line.contains('\t') { line.split('\t').collect() } else { line.split_whitespace().collect() };
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 or 3 columns, found {}", fields.len()),
            });
        }
        let link = match fields.get(2).map(|f| f.trim()) {
            None => None,
            Some(v) if v.is_empty() || NO_LINK.contains(&v) => None,
            Some(v) => Some(
                Qid::new(v).map_err(|_| Error::Parse { line: line_no, message: format!("malformed link {v:?}") })?,
            ),
        };
        let (token, tag) = (fields[0].trim(), fields[1].trim());
        if token.is_empty() {
            return Err(Error::Parse { line: line_no, message: "empty token".into() });
        }
        if parse_tag(tag).is_none() {
            return Err(Error::Parse { line: line_no, message: format!("malformed tag {tag:?}") });
        }
        current.tokens.push(token.to_owned());
        current.tags.push(tag.to_owned());
        current.links.push(link);
    }
    flush_sentence(&mut corpus, &mut current, corpus_id, language);
    Ok(corpus)
}

fn flush_sentence(corpus: &mut ConllCorpus, sentence: &mut SentenceBuilder, corpus_id: &str, language: &str) {
    if sentence.tokens.is_empty() {
        return;
    }
    let unit_id = format!("s{}", corpus.units.len() + 1);
    let text = sentence.tokens.join(" ");

    // (type, start char, end char, link) of the open run
    type Run<'a> = (&'a str, usize, usize, Option<&'a Qid>);
    let mut open: Option<Run> = None;
    let mut offset = 0usize;
    let mut spans: Vec<Run> = Vec::new();
    for ((token, tag), link) in sentence.tokens.iter().zip(&sentence.tags).zip(&sentence.links) {
        let start = offset;
        let end = start + token.chars().count();
        offset = end + 1;
        match parse_tag(tag).expect("tags validated while reading") {
            Tag::Outside => spans.extend(open.take()),
            Tag::Begin(kind) => {
                spans.extend(open.take());
                open = Some((kind, start, end, link.as_ref()));
            }
            Tag::Inside(kind) => match open.as_mut() {
                Some((open_kind, _, open_end, _)) if *open_kind == kind => *open_end = end,
                _ => {
                    corpus.warnings += 1;
                    spans.extend(open.take());
                    open = Some((kind, start, end, link.as_ref()));
                }
            },
        }
    }
    spans.extend(open.take());

    for (kind, start, end, link) in spans {
        let surface = slice_chars(&text, (start, end)).expect("span inside text").to_owned();
        corpus.mentions.push(LinkedMention {
            unit_id: unit_id.clone(),
            surface,
            span: (start, end),
            ner_label: NerLabel::from_type(kind),
            candidates: link.map(|q| Candidate { qid: q.clone(), score: 1.0, rank: 1 }).into_iter().collect(),
        });
    }
    corpus.units.push(TextUnit { corpus_id: corpus_id.to_owned(), unit_id, language: language.to_owned(), text });
    corpus.tags.push(std::mem::take(&mut sentence.tags));
    sentence.tokens.clear();
    sentence.links.clear();
}

// ---------------------------------------------------------------------------
// JSON helpers

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start = text.split_inclusive('\n').take(line - 1).map(str::len).sum::<usize>();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Reads every top-level JSON value from `text`. A top-level array is
/// flattened into its elements, so JSON-lines files and single-array
/// documents are handled the same way.
pub(crate) fn json_records(text: &str) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    let mut stream = serde_json::Deserializer::from_str(text).into_iter::<Value>();
    for item in stream.by_ref() {
        match item {
            Ok(Value::Array(items)) => out.extend(items),
            Ok(value) => out.push(value),
            Err(e) => {
                return Err(Error::Json { offset: byte_offset(text, e.line(), e.column()), message: e.to_string() })
            }
        }
    }
    Ok(out)
}

pub(crate) fn read_text<R: Read>(mut reader: R) -> Result<String> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    Ok(text)
}

// ---------------------------------------------------------------------------
// QA JSON

#[derive(Debug, Clone)]
pub struct QaOptions<'a> {
    pub corpus_id: &'a str,
    pub language: &'a str,
    pub text_field: &'a str,
    pub id_field: &'a str,
    /// Drop records whose text repeats an earlier record's text.
    pub dedup: bool,
}

impl Default for QaOptions<'_> {
    fn default() -> Self {
        QaOptions { corpus_id: "corpus", language: "und", text_field: "question", id_field: "id", dedup: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QaCorpus {
    pub units: Vec<TextUnit>,
    /// Records without a usable id or text field.
    pub skipped: usize,
    /// Records dropped by deduplication.
    pub duplicates: usize,
}

fn id_string(value: &Value) -> Option<String> {
    match value {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Parses QA records from a JSON document or JSON lines.
pub fn parse_qa_json<R: Read>(reader: R, opts: &QaOptions<'_>) -> Result<QaCorpus> {
    let text = read_text(reader)?;
    let mut corpus = QaCorpus::default();
    let mut seen_ids = HashSet::new();
    let mut seen_texts = HashSet::new();
    for record in json_records(&text)? {
        let fields =
            (record.get(opts.id_field).and_then(id_string), record.get(opts.text_field).and_then(Value::as_str));
        let (Some(unit_id), Some(body)) = fields else {
            corpus.skipped += 1;
            continue;
        };
        if body.trim().is_empty() || !seen_ids.insert(unit_id.clone()) {
            corpus.skipped += 1;
            continue;
        }
        if opts.dedup && !seen_texts.insert(body.to_owned()) {
            corpus.duplicates += 1;
            continue;
        }
        corpus.units.push(TextUnit {
            corpus_id: opts.corpus_id.to_owned(),
            unit_id,
            language: opts.language.to_owned(),
            text: body.to_owned(),
        });
    }
    Ok(corpus)
}

// ---------------------------------------------------------------------------
// links-jsonl

#[derive(Debug, Serialize, Deserialize)]
struct CandidateRecord {
    qid: String,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MentionRecord {
    unit_id: String,
    surface: String,
    span: (usize, usize),
    #[serde(default)]
    ner_label: NerLabel,
    candidates: Vec<CandidateRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinksParse {
    pub mentions: Vec<LinkedMention>,
    /// Records rejected for schema violations, malformed QIDs, invalid spans
    /// or empty candidate lists.
    pub rejected: usize,
}

fn mention_from_record(record: MentionRecord) -> Option<LinkedMention> {
    if record.candidates.is_empty() || record.span.0 >= record.span.1 {
        return None;
    }
    let candidates = record
        .candidates
        .into_iter()
        .enumerate()
        .map(|(i, c)| Some(Candidate { qid: Qid::new(&c.qid).ok()?, score: c.score, rank: i as u32 + 1 }))
        .collect::<Option<Vec<_>>>()?;
    Some(LinkedMention {
        unit_id: record.unit_id,
        surface: record.surface,
        span: record.span,
        ner_label: record.ner_label,
        candidates,
    })
}

/// Parses linker output in links-jsonl format.
///
/// Candidates keep their file order and are ranked 1..n in that order.
pub fn parse_links_jsonl<R: Read>(reader: R) -> Result<LinksParse> {
    let text = read_text(reader)?;
    let mut out = LinksParse::default();
    for value in json_records(&text)? {
        match serde_json::from_value::<MentionRecord>(value).ok().and_then(mention_from_record) {
            Some(m) => out.mentions.push(m),
            None => out.rejected += 1,
        }
    }
    Ok(out)
}

/// Writes mentions in links-jsonl format, one object per line.
pub fn write_links_jsonl<W: Write>(mut writer: W, mentions: &[LinkedMention]) -> Result<()> {
    for m in mentions {
        let record = MentionRecord {
            unit_id: m.unit_id.clone(),
            surface: m.surface.clone(),
            span: m.span,
            ner_label: m.ner_label,
            candidates: m
                .candidates
                .iter()
                .map(|c| CandidateRecord { qid: c.qid.to_string(), score: c.score })
                .collect(),
        };
        serde_json::to_writer(&mut writer, &record).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes text units as JSON lines.
pub fn write_units_jsonl<W: Write>(mut writer: W, units: &[TextUnit]) -> Result<()> {
    for u in units {
        serde_json::to_writer(&mut writer, u).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct JoinStats {
    /// Span-only mentions that received candidates.
    pub linked: usize,
    /// Span-only mentions with no linker record at the same unit and span.
    pub unlinked: usize,
}

/// Attaches linker candidates to span-only mentions by `(unit_id, span)`.
///
/// Mentions the linker did not cover keep an empty candidate list.
pub fn attach_candidates(mentions: &mut [LinkedMention], links: &[LinkedMention]) -> JoinStats {
    let index: BTreeMap<(&str, (usize, usize)), &LinkedMention> =
        links.iter().map(|l| ((l.unit_id.as_str(), l.span), l)).collect();
    let mut stats = JoinStats::default();
    for m in mentions.iter_mut() {
        match index.get(&(m.unit_id.as_str(), m.span)) {
            Some(link) => {
                m.candidates = link.candidates.clone();
                stats.linked += 1;
            }
            None => stats.unlinked += 1,
        }
    }
    stats
}
