//! Article corpora labelled at the source level.
//!
//! Articles inherit their class from the roster entry of their source: a
//! factuality of 4 or 5 marks a reliable source, 1 or 2 an unreliable one.
//! Factuality 3 sources are refused at load time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rng;
use crate::textfeat::tokenize;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "US")]
    Us,
    #[serde(rename = "UK")]
    Uk,
    #[serde(rename = "NONE")]
    None,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Us => "US",
            Group::Uk => "UK",
            Group::None => "NONE",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "US" => Ok(Group::Us),
            "UK" => Ok(Group::Uk),
            "NONE" => Ok(Group::None),
            other => Err(Error::Roster(format!("unknown group `{other}` (expected US, UK or NONE)"))),
        }
    }
}

/// Source-level veracity class.
///
/// Variants are ordered by their lowercase name, which is the order used by
/// every tie-break downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Reliable,
    Unreliable,
}

impl Class {
    pub fn as_str(self) -> &'static str {
        match self {
            Class::Reliable => "reliable",
            Class::Unreliable => "unreliable",
        }
    }

    pub fn from_factuality(factuality: u8) -> Option<Class> {
        match factuality {
            4 | 5 => Some(Class::Reliable),
            1 | 2 => Some(Class::Unreliable),
            _ => None,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub source_name: String,
    pub title: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published: Option<String>,
}

impl Article {
    /// Title and body joined by a single newline; the text every feature
    /// extractor sees.
    pub fn text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }
}

/// Roster row. Construct through [`SourceEntry::new`], which derives the
/// class from the factuality score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEntry {
    source_name: String,
    factuality: u8,
    group: Group,
    class: Class,
}

impl SourceEntry {
    pub fn new(source_name: impl Into<String>, factuality: u8, group: Group) -> Result<Self> {
        let source_name = source_name.into();
        let class = match Class::from_factuality(factuality) {
            Some(c) => c,
            None if factuality == 3 => {
                return Err(Error::Roster(format!(
                    "source `{source_name}` has factuality 3, which is neither reliable (4-5) nor unreliable (1-2)"
                )))
            }
            None => {
                return Err(Error::Roster(format!(
                    "source `{source_name}` has factuality {factuality}, outside 1..=5"
                )))
            }
        };
        if class == Class::Reliable && group == Group::None {
            return Err(Error::Roster(format!(
                "reliable source `{source_name}` must be assigned to US or UK"
            )));
        }
        Ok(SourceEntry {
            source_name,
            factuality,
            group,
            class,
        })
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn factuality(&self) -> u8 {
        self.factuality
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn class(&self) -> Class {
        self.class
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub articles: Vec<Article>,
    pub roster: BTreeMap<String, SourceEntry>,
}

impl Corpus {
    pub fn new(articles: Vec<Article>, roster: impl IntoIterator<Item = SourceEntry>) -> Self {
        let roster = roster
            .into_iter()
            .map(|e| (e.source_name.clone(), e))
            .collect();
        Corpus { articles, roster }
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn source(&self, name: &str) -> Option<&SourceEntry> {
        self.roster.get(name)
    }

    pub fn source_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for a in &self.articles {
            *counts.entry(a.source_name.clone()).or_insert(0) += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::Parse(format!("unknown corpus format `{other}`"))),
        }
    }
}

/// On-disk article record. `content` maps to [`Article::body`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub id: String,
    pub source: String,
    #[serde(default)]
    pub title: String,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

impl From<ArticleRecord> for Article {
    fn from(r: ArticleRecord) -> Self {
        Article {
            id: r.id,
            source_name: r.source,
            title: r.title,
            body: r.content,
            published: r.date.filter(|d| !d.trim().is_empty()),
        }
    }
}

impl From<&Article> for ArticleRecord {
    fn from(a: &Article) -> Self {
        ArticleRecord {
            id: a.id.clone(),
            source: a.source_name.clone(),
            title: a.title.clone(),
            content: a.body.clone(),
            date: a.published.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRecord {
    /// 1-based line (JSONL) or record (CSV) number.
    pub record: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    pub skipped: Vec<SkippedRecord>,
}

pub fn load_roster(path: &Path) -> Result<Vec<SourceEntry>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Roster(format!("missing column `{name}` in {}", path.display())))
    };
    let (c_source, c_fact, c_group) = (col("source")?, col("factuality")?, col("group")?);

    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let get = |c: usize| rec.get(c).unwrap_or("").to_string();
        let name = get(c_source);
        if name.is_empty() {
            return Err(Error::Roster(format!("row {}: empty source name", i + 1)));
        }
        let factuality: u8 = get(c_fact).parse().map_err(|_| {
            Error::Roster(format!("source `{name}`: factuality `{}` is not an integer", get(c_fact)))
        })?;
        let group: Group = get(c_group).parse()?;
        if !seen.insert(name.clone()) {
            return Err(Error::Roster(format!("source `{name}` listed twice")));
        }
        entries.push(SourceEntry::new(name, factuality, group)?);
    }
    Ok(entries)
}

/// Loads articles plus their roster.
///
/// Malformed records and records naming a source absent from the roster are
/// skipped and reported; roster problems are fatal.
pub fn load_corpus(path: &Path, format: CorpusFormat, roster_path: &Path) -> Result<LoadOutcome> {
    let roster = load_roster(roster_path)?;
    let known: BTreeSet<String> = roster.iter().map(|e| e.source_name.clone()).collect();

    let mut articles = Vec::new();
    let mut skipped = Vec::new();
    let mut accept = |record: usize, parsed: std::result::Result<ArticleRecord, String>| match parsed {
        Ok(r) if !known.contains(&r.source) => skipped.push(SkippedRecord {
            record,
            reason: format!("unknown source `{}`", r.source),
        }),
        Ok(r) => articles.push(Article::from(r)),
        Err(reason) => skipped.push(SkippedRecord { record, reason }),
    };

    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Jsonl => {
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                accept(i + 1, serde_json::from_str::<ArticleRecord>(&line).map_err(|e| e.to_string()));
            }
        }
        CorpusFormat::Csv => {
            let mut reader = csv::Reader::from_reader(file);
            for (i, rec) in reader.deserialize::<ArticleRecord>().enumerate() {
                accept(i + 1, rec.map_err(|e| e.to_string()));
            }
        }
    }

    Ok(LoadOutcome {
        corpus: Corpus::new(articles, roster),
        skipped,
    })
}

pub fn write_jsonl(corpus: &Corpus, out: &mut impl std::io::Write) -> std::io::Result<()> {
    for a in &corpus.articles {
        let line = serde_json::to_string(&ArticleRecord::from(a)).map_err(std::io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_roster(corpus: &Corpus, out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "source,factuality,group")?;
    for e in corpus.roster.values() {
        writeln!(out, "{},{},{}", e.source_name, e.factuality, e.group)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub duplicate_ids: Vec<String>,
    pub empty_bodies: Vec<String>,
    pub orphan_sources: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.duplicate_ids.is_empty() && self.empty_bodies.is_empty() && self.orphan_sources.is_empty()
    }
}

pub fn validate_corpus(c: &Corpus) -> ValidationReport {
    let mut seen = BTreeSet::new();
    let mut duplicates = BTreeSet::new();
    let mut empty = Vec::new();
    let mut orphans = BTreeSet::new();
    for a in &c.articles {
        if !seen.insert(a.id.as_str()) {
            duplicates.insert(a.id.clone());
        }
        if a.body.trim().is_empty() {
            empty.push(a.id.clone());
        }
        if !c.roster.contains_key(&a.source_name) {
            orphans.insert(a.source_name.clone());
        }
    }
    ValidationReport {
        duplicate_ids: duplicates.into_iter().collect(),
        empty_bodies: empty,
        orphan_sources: orphans.into_iter().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub per_source_n: usize,
    pub seed: u64,
    /// Take every article of a source that has fewer than `per_source_n`
    /// instead of failing.
    pub allow_short: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            per_source_n: 1000,
            seed: 0,
            allow_short: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sampled {
    pub corpus: Corpus,
    pub warnings: Vec<String>,
}

/// Draws `min(count, per_source_n)` articles uniformly without replacement
/// from every roster source.
///
/// Each source's articles are sorted by id and shuffled with a stream seeded
/// from `(seed, source name)`, so the selection does not depend on the input
/// order of articles or on the other sources.
pub fn balanced_sample(c: &Corpus, cfg: &SamplingConfig) -> Result<Sampled> {
    if cfg.per_source_n == 0 {
        return Err(Error::Sampling("per_source_n must be at least 1".into()));
    }
    let mut by_source: BTreeMap<&str, Vec<&Article>> =
        c.roster.keys().map(|k| (k.as_str(), Vec::new())).collect();
    for a in &c.articles {
        by_source.entry(a.source_name.as_str()).or_default().push(a);
    }

    let mut warnings = Vec::new();
    let mut out = Vec::new();
    for (source, mut articles) in by_source {
        let count = articles.len();
        if count < cfg.per_source_n {
            if !cfg.allow_short {
                return Err(Error::Sampling(format!(
                    "source `{source}` has {count} articles, fewer than the requested {}",
                    cfg.per_source_n
                )));
            }
            warnings.push(format!(
                "source `{source}` has only {count} of {} requested articles; taking all",
                cfg.per_source_n
            ));
        }
        articles.sort_by(|a, b| a.id.cmp(&b.id));
        let mut stream = rng::seeded(rng::derive_seed_str(cfg.seed, source));
        let mut picked = rng::partial_shuffle_indices(&mut stream, count, cfg.per_source_n);
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|i| articles[i].clone()));
    }

    Ok(Sampled {
        corpus: Corpus {
            articles: out,
            roster: c.roster.clone(),
        },
        warnings,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub total: usize,
    pub per_source: BTreeMap<String, usize>,
    pub per_class: BTreeMap<String, usize>,
    pub min_body_tokens: usize,
    pub max_body_tokens: usize,
    pub mean_body_tokens: f64,
}

pub fn corpus_stats(c: &Corpus) -> CorpusStats {
    let per_source = c.source_counts();
    let mut per_class = BTreeMap::new();
    for (source, n) in &per_source {
        let key = c
            .roster
            .get(source)
            .map(|e| e.class.as_str())
            .unwrap_or("unknown");
        *per_class.entry(key.to_string()).or_insert(0) += n;
    }
    let lens: Vec<usize> = c.articles.iter().map(|a| tokenize(&a.body).len()).collect();
    let (min, max, mean) = if lens.is_empty() {
        (0, 0, 0.0)
    } else {
        (
            *lens.iter().min().unwrap(),
            *lens.iter().max().unwrap(),
            lens.iter().sum::<usize>() as f64 / lens.len() as f64,
        )
    };
    CorpusStats {
        total: c.articles.len(),
        per_source,
        per_class,
        min_body_tokens: min,
        max_body_tokens: max,
        mean_body_tokens: mean,
    }
}
