//! Term lists behind the bias, affect and moral features.
//!
//! File format: UTF-8, `[section]` headers, one lowercase term per line,
//! `#` starts a comment, and a trailing `*` turns a term into a prefix
//! pattern (`radical*` matches `radicalized`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LexiconName {
    Positive,
    Negative,
    Hedges,
    Factives,
    Assertives,
    Implicatives,
    ReportVerbs,
    BiasTerms,
    SubjectivityTerms,
    CareVirtue,
    CareVice,
    FairnessVirtue,
    FairnessVice,
    LoyaltyVirtue,
    LoyaltyVice,
    AuthorityVirtue,
    AuthorityVice,
    SanctityVirtue,
    SanctityVice,
}

impl LexiconName {
    pub const ALL: [LexiconName; 19] = [
        LexiconName::Positive,
        LexiconName::Negative,
        LexiconName::Hedges,
        LexiconName::Factives,
        LexiconName::Assertives,
        LexiconName::Implicatives,
        LexiconName::ReportVerbs,
        LexiconName::BiasTerms,
        LexiconName::SubjectivityTerms,
        LexiconName::CareVirtue,
        LexiconName::CareVice,
        LexiconName::FairnessVirtue,
        LexiconName::FairnessVice,
        LexiconName::LoyaltyVirtue,
        LexiconName::LoyaltyVice,
        LexiconName::AuthorityVirtue,
        LexiconName::AuthorityVice,
        LexiconName::SanctityVirtue,
        LexiconName::SanctityVice,
    ];

    pub const MORAL: [LexiconName; 10] = [
        LexiconName::CareVirtue,
        LexiconName::CareVice,
        LexiconName::FairnessVirtue,
        LexiconName::FairnessVice,
        LexiconName::LoyaltyVirtue,
        LexiconName::LoyaltyVice,
        LexiconName::AuthorityVirtue,
        LexiconName::AuthorityVice,
        LexiconName::SanctityVirtue,
        LexiconName::SanctityVice,
    ];

    pub fn section(self) -> &'static str {
        match self {
            LexiconName::Positive => "positive",
            LexiconName::Negative => "negative",
            LexiconName::Hedges => "hedges",
            LexiconName::Factives => "factives",
            LexiconName::Assertives => "assertives",
            LexiconName::Implicatives => "implicatives",
            LexiconName::ReportVerbs => "report_verbs",
            LexiconName::BiasTerms => "bias_terms",
            LexiconName::SubjectivityTerms => "subjectivity_terms",
            LexiconName::CareVirtue => "care_virtue",
            LexiconName::CareVice => "care_vice",
            LexiconName::FairnessVirtue => "fairness_virtue",
            LexiconName::FairnessVice => "fairness_vice",
            LexiconName::LoyaltyVirtue => "loyalty_virtue",
            LexiconName::LoyaltyVice => "loyalty_vice",
            LexiconName::AuthorityVirtue => "authority_virtue",
            LexiconName::AuthorityVice => "authority_vice",
            LexiconName::SanctityVirtue => "sanctity_virtue",
            LexiconName::SanctityVice => "sanctity_vice",
        }
    }
}

impl fmt::Display for LexiconName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.section())
    }
}

impl FromStr for LexiconName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        LexiconName::ALL
            .into_iter()
            .find(|n| n.section() == s)
            .ok_or_else(|| format!("unknown lexicon section `[{s}]`"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermList {
    exact: BTreeSet<String>,
    prefixes: BTreeSet<String>,
}

impl TermList {
    /// `term` must already be validated (lowercase, no spaces, `*` terminal).
    fn insert(&mut self, term: &str) {
        match term.strip_suffix('*') {
            Some(prefix) => self.prefixes.insert(prefix.to_string()),
            None => self.exact.insert(term.to_string()),
        };
    }

    /// `token` is matched after lowercasing; typographic apostrophes are
    /// folded to `'`.
    pub fn matches(&self, token: &str) -> bool {
        let lower = normalize(token);
        self.exact.contains(&lower) || self.prefixes.iter().any(|p| lower.starts_with(p.as_str()))
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn normalize(token: &str) -> String {
    token.to_lowercase().replace('\u{2019}', "'")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconSet {
    lists: BTreeMap<LexiconName, TermList>,
}

const STARTER: &str = include_str!("starter.lex");

impl LexiconSet {
    /// Small general-purpose lexicons shipped with the crate.
    pub fn starter() -> Self {
        Self::parse(STARTER).expect("bundled starter lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lists: BTreeMap<LexiconName, TermList> = BTreeMap::new();
        let mut current: Option<LexiconName> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Lexicon {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name: LexiconName = section.trim().parse().map_err(err)?;
                lists.entry(name).or_default();
                current = Some(name);
                continue;
            }
            let Some(name) = current else {
                return Err(err(format!("term `{line}` appears before any section header")));
            };
            validate_term(line).map_err(err)?;
            lists.entry(name).or_default().insert(line);
        }
        Ok(LexiconSet { lists })
    }

    pub fn from_lists<'a>(lists: impl IntoIterator<Item = (LexiconName, &'a [&'a str])>) -> Result<Self> {
        let mut set = LexiconSet::default();
        for (name, terms) in lists {
            let list = set.lists.entry(name).or_default();
            for term in terms {
                validate_term(term).map_err(|message| Error::Lexicon { line: 0, message })?;
                list.insert(term);
            }
        }
        Ok(set)
    }

    pub fn list(&self, name: LexiconName) -> Option<&TermList> {
        self.lists.get(&name)
    }

    pub fn matches(&self, name: LexiconName, token: &str) -> bool {
        self.lists.get(&name).is_some_and(|l| l.matches(token))
    }
}

fn validate_term(term: &str) -> std::result::Result<(), String> {
    if term.chars().any(char::is_whitespace) {
        return Err(format!("term `{term}` contains whitespace"));
    }
    if term.chars().any(char::is_uppercase) {
        return Err(format!("term `{term}` is not lowercase"));
    }
    let stem = term.strip_suffix('*').unwrap_or(term);
    if stem.is_empty() {
        return Err("empty term".into());
    }
    if stem.contains('*') {
        return Err(format!("term `{term}`: wildcard allowed only in terminal position"));
    }
    Ok(())
}
