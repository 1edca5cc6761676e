//! Rule-based coarse part-of-speech tagging.
//!
//! Tags come from the universal coarse tag set. Rules apply in order:
//! punctuation class, numbers, closed-class lexicon, suffix rules, and
//! finally the NOUN default.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Conj,
    Prt,
    Punct,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 12] = [
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adj,
        PosTag::Adv,
        PosTag::Pron,
        PosTag::Det,
        PosTag::Adp,
        PosTag::Num,
        PosTag::Conj,
        PosTag::Prt,
        PosTag::Punct,
        PosTag::X,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PosTag::Noun => "noun",
            PosTag::Verb => "verb",
            PosTag::Adj => "adj",
            PosTag::Adv => "adv",
            PosTag::Pron => "pron",
            PosTag::Det => "det",
            PosTag::Adp => "adp",
            PosTag::Num => "num",
            PosTag::Conj => "conj",
            PosTag::Prt => "prt",
            PosTag::Punct => "punct",
            PosTag::X => "x",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

const DET: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "any", "no",
    "another", "such", "either", "neither", "all", "both",
];

const PRON: &[&str] = &[
    "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
    "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "who",
    "whom", "whose", "which", "what", "someone", "anyone", "everyone", "nobody", "something",
    "anything", "everything", "nothing",
];

const ADP: &[&str] = &[
    "of", "in", "on", "at", "by", "for", "with", "about", "against", "between", "into", "through",
    "during", "before", "after", "above", "below", "from", "down", "over", "under", "around",
    "among", "across", "toward", "towards", "upon", "within", "without", "since", "until", "like",
    "near", "via", "per", "despite",
];

const CONJ: &[&str] = &[
    "and", "or", "but", "nor", "so", "yet", "because", "although", "though", "while", "if",
    "unless", "whereas", "whether",
];

const PRT: &[&str] = &["to", "not", "up", "off", "out"];

const VERB: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "have", "has", "had", "do", "does",
    "did", "will", "would", "shall", "should", "can", "could", "may", "might", "must", "said",
    "says", "say", "don't", "doesn't", "didn't", "can't", "won't", "isn't", "aren't", "wasn't",
    "weren't",
];

const ADV: &[&str] = &[
    "very", "also", "just", "too", "then", "now", "here", "there", "never", "always", "often",
    "still", "already", "soon", "again", "even", "only", "quite", "rather", "almost", "perhaps",
    "however",
];

/// Non-ASCII characters tagged PUNCT; any other symbol-only token is X.
const UNICODE_PUNCT: &[char] = &[
    '\u{2018}', '\u{2019}', '\u{201c}', '\u{201d}', '\u{2013}', '\u{2014}', '\u{2026}', '\u{00ab}',
    '\u{00bb}',
];

const SUFFIXES: &[(&str, PosTag)] = &[
    ("ing", PosTag::Verb),
    ("ed", PosTag::Verb),
    ("ly", PosTag::Adv),
    ("ous", PosTag::Adj),
    ("ful", PosTag::Adj),
];

pub fn tag_token(token: &str) -> PosTag {
    if !token.chars().any(char::is_alphanumeric) {
        let punct = token
            .chars()
            .all(|c| c.is_ascii_punctuation() || UNICODE_PUNCT.contains(&c));
        return if punct { PosTag::Punct } else { PosTag::X };
    }
    if !token.chars().any(char::is_alphabetic) {
        return PosTag::Num;
    }
    let lower = token.to_lowercase().replace('\u{2019}', "'");
    let lexicons: [(&[&str], PosTag); 7] = [
        (DET, PosTag::Det),
        (PRON, PosTag::Pron),
        (ADP, PosTag::Adp),
        (CONJ, PosTag::Conj),
        (PRT, PosTag::Prt),
        (VERB, PosTag::Verb),
        (ADV, PosTag::Adv),
    ];
    for (words, tag) in lexicons {
        if words.contains(&lower.as_str()) {
            return tag;
        }
    }
    let len = lower.chars().count();
    for (suffix, tag) in SUFFIXES {
        if lower.ends_with(suffix) && len >= suffix.len() + 3 {
            return *tag;
        }
    }
    PosTag::Noun
}

pub fn pos_tag<S: AsRef<str>>(tokens: &[S]) -> Vec<PosTag> {
    tokens.iter().map(|t| tag_token(t.as_ref())).collect()
}
