//! The versioned feature catalog.
//!
//! `nela-open-v1` spans the five NELA categories with 92 features. Feature
//! order is part of the version: changing, adding or reordering an entry
//! requires a new version string.

use serde::{Deserialize, Serialize};

use super::lexicon::LexiconName;
use super::pos::PosTag;

pub const NELA_OPEN_V1: &str = "nela-open-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Category {
    Style,
    Complexity,
    Bias,
    Affect,
    Moral,
}

/// Value domain of a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Fraction of tokens or word tokens; in `[0, 1]` and unchanged when a
    /// document is repeated.
    Rate,
    /// Occurrences per 1000 tokens; in `[0, 1000]`, unchanged under repetition.
    PerThousand,
    /// Distinct/total ratio in `[0, 1]`; never increases under repetition.
    Diversity,
    /// Non-negative magnitude (means, counts, indices).
    NonNegative,
    /// Signed score.
    Score,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub category: Category,
    pub kind: FeatureKind,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCatalog {
    pub version: String,
    pub entries: Vec<CatalogEntry>,
}

pub const PUNCTUATION_MARKS: [(&str, &str); 8] = [
    ("exclamation", "!"),
    ("question", "?"),
    ("double_quote", "\""),
    ("single_quote", "'"),
    ("comma", ","),
    ("period", "."),
    ("colon", ":"),
    ("semicolon", ";"),
];

pub const FUNCTION_WORDS: [&str; 25] = [
    "the", "of", "and", "to", "a", "in", "that", "is", "for", "it", "on", "was", "with", "he", "as",
    "at", "by", "but", "not", "this", "from", "have", "be", "are", "they",
];

pub const BIAS_LISTS: [LexiconName; 7] = [
    LexiconName::Hedges,
    LexiconName::Factives,
    LexiconName::Assertives,
    LexiconName::Implicatives,
    LexiconName::ReportVerbs,
    LexiconName::BiasTerms,
    LexiconName::SubjectivityTerms,
];

impl FeatureCatalog {
    pub fn nela_open_v1() -> Self {
        use Category::*;
        use FeatureKind::*;

        let mut entries = Vec::new();
        let mut push = |name: String, category, kind, description: String| {
            entries.push(CatalogEntry {
                name,
                category,
                kind,
                description,
            })
        };

        for tag in PosTag::ALL {
            push(format!("pos_{}", tag.name()), Style, Rate, format!("{} tags per token", tag.name().to_uppercase()));
        }
        for (name, mark) in PUNCTUATION_MARKS {
            push(format!("punct_{name}"), Style, Rate, format!("`{mark}` tokens per token"));
        }
        for (name, what) in [
            ("exclamation_per_1k", "`!` tokens"),
            ("question_per_1k", "`?` tokens"),
            ("quote_per_1k", "quotation-mark tokens"),
            ("allcaps_per_1k", "all-caps words"),
        ] {
            push(name.into(), Style, PerThousand, format!("{what} per 1000 tokens"));
        }
        for (name, what) in [
            ("allcaps_word_rate", "words with two or more letters, all uppercase"),
            ("capitalized_word_rate", "words starting with an uppercase letter"),
            ("quote_rate", "quotation-mark tokens (straight and typographic) per token"),
            ("stopword_rate", "stopwords per word"),
            ("contraction_rate", "words containing an apostrophe"),
            ("first_person_singular_rate", "first person singular pronouns per word"),
            ("first_person_plural_rate", "first person plural pronouns per word"),
            ("second_person_rate", "second person pronouns per word"),
            ("third_person_rate", "third person pronouns per word"),
        ] {
            push(name.into(), Style, Rate, what.into());
        }
        for w in FUNCTION_WORDS {
            push(format!("fw_{w}"), Style, Rate, format!("`{w}` per word"));
        }

        for (name, kind, what) in [
            ("type_token_ratio", Diversity, "distinct lowercased tokens / tokens"),
            ("lexical_diversity", Diversity, "distinct lowercased words / words"),
            ("mean_word_length", NonNegative, "characters per word"),
            ("mean_sentence_length", NonNegative, "tokens per sentence"),
            ("mean_syllables_per_word", NonNegative, "syllables per word"),
            ("flesch_kincaid_grade", Score, "0.39 w/s + 11.8 syl/w - 15.59"),
            ("gunning_fog", NonNegative, "0.4 (w/s + 100 complex/w)"),
            ("flesch_reading_ease", Score, "206.835 - 1.015 w/s - 84.6 syl/w"),
            ("complex_word_rate", Rate, "words with three or more syllables per word"),
            ("long_word_rate", Rate, "words longer than six characters per word"),
            ("word_count", NonNegative, "number of words"),
            ("sentence_count", NonNegative, "number of sentences"),
        ] {
            push(name.into(), Complexity, kind, what.into());
        }

        for list in BIAS_LISTS {
            push(format!("{list}_rate"), Bias, Rate, format!("[{list}] matches per word"));
        }

        for (name, kind, what) in [
            ("positive_rate", Rate, "[positive] matches per word"),
            ("negative_rate", Rate, "[negative] matches per word"),
            ("affect_rate", Rate, "words matching [positive] or [negative]"),
            ("polarity", Score, "(pos - neg) / (pos + neg + 1e-9) over rates"),
            ("intensity", NonNegative, "affect_rate * (1 + `!` per token)"),
        ] {
            push(name.into(), Affect, kind, what.into());
        }

        for list in LexiconName::MORAL {
            push(format!("{list}_rate"), Moral, Rate, format!("[{list}] matches per word"));
        }

        FeatureCatalog {
            version: NELA_OPEN_V1.to_string(),
            entries,
        }
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn category_len(&self, category: Category) -> usize {
        self.entries.iter().filter(|e| e.category == category).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn names_unique_and_categories_contiguous() {
        let cat = FeatureCatalog::nela_open_v1();
        assert_eq!(cat.dimension(), 92);
        let names: BTreeSet<_> = cat.names().collect();
        assert_eq!(names.len(), cat.dimension());

        let order = [Category::Style, Category::Complexity, Category::Bias, Category::Affect, Category::Moral];
        let mut seen = Vec::new();
        for e in &cat.entries {
            if seen.last() != Some(&e.category) {
                seen.push(e.category);
            }
        }
        assert_eq!(seen, order);
        assert_eq!(cat.category_len(Category::Moral), 10);
        assert_eq!(cat.category_len(Category::Bias), 7);
    }
}
