use std::collections::HashSet;

use super::catalog::{BIAS_LISTS, FUNCTION_WORDS, PUNCTUATION_MARKS};
use super::lexicon::{normalize, LexiconName, LexiconSet};
use super::pos::PosTag;
use super::tokenize::TokenizedDoc;

pub const STOPWORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself", "it",
    "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which", "who",
    "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be", "been",
    "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and",
    "but", "if", "or", "because", "as", "until", "while", "of", "at", "by", "for", "with", "about",
    "against", "between", "into", "through", "during", "before", "after", "above", "below", "to",
    "from", "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then",
    "once", "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few",
    "more", "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so",
    "than", "too", "very", "s", "t", "can", "will", "just", "don", "should", "now",
];

const FIRST_SINGULAR: &[&str] = &["i", "me", "my", "mine", "myself"];
const FIRST_PLURAL: &[&str] = &["we", "us", "our", "ours", "ourselves"];
const SECOND: &[&str] = &["you", "your", "yours", "yourself", "yourselves"];
const THIRD: &[&str] = &[
    "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself", "they",
    "them", "their", "theirs", "themselves",
];

const QUOTE_MARKS: &[&str] = &["\"", "'", "\u{201c}", "\u{201d}", "\u{2018}", "\u{2019}", "\u{00ab}", "\u{00bb}"];

const POLARITY_EPSILON: f64 = 1e-9;

/// Syllables in a word by vowel groups.
///
/// The word is lowercased and reduced to its alphabetic characters; each
/// maximal run of `a e i o u y` counts once. A final `e` after a consonant
/// is silent unless the word ends in consonant + `le`, or it is the only
/// vowel group. Every word with at least one letter has one syllable or
/// more; anything else has zero.
pub fn count_syllables(word: &str) -> usize {
    let letters: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return 0;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = letters.len();
    if groups > 1 && n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) {
        let consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn is_allcaps(word: &str) -> bool {
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

/// Raw counts behind the style slice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StyleCounts {
    pub tokens: usize,
    pub words: usize,
    pub exclamations: usize,
    pub questions: usize,
    pub quotes: usize,
    pub allcaps_words: usize,
}

impl StyleCounts {
    pub fn of(doc: &TokenizedDoc) -> Self {
        let count = |pred: &dyn Fn(&str) -> bool| doc.tokens.iter().filter(|t| pred(t)).count();
        StyleCounts {
            tokens: doc.tokens.len(),
            words: doc.words().count(),
            exclamations: count(&|t| t == "!"),
            questions: count(&|t| t == "?"),
            quotes: count(&|t| QUOTE_MARKS.contains(&t)),
            allcaps_words: doc.words().filter(|w| is_allcaps(w)).count(),
        }
    }
}

pub fn extract_style(doc: &TokenizedDoc) -> Vec<f64> {
    let c = StyleCounts::of(doc);
    let (t, w) = (c.tokens, c.words);
    let lower: Vec<String> = doc.words().map(normalize).collect();
    let count_words = |list: &[&str]| lower.iter().filter(|x| list.contains(&x.as_str())).count();

    let mut out = Vec::with_capacity(58);
    let mut tag_counts = [0usize; 12];
    for tag in &doc.tags {
        tag_counts[tag.index()] += 1;
    }
    out.extend(PosTag::ALL.iter().map(|tag| ratio(tag_counts[tag.index()], t)));
    for (_, mark) in PUNCTUATION_MARKS {
        out.push(ratio(doc.tokens.iter().filter(|x| *x == mark).count(), t));
    }
    for n in [c.exclamations, c.questions, c.quotes, c.allcaps_words] {
        out.push(if t == 0 { 0.0 } else { 1000.0 * n as f64 / t as f64 });
    }
    out.push(ratio(c.allcaps_words, w));
    out.push(ratio(
        doc.words().filter(|x| x.chars().next().is_some_and(char::is_uppercase)).count(),
        w,
    ));
    out.push(ratio(c.quotes, t));
    out.push(ratio(count_words(STOPWORDS), w));
    out.push(ratio(lower.iter().filter(|x| x.contains('\'')).count(), w));
    for list in [FIRST_SINGULAR, FIRST_PLURAL, SECOND, THIRD] {
        out.push(ratio(count_words(list), w));
    }
    for fw in FUNCTION_WORDS {
        out.push(ratio(lower.iter().filter(|x| *x == fw).count(), w));
    }
    out
}

pub fn extract_complexity(doc: &TokenizedDoc) -> Vec<f64> {
    let words: Vec<&str> = doc.words().collect();
    let (n_words, n_sentences, n_tokens) = (words.len(), doc.sentences.len(), doc.tokens.len());
    if n_words == 0 || n_sentences == 0 {
        return vec![0.0; 12];
    }
    let token_types: HashSet<String> = doc.tokens.iter().map(|t| normalize(t)).collect();
    let word_types: HashSet<String> = words.iter().map(|t| normalize(t)).collect();
    let syllables: Vec<usize> = words.iter().map(|w| count_syllables(w)).collect();
    let total_syllables: usize = syllables.iter().sum();
    let complex = syllables.iter().filter(|&&s| s >= 3).count();
    let chars: usize = words.iter().map(|w| w.chars().count()).sum();
    let long = words.iter().filter(|w| w.chars().count() > 6).count();

    let w = n_words as f64;
    let words_per_sentence = w / n_sentences as f64;
    let syllables_per_word = total_syllables as f64 / w;
    vec![
        ratio(token_types.len(), n_tokens),
        ratio(word_types.len(), n_words),
        chars as f64 / w,
        n_tokens as f64 / n_sentences as f64,
        syllables_per_word,
        0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59,
        0.4 * (words_per_sentence + 100.0 * complex as f64 / w),
        206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word,
        ratio(complex, n_words),
        ratio(long, n_words),
        w,
        n_sentences as f64,
    ]
}

fn list_rates(doc: &TokenizedDoc, lex: &LexiconSet, lists: &[LexiconName]) -> Vec<f64> {
    let words: Vec<&str> = doc.words().collect();
    lists
        .iter()
        .map(|&name| ratio(words.iter().filter(|w| lex.matches(name, w)).count(), words.len()))
        .collect()
}

pub fn extract_bias(doc: &TokenizedDoc, lex: &LexiconSet) -> Vec<f64> {
    list_rates(doc, lex, &BIAS_LISTS)
}

pub fn extract_affect(doc: &TokenizedDoc, lex: &LexiconSet) -> Vec<f64> {
    let words: Vec<&str> = doc.words().collect();
    let n = words.len();
    let pos = words.iter().filter(|w| lex.matches(LexiconName::Positive, w)).count();
    let neg = words.iter().filter(|w| lex.matches(LexiconName::Negative, w)).count();
    let either = words
        .iter()
        .filter(|w| lex.matches(LexiconName::Positive, w) || lex.matches(LexiconName::Negative, w))
        .count();
    let (pos_rate, neg_rate, affect_rate) = (ratio(pos, n), ratio(neg, n), ratio(either, n));
    let polarity = (pos_rate - neg_rate) / (pos_rate + neg_rate + POLARITY_EPSILON);
    let exclamation_rate = ratio(doc.tokens.iter().filter(|t| *t == "!").count(), doc.tokens.len());
    vec![pos_rate, neg_rate, affect_rate, polarity, affect_rate * (1.0 + exclamation_rate)]
}

pub fn extract_moral(doc: &TokenizedDoc, lex: &LexiconSet) -> Vec<f64> {
    list_rates(doc, lex, &LexiconName::MORAL)
}
