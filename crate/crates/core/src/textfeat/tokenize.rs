use std::ops::Range;

use super::pos::{pos_tag, PosTag};

/// Abbreviations that never end a sentence. Matched case-sensitively
/// against the whitespace-delimited chunk that ends in the period, after
/// stripping leading opening brackets and quotes.
pub const ABBREVIATIONS_VERSION: &str = "abbrev-v1";
pub const ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "Sr.", "Jr.", "St.", "Mt.", "Gen.", "Gov.", "Sen.",
    "Rep.", "Rev.", "Capt.", "Col.", "Lt.", "Sgt.", "Inc.", "Corp.", "Ltd.", "Co.", "vs.", "etc.",
    "e.g.", "i.e.", "U.S.", "U.K.", "U.N.", "E.U.", "a.m.", "p.m.", "No.", "Jan.", "Feb.", "Mar.",
    "Apr.", "Aug.", "Sept.", "Sep.", "Oct.", "Nov.", "Dec.",
];

fn is_joiner(prev: char, c: char, next: char) -> bool {
    match c {
        '\'' | '\u{2019}' | '-' => prev.is_alphanumeric() && next.is_alphanumeric(),
        '.' | ',' => prev.is_ascii_digit() && next.is_ascii_digit(),
        _ => false,
    }
}

/// Splits text into word and punctuation tokens.
///
/// Whitespace separates chunks; inside a chunk, runs of alphanumeric
/// characters form words and every other character is a token of its own.
/// Apostrophes and hyphens between alphanumerics stay inside the word
/// (`don't`, `well-known`), as do `.` and `,` between digits (`3.5`,
/// `1,000`).
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split(char::is_whitespace) {
        let chars: Vec<char> = chunk.chars().collect();
        let mut word = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if c.is_alphanumeric() {
                word.push(c);
                continue;
            }
            let joined = !word.is_empty()
                && i + 1 < chars.len()
                && is_joiner(chars[i - 1], c, chars[i + 1]);
            if joined {
                word.push(c);
            } else {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}

/// True for tokens containing at least one alphabetic character.
pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphabetic)
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '"' | '\'' | '\u{201d}' | '\u{2019}' | ')' | ']')
}

fn is_opener(c: char) -> bool {
    matches!(c, '(' | '[' | '"' | '\'' | '\u{201c}' | '\u{2018}')
}

/// Splits text into sentences.
///
/// A sentence ends after a run of `.`/`!`/`?` (plus trailing closing quotes
/// or brackets) when the run is followed by whitespace and then an
/// uppercase letter, or by the end of the text. A period closing one of
/// [`ABBREVIATIONS`] never ends a sentence. Empty or whitespace-only text
/// yields no sentences.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if !is_terminator(chars[i]) {
            i += 1;
            continue;
        }
        let mut end = i + 1;
        while end < chars.len() && is_closer(chars[end]) {
            end += 1;
        }
        let next_visible = chars[end..].iter().position(|c| !c.is_whitespace()).map(|p| end + p);
        let boundary = match next_visible {
            None => true,
            Some(p) => {
                let q = chars[p..].iter().position(|&c| !is_opener(c)).map_or(chars.len(), |o| p + o);
                p > end && q < chars.len() && chars[q].is_uppercase()
            }
        };
        if boundary && !(chars[i] == '.' && ends_with_abbreviation(&chars[start..end], end - i)) {
            push_sentence(&mut sentences, &chars[start..end]);
            start = end;
        }
        i = end;
    }
    push_sentence(&mut sentences, &chars[start..]);
    sentences
}

/// `run_len` is the length of the terminator run at the end of `span`.
fn ends_with_abbreviation(span: &[char], run_len: usize) -> bool {
    if run_len != 1 {
        return false;
    }
    let chunk_start = span.iter().rposition(|c| c.is_whitespace()).map_or(0, |p| p + 1);
    let chunk: String = span[chunk_start..].iter().collect();
    let chunk = chunk.trim_start_matches(is_opener);
    ABBREVIATIONS.contains(&chunk)
}

fn push_sentence(out: &mut Vec<String>, span: &[char]) {
    let s: String = span.iter().collect();
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Tokens with their sentence partition and coarse part-of-speech tags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenizedDoc {
    pub tokens: Vec<String>,
    pub sentences: Vec<Range<usize>>,
    pub tags: Vec<PosTag>,
}

impl TokenizedDoc {
    pub fn new(text: &str) -> Self {
        let mut tokens = Vec::new();
        let mut sentences = Vec::new();
        for s in split_sentences(text) {
            let start = tokens.len();
            tokens.extend(tokenize(&s));
            sentences.push(start..tokens.len());
        }
        let tags = pos_tag(&tokens);
        TokenizedDoc {
            tokens,
            sentences,
            tags,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str).filter(|t| is_word(t))
    }
}
