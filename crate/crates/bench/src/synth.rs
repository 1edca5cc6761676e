//! Seeded synthetic corpora with three style regimes: US reliable, UK
//! reliable and unreliable.
//!
//! Every source perturbs its regime's knobs by log-normal factors with a
//! separate σ for reliable and unreliable sources.
//! Country is carried by US or UK spelling variants, and unreliable sources
//! mix both.

use newsbench_core::corpus::{Article, Corpus, Group, SourceEntry};
use newsbench_core::rng::{derive_seed_str, seeded};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Generator knobs. Rates are probabilities per word (`allcaps`, `hedge`,
/// `loaded`, `spelling`) or per sentence (`exclamation`, `question`,
/// `quote`); `sentence_length` is the mean number of words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub exclamation: f64,
    pub question: f64,
    pub allcaps: f64,
    pub sentence_length: f64,
    pub hedge: f64,
    pub quote: f64,
    pub loaded: f64,
    pub spelling: f64,
}

impl Regime {
    pub fn us() -> Self {
        Regime {
            exclamation: 0.01,
            question: 0.02,
            allcaps: 0.002,
            sentence_length: 22.0,
            hedge: 0.004,
            quote: 0.30,
            loaded: 0.004,
            spelling: 0.03,
        }
    }

    pub fn uk() -> Self {
        Regime {
            exclamation: 0.03,
            question: 0.05,
            allcaps: 0.006,
            sentence_length: 14.0,
            hedge: 0.02,
            quote: 0.08,
            loaded: 0.02,
            spelling: 0.03,
        }
    }

    pub fn unreliable() -> Self {
        Regime {
            exclamation: 0.12,
            question: 0.10,
            allcaps: 0.02,
            sentence_length: 13.0,
            hedge: 0.03,
            quote: 0.05,
            loaded: 0.05,
            spelling: 0.03,
        }
    }

    fn check(&self, name: &str, v: &mut Vec<String>) {
        let probs = [
            ("exclamation", self.exclamation),
            ("question", self.question),
            ("allcaps", self.allcaps),
            ("hedge", self.hedge),
            ("quote", self.quote),
            ("loaded", self.loaded),
            ("spelling", self.spelling),
        ];
        for (k, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                v.push(format!("synthetic.{name}.{k} must lie in [0, 1], got {p}"));
            }
        }
        if self.exclamation + self.question > 1.0 {
            v.push(format!("synthetic.{name}: exclamation + question must not exceed 1"));
        }
        if self.hedge + self.loaded + self.spelling > 1.0 {
            v.push(format!("synthetic.{name}: hedge + loaded + spelling must not exceed 1"));
        }
        if !(self.sentence_length >= 1.0 && self.sentence_length.is_finite()) {
            v.push(format!("synthetic.{name}.sentence_length must be at least 1, got {}", self.sentence_length));
        }
    }

    /// Log-normal source perturbation. Half the variance is one shared draw
    /// that moves the sensational knobs up and the sober ones (sentence
    /// length, quoting) down together; the other half is independent per knob.
    fn jittered(&self, sigma: f64, rng: &mut ChaCha8Rng) -> Regime {
        let shared: f64 = rng.sample(StandardNormal);
        let mut f = |x: f64, direction: f64| {
            let own: f64 = rng.sample(StandardNormal);
            x * (sigma * (direction * shared + own) * std::f64::consts::FRAC_1_SQRT_2).exp()
        };
        let p = |x: f64| x.clamp(0.0, 1.0);
        Regime {
            exclamation: p(f(self.exclamation, 1.0)),
            question: p(f(self.question, 1.0)),
            allcaps: p(f(self.allcaps, 1.0)),
            sentence_length: f(self.sentence_length, -1.0).max(3.0),
            hedge: p(f(self.hedge, 1.0)),
            quote: p(f(self.quote, -1.0)),
            loaded: p(f(self.loaded, 1.0)),
            spelling: p(f(self.spelling, 0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub sources_per_class: usize,
    pub articles_per_source: usize,
    pub sentences_min: usize,
    pub sentences_max: usize,
    pub us: Regime,
    pub uk: Regime,
    pub ur: Regime,
    pub reliable_jitter: f64,
    pub unreliable_jitter: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            sources_per_class: 5,
            articles_per_source: 100,
            sentences_min: 6,
            sentences_max: 12,
            us: Regime::us(),
            uk: Regime::uk(),
            ur: Regime::unreliable(),
            reliable_jitter: 0.25,
            unreliable_jitter: 0.75,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.sources_per_class == 0 {
            v.push("synthetic.sources_per_class must be at least 1".into());
        }
        if self.articles_per_source == 0 {
            v.push("synthetic.articles_per_source must be at least 1".into());
        }
        if self.sentences_min == 0 || self.sentences_min > self.sentences_max {
            v.push(format!(
                "synthetic sentence range must satisfy 1 <= sentences_min <= sentences_max, got {}..{}",
                self.sentences_min, self.sentences_max
            ));
        }
        for (k, s) in [("reliable_jitter", self.reliable_jitter), ("unreliable_jitter", self.unreliable_jitter)] {
            if !(s >= 0.0 && s.is_finite()) {
                v.push(format!("synthetic.{k} must be non-negative, got {s}"));
            }
        }
        self.us.check("us", &mut v);
        self.uk.check("uk", &mut v);
        self.ur.check("ur", &mut v);
        v
    }
}

const FUNCTION: &[&str] = &[
    "the", "of", "and", "to", "a", "in", "that", "for", "on", "with", "as", "by", "at", "from", "this", "its", "their",
    "after", "over", "into",
];
const NOUNS: &[&str] = &[
    "government", "minister", "council", "market", "economy", "report", "city", "school", "court", "police", "budget",
    "election", "policy", "company", "hospital", "river", "energy", "housing", "farmers", "workers", "officials",
    "committee", "inquiry", "plan", "community", "region", "project", "study", "figures", "agency",
];
const VERBS: &[&str] = &[
    "approved", "reviewed", "discussed", "expanded", "reduced", "opened", "published", "proposed", "raised",
    "supported", "delayed", "funded",
];
const ADJECTIVES: &[&str] = &[
    "new", "local", "national", "public", "early", "annual", "major", "regional", "recent", "several", "former",
    "senior",
];
const HEDGES: &[&str] = &[
    "maybe", "perhaps", "possibly", "apparently", "allegedly", "reportedly", "likely", "probably", "seemingly",
];
const LOADED: &[&str] = &[
    "shocking", "outrageous", "disaster", "corrupt", "radical", "elite", "propaganda", "regime", "terrible", "crisis",
    "amazing", "totally", "absolutely", "betray", "traitors",
];
pub const US_SPELLINGS: &[&str] = &[
    "color", "center", "organize", "analyze", "favorite", "honor", "labor", "defense", "program", "traveled", "theater",
    "neighbor", "apologize", "gray", "catalog",
];
pub const UK_SPELLINGS: &[&str] = &[
    "colour", "centre", "organise", "analyse", "favourite", "honour", "labour", "defence", "programme", "travelled",
    "theatre", "neighbour", "apologise", "grey", "catalogue",
];
const SPEAKERS: &[&str] = &["a spokesperson", "officials", "the minister", "a witness", "one analyst", "the report"];

struct Writer<'a> {
    regime: Regime,
    spellings: &'a [&'a str],
    rng: ChaCha8Rng,
}

impl Writer<'_> {
    fn pick(&mut self, list: &[&'static str]) -> &'static str {
        list.choose(&mut self.rng).expect("word lists are non-empty")
    }

    fn word(&mut self) -> String {
        let r = &self.regime;
        let u: f64 = self.rng.random();
        let w = if u < r.hedge {
            self.pick(HEDGES).to_string()
        } else if u < r.hedge + r.loaded {
            self.pick(LOADED).to_string()
        } else if u < r.hedge + r.loaded + r.spelling {
            let w: &str = self.spellings.choose(&mut self.rng).expect("spelling lists are non-empty");
            w.to_string()
        } else {
            let v: f64 = self.rng.random();
            let list = match v {
                v if v < 0.40 => FUNCTION,
                v if v < 0.70 => NOUNS,
                v if v < 0.85 => VERBS,
                _ => ADJECTIVES,
            };
            self.pick(list).to_string()
        };
        if !FUNCTION.contains(&w.as_str()) && self.rng.random::<f64>() < self.regime.allcaps {
            w.to_uppercase()
        } else {
            w
        }
    }

    fn length(&mut self) -> usize {
        let z: f64 = self.rng.sample(StandardNormal);
        let mean = self.regime.sentence_length;
        (mean + 0.3 * mean * z).round().max(3.0) as usize
    }

    fn sentence(&mut self) -> String {
        let n = self.length();
        let mut words: Vec<String> = (0..n).map(|_| self.word()).collect();
        capitalize(&mut words[0]);
        let u: f64 = self.rng.random();
        let end = if u < self.regime.exclamation {
            "!"
        } else if u < self.regime.exclamation + self.regime.question {
            "?"
        } else {
            "."
        };
        let body = words.join(" ");
        if self.rng.random::<f64>() < self.regime.quote {
            let speaker = self.pick(SPEAKERS);
            match end {
                "." => format!("\"{body},\" {speaker} said."),
                _ => format!("\"{body}{end}\" {speaker} said."),
            }
        } else {
            format!("{body}{end}")
        }
    }

    fn title(&mut self) -> String {
        let n = self.rng.random_range(4..=8);
        let mut words: Vec<String> = (0..n).map(|_| self.word()).collect();
        for w in &mut words {
            capitalize(w);
        }
        let mut t = words.join(" ");
        if self.rng.random::<f64>() < self.regime.exclamation {
            t.push('!');
        }
        t
    }
}

fn capitalize(w: &mut String) {
    if let Some(c) = w.chars().next() {
        let upper: String = c.to_uppercase().collect();
        w.replace_range(..c.len_utf8(), &upper);
    }
}

/// Source names, groups and factuality scores, US then UK then unreliable.
pub fn synthetic_roster(spec: &SyntheticSpec) -> Vec<SourceEntry> {
    let mut out = Vec::new();
    for (prefix, group, factuality) in [("us", Group::Us, 5), ("uk", Group::Uk, 5), ("ur", Group::None, 1)] {
        for i in 1..=spec.sources_per_class {
            out.push(SourceEntry::new(format!("{prefix}-source-{i}"), factuality, group).expect("valid roster entry"));
        }
    }
    out
}

/// Builds the corpus. Each source draws from its own stream seeded by
/// `(seed, source name)`.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> anyhow::Result<Corpus> {
    let problems = spec.validate();
    if !problems.is_empty() {
        anyhow::bail!("invalid synthetic spec: {}", problems.join("; "));
    }
    let mixed: Vec<&str> = US_SPELLINGS.iter().chain(UK_SPELLINGS).copied().collect();
    let roster = synthetic_roster(spec);
    let mut articles = Vec::with_capacity(roster.len() * spec.articles_per_source);
    for entry in &roster {
        let name = entry.source_name();
        let (base, sigma, spellings): (&Regime, f64, &[&str]) = match entry.group() {
            Group::Us => (&spec.us, spec.reliable_jitter, US_SPELLINGS),
            Group::Uk => (&spec.uk, spec.reliable_jitter, UK_SPELLINGS),
            Group::None => (&spec.ur, spec.unreliable_jitter, &mixed),
        };
        let mut rng = seeded(derive_seed_str(seed, name));
        let regime = base.jittered(sigma, &mut rng);
        let mut w = Writer {
            regime,
            spellings,
            rng,
        };
        for i in 0..spec.articles_per_source {
            let n = w.rng.random_range(spec.sentences_min..=spec.sentences_max);
            let body: Vec<String> = (0..n).map(|_| w.sentence()).collect();
            articles.push(Article {
                id: format!("{name}-{i:05}"),
                source_name: name.to_string(),
                title: w.title(),
                body: body.join(" "),
                published: None,
            });
        }
    }
    Ok(Corpus::new(articles, roster))
}

#[cfg(test)]
mod tests {
    use super::*;
    use newsbench_core::corpus::{validate_corpus, Class};

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            sources_per_class: 2,
            articles_per_source: 3,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn roster_and_counts() {
        let c = generate_synthetic_corpus(&small(), 1).unwrap();
        assert_eq!(c.len(), 18);
        assert_eq!(c.roster.len(), 6);
        assert!(validate_corpus(&c).is_clean());
        for e in c.roster.values() {
            let want = if e.group() == Group::None { 1 } else { 5 };
            assert_eq!(e.factuality(), want);
            assert_eq!(e.class() == Class::Unreliable, e.group() == Group::None);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = small();
        s.ur.exclamation = 1.5;
        s.sentences_min = 0;
        assert_eq!(s.validate().len(), 3);
        assert!(generate_synthetic_corpus(&s, 0).is_err());
    }

    #[test]
    fn sources_do_not_depend_on_each_other() {
        let a = generate_synthetic_corpus(&small(), 9).unwrap();
        let mut bigger = small();
        bigger.sources_per_class = 3;
        let b = generate_synthetic_corpus(&bigger, 9).unwrap();
        let first = |c: &Corpus| c.articles.iter().find(|x| x.source_name == "uk-source-2").cloned();
        assert_eq!(first(&a), first(&b));
    }

    #[test]
    fn quoted_sentences_stay_one_sentence() {
        let mut s = small();
        s.us.quote = 1.0;
        s.us.exclamation = 0.0;
        s.us.question = 0.0;
        let c = generate_synthetic_corpus(&s, 4).unwrap();
        let a = c.articles.iter().find(|a| a.source_name.starts_with("us-")).unwrap();
        let n = a.body.matches(" said.").count();
        assert_eq!(newsbench_core::textfeat::split_sentences(&a.body).len(), n);
    }
}
