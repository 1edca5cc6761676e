//! PV-DBOW paragraph vectors trained with negative sampling.
//!
//! Each document owns a vector `v_d`; each vocabulary word owns an output
//! vector `u_w`. For every (document, word) occurrence the trainer takes one
//! SGD step on
//!
//! ```text
//! loss = -ln σ(v_d·u_w) - Σ_{i=1..k} ln σ(-v_d·u_{n_i})
//! ```
//!
//! with the noise words `n_i` drawn from the unigram distribution raised to
//! the 0.75 power. Training is single-threaded and visits documents in
//! corpus order every epoch, so a seed fixes the result bit for bit.
//! Vectors for unseen documents come from [`infer_vector`], which freezes
//! the word vectors and fits a fresh document vector.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, ChaCha8Rng};
use crate::{Error, Result};

/// Largest accepted starting learning rate; beyond it SGD on these
/// objectives diverges.
pub const MAX_LEARNING_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    PvDbow,
    /// Distributed-memory variant; accepted by the config, not trainable yet.
    PvDm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub variant: Variant,
    pub dimension: usize,
    /// Context window; only meaningful for [`Variant::PvDm`].
    pub window: usize,
    pub negative_k: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub final_learning_rate: f64,
    pub min_count: u64,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            variant: Variant::PvDbow,
            dimension: 100,
            window: 5,
            negative_k: 5,
            epochs: 20,
            learning_rate: 0.025,
            final_learning_rate: 0.0001,
            min_count: 2,
            seed: 0,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(format!("embedding config: {m}")));
        if self.dimension == 0 {
            return bad("dimension must be at least 1");
        }
        if self.negative_k == 0 {
            return bad("negative_k must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1");
        }
        if !(self.final_learning_rate > 0.0 && self.final_learning_rate <= self.learning_rate) {
            return bad("learning rates must satisfy 0 < final_learning_rate <= learning_rate");
        }
        if !(self.learning_rate <= MAX_LEARNING_RATE) {
            return bad("learning_rate must not exceed 1.0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub term: String,
    pub count: u64,
}

/// Vocabulary ordered by descending count, ties broken by term.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
    /// Cumulative noise distribution ∝ count^0.75; last element is 1.
    cumulative: Vec<f64>,
}

impl Vocab {
    fn from_entries(entries: Vec<VocabEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Embedding("vocabulary is empty".into()));
        }
        let index = entries.iter().enumerate().map(|(i, e)| (e.term.clone(), i)).collect();
        let weights: Vec<f64> = entries.iter().map(|e| (e.count as f64).powf(0.75)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Vocab {
            entries,
            index,
            cumulative,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn count(&self, term: &str) -> Option<u64> {
        self.get(term).map(|i| self.entries[i].count)
    }

    pub fn noise_probability(&self, idx: usize) -> f64 {
        let prev = if idx == 0 { 0.0 } else { self.cumulative[idx - 1] };
        self.cumulative[idx] - prev
    }

    pub fn sample_noise(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u).min(self.len() - 1)
    }

    fn indices<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.get(t.as_ref())).collect()
    }
}

pub fn build_vocab<D: AsRef<[S]>, S: AsRef<str>>(corpus: &[D], min_count: u64) -> Result<Vocab> {
    if corpus.iter().all(|d| d.as_ref().is_empty()) {
        return Err(Error::Embedding("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in corpus {
        for t in doc.as_ref() {
            *counts.entry(t.as_ref()).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<VocabEntry> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(t, c)| VocabEntry {
            term: t.to_string(),
            count: c,
        })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    Vocab::from_entries(entries)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln σ(x) without overflow.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Negative-sampling loss of one (document, word) pair.
pub fn negative_sampling_loss(doc: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(dot(doc, positive)) - negatives.iter().map(|n| log_sigmoid(-dot(doc, n))).sum::<f64>()
}

/// Gradient of [`negative_sampling_loss`] with respect to the document vector:
/// `-(1 - σ(v·u_w)) u_w + Σ σ(v·u_n) u_n`.
pub fn negative_sampling_grad_doc(doc: &[f64], positive: &[f64], negatives: &[&[f64]]) -> Vec<f64> {
    let mut grad: Vec<f64> = positive.iter().map(|u| -(1.0 - sigmoid(dot(doc, positive))) * u).collect();
    for n in negatives {
        let s = sigmoid(dot(doc, n));
        for (g, u) in grad.iter_mut().zip(n.iter()) {
            *g += s * u;
        }
    }
    grad
}

/// Gradients of [`negative_sampling_loss`] with respect to the positive word
/// vector and each negative word vector.
pub fn negative_sampling_grad_words(doc: &[f64], positive: &[f64], negatives: &[&[f64]]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let gp = -(1.0 - sigmoid(dot(doc, positive)));
    let pos = doc.iter().map(|v| gp * v).collect();
    let negs = negatives
        .iter()
        .map(|n| {
            let s = sigmoid(dot(doc, n));
            doc.iter().map(|v| s * v).collect()
        })
        .collect();
    (pos, negs)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// Mean pair loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// Documents with no in-vocabulary token; their vectors keep the
    /// initialization.
    pub empty_docs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    config: EmbeddingConfig,
    vocab: Vocab,
    n_docs: usize,
    /// Row-major `n_docs × dimension`.
    doc_vectors: Vec<f64>,
    /// Row-major `vocab.len() × dimension`.
    word_vectors: Vec<f64>,
    report: TrainingReport,
}

struct Sgd<'a> {
    vocab: &'a Vocab,
    dim: usize,
    negative_k: usize,
    scratch: Vec<f64>,
}

impl Sgd<'_> {
    /// Draws the target and its noise words for one pair; noise draws equal
    /// to the target are dropped.
    fn draws(&self, word: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.negative_k + 1);
        out.push((word, 1.0));
        for _ in 0..self.negative_k {
            let n = self.vocab.sample_noise(rng);
            if n != word {
                out.push((n, 0.0));
            }
        }
        out
    }

    /// One SGD step on the pair (doc, word), updating both the document
    /// vector and the touched word vectors. Returns the pair loss before the
    /// step.
    fn step(&mut self, doc: &mut [f64], word: usize, words: &mut [f64], lr: f64, rng: &mut ChaCha8Rng) -> f64 {
        let dim = self.dim;
        self.scratch.iter_mut().for_each(|x| *x = 0.0);
        let mut loss = 0.0;
        for (target, label) in self.draws(word, rng) {
            let u = &mut words[target * dim..(target + 1) * dim];
            let score = dot(doc, u);
            loss -= if label == 1.0 { log_sigmoid(score) } else { log_sigmoid(-score) };
            let g = (label - sigmoid(score)) * lr;
            for ((acc, ui), &vi) in self.scratch.iter_mut().zip(u.iter_mut()).zip(doc.iter()) {
                *acc += g * *ui;
                *ui += g * vi;
            }
        }
        for (vi, &d) in doc.iter_mut().zip(&self.scratch) {
            *vi += d;
        }
        loss
    }

    /// Like [`Sgd::step`] with the word vectors held fixed.
    fn step_frozen(&mut self, doc: &mut [f64], word: usize, words: &[f64], lr: f64, rng: &mut ChaCha8Rng) {
        let dim = self.dim;
        self.scratch.iter_mut().for_each(|x| *x = 0.0);
        for (target, label) in self.draws(word, rng) {
            let u = &words[target * dim..(target + 1) * dim];
            let g = (label - sigmoid(dot(doc, u))) * lr;
            for (acc, &ui) in self.scratch.iter_mut().zip(u) {
                *acc += g * ui;
            }
        }
        for (vi, &d) in doc.iter_mut().zip(&self.scratch) {
            *vi += d;
        }
    }
}

fn init_uniform(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<f64> {
    let half = 0.5 / dim as f64;
    (0..n * dim).map(|_| rng.random_range(-half..half)).collect()
}

fn decayed(cfg: &EmbeddingConfig, step: usize, total: usize) -> f64 {
    let progress = if total == 0 { 0.0 } else { step as f64 / total as f64 };
    cfg.learning_rate - (cfg.learning_rate - cfg.final_learning_rate) * progress
}

pub fn train<D: AsRef<[S]>, S: AsRef<str>>(corpus: &[D], cfg: &EmbeddingConfig) -> Result<EmbeddingModel> {
    cfg.validate()?;
    if cfg.variant != Variant::PvDbow {
        return Err(Error::Embedding("only the PV-DBOW variant is trainable".into()));
    }
    let vocab = build_vocab(corpus, cfg.min_count)?;
    let dim = cfg.dimension;
    let mut rng = rng::seeded(cfg.seed);
    let mut doc_vectors = init_uniform(&mut rng, corpus.len(), dim);
    let mut word_vectors = init_uniform(&mut rng, vocab.len(), dim);

    let docs: Vec<Vec<usize>> = corpus.iter().map(|d| vocab.indices(d.as_ref())).collect();
    let empty_docs: Vec<usize> = docs.iter().enumerate().filter(|(_, d)| d.is_empty()).map(|(i, _)| i).collect();
    let per_epoch: usize = docs.iter().map(Vec::len).sum();
    let total = per_epoch * cfg.epochs;

    let mut sgd = Sgd {
        vocab: &vocab,
        dim,
        negative_k: cfg.negative_k,
        scratch: vec![0.0; dim],
    };
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut step = 0;
    for _ in 0..cfg.epochs {
        let mut loss = 0.0;
        for (d, words) in docs.iter().enumerate() {
            let v = &mut doc_vectors[d * dim..(d + 1) * dim];
            for &w in words {
                loss += sgd.step(v, w, &mut word_vectors, decayed(cfg, step, total), &mut rng);
                step += 1;
            }
        }
        epoch_losses.push(if per_epoch == 0 { 0.0 } else { loss / per_epoch as f64 });
    }

    Ok(EmbeddingModel {
        config: cfg.clone(),
        n_docs: corpus.len(),
        vocab,
        doc_vectors,
        word_vectors,
        report: TrainingReport {
            epoch_losses,
            empty_docs,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub vector: Vec<f64>,
    /// Set when no token of the document is in the vocabulary; the vector is
    /// then all zeros.
    pub all_oov: bool,
}

/// Fits a document vector for `tokens` against frozen word vectors.
///
/// `steps` passes over the document are made with the model's learning-rate
/// schedule; `steps == 0` returns the seeded initialization.
pub fn infer_vector<S: AsRef<str>>(model: &EmbeddingModel, tokens: &[S], steps: usize, seed: u64) -> Inference {
    let dim = model.config.dimension;
    let words = model.vocab.indices(tokens);
    if words.is_empty() {
        return Inference {
            vector: vec![0.0; dim],
            all_oov: true,
        };
    }
    let mut rng = rng::seeded(seed);
    let mut v = init_uniform(&mut rng, 1, dim);
    let mut sgd = Sgd {
        vocab: &model.vocab,
        dim,
        negative_k: model.config.negative_k,
        scratch: vec![0.0; dim],
    };
    let total = steps * words.len();
    let mut step = 0;
    for _ in 0..steps {
        for &w in &words {
            sgd.step_frozen(&mut v, w, &model.word_vectors, decayed(&model.config, step, total), &mut rng);
            step += 1;
        }
    }
    Inference {
        vector: v,
        all_oov: false,
    }
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let (na, nb) = (dot(a, a).sqrt(), dot(b, b).sqrt());
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    format: String,
    tag: String,
    config: EmbeddingConfig,
    n_docs: usize,
    vocab: Vec<VocabEntry>,
    report: TrainingReport,
}

const MODEL_FORMAT: &str = "pv-dbow-json-csv-v1";

impl EmbeddingModel {
    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn report(&self) -> &TrainingReport {
        &self.report
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn doc_vector(&self, i: usize) -> &[f64] {
        let d = self.config.dimension;
        &self.doc_vectors[i * d..(i + 1) * d]
    }

    pub fn word_vector(&self, term: &str) -> Option<&[f64]> {
        let d = self.config.dimension;
        self.vocab.get(term).map(|i| &self.word_vectors[i * d..(i + 1) * d])
    }

    /// Identifies this trained model: hash of the config, the vocabulary and
    /// the number of training documents.
    pub fn tag(&self) -> String {
        let header = serde_json::json!({
            "config": self.config,
            "vocab": self.vocab.entries,
            "n_docs": self.n_docs,
        });
        format!("d2v-{}", &rng::sha256_hex(header.to_string().as_bytes())[..16])
    }

    pub fn is_finite(&self) -> bool {
        self.doc_vectors.iter().chain(&self.word_vectors).all(|x| x.is_finite())
    }

    /// Writes `model.json`, `doc_vectors.csv` and `word_vectors.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let header = ModelHeader {
            format: MODEL_FORMAT.into(),
            tag: self.tag(),
            config: self.config.clone(),
            n_docs: self.n_docs,
            vocab: self.vocab.entries.clone(),
            report: self.report.clone(),
        };
        let path = dir.join("model.json");
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &header)?;
        write_matrix(&dir.join("doc_vectors.csv"), &self.doc_vectors, self.config.dimension)?;
        write_matrix(&dir.join("word_vectors.csv"), &self.word_vectors, self.config.dimension)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("model.json");
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let header: ModelHeader = serde_json::from_reader(BufReader::new(file))?;
        if header.format != MODEL_FORMAT {
            return Err(Error::Embedding(format!("unknown model format `{}`", header.format)));
        }
        let dim = header.config.dimension;
        let doc_vectors = read_matrix(&dir.join("doc_vectors.csv"), dim)?;
        let word_vectors = read_matrix(&dir.join("word_vectors.csv"), dim)?;
        let vocab = Vocab::from_entries(header.vocab)?;
        if doc_vectors.len() != header.n_docs * dim || word_vectors.len() != vocab.len() * dim {
            return Err(Error::Embedding("weight matrices do not match the header".into()));
        }
        let model = EmbeddingModel {
            config: header.config,
            vocab,
            n_docs: header.n_docs,
            doc_vectors,
            word_vectors,
            report: header.report,
        };
        if model.tag() != header.tag {
            return Err(Error::Embedding("model tag does not match its contents".into()));
        }
        Ok(model)
    }
}

fn write_matrix(path: &Path, values: &[f64], dim: usize) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in values.chunks(dim) {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_matrix(path: &Path, dim: usize) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|x| x.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("{} line {}: {e}", path.display(), i + 1)))?;
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: row.len(),
            });
        }
        out.extend(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn vocab_counts_and_noise() {
        let v = build_vocab(&[toks("a b a b c")], 2).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.count("a"), Some(2));
        assert_eq!(v.count("b"), Some(2));
        assert_eq!(v.count("c"), None);
        assert!((v.noise_probability(0) - 0.5).abs() < 1e-12);
        assert!((v.noise_probability(1) - 0.5).abs() < 1e-12);

        let single = build_vocab(&[toks("x")], 1).unwrap();
        assert_eq!(single.count("x"), Some(1));

        assert!(build_vocab::<Vec<String>, String>(&[], 1).is_err());
        assert!(build_vocab(&[Vec::<String>::new()], 1).is_err());
    }

    #[test]
    fn noise_follows_three_quarter_power() {
        let v = build_vocab(&[toks("a a a a a a a a a a a a a a a a b")], 1).unwrap();
        let expect_a = 16f64.powf(0.75) / (16f64.powf(0.75) + 1.0);
        assert!((v.noise_probability(v.get("a").unwrap()) - expect_a).abs() < 1e-12);
        let mut rng = rng::seeded(5);
        let hits = (0..20_000).filter(|_| v.sample_noise(&mut rng) == v.get("a").unwrap()).count();
        assert!((hits as f64 / 20_000.0 - expect_a).abs() < 0.02);
    }

    #[test]
    fn config_validation() {
        assert!(EmbeddingConfig::default().validate().is_ok());
        for cfg in [
            EmbeddingConfig { dimension: 0, ..Default::default() },
            EmbeddingConfig { negative_k: 0, ..Default::default() },
            EmbeddingConfig { epochs: 0, ..Default::default() },
            EmbeddingConfig { final_learning_rate: 0.0, ..Default::default() },
            EmbeddingConfig { final_learning_rate: 0.5, ..Default::default() },
            EmbeddingConfig { learning_rate: 50.0, ..Default::default() },
            EmbeddingConfig { learning_rate: f64::NAN, ..Default::default() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine_similarity(&[1.0, 1.0], &[-1.0, -1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(cosine_similarity(&[1.0], &[1.0, 2.0]).is_err());
    }

    fn small_config(dim: usize) -> EmbeddingConfig {
        EmbeddingConfig {
            dimension: dim,
            epochs: 10,
            min_count: 1,
            seed: 42,
            learning_rate: 0.05,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_and_finite() {
        let corpus = vec![toks("red green blue red"), toks("cat dog cat mouse"), toks("red cat")];
        let a = train(&corpus, &small_config(8)).unwrap();
        let b = train(&corpus, &small_config(8)).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite());
        assert_eq!(a.n_docs(), 3);
        assert_eq!(a.tag(), b.tag());
    }

    #[test]
    fn disjoint_docs_are_not_identical() {
        let corpus = vec![toks("alpha beta gamma alpha beta gamma"), toks("one two three one two three")];
        let m = train(&corpus, &small_config(8)).unwrap();
        let self_sim = cosine_similarity(m.doc_vector(0), m.doc_vector(0)).unwrap();
        let cross = cosine_similarity(m.doc_vector(0), m.doc_vector(1)).unwrap();
        assert!((self_sim - 1.0).abs() < 1e-12);
        assert!(cross < self_sim);
    }

    #[test]
    fn empty_doc_is_flagged_and_untouched() {
        let corpus = vec![toks("a b a b"), toks("zzz")];
        let cfg = EmbeddingConfig { min_count: 2, ..small_config(4) };
        let m = train(&corpus, &cfg).unwrap();
        assert_eq!(m.report().empty_docs, vec![1]);
        let mut rng = rng::seeded(cfg.seed);
        let init = init_uniform(&mut rng, 2, 4);
        assert_eq!(m.doc_vector(1), &init[4..8]);
    }

    #[test]
    fn inference_edge_cases() {
        let corpus = vec![toks("a b c a b c"), toks("d e f d e f")];
        let m = train(&corpus, &small_config(6)).unwrap();
        let oov = infer_vector(&m, &toks("q r s"), 10, 1);
        assert!(oov.all_oov);
        assert!(oov.vector.iter().all(|&x| x == 0.0));

        let zero_steps = infer_vector(&m, &toks("a b"), 0, 9);
        let init = init_uniform(&mut rng::seeded(9), 1, 6);
        assert_eq!(zero_steps.vector, init);
        assert!(!zero_steps.all_oov);

        let again = infer_vector(&m, &toks("a b"), 5, 9);
        assert_eq!(again, infer_vector(&m, &toks("a b"), 5, 9));
        assert!(again.vector.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn pv_dm_is_not_trainable() {
        let cfg = EmbeddingConfig { variant: Variant::PvDm, ..small_config(4) };
        assert!(train(&[toks("a a")], &cfg).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let corpus = vec![toks("a b c a b c"), toks("d e f d e f")];
        let m = train(&corpus, &small_config(5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        m.save(dir.path()).unwrap();
        let back = EmbeddingModel::load(dir.path()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn sgd_step_follows_the_analytic_gradient() {
        let corpus = vec![vec!["a", "b", "c", "d", "a", "b"], vec!["c", "d", "e", "e", "a"]];
        let vocab = build_vocab(&corpus, 1).unwrap();
        let dim = 4;
        let mut rng = rng::seeded(5);
        let mut words = init_uniform(&mut rng, vocab.len(), dim);
        let mut doc = init_uniform(&mut rng, 1, dim);
        let before_doc = doc.clone();
        let before_words = words.clone();
        let mut sgd = Sgd {
            vocab: &vocab,
            dim,
            negative_k: 3,
            scratch: vec![0.0; dim],
        };
        let target = vocab.get("c").unwrap();
        let draws = sgd.draws(target, &mut rng::seeded(9));
        let lr = 0.1;
        sgd.step(&mut doc, target, &mut words, lr, &mut rng::seeded(9));

        let row = |w: &[f64], i: usize| w[i * dim..(i + 1) * dim].to_vec();
        let pos = row(&before_words, target);
        let negs: Vec<Vec<f64>> = draws[1..].iter().map(|&(n, _)| row(&before_words, n)).collect();
        let neg_refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let gd = negative_sampling_grad_doc(&before_doc, &pos, &neg_refs);
        for j in 0..dim {
            assert!((doc[j] - (before_doc[j] - lr * gd[j])).abs() < 1e-15);
        }
        // With distinct noise words each vector moves by exactly -lr * grad.
        let distinct: std::collections::BTreeSet<usize> = draws.iter().map(|d| d.0).collect();
        if distinct.len() == draws.len() {
            let (gp, gn) = negative_sampling_grad_words(&before_doc, &pos, &neg_refs);
            let after = row(&words, target);
            for j in 0..dim {
                assert!((after[j] - (pos[j] - lr * gp[j])).abs() < 1e-15);
            }
            for ((n, _), g) in draws[1..].iter().zip(&gn) {
                let after = row(&words, *n);
                let before = row(&before_words, *n);
                for j in 0..dim {
                    assert!((after[j] - (before[j] - lr * g[j])).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = rng::seeded(17);
        let mut vec5 = || (0..5).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let doc = vec5();
        let pos = vec5();
        let negs = [vec5(), vec5(), vec5()];
        let neg_refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let grad = negative_sampling_grad_doc(&doc, &pos, &neg_refs);
        let h = 1e-6;
        for j in 0..5 {
            let mut plus = doc.clone();
            let mut minus = doc.clone();
            plus[j] += h;
            minus[j] -= h;
            let fd = (negative_sampling_loss(&plus, &pos, &neg_refs) - negative_sampling_loss(&minus, &pos, &neg_refs)) / (2.0 * h);
            assert!((fd - grad[j]).abs() <= 1e-4 * fd.abs().max(grad[j].abs()).max(1e-8), "{j}: {fd} vs {}", grad[j]);
        }
    }
}
