use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::corpus::{Class, Group};
use crate::rng::{derive_seed, partial_shuffle_indices, seeded, ChaCha8Rng};
use crate::{Error, Result};

/// Resample attempts per source-split fold before giving up.
pub const MAX_SOURCE_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Article,
    Source,
    Country,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Article, Scheme::Source, Scheme::Country];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Article => "article",
            Scheme::Source => "source",
            Scheme::Country => "country",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "article" => Ok(Scheme::Article),
            "source" => Ok(Scheme::Source),
            "country" => Ok(Scheme::Country),
            other => Err(Error::InvalidParam(format!("unknown split scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub folds: usize,
    pub seed: u64,
    /// Source split only: force one held-out source per class when possible.
    pub stratify: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_fraction: 0.2,
            folds: 20,
            seed: 0,
            stratify: true,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "test_fraction must lie strictly between 0 and 1, got {}",
                self.test_fraction
            )));
        }
        if self.folds == 0 {
            return Err(Error::InvalidParam("folds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Row indices (into the dataset the plan was built from), both sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Fold {
    fn from_test(n: usize, mut test: Vec<usize>) -> Fold {
        test.sort_unstable();
        let held: BTreeSet<usize> = test.iter().copied().collect();
        let train = (0..n).filter(|i| !held.contains(i)).collect();
        Fold { train, test }
    }

    pub fn train_ids<'a>(&self, ds: &'a LabeledDataset) -> Vec<&'a str> {
        self.train.iter().map(|&i| ds.rows()[i].article_id.as_str()).collect()
    }

    pub fn test_ids<'a>(&self, ds: &'a LabeledDataset) -> Vec<&'a str> {
        self.test.iter().map(|&i| ds.rows()[i].article_id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub scheme: Scheme,
    pub folds: Vec<Fold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_group: Option<Group>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_group: Option<Group>,
    /// Sources held out in each fold (source split only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub held_out_sources: Vec<Vec<String>>,
}

impl SplitPlan {
    /// Re-checks the scheme invariants against `ds`.
    pub fn check(&self, ds: &LabeledDataset) -> Result<()> {
        let n = ds.len();
        for (k, f) in self.folds.iter().enumerate() {
            let fail = |m: String| Err(Error::Split(format!("fold {k}: {m}")));
            if f.train.is_empty() || f.test.is_empty() {
                return fail("empty side".into());
            }
            if f.train.iter().chain(&f.test).any(|&i| i >= n) {
                return fail("row index out of range".into());
            }
            let train: BTreeSet<usize> = f.train.iter().copied().collect();
            if f.test.iter().any(|i| train.contains(i)) {
                return fail("train and test share rows".into());
            }
            match self.scheme {
                Scheme::Article => {}
                Scheme::Source => {
                    let src = |idx: &[usize]| -> BTreeSet<&str> { idx.iter().map(|&i| ds.rows()[i].source.as_str()).collect() };
                    if let Some(s) = src(&f.train).intersection(&src(&f.test)).next() {
                        return fail(format!("source `{s}` on both sides"));
                    }
                }
                Scheme::Country => {
                    let g = self.test_group.ok_or_else(|| Error::Split("country plan without test group".into()))?;
                    if f.train.iter().any(|&i| ds.rows()[i].group == g) {
                        return fail(format!("{g} rows in train"));
                    }
                    if f.test.iter().any(|&i| ds.rows()[i].group != g || ds.rows()[i].class != Class::Reliable) {
                        return fail(format!("test holds rows other than reliable {g}"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn test_count(fraction: f64, n: usize) -> usize {
    // Guard against 0.2 * 15 = 3.0000000000000004 rounding up.
    (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Independent seeded resamples: each fold holds out a uniform
/// `test_fraction` of the rows.
pub fn article_split_plan(ds: &LabeledDataset, cfg: &SplitConfig) -> Result<SplitPlan> {
    cfg.validate()?;
    let n = ds.len();
    if n < 5 {
        return Err(Error::Split(format!("article split needs at least 5 rows, got {n}")));
    }
    let k = (cfg.test_fraction * n as f64).round() as usize;
    if k == 0 || k >= n {
        return Err(Error::Split(format!(
            "test fraction {} of {n} rows leaves an empty side",
            cfg.test_fraction
        )));
    }
    let folds = (0..cfg.folds)
        .map(|f| {
            let mut rng = seeded(derive_seed(cfg.seed, f as u64));
            Fold::from_test(n, partial_shuffle_indices(&mut rng, n, k))
        })
        .collect();
    Ok(SplitPlan {
        scheme: Scheme::Article,
        folds,
        train_group: None,
        test_group: None,
        held_out_sources: Vec::new(),
    })
}

/// Holds out `ceil(test_fraction * S)` whole sources per fold.
pub fn source_split_plan(ds: &LabeledDataset, cfg: &SplitConfig) -> Result<SplitPlan> {
    cfg.validate()?;
    let mut by_source: BTreeMap<&str, (Class, Vec<usize>)> = BTreeMap::new();
    for (i, r) in ds.rows().iter().enumerate() {
        by_source.entry(r.source.as_str()).or_insert((r.class, Vec::new())).1.push(i);
    }
    let sources: Vec<&str> = by_source.keys().copied().collect();
    let of_class = |c: Class| -> Vec<usize> { (0..sources.len()).filter(|&s| by_source[sources[s]].0 == c).collect() };
    let (rel, unrel) = (of_class(Class::Reliable), of_class(Class::Unreliable));
    if rel.len() < 2 || unrel.len() < 2 {
        return Err(Error::Split(format!(
            "source split needs at least 2 sources per class, got {} reliable and {} unreliable",
            rel.len(),
            unrel.len()
        )));
    }
    let k = test_count(cfg.test_fraction, sources.len()).max(1);

    let draw = |rng: &mut ChaCha8Rng| -> Vec<usize> {
        if cfg.stratify && k >= 2 {
            let mut held = vec![rel[partial_shuffle_indices(rng, rel.len(), 1)[0]], unrel[partial_shuffle_indices(rng, unrel.len(), 1)[0]]];
            let rest: Vec<usize> = (0..sources.len()).filter(|s| !held.contains(s)).collect();
            held.extend(partial_shuffle_indices(rng, rest.len(), k - 2).into_iter().map(|j| rest[j]));
            held
        } else {
            partial_shuffle_indices(rng, sources.len(), k)
        }
    };

    let n = ds.len();
    let mut folds = Vec::with_capacity(cfg.folds);
    let mut held_out_sources = Vec::with_capacity(cfg.folds);
    for f in 0..cfg.folds {
        let mut rng = seeded(derive_seed(cfg.seed, f as u64));
        let mut accepted = None;
        for _ in 0..MAX_SOURCE_RESAMPLES {
            let held = draw(&mut rng);
            let train_classes: BTreeSet<Class> =
                (0..sources.len()).filter(|s| !held.contains(s)).map(|s| by_source[sources[s]].0).collect();
            if train_classes.len() == 2 {
                accepted = Some(held);
                break;
            }
        }
        let held = accepted.ok_or_else(|| {
            Error::Split(format!(
                "fold {f}: no draw in {MAX_SOURCE_RESAMPLES} attempts left both classes in training"
            ))
        })?;
        let test: Vec<usize> = held.iter().flat_map(|&s| by_source[sources[s]].1.iter().copied()).collect();
        let mut names: Vec<String> = held.iter().map(|&s| sources[s].to_string()).collect();
        names.sort();
        held_out_sources.push(names);
        folds.push(Fold::from_test(n, test));
    }
    Ok(SplitPlan {
        scheme: Scheme::Source,
        folds,
        train_group: None,
        test_group: None,
        held_out_sources,
    })
}

/// One fold: train on reliable `train_group` plus every unreliable row, test
/// on the other group's reliable rows.
pub fn country_split_plan(ds: &LabeledDataset, train_group: Group) -> Result<SplitPlan> {
    let test_group = match train_group {
        Group::Us => Group::Uk,
        Group::Uk => Group::Us,
        Group::None => return Err(Error::Split("country split trains on US or UK, not NONE".into())),
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, r) in ds.rows().iter().enumerate() {
        match r.class {
            Class::Unreliable if r.group != test_group => train.push(i),
            Class::Reliable if r.group == train_group => train.push(i),
            Class::Reliable if r.group == test_group => test.push(i),
            _ => {}
        }
    }
    let has = |c: Class| train.iter().any(|&i| ds.rows()[i].class == c);
    if !has(Class::Reliable) {
        return Err(Error::Split(format!("no reliable {train_group} rows to train on")));
    }
    if !has(Class::Unreliable) {
        return Err(Error::Split("no unreliable rows to train on".into()));
    }
    if test.is_empty() {
        return Err(Error::Split(format!("no reliable {test_group} rows to test on")));
    }
    Ok(SplitPlan {
        scheme: Scheme::Country,
        folds: vec![Fold { train, test }],
        train_group: Some(train_group),
        test_group: Some(test_group),
        held_out_sources: Vec::new(),
    })
}
