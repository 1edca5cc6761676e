use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassPair, FeatureMatrix, Fitted, TrainedModel};
use crate::rng::{derive_seed, seeded, ChaCha8Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Exhaustive scan of midpoints between sorted distinct values.
    BestGini,
    /// One uniform threshold in `[min, max)` per candidate feature.
    RandomThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Candidate features per node; `None` means `ceil(sqrt(d))`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub split_rule: SplitRule,
    pub seed: u64,
}

impl ForestParams {
    pub fn random_forest(seed: u64) -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            mtry: None,
            min_leaf: 1,
            bootstrap: true,
            split_rule: SplitRule::BestGini,
            seed,
        }
    }

    pub fn extra_trees(seed: u64) -> Self {
        ForestParams {
            bootstrap: false,
            split_rule: SplitRule::RandomThreshold,
            ..Self::random_forest(seed)
        }
    }

    pub fn resolved_mtry(&self, d: usize) -> usize {
        self.mtry.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParam("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidParam("min_leaf must be at least 1".into()));
        }
        let mtry = self.resolved_mtry(d);
        if mtry == 0 || mtry > d {
            return Err(Error::InvalidParam(format!("mtry must lie in 1..={d}, got {mtry}")));
        }
        Ok(())
    }
}

/// `1 - sum p_k^2`; zero for an empty node.
pub fn gini_impurity(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        counts: [u64; 2],
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        counts: [u64; 2],
    },
}

impl Node {
    pub fn counts(&self) -> [u64; 2] {
        match *self {
            Node::Leaf { counts } | Node::Split { counts, .. } => counts,
        }
    }
}

/// Majority class of a count pair; ties go to index 0.
fn majority(counts: [u64; 2]) -> usize {
    usize::from(counts[1] > counts[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Parse("tree without nodes".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = *n {
                if left <= i || right <= i || left >= nodes.len() || right >= nodes.len() {
                    return Err(Error::Parse(format!("node {i} has invalid children {left}, {right}")));
                }
            }
        }
        Ok(Tree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_counts(&self, row: &[f64]) -> [u64; 2] {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        majority(self.leaf_counts(row))
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Weighted impurity decrease per feature, un-normalized.
    fn impurity_decrease(&self, d: usize) -> Vec<f64> {
        let weighted = |c: [u64; 2]| (c[0] + c[1]) as f64 * gini_impurity(&c);
        let mut out = vec![0.0; d];
        for n in &self.nodes {
            if let Node::Split {
                feature,
                left,
                right,
                counts,
                ..
            } = *n
            {
                let dec = weighted(counts) - weighted(self.nodes[left].counts()) - weighted(self.nodes[right].counts());
                out[feature] += dec.max(0.0);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    classes: ClassPair,
    n_features: usize,
    trees: Vec<Tree>,
}

impl Forest {
    pub fn new(classes: ClassPair, n_features: usize, trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidParam("a forest needs at least one tree".into()));
        }
        for t in &trees {
            for n in &t.nodes {
                if let Node::Split { feature, .. } = *n {
                    if feature >= n_features {
                        return Err(Error::Parse(format!("split on feature {feature} of {n_features}")));
                    }
                }
            }
        }
        Ok(Forest {
            classes,
            n_features,
            trees,
        })
    }

    pub fn classes(&self) -> &ClassPair {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Normalized mean decrease in Gini impurity; uniform when no split
    /// reduced impurity.
    pub fn importance(&self) -> Vec<f64> {
        let d = self.n_features;
        let mut total = vec![0.0; d];
        for t in &self.trees {
            let dec = t.impurity_decrease(d);
            let s: f64 = dec.iter().sum();
            if s > 0.0 {
                for (acc, v) in total.iter_mut().zip(dec) {
                    *acc += v / s;
                }
            }
        }
        let s: f64 = total.iter().sum();
        if s > 0.0 {
            total.iter().map(|v| v / s).collect()
        } else {
            vec![1.0 / d as f64; d]
        }
    }

    /// Line-oriented dump: a header, then one line per node.
    ///
    /// ```text
    /// forest v1
    /// classes ["A","B"]
    /// features 4
    /// tree 0 3
    /// split 2 0.5 1 2 3 4
    /// leaf 3 0
    /// leaf 0 4
    /// ```
    pub fn to_dump(&self) -> String {
        let mut s = String::from("forest v1\n");
        s.push_str(&format!(
            "classes {}\n",
            serde_json::to_string(&[self.classes.name(0), self.classes.name(1)]).expect("strings serialize")
        ));
        s.push_str(&format!("features {}\n", self.n_features));
        for (i, t) in self.trees.iter().enumerate() {
            s.push_str(&format!("tree {i} {}\n", t.nodes.len()));
            for n in &t.nodes {
                match *n {
                    Node::Leaf { counts } => s.push_str(&format!("leaf {} {}\n", counts[0], counts[1])),
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                        counts,
                    } => s.push_str(&format!(
                        "split {feature} {threshold:?} {left} {right} {} {}\n",
                        counts[0], counts[1]
                    )),
                }
            }
        }
        s
    }

    pub fn from_dump(dump: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse(format!("tree dump line {}: {msg}", line + 1));
        let mut lines = dump.lines().enumerate();
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::Parse(format!("tree dump ends before {what}")));

        let (ln, header) = next("header")?;
        if header != "forest v1" {
            return Err(bad(ln, "expected `forest v1`"));
        }
        let (ln, line) = next("classes")?;
        let names: [String; 2] = line
            .strip_prefix("classes ")
            .and_then(|j| serde_json::from_str(j).ok())
            .ok_or_else(|| bad(ln, "expected `classes [..]`"))?;
        let classes = ClassPair::new(names[0].clone(), names[1].clone())?;
        if classes.name(0) != names[0] {
            return Err(bad(ln, "class names out of order"));
        }
        let (ln, line) = next("features")?;
        let n_features: usize = line
            .strip_prefix("features ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(ln, "expected `features <d>`"))?;

        let mut trees = Vec::new();
        while let Some((ln, line)) = lines.next() {
            let f: Vec<&str> = line.split(' ').collect();
            if f.len() != 3 || f[0] != "tree" || f[1].parse::<usize>().ok() != Some(trees.len()) {
                return Err(bad(ln, "expected `tree <i> <nodes>`"));
            }
            let n: usize = f[2].parse().map_err(|_| bad(ln, "bad node count"))?;
            let mut nodes = Vec::with_capacity(n);
            for _ in 0..n {
                let (ln, line) = lines.next().ok_or_else(|| Error::Parse("tree dump truncated".into()))?;
                let f: Vec<&str> = line.split(' ').collect();
                let num = |s: &str| s.parse::<u64>().map_err(|_| bad(ln, "bad integer"));
                let node = match (f.first().copied(), f.len()) {
                    (Some("leaf"), 3) => Node::Leaf {
                        counts: [num(f[1])?, num(f[2])?],
                    },
                    (Some("split"), 7) => Node::Split {
                        feature: num(f[1])? as usize,
                        threshold: f[2].parse().map_err(|_| bad(ln, "bad threshold"))?,
                        left: num(f[3])? as usize,
                        right: num(f[4])? as usize,
                        counts: [num(f[5])?, num(f[6])?],
                    },
                    _ => return Err(bad(ln, "expected a `leaf` or `split` line")),
                };
                nodes.push(node);
            }
            trees.push(Tree::from_nodes(nodes)?);
        }
        Forest::new(classes, n_features, trees)
    }
}

/// Hard-vote labels (class indices into the model's [`ClassPair`]) and the
/// fraction of trees voting for each class.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestPrediction {
    pub labels: Vec<usize>,
    pub votes: Vec<[f64; 2]>,
}

pub fn train_forest(x: &FeatureMatrix, y: &[usize], classes: &ClassPair, p: &ForestParams) -> Result<TrainedModel> {
    let (n, d) = (x.n_rows(), x.n_features());
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: y.len() });
    }
    if n < 2 {
        return Err(Error::TrainingData(format!("need at least 2 rows, got {n}")));
    }
    if let Some(&bad) = y.iter().find(|&&c| c > 1) {
        return Err(Error::TrainingData(format!("label index {bad} outside the class pair")));
    }
    for c in 0..2 {
        if !y.contains(&c) {
            return Err(Error::TrainingData(format!("class `{}` is missing from the training labels", classes.name(c))));
        }
    }
    p.validate(d)?;

    let grower = Grower {
        x,
        y,
        mtry: p.resolved_mtry(d),
        min_leaf: p.min_leaf,
        max_depth: p.max_depth.unwrap_or(usize::MAX),
        rule: p.split_rule,
    };
    let trees: Vec<Tree> = (0..p.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded(derive_seed(p.seed, i as u64));
            let rows: Vec<usize> = if p.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grower.grow(rows, &mut rng)
        })
        .collect();

    let forest = Forest::new(classes.clone(), d, trees)?;
    Ok(TrainedModel::new(Fitted::Forest(forest), x.signature.clone()))
}

pub fn predict_forest(m: &TrainedModel, x: &FeatureMatrix) -> Result<ForestPrediction> {
    let Fitted::Forest(forest) = m.fitted() else {
        return Err(Error::InvalidParam("predict_forest needs a forest model".into()));
    };
    let x = m.prepare(x)?;
    if x.n_features() != forest.n_features {
        return Err(Error::DimensionMismatch {
            expected: forest.n_features,
            actual: x.n_features(),
        });
    }
    let k = forest.trees.len() as f64;
    let mut labels = Vec::with_capacity(x.n_rows());
    let mut votes = Vec::with_capacity(x.n_rows());
    for row in x.data.rows() {
        let row = row.to_vec();
        let mut v = [0u64; 2];
        for t in &forest.trees {
            v[t.predict_row(&row)] += 1;
        }
        labels.push(majority(v));
        votes.push([v[0] as f64 / k, v[1] as f64 / k]);
    }
    Ok(ForestPrediction { labels, votes })
}

struct Grower<'a> {
    x: &'a FeatureMatrix,
    y: &'a [usize],
    mtry: usize,
    min_leaf: usize,
    max_depth: usize,
    rule: SplitRule,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// Weighted child impurity `n_l g_l + n_r g_r`; lower is better.
    score: f64,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> [u64; 2] {
        let mut c = [0u64; 2];
        for &r in rows {
            c[self.y[r]] += 1;
        }
        c
    }

    fn grow(&self, rows: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let mut nodes = vec![Node::Leaf { counts: [0, 0] }];
        let mut stack = vec![(0usize, rows, 0usize)];
        while let Some((id, rows, depth)) = stack.pop() {
            let counts = self.counts(&rows);
            let pure = counts[0] == 0 || counts[1] == 0;
            let split = if pure || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
                None
            } else {
                self.best_split(&rows, rng)
            };
            match split {
                None => nodes[id] = Node::Leaf { counts },
                Some(c) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        rows.iter().partition(|&&i| self.x.data[[i, c.feature]] <= c.threshold);
                    let (left, right) = (nodes.len(), nodes.len() + 1);
                    nodes.push(Node::Leaf { counts: [0, 0] });
                    nodes.push(Node::Leaf { counts: [0, 0] });
                    nodes[id] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right,
                        counts,
                    };
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        Tree { nodes }
    }

    /// Visits features in a lazily drawn random order. Constant features do
    /// not count toward `mtry`; the search continues past `mtry` until some
    /// admissible split is found or the features run out.
    fn best_split(&self, rows: &[usize], rng: &mut ChaCha8Rng) -> Option<Candidate> {
        let d = self.x.n_features();
        let mut order: Vec<usize> = (0..d).collect();
        let mut best: Option<Candidate> = None;
        let mut evaluated = 0;
        for i in 0..d {
            if evaluated >= self.mtry && best.is_some() {
                break;
            }
            let j = rng.random_range(i..d);
            order.swap(i, j);
            let f = order[i];
            let mut pairs: Vec<(f64, usize)> = rows.iter().map(|&r| (self.x.data[[r, f]], self.y[r])).collect();
            let (lo, hi) = pairs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(v, _)| (lo.min(v), hi.max(v)));
            if lo >= hi {
                continue;
            }
            evaluated += 1;
            let cand = match self.rule {
                SplitRule::BestGini => self.scan(f, &mut pairs),
                SplitRule::RandomThreshold => {
                    let mut t = lo + rng.random::<f64>() * (hi - lo);
                    if t >= hi {
                        t = lo;
                    }
                    self.score_threshold(f, t, &pairs)
                }
            };
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.score < b.score) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn scan(&self, feature: usize, pairs: &mut [(f64, usize)]) -> Option<Candidate> {
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = pairs.len();
        let mut total = [0u64; 2];
        for &(_, c) in pairs.iter() {
            total[c] += 1;
        }
        let mut left = [0u64; 2];
        let mut best: Option<Candidate> = None;
        for i in 0..n - 1 {
            left[pairs[i].1] += 1;
            let nl = i + 1;
            if pairs[i].0 == pairs[i + 1].0 || nl < self.min_leaf || n - nl < self.min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let score = weighted_impurity(left) + weighted_impurity(right);
            if best.as_ref().is_none_or(|b| score < b.score) {
                let (a, b) = (pairs[i].0, pairs[i + 1].0);
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature,
                    threshold,
                    score,
                });
            }
        }
        best
    }

    fn score_threshold(&self, feature: usize, threshold: f64, pairs: &[(f64, usize)]) -> Option<Candidate> {
        let mut left = [0u64; 2];
        let mut right = [0u64; 2];
        for &(v, c) in pairs {
            if v <= threshold {
                left[c] += 1;
            } else {
                right[c] += 1;
            }
        }
        let (nl, nr) = ((left[0] + left[1]) as usize, (right[0] + right[1]) as usize);
        if nl < self.min_leaf || nr < self.min_leaf {
            return None;
        }
        Some(Candidate {
            feature,
            threshold,
            score: weighted_impurity(left) + weighted_impurity(right),
        })
    }
}

fn weighted_impurity(c: [u64; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    n - (c[0] as f64 * c[0] as f64 + c[1] as f64 * c[1] as f64) / n
}
