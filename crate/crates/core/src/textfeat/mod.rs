//! Hand-crafted text features in five categories: style, complexity, bias,
//! affect and moral.
//!
//! Extraction is a pure function of `(text, catalog, lexicons)`. Every
//! degenerate input (empty text, punctuation only, no sentences) yields
//! zeros rather than an error.

mod catalog;
mod extract;
mod lexicon;
mod pos;
mod tokenize;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use catalog::{CatalogEntry, Category, FeatureCatalog, FeatureKind, NELA_OPEN_V1};
pub use extract::{
    count_syllables, extract_affect, extract_bias, extract_complexity, extract_moral, extract_style,
    StyleCounts, STOPWORDS,
};
pub use lexicon::{LexiconName, LexiconSet, TermList};
pub use pos::{pos_tag, tag_token, PosTag};
pub use tokenize::{is_word, split_sentences, tokenize, TokenizedDoc, ABBREVIATIONS, ABBREVIATIONS_VERSION};

use crate::corpus::Article;
use crate::{Error, Result};

/// A fixed-length feature vector tagged with the catalog version or
/// embedding hash that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub signature: String,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Features of raw text, in catalog order.
pub fn extract_text(text: &str, catalog: &FeatureCatalog, lex: &LexiconSet) -> Result<FeatureVector> {
    if catalog.version != NELA_OPEN_V1 {
        return Err(Error::InvalidParam(format!(
            "unsupported feature catalog version `{}`",
            catalog.version
        )));
    }
    let doc = TokenizedDoc::new(text);
    let mut values = extract_style(&doc);
    values.extend(extract_complexity(&doc));
    values.extend(extract_bias(&doc, lex));
    values.extend(extract_affect(&doc, lex));
    values.extend(extract_moral(&doc, lex));
    debug_assert_eq!(values.len(), catalog.dimension());
    Ok(FeatureVector {
        values,
        signature: catalog.version.clone(),
    })
}

/// Features of an article's title and body joined by one newline.
pub fn extract_features(article: &Article, catalog: &FeatureCatalog, lex: &LexiconSet) -> Result<FeatureVector> {
    extract_text(&article.text(), catalog, lex)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMatrixSidecar {
    pub catalog_version: String,
    pub dimension: usize,
    pub rows: usize,
}

/// Writes the feature matrix CSV (`id` column, then one column per catalog
/// feature) and returns the sidecar describing it.
pub fn write_feature_matrix(
    out: &mut impl Write,
    catalog: &FeatureCatalog,
    rows: &[(String, FeatureVector)],
) -> Result<FeatureMatrixSidecar> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string()];
    header.extend(catalog.names().map(str::to_string));
    writer.write_record(&header)?;
    for (id, v) in rows {
        if v.signature != catalog.version || v.len() != catalog.dimension() {
            return Err(Error::SignatureMismatch {
                expected: catalog.version.clone(),
                actual: v.signature.clone(),
            });
        }
        let mut record = vec![id.clone()];
        record.extend(v.values.iter().map(|x| x.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io("feature matrix", e))?;
    Ok(FeatureMatrixSidecar {
        catalog_version: catalog.version.clone(),
        dimension: catalog.dimension(),
        rows: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn article(title: &str, body: &str) -> Article {
        Article {
            id: "x".into(),
            source_name: "s".into(),
            title: title.into(),
            body: body.into(),
            published: None,
        }
    }

    #[test]
    fn vector_matches_catalog_and_is_deterministic() {
        let cat = FeatureCatalog::nela_open_v1();
        let lex = LexiconSet::starter();
        let a = article("Shocking news!", "Officials said the plan was good. Critics feared harm.");
        let v1 = extract_features(&a, &cat, &lex).unwrap();
        let v2 = extract_features(&a, &cat, &lex).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(v1.len(), cat.dimension());
        assert_eq!(v1.signature, NELA_OPEN_V1);
        assert!(extract_text("", &cat, &lex).unwrap().values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn batch_order_does_not_matter() {
        let cat = FeatureCatalog::nela_open_v1();
        let lex = LexiconSet::starter();
        let docs = [article("A", "One text here."), article("B", "Another TEXT!"), article("C", "Third?")];
        let forward: Vec<_> = docs.iter().map(|a| extract_features(a, &cat, &lex).unwrap()).collect();
        let backward: Vec<_> = docs.iter().rev().map(|a| extract_features(a, &cat, &lex).unwrap()).collect();
        for (f, b) in forward.iter().zip(backward.iter().rev()) {
            assert_eq!(f, b);
        }
    }

    #[test]
    fn unknown_catalog_version_is_refused() {
        let mut cat = FeatureCatalog::nela_open_v1();
        cat.version = "nela-open-v0".into();
        assert!(extract_text("text", &cat, &LexiconSet::starter()).is_err());
    }

    #[test]
    fn feature_matrix_csv_header() {
        let cat = FeatureCatalog::nela_open_v1();
        let lex = LexiconSet::starter();
        let rows = vec![("a1".to_string(), extract_text("Hello there.", &cat, &lex).unwrap())];
        let mut buf = Vec::new();
        let sidecar = write_feature_matrix(&mut buf, &cat, &rows).unwrap();
        assert_eq!(sidecar.dimension, 92);
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("id,pos_noun,pos_verb"));
        assert!(lines.next().unwrap().starts_with("a1,"));
    }

    fn any_text() -> impl Strategy<Value = String> {
        prop_oneof![
            any::<String>(),
            "[A-Za-z!?.,;:'\" \n]{0,80}",
            proptest::collection::vec(
                prop_oneof![
                    Just("The".to_string()),
                    Just("WOW".to_string()),
                    Just("maybe".to_string()),
                    Just("harm".to_string()),
                    Just("good".to_string()),
                    Just("don't".to_string()),
                    Just("!".to_string()),
                    Just(".".to_string()),
                    Just("\u{1f600}".to_string()),
                    Just("\u{0007}".to_string()),
                    "[a-z]{1,9}",
                ],
                0..40,
            )
            .prop_map(|w| w.join(" ")),
        ]
    }

    proptest! {
        #[test]
        fn total_finite_and_bounded(text in any_text()) {
            let cat = FeatureCatalog::nela_open_v1();
            let v = extract_text(&text, &cat, &LexiconSet::starter()).unwrap();
            prop_assert_eq!(v.len(), cat.dimension());
            for (x, e) in v.values.iter().zip(&cat.entries) {
                prop_assert!(x.is_finite(), "{} = {}", e.name, x);
                match e.kind {
                    FeatureKind::Rate | FeatureKind::Diversity => prop_assert!((0.0..=1.0).contains(x), "{} = {}", e.name, x),
                    FeatureKind::PerThousand => prop_assert!((0.0..=1000.0).contains(x), "{} = {}", e.name, x),
                    FeatureKind::NonNegative => prop_assert!(*x >= 0.0, "{} = {}", e.name, x),
                    FeatureKind::Score => {}
                }
            }
        }

        #[test]
        fn doubling_keeps_rates(text in any_text()) {
            let cat = FeatureCatalog::nela_open_v1();
            let lex = LexiconSet::starter();
            let once = extract_text(&text, &cat, &lex).unwrap();
            let twice = extract_text(&format!("{text}\n{text}"), &cat, &lex).unwrap();
            for ((a, b), e) in once.values.iter().zip(&twice.values).zip(&cat.entries) {
                match e.kind {
                    FeatureKind::Rate | FeatureKind::PerThousand => prop_assert!((a - b).abs() <= 1e-12, "{}: {} vs {}", e.name, a, b),
                    FeatureKind::Diversity if e.name == "lexical_diversity" || e.name == "type_token_ratio" => {
                        prop_assert!(*b <= *a + 1e-12, "{}: {} -> {}", e.name, a, b)
                    }
                    _ => {}
                }
            }
        }
    }
}
