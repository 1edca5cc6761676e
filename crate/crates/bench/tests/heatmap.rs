use newsbench::emit_heatmap;

fn values(svg: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    doc.descendants()
        .filter(|n| n.attribute("class") == Some("value"))
        .map(|n| n.text().unwrap_or_default().to_string())
        .collect()
}

#[test]
fn identity_matrix_has_ones_on_the_diagonal() {
    let svg = emit_heatmap(&[vec![1.0, 0.0], vec![0.0, 1.0]], &["reliable", "unreliable"], "t").unwrap();
    assert_eq!(values(&svg), ["1.00", "0.00", "0.00", "1.00"]);
}

#[test]
fn half_split_row_is_annotated() {
    let svg = emit_heatmap(&[vec![0.5, 0.5], vec![0.0, 1.0]], &["A", "B"], "t").unwrap();
    let v = values(&svg);
    assert_eq!(&v[..2], ["0.50", "0.50"]);
}

#[test]
fn structure_and_escaping() {
    let svg = emit_heatmap(&[vec![0.25, 0.75], vec![0.0, 0.0]], &["a<b", "c&d"], "x \"y\"").unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    let cells: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("cell")).collect();
    assert_eq!(cells.len(), 4);
    assert_eq!(cells[0].attribute("fill"), Some("rgb(191,191,191)"));
    assert_eq!(cells[2].attribute("fill"), Some("rgb(255,255,255)"));
    let texts: Vec<&str> = doc.descendants().filter_map(|n| n.text()).collect();
    for want in ["true", "predicted", "a<b", "c&d", "x \"y\""] {
        assert!(texts.contains(&want), "missing {want}");
    }
}

#[test]
fn bad_input_is_rejected() {
    assert!(emit_heatmap(&[vec![1.0, 0.0]], &["a", "b"], "").is_err());
    assert!(emit_heatmap(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], &["a", "b"], "").is_err());
    assert!(emit_heatmap(&[vec![1.0, 0.0], vec![0.0, 1.0]], &["a"], "").is_err());
    assert!(emit_heatmap(&[vec![0.7, 0.7], vec![0.0, 1.0]], &["a", "b"], "").is_err());
}
