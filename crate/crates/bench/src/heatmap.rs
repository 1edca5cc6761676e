//! Standalone SVG rendering of a 2×2 normalized confusion matrix.

use std::fmt::Write;

use newsbench_core::{Error, Result};

const CELL: f64 = 100.0;
const LEFT: f64 = 130.0;
const TOP: f64 = 80.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Rows are true classes, columns predictions. Each cell is filled with a
/// gray whose darkness equals the cell value (0 white, 1 black) and
/// annotated to two decimals.
pub fn emit_heatmap(matrix: &[Vec<f64>], labels: &[&str], title: &str) -> Result<String> {
    if matrix.len() != 2 || matrix.iter().any(|r| r.len() != 2) {
        let shape: Vec<usize> = matrix.iter().map(Vec::len).collect();
        return Err(Error::InvalidParam(format!("heatmap needs a 2x2 matrix, got row lengths {shape:?}")));
    }
    if labels.len() != 2 {
        return Err(Error::InvalidParam(format!("heatmap needs 2 labels, got {}", labels.len())));
    }
    for row in matrix {
        let sum: f64 = row.iter().sum();
        let in_range = row.iter().all(|v| (0.0..=1.0 + 1e-9).contains(v));
        if !in_range || !(sum.abs() < 1e-9 || (sum - 1.0).abs() < 1e-9) {
            return Err(Error::InvalidParam(format!(
                "heatmap rows must be normalized or all zero, got {row:?}"
            )));
        }
    }

    let width = LEFT + 2.0 * CELL + 20.0;
    let height = TOP + 2.0 * CELL + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text class="axis" x="{}" y="42" text-anchor="middle" font-size="13">predicted</text>"#,
        LEFT + CELL
    );
    let _ = writeln!(
        s,
        r#"<text class="axis" x="20" y="{y}" text-anchor="middle" font-size="13" transform="rotate(-90 20 {y})">true</text>"#,
        y = TOP + CELL
    );
    for (j, label) in labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text class="label" x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            LEFT + (j as f64 + 0.5) * CELL,
            TOP - 10.0,
            escape(label)
        );
    }
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text class="label" x="{}" y="{}" text-anchor="end" font-size="12">{}</text>"#,
            LEFT - 8.0,
            TOP + (i as f64 + 0.5) * CELL + 4.0,
            escape(label)
        );
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let v = v.clamp(0.0, 1.0);
            let level = (255.0 * (1.0 - v)).round() as u8;
            let ink = if v > 0.5 { "white" } else { "black" };
            let (x, y) = (LEFT + j as f64 * CELL, TOP + i as f64 * CELL);
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({level},{level},{level})" stroke="black"/>"#
            );
            let _ = writeln!(
                s,
                r#"<text class="value" x="{}" y="{}" text-anchor="middle" font-size="16" fill="{ink}">{v:.2}</text>"#,
                x + CELL / 2.0,
                y + CELL / 2.0 + 6.0
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
