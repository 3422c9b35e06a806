//! Aligned plain-text rendering of a ranking.

use std::fmt::Write;

use blade_core::kb::KnowledgeBase;
use blade_core::mcdm::RankingResult;

fn width(s: &str) -> usize {
    s.chars().count()
}

fn pad(s: &str, w: usize) -> String {
    let mut out = s.to_owned();
    out.extend(std::iter::repeat_n(' ', w.saturating_sub(width(s))));
    out
}

/// Rows of cells, first row the header. Numeric columns are right-aligned.
fn grid(rows: &[Vec<String>], right: &[bool]) -> String {
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols).map(|c| rows.iter().map(|r| width(&r[c])).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if right[c] {
                    format!("{}{cell}", " ".repeat(widths[c] - width(cell)))
                } else {
                    pad(cell, widths[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "─".repeat(*w)).collect();
            let _ = writeln!(out, "{}", rule.join("  "));
        }
    }
    out
}

pub fn ranking(result: &RankingResult, kb: &KnowledgeBase) -> String {
    let name = |id: &str| kb.profile(id).map_or_else(|| id.to_owned(), |p| p.name.clone());
    let mut out = String::new();
    if result.ranked.is_empty() {
        out.push_str("no platform survives the strict requirements\n");
    } else {
        let mut rows = vec![vec!["rank".to_owned(), "platform".to_owned(), "id".to_owned(), "score".to_owned()]];
        for (i, r) in result.ranked.iter().enumerate() {
            rows.push(vec![(i + 1).to_string(), name(&r.id), r.id.clone(), format!("{:.4}", r.score)]);
        }
        out.push_str(&grid(&rows, &[true, false, false, true]));
    }
    if !result.eliminations.is_empty() {
        out.push_str("\neliminated\n");
        for e in &result.eliminations {
            for v in &e.violated {
                let _ = writeln!(out, "  {} · {}: {}", name(&e.alternative), v.requirement, v.explanation);
            }
        }
    }
    let _ = writeln!(out, "\nkb version {}, {} scalarization", result.provenance.kb_version, result.provenance.scalarization);
    out
}
