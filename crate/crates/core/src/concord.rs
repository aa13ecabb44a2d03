//! Keyword-in-context lines for matches.

use std::str::FromStr;

use serde::Serialize;

use crate::apply::Match;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortKey {
    #[default]
    TextOrder,
    Keyword,
    RightContext,
}

impl FromStr for SortKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(SortKey::TextOrder),
            "keyword" => Ok(SortKey::Keyword),
            "right" => Ok(SortKey::RightContext),
            other => Err(format!("unknown sort key {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConcordLine {
    pub left: String,
    pub keyword: String,
    pub right: String,
    /// Byte offset of the keyword in the source.
    pub offset: usize,
}

pub fn build_concordance(
    text: &str,
    matches: &[Match],
    left_width: usize,
    right_width: usize,
    sort: SortKey,
) -> Vec<ConcordLine> {
    let mut lines: Vec<ConcordLine> = matches
        .iter()
        .map(|m| {
            let before = &text[..m.start];
            let skip = before.chars().count().saturating_sub(left_width);
            let left_start = before.char_indices().nth(skip).map_or(m.start, |(i, _)| i);
            let after = &text[m.end..];
            let right_end = after.char_indices().nth(right_width).map_or(text.len(), |(i, _)| m.end + i);
            ConcordLine {
                left: text[left_start..m.start].to_string(),
                keyword: text[m.start..m.end].to_string(),
                right: text[m.end..right_end].to_string(),
                offset: m.start,
            }
        })
        .collect();
    match sort {
        SortKey::TextOrder => lines.sort_by_key(|l| l.offset),
        SortKey::Keyword => lines.sort_by(|a, b| (&a.keyword, a.offset).cmp(&(&b.keyword, b.offset))),
        SortKey::RightContext => lines.sort_by(|a, b| (&a.right, a.offset).cmp(&(&b.right, b.offset))),
    }
    lines
}

fn flat(s: &str) -> String {
    s.replace('\n', "⏎").replace('\t', " ")
}

/// Aligned text: left context right-aligned to `left_width` characters.
pub fn render_text(lines: &[ConcordLine], left_width: usize) -> String {
    lines
        .iter()
        .map(|l| format!("{:>w$} [{}] {}\n", flat(&l.left), flat(&l.keyword), flat(&l.right), w = left_width))
        .collect()
}

pub fn render_tsv(lines: &[ConcordLine]) -> String {
    lines
        .iter()
        .map(|l| format!("{}\t{}\t{}\t{}\n", l.offset, flat(&l.left), flat(&l.keyword), flat(&l.right)))
        .collect()
}
