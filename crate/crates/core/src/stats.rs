//! Corpus size, type count and share of non-analyzable types.

use std::collections::HashSet;

use serde::Serialize;
use serde_json::json;

use crate::lexicon::{is_analyzable, Lexicon};
use crate::tokenizer::{type_key, TokenStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusStats {
    pub token_count: usize,
    pub type_count: usize,
    pub non_analyzable_types: usize,
    /// Percentage of types that do not analyze.
    pub non_analyzable_ratio: f64,
    pub empty: bool,
}

impl CorpusStats {
    pub fn from_counts(token_count: usize, type_count: usize, non_analyzable_types: usize) -> CorpusStats {
        let empty = type_count == 0;
        let ratio = if empty { 0.0 } else { 100.0 * non_analyzable_types as f64 / type_count as f64 };
        CorpusStats { token_count, type_count, non_analyzable_types, non_analyzable_ratio: ratio, empty }
    }

    /// Ratio with one decimal place.
    pub fn pct(&self) -> String {
        format!("{:.1}", self.non_analyzable_ratio)
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "corpus_size\t{}\ntypes\t{}\nnon_analyzable_types\t{}\nnon_analyzable_pct\t{}\n",
            self.token_count,
            self.type_count,
            self.non_analyzable_types,
            self.pct()
        )
    }

    fn json_fields(&self) -> serde_json::Value {
        json!({
            "corpus_size": self.token_count,
            "types": self.type_count,
            "non_analyzable_types": self.non_analyzable_types,
            "non_analyzable_pct": round1(self.non_analyzable_ratio),
            "empty": self.empty,
        })
    }

    pub fn to_json(&self) -> String {
        let mut v = self.json_fields();
        v["schema"] = json!(1);
        serde_json::to_string_pretty(&v).expect("plain values") + "\n"
    }
}

fn round1(x: f64) -> f64 {
    format!("{x:.1}").parse().expect("formatted float")
}

pub fn corpus_stats(stream: &TokenStream, lexicon: &Lexicon) -> CorpusStats {
    let mut seen = HashSet::new();
    let mut non_analyzable = 0;
    for t in stream {
        if seen.insert(type_key(t)) && !is_analyzable(t, lexicon) {
            non_analyzable += 1;
        }
    }
    CorpusStats::from_counts(stream.len(), seen.len(), non_analyzable)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deltas {
    pub token_count: i64,
    pub type_count: i64,
    pub non_analyzable_types: i64,
    /// Difference in percentage points.
    pub non_analyzable_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub labels: [String; 2],
    pub a: CorpusStats,
    pub b: CorpusStats,
    /// `b - a`
    pub delta: Deltas,
}

pub fn compare(a: CorpusStats, b: CorpusStats) -> ComparisonReport {
    compare_labeled("A", a, "B", b)
}

pub fn compare_labeled(label_a: &str, a: CorpusStats, label_b: &str, b: CorpusStats) -> ComparisonReport {
    let d = |x: usize, y: usize| y as i64 - x as i64;
    ComparisonReport {
        labels: [label_a.to_string(), label_b.to_string()],
        a,
        b,
        delta: Deltas {
            token_count: d(a.token_count, b.token_count),
            type_count: d(a.type_count, b.type_count),
            non_analyzable_types: d(a.non_analyzable_types, b.non_analyzable_types),
            non_analyzable_ratio: b.non_analyzable_ratio - a.non_analyzable_ratio,
        },
    }
}

impl ComparisonReport {
    pub fn to_tsv(&self) -> String {
        let (a, b, d) = (&self.a, &self.b, &self.delta);
        format!(
            "metric\t{}\t{}\tdelta\n\
             corpus_size\t{}\t{}\t{:+}\n\
             types\t{}\t{}\t{:+}\n\
             non_analyzable_types\t{}\t{}\t{:+}\n\
             non_analyzable_pct\t{}\t{}\t{:+.1}\n",
            self.labels[0],
            self.labels[1],
            a.token_count,
            b.token_count,
            d.token_count,
            a.type_count,
            b.type_count,
            d.type_count,
            a.non_analyzable_types,
            b.non_analyzable_types,
            d.non_analyzable_types,
            a.pct(),
            b.pct(),
            d.non_analyzable_ratio
        )
    }

    pub fn to_json(&self) -> String {
        let mut ca = self.a.json_fields();
        ca["label"] = json!(self.labels[0]);
        let mut cb = self.b.json_fields();
        cb["label"] = json!(self.labels[1]);
        let v = json!({
            "schema": 1,
            "corpora": [ca, cb],
            "delta": {
                "corpus_size": self.delta.token_count,
                "types": self.delta.type_count,
                "non_analyzable_types": self.delta.non_analyzable_types,
                "non_analyzable_pct": round1(self.delta.non_analyzable_ratio),
            },
        });
        serde_json::to_string_pretty(&v).expect("plain values") + "\n"
    }
}
