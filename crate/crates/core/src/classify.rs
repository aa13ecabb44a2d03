//! Sorting non-analyzable tokens into the six kinds of non-standard word.
//!
//! Detectors run in a fixed order (emoticon, abbreviation, neologism,
//! loanword variant, spacing, deviant spelling). Every detector that fires
//! becomes a candidate; the first one is the primary category.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::apply::{GrammarSet, Match, Prepared};
use crate::hangul::{self, jamo_edit_distance};
use crate::lexicon::{dictionary_key, is_analyzable, ConcatRules, DictEntry, Lexicon};
use crate::tokenizer::{type_census, type_key, Token, TokenClass, TokenStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Spacing,
    Abbreviation,
    DeviantSpelling,
    LoanwordVariant,
    Neologism,
    Emoticon,
    Unknown,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Spacing,
        Category::Abbreviation,
        Category::DeviantSpelling,
        Category::LoanwordVariant,
        Category::Neologism,
        Category::Emoticon,
        Category::Unknown,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Spacing => "SPACING",
            Category::Abbreviation => "ABBREVIATION",
            Category::DeviantSpelling => "DEVIANT_SPELLING",
            Category::LoanwordVariant => "LOANWORD_VARIANT",
            Category::Neologism => "NEOLOGISM",
            Category::Emoticon => "EMOTICON",
            Category::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown category {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    /// Maximum jamo edits between a token prefix and a listed loanword.
    pub loan: usize,
    /// Maximum jamo edits between a token and an analyzable spelling.
    pub deviant: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { loan: 2, deviant: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub category: Category,
    pub evidence: String,
    pub suggestion: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationResult {
    pub token: Token,
    pub primary: Category,
    pub candidates: Vec<Candidate>,
    pub suggestion: Option<String>,
}

impl ClassificationResult {
    pub fn evidence(&self) -> &str {
        self.candidates.first().map(|c| c.evidence.as_str()).unwrap_or("")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("token {0:?} is analyzable")]
    PreconditionViolated(String),
}

const EMOTICON_CHARS: &[char] = &['ㅋ', 'ㅎ', 'ㅠ', 'ㅜ', 'ㅇ', '_'];

/// Evidence and optional suggestion from one detector.
type Detection = Option<(String, Option<String>)>;

/// Grammars used for classification, split by tag.
pub struct Classifier<'a> {
    lexicon: &'a Lexicon,
    thresholds: Thresholds,
    emoticon: GrammarSet,
    abbr: GrammarSet,
    neo: GrammarSet,
    loan: GrammarSet,
    deviant: GrammarSet,
    suffix_rules: ConcatRules,
    loanwords: Vec<&'a DictEntry>,
}

impl<'a> Classifier<'a> {
    pub fn new(lexicon: &'a Lexicon, grammars: &GrammarSet, thresholds: Thresholds) -> Classifier<'a> {
        Classifier {
            lexicon,
            thresholds,
            emoticon: grammars.select(|t| t.starts_with("EMOTICON")),
            abbr: grammars.select(|t| t == "ABBR"),
            neo: grammars.select(|t| t == "NEO"),
            loan: grammars.select(|t| t == "LOAN"),
            deviant: grammars.select(|t| t == "DEVIANT"),
            suffix_rules: ConcatRules::parse(&["XSV EOMI+"]).expect("static rule"),
            loanwords: lexicon.entries().iter().filter(|e| e.has_flag("loan") && e.is_standard()).collect(),
        }
    }

    pub fn classify(&self, token: &Token) -> Result<ClassificationResult, ClassifyError> {
        if is_analyzable(token, self.lexicon) {
            return Err(ClassifyError::PreconditionViolated(token.surface.clone()));
        }
        let word = token.surface.as_str();
        let prepared = Prepared::new(word, self.lexicon);
        let mut candidates = Vec::new();
        let detectors: [(Category, &dyn Fn() -> Detection); 6] = [
            (Category::Emoticon, &|| self.emoticon(token, &prepared)),
            (Category::Abbreviation, &|| self.abbreviation(word, &prepared)),
            (Category::Neologism, &|| self.neologism(word, &prepared)),
            (Category::LoanwordVariant, &|| self.loanword(word, &prepared)),
            (Category::Spacing, &|| self.spacing(word)),
            (Category::DeviantSpelling, &|| self.deviant(word, &prepared)),
        ];
        for (category, detect) in detectors {
            if let Some((evidence, suggestion)) = detect() {
                let suggestion = suggestion.filter(|s| s != word);
                candidates.push(Candidate { category, evidence, suggestion });
            }
        }
        let (primary, suggestion) = match candidates.first() {
            Some(c) => (c.category, c.suggestion.clone()),
            None => (Category::Unknown, None),
        };
        Ok(ClassificationResult { token: token.clone(), primary, candidates, suggestion })
    }

    fn emoticon(&self, token: &Token, prepared: &Prepared) -> Detection {
        if !matches!(token.class, TokenClass::Jamo | TokenClass::Symbol) {
            return None;
        }
        if token.surface.chars().all(|c| EMOTICON_CHARS.contains(&c)) {
            return Some(("emoticon letters".into(), None));
        }
        let whole = prepared.matches_from(&self.emoticon, 0).into_iter().find(|m| m.end == token.surface.len())?;
        Some((format!("grammar {}", whole.grammar), None))
    }

    fn abbreviation(&self, word: &str, prepared: &Prepared) -> Detection {
        if let Some(m) = longest(prepared.matches_from(&self.abbr, 0)) {
            return Some((format!("grammar {}", m.grammar), Some(format!("{}{}", m.output, &word[m.end..]))));
        }
        let (entry, end) = self.flagged_prefix(word, "abbr")?;
        let exp = entry.flag_value("exp").unwrap_or(&entry.lemma).replace('_', " ");
        Some((format!("dictionary {}", entry.surface), Some(format!("{exp}{}", &word[end..]))))
    }

    fn neologism(&self, word: &str, prepared: &Prepared) -> Detection {
        if let Some(m) = longest(prepared.matches_from(&self.neo, 0)) {
            return Some((format!("grammar {}", m.grammar), Some(format!("{}{}", m.output, &word[m.end..]))));
        }
        if let Some((entry, end)) = self.flagged_prefix(word, "neo") {
            let std = entry.flag_value("std").unwrap_or(&entry.lemma).replace('_', " ");
            return Some((format!("dictionary {}", entry.surface), Some(format!("{std}{}", &word[end..]))));
        }
        // unknown root followed by a verbalizing suffix and endings
        for (i, _) in word.char_indices().skip(1) {
            let root = &word[..i];
            let has_root = self.lexicon.lookup(&dictionary_key(root)).iter().any(|e| e.is_standard());
            if has_root {
                continue;
            }
            let rest = hangul::to_jamo_seq(&word[i..]).into_units();
            if !self.lexicon.analyze_units_with(&rest, &self.suffix_rules).is_empty() {
                return Some((format!("unknown root {root} + XSV + EOMI"), None));
            }
        }
        None
    }

    fn loanword(&self, word: &str, prepared: &Prepared) -> Detection {
        if let Some(m) = longest(prepared.matches_from(&self.loan, 0)) {
            return Some((format!("grammar {}", m.grammar), Some(format!("{}{}", m.output, &word[m.end..]))));
        }
        // closest listed loanword to a prefix of at least two syllables
        let mut best: Option<(usize, std::cmp::Reverse<usize>, &DictEntry)> = None;
        let ends = word.char_indices().skip(2).map(|(i, _)| i).chain([word.len()]);
        for end in ends.filter(|&e| word[..e].chars().count() >= 2) {
            let prefix = &word[..end];
            for &e in &self.loanwords {
                let d = jamo_edit_distance(prefix, &e.surface);
                if d == 0 || d > self.thresholds.loan {
                    continue;
                }
                let key = (d, std::cmp::Reverse(end), e);
                if best.as_ref().is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                    best = Some(key);
                }
            }
        }
        let (d, std::cmp::Reverse(end), e) = best?;
        Some((format!("{d} edits from {}", e.surface), Some(format!("{}{}", e.surface, &word[end..]))))
    }

    fn spacing(&self, word: &str) -> Detection {
        let cuts: Vec<usize> = word.char_indices().map(|(i, _)| i).chain([word.len()]).collect();
        let ends = self.split(word, &cuts, 0, &mut HashMap::new())?;
        if ends.len() < 2 {
            return None;
        }
        let mut start = 0;
        let mut words = Vec::new();
        for e in ends {
            words.push(&word[start..e]);
            start = e;
        }
        Some((format!("{} words", words.len()), Some(words.join(" "))))
    }

    /// Fewest analyzable pieces covering `word[cuts[k]..]`, as the end
    /// offsets of the pieces; longer earlier pieces win ties.
    fn split(
        &self,
        word: &str,
        cuts: &[usize],
        k: usize,
        memo: &mut HashMap<usize, Option<Vec<usize>>>,
    ) -> Option<Vec<usize>> {
        if let Some(r) = memo.get(&k) {
            return r.clone();
        }
        let last = cuts.len() - 1;
        let mut best: Option<Vec<usize>> = None;
        for j in (k + 1..=last).rev() {
            if !self.lexicon.is_analyzable_str(&word[cuts[k]..cuts[j]]) {
                continue;
            }
            let rest = if j == last { Some(Vec::new()) } else { self.split(word, cuts, j, memo) };
            if let Some(mut r) = rest {
                r.insert(0, cuts[j]);
                if best.as_ref().is_none_or(|b| r.len() < b.len()) {
                    best = Some(r);
                }
            }
        }
        memo.insert(k, best.clone());
        best
    }

    fn deviant(&self, word: &str, prepared: &Prepared) -> Detection {
        for (i, _) in word.char_indices() {
            let hit = prepared.matches_from(&self.deviant, i).into_iter().find(|m| m.end == word.len());
            if let Some(m) = hit {
                return Some((format!("grammar {}", m.grammar), Some(format!("{}{}", &word[..i], m.output))));
            }
        }
        let units = hangul::to_jamo_seq(word).into_units();
        let (d, s) = self.lexicon.nearest_analyzable(&units, self.thresholds.deviant).into_iter().next()?;
        Some((format!("{d} edits from {s}"), Some(s)))
    }

    /// Longest dictionary entry carrying `flag` whose surface is a prefix of
    /// `word` ending on a character boundary.
    fn flagged_prefix(&self, word: &str, flag: &str) -> Option<(&'a DictEntry, usize)> {
        let ends = word.char_indices().skip(1).map(|(i, _)| i).chain([word.len()]);
        let mut best = None;
        for end in ends {
            let lexicon: &'a Lexicon = self.lexicon;
            if let Some(e) = lexicon.lookup(&dictionary_key(&word[..end])).into_iter().find(|e| e.has_flag(flag)) {
                best = Some((e, end));
            }
        }
        best
    }
}

fn longest(matches: Vec<Match>) -> Option<Match> {
    // first of the longest, keeping grammar priority
    let max = matches.iter().map(|m| m.end).max()?;
    matches.into_iter().find(|m| m.end == max)
}

pub fn classify_token(
    token: &Token,
    lexicon: &Lexicon,
    grammars: &GrammarSet,
    thresholds: Thresholds,
) -> Result<ClassificationResult, ClassifyError> {
    Classifier::new(lexicon, grammars, thresholds).classify(token)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusClassification {
    pub results: Vec<ClassificationResult>,
    pub counts: BTreeMap<Category, usize>,
}

impl CorpusClassification {
    /// `surface<TAB>category<TAB>suggestion<TAB>evidence` per type.
    pub fn to_tsv(&self) -> String {
        self.results
            .iter()
            .map(|r| {
                format!(
                    "{}\t{}\t{}\t{}\n",
                    r.token.surface,
                    r.primary,
                    r.suggestion.as_deref().unwrap_or(""),
                    r.evidence()
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let counts: serde_json::Map<String, serde_json::Value> = Category::ALL
            .iter()
            .map(|cat| (cat.to_string(), json!(self.counts.get(cat).copied().unwrap_or(0))))
            .collect();
        let results: Vec<_> = self
            .results
            .iter()
            .map(|r| {
                json!({
                    "surface": r.token.surface,
                    "class": r.token.class,
                    "category": r.primary,
                    "suggestion": r.suggestion,
                    "candidates": r.candidates,
                })
            })
            .collect();
        serde_json::to_string_pretty(&json!({"schema": 1, "results": results, "counts": counts})).expect("plain values")
            + "\n"
    }
}

/// Classifies each non-analyzable Hangul, jamo or symbol type once, in
/// type-key order.
pub fn classify_corpus(
    stream: &TokenStream,
    lexicon: &Lexicon,
    grammars: &GrammarSet,
    thresholds: Thresholds,
) -> CorpusClassification {
    let classifier = Classifier::new(lexicon, grammars, thresholds);
    let mut first: HashMap<String, &Token> = HashMap::new();
    for t in stream {
        first.entry(type_key(t)).or_insert(t);
    }
    let mut results = Vec::new();
    let mut counts = BTreeMap::new();
    for key in type_census(stream).keys() {
        let t = first[key];
        if !matches!(t.class, TokenClass::Hangul | TokenClass::Jamo | TokenClass::Symbol) {
            continue;
        }
        if let Ok(r) = classifier.classify(t) {
            *counts.entry(r.primary).or_insert(0) += 1;
            results.push(r);
        }
    }
    CorpusClassification { results, counts }
}
