//! Machine-readable dictionary and the analyzability test.
//!
//! Dictionary lines look like `surface,lemma.POS+flag+flag`. Lookup and
//! segmentation run on jamo units, so an ending such as `ㅂ니다` can attach to
//! a stem that shares its last syllable (`하` + `ㅂ니다` = `합니다`). In
//! dictionary surfaces a standalone consonant letter stands for that
//! consonant in syllable-final position.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::hangul::{self, Jamo, JamoKind, Unit};
use crate::tokenizer::{Token, TokenClass};

/// Entries carrying this flag are known non-standard forms: they are
/// visible to prefix lookups but never make a token analyzable.
pub const NONSTANDARD_FLAG: &str = "nonstd";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Pos {
    N,
    V,
    #[serde(rename = "ADJ")]
    Adj,
    #[serde(rename = "ADV")]
    Adv,
    #[serde(rename = "DET")]
    Det,
    #[serde(rename = "INTERJ")]
    Interj,
    #[serde(rename = "JOSA")]
    Josa,
    #[serde(rename = "EOMI")]
    Eomi,
    #[serde(rename = "XSV")]
    Xsv,
    #[serde(rename = "PROPER")]
    Proper,
}

impl Pos {
    pub const ALL: [Pos; 10] =
        [Pos::N, Pos::V, Pos::Adj, Pos::Adv, Pos::Det, Pos::Interj, Pos::Josa, Pos::Eomi, Pos::Xsv, Pos::Proper];

    pub fn as_str(&self) -> &'static str {
        match self {
            Pos::N => "N",
            Pos::V => "V",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Det => "DET",
            Pos::Interj => "INTERJ",
            Pos::Josa => "JOSA",
            Pos::Eomi => "EOMI",
            Pos::Xsv => "XSV",
            Pos::Proper => "PROPER",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pos::ALL.iter().find(|p| p.as_str() == s).copied().ok_or_else(|| format!("unknown part of speech {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DictEntry {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub flags: BTreeSet<String>,
}

impl DictEntry {
    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.contains(flag)
    }

    /// Value of a `name=value` flag.
    pub fn flag_value(&self, name: &str) -> Option<&str> {
        self.flags.iter().find_map(|f| f.strip_prefix(name)?.strip_prefix('='))
    }

    pub fn is_standard(&self) -> bool {
        !self.has_flag(NONSTANDARD_FLAG)
    }

    /// Jamo key for a dictionary surface.
    pub fn key(&self) -> Vec<Unit> {
        dictionary_key(&self.surface)
    }
}

impl fmt::Display for DictEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}.{}", self.surface, self.lemma, self.pos)?;
        for flag in &self.flags {
            write!(f, "+{flag}")?;
        }
        Ok(())
    }
}

pub fn dictionary_key(surface: &str) -> Vec<Unit> {
    hangul::to_jamo_seq(surface)
        .into_units()
        .into_iter()
        .map(|u| match u {
            Unit::Jamo(j) if j.kind() == JamoKind::Compat => Jamo::final_from_letter(j.letter()).map_or(u, Unit::Jamo),
            other => other,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("malformed dictionary entries: {}", render_malformed(.0))]
    MalformedEntry(Vec<MalformedLine>),
    #[error("invalid concatenation rule {rule:?}: {reason}")]
    InvalidRule { rule: String, reason: String },
}

fn render_malformed(lines: &[MalformedLine]) -> String {
    lines.iter().map(|m| format!("line {}: {}", m.line, m.reason)).collect::<Vec<_>>().join("; ")
}

impl LexiconError {
    pub fn malformed_lines(&self) -> Vec<usize> {
        match self {
            LexiconError::MalformedEntry(v) => v.iter().map(|m| m.line).collect(),
            LexiconError::InvalidRule { .. } => Vec::new(),
        }
    }
}

pub fn parse_entry(line: &str) -> Result<DictEntry, String> {
    let (surface, rest) = line.split_once(',').ok_or("missing ',' after surface")?;
    if surface.is_empty() {
        return Err("empty surface".into());
    }
    let mut parts = rest.split('+');
    let head = parts.next().unwrap_or_default();
    let (lemma, pos) = head.rsplit_once('.').ok_or("missing '.POS' after lemma")?;
    if lemma.is_empty() {
        return Err("empty lemma".into());
    }
    let pos = pos.parse::<Pos>()?;
    let mut flags = BTreeSet::new();
    for flag in parts {
        if flag.is_empty() {
            return Err("empty flag".into());
        }
        flags.insert(flag.to_string());
    }
    Ok(DictEntry { surface: surface.to_string(), lemma: lemma.to_string(), pos, flags })
}

/// Parses dictionary text. All malformed lines are reported together.
pub fn load_dictionary(source: &str) -> Result<Lexicon, LexiconError> {
    Ok(Lexicon::new(parse_dictionary(source)?))
}

pub fn parse_dictionary(source: &str) -> Result<Vec<DictEntry>, LexiconError> {
    let mut entries = Vec::new();
    let mut bad = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_entry(line) {
            Ok(e) => entries.push(e),
            Err(reason) => bad.push(MalformedLine { line: n + 1, reason }),
        }
    }
    if bad.is_empty() {
        Ok(entries)
    } else {
        Err(LexiconError::MalformedEntry(bad))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quant {
    One,
    Star,
    Plus,
}

/// One admissible POS sequence, e.g. `N JOSA*` or `V EOMI+`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatRule {
    elems: Vec<(Pos, Quant)>,
}

impl ConcatRule {
    pub fn elems(&self) -> &[(Pos, Quant)] {
        &self.elems
    }
}

impl FromStr for ConcatRule {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = |reason: String| LexiconError::InvalidRule { rule: s.to_string(), reason };
        let mut elems = Vec::new();
        for word in s.split_whitespace() {
            let (name, quant) = if let Some(n) = word.strip_suffix('*') {
                (n, Quant::Star)
            } else if let Some(n) = word.strip_suffix('+') {
                (n, Quant::Plus)
            } else {
                (word, Quant::One)
            };
            elems.push((name.parse::<Pos>().map_err(invalid)?, quant));
        }
        if elems.is_empty() {
            return Err(invalid("empty rule".into()));
        }
        Ok(ConcatRule { elems })
    }
}

impl fmt::Display for ConcatRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .elems
            .iter()
            .map(|(p, q)| match q {
                Quant::One => p.to_string(),
                Quant::Star => format!("{p}*"),
                Quant::Plus => format!("{p}+"),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Set of NFA states over the concatenation rules.
pub type RuleState = u128;

/// The table of admissible POS sequences, run as a small NFA.
///
/// For every rule with `m` elements there are states `before(j)` for
/// `j in 0..=m` and `inside(j)` for repeated elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatRules {
    rules: Vec<ConcatRule>,
    offsets: Vec<usize>,
}

pub const DEFAULT_RULES: &[&str] =
    &["N JOSA*", "V EOMI+", "ADJ EOMI+", "N XSV EOMI+", "ADV", "DET", "INTERJ", "PROPER"];

impl Default for ConcatRules {
    fn default() -> Self {
        ConcatRules::parse(DEFAULT_RULES).expect("default rules are valid")
    }
}

impl ConcatRules {
    pub fn new(rules: Vec<ConcatRule>) -> Result<ConcatRules, LexiconError> {
        let mut offsets = Vec::with_capacity(rules.len());
        let mut next = 0;
        for r in &rules {
            offsets.push(next);
            next += 2 * (r.elems.len() + 1);
        }
        if next > RuleState::BITS as usize {
            return Err(LexiconError::InvalidRule {
                rule: rules.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ; "),
                reason: format!("rule table needs {next} states, at most {} supported", RuleState::BITS),
            });
        }
        Ok(ConcatRules { rules, offsets })
    }

    pub fn parse(rules: &[&str]) -> Result<ConcatRules, LexiconError> {
        ConcatRules::new(rules.iter().map(|r| r.parse()).collect::<Result<_, _>>()?)
    }

    pub fn rules(&self) -> &[ConcatRule] {
        &self.rules
    }

    fn before(&self, r: usize, j: usize) -> u32 {
        (self.offsets[r] + 2 * j) as u32
    }

    fn inside(&self, r: usize, j: usize) -> u32 {
        (self.offsets[r] + 2 * j + 1) as u32
    }

    fn closure(&self, mut set: RuleState) -> RuleState {
        for (r, rule) in self.rules.iter().enumerate() {
            for (j, (_, q)) in rule.elems.iter().enumerate() {
                let inside = set & (1 << self.inside(r, j)) != 0;
                let skip = *q == Quant::Star && set & (1 << self.before(r, j)) != 0;
                if inside || skip {
                    set |= 1 << self.before(r, j + 1);
                }
            }
        }
        set
    }

    pub fn start(&self) -> RuleState {
        let set = (0..self.rules.len()).fold(0, |s, r| s | (1 << self.before(r, 0)));
        self.closure(set)
    }

    pub fn step(&self, set: RuleState, pos: Pos) -> RuleState {
        let mut next = 0;
        for (r, rule) in self.rules.iter().enumerate() {
            for (j, &(p, q)) in rule.elems.iter().enumerate() {
                if p != pos {
                    continue;
                }
                let from_before = set & (1 << self.before(r, j)) != 0;
                let from_inside = set & (1 << self.inside(r, j)) != 0;
                match q {
                    Quant::One if from_before => next |= 1 << self.before(r, j + 1),
                    Quant::Star | Quant::Plus if from_before || from_inside => next |= 1 << self.inside(r, j),
                    _ => {}
                }
            }
        }
        self.closure(next)
    }

    pub fn accepts(&self, set: RuleState) -> bool {
        self.rules.iter().enumerate().any(|(r, rule)| set & (1 << self.before(r, rule.elems.len())) != 0)
    }

    pub fn matches(&self, seq: &[Pos]) -> bool {
        let set = seq.iter().fold(self.start(), |s, &p| self.step(s, p));
        self.accepts(set)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    /// Unit range inside the analyzed word.
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub entry: DictEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MorphAnalysis {
    pub segments: Vec<Segment>,
}

impl MorphAnalysis {
    pub fn pos_sequence(&self) -> Vec<Pos> {
        self.segments.iter().map(|s| s.entry.pos).collect()
    }

    fn sort_key(&self) -> (usize, Vec<(&str, Pos, &str)>) {
        (
            self.segments.len(),
            self.segments.iter().map(|s| (s.surface.as_str(), s.entry.pos, s.entry.lemma.as_str())).collect(),
        )
    }
}

impl fmt::Display for MorphAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{}/{}", s.surface, s.entry.pos)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: BTreeMap<Unit, usize>,
    entries: Vec<usize>,
}

const ROOT: usize = 0;

/// Immutable dictionary with a jamo trie over entry keys.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<DictEntry>,
    nodes: Vec<TrieNode>,
    rules: ConcatRules,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::new(Vec::new())
    }
}

impl Lexicon {
    pub fn new(entries: Vec<DictEntry>) -> Lexicon {
        Lexicon::with_rules(entries, ConcatRules::default())
    }

    /// Entries with the same surface, lemma and POS are folded into one
    /// carrying the union of their flags.
    pub fn with_rules(raw: Vec<DictEntry>, rules: ConcatRules) -> Lexicon {
        let mut entries: Vec<DictEntry> = Vec::with_capacity(raw.len());
        let mut index: HashMap<(String, String, Pos), usize> = HashMap::new();
        for e in raw {
            match index.get(&(e.surface.clone(), e.lemma.clone(), e.pos)) {
                Some(&i) => entries[i].flags.extend(e.flags),
                None => {
                    index.insert((e.surface.clone(), e.lemma.clone(), e.pos), entries.len());
                    entries.push(e);
                }
            }
        }
        let mut nodes = vec![TrieNode::default()];
        for (idx, e) in entries.iter().enumerate() {
            let mut node = ROOT;
            for u in e.key() {
                node = match nodes[node].children.get(&u) {
                    Some(&n) => n,
                    None => {
                        nodes.push(TrieNode::default());
                        let n = nodes.len() - 1;
                        nodes[node].children.insert(u, n);
                        n
                    }
                };
            }
            nodes[node].entries.push(idx);
        }
        Lexicon { entries, nodes, rules }
    }

    /// Concatenates the entries of several lexicons, keeping the rules of `self`.
    pub fn merge(self, other: Lexicon) -> Lexicon {
        let mut entries = self.entries;
        entries.extend(other.entries);
        Lexicon::with_rules(entries, self.rules)
    }

    pub fn entries(&self) -> &[DictEntry] {
        &self.entries
    }

    pub fn rules(&self) -> &ConcatRules {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose key is exactly `key` (including non-standard ones).
    pub fn lookup(&self, key: &[Unit]) -> Vec<&DictEntry> {
        let mut node = ROOT;
        for u in key {
            match self.nodes[node].children.get(u) {
                Some(&n) => node = n,
                None => return Vec::new(),
            }
        }
        self.nodes[node].entries.iter().map(|&i| &self.entries[i]).collect()
    }

    /// All entries whose key is a prefix of `units`, with the prefix length,
    /// shortest first.
    pub fn common_prefixes(&self, units: &[Unit]) -> Vec<(usize, &DictEntry)> {
        let mut out = Vec::new();
        let mut node = ROOT;
        for (i, u) in units.iter().enumerate() {
            match self.nodes[node].children.get(u) {
                Some(&n) => node = n,
                None => break,
            }
            out.extend(self.nodes[node].entries.iter().map(|&e| (i + 1, &self.entries[e])));
        }
        out
    }

    pub fn analyze_units(&self, units: &[Unit]) -> Vec<MorphAnalysis> {
        self.analyze_units_with(units, &self.rules)
    }

    /// Every segmentation of `units` into standard entries whose POS sequence
    /// satisfies `rules`, fewest segments first, then lexicographic.
    pub fn analyze_units_with(&self, units: &[Unit], rules: &ConcatRules) -> Vec<MorphAnalysis> {
        if units.is_empty() {
            return Vec::new();
        }
        let mut walk = Walk { lex: self, rules, units, dead: HashSet::new(), path: Vec::new(), out: Vec::new() };
        walk.search(0, rules.start());
        let mut out = walk.out;
        out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        out
    }

    pub fn analyze_str(&self, word: &str) -> Vec<MorphAnalysis> {
        self.analyze_units(hangul::to_jamo_seq(word).units())
    }

    pub fn is_analyzable_str(&self, word: &str) -> bool {
        !self.analyze_str(word).is_empty()
    }

    /// Finds the closest analyzable spellings within `max_edits` jamo edits of
    /// `units`. Returns `(edits, spelling)` pairs for the smallest distance
    /// found, ordered by spelling. Only spellings that recompose into
    /// well-formed Hangul are returned.
    pub fn nearest_analyzable(&self, units: &[Unit], max_edits: usize) -> Vec<(usize, String)> {
        let mut found = BTreeSet::new();
        let mut built = Vec::new();
        self.approx(units, 0, ROOT, self.rules.start(), 0, max_edits, &mut built, &mut found);
        let mut best: Vec<(usize, String)> =
            found.into_iter().filter_map(|(cost, u)| hangul::compose_units(&u).map(|s| (cost, s))).collect();
        if let Some(min) = best.iter().map(|(c, _)| *c).min() {
            best.retain(|(c, _)| *c == min);
        }
        best.sort();
        best.dedup();
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn approx(
        &self,
        target: &[Unit],
        i: usize,
        node: usize,
        state: RuleState,
        cost: usize,
        max: usize,
        built: &mut Vec<Unit>,
        found: &mut BTreeSet<(usize, Vec<Unit>)>,
    ) {
        if node == ROOT && i == target.len() && !built.is_empty() && self.rules.accepts(state) {
            found.insert((cost, built.clone()));
        }
        if node != ROOT {
            for &e in &self.nodes[node].entries {
                let entry = &self.entries[e];
                if !entry.is_standard() {
                    continue;
                }
                let next = self.rules.step(state, entry.pos);
                if next != 0 {
                    self.approx(target, i, ROOT, next, cost, max, built, found);
                }
            }
        }
        for (u, &child) in &self.nodes[node].children {
            built.push(*u);
            if let Some(t) = target.get(i) {
                let c = cost + usize::from(!u.same_letter(t));
                if c <= max {
                    self.approx(target, i + 1, child, state, c, max, built, found);
                }
            }
            if cost < max {
                self.approx(target, i, child, state, cost + 1, max, built, found);
            }
            built.pop();
        }
        if i < target.len() && cost < max {
            self.approx(target, i + 1, node, state, cost + 1, max, built, found);
        }
    }
}

struct Walk<'a> {
    lex: &'a Lexicon,
    rules: &'a ConcatRules,
    units: &'a [Unit],
    dead: HashSet<(usize, RuleState)>,
    path: Vec<(usize, usize, usize)>,
    out: Vec<MorphAnalysis>,
}

impl Walk<'_> {
    fn search(&mut self, i: usize, state: RuleState) -> bool {
        if i == self.units.len() {
            if self.rules.accepts(state) {
                self.emit();
                return true;
            }
            return false;
        }
        if self.dead.contains(&(i, state)) {
            return false;
        }
        let mut any = false;
        let mut node = ROOT;
        for j in i..self.units.len() {
            match self.lex.nodes[node].children.get(&self.units[j]) {
                Some(&n) => node = n,
                None => break,
            }
            for k in 0..self.lex.nodes[node].entries.len() {
                let e = self.lex.nodes[node].entries[k];
                let entry = &self.lex.entries[e];
                if !entry.is_standard() {
                    continue;
                }
                let next = self.rules.step(state, entry.pos);
                if next == 0 {
                    continue;
                }
                self.path.push((i, j + 1, e));
                any |= self.search(j + 1, next);
                self.path.pop();
            }
        }
        if !any {
            self.dead.insert((i, state));
        }
        any
    }

    fn emit(&mut self) {
        let segments = self
            .path
            .iter()
            .map(|&(s, e, idx)| Segment {
                start: s,
                end: e,
                surface: hangul::render_units(&self.units[s..e]),
                entry: self.lex.entries[idx].clone(),
            })
            .collect();
        self.out.push(MorphAnalysis { segments });
    }
}

pub fn analyze_token(token: &Token, lex: &Lexicon) -> Vec<MorphAnalysis> {
    if token.class != TokenClass::Hangul {
        return Vec::new();
    }
    lex.analyze_str(&token.surface)
}

/// Hangul tokens are analyzable when they segment into dictionary morphemes;
/// jamo and symbol runs never are; Latin, digits and punctuation are outside
/// the problem space and always count as analyzable.
pub fn is_analyzable(token: &Token, lex: &Lexicon) -> bool {
    match token.class {
        TokenClass::Hangul => !analyze_token(token, lex).is_empty(),
        TokenClass::Jamo | TokenClass::Symbol => false,
        TokenClass::Latin | TokenClass::Digit | TokenClass::Punct => true,
    }
}
