//! Running compiled grammars over text.
//!
//! Matches start at token starts (or at any character with
//! [`Anchor::Anywhere`]), the longest match wins, ties go to the grammar
//! listed first and then to the earliest path of that grammar. Accepted
//! matches never overlap.

use std::cell::OnceCell;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::fst::{compile_with, CompileError, CompileOptions, Fst, Symbol};
use crate::grammar::{parse_grammar_file, validate, Diagnostic, GrammarError, GrammarLibrary, GraphIR};
use crate::hangul::{self, Unit};
use crate::lexicon::{Lexicon, Pos};
use crate::tokenizer::{tokenize, TokenClass, TokenStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Replace,
    Merge,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "replace" => Ok(Mode::Replace),
            "merge" => Ok(Mode::Merge),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    #[default]
    TokenStart,
    Anywhere,
}

impl FromStr for Anchor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "token" => Ok(Anchor::TokenStart),
            "anywhere" => Ok(Anchor::Anywhere),
            other => Err(format!("unknown anchor {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApplyConfig {
    pub mode: Mode,
    pub anchor: Anchor,
    /// Inside a token the lexicon already analyzes, only paths that begin
    /// with a MASK may match. Keeps standard words such as 넘어요 or
    /// 텔레비전 from being rewritten through a shorter variant prefix.
    pub guard_analyzable: bool,
}

impl Default for ApplyConfig {
    fn default() -> Self {
        ApplyConfig { mode: Mode::Replace, anchor: Anchor::TokenStart, guard_analyzable: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Match {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub output: String,
    pub grammar: String,
    pub tag: String,
}

#[derive(Debug, Error)]
pub enum GrammarLoadError {
    #[error("{file}: {source}")]
    Parse { file: String, source: GrammarError },
    #[error("graph {graph:?} defined in both {first} and {second}")]
    DuplicateGraph { graph: String, first: String, second: String },
    #[error("graph {graph:?} is invalid: {}", join_diagnostics(.diagnostics))]
    Invalid { graph: String, diagnostics: Vec<Diagnostic> },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("priority list must name every loaded grammar exactly once: {0}")]
    Priority(String),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// Tagged grammars compiled and ordered by priority, plus the library of
/// every graph they may call.
#[derive(Debug, Clone, Default)]
pub struct GrammarSet {
    fsts: Vec<Fst>,
    library: GrammarLibrary,
}

impl GrammarSet {
    pub fn new(fsts: Vec<Fst>) -> GrammarSet {
        GrammarSet { fsts, library: GrammarLibrary::new() }
    }

    /// Loads grammar files given as `(file name, contents)` in priority
    /// order. Every graph joins the library; graphs with a TAG are
    /// validated and compiled.
    pub fn from_sources(sources: &[(String, String)], opts: CompileOptions) -> Result<GrammarSet, GrammarLoadError> {
        let mut library = GrammarLibrary::new();
        let mut origin: Vec<(String, String)> = Vec::new();
        let mut tagged: Vec<GraphIR> = Vec::new();
        for (file, text) in sources {
            let graphs =
                parse_grammar_file(text).map_err(|source| GrammarLoadError::Parse { file: file.clone(), source })?;
            for g in graphs {
                if let Some((_, first)) = origin.iter().find(|(n, _)| *n == g.name) {
                    return Err(GrammarLoadError::DuplicateGraph {
                        graph: g.name.clone(),
                        first: first.clone(),
                        second: file.clone(),
                    });
                }
                origin.push((g.name.clone(), file.clone()));
                if g.tag.is_some() {
                    tagged.push(g.clone());
                }
                library.insert(g).map_err(|source| GrammarLoadError::Parse { file: file.clone(), source })?;
            }
        }
        let mut fsts = Vec::with_capacity(tagged.len());
        for g in &tagged {
            let diagnostics = validate(g, &library);
            if !diagnostics.is_empty() {
                return Err(GrammarLoadError::Invalid { graph: g.name.clone(), diagnostics });
            }
            fsts.push(compile_with(g, &library, opts)?);
        }
        Ok(GrammarSet { fsts, library })
    }

    /// Reorders the grammars; `names` must be a permutation of the loaded
    /// grammar names.
    pub fn with_priority(mut self, names: &[String]) -> Result<GrammarSet, GrammarLoadError> {
        let loaded: BTreeSet<&str> = self.fsts.iter().map(|f| f.name.as_str()).collect();
        let given: BTreeSet<&str> = names.iter().map(String::as_str).collect();
        if given.len() != names.len() {
            return Err(GrammarLoadError::Priority("duplicate name".into()));
        }
        if loaded != given {
            let missing: Vec<&str> = loaded.difference(&given).copied().collect();
            let unknown: Vec<&str> = given.difference(&loaded).copied().collect();
            return Err(GrammarLoadError::Priority(format!("missing {missing:?}, unknown {unknown:?}")));
        }
        let mut fsts = std::mem::take(&mut self.fsts);
        self.fsts = names
            .iter()
            .map(|n| {
                let i = fsts.iter().position(|f| &f.name == n).unwrap();
                fsts.remove(i)
            })
            .collect();
        Ok(self)
    }

    pub fn fsts(&self) -> &[Fst] {
        &self.fsts
    }

    pub fn names(&self) -> Vec<&str> {
        self.fsts.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn library(&self) -> &GrammarLibrary {
        &self.library
    }

    pub fn len(&self) -> usize {
        self.fsts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fsts.is_empty()
    }

    /// The grammars whose tag satisfies `keep`, in priority order.
    pub fn select(&self, keep: impl Fn(&str) -> bool) -> GrammarSet {
        GrammarSet {
            fsts: self.fsts.iter().filter(|f| f.tag.as_deref().is_some_and(&keep)).cloned().collect(),
            library: self.library.clone(),
        }
    }
}

struct TokenInfo {
    start: usize,
    end: usize,
    hangul: bool,
    heads: OnceCell<BTreeSet<Pos>>,
}

/// Text decomposed once for matching.
pub struct Prepared<'a> {
    text: &'a str,
    lexicon: &'a Lexicon,
    units: Vec<Unit>,
    /// Byte offset of the character each unit belongs to; one extra entry
    /// for the end of text.
    byte: Vec<usize>,
    scalar_start: Vec<bool>,
    tokens: Vec<TokenInfo>,
    unit_token: Vec<Option<usize>>,
}

impl<'a> Prepared<'a> {
    pub fn new(text: &'a str, lexicon: &'a Lexicon) -> Prepared<'a> {
        Self::with_tokens(text, &tokenize(text), lexicon)
    }

    pub fn with_tokens(text: &'a str, stream: &TokenStream, lexicon: &'a Lexicon) -> Prepared<'a> {
        let seq = hangul::to_jamo_seq(text);
        let n = seq.len();
        let mut byte = vec![0; n + 1];
        let mut scalar_start = vec![false; n + 1];
        let char_starts: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
        let bounds = seq.boundaries();
        for (k, &b) in bounds.iter().enumerate() {
            let next = bounds.get(k + 1).copied().unwrap_or(n);
            scalar_start[b] = true;
            for slot in &mut byte[b..next] {
                *slot = char_starts[k];
            }
        }
        byte[n] = text.len();
        scalar_start[n] = true;

        let unit_of_byte = |off: usize| -> usize {
            match char_starts.binary_search(&off) {
                Ok(k) => bounds[k],
                Err(_) => n,
            }
        };
        let mut unit_token = vec![None; n];
        let tokens: Vec<TokenInfo> = stream
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let start = unit_of_byte(t.start);
                let end = if t.end == text.len() { n } else { unit_of_byte(t.end) };
                for slot in &mut unit_token[start..end] {
                    *slot = Some(i);
                }
                TokenInfo { start, end, hangul: t.class == TokenClass::Hangul, heads: OnceCell::new() }
            })
            .collect();
        Prepared { text, lexicon, units: seq.into_units(), byte, scalar_start, tokens, unit_token }
    }

    pub fn text(&self) -> &'a str {
        self.text
    }

    /// Parts of speech that begin some analysis of the token.
    fn heads(&self, t: usize) -> &BTreeSet<Pos> {
        let info = &self.tokens[t];
        info.heads.get_or_init(|| {
            if !info.hangul {
                return BTreeSet::new();
            }
            let word = &self.text[self.byte[info.start]..self.byte[info.end]];
            self.lexicon.analyze_str(word).iter().filter_map(|a| a.segments.first().map(|s| s.entry.pos)).collect()
        })
    }

    fn analyzable_at(&self, pos: usize) -> bool {
        match self.unit_token.get(pos).copied().flatten() {
            Some(t) => !self.heads(t).is_empty(),
            None => false,
        }
    }

    /// Unit positions where a match may start.
    fn anchors(&self, anchor: Anchor) -> Vec<usize> {
        match anchor {
            Anchor::TokenStart => self.tokens.iter().map(|t| t.start).collect(),
            Anchor::Anywhere => {
                (0..self.units.len()).filter(|&i| self.scalar_start[i] && !self.units[i].is_whitespace()).collect()
            }
        }
    }

    fn byte_to_unit(&self, off: usize) -> Option<usize> {
        (0..=self.units.len()).find(|&i| self.scalar_start[i] && self.byte[i] == off)
    }

    /// Where `sym` leads when read at unit position `pos`.
    fn step(&self, sym: Symbol, pos: usize) -> Option<usize> {
        match sym {
            Symbol::Unit(u) => (self.units.get(pos) == Some(&u)).then_some(pos + 1),
            Symbol::Boundary => {
                let n = self.units[pos..].iter().take_while(|u| u.is_whitespace()).count();
                (n > 0).then_some(pos + n)
            }
            Symbol::Mask(p) => {
                let t = self.unit_token.get(pos).copied().flatten()?;
                let info = &self.tokens[t];
                (info.start == pos && self.heads(t).contains(&p)).then_some(info.end)
            }
        }
    }

    /// For every end position reachable by `fst` from `start`, the output
    /// of the first path in transition order. Sorted by end.
    pub(crate) fn run(&self, fst: &Fst, start: usize, mask_only: bool) -> Vec<(usize, String)> {
        let mut ends: Vec<(usize, String)> = Vec::new();
        let mut visited = HashSet::new();
        let mut output = String::new();
        for t in fst.transitions(fst.initial()) {
            if mask_only && !matches!(t.input, Symbol::Mask(_)) {
                continue;
            }
            if let Some(next) = self.step(t.input, start) {
                output.push_str(&t.output);
                self.dfs(fst, t.to, next, &mut output, &mut visited, &mut ends);
                output.clear();
            }
        }
        ends.retain(|(e, _)| *e > start && self.scalar_start[*e]);
        ends.sort_by_key(|(e, _)| *e);
        ends
    }

    fn dfs(
        &self,
        fst: &Fst,
        state: usize,
        pos: usize,
        output: &mut String,
        visited: &mut HashSet<(usize, usize)>,
        ends: &mut Vec<(usize, String)>,
    ) {
        if !visited.insert((state, pos)) {
            return;
        }
        if fst.is_final(state) && !ends.iter().any(|(e, _)| *e == pos) {
            ends.push((pos, output.clone()));
        }
        for t in fst.transitions(state) {
            if let Some(next) = self.step(t.input, pos) {
                let len = output.len();
                output.push_str(&t.output);
                self.dfs(fst, t.to, next, output, visited, ends);
                output.truncate(len);
            }
        }
    }

    fn make_match(&self, fst: &Fst, start: usize, end: usize, output: String) -> Match {
        let (s, e) = (self.byte[start], self.byte[end]);
        Match {
            start: s,
            end: e,
            surface: self.text[s..e].to_string(),
            output,
            grammar: fst.name.clone(),
            tag: fst.tag.clone().unwrap_or_default(),
        }
    }

    /// Every match of every grammar starting at byte offset `start`, one
    /// per (grammar, end), without the analyzable-token guard.
    pub fn matches_from(&self, grammars: &GrammarSet, start: usize) -> Vec<Match> {
        let Some(u) = self.byte_to_unit(start) else { return Vec::new() };
        let mut out = Vec::new();
        for fst in grammars.fsts() {
            for (end, output) in self.run(fst, u, false) {
                out.push(self.make_match(fst, u, end, output));
            }
        }
        out
    }

    pub fn find_matches(&self, grammars: &GrammarSet, config: &ApplyConfig) -> Vec<Match> {
        let mut out = Vec::new();
        let mut next_free = 0;
        for start in self.anchors(config.anchor) {
            if start < next_free {
                continue;
            }
            let mask_only = config.guard_analyzable && self.analyzable_at(start);
            let mut best: Option<(usize, &Fst, String)> = None;
            for fst in grammars.fsts() {
                if let Some((end, output)) = self.run(fst, start, mask_only).pop() {
                    if best.as_ref().is_none_or(|(e, _, _)| end > *e) {
                        best = Some((end, fst, output));
                    }
                }
            }
            if let Some((end, fst, output)) = best {
                out.push(self.make_match(fst, start, end, output));
                next_free = end;
            }
        }
        out
    }
}

pub fn find_matches(text: &str, grammars: &GrammarSet, lexicon: &Lexicon, config: &ApplyConfig) -> Vec<Match> {
    Prepared::new(text, lexicon).find_matches(grammars, config)
}

pub fn transform(text: &str, matches: &[Match], mode: Mode) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for m in matches {
        out.push_str(&text[pos..m.start]);
        match mode {
            Mode::Replace => out.push_str(&m.output),
            Mode::Merge => out.push_str(&format!("{{{},{}.{}}}", m.surface, m.output, m.tag)),
        }
        pos = m.end;
    }
    out.push_str(&text[pos..]);
    out
}

pub fn normalize(text: &str, grammars: &GrammarSet, lexicon: &Lexicon) -> String {
    let matches = find_matches(text, grammars, lexicon, &ApplyConfig::default());
    transform(text, &matches, Mode::Replace)
}

/// Undoes MERGE output: every `{surface,output.TAG}` becomes `surface`.
/// Braces that do not form a decoration are kept as they are.
pub fn strip_decorations(merged: &str) -> String {
    let mut out = String::with_capacity(merged.len());
    let mut rest = merged;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        match parse_decoration(rest) {
            Some((surface, len)) => {
                out.push_str(surface);
                rest = &rest[len..];
            }
            None => {
                out.push('{');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

// `{surface,output.TAG}`: surface has no `,{}`, output has no `{}`, the tag
// is the text after the last `.` and is made of A-Z, 0-9 and `_`.
fn parse_decoration(s: &str) -> Option<(&str, usize)> {
    let body_end = s[1..].find(['{', '}'])? + 1;
    if !s[body_end..].starts_with('}') {
        return None;
    }
    let body = &s[1..body_end];
    let comma = body.find(',')?;
    let surface = &body[..comma];
    let dot = body.rfind('.')?;
    let tag = &body[dot + 1..];
    let tag_ok = !tag.is_empty() && tag.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_');
    (dot > comma && tag_ok && !surface.is_empty()).then_some((surface, body_end + 1))
}

impl fmt::Display for Match {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{} {} -> {} [{} {}]", self.start, self.end, self.surface, self.output, self.grammar, self.tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::load_dictionary;

    const DICT: &str = "\
효과,효과.N
가,가.JOSA
좋,좋다.ADJ
아요,아요.EOMI
넘,넘다.V
어요,어요.EOMI
너무,너무.ADV
향기,향기.N
";

    const GRAMMARS: &str = "\
GRAPH abbr TAG ABBR
0 INITIAL -> 2
1 FINAL
2 \"넘\" / \"너무\" -> 1
GRAPH loan TAG LOAN
0 INITIAL -> 2
1 FINAL
2 \"초콜렛|초코렛\" / \"초콜릿\" -> 1
";

    fn set() -> GrammarSet {
        GrammarSet::from_sources(&[("g.lgg".into(), GRAMMARS.into())], CompileOptions::default()).unwrap()
    }

    #[test]
    fn replaces_standalone_variant() {
        let lex = load_dictionary(DICT).unwrap();
        assert_eq!(normalize("효과가 넘 좋아요", &set(), &lex), "효과가 너무 좋아요");
        // 넘어요 analyzes, so the guard leaves it alone
        assert_eq!(normalize("넘어요", &set(), &lex), "넘어요");
        let unguarded = ApplyConfig { guard_analyzable: false, ..ApplyConfig::default() };
        assert_eq!(find_matches("넘어요", &set(), &lex, &unguarded).len(), 1);
    }

    #[test]
    fn token_prefix_match() {
        let lex = load_dictionary(DICT).unwrap();
        let m = find_matches("초콜렛향기", &set(), &lex, &ApplyConfig::default());
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].start, m[0].end, m[0].surface.as_str()), (0, 9, "초콜렛"));
        assert_eq!(m[0].tag, "LOAN");
    }

    #[test]
    fn merge_and_strip() {
        let lex = load_dictionary(DICT).unwrap();
        let text = "효과가 넘 좋아요 {x} {a,b}";
        let m = find_matches(text, &set(), &lex, &ApplyConfig::default());
        let merged = transform(text, &m, Mode::Merge);
        assert_eq!(merged, "효과가 {넘,너무.ABBR} 좋아요 {x} {a,b}");
        assert_eq!(strip_decorations(&merged), text);
    }

    #[test]
    fn no_matches_is_identity() {
        let lex = load_dictionary(DICT).unwrap();
        assert_eq!(normalize("", &set(), &lex), "");
        assert_eq!(normalize("효과가  좋아요\n", &set(), &lex), "효과가  좋아요\n");
    }

    #[test]
    fn anywhere_anchor_reaches_inside_tokens() {
        let lex = load_dictionary(DICT).unwrap();
        let cfg = ApplyConfig { anchor: Anchor::Anywhere, ..ApplyConfig::default() };
        let m = find_matches("맛초코렛", &set(), &lex, &cfg);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].start, 3);
        assert!(find_matches("맛초코렛", &set(), &lex, &ApplyConfig::default()).is_empty());
    }

    #[test]
    fn longest_then_priority() {
        let lex = Lexicon::default();
        let src = "\
GRAPH a TAG A
0 INITIAL -> 2
1 FINAL
2 \"가\" / \"1\" -> 1
GRAPH b TAG B
0 INITIAL -> 2
1 FINAL
2 \"가나|가\" / \"2\" -> 1
GRAPH c TAG C
0 INITIAL -> 2
1 FINAL
2 \"가나\" / \"3\" -> 1
";
        let set = GrammarSet::from_sources(&[("x".into(), src.into())], CompileOptions::default()).unwrap();
        let m = find_matches("가나", &set, &lex, &ApplyConfig::default());
        assert_eq!((m[0].grammar.as_str(), m[0].output.as_str()), ("b", "2"));
        let set = set.with_priority(&["c".into(), "a".into(), "b".into()]).unwrap();
        assert_eq!(find_matches("가나", &set, &lex, &ApplyConfig::default())[0].grammar, "c");
        assert_eq!(find_matches("가", &set, &lex, &ApplyConfig::default())[0].grammar, "a");
    }

    #[test]
    fn priority_must_cover_all() {
        assert!(set().with_priority(&["abbr".into()]).is_err());
        assert!(set().with_priority(&["abbr".into(), "loan".into(), "x".into()]).is_err());
        assert_eq!(set().with_priority(&["loan".into(), "abbr".into()]).unwrap().names(), vec!["loan", "abbr"]);
    }

    #[test]
    fn mask_consumes_a_token() {
        let lex = load_dictionary(DICT).unwrap();
        let src = "GRAPH m TAG M\n0 INITIAL -> 2\n1 FINAL\n2 <N> -> 3\n3 \" 넘\" / \"!\" -> 1\n";
        let set = GrammarSet::from_sources(&[("m".into(), src.into())], CompileOptions::default()).unwrap();
        let m = find_matches("효과가 넘", &set, &lex, &ApplyConfig::default());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface, "효과가 넘");
        assert_eq!(m[0].output, "!");
    }

    #[test]
    fn invalid_grammar_reported() {
        let src = "GRAPH e TAG E\n0 INITIAL -> 2\n1 FINAL\n2 <E> -> 1\n";
        let err = GrammarSet::from_sources(&[("e".into(), src.into())], CompileOptions::default()).unwrap_err();
        assert!(matches!(err, GrammarLoadError::Invalid { .. }));
    }
}
