#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use lggnorm::apply::{Anchor, ApplyConfig, GrammarSet};
use lggnorm::fst::{enumerate_paths_ordered, CompileOptions, Symbol};
use lggnorm::grammar::{parse_grammar_file, validate, GrammarLibrary, GraphIR};
use lggnorm::hangul::{to_jamo_seq, Unit};
use lggnorm::lexicon::{load_dictionary, Lexicon};
use lggnorm::tokenizer::{tokenize, TokenClass};
use rand::seq::SliceRandom;
use rand::Rng;

/// Textbook Levenshtein over arbitrary items.
pub fn levenshtein<T>(a: &[T], b: &[T], eq: impl Fn(&T, &T) -> bool) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    d[0] = (0..=b.len()).collect();
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(!eq(&a[i - 1], &b[j - 1]));
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Random text over a mix of scripts, whitespace and symbols.
pub fn random_text(rng: &mut impl Rng, max_chars: usize) -> String {
    let n = rng.gen_range(0..=max_chars);
    (0..n)
        .map(|_| match rng.gen_range(0..10) {
            0..=3 => char::from_u32(rng.gen_range(0xAC00..=0xD7A3)).unwrap(),
            4 => char::from_u32(rng.gen_range(0x3131..=0x318E)).unwrap(),
            5 => *[' ', '\n', '\t', '\u{3000}'].choose(rng).unwrap(),
            6 => rng.gen_range('a'..='z'),
            7 => rng.gen_range('0'..='9'),
            8 => *['.', '!', '?', ',', '^', '~', '*', '_', '@', '{', '}'].choose(rng).unwrap(),
            _ => char::from_u32(rng.gen_range(0x20..0x3000)).unwrap_or('x'),
        })
        .collect()
}

// ---------------------------------------------------------------- graphs

const LITERALS: &[&str] = &["가", "나", "다", "가나", "ㅋ", "각", "a", "가 나", "!"];
const OUTPUTS: &[&str] = &["", "x", "y", "가", "zz"];
const MASKS: &[&str] = &["<N>", "<JOSA>", "<ADV>"];

fn random_label(rng: &mut impl Rng, callee: Option<&str>, allow_mask: bool) -> String {
    match rng.gen_range(0..12) {
        0 => "<E>".to_string(),
        1 if allow_mask => MASKS.choose(rng).unwrap().to_string(),
        2 if callee.is_some() => format!(":{}", callee.unwrap()),
        _ => {
            let k = rng.gen_range(1..=3);
            let alts: Vec<&str> = (0..k).map(|_| *LITERALS.choose(rng).unwrap()).collect();
            format!("\"{}\"", alts.join("|"))
        }
    }
}

/// Text of one graph: INITIAL 0, FINAL 1, plain boxes 2.. in topological
/// order. With `cyclic`, boxes may also point back to earlier boxes.
fn graph_text(
    rng: &mut impl Rng,
    name: &str,
    tag: Option<&str>,
    callee: Option<&str>,
    allow_mask: bool,
    cyclic: bool,
) -> String {
    let n = rng.gen_range(1..=6u32);
    let ids: Vec<u32> = (2..2 + n).collect();
    let mut out = match tag {
        Some(t) => format!("GRAPH {name} TAG {t}\n"),
        None => format!("GRAPH {name}\n"),
    };
    let mut init: BTreeSet<u32> = BTreeSet::new();
    init.insert(2);
    for &id in &ids[1..] {
        if rng.gen_bool(0.4) {
            init.insert(id);
        }
    }
    let mut has_pred: HashSet<u32> = init.iter().copied().collect();
    let mut lines = Vec::new();
    for (k, &id) in ids.iter().enumerate() {
        let label = random_label(rng, callee, allow_mask);
        let mut succ: BTreeSet<u32> = BTreeSet::new();
        for &later in &ids[k + 1..] {
            if rng.gen_bool(0.35) {
                succ.insert(later);
            }
        }
        if cyclic && rng.gen_bool(0.2) {
            succ.insert(ids[rng.gen_range(0..=k)]);
        }
        if succ.iter().all(|&s| s <= id) || rng.gen_bool(0.5) {
            succ.insert(1);
        }
        if k + 1 < ids.len() && !has_pred.contains(&ids[k + 1]) {
            succ.insert(ids[k + 1]);
        }
        has_pred.extend(succ.iter().copied());
        let output = if rng.gen_bool(0.5) { format!(" / \"{}\"", OUTPUTS.choose(rng).unwrap()) } else { String::new() };
        let succ: Vec<String> = succ.iter().map(|s| s.to_string()).collect();
        lines.push(format!("{id} {label}{output} -> {}", succ.join(",")));
    }
    let init: Vec<String> = init.iter().map(|s| s.to_string()).collect();
    out.push_str(&format!("0 INITIAL -> {}\n1 FINAL\n", init.join(",")));
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

pub struct RandomGrammar {
    pub text: String,
    pub graph: GraphIR,
    pub library: GrammarLibrary,
}

/// A random grammar file with one tagged graph and, sometimes, one
/// library graph it calls. Regenerated until it validates cleanly.
pub fn random_grammar(rng: &mut impl Rng, name: &str, allow_mask: bool, cyclic: bool) -> RandomGrammar {
    loop {
        let with_sub = rng.gen_bool(0.3);
        let sub_name = format!("{name}_sub");
        let mut text = graph_text(rng, name, Some("T"), with_sub.then_some(sub_name.as_str()), allow_mask, cyclic);
        if with_sub {
            text.push_str(&graph_text(rng, &sub_name, None, None, allow_mask, cyclic));
        }
        let graphs = parse_grammar_file(&text).unwrap_or_else(|e| panic!("generated text must parse: {e}\n{text}"));
        let library = GrammarLibrary::from_graphs(graphs.clone()).unwrap();
        let graph = graphs[0].clone();
        if validate(&graph, &library).is_empty() {
            return RandomGrammar { text, graph, library };
        }
    }
}

// ---------------------------------------------------------------- matching oracle

pub const SMALL_DICT: &str = "\
가,가.N
나,나.N
가나,가나.N
다,다.JOSA
각,각.ADV
";

pub fn small_lexicon() -> Lexicon {
    load_dictionary(SMALL_DICT).unwrap()
}

pub fn random_sentence(rng: &mut impl Rng) -> String {
    const WORDS: &[&str] =
        &["가", "나", "다", "가나", "가다", "나다", "ㅋㅋ", "각", "가가", "a", "!", "가나다", "각다"];
    let n = rng.gen_range(0..=6);
    let mut s = String::new();
    for i in 0..n {
        if i > 0 {
            s.push_str([" ", " ", "  ", "\n"].choose(rng).unwrap());
        }
        s.push_str(WORDS.choose(rng).unwrap());
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMatch {
    pub start: usize,
    pub end: usize,
    pub output: String,
    pub grammar: usize,
}

struct Unitized {
    units: Vec<Unit>,
    byte: Vec<usize>,
    char_start: Vec<bool>,
    /// (first unit, end unit, analyzable, head POS names)
    tokens: Vec<(usize, usize, bool, BTreeSet<String>)>,
}

fn unitize(text: &str, lex: &Lexicon) -> Unitized {
    let mut units = Vec::new();
    let mut byte = Vec::new();
    let mut char_start = Vec::new();
    for (off, ch) in text.char_indices() {
        let mut buf = [0u8; 4];
        let us = to_jamo_seq(ch.encode_utf8(&mut buf)).into_units();
        for (k, u) in us.into_iter().enumerate() {
            units.push(u);
            byte.push(off);
            char_start.push(k == 0);
        }
    }
    byte.push(text.len());
    char_start.push(true);
    let unit_at = |b: usize| byte.iter().zip(&char_start).position(|(&x, &s)| s && x == b).unwrap();
    let tokens = tokenize(text)
        .iter()
        .map(|t| {
            let heads: BTreeSet<String> = if t.class == TokenClass::Hangul {
                lex.analyze_str(&t.surface).iter().map(|a| a.segments[0].entry.pos.to_string()).collect()
            } else {
                BTreeSet::new()
            };
            (unit_at(t.start), unit_at(t.end), !heads.is_empty(), heads)
        })
        .collect();
    Unitized { units, byte, char_start, tokens }
}

/// Where `path` ends when read from unit `start`, if it can be read.
fn read_path(u: &Unitized, path: &[Symbol], start: usize) -> Option<usize> {
    let mut pos = start;
    for sym in path {
        pos = match sym {
            Symbol::Unit(x) => {
                if u.units.get(pos) != Some(x) {
                    return None;
                }
                pos + 1
            }
            Symbol::Boundary => {
                let n = u.units[pos..].iter().take_while(|x| x.is_whitespace()).count();
                if n == 0 {
                    return None;
                }
                pos + n
            }
            Symbol::Mask(p) => {
                let t = u.tokens.iter().find(|t| t.0 == pos)?;
                if !t.3.contains(p.as_str()) {
                    return None;
                }
                t.1
            }
        };
    }
    Some(pos)
}

/// Leftmost-longest matching by exhaustive path enumeration: at every
/// anchor, every path of every grammar is tried; the longest wins, then
/// the earlier grammar, then the earlier path.
pub fn oracle_matches(
    text: &str,
    grammars: &[(GraphIR, GrammarLibrary)],
    lex: &Lexicon,
    cfg: &ApplyConfig,
) -> Vec<OracleMatch> {
    let u = unitize(text, lex);
    let budget = u.units.len();
    let paths: Vec<Vec<(Vec<Symbol>, String)>> = grammars
        .iter()
        .map(|(g, lib)| enumerate_paths_ordered(g, lib, budget).into_iter().map(|(s, o)| (s.0, o)).collect())
        .collect();
    let anchors: Vec<usize> = match cfg.anchor {
        Anchor::TokenStart => u.tokens.iter().map(|t| t.0).collect(),
        Anchor::Anywhere => (0..u.units.len()).filter(|&i| u.char_start[i] && !u.units[i].is_whitespace()).collect(),
    };
    let mut out = Vec::new();
    let mut next_free = 0;
    for p in anchors {
        if p < next_free {
            continue;
        }
        let guarded = cfg.guard_analyzable && u.tokens.iter().any(|t| t.0 <= p && p < t.1 && t.2);
        let mut best: Option<(usize, usize, String)> = None;
        for (gi, gp) in paths.iter().enumerate() {
            for (syms, output) in gp {
                if guarded && !matches!(syms.first(), Some(Symbol::Mask(_))) {
                    continue;
                }
                let Some(e) = read_path(&u, syms, p) else { continue };
                if e <= p || !u.char_start[e] {
                    continue;
                }
                if best.as_ref().is_none_or(|(be, _, _)| e > *be) {
                    best = Some((e, gi, output.clone()));
                }
            }
        }
        if let Some((e, gi, output)) = best {
            out.push(OracleMatch { start: u.byte[p], end: u.byte[e], output, grammar: gi });
            next_free = e;
        }
    }
    out
}

pub fn grammar_set(grammars: &[RandomGrammar]) -> GrammarSet {
    let sources: Vec<(String, String)> =
        grammars.iter().enumerate().map(|(i, g)| (format!("{i:02}.lgg"), g.text.clone())).collect();
    GrammarSet::from_sources(&sources, CompileOptions::default()).unwrap()
}

/// Runs one random leftmost-longest case; returns a description of the
/// first disagreement.
pub fn leftmost_longest_case(rng: &mut impl Rng) -> Result<(), String> {
    let lex = small_lexicon();
    let k = rng.gen_range(1..=3);
    let grammars: Vec<RandomGrammar> = (0..k).map(|i| random_grammar(rng, &format!("g{i}"), true, false)).collect();
    let set = grammar_set(&grammars);
    let text = random_sentence(rng);
    let cfg = ApplyConfig {
        anchor: if rng.gen_bool(0.5) { Anchor::TokenStart } else { Anchor::Anywhere },
        guard_analyzable: rng.gen_bool(0.7),
        ..ApplyConfig::default()
    };
    let found = lggnorm::apply::find_matches(&text, &set, &lex, &cfg);
    let pairs: Vec<(GraphIR, GrammarLibrary)> = grammars.iter().map(|g| (g.graph.clone(), g.library.clone())).collect();
    let expected = oracle_matches(&text, &pairs, &lex, &cfg);
    let found: Vec<OracleMatch> = found
        .iter()
        .map(|m| OracleMatch {
            start: m.start,
            end: m.end,
            output: m.output.clone(),
            grammar: grammars.iter().position(|g| g.graph.name == m.grammar).unwrap(),
        })
        .collect();
    if found == expected {
        Ok(())
    } else {
        let texts: Vec<&str> = grammars.iter().map(|g| g.text.as_str()).collect();
        Err(format!(
            "text {text:?} cfg {cfg:?}\ngrammars:\n{}\nexpected {expected:?}\nfound    {found:?}",
            texts.join("\n")
        ))
    }
}
