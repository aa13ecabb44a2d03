//! Differential tests against independent, slow implementations.

mod common;

use std::collections::BTreeSet;

use lggnorm::fst::{compile, enumerate_paths};
use lggnorm::hangul::{
    compose_syllable, decompose_syllable, from_jamo_seq, jamo_edit_distance, to_jamo_seq, Jamo, JamoKind, Unit,
};
use lggnorm::lexicon::{dictionary_key, parse_dictionary, ConcatRules, Lexicon, Pos};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use regex::Regex;
use unicode_normalization::UnicodeNormalization;

use common::*;

#[test]
fn syllables_agree_with_canonical_decomposition() {
    for cp in 0xAC00u32..=0xD7A3 {
        let ch = char::from_u32(cp).unwrap();
        let nfd: Vec<char> = ch.to_string().nfd().collect();
        let (l, v, t) = decompose_syllable(ch).unwrap();
        let mine: Vec<char> = [Some(l), Some(v), t].into_iter().flatten().map(|j| j.codepoint()).collect();
        assert_eq!(mine, nfd, "{ch}");
        let nfc: String = nfd.iter().collect::<String>().nfc().collect();
        assert_eq!(compose_syllable(l, v, t).unwrap().to_string(), nfc);
    }
}

#[test]
fn positional_jamo_codepoints_follow_conjoining_blocks() {
    for i in 0..19 {
        assert_eq!(Jamo::initial(i).unwrap().codepoint() as u32, 0x1100 + i);
    }
    for i in 0..21 {
        assert_eq!(Jamo::medial(i).unwrap().codepoint() as u32, 0x1161 + i);
    }
    for i in 1..28 {
        assert_eq!(Jamo::final_(i).unwrap().codepoint() as u32, 0x11A7 + i);
    }
}

#[test]
fn edit_distance_matches_textbook_levenshtein() {
    let mut rng = StdRng::seed_from_u64(11);
    let letter = |u: &Unit| match u {
        Unit::Jamo(j) => Ok(j.letter()),
        Unit::Char(c) => Err(*c),
    };
    for _ in 0..2_000 {
        let a = random_text(&mut rng, 6);
        let b = random_text(&mut rng, 6);
        let (ua, ub) = (to_jamo_seq(&a).into_units(), to_jamo_seq(&b).into_units());
        let want = levenshtein(&ua, &ub, |x, y| {
            let same_kind_class = matches!((x, y), (Unit::Jamo(p), Unit::Jamo(q))
                if (p.kind() == JamoKind::Compat) == (q.kind() == JamoKind::Compat));
            match (letter(x), letter(y)) {
                (Ok(p), Ok(q)) => same_kind_class && p == q,
                (Err(p), Err(q)) => p == q,
                _ => false,
            }
        });
        assert_eq!(jamo_edit_distance(&a, &b), want, "{a:?} {b:?}");
    }
}

#[test]
fn round_trip_on_random_strings() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..5_000 {
        let s = random_text(&mut rng, 20);
        assert_eq!(from_jamo_seq(&to_jamo_seq(&s)).unwrap(), s);
    }
}

// ---------------------------------------------------------------- lexicon

const POS_LETTERS: &[(Pos, char)] = &[
    (Pos::N, 'n'),
    (Pos::V, 'v'),
    (Pos::Adj, 'a'),
    (Pos::Adv, 'd'),
    (Pos::Det, 't'),
    (Pos::Interj, 'i'),
    (Pos::Proper, 'p'),
    (Pos::Josa, 'j'),
    (Pos::Eomi, 'e'),
    (Pos::Xsv, 'x'),
];

fn letter_of(p: Pos) -> char {
    POS_LETTERS.iter().find(|(q, _)| *q == p).unwrap().1
}

fn rule_atoms(rule: &str) -> Vec<(char, &str)> {
    rule.split_whitespace()
        .map(|tok| match tok.strip_suffix('*').or_else(|| tok.strip_suffix('+')) {
            Some(n) => (letter_of(n.parse().unwrap()), &tok[n.len()..]),
            None => (letter_of(tok.parse().unwrap()), ""),
        })
        .collect()
}

/// The rule list as one regular expression over POS letters.
fn rules_regex(rules: &[&str]) -> Regex {
    let alts: Vec<String> =
        rules.iter().map(|r| rule_atoms(r).iter().map(|(c, q)| format!("{c}{q}")).collect()).collect();
    Regex::new(&format!("^(?:{})$", alts.join("|"))).unwrap()
}

/// Strings that can still be extended to a match of `rules_regex`: some
/// rule's first k-1 atoms in full, then a partial k-th atom.
fn prefix_regex(rules: &[&str]) -> Regex {
    let mut alts = vec![String::new()];
    for r in rules {
        let atoms = rule_atoms(r);
        for k in 0..atoms.len() {
            let mut a: String = atoms[..k].iter().map(|(c, q)| format!("{c}{q}")).collect();
            a.push(atoms[k].0);
            a.push(if atoms[k].1.is_empty() { '?' } else { '*' });
            alts.push(a);
        }
    }
    Regex::new(&format!("^(?:{})$", alts.join("|"))).unwrap()
}

type Reading = (usize, usize, Pos, String);

/// Every split of `units` into dictionary keys found by linear lookup,
/// keeping POS strings that can still satisfy a rule.
fn brute_force(
    units: &[Unit],
    entries: &[lggnorm::lexicon::DictEntry],
    full: &Regex,
    viable: &Regex,
) -> BTreeSet<Vec<Reading>> {
    struct Scan<'a> {
        units: &'a [Unit],
        keyed: Vec<(Vec<Unit>, &'a lggnorm::lexicon::DictEntry)>,
        full: &'a Regex,
        viable: &'a Regex,
        path: Vec<Reading>,
        letters: String,
        out: BTreeSet<Vec<Reading>>,
    }
    impl Scan<'_> {
        fn go(&mut self, i: usize) {
            if i == self.units.len() {
                if self.full.is_match(&self.letters) {
                    self.out.insert(self.path.clone());
                }
                return;
            }
            for j in i + 1..=self.units.len() {
                for k in 0..self.keyed.len() {
                    let (key, e) = &self.keyed[k];
                    if e.has_flag("nonstd") || key[..] != self.units[i..j] {
                        continue;
                    }
                    let (pos, lemma) = (e.pos, e.lemma.clone());
                    self.letters.push(letter_of(pos));
                    if self.viable.is_match(&self.letters) {
                        self.path.push((i, j, pos, lemma));
                        self.go(j);
                        self.path.pop();
                    }
                    self.letters.pop();
                }
            }
        }
    }
    let keyed = entries.iter().map(|e| (dictionary_key(&e.surface), e)).collect();
    let mut scan = Scan { units, keyed, full, viable, path: Vec::new(), letters: String::new(), out: BTreeSet::new() };
    if !units.is_empty() {
        scan.go(0);
    }
    scan.out
}

fn random_dictionary(rng: &mut StdRng) -> String {
    const PIECES: &[&str] = &["가", "나", "다", "강", "ㄴ", "ㅆ", "어", "요", "하", "해"];
    let n = rng.gen_range(1..=200);
    let mut out = String::new();
    let mut seen = BTreeSet::new();
    for _ in 0..n {
        let len = rng.gen_range(1..=3);
        let surface: String = (0..len).map(|_| *PIECES.choose(rng).unwrap()).collect();
        let pos = POS_LETTERS.choose(rng).unwrap().0;
        let flag = if rng.gen_bool(0.1) { "+nonstd" } else { "" };
        let lemma = if rng.gen_bool(0.2) { format!("{surface}다") } else { surface.clone() };
        // same-key lines would fold their flags together
        if seen.insert((surface.clone(), lemma.clone(), pos)) {
            out.push_str(&format!("{surface},{lemma}.{pos}{flag}\n"));
        }
    }
    out
}

#[test]
fn trie_analysis_matches_brute_force_scan() {
    let mut rng = StdRng::seed_from_u64(13);
    let rule_sets: &[&[&str]] = &[
        &["N JOSA*", "V EOMI+", "ADJ EOMI+", "N XSV EOMI+", "ADV", "DET", "INTERJ", "PROPER"],
        &["N* V EOMI+", "ADV+", "JOSA* N"],
        &["N N JOSA"],
    ];
    let mut analyzed = 0;
    for round in 0..300 {
        let dict = random_dictionary(&mut rng);
        let entries = parse_dictionary(&dict).unwrap();
        let rules = rule_sets[round % rule_sets.len()];
        let lex = Lexicon::with_rules(entries.clone(), ConcatRules::parse(rules).unwrap());
        let (full, viable) = (rules_regex(rules), prefix_regex(rules));
        for _ in 0..10 {
            let word: String = (0..rng.gen_range(1..=6))
                .map(|_| *["가", "나", "다", "강", "갔", "했", "어", "요", "간", "해"].choose(&mut rng).unwrap())
                .collect();
            let units = to_jamo_seq(&word).into_units();
            let got = lex.analyze_units(&units);
            let got_set: BTreeSet<Vec<(usize, usize, Pos, String)>> = got
                .iter()
                .map(|a| a.segments.iter().map(|s| (s.start, s.end, s.entry.pos, s.entry.lemma.clone())).collect())
                .collect();
            assert_eq!(got_set.len(), got.len(), "duplicate analyses of {word}");
            analyzed += usize::from(!got.is_empty());
            assert_eq!(got_set, brute_force(&units, &entries, &full, &viable), "{word}\n{dict}");
            assert!(got.windows(2).all(|w| w[0].segments.len() <= w[1].segments.len()));
        }
    }
    assert!(analyzed > 100, "only {analyzed} words analyzed");
}

// ---------------------------------------------------------------- fst

#[test]
fn compiled_relation_equals_enumerated_paths() {
    let mut rng = StdRng::seed_from_u64(14);
    for i in 0..300 {
        let cyclic = i % 3 == 0;
        let g = random_grammar(&mut rng, "r", true, cyclic);
        let fst = compile(&g.graph, &g.library).unwrap_or_else(|e| panic!("{e}\n{}", g.text));
        let budget = if cyclic { 6 } else { 16 };
        assert_eq!(fst.relation(budget), enumerate_paths(&g.graph, &g.library, budget), "\n{}", g.text);
    }
}

#[test]
fn compile_is_deterministic_for_random_graphs() {
    let mut rng = StdRng::seed_from_u64(15);
    for _ in 0..100 {
        let g = random_grammar(&mut rng, "r", true, true);
        assert_eq!(compile(&g.graph, &g.library).unwrap().dump(), compile(&g.graph, &g.library).unwrap().dump());
    }
}

#[test]
fn leftmost_longest_agrees_with_exhaustive_search() {
    let mut rng = StdRng::seed_from_u64(16);
    for _ in 0..300 {
        if let Err(e) = leftmost_longest_case(&mut rng) {
            panic!("{e}");
        }
    }
}
