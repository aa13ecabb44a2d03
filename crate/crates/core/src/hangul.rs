//! Hangul syllable and jamo arithmetic.
//!
//! Precomposed syllables (U+AC00..=U+D7A3) are split into positional jamo
//! (initial, medial, optional final). Standalone compatibility jamo
//! (U+3131..=U+318E) are kept as their own kind and never unify with the
//! positional forms. Everything else passes through untouched.

use std::fmt;

use thiserror::Error;

const SYLLABLE_BASE: u32 = 0xAC00;
const SYLLABLE_LAST: u32 = 0xD7A3;
const INITIAL_BASE: u32 = 0x1100;
const MEDIAL_BASE: u32 = 0x1161;
const FINAL_BASE: u32 = 0x11A7;
const COMPAT_FIRST: u32 = 0x3131;
const COMPAT_LAST: u32 = 0x318E;

const INITIAL_COUNT: u8 = 19;
const MEDIAL_COUNT: u8 = 21;
const FINAL_COUNT: u8 = 28;
const PER_INITIAL: u32 = MEDIAL_COUNT as u32 * FINAL_COUNT as u32;

const INITIAL_LETTERS: [char; 19] =
    ['ㄱ', 'ㄲ', 'ㄴ', 'ㄷ', 'ㄸ', 'ㄹ', 'ㅁ', 'ㅂ', 'ㅃ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅉ', 'ㅊ', 'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ'];

// index 0 is "no final" and never materializes as a Jamo
const FINAL_LETTERS: [char; 28] = [
    '\0', 'ㄱ', 'ㄲ', 'ㄳ', 'ㄴ', 'ㄵ', 'ㄶ', 'ㄷ', 'ㄹ', 'ㄺ', 'ㄻ', 'ㄼ', 'ㄽ', 'ㄾ', 'ㄿ', 'ㅀ', 'ㅁ', 'ㅂ', 'ㅄ',
    'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅊ', 'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

const MEDIAL_LETTER_BASE: u32 = 0x314F;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HangulError {
    #[error("{0:?} (U+{cp:04X}) is not a precomposed Hangul syllable", cp = *.0 as u32)]
    NotHangulSyllable(char),
    #[error("{kind:?} jamo index {index} is out of range")]
    IndexOutOfRange { kind: JamoKind, index: u32 },
    #[error("expected a {expected:?} jamo, got {got:?}")]
    WrongKind { expected: JamoKind, got: JamoKind },
    #[error("jamo units starting at index {at} do not form a syllable or standalone character")]
    InvalidJamoGrouping { at: usize },
    #[error("syllable boundaries must be strictly increasing, start at 0 and stay below the unit count")]
    InvalidBoundaries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JamoKind {
    Initial,
    Medial,
    Final,
    Compat,
}

/// A single jamo. Positional jamo carry their slot index within a syllable;
/// compatibility jamo carry their offset from U+3131.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jamo {
    kind: JamoKind,
    index: u8,
}

impl Jamo {
    pub fn initial(index: u32) -> Result<Jamo, HangulError> {
        Self::checked(JamoKind::Initial, index, 0, INITIAL_COUNT as u32 - 1)
    }

    pub fn medial(index: u32) -> Result<Jamo, HangulError> {
        Self::checked(JamoKind::Medial, index, 0, MEDIAL_COUNT as u32 - 1)
    }

    /// Final consonant, index 1..=27. Index 0 means "no final" and is
    /// represented by `None` at call sites.
    pub fn final_(index: u32) -> Result<Jamo, HangulError> {
        Self::checked(JamoKind::Final, index, 1, FINAL_COUNT as u32 - 1)
    }

    pub fn compat(ch: char) -> Option<Jamo> {
        let cp = ch as u32;
        (COMPAT_FIRST..=COMPAT_LAST)
            .contains(&cp)
            .then(|| Jamo { kind: JamoKind::Compat, index: (cp - COMPAT_FIRST) as u8 })
    }

    /// The final-position jamo spelled by a compatibility consonant letter, if
    /// that consonant can close a syllable (ㄸ, ㅃ and ㅉ cannot).
    pub fn final_from_letter(letter: char) -> Option<Jamo> {
        FINAL_LETTERS
            .iter()
            .skip(1)
            .position(|&c| c == letter)
            .map(|i| Jamo { kind: JamoKind::Final, index: i as u8 + 1 })
    }

    fn checked(kind: JamoKind, index: u32, lo: u32, hi: u32) -> Result<Jamo, HangulError> {
        if (lo..=hi).contains(&index) {
            Ok(Jamo { kind, index: index as u8 })
        } else {
            Err(HangulError::IndexOutOfRange { kind, index })
        }
    }

    pub fn kind(&self) -> JamoKind {
        self.kind
    }

    pub fn index(&self) -> u32 {
        self.index as u32
    }

    /// The Unicode scalar of this jamo: conjoining jamo (U+1100 block) for
    /// positional kinds, the compatibility letter itself for `Compat`.
    pub fn codepoint(&self) -> char {
        let cp = match self.kind {
            JamoKind::Initial => INITIAL_BASE + self.index as u32,
            JamoKind::Medial => MEDIAL_BASE + self.index as u32,
            JamoKind::Final => FINAL_BASE + self.index as u32,
            JamoKind::Compat => COMPAT_FIRST + self.index as u32,
        };
        char::from_u32(cp).expect("jamo codepoints are valid scalars")
    }

    /// The letter as it would be written standalone (ㄱ, ㅏ, ...).
    pub fn letter(&self) -> char {
        match self.kind {
            JamoKind::Initial => INITIAL_LETTERS[self.index as usize],
            JamoKind::Medial => char::from_u32(MEDIAL_LETTER_BASE + self.index as u32).expect("valid medial letter"),
            JamoKind::Final => FINAL_LETTERS[self.index as usize],
            JamoKind::Compat => self.codepoint(),
        }
    }
}

impl fmt::Display for Jamo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One element of a [`JamoSeq`]: a jamo, or a character that is not Hangul.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unit {
    Jamo(Jamo),
    Char(char),
}

impl Unit {
    pub fn is_whitespace(&self) -> bool {
        matches!(self, Unit::Char(c) if c.is_whitespace())
    }

    /// Comparison key used by edit distance: positional jamo compare by the
    /// letter they spell (initial ㅁ and final ㅁ are the same letter), while
    /// compatibility jamo and passthrough characters stay in their own classes.
    fn letter_key(&self) -> (u8, char) {
        match self {
            Unit::Jamo(j) if j.kind == JamoKind::Compat => (1, j.letter()),
            Unit::Jamo(j) => (0, j.letter()),
            Unit::Char(c) => (2, *c),
        }
    }

    pub fn same_letter(&self, other: &Unit) -> bool {
        self.letter_key() == other.letter_key()
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Jamo(j) => write!(f, "{j}"),
            Unit::Char(c) => write!(f, "{c}"),
        }
    }
}

pub fn is_syllable(ch: char) -> bool {
    (SYLLABLE_BASE..=SYLLABLE_LAST).contains(&(ch as u32))
}

pub fn is_compat_jamo(ch: char) -> bool {
    (COMPAT_FIRST..=COMPAT_LAST).contains(&(ch as u32))
}

pub fn decompose_syllable(ch: char) -> Result<(Jamo, Jamo, Option<Jamo>), HangulError> {
    if !is_syllable(ch) {
        return Err(HangulError::NotHangulSyllable(ch));
    }
    let offset = ch as u32 - SYLLABLE_BASE;
    let initial = Jamo { kind: JamoKind::Initial, index: (offset / PER_INITIAL) as u8 };
    let medial = Jamo { kind: JamoKind::Medial, index: ((offset / FINAL_COUNT as u32) % MEDIAL_COUNT as u32) as u8 };
    let fin = (offset % FINAL_COUNT as u32) as u8;
    let fin = (fin != 0).then_some(Jamo { kind: JamoKind::Final, index: fin });
    Ok((initial, medial, fin))
}

pub fn compose_syllable(initial: Jamo, medial: Jamo, fin: Option<Jamo>) -> Result<char, HangulError> {
    expect_kind(&initial, JamoKind::Initial)?;
    expect_kind(&medial, JamoKind::Medial)?;
    let t = match fin {
        Some(j) => {
            expect_kind(&j, JamoKind::Final)?;
            j.index as u32
        }
        None => 0,
    };
    let cp = SYLLABLE_BASE + initial.index as u32 * PER_INITIAL + medial.index as u32 * FINAL_COUNT as u32 + t;
    Ok(char::from_u32(cp).expect("composed syllable lies in the Hangul block"))
}

fn expect_kind(j: &Jamo, expected: JamoKind) -> Result<(), HangulError> {
    if j.kind == expected {
        Ok(())
    } else {
        Err(HangulError::WrongKind { expected, got: j.kind })
    }
}

/// A string decomposed into jamo units, remembering where each source
/// character started.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct JamoSeq {
    units: Vec<Unit>,
    boundaries: Vec<usize>,
}

impl JamoSeq {
    pub fn new(units: Vec<Unit>, boundaries: Vec<usize>) -> Result<JamoSeq, HangulError> {
        let ok = match boundaries.first() {
            None => units.is_empty(),
            Some(&first) => {
                first == 0 && boundaries.windows(2).all(|w| w[0] < w[1]) && *boundaries.last().unwrap() < units.len()
            }
        };
        if ok {
            Ok(JamoSeq { units, boundaries })
        } else {
            Err(HangulError::InvalidBoundaries)
        }
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn into_units(self) -> Vec<Unit> {
        self.units
    }

    fn push_char(&mut self, ch: char) {
        self.boundaries.push(self.units.len());
        if let Ok((l, v, t)) = decompose_syllable(ch) {
            self.units.push(Unit::Jamo(l));
            self.units.push(Unit::Jamo(v));
            if let Some(t) = t {
                self.units.push(Unit::Jamo(t));
            }
        } else if let Some(j) = Jamo::compat(ch) {
            self.units.push(Unit::Jamo(j));
        } else {
            self.units.push(Unit::Char(ch));
        }
    }
}

impl fmt::Display for JamoSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for u in &self.units {
            write!(f, "{u}")?;
        }
        Ok(())
    }
}

pub fn to_jamo_seq(s: &str) -> JamoSeq {
    let mut seq = JamoSeq::default();
    for ch in s.chars() {
        seq.push_char(ch);
    }
    seq
}

pub fn from_jamo_seq(j: &JamoSeq) -> Result<String, HangulError> {
    let mut out = String::new();
    let b = &j.boundaries;
    for (k, &start) in b.iter().enumerate() {
        let end = b.get(k + 1).copied().unwrap_or(j.units.len());
        out.push(compose_group(&j.units[start..end]).ok_or(HangulError::InvalidJamoGrouping { at: start })?);
    }
    Ok(out)
}

fn compose_group(group: &[Unit]) -> Option<char> {
    match group {
        [Unit::Char(c)] => Some(*c),
        [Unit::Jamo(j)] if j.kind == JamoKind::Compat => Some(j.codepoint()),
        [Unit::Jamo(l), Unit::Jamo(v)] => compose_syllable(*l, *v, None).ok(),
        [Unit::Jamo(l), Unit::Jamo(v), Unit::Jamo(t)] => compose_syllable(*l, *v, Some(*t)).ok(),
        _ => None,
    }
}

/// Recomposes a bare unit sequence whose syllable boundaries are unknown.
/// Returns `None` when some positional jamo cannot be placed in a syllable.
pub fn compose_units(units: &[Unit]) -> Option<String> {
    let mut out = String::new();
    let mut i = 0;
    while i < units.len() {
        let (ch, used) = syllable_at(units, i).or_else(|| match units[i] {
            Unit::Char(c) => Some((c, 1)),
            Unit::Jamo(j) if j.kind == JamoKind::Compat => Some((j.codepoint(), 1)),
            Unit::Jamo(_) => None,
        })?;
        out.push(ch);
        i += used;
    }
    Some(out)
}

/// Like [`compose_units`], but stray positional jamo are written as their
/// standalone letters instead of failing. Used for display only.
pub fn render_units(units: &[Unit]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < units.len() {
        if let Some((ch, used)) = syllable_at(units, i) {
            out.push(ch);
            i += used;
        } else {
            out.push_str(&units[i].to_string());
            i += 1;
        }
    }
    out
}

fn syllable_at(units: &[Unit], i: usize) -> Option<(char, usize)> {
    let (Unit::Jamo(l), Some(Unit::Jamo(v))) = (units[i], units.get(i + 1).copied()) else {
        return None;
    };
    if l.kind != JamoKind::Initial || v.kind != JamoKind::Medial {
        return None;
    }
    // a final belongs to this syllable unless it is followed by a medial,
    // which can only happen for malformed input since finals never start one
    match units.get(i + 2) {
        Some(Unit::Jamo(t)) if t.kind == JamoKind::Final => Some((compose_syllable(l, v, Some(*t)).ok()?, 3)),
        _ => Some((compose_syllable(l, v, None).ok()?, 2)),
    }
}

/// Levenshtein distance with unit costs over jamo units.
pub fn jamo_edit_distance(a: &str, b: &str) -> usize {
    unit_edit_distance(to_jamo_seq(a).units(), to_jamo_seq(b).units())
}

pub fn unit_edit_distance(a: &[Unit], b: &[Unit]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ua) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, ub) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(!ua.same_letter(ub));
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letters(s: &str) -> String {
        to_jamo_seq(s).units().iter().map(|u| u.to_string()).collect()
    }

    #[test]
    fn first_syllable_is_all_zero() {
        let (l, v, t) = decompose_syllable('가').unwrap();
        assert_eq!((l.index(), v.index(), t), (0, 0, None));
        assert_eq!(l.letter(), 'ㄱ');
        assert_eq!(v.letter(), 'ㅏ');
    }

    #[test]
    fn han_decomposes() {
        // 한 = U+D55C; offset 10588 = 18*588 + 0*28 + 4
        let (l, v, t) = decompose_syllable('한').unwrap();
        assert_eq!((l.letter(), v.letter(), t.map(|j| j.letter())), ('ㅎ', 'ㅏ', Some('ㄴ')));
        assert_eq!((l.index(), v.index(), t.unwrap().index()), (18, 0, 4));
    }

    #[test]
    fn non_syllable_rejected() {
        assert_eq!(decompose_syllable('A'), Err(HangulError::NotHangulSyllable('A')));
        assert!(decompose_syllable('ㅋ').is_err());
    }

    #[test]
    fn compose_examples() {
        let g = Jamo::initial(0).unwrap();
        let a = Jamo::medial(0).unwrap();
        assert_eq!(compose_syllable(g, a, None).unwrap(), '가');
        let h = Jamo::initial(18).unwrap();
        let n = Jamo::final_(4).unwrap();
        assert_eq!(compose_syllable(h, a, Some(n)).unwrap(), '한');
        assert_eq!(Jamo::initial(19), Err(HangulError::IndexOutOfRange { kind: JamoKind::Initial, index: 19 }));
        assert!(Jamo::final_(0).is_err());
        assert!(Jamo::medial(21).is_err());
        assert!(matches!(compose_syllable(a, g, None), Err(HangulError::WrongKind { .. })));
    }

    #[test]
    fn jamo_seq_examples() {
        assert_eq!(letters("잼"), "ㅈㅐㅁ");
        assert!(to_jamo_seq("").is_empty());
        let seq = to_jamo_seq("a한b");
        assert_eq!(seq.units()[0], Unit::Char('a'));
        assert_eq!(seq.units()[4], Unit::Char('b'));
        assert_eq!(seq.boundaries(), &[0, 1, 4]);
        assert_eq!(from_jamo_seq(&seq).unwrap(), "a한b");
    }

    #[test]
    fn bad_grouping() {
        let units = to_jamo_seq("한").into_units();
        let seq = JamoSeq::new(units, vec![0, 1]).unwrap();
        assert_eq!(from_jamo_seq(&seq), Err(HangulError::InvalidJamoGrouping { at: 0 }));
        assert!(JamoSeq::new(vec![Unit::Char('a')], vec![1]).is_err());
    }

    #[test]
    fn compat_stays_distinct() {
        let k = to_jamo_seq("ㅋ").units()[0];
        let Unit::Jamo(j) = k else { panic!() };
        assert_eq!(j.kind(), JamoKind::Compat);
        // initial ㅋ from 크 is not the standalone letter
        assert_ne!(to_jamo_seq("크").units()[0], k);
        assert!(!to_jamo_seq("크").units()[0].same_letter(&k));
    }

    #[test]
    fn compose_units_handles_finals() {
        let units = to_jamo_seq("합니다").into_units();
        assert_eq!(compose_units(&units).unwrap(), "합니다");
        // a lone final cannot be composed, but renders as its letter
        assert_eq!(compose_units(&units[2..]), None);
        assert_eq!(render_units(&units[2..]), "ㅂ니다");
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(jamo_edit_distance("초콜렛", "초콜릿"), 1);
        assert_eq!(jamo_edit_distance("너무", "넘"), 1);
        assert_eq!(jamo_edit_distance("세요", "세욤"), 1);
        assert_eq!(jamo_edit_distance("", "가"), 2);
        assert_eq!(jamo_edit_distance("ㅋㅋ", "ㅋㅋ"), 0);
    }
}
