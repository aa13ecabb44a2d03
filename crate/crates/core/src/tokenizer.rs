//! Lossless segmentation into maximal runs of same-class scalars.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::hangul;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TokenClass {
    Hangul,
    Jamo,
    Latin,
    Digit,
    Punct,
    Symbol,
}

impl TokenClass {
    pub fn of(ch: char) -> Option<TokenClass> {
        if ch.is_whitespace() {
            None
        } else if hangul::is_syllable(ch) {
            Some(TokenClass::Hangul)
        } else if hangul::is_compat_jamo(ch) {
            Some(TokenClass::Jamo)
        } else if ch.is_ascii_alphabetic() {
            Some(TokenClass::Latin)
        } else if ch.is_ascii_digit() {
            Some(TokenClass::Digit)
        } else if is_punct(ch) {
            Some(TokenClass::Punct)
        } else {
            Some(TokenClass::Symbol)
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TokenClass::Hangul => "HANGUL",
            TokenClass::Jamo => "JAMO",
            TokenClass::Latin => "LATIN",
            TokenClass::Digit => "DIGIT",
            TokenClass::Punct => "PUNCT",
            TokenClass::Symbol => "SYMBOL",
        }
    }
}

impl fmt::Display for TokenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "HANGUL" => TokenClass::Hangul,
            "JAMO" => TokenClass::Jamo,
            "LATIN" => TokenClass::Latin,
            "DIGIT" => TokenClass::Digit,
            "PUNCT" => TokenClass::Punct,
            "SYMBOL" => TokenClass::Symbol,
            other => return Err(format!("unknown token class {other:?}")),
        })
    }
}

// Sentence punctuation. Emoticon material such as `*`, `_`, `@`, `^` and `~`
// is deliberately absent so that it groups into SYMBOL runs.
fn is_punct(ch: char) -> bool {
    matches!(
        ch,
        '.' | ','
            | '!'
            | '?'
            | ';'
            | ':'
            | '\''
            | '"'
            | '('
            | ')'
            | '['
            | ']'
            | '{'
            | '}'
            | '…'
            | '·'
            | '。'
            | '、'
            | '「'
            | '」'
            | '『'
            | '』'
            | '“'
            | '”'
            | '‘'
            | '’'
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Token {
    pub surface: String,
    pub class: TokenClass,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    pub source_len: usize,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    /// Rebuilds the source from token surfaces and the whitespace `gaps`
    /// between them.
    pub fn reassemble(&self, source: &str) -> String {
        let mut out = String::with_capacity(self.source_len);
        let mut pos = 0;
        for t in &self.tokens {
            out.push_str(&source[pos..t.start]);
            out.push_str(&t.surface);
            pos = t.end;
        }
        out.push_str(&source[pos..]);
        out
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a Token;
    type IntoIter = std::slice::Iter<'a, Token>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
pub struct InvalidEncoding {
    pub offset: usize,
}

pub fn tokenize(text: &str) -> TokenStream {
    let mut tokens = Vec::new();
    let mut current: Option<(TokenClass, usize)> = None;
    for (i, ch) in text.char_indices() {
        let class = TokenClass::of(ch);
        match (current, class) {
            (Some((c, _)), Some(k)) if c == k => {}
            (Some((c, start)), _) => {
                tokens.push(make_token(text, c, start, i));
                current = class.map(|k| (k, i));
            }
            (None, _) => current = class.map(|k| (k, i)),
        }
    }
    if let Some((c, start)) = current {
        tokens.push(make_token(text, c, start, text.len()));
    }
    TokenStream { tokens, source_len: text.len() }
}

pub fn tokenize_bytes(bytes: &[u8]) -> Result<TokenStream, InvalidEncoding> {
    let text = std::str::from_utf8(bytes).map_err(|e| InvalidEncoding { offset: e.valid_up_to() })?;
    Ok(tokenize(text))
}

fn make_token(text: &str, class: TokenClass, start: usize, end: usize) -> Token {
    Token { surface: text[start..end].to_string(), class, start, end }
}

/// Key under which a token is counted as a type. Latin is case-folded;
/// everything else is verbatim.
pub fn type_key(token: &Token) -> String {
    if token.class == TokenClass::Latin {
        token.surface.to_ascii_lowercase()
    } else {
        token.surface.clone()
    }
}

pub fn type_census(stream: &TokenStream) -> BTreeMap<String, usize> {
    let mut census = BTreeMap::new();
    for t in stream {
        *census.entry(type_key(t)).or_insert(0) += 1;
    }
    census
}

pub fn to_tsv(stream: &TokenStream) -> String {
    let mut out = String::new();
    for t in stream {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", t.start, t.end, t.class, t.surface));
    }
    out
}
