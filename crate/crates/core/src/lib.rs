//! Normalization of non-standard Korean text.
//!
//! The pipeline tokenizes text, analyzes Hangul tokens against a
//! morphological dictionary, classifies tokens the dictionary rejects, and
//! rewrites recognized variants with grammars compiled into transducers.

pub mod apply;
pub mod assets;
pub mod classify;
pub mod cli;
pub mod concord;
pub mod fst;
pub mod grammar;
pub mod hangul;
pub mod lexicon;
pub mod stats;
pub mod tokenizer;
