//! Bundled dictionaries, grammars and sample corpora, and loading of the
//! same kinds of files from disk.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::apply::{ApplyConfig, GrammarLoadError, GrammarSet, Match, Mode, Prepared};
use crate::classify::{classify_corpus, CorpusClassification, Thresholds};
use crate::fst::CompileOptions;
use crate::lexicon::{load_dictionary, Lexicon, LexiconError};
use crate::stats::{corpus_stats, CorpusStats};
use crate::tokenizer::tokenize;

macro_rules! bundled {
    ($dir:literal, $($name:literal),+ $(,)?) => {
        &[$(($name, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/", $dir, "/", $name)))),+]
    };
}

/// Dictionary files in load order.
pub const DICTIONARIES: &[(&str, &str)] = bundled!("dict", "core.dic", "loan.dic", "neo.dic", "abbr.dic");

/// Grammar files in filename order, which is also their priority.
pub const GRAMMARS: &[(&str, &str)] =
    bundled!("grammars", "abbr.lgg", "deviant.lgg", "emoticon.lgg", "loan.lgg", "neo.lgg");

pub const FORMAL_CORPUS: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/corpora/formal.txt"));
pub const INFORMAL_CORPUS: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/corpora/informal.txt"));
/// `surface<TAB>category<TAB>suggestion` rows for the informal corpus.
pub const INFORMAL_GOLD: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/corpora/informal_gold.tsv"));

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Dictionary { path: String, source: LexiconError },
    #[error(transparent)]
    Grammar(#[from] GrammarLoadError),
}

impl LoadError {
    fn io(path: &Path, source: io::Error) -> LoadError {
        LoadError::Io { path: path.display().to_string(), source }
    }
}

pub fn bundled_lexicon() -> Lexicon {
    lexicon_from_sources(DICTIONARIES.iter().map(|(n, t)| (n.to_string(), t.to_string())))
        .expect("bundled dictionaries parse")
}

pub fn bundled_grammar_sources() -> Vec<(String, String)> {
    GRAMMARS.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect()
}

pub fn bundled_grammars() -> GrammarSet {
    GrammarSet::from_sources(&bundled_grammar_sources(), CompileOptions::default()).expect("bundled grammars compile")
}

fn lexicon_from_sources(sources: impl IntoIterator<Item = (String, String)>) -> Result<Lexicon, LoadError> {
    let mut entries = Vec::new();
    for (path, text) in sources {
        let lex = load_dictionary(&text).map_err(|source| LoadError::Dictionary { path, source })?;
        entries.extend(lex.entries().iter().cloned());
    }
    Ok(Lexicon::new(entries))
}

/// Root for relative asset paths: `LGGNORM_ASSETS` if set, otherwise the
/// assets directory of this crate's source tree.
pub fn asset_root() -> PathBuf {
    match std::env::var_os("LGGNORM_ASSETS") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/assets")),
    }
}

/// `path` as given if it exists, otherwise relative to the asset root.
pub fn resolve(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        path.to_path_buf()
    } else {
        asset_root().join(path)
    }
}

pub fn load_lexicon_files(paths: &[PathBuf]) -> Result<Lexicon, LoadError> {
    let mut sources = Vec::new();
    for p in paths {
        let p = resolve(p);
        let text = fs::read_to_string(&p).map_err(|e| LoadError::io(&p, e))?;
        sources.push((p.display().to_string(), text));
    }
    lexicon_from_sources(sources)
}

/// Every `.lgg` file of `dir` in filename order, or a single file.
pub fn read_grammar_sources(path: &Path) -> Result<Vec<(String, String)>, LoadError> {
    let path = resolve(path);
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(&path)
            .map_err(|e| LoadError::io(&path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "lgg"))
            .collect();
        files.sort();
        files
    } else {
        vec![path]
    };
    files
        .into_iter()
        .map(|f| {
            let text = fs::read_to_string(&f).map_err(|e| LoadError::io(&f, e))?;
            let name = f.file_name().map_or_else(|| f.display().to_string(), |n| n.to_string_lossy().into_owned());
            Ok((name, text))
        })
        .collect()
}

/// A lexicon, a grammar set and the settings used to run them.
#[derive(Debug, Clone)]
pub struct Engine {
    pub lexicon: Lexicon,
    pub grammars: GrammarSet,
    pub config: ApplyConfig,
    pub thresholds: Thresholds,
}

impl Engine {
    pub fn new(lexicon: Lexicon, grammars: GrammarSet) -> Engine {
        Engine { lexicon, grammars, config: ApplyConfig::default(), thresholds: Thresholds::default() }
    }

    pub fn bundled() -> Engine {
        Engine::new(bundled_lexicon(), bundled_grammars())
    }

    /// Dictionaries and grammars from disk, resolved like the CLI does.
    pub fn load(dicts: &[PathBuf], grammars: &Path) -> Result<Engine, LoadError> {
        let lexicon = load_lexicon_files(dicts)?;
        let sources = read_grammar_sources(grammars)?;
        Ok(Engine::new(lexicon, GrammarSet::from_sources(&sources, CompileOptions::default())?))
    }

    pub fn find_matches(&self, text: &str) -> Vec<Match> {
        Prepared::new(text, &self.lexicon).find_matches(&self.grammars, &self.config)
    }

    /// Rewrites `text` in the configured mode.
    pub fn transform(&self, text: &str) -> String {
        crate::apply::transform(text, &self.find_matches(text), self.config.mode)
    }

    pub fn normalize(&self, text: &str) -> String {
        crate::apply::transform(text, &self.find_matches(text), Mode::Replace)
    }

    pub fn classify(&self, text: &str) -> CorpusClassification {
        classify_corpus(&tokenize(text), &self.lexicon, &self.grammars, self.thresholds)
    }

    pub fn stats(&self, text: &str) -> CorpusStats {
        corpus_stats(&tokenize(text), &self.lexicon)
    }
}
