//! The `lggnorm` command line.

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use unicode_normalization::is_nfc;

use crate::apply::{Anchor, ApplyConfig, GrammarSet, Mode, Prepared};
use crate::assets::{load_lexicon_files, read_grammar_sources, resolve, LoadError};
use crate::classify::{classify_corpus, Thresholds};
use crate::concord::{build_concordance, render_text, render_tsv, SortKey};
use crate::fst::{compile_with, CompileOptions, DEFAULT_MAX_STATES};
use crate::grammar::{parse_grammar_file, validate, GrammarLibrary};
use crate::lexicon::{analyze_token, is_analyzable, Lexicon};
use crate::stats::{compare_labeled, corpus_stats};
use crate::tokenizer::{to_tsv, tokenize};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_ENCODING: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "lggnorm", version, about = "Normalize non-standard Korean text with local grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split text into tokens (TSV: start, end, class, surface).
    Tokenize(TokenizeArgs),
    /// Morphological analyses of every token.
    Analyze(AnalyzeArgs),
    /// Categorize non-analyzable token types.
    Classify(ClassifyArgs),
    /// Rewrite recognized variants.
    Normalize(NormalizeArgs),
    /// Corpus size, types and non-analyzable share; two inputs are compared.
    Stats(StatsArgs),
    /// Keyword-in-context lines for grammar matches.
    Concord(ConcordArgs),
    /// Grammar file tools.
    #[command(subcommand)]
    Graph(GraphCommand),
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// Print the transducer of each tagged graph.
    Compile(GraphArgs),
    /// Check graphs and print OK or the problems found.
    Validate(GraphArgs),
}

#[derive(Args, Debug)]
struct Inputs {
    /// Input files; `-` or nothing reads standard input.
    inputs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct DictArgs {
    /// Dictionary file; repeat to load several.
    #[arg(long = "dict", required = true)]
    dicts: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct GrammarArgs {
    /// Directory of `.lgg` files (loaded in filename order) or one file.
    #[arg(long, default_value = "grammars")]
    grammars: PathBuf,
    /// Comma-separated grammar names, highest priority first.
    #[arg(long, value_delimiter = ',')]
    priority: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Tsv,
    Json,
    Text,
}

#[derive(Args, Debug)]
struct TokenizeArgs {
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    dict: DictArgs,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    dict: DictArgs,
    #[command(flatten)]
    grammar: GrammarArgs,
    #[arg(long, default_value_t = 2)]
    loan_threshold: usize,
    #[arg(long, default_value_t = 1)]
    deviant_threshold: usize,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Replace,
    Merge,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AnchorArg {
    Token,
    Anywhere,
}

#[derive(Args, Debug)]
struct MatchArgs {
    #[arg(long, value_enum, default_value_t = AnchorArg::Token)]
    anchor: AnchorArg,
    /// Let grammars rewrite inside tokens the dictionary already analyzes.
    #[arg(long)]
    no_guard: bool,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    #[command(flatten)]
    dict: DictArgs,
    #[command(flatten)]
    grammar: GrammarArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Replace)]
    mode: ModeArg,
    #[command(flatten)]
    matching: MatchArgs,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    dict: DictArgs,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SortArg {
    Text,
    Keyword,
    Right,
}

#[derive(Args, Debug)]
struct ConcordArgs {
    #[command(flatten)]
    dict: DictArgs,
    #[command(flatten)]
    grammar: GrammarArgs,
    #[command(flatten)]
    matching: MatchArgs,
    #[arg(long, default_value_t = 30)]
    left: usize,
    #[arg(long, default_value_t = 30)]
    right: usize,
    #[arg(long, value_enum, default_value_t = SortArg::Text)]
    sort: SortArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Grammar file.
    file: PathBuf,
    /// Extra files or directories whose graphs may be called.
    #[arg(long)]
    library: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
}

/// A failure with its exit code; the message goes to standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl ToString) -> Failure {
        Failure { code: EXIT_DATA, message: message.to_string() }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Failure {
        Failure::data(e)
    }
}

type Outcome = Result<Vec<u8>, Failure>;

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli.command) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(&out).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_DATA);
            }
            ExitCode::from(EXIT_OK)
        }
        Err(f) => {
            eprintln!("lggnorm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Tokenize(a) => per_input(&a.inputs, |_, text| Ok(to_tsv(&tokenize(text)))),
        Command::Analyze(a) => {
            let lex = lexicon(&a.dict)?;
            per_input(&a.inputs, |_, text| Ok(analyze_report(text, &lex, a.format)))
        }
        Command::Classify(a) => {
            let lex = lexicon(&a.dict)?;
            let grammars = grammar_set(&a.grammar)?;
            let thresholds = Thresholds { loan: a.loan_threshold, deviant: a.deviant_threshold };
            per_input(&a.inputs, |_, text| {
                let c = classify_corpus(&tokenize(text), &lex, &grammars, thresholds);
                Ok(match a.format {
                    Format::Json => c.to_json(),
                    _ => c.to_tsv(),
                })
            })
        }
        Command::Normalize(a) => {
            let lex = lexicon(&a.dict)?;
            let grammars = grammar_set(&a.grammar)?;
            let mode = match a.mode {
                ModeArg::Replace => Mode::Replace,
                ModeArg::Merge => Mode::Merge,
            };
            let config = apply_config(&a.matching, mode);
            per_input(&a.inputs, |_, text| {
                let matches = Prepared::new(text, &lex).find_matches(&grammars, &config);
                Ok(crate::apply::transform(text, &matches, mode))
            })
        }
        Command::Stats(a) => stats(a),
        Command::Concord(a) => {
            let lex = lexicon(&a.dict)?;
            let grammars = grammar_set(&a.grammar)?;
            let config = apply_config(&a.matching, Mode::Replace);
            let sort = match a.sort {
                SortArg::Text => SortKey::TextOrder,
                SortArg::Keyword => SortKey::Keyword,
                SortArg::Right => SortKey::RightContext,
            };
            per_input(&a.inputs, |_, text| {
                let matches = Prepared::new(text, &lex).find_matches(&grammars, &config);
                let lines = build_concordance(text, &matches, a.left, a.right, sort);
                Ok(match a.format {
                    Format::Tsv => render_tsv(&lines),
                    Format::Json => pretty(&json!({"schema": 1, "lines": lines})),
                    Format::Text => render_text(&lines, a.left),
                })
            })
        }
        Command::Graph(GraphCommand::Compile(a)) => graph_compile(&a),
        Command::Graph(GraphCommand::Validate(a)) => graph_validate(&a),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("plain values") + "\n"
}

fn apply_config(m: &MatchArgs, mode: Mode) -> ApplyConfig {
    ApplyConfig {
        mode,
        anchor: match m.anchor {
            AnchorArg::Token => Anchor::TokenStart,
            AnchorArg::Anywhere => Anchor::Anywhere,
        },
        guard_analyzable: !m.no_guard,
    }
}

fn lexicon(d: &DictArgs) -> Result<Lexicon, Failure> {
    Ok(load_lexicon_files(&d.dicts)?)
}

fn grammar_set(g: &GrammarArgs) -> Result<GrammarSet, Failure> {
    let sources = read_grammar_sources(&g.grammars)?;
    let set = GrammarSet::from_sources(&sources, CompileOptions { max_states: g.max_states })
        .map_err(|e| Failure::data(LoadError::from(e)))?;
    if g.priority.is_empty() {
        Ok(set)
    } else {
        set.with_priority(&g.priority).map_err(|e| Failure::usage(e.to_string()))
    }
}

/// Reads and checks one input: UTF-8 and NFC.
fn read_input(path: &Path) -> Result<String, Failure> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(|e| Failure::usage(format!("stdin: {e}")))?;
        buf
    } else {
        std::fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
    };
    let text = String::from_utf8(bytes).map_err(|e| Failure {
        code: EXIT_ENCODING,
        message: format!("{}: not valid UTF-8 at byte {}", path.display(), e.utf8_error().valid_up_to()),
    })?;
    if !is_nfc(&text) {
        return Err(Failure { code: EXIT_ENCODING, message: format!("{}: text is not in NFC", path.display()) });
    }
    Ok(text)
}

fn input_paths(inputs: &Inputs) -> Vec<PathBuf> {
    if inputs.inputs.is_empty() {
        vec![PathBuf::from("-")]
    } else {
        inputs.inputs.clone()
    }
}

fn read_all(inputs: &Inputs) -> Result<Vec<(PathBuf, String)>, Failure> {
    let paths = input_paths(inputs);
    let texts = std::thread::scope(|s| {
        let handles: Vec<_> = paths.iter().map(|p| s.spawn(move || read_input(p))).collect();
        handles.into_iter().map(|h| h.join().expect("reader thread")).collect::<Vec<_>>()
    });
    paths.into_iter().zip(texts).map(|(p, t)| t.map(|t| (p, t))).collect()
}

/// Applies `f` to every input concurrently and joins the results in input
/// order.
fn per_input<F>(inputs: &Inputs, f: F) -> Outcome
where
    F: Fn(&Path, &str) -> Result<String, Failure> + Sync,
{
    let docs = read_all(inputs)?;
    let f = &f;
    let results = std::thread::scope(|s| {
        let handles: Vec<_> = docs.iter().map(|(p, t)| s.spawn(move || f(p, t))).collect();
        handles.into_iter().map(|h| h.join().expect("worker thread")).collect::<Vec<_>>()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?.into_bytes());
    }
    Ok(out)
}

fn analyze_report(text: &str, lex: &Lexicon, format: Format) -> String {
    let stream = tokenize(text);
    match format {
        Format::Json => {
            let tokens: Vec<_> = stream
                .iter()
                .map(|t| {
                    let analyses: Vec<String> = analyze_token(t, lex).iter().map(|a| a.to_string()).collect();
                    json!({
                        "surface": t.surface,
                        "class": t.class,
                        "start": t.start,
                        "end": t.end,
                        "analyzable": is_analyzable(t, lex),
                        "analyses": analyses,
                    })
                })
                .collect();
            pretty(&json!({"schema": 1, "tokens": tokens}))
        }
        _ => stream
            .iter()
            .map(|t| {
                let analyses: Vec<String> = analyze_token(t, lex).iter().map(|a| a.to_string()).collect();
                let status = if is_analyzable(t, lex) { "OK" } else { "NA" };
                format!("{}\t{}\t{}\t{}\n", t.surface, t.class, status, analyses.join(" | "))
            })
            .collect(),
    }
}

fn stats(a: StatsArgs) -> Outcome {
    let lex = lexicon(&a.dict)?;
    let docs = read_all(&a.inputs)?;
    let all: Vec<_> = docs.iter().map(|(p, t)| (label(p), corpus_stats(&tokenize(t), &lex))).collect();
    let json = a.format == Format::Json;
    let out = match all.as_slice() {
        [(_, s)] => {
            if json {
                s.to_json()
            } else {
                s.to_tsv()
            }
        }
        [(la, sa), (lb, sb)] => {
            let r = compare_labeled(la, *sa, lb, *sb);
            if json {
                r.to_json()
            } else {
                r.to_tsv()
            }
        }
        _ => return Err(Failure::usage("stats takes one input, or two to compare")),
    };
    Ok(out.into_bytes())
}

fn label(p: &Path) -> String {
    if p == Path::new("-") {
        "stdin".into()
    } else {
        p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
    }
}

/// Graphs of the file itself followed by those of `--library`.
fn graph_library(a: &GraphArgs) -> Result<(Vec<crate::grammar::GraphIR>, GrammarLibrary), Failure> {
    let path = resolve(&a.file);
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let graphs = parse_grammar_file(&text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let mut library = GrammarLibrary::from_graphs(graphs.clone()).map_err(Failure::data)?;
    for lib in &a.library {
        for (name, text) in read_grammar_sources(lib)? {
            let gs = parse_grammar_file(&text).map_err(|e| Failure::data(format!("{name}: {e}")))?;
            for g in gs {
                if library.get(&g.name).is_none() {
                    library.insert(g).map_err(Failure::data)?;
                }
            }
        }
    }
    Ok((graphs, library))
}

fn graph_validate(a: &GraphArgs) -> Outcome {
    let (graphs, library) = graph_library(a)?;
    let mut problems = Vec::new();
    for g in &graphs {
        for d in validate(g, &library) {
            problems.push(format!("{}: {d}", g.name));
        }
    }
    if problems.is_empty() {
        Ok(b"OK\n".to_vec())
    } else {
        Err(Failure::data(problems.join("\nlggnorm: ")))
    }
}

fn graph_compile(a: &GraphArgs) -> Outcome {
    let (graphs, library) = graph_library(a)?;
    let mut out = String::new();
    for g in graphs.iter().filter(|g| g.tag.is_some()) {
        let diagnostics = validate(g, &library);
        if let Some(d) = diagnostics.first() {
            return Err(Failure::data(format!("{}: {d}", g.name)));
        }
        let fst = compile_with(g, &library, CompileOptions { max_states: a.max_states })
            .map_err(|e| Failure::data(format!("{}: {e}", g.name)))?;
        out.push_str(&format!("# {} {}\n", fst.name, fst.tag.as_deref().unwrap_or("")));
        out.push_str(&fst.dump());
    }
    Ok(out.into_bytes())
}
