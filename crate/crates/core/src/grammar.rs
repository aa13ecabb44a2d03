//! Local grammar graphs in a line-based text format.
//!
//! ```text
//! # chocolate spellings
//! GRAPH loan TAG LOAN
//! 0 INITIAL -> 2
//! 1 FINAL
//! 2 "초콜렛|쪼꼬렛|초코렛|초코레트" / "초콜릿" -> 1
//! ```
//!
//! A box label is a quoted list of `|`-separated literals, a part-of-speech
//! mask `<N>`, a subgraph call `:Name`, or the empty label `<E>`. A file may
//! hold several graphs; a graph without `TAG` is a library graph that can be
//! called but is never applied on its own.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lexicon::Pos;

pub type BoxId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Literal(String),
    Mask(Pos),
    Subgraph(String),
    Epsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoxKind {
    Initial,
    Final,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphBox {
    pub id: BoxId,
    pub kind: BoxKind,
    pub alternatives: Vec<Label>,
    pub output: Option<String>,
    pub successors: Vec<BoxId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphIR {
    pub name: String,
    /// Category emitted for matches; `None` marks a library-only graph.
    pub tag: Option<String>,
    pub boxes: BTreeMap<BoxId, GraphBox>,
}

impl GraphIR {
    pub fn initial(&self) -> BoxId {
        self.find_kind(BoxKind::Initial)
    }

    pub fn final_box(&self) -> BoxId {
        self.find_kind(BoxKind::Final)
    }

    fn find_kind(&self, kind: BoxKind) -> BoxId {
        self.boxes
            .values()
            .find(|b| b.kind == kind)
            .map(|b| b.id)
            .expect("parsed graphs have exactly one initial and one final box")
    }

    /// Names of the subgraphs called directly from this graph, in box order.
    pub fn callees(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for b in self.boxes.values() {
            for l in &b.alternatives {
                if let Label::Subgraph(name) = l {
                    if seen.insert(name.as_str()) {
                        out.push(name.as_str());
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {line}: duplicate box id {id}")]
    DuplicateBoxId { line: usize, id: BoxId },
    #[error("line {line}: second INITIAL box")]
    DuplicateInitial { line: usize },
    #[error("line {line}: second FINAL box")]
    DuplicateFinal { line: usize },
    #[error("graph {graph:?} has no INITIAL box")]
    MissingInitial { graph: String },
    #[error("graph {graph:?} has no FINAL box")]
    MissingFinal { graph: String },
    #[error("expected exactly one graph, found {0}")]
    GraphCount(usize),
    #[error("graph {0:?} is defined more than once")]
    DuplicateGraph(String),
}

fn syntax(line: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::SyntaxError { line, message: message.into() }
}

/// Parses a text holding exactly one graph.
pub fn parse_graph(text: &str) -> Result<GraphIR, GrammarError> {
    let mut graphs = parse_grammar_file(text)?;
    if graphs.len() != 1 {
        return Err(GrammarError::GraphCount(graphs.len()));
    }
    Ok(graphs.remove(0))
}

/// Parses every graph in a grammar file, in file order.
pub fn parse_grammar_file(text: &str) -> Result<Vec<GraphIR>, GrammarError> {
    let mut graphs = Vec::new();
    let mut current: Option<Builder> = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("GRAPH") {
            if !rest.starts_with(char::is_whitespace) {
                return Err(syntax(line_no, "expected `GRAPH <name> [TAG <tag>]`"));
            }
            if let Some(b) = current.take() {
                graphs.push(b.finish()?);
            }
            current = Some(Builder::header(rest, line_no)?);
            continue;
        }
        let b = current.as_mut().ok_or_else(|| syntax(line_no, "box line before GRAPH header"))?;
        b.add_box(line, line_no)?;
    }
    if let Some(b) = current.take() {
        graphs.push(b.finish()?);
    }
    if graphs.is_empty() {
        return Err(syntax(0, "no GRAPH header found"));
    }
    Ok(graphs)
}

struct Builder {
    graph: GraphIR,
    has_initial: bool,
    has_final: bool,
}

impl Builder {
    fn header(rest: &str, line: usize) -> Result<Builder, GrammarError> {
        let words: Vec<&str> = rest.split_whitespace().collect();
        let (name, tag) = match words.as_slice() {
            [name] => (*name, None),
            [name, "TAG", tag] => (*name, Some(tag.to_string())),
            _ => return Err(syntax(line, "expected `GRAPH <name> [TAG <tag>]`")),
        };
        if !is_name(name) {
            return Err(syntax(line, format!("invalid graph name {name:?}")));
        }
        Ok(Builder {
            graph: GraphIR { name: name.to_string(), tag, boxes: BTreeMap::new() },
            has_initial: false,
            has_final: false,
        })
    }

    fn add_box(&mut self, line: &str, line_no: usize) -> Result<(), GrammarError> {
        let b = parse_box_line(line, line_no)?;
        match b.kind {
            BoxKind::Initial if self.has_initial => return Err(GrammarError::DuplicateInitial { line: line_no }),
            BoxKind::Final if self.has_final => return Err(GrammarError::DuplicateFinal { line: line_no }),
            BoxKind::Initial => self.has_initial = true,
            BoxKind::Final => self.has_final = true,
            BoxKind::Plain => {}
        }
        if self.graph.boxes.contains_key(&b.id) {
            return Err(GrammarError::DuplicateBoxId { line: line_no, id: b.id });
        }
        self.graph.boxes.insert(b.id, b);
        Ok(())
    }

    fn finish(self) -> Result<GraphIR, GrammarError> {
        if !self.has_initial {
            return Err(GrammarError::MissingInitial { graph: self.graph.name });
        }
        if !self.has_final {
            return Err(GrammarError::MissingFinal { graph: self.graph.name });
        }
        Ok(self.graph)
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_name_char)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.s.len() - trimmed.len();
    }

    fn eat(&mut self, prefix: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(prefix) {
            self.pos += prefix.len();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    /// Reads a quoted string, returning the raw pieces split on unescaped `|`.
    fn quoted(&mut self) -> Result<Vec<String>, GrammarError> {
        if !self.eat("\"") {
            return Err(syntax(self.line, "expected '\"'"));
        }
        let mut parts = vec![String::new()];
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(parts);
                }
                '\\' => match chars.next() {
                    Some((_, e @ ('"' | '\\' | '|'))) => parts.last_mut().unwrap().push(e),
                    _ => return Err(syntax(self.line, "bad escape in quoted string")),
                },
                '|' => parts.push(String::new()),
                c => parts.last_mut().unwrap().push(c),
            }
        }
        Err(syntax(self.line, "unterminated quoted string"))
    }
}

fn parse_box_line(line: &str, line_no: usize) -> Result<GraphBox, GrammarError> {
    let mut c = Cursor { s: line, pos: 0, line: line_no };
    let id_word = c.word();
    let id: BoxId = id_word.parse().map_err(|_| syntax(line_no, format!("invalid box id {id_word:?}")))?;
    c.skip_ws();
    let (kind, alternatives) = if c.rest().starts_with('"') {
        let parts = c.quoted()?;
        if parts.iter().any(|p| p.is_empty()) {
            return Err(syntax(line_no, "empty literal alternative"));
        }
        (BoxKind::Plain, parts.into_iter().map(Label::Literal).collect())
    } else if c.eat("<") {
        let rest = c.rest();
        let close = rest.find('>').ok_or_else(|| syntax(line_no, "unterminated '<'"))?;
        let inner = &rest[..close];
        c.pos += close + 1;
        let label = if inner == "E" {
            Label::Epsilon
        } else {
            Label::Mask(inner.parse::<Pos>().map_err(|e| syntax(line_no, e))?)
        };
        (BoxKind::Plain, vec![label])
    } else if c.eat(":") {
        let rest = c.rest();
        let len = rest.find(|ch: char| !is_name_char(ch)).unwrap_or(rest.len());
        let name = &rest[..len];
        c.pos += len;
        if !is_name(name) {
            return Err(syntax(line_no, format!("invalid subgraph name {name:?}")));
        }
        (BoxKind::Plain, vec![Label::Subgraph(name.to_string())])
    } else {
        match c.word() {
            "INITIAL" => (BoxKind::Initial, Vec::new()),
            "FINAL" => (BoxKind::Final, Vec::new()),
            other => return Err(syntax(line_no, format!("unknown box label {other:?}"))),
        }
    };

    let output = if c.eat("/") {
        c.skip_ws();
        let parts = c.quoted()?;
        Some(parts.join("|"))
    } else {
        None
    };

    let mut successors = Vec::new();
    if c.eat("->") {
        c.skip_ws();
        for piece in c.rest().split(',') {
            let piece = piece.trim();
            successors
                .push(piece.parse::<BoxId>().map_err(|_| syntax(line_no, format!("invalid successor {piece:?}")))?);
        }
        c.pos = c.s.len();
    }
    c.skip_ws();
    if !c.rest().is_empty() {
        return Err(syntax(line_no, format!("unexpected trailing text {:?}", c.rest())));
    }
    match kind {
        BoxKind::Final if !successors.is_empty() => return Err(syntax(line_no, "FINAL box cannot have successors")),
        BoxKind::Initial | BoxKind::Final if output.is_some() => {
            return Err(syntax(line_no, "only plain boxes carry an output"))
        }
        _ => {}
    }
    Ok(GraphBox { id, kind, alternatives, output, successors })
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, '"' | '\\' | '|') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

impl fmt::Display for GraphBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.id)?;
        match self.kind {
            BoxKind::Initial => f.write_str("INITIAL")?,
            BoxKind::Final => f.write_str("FINAL")?,
            BoxKind::Plain => match self.alternatives.as_slice() {
                [Label::Mask(p)] => write!(f, "<{p}>")?,
                [Label::Epsilon] => f.write_str("<E>")?,
                [Label::Subgraph(name)] => write!(f, ":{name}")?,
                alts => {
                    let lits: Vec<String> = alts
                        .iter()
                        .map(|l| match l {
                            Label::Literal(s) => escape(s),
                            other => unreachable!("mixed label kinds in one box: {other:?}"),
                        })
                        .collect();
                    write!(f, "\"{}\"", lits.join("|"))?
                }
            },
        }
        if let Some(out) = &self.output {
            write!(f, " / \"{}\"", escape(out))?;
        }
        if !self.successors.is_empty() {
            let succ: Vec<String> = self.successors.iter().map(|s| s.to_string()).collect();
            write!(f, " -> {}", succ.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Display for GraphIR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GRAPH {}", self.name)?;
        if let Some(tag) = &self.tag {
            write!(f, " TAG {tag}")?;
        }
        writeln!(f)?;
        for b in self.boxes.values() {
            writeln!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Graphs addressable by name for subgraph calls.
#[derive(Debug, Clone, Default)]
pub struct GrammarLibrary {
    graphs: BTreeMap<String, GraphIR>,
}

impl GrammarLibrary {
    pub fn new() -> GrammarLibrary {
        GrammarLibrary::default()
    }

    pub fn from_graphs(graphs: impl IntoIterator<Item = GraphIR>) -> Result<GrammarLibrary, GrammarError> {
        let mut lib = GrammarLibrary::new();
        for g in graphs {
            lib.insert(g)?;
        }
        Ok(lib)
    }

    pub fn insert(&mut self, g: GraphIR) -> Result<(), GrammarError> {
        if self.graphs.contains_key(&g.name) {
            return Err(GrammarError::DuplicateGraph(g.name));
        }
        self.graphs.insert(g.name.clone(), g);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&GraphIR> {
        self.graphs.get(name)
    }

    pub fn graphs(&self) -> impl Iterator<Item = &GraphIR> {
        self.graphs.values()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    UnreachableBox(BoxId),
    FinalUnreachable(BoxId),
    DanglingSuccessor(BoxId),
    UnknownSubgraph(String),
    RecursiveCall(Vec<String>),
    /// INITIAL reaches FINAL without consuming input.
    EpsilonOnlyPath,
    /// A loop made only of boxes that can be crossed without input.
    EpsilonCycle(Vec<BoxId>),
    InSubgraph {
        name: String,
        diagnostic: Box<Diagnostic>,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnreachableBox(id) => write!(f, "box {id} is unreachable from INITIAL"),
            Diagnostic::FinalUnreachable(id) => write!(f, "FINAL is unreachable from box {id}"),
            Diagnostic::DanglingSuccessor(id) => write!(f, "successor {id} does not exist"),
            Diagnostic::UnknownSubgraph(name) => write!(f, "subgraph {name:?} is not in the library"),
            Diagnostic::RecursiveCall(cycle) => write!(f, "recursive subgraph calls: {}", cycle.join(" -> ")),
            Diagnostic::EpsilonOnlyPath => f.write_str("INITIAL reaches FINAL without consuming input"),
            Diagnostic::EpsilonCycle(ids) => {
                let ids: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
                write!(f, "cycle without input through boxes {}", ids.join(","))
            }
            Diagnostic::InSubgraph { name, diagnostic } => write!(f, "in subgraph {name:?}: {diagnostic}"),
        }
    }
}

/// Structural checks on `g` and on every subgraph it transitively calls.
pub fn validate(g: &GraphIR, library: &GrammarLibrary) -> Vec<Diagnostic> {
    let mut diags = local_diagnostics(g, library);
    diags.extend(call_cycles(g, library));
    // callees are inlined, so their own defects surface in the caller
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&str> = g.callees();
    while let Some(name) = stack.pop() {
        if name == g.name || !seen.insert(name) {
            continue;
        }
        let Some(callee) = library.get(name) else { continue };
        for d in local_diagnostics(callee, library) {
            if !matches!(d, Diagnostic::UnknownSubgraph(_)) {
                diags.push(Diagnostic::InSubgraph { name: name.to_string(), diagnostic: Box::new(d) });
            }
        }
        stack.extend(callee.callees());
    }
    diags
}

fn local_diagnostics(g: &GraphIR, library: &GrammarLibrary) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for b in g.boxes.values() {
        for s in &b.successors {
            if !g.boxes.contains_key(s) {
                diags.push(Diagnostic::DanglingSuccessor(*s));
            }
        }
    }
    for name in g.callees() {
        if name != g.name && library.get(name).is_none() {
            diags.push(Diagnostic::UnknownSubgraph(name.to_string()));
        }
    }

    let forward = reach(g.initial(), |id| successors(g, id));
    let preds = predecessors(g);
    let backward = reach(g.final_box(), |id| preds.get(&id).cloned().unwrap_or_default());
    for id in g.boxes.keys() {
        if !forward.contains(id) {
            diags.push(Diagnostic::UnreachableBox(*id));
        } else if !backward.contains(id) {
            diags.push(Diagnostic::FinalUnreachable(*id));
        }
    }

    let nullable = |id: BoxId| -> bool {
        let b = &g.boxes[&id];
        b.kind == BoxKind::Initial || b.alternatives.iter().any(|l| label_nullable(l, library, &mut BTreeSet::new()))
    };
    let eps_reach = reach(g.initial(), |id| {
        if nullable(id) {
            successors(g, id).into_iter().filter(|s| nullable(*s) || g.boxes[s].kind == BoxKind::Final).collect()
        } else {
            Vec::new()
        }
    });
    if eps_reach.contains(&g.final_box()) {
        diags.push(Diagnostic::EpsilonOnlyPath);
    }
    if let Some(cycle) = find_cycle(g, |id| g.boxes[&id].kind == BoxKind::Plain && nullable(id)) {
        diags.push(Diagnostic::EpsilonCycle(cycle));
    }
    diags
}

fn successors(g: &GraphIR, id: BoxId) -> Vec<BoxId> {
    g.boxes[&id].successors.iter().copied().filter(|s| g.boxes.contains_key(s)).collect()
}

fn predecessors(g: &GraphIR) -> BTreeMap<BoxId, Vec<BoxId>> {
    let mut preds: BTreeMap<BoxId, Vec<BoxId>> = BTreeMap::new();
    for b in g.boxes.values() {
        for s in successors(g, b.id) {
            preds.entry(s).or_default().push(b.id);
        }
    }
    preds
}

fn reach(start: BoxId, mut next: impl FnMut(BoxId) -> Vec<BoxId>) -> BTreeSet<BoxId> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(id) = stack.pop() {
        for s in next(id) {
            if seen.insert(s) {
                stack.push(s);
            }
        }
    }
    seen
}

/// Whether a label can be crossed without consuming input.
fn label_nullable<'a>(label: &'a Label, library: &'a GrammarLibrary, visiting: &mut BTreeSet<&'a str>) -> bool {
    match label {
        Label::Epsilon => true,
        Label::Literal(_) | Label::Mask(_) => false,
        Label::Subgraph(name) => {
            let Some(callee) = library.get(name) else { return false };
            if !visiting.insert(name.as_str()) {
                return false;
            }
            let init = callee.initial();
            let fin = callee.final_box();
            let mut seen = BTreeSet::from([init]);
            let mut stack = vec![init];
            let mut found = false;
            while let Some(id) = stack.pop() {
                if id == fin {
                    found = true;
                    break;
                }
                let b = &callee.boxes[&id];
                let crossable =
                    b.kind == BoxKind::Initial || b.alternatives.iter().any(|l| label_nullable(l, library, visiting));
                if crossable {
                    for s in successors(callee, id) {
                        if seen.insert(s) {
                            stack.push(s);
                        }
                    }
                }
            }
            visiting.remove(name.as_str());
            found
        }
    }
}

/// Finds one cycle in the subgraph induced by boxes satisfying `keep`.
fn find_cycle(g: &GraphIR, keep: impl Fn(BoxId) -> bool) -> Option<Vec<BoxId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks: BTreeMap<BoxId, Mark> = g.boxes.keys().map(|&id| (id, Mark::New)).collect();
    fn visit(
        g: &GraphIR,
        id: BoxId,
        keep: &dyn Fn(BoxId) -> bool,
        marks: &mut BTreeMap<BoxId, Mark>,
        path: &mut Vec<BoxId>,
    ) -> Option<Vec<BoxId>> {
        marks.insert(id, Mark::Active);
        path.push(id);
        for s in successors(g, id) {
            if !keep(s) {
                continue;
            }
            match marks[&s] {
                Mark::Active => {
                    let at = path.iter().position(|&p| p == s).unwrap();
                    return Some(path[at..].to_vec());
                }
                Mark::New => {
                    if let Some(c) = visit(g, s, keep, marks, path) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        path.pop();
        marks.insert(id, Mark::Done);
        None
    }
    let ids: Vec<BoxId> = g.boxes.keys().copied().filter(|&id| keep(id)).collect();
    for id in ids {
        if marks[&id] == Mark::New {
            if let Some(c) = visit(g, id, &keep, &mut marks, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

fn call_cycles(g: &GraphIR, library: &GrammarLibrary) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut reported = BTreeSet::new();
    let mut path = vec![g.name.clone()];
    walk_calls(g, library, &mut path, &mut out, &mut reported);
    out
}

fn walk_calls(
    g: &GraphIR,
    library: &GrammarLibrary,
    path: &mut Vec<String>,
    out: &mut Vec<Diagnostic>,
    reported: &mut BTreeSet<Vec<String>>,
) {
    for name in g.callees() {
        if let Some(at) = path.iter().position(|p| p == name) {
            let cycle = path[at..].to_vec();
            let mut key = cycle.clone();
            key.sort();
            if reported.insert(key) {
                out.push(Diagnostic::RecursiveCall(cycle));
            }
            continue;
        }
        let callee = if name == g.name { Some(g) } else { library.get(name) };
        if let Some(callee) = callee {
            path.push(name.to_string());
            walk_calls(callee, library, path, out, reported);
            path.pop();
        }
    }
}
