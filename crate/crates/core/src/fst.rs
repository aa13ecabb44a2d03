//! Compilation of grammar graphs into epsilon-free transducers.
//!
//! Subgraph calls are inlined, literals expand to chains of jamo-unit
//! transitions and epsilon transitions are removed. Transitions leaving a
//! state keep the order in which the graph lists alternatives and
//! successors, so a depth-first walk over the machine visits paths in the
//! same order as a depth-first walk over the graph.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::grammar::{BoxId, BoxKind, GrammarLibrary, GraphIR, Label};
use crate::hangul::{self, Unit};
use crate::lexicon::Pos;

pub type StateId = usize;

pub const DEFAULT_MAX_STATES: usize = 100_000;

/// Input alphabet of a compiled transducer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Unit(Unit),
    /// Consumes one whole analyzable token of the given part of speech.
    Mask(Pos),
    /// Consumes a run of whitespace between tokens.
    Boundary,
}

impl Symbol {
    fn dump(&self) -> String {
        match self {
            Symbol::Unit(Unit::Jamo(j)) => j.codepoint().to_string(),
            Symbol::Unit(Unit::Char(c)) => c.to_string(),
            Symbol::Mask(p) => format!("<{p}>"),
            Symbol::Boundary => "<SPACE>".into(),
        }
    }
}

/// A sequence of input symbols, displayed as text with masks as `<POS>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SymbolString(pub Vec<Symbol>);

impl SymbolString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut units = Vec::new();
        for s in &self.0 {
            match s {
                Symbol::Unit(u) => units.push(*u),
                other => {
                    f.write_str(&hangul::render_units(&units))?;
                    units.clear();
                    match other {
                        Symbol::Mask(p) => write!(f, "<{p}>")?,
                        _ => f.write_str(" ")?,
                    }
                }
            }
        }
        f.write_str(&hangul::render_units(&units))
    }
}

/// Input symbols of a literal: its jamo units, with each whitespace run
/// collapsed into one token boundary.
pub fn literal_symbols(text: &str) -> Vec<Symbol> {
    let mut out = Vec::new();
    for u in hangul::to_jamo_seq(text).into_units() {
        if u.is_whitespace() {
            if out.last() != Some(&Symbol::Boundary) {
                out.push(Symbol::Boundary);
            }
        } else {
            out.push(Symbol::Unit(u));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub input: Symbol,
    pub output: String,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fst {
    pub name: String,
    pub tag: Option<String>,
    initial: StateId,
    finals: Vec<bool>,
    transitions: Vec<Vec<Transition>>,
}

impl Fst {
    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals[s]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals.iter().enumerate().filter(|(_, f)| **f).map(|(s, _)| s)
    }

    /// Outgoing transitions of `s` in priority order.
    pub fn transitions(&self, s: StateId) -> &[Transition] {
        &self.transitions[s]
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    /// Text dump: one `from<TAB>input<TAB>output<TAB>to` line per
    /// transition, then one line per final state.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (from, ts) in self.transitions.iter().enumerate() {
            for t in ts {
                out.push_str(&format!("{from}\t{}\t{}\t{}\n", t.input.dump(), t.output, t.to));
            }
        }
        for s in self.finals() {
            out.push_str(&format!("{s}\n"));
        }
        out
    }

    /// Every accepted (input, output) pair with at most `max_input_len`
    /// input symbols, found by exhaustive traversal.
    pub fn relation(&self, max_input_len: usize) -> BTreeSet<(SymbolString, String)> {
        let mut out = BTreeSet::new();
        let mut input = Vec::new();
        self.walk(self.initial, max_input_len, &mut input, &mut String::new(), &mut out);
        out
    }

    fn walk(
        &self,
        s: StateId,
        max: usize,
        input: &mut Vec<Symbol>,
        output: &mut String,
        out: &mut BTreeSet<(SymbolString, String)>,
    ) {
        if self.finals[s] {
            out.insert((SymbolString(input.clone()), output.clone()));
        }
        if input.len() == max {
            return;
        }
        for t in &self.transitions[s] {
            let len = output.len();
            input.push(t.input);
            output.push_str(&t.output);
            self.walk(t.to, max, input, output, out);
            output.truncate(len);
            input.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("graph {0:?} accepts the empty input")]
    EpsilonOnlyPath(String),
    #[error("graph {0:?} contains a cycle that consumes no input")]
    EpsilonCycle(String),
    #[error("compiling {graph:?} exceeds the limit of {cap} states")]
    CompileOverflow { graph: String, cap: usize },
    #[error("subgraph {0:?} is not in the library")]
    UnknownSubgraph(String),
    #[error("recursive call to subgraph {0:?}")]
    RecursiveCall(String),
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    pub max_states: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { max_states: DEFAULT_MAX_STATES }
    }
}

pub fn compile(g: &GraphIR, library: &GrammarLibrary) -> Result<Fst, CompileError> {
    compile_with(g, library, CompileOptions::default())
}

pub fn compile_with(g: &GraphIR, library: &GrammarLibrary, opts: CompileOptions) -> Result<Fst, CompileError> {
    let mut nfa = Nfa { arcs: Vec::new(), cap: opts.max_states, graph: &g.name };
    let mut stack = Vec::new();
    let (start, fin) = nfa.inline(g, library, &mut stack)?;
    nfa.remove_epsilons(start, fin, g)
}

struct Arc {
    input: Option<Symbol>,
    output: String,
    to: StateId,
}

struct Nfa<'a> {
    arcs: Vec<Vec<Arc>>,
    cap: usize,
    graph: &'a str,
}

impl Nfa<'_> {
    fn state(&mut self) -> Result<StateId, CompileError> {
        if self.arcs.len() >= self.cap {
            return Err(CompileError::CompileOverflow { graph: self.graph.to_string(), cap: self.cap });
        }
        self.arcs.push(Vec::new());
        Ok(self.arcs.len() - 1)
    }

    fn arc(&mut self, from: StateId, input: Option<Symbol>, output: &str, to: StateId) {
        self.arcs[from].push(Arc { input, output: output.to_string(), to });
    }

    /// Builds a fresh copy of `g`, returning its entry and exit states.
    /// Every state gets either only epsilon arcs or only consuming arcs.
    fn inline(
        &mut self,
        g: &GraphIR,
        library: &GrammarLibrary,
        stack: &mut Vec<String>,
    ) -> Result<(StateId, StateId), CompileError> {
        if stack.contains(&g.name) {
            return Err(CompileError::RecursiveCall(g.name.clone()));
        }
        stack.push(g.name.clone());
        let mut ends: HashMap<BoxId, (StateId, StateId)> = HashMap::new();
        for b in g.boxes.values() {
            let entry = self.state()?;
            let exit = if b.kind == BoxKind::Plain { self.state()? } else { entry };
            ends.insert(b.id, (entry, exit));
        }
        for b in g.boxes.values() {
            let (entry, exit) = ends[&b.id];
            let output = b.output.as_deref().unwrap_or("");
            for alt in &b.alternatives {
                let a = self.state()?;
                self.arc(entry, None, "", a);
                match alt {
                    Label::Literal(text) => {
                        let syms = literal_symbols(text);
                        let mut cur = a;
                        for (i, sym) in syms.iter().enumerate() {
                            if i + 1 == syms.len() {
                                self.arc(cur, Some(*sym), output, exit);
                            } else {
                                let next = self.state()?;
                                self.arc(cur, Some(*sym), "", next);
                                cur = next;
                            }
                        }
                    }
                    Label::Mask(p) => self.arc(a, Some(Symbol::Mask(*p)), output, exit),
                    Label::Epsilon => self.arc(a, None, output, exit),
                    Label::Subgraph(name) => {
                        let callee = if *name == g.name { Some(g) } else { library.get(name) };
                        let callee = callee.ok_or_else(|| CompileError::UnknownSubgraph(name.clone()))?;
                        let (s, e) = self.inline(callee, library, stack)?;
                        self.arc(a, None, "", s);
                        self.arc(e, None, output, exit);
                    }
                }
            }
            for succ in &b.successors {
                if let Some(&(succ_entry, _)) = ends.get(succ) {
                    self.arc(exit, None, "", succ_entry);
                }
            }
        }
        stack.pop();
        Ok((ends[&g.initial()].0, ends[&g.final_box()].0))
    }

    /// States reachable from `q` through epsilon arcs that either consume
    /// input or are final, with the output collected on the way, in
    /// depth-first arc order.
    fn closure(
        &self,
        q: StateId,
        fin: StateId,
        memo: &mut HashMap<StateId, Vec<(StateId, String)>>,
        active: &mut HashSet<StateId>,
    ) -> Result<Vec<(StateId, String)>, CompileError> {
        if let Some(c) = memo.get(&q) {
            return Ok(c.clone());
        }
        if !active.insert(q) {
            return Err(CompileError::EpsilonCycle(self.graph.to_string()));
        }
        let mut out: Vec<(StateId, String)> = Vec::new();
        let consuming = self.arcs[q].iter().any(|a| a.input.is_some());
        if q == fin || consuming {
            out.push((q, String::new()));
        }
        if !consuming {
            for a in &self.arcs[q] {
                for (r, o) in self.closure(a.to, fin, memo, active)? {
                    out.push((r, format!("{}{o}", a.output)));
                }
            }
        }
        let mut seen = HashSet::new();
        out.retain(|e| seen.insert(e.clone()));
        if out.len() > self.cap {
            return Err(CompileError::CompileOverflow { graph: self.graph.to_string(), cap: self.cap });
        }
        active.remove(&q);
        memo.insert(q, out.clone());
        Ok(out)
    }

    fn remove_epsilons(self, start: StateId, fin: StateId, g: &GraphIR) -> Result<Fst, CompileError> {
        let mut memo = HashMap::new();
        let mut active = HashSet::new();
        let n = self.arcs.len();
        // consuming arc p -x-> q becomes p -x-> r for every r in closure(q)
        let mut trans: Vec<Vec<Transition>> = Vec::with_capacity(n + 1);
        for p in 0..n {
            let mut ts = Vec::new();
            for a in &self.arcs[p] {
                let Some(input) = a.input else { continue };
                for (r, o) in self.closure(a.to, fin, &mut memo, &mut active)? {
                    ts.push(Transition { input, output: format!("{}{o}", a.output), to: r });
                }
            }
            dedup(&mut ts);
            trans.push(ts);
        }
        let mut init_ts = Vec::new();
        for (r, o) in self.closure(start, fin, &mut memo, &mut active)? {
            if r == fin {
                return Err(CompileError::EpsilonOnlyPath(g.name.clone()));
            }
            for t in &trans[r] {
                init_ts.push(Transition { input: t.input, output: format!("{o}{}", t.output), to: t.to });
            }
        }
        dedup(&mut init_ts);
        trans.push(init_ts);
        let init = n;
        let mut finals = vec![false; n + 1];
        finals[fin] = true;
        Ok(canonicalize(&g.name, g.tag.clone(), init, &finals, &trans))
    }
}

fn dedup(ts: &mut Vec<Transition>) {
    let mut seen = HashSet::new();
    ts.retain(|t| seen.insert(t.clone()));
}

/// Keeps useful states only and renumbers them breadth-first from the
/// initial state, following transitions in order.
fn canonicalize(name: &str, tag: Option<String>, init: StateId, finals: &[bool], trans: &[Vec<Transition>]) -> Fst {
    let n = trans.len();
    let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (p, ts) in trans.iter().enumerate() {
        for t in ts {
            rev[t.to].push(p);
        }
    }
    let mut coreach = vec![false; n];
    let mut stack: Vec<StateId> = (0..n).filter(|&s| finals[s]).collect();
    for &s in &stack {
        coreach[s] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &rev[s] {
            if !coreach[p] {
                coreach[p] = true;
                stack.push(p);
            }
        }
    }

    let mut number: Vec<Option<StateId>> = vec![None; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([init]);
    number[init] = Some(0);
    order.push(init);
    while let Some(s) = queue.pop_front() {
        for t in &trans[s] {
            if coreach[t.to] && number[t.to].is_none() {
                number[t.to] = Some(order.len());
                order.push(t.to);
                queue.push_back(t.to);
            }
        }
    }
    let transitions = order
        .iter()
        .map(|&s| {
            trans[s]
                .iter()
                .filter_map(|t| number[t.to].map(|to| Transition { input: t.input, output: t.output.clone(), to }))
                .collect()
        })
        .collect();
    Fst { name: name.to_string(), tag, initial: 0, finals: order.iter().map(|&s| finals[s]).collect(), transitions }
}

/// All INITIAL-to-FINAL paths of `g` with at most `max_input_len` input
/// symbols, enumerated directly on the graph.
pub fn enumerate_paths(
    g: &GraphIR,
    library: &GrammarLibrary,
    max_input_len: usize,
) -> BTreeSet<(SymbolString, String)> {
    enumerate_paths_ordered(g, library, max_input_len).into_iter().collect()
}

/// Same paths as [`enumerate_paths`], in depth-first order over
/// alternatives and successors, keeping the first of any duplicates.
pub fn enumerate_paths_ordered(
    g: &GraphIR,
    library: &GrammarLibrary,
    max_input_len: usize,
) -> Vec<(SymbolString, String)> {
    if max_input_len == 0 {
        return Vec::new();
    }
    let mut e = Enumerator { library, memo: HashMap::new(), depth: 0 };
    let paths = e.graph_paths(g, max_input_len);
    let mut seen = HashSet::new();
    paths
        .into_iter()
        .filter(|(i, _)| !i.is_empty())
        .map(|(i, o)| (SymbolString(i), o))
        .filter(|p| seen.insert(p.clone()))
        .collect()
}

type Paths = Vec<(Vec<Symbol>, String)>;

struct Enumerator<'a> {
    library: &'a GrammarLibrary,
    memo: HashMap<(String, BoxId, usize), Paths>,
    depth: usize,
}

const MAX_DEPTH: usize = 256;

impl Enumerator<'_> {
    fn graph_paths(&mut self, g: &GraphIR, budget: usize) -> Paths {
        self.paths_from(g, g.initial(), budget)
    }

    fn paths_from(&mut self, g: &GraphIR, id: BoxId, budget: usize) -> Paths {
        let key = (g.name.clone(), id, budget);
        if let Some(p) = self.memo.get(&key) {
            return p.clone();
        }
        if self.depth > MAX_DEPTH {
            return Vec::new();
        }
        self.depth += 1;
        let b = &g.boxes[&id];
        let mut out = Vec::new();
        if b.kind == BoxKind::Final {
            out.push((Vec::new(), String::new()));
        } else {
            let mut heads: Paths = Vec::new();
            if b.kind == BoxKind::Initial {
                heads.push((Vec::new(), String::new()));
            }
            let box_out = b.output.as_deref().unwrap_or("");
            for alt in &b.alternatives {
                for (i, o) in self.label_paths(g, alt, budget) {
                    heads.push((i, format!("{o}{box_out}")));
                }
            }
            for (hi, ho) in heads {
                for succ in &b.successors {
                    if !g.boxes.contains_key(succ) {
                        continue;
                    }
                    for (ti, to) in self.paths_from(g, *succ, budget - hi.len()) {
                        let mut input = hi.clone();
                        input.extend(ti);
                        out.push((input, format!("{ho}{to}")));
                    }
                }
            }
        }
        self.depth -= 1;
        self.memo.insert(key, out.clone());
        out
    }

    fn label_paths(&mut self, g: &GraphIR, label: &Label, budget: usize) -> Paths {
        match label {
            Label::Literal(text) => {
                let syms = literal_symbols(text);
                if syms.len() <= budget {
                    vec![(syms, String::new())]
                } else {
                    Vec::new()
                }
            }
            Label::Mask(p) if budget >= 1 => vec![(vec![Symbol::Mask(*p)], String::new())],
            Label::Mask(_) => Vec::new(),
            Label::Epsilon => vec![(Vec::new(), String::new())],
            Label::Subgraph(name) => {
                let callee = if *name == g.name { Some(g.clone()) } else { self.library.get(name).cloned() };
                match callee {
                    Some(c) => self.graph_paths(&c, budget),
                    None => Vec::new(),
                }
            }
        }
    }
}
