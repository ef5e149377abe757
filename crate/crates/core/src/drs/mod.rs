//! Semantic graphs derived from discourse representation structures.
//!
//! A [`SemanticGraph`] holds one sentence: its tokens, one node per DRS
//! variable, and labelled edges for the relations between variables. Every
//! predicate remembers the token positions it was produced from, which is what
//! lets a graph (or any subset of its nodes) be turned back into text.
//!
//! Graphs come out of [`parse`] raw. [`preprocess`] applies the conversion
//! steps (nn inversion, named/timex folding, orphan nodes) and
//! [`lift_modifiers`] turns modifier predicates into child nodes, which the
//! splitter and the compressor both expect.

mod parse;
mod preprocess;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};

pub use parse::{parse_drs_file, parse_drs_line, parse_drs_str};
pub use preprocess::{lift_modifiers, preprocess};

/// Relation labels with a fixed meaning inside the toolkit.
pub mod labels {
    pub const NN: &str = "nn";
    pub const NN_OF: &str = "nn-of";
    pub const ORPHAN: &str = "orphan";
    pub const MODIFIER: &str = "modifier";
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub surface: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Event,
    Entity,
    Orphan,
}

/// Where a predicate came from. Only `Lexical` predicates are candidates for
/// modifier lifting; the others are part of a name, a date or a relation
/// marker and travel with their node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredOrigin {
    Lexical,
    Named,
    Timex,
    /// Surface material of an incoming relation (typically a preposition).
    Relation,
    Orphan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub lemma: String,
    pub positions: BTreeSet<usize>,
    pub origin: PredOrigin,
}

impl Predicate {
    pub fn lexical(lemma: impl Into<String>, positions: impl IntoIterator<Item = usize>) -> Self {
        Predicate {
            lemma: lemma.into(),
            positions: positions.into_iter().collect(),
            origin: PredOrigin::Lexical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub var: String,
    pub kind: NodeKind,
    pub preds: Vec<Predicate>,
    /// Raw `named(x, w)` facts, folded into predicates by preprocessing.
    pub named: Vec<(String, usize)>,
    /// Raw `timex(x) = v` facts, folded into predicates by preprocessing.
    pub timex: Vec<(String, usize)>,
}

impl Node {
    pub fn new(var: impl Into<String>, kind: NodeKind, preds: Vec<Predicate>) -> Self {
        Node {
            var: var.into(),
            kind,
            preds,
            named: Vec::new(),
            timex: Vec::new(),
        }
    }

    /// Positions of all predicates plus any not-yet-folded named/timex facts.
    pub fn positions(&self) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self
            .preds
            .iter()
            .flat_map(|p| p.positions.iter().copied())
            .collect();
        out.extend(self.named.iter().map(|(_, p)| *p));
        out.extend(self.timex.iter().map(|(_, p)| *p));
        out
    }

    pub fn min_position(&self) -> Option<usize> {
        self.positions().into_iter().next()
    }

    /// The syntactic head: the rightmost lexical predicate, else the
    /// rightmost predicate of any origin.
    pub fn head_predicate(&self) -> Option<&Predicate> {
        let rightmost = |p: &&Predicate| p.positions.iter().next_back().map_or(-1, |&x| x as i64);
        self.preds
            .iter()
            .filter(|p| p.origin == PredOrigin::Lexical)
            .max_by_key(rightmost)
            .or_else(|| self.preds.iter().max_by_key(rightmost))
    }

    pub fn head_lemma(&self) -> &str {
        self.head_predicate().map_or(self.var.as_str(), |p| p.lemma.as_str())
    }

    pub fn is_event(&self) -> bool {
        self.kind == NodeKind::Event
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub label: String,
    /// Token positions realizing the relation itself, e.g. the preposition of
    /// an `in` edge. Moved onto the dependent node by preprocessing.
    pub positions: BTreeSet<usize>,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, label: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            label: label.into(),
            positions: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticGraph {
    pub id: String,
    pub tokens: Vec<Token>,
    pub nodes: BTreeMap<String, Node>,
    pub edges: Vec<Edge>,
}

impl SemanticGraph {
    pub fn new(id: impl Into<String>, surfaces: &[&str]) -> Self {
        SemanticGraph {
            id: id.into(),
            tokens: surfaces
                .iter()
                .enumerate()
                .map(|(index, s)| Token {
                    index,
                    surface: s.to_string(),
                })
                .collect(),
            nodes: BTreeMap::new(),
            edges: Vec::new(),
        }
    }

    pub fn add_node(&mut self, node: Node) {
        self.nodes.insert(node.var.clone(), node);
    }

    pub fn add_edge(&mut self, edge: Edge) {
        self.edges.push(edge);
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    pub fn node(&self, var: &str) -> Option<&Node> {
        self.nodes.get(var)
    }

    pub fn all_vars(&self) -> BTreeSet<String> {
        self.nodes.keys().cloned().collect()
    }

    pub fn outgoing<'a>(&'a self, var: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.from == var)
    }

    /// Surface of the head predicate's rightmost token, lowercased.
    pub fn head_surface(&self, var: &str) -> Option<String> {
        let node = self.nodes.get(var)?;
        let head = node.head_predicate()?;
        match head.positions.iter().next_back() {
            Some(&p) => self.tokens.get(p).map(|t| t.surface.to_lowercase()),
            None => Some(head.lemma.to_lowercase()),
        }
    }

    /// For every token position, the variable of the node covering it.
    pub fn position_owners(&self) -> Vec<Option<&str>> {
        let mut owners = vec![None; self.tokens.len()];
        for node in self.nodes.values() {
            for p in node.positions() {
                if let Some(slot) = owners.get_mut(p) {
                    *slot = Some(node.var.as_str());
                }
            }
        }
        owners
    }

    /// Checks that predicate positions partition the token index set.
    pub fn check_coverage(&self) -> Result<()> {
        let mut seen = vec![false; self.tokens.len()];
        for node in self.nodes.values() {
            for pred in &node.preds {
                for &p in &pred.positions {
                    match seen.get_mut(p) {
                        None => {
                            return Err(Error::invalid(
                                &self.id,
                                format!("{} covers position {p} beyond the sentence", node.var),
                            ))
                        }
                        Some(true) => {
                            return Err(Error::invalid(
                                &self.id,
                                format!("position {p} covered twice"),
                            ))
                        }
                        Some(slot) => *slot = true,
                    }
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(p) => Err(Error::invalid(&self.id, format!("position {p} uncovered"))),
            None => Ok(()),
        }
    }

    /// Undirected neighbour lists, in edge order.
    pub fn neighbours(&self) -> BTreeMap<&str, Vec<(&str, usize)>> {
        let mut adj: BTreeMap<&str, Vec<(&str, usize)>> =
            self.nodes.keys().map(|k| (k.as_str(), Vec::new())).collect();
        for (i, e) in self.edges.iter().enumerate() {
            if let Some(v) = adj.get_mut(e.from.as_str()) {
                v.push((e.to.as_str(), i));
            }
            if let Some(v) = adj.get_mut(e.to.as_str()) {
                v.push((e.from.as_str(), i));
            }
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.nodes.keys().next() else {
            return true;
        };
        let adj = self.neighbours();
        let mut seen = BTreeSet::from([start.as_str()]);
        let mut queue = VecDeque::from([start.as_str()]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == self.nodes.len()
    }

    /// Keeps only `keep` and the edges between kept nodes, renumbering the
    /// surviving token positions so they are contiguous from 0 again.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> SemanticGraph {
        let mut surviving = BTreeSet::new();
        for var in keep {
            if let Some(node) = self.nodes.get(var) {
                surviving.extend(node.positions());
            }
        }
        let remap: BTreeMap<usize, usize> = surviving
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let tokens = surviving
            .iter()
            .map(|&old| Token {
                index: remap[&old],
                surface: self.tokens[old].surface.clone(),
            })
            .collect();
        let renumber = |set: &BTreeSet<usize>| set.iter().filter_map(|p| remap.get(p).copied()).collect();
        let nodes = self
            .nodes
            .iter()
            .filter(|(var, _)| keep.contains(*var))
            .map(|(var, node)| {
                let mut node = node.clone();
                for pred in &mut node.preds {
                    pred.positions = renumber(&pred.positions);
                }
                for (_, p) in node.named.iter_mut().chain(node.timex.iter_mut()) {
                    *p = remap[p];
                }
                (var.clone(), node)
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.from) && keep.contains(&e.to))
            .map(|e| Edge {
                positions: renumber(&e.positions),
                ..e.clone()
            })
            .collect();
        SemanticGraph {
            id: self.id.clone(),
            tokens,
            nodes,
            edges,
        }
    }
}

/// Tokens covered by the nodes in `subset`, in sentence order.
pub fn realize_tokens<'a>(g: &'a SemanticGraph, subset: &BTreeSet<String>) -> Vec<&'a str> {
    let positions: BTreeSet<usize> = subset
        .iter()
        .filter_map(|v| g.nodes.get(v))
        .flat_map(|n| n.positions())
        .collect();
    positions
        .into_iter()
        .filter_map(|p| g.tokens.get(p).map(|t| t.surface.as_str()))
        .collect()
}

/// Realizes a node subset as a space-joined token string. No detokenization.
pub fn realize(g: &SemanticGraph, subset: &BTreeSet<String>) -> String {
    realize_tokens(g, subset).join(" ")
}

/// Event variables ordered by their leftmost token position.
///
/// Two events anchored at the same position, or an event with no position at
/// all, make the graph unusable for splitting and are reported as invalid.
pub fn events_of(g: &SemanticGraph) -> Result<Vec<String>> {
    let mut events = Vec::new();
    for node in g.nodes.values().filter(|n| n.is_event()) {
        let pos = node
            .min_position()
            .ok_or_else(|| Error::invalid(&g.id, format!("event {} has no position", node.var)))?;
        events.push((pos, node.var.clone()));
    }
    events.sort();
    if let Some(w) = events.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid(
            &g.id,
            format!("events {} and {} share position {}", w[0].1, w[1].1, w[0].0),
        ));
    }
    Ok(events.into_iter().map(|(_, v)| v).collect())
}

/// True for tokens made only of punctuation.
pub fn is_punct(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(char::is_alphanumeric)
}

pub fn is_terminal(token: &str) -> bool {
    matches!(token, "." | "!" | "?")
}

/// Number of non-punctuation tokens.
pub fn word_count<S: AsRef<str>>(tokens: &[S]) -> usize {
    tokens.iter().filter(|t| !is_punct(t.as_ref())).count()
}
