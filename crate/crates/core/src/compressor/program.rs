use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::probs::RelProbTable;
use super::solver::{BinaryProgram, Constraint};
use crate::drs::{is_terminal, labels, NodeKind, SemanticGraph};

/// Relations that are never deletion candidates.
pub const MANDATORY: [&str; 4] = ["agent", "patient", "theme", "eq"];

pub fn is_optional(label: &str) -> bool {
    !MANDATORY.contains(&label) && label != labels::ORPHAN
}

/// Spanning forest of a graph: one BFS tree per connected component, rooted
/// at the component's earliest event (or earliest node when it has none).
/// From each node, outgoing edges are followed before incoming ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningForest {
    pub roots: Vec<String>,
    /// Node visiting order, roots first within their component.
    pub order: Vec<String>,
    /// Tree parent of every non-root node and the edge that reached it.
    pub parent: BTreeMap<String, (String, usize)>,
    /// Root of the component each node belongs to.
    pub root_of: BTreeMap<String, String>,
}

impl SpanningForest {
    pub fn build(g: &SemanticGraph) -> Self {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        let mut inc: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, e) in g.edges.iter().enumerate() {
            out.entry(e.from.as_str()).or_default().push(i);
            inc.entry(e.to.as_str()).or_default().push(i);
        }
        let adj = g.neighbours();

        let mut assigned: BTreeSet<&str> = BTreeSet::new();
        let mut components: Vec<Vec<&str>> = Vec::new();
        for start in g.nodes.keys() {
            if !assigned.insert(start) {
                continue;
            }
            let mut comp = vec![start.as_str()];
            let mut queue = VecDeque::from([start.as_str()]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &adj[v] {
                    if assigned.insert(w) {
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            components.push(comp);
        }

        let rank = |v: &str| {
            let node = &g.nodes[v];
            (!node.is_event(), node.min_position().unwrap_or(usize::MAX), v.to_string())
        };
        let mut roots: Vec<&str> = components
            .iter()
            .map(|c| *c.iter().min_by_key(|v| rank(v)).expect("non-empty component"))
            .collect();
        roots.sort_by_key(|v| rank(v));

        let mut forest = SpanningForest {
            roots: roots.iter().map(|r| r.to_string()).collect(),
            order: Vec::new(),
            parent: BTreeMap::new(),
            root_of: BTreeMap::new(),
        };
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for root in roots {
            seen.insert(root);
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                forest.order.push(v.to_string());
                forest.root_of.insert(v.to_string(), root.to_string());
                let outgoing = out.get(v).into_iter().flatten().map(|&i| (g.edges[i].to.as_str(), i));
                let incoming = inc.get(v).into_iter().flatten().map(|&i| (g.edges[i].from.as_str(), i));
                for (w, i) in outgoing.chain(incoming).collect::<Vec<_>>() {
                    if g.nodes.contains_key(w) && seen.insert(w) {
                        forest.parent.insert(w.to_string(), (v.to_string(), i));
                        queue.push_back(w);
                    }
                }
            }
        }
        forest
    }

    pub fn tree_edges(&self) -> BTreeSet<usize> {
        self.parent.values().map(|&(_, i)| i).collect()
    }
}

/// One decision variable: keep (1) or delete (0) a tree edge and the
/// subtree below it.
#[derive(Debug, Clone, PartialEq)]
pub struct DeletionVar {
    pub edge: usize,
    pub label: String,
    /// Head lemma of the relation's source node.
    pub head: String,
    /// Head word of the dependent subtree.
    pub word: String,
    /// Tree child reached through the edge.
    pub child: String,
    /// Nearest enclosing variable.
    pub parent: Option<usize>,
    pub weight: f64,
    /// Nodes governed directly by this variable (nested variables excluded).
    pub own_nodes: BTreeSet<String>,
    pub own_tokens: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeletionProgram {
    pub forest: SpanningForest,
    pub vars: Vec<DeletionVar>,
    pub program: BinaryProgram,
    /// Variables forced to 1 by non-tree edges touching their subtree.
    pub pinned: BTreeSet<usize>,
}

impl DeletionProgram {
    /// False when the graph has no optional tree edge; compression is then
    /// the identity.
    pub fn is_deletable(&self) -> bool {
        !self.vars.is_empty()
    }

    /// Nodes removed by an assignment.
    pub fn deleted_nodes(&self, x: &[bool]) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (i, v) in self.vars.iter().enumerate() {
            if !self.kept(i, x) {
                out.extend(v.own_nodes.iter().cloned());
            }
        }
        out
    }

    /// A variable's subtree survives only if it and every enclosing variable
    /// are set.
    fn kept(&self, mut i: usize, x: &[bool]) -> bool {
        loop {
            if !x[i] {
                return false;
            }
            match self.vars[i].parent {
                Some(p) => i = p,
                None => return true,
            }
        }
    }

    pub fn deleted_tokens(&self, x: &[bool]) -> usize {
        (0..self.vars.len())
            .filter(|&i| !self.kept(i, x))
            .map(|i| self.vars[i].own_tokens)
            .sum()
    }
}

/// Position of a sentence-final `.`, `!` or `?` owned by an orphan node.
/// Compression never removes it.
pub fn final_terminal_orphan(g: &SemanticGraph) -> Option<usize> {
    let last = g.tokens.len().checked_sub(1)?;
    if !is_terminal(&g.tokens[last].surface) {
        return None;
    }
    let owner = g.position_owners()[last]?;
    (g.nodes[owner].kind == NodeKind::Orphan).then_some(last)
}

/// Builds the deletion program of a preprocessed, modifier-lifted graph.
/// `min_deleted_tokens`, when non-zero, adds a row requiring at least that
/// many tokens to go (clamped to what is deletable).
pub fn build_program(g: &SemanticGraph, probs: &RelProbTable, min_deleted_tokens: usize) -> DeletionProgram {
    let forest = SpanningForest::build(g);
    let kept_final = final_terminal_orphan(g);

    let mut governing: BTreeMap<&str, Option<usize>> = BTreeMap::new();
    let mut vars: Vec<DeletionVar> = Vec::new();
    for v in &forest.order {
        let gov = match forest.parent.get(v) {
            None => None,
            Some((p, edge)) => {
                let enclosing = governing[p.as_str()];
                let e = &g.edges[*edge];
                if is_optional(&e.label) {
                    let head = g.node(&e.from).map_or("", |n| n.head_lemma()).to_string();
                    let word = g.head_surface(v).unwrap_or_default();
                    vars.push(DeletionVar {
                        edge: *edge,
                        label: e.label.clone(),
                        weight: probs.rel_prob(&e.label, &head) * probs.word_prob(&word),
                        head,
                        word,
                        child: v.clone(),
                        parent: enclosing,
                        own_nodes: BTreeSet::new(),
                        own_tokens: 0,
                    });
                    Some(vars.len() - 1)
                } else {
                    enclosing
                }
            }
        };
        if let Some(i) = gov {
            vars[i].own_nodes.insert(v.clone());
            vars[i].own_tokens += g.nodes[v].positions().iter().filter(|&&p| Some(p) != kept_final).count();
        }
        governing.insert(v.as_str(), gov);
    }

    let mut constraints = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        if let Some(p) = v.parent {
            constraints.push(Constraint::new(vec![(i, 1), (p, -1)], 0));
        }
    }
    let tree = forest.tree_edges();
    let mut pinned = BTreeSet::new();
    for (i, e) in g.edges.iter().enumerate() {
        if tree.contains(&i) {
            continue;
        }
        for end in [&e.from, &e.to] {
            if let Some(&Some(r)) = governing.get(end.as_str()) {
                pinned.insert(r);
            }
        }
    }
    for &r in &pinned {
        constraints.push(Constraint::new(vec![(r, -1)], -1));
    }
    if !vars.is_empty() {
        let all: Vec<(usize, i64)> = (0..vars.len()).map(|i| (i, 1)).collect();
        constraints.push(Constraint::new(all, vars.len() as i64 - 1));
        let deletable: usize = vars.iter().map(|v| v.own_tokens).sum();
        let k = min_deleted_tokens.min(deletable);
        if k > 0 {
            let row = vars
                .iter()
                .enumerate()
                .filter(|(_, v)| v.own_tokens > 0)
                .map(|(i, v)| (i, v.own_tokens as i64))
                .collect();
            constraints.push(Constraint::new(row, (deletable - k) as i64));
        }
    }

    DeletionProgram {
        program: BinaryProgram {
            weights: vars.iter().map(|v| v.weight).collect(),
            constraints,
        },
        forest,
        vars,
        pinned,
    }
}
