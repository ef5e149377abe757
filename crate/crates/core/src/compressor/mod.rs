//! Phrasal deletion as a 0-1 integer program.
//!
//! Every optional relation on a spanning tree of the graph gets a keep
//! variable weighted by `P(r | h) * P(w)`: how usual the relation is under its
//! head, times how frequent the dependent's head word is in simple text. The
//! program maximizes the kept weight under two kinds of constraints. Deleting
//! an edge deletes its whole subtree, and at least one optional edge must go.

mod probs;
mod program;
mod solver;

use std::collections::BTreeSet;

use crate::drs::{labels, Edge, SemanticGraph};

pub use probs::{RelProbTable, REL_FLOOR};
pub use program::{build_program, final_terminal_orphan, is_optional, DeletionProgram, DeletionVar, SpanningForest, MANDATORY};
pub use solver::{solve, BinaryProgram, Constraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompressOptions {
    /// Require at least this many deleted tokens. Zero keeps only the
    /// one-edge minimum.
    pub min_deleted_tokens: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compression {
    pub program: DeletionProgram,
    /// `None` when nothing was deletable or the constraints had no solution.
    pub assignment: Option<Vec<bool>>,
    pub deleted: BTreeSet<String>,
    pub graph: SemanticGraph,
}

/// Solves the deletion program of `g` and removes the deleted subtrees. A
/// sentence-final `.`, `!` or `?` orphan is kept and re-attached to its
/// component root.
pub fn compress_detailed(g: &SemanticGraph, probs: &RelProbTable, opts: &CompressOptions) -> Compression {
    let program = build_program(g, probs, opts.min_deleted_tokens);
    let assignment = if program.is_deletable() {
        solve(&program.program)
    } else {
        None
    };
    let Some(x) = &assignment else {
        return Compression {
            program,
            assignment,
            deleted: BTreeSet::new(),
            graph: g.clone(),
        };
    };
    let mut deleted = program.deleted_nodes(x);

    let mut reattach = None;
    if let Some(p) = final_terminal_orphan(g) {
        let owner = g.position_owners()[p].expect("owned").to_string();
        if deleted.remove(&owner) {
            reattach = Some(owner);
        }
    }

    let keep: BTreeSet<String> = g.all_vars().difference(&deleted).cloned().collect();
    let mut graph = g.restrict(&keep);
    if let Some(var) = reattach {
        let root = program.forest.root_of[&var].clone();
        if !graph.edges.iter().any(|e| e.to == var) {
            graph.add_edge(Edge::new(root, var, labels::ORPHAN));
        }
    }
    Compression {
        program,
        assignment,
        deleted,
        graph,
    }
}

pub fn compress(g: &SemanticGraph, probs: &RelProbTable, opts: &CompressOptions) -> SemanticGraph {
    compress_detailed(g, probs, opts).graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drs::{lift_modifiers, preprocess, realize, Node, NodeKind, Predicate};

    // "Kim read a book in Paris ."
    fn sentence() -> SemanticGraph {
        let mut g = SemanticGraph::new("s", &["Kim", "read", "a", "book", "in", "Paris", "."]);
        g.add_node(Node::new("X1", NodeKind::Entity, vec![Predicate::lexical("kim", [0])]));
        g.add_node(Node::new("E1", NodeKind::Event, vec![Predicate::lexical("read", [1])]));
        g.add_node(Node::new("X2", NodeKind::Entity, vec![Predicate::lexical("book", [3])]));
        g.add_node(Node::new("X3", NodeKind::Entity, vec![Predicate::lexical("paris", [5])]));
        g.add_edge(Edge::new("E1", "X1", "agent"));
        g.add_edge(Edge::new("E1", "X2", "patient"));
        let mut e = Edge::new("E1", "X3", "in");
        e.positions.insert(4);
        g.add_edge(e);
        lift_modifiers(preprocess(g))
    }

    fn probs() -> RelProbTable {
        RelProbTable::train(&[sentence()], "Kim read a book in Paris .").unwrap()
    }

    #[test]
    fn only_optional_edges_get_variables() {
        let p = build_program(&sentence(), &probs(), 0);
        assert_eq!(p.vars.len(), 1);
        assert_eq!(p.vars[0].label, "in");
        // "in Paris"; the final period attached to Paris is kept anyway
        assert_eq!(p.vars[0].own_tokens, 2);
    }

    #[test]
    fn lone_optional_edge_is_deleted_and_period_survives() {
        let g = sentence();
        let out = compress(&g, &probs(), &CompressOptions::default());
        assert_eq!(realize(&out, &out.all_vars()), "Kim read a book .");
        out.check_coverage().unwrap();
    }

    #[test]
    fn mandatory_only_graph_is_identity() {
        let mut g = SemanticGraph::new("s", &["Kim", "slept"]);
        g.add_node(Node::new("X1", NodeKind::Entity, vec![Predicate::lexical("kim", [0])]));
        g.add_node(Node::new("E1", NodeKind::Event, vec![Predicate::lexical("sleep", [1])]));
        g.add_edge(Edge::new("E1", "X1", "agent"));
        let c = compress_detailed(&g, &probs(), &CompressOptions::default());
        assert!(!c.program.is_deletable());
        assert_eq!(c.graph, g);
    }

    #[test]
    fn forest_prefers_outgoing_edges() {
        let g = sentence();
        let f = SpanningForest::build(&g);
        assert_eq!(f.roots, vec!["E1".to_string()]);
        assert_eq!(f.order[0], "E1");
        assert_eq!(f.parent["X1"].0, "E1");
    }
}
