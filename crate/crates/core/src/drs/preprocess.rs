use std::collections::BTreeSet;

use super::{labels, Edge, Node, NodeKind, PredOrigin, Predicate, SemanticGraph};

fn fresh_var(g: &SemanticGraph, prefix: &str, start: usize) -> (String, usize) {
    let mut k = start;
    loop {
        let candidate = format!("{prefix}{k}");
        if !g.nodes.contains_key(&candidate) {
            return (candidate, k + 1);
        }
        k += 1;
    }
}

/// Graph conversion applied once after parsing.
///
/// * `nn` edges are reversed and relabelled `nn-of`, so the modified noun
///   heads the modifier noun.
/// * `named(x, w)` and `timex(x) = v` facts become predicates on `x`.
/// * Positions carried by an edge become a relation predicate on its
///   dependent.
/// * Every uncovered token gets an orphan node, attached by an `orphan` edge
///   to the owner of the nearest covered position (the left one on ties).
///
/// Running it twice changes nothing.
pub fn preprocess(mut g: SemanticGraph) -> SemanticGraph {
    for edge in &mut g.edges {
        if edge.label == labels::NN {
            std::mem::swap(&mut edge.from, &mut edge.to);
            edge.label = labels::NN_OF.to_string();
        }
    }

    for node in g.nodes.values_mut() {
        for (word, pos) in node.named.drain(..) {
            node.preds.push(Predicate {
                lemma: word,
                positions: BTreeSet::from([pos]),
                origin: PredOrigin::Named,
            });
        }
        for (value, pos) in node.timex.drain(..) {
            node.preds.push(Predicate {
                lemma: value,
                positions: BTreeSet::from([pos]),
                origin: PredOrigin::Timex,
            });
        }
    }

    for i in 0..g.edges.len() {
        if g.edges[i].positions.is_empty() {
            continue;
        }
        let positions = std::mem::take(&mut g.edges[i].positions);
        let label = g.edges[i].label.clone();
        if let Some(dep) = g.nodes.get_mut(&g.edges[i].to) {
            dep.preds.push(Predicate {
                lemma: label,
                positions,
                origin: PredOrigin::Relation,
            });
        }
    }

    attach_orphans(&mut g);
    g
}

fn attach_orphans(g: &mut SemanticGraph) {
    let owners: Vec<Option<String>> = g
        .position_owners()
        .into_iter()
        .map(|o| o.map(str::to_string))
        .collect();
    let covered: Vec<usize> = (0..owners.len()).filter(|&p| owners[p].is_some()).collect();
    let uncovered: Vec<usize> = (0..owners.len()).filter(|&p| owners[p].is_none()).collect();

    let mut next = 1;
    let mut first_orphan: Option<String> = None;
    for p in uncovered {
        let (var, k) = fresh_var(g, "O", next);
        next = k;
        let surface = g.tokens[p].surface.clone();
        g.add_node(Node::new(
            var.clone(),
            NodeKind::Orphan,
            vec![Predicate {
                lemma: surface,
                positions: BTreeSet::from([p]),
                origin: PredOrigin::Orphan,
            }],
        ));

        let anchor = nearest_covered(&covered, p).and_then(|q| owners[q].clone());
        match anchor.or_else(|| first_orphan.clone()) {
            Some(anchor) => g.add_edge(Edge::new(anchor, var.clone(), labels::ORPHAN)),
            None => first_orphan = Some(var),
        }
    }
}

fn nearest_covered(covered: &[usize], p: usize) -> Option<usize> {
    let idx = covered.partition_point(|&q| q < p);
    let left = idx.checked_sub(1).map(|i| covered[i]);
    let right = covered.get(idx).copied();
    match (left, right) {
        (Some(l), Some(r)) => Some(if p - l <= r - p { l } else { r }),
        (l, r) => l.or(r),
    }
}

/// Moves every non-head lexical predicate of a node into a child node joined
/// by a `modifier` edge. The head is the rightmost lexical predicate.
pub fn lift_modifiers(mut g: SemanticGraph) -> SemanticGraph {
    let candidates: Vec<String> = g
        .nodes
        .values()
        .filter(|n| n.kind != NodeKind::Orphan)
        .filter(|n| n.preds.iter().filter(|p| p.origin == PredOrigin::Lexical).count() > 1)
        .map(|n| n.var.clone())
        .collect();

    for var in candidates {
        let node = g.nodes.get_mut(&var).expect("candidate exists");
        let head_index = {
            let head = node.head_predicate().expect("has lexical predicates");
            node.preds.iter().position(|p| std::ptr::eq(p, head)).expect("head is a member")
        };
        let mut lifted = Vec::new();
        let mut kept = Vec::new();
        for (i, pred) in std::mem::take(&mut node.preds).into_iter().enumerate() {
            if i != head_index && pred.origin == PredOrigin::Lexical {
                lifted.push(pred);
            } else {
                kept.push(pred);
            }
        }
        node.preds = kept;
        lifted.sort_by_key(|p| p.positions.iter().next().copied());

        let mut next = 1;
        for pred in lifted {
            let (child, k) = fresh_var(&g, &format!("{var}_m"), next);
            next = k;
            g.add_node(Node::new(child.clone(), NodeKind::Entity, vec![pred]));
            g.add_edge(Edge::new(var.clone(), child, labels::MODIFIER));
        }
    }
    g
}
