//! Turning a partition of the events into one token sequence per block.
//!
//! Every node is reached from the events of one or more blocks. A node reached
//! from a single block belongs to it. A shared node belongs to the earliest
//! block reaching it and is rebuilt at the start of every later block that
//! touches it: the node plus its `nn-of` and `modifier` descendants (e.g.
//! "Higgs mechanism"). Orphans shared between blocks sit on the split boundary
//! and are dropped.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::drs::{is_terminal, labels, Edge, Node, NodeKind, PredOrigin, Predicate, SemanticGraph, Token};

/// Nodes reachable from `block` without passing through events of other blocks.
pub fn block_closure(g: &SemanticGraph, block: &[String]) -> BTreeSet<String> {
    let in_block: BTreeSet<&str> = block.iter().map(String::as_str).collect();
    let adj = g.neighbours();
    let mut seen: BTreeSet<&str> = in_block.iter().copied().filter(|v| g.nodes.contains_key(*v)).collect();
    let mut queue: VecDeque<&str> = seen.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            let barrier = g.nodes[w].is_event() && !in_block.contains(w);
            if !barrier && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.into_iter().map(str::to_string).collect()
}

/// One shared node rebuilt at the start of a later block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedCopy {
    /// The shared node the copy is anchored on.
    pub anchor: String,
    /// The anchor plus its `nn-of`/`modifier` descendants.
    pub nodes: BTreeSet<String>,
    pub positions: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    /// Events of the block in position order.
    pub events: Vec<String>,
    pub closure: BTreeSet<String>,
    /// Nodes realized in place by this block.
    pub home: BTreeSet<String>,
    /// Positions realized in place by this block.
    pub own: BTreeSet<usize>,
    pub copies: Vec<SharedCopy>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitLayout {
    /// Blocks ordered by their earliest event position.
    pub blocks: Vec<BlockLayout>,
    /// Boundary orphans dropped by the split.
    pub dropped: BTreeSet<usize>,
}

fn np_subtree(g: &SemanticGraph, root: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::from([root.to_string()]);
    let mut stack = vec![root.to_string()];
    while let Some(v) = stack.pop() {
        for e in g.outgoing(&v) {
            if (e.label == labels::NN_OF || e.label == labels::MODIFIER) && out.insert(e.to.clone()) {
                stack.push(e.to.clone());
            }
        }
    }
    out
}

/// Lays out `partition` (blocks of event variables). Blocks are reordered by
/// their earliest event; events inside a block are put in position order.
pub fn layout(g: &SemanticGraph, partition: &[Vec<String>]) -> SplitLayout {
    let min_pos = |v: &String| g.nodes.get(v).and_then(Node::min_position).unwrap_or(usize::MAX);
    let mut blocks: Vec<Vec<String>> = partition
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_by_key(|v| (min_pos(v), v.clone()));
            b
        })
        .collect();
    blocks.sort_by_key(|b| b.first().map(min_pos).unwrap_or(usize::MAX));

    let closures: Vec<BTreeSet<String>> = blocks.iter().map(|b| block_closure(g, b)).collect();

    let mut owners: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in closures.iter().enumerate() {
        for v in c {
            owners.entry(v.as_str()).or_default().push(i);
        }
    }

    let mut homes: Vec<BTreeSet<String>> = vec![BTreeSet::new(); blocks.len()];
    let mut dropped = BTreeSet::new();
    for (var, node) in &g.nodes {
        let reached = owners.get(var.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if reached.len() > 1 && node.kind == NodeKind::Orphan {
            dropped.extend(node.positions());
            continue;
        }
        // unreachable material stays with the first sentence
        let home = reached.first().copied().unwrap_or(0);
        if let Some(h) = homes.get_mut(home) {
            h.insert(var.clone());
        }
    }

    let adj = g.neighbours();
    let blocks = blocks
        .into_iter()
        .zip(closures.iter().cloned())
        .enumerate()
        .map(|(i, (events, closure))| {
            let home = std::mem::take(&mut homes[i]);
            let own: BTreeSet<usize> = home.iter().flat_map(|v| g.nodes[v].positions()).collect();

            // shared nodes homed elsewhere that touch this block's own nodes
            let mut anchors: BTreeSet<&str> = BTreeSet::new();
            for v in &home {
                for &(w, _) in &adj[v.as_str()] {
                    let shared = owners.get(w).is_some_and(|o| o.len() > 1);
                    if shared && closure.contains(w) && !home.contains(w) && g.nodes[w].kind != NodeKind::Orphan {
                        anchors.insert(w);
                    }
                }
            }
            let mut copies: Vec<SharedCopy> = anchors
                .into_iter()
                .map(|a| {
                    let nodes: BTreeSet<String> = np_subtree(g, a)
                        .into_iter()
                        .filter(|v| g.nodes[v].kind != NodeKind::Orphan && !home.contains(v))
                        .collect();
                    let positions = nodes.iter().flat_map(|v| g.nodes[v].positions()).collect();
                    SharedCopy {
                        anchor: a.to_string(),
                        nodes,
                        positions,
                    }
                })
                .collect();
            // an anchor inside another anchor's copy is already covered
            let all: Vec<SharedCopy> = copies.clone();
            copies.retain(|c| !all.iter().any(|o| o.anchor != c.anchor && o.nodes.contains(&c.anchor)));
            copies.sort_by_key(|c| c.positions.iter().next().copied());

            BlockLayout {
                events,
                closure,
                home,
                own,
                copies,
            }
        })
        .collect();

    SplitLayout { blocks, dropped }
}

fn pronoun_for(g: &SemanticGraph, anchor: &str) -> &'static str {
    let plural = g
        .head_surface(anchor)
        .is_some_and(|s| s.ends_with('s') && !s.ends_with("ss"));
    if plural {
        "They"
    } else {
        "It"
    }
}

/// Longest shared copy kept verbatim when pronominalization is on.
pub const MAX_COPY_TOKENS: usize = 4;

/// Builds the semantic graph of block `index`: copied shared elements first,
/// then the block's own material in sentence order, then a closing period if
/// the block does not already end with one.
pub fn block_graph(g: &SemanticGraph, layout: &SplitLayout, index: usize, pronominalize: bool) -> SemanticGraph {
    let block = &layout.blocks[index];
    let mut tokens: Vec<Token> = Vec::new();
    let mut nodes: BTreeMap<String, Node> = BTreeMap::new();
    let push = |surface: &str, tokens: &mut Vec<Token>| -> usize {
        let index = tokens.len();
        tokens.push(Token {
            index,
            surface: surface.to_string(),
        });
        index
    };

    let remap_node = |node: &Node, map: &BTreeMap<usize, usize>| -> Node {
        let mut node = node.clone();
        for pred in &mut node.preds {
            pred.positions = pred.positions.iter().filter_map(|p| map.get(p).copied()).collect();
        }
        node
    };

    for copy in &block.copies {
        if pronominalize && copy.positions.len() > MAX_COPY_TOKENS {
            let at = push(pronoun_for(g, &copy.anchor), &mut tokens);
            let mut node = g.nodes[&copy.anchor].clone();
            node.preds = vec![Predicate::lexical(tokens[at].surface.to_lowercase(), [at])];
            nodes.insert(copy.anchor.clone(), node);
            continue;
        }
        let map: BTreeMap<usize, usize> = copy.positions.iter().map(|&p| (p, push(&g.tokens[p].surface, &mut tokens))).collect();
        for v in &copy.nodes {
            nodes.insert(v.clone(), remap_node(&g.nodes[v], &map));
        }
    }

    let map: BTreeMap<usize, usize> = block.own.iter().map(|&p| (p, push(&g.tokens[p].surface, &mut tokens))).collect();
    for v in &block.home {
        nodes.insert(v.clone(), remap_node(&g.nodes[v], &map));
    }

    let mut edges: Vec<Edge> = g
        .edges
        .iter()
        .filter(|e| nodes.contains_key(&e.from) && nodes.contains_key(&e.to))
        .cloned()
        .collect();

    let ends_terminal = tokens.last().is_some_and(|t| is_terminal(&t.surface));
    if layout.blocks.len() > 1 && !ends_terminal {
        let at = push(".", &mut tokens);
        let mut k = 1;
        let var = loop {
            let v = format!("O_end{k}");
            if !nodes.contains_key(&v) {
                break v;
            }
            k += 1;
        };
        nodes.insert(
            var.clone(),
            Node::new(
                var.clone(),
                NodeKind::Orphan,
                vec![Predicate {
                    lemma: ".".to_string(),
                    positions: BTreeSet::from([at]),
                    origin: PredOrigin::Orphan,
                }],
            ),
        );
        if let Some(first) = block.events.first() {
            edges.push(Edge::new(first.clone(), var, labels::ORPHAN));
        }
    }

    SemanticGraph {
        id: if layout.blocks.len() > 1 {
            format!("{}#{}", g.id, index + 1)
        } else {
            g.id.clone()
        },
        tokens,
        nodes,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drs::{preprocess, realize};

    // "Kim bought a car which broke ."
    fn car() -> SemanticGraph {
        let mut g = SemanticGraph::new("car", &["Kim", "bought", "a", "car", "which", "broke", "."]);
        g.add_node(Node::new("X1", NodeKind::Entity, vec![Predicate::lexical("kim", [0])]));
        g.add_node(Node::new("E1", NodeKind::Event, vec![Predicate::lexical("buy", [1])]));
        g.add_node(Node::new("X2", NodeKind::Entity, vec![Predicate::lexical("car", [2, 3])]));
        g.add_node(Node::new("E2", NodeKind::Event, vec![Predicate::lexical("break", [5])]));
        g.add_edge(Edge::new("E1", "X1", "agent"));
        g.add_edge(Edge::new("E1", "X2", "patient"));
        g.add_edge(Edge::new("E2", "X2", "patient"));
        preprocess(g)
    }

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn text(g: &SemanticGraph) -> String {
        realize(g, &g.all_vars())
    }

    #[test]
    fn closure_stops_at_foreign_events() {
        let g = car();
        let c = block_closure(&g, &v(&["E1"]));
        assert!(c.contains("X2"));
        assert!(!c.contains("E2"));
    }

    #[test]
    fn unsplit_layout_is_the_sentence() {
        let g = car();
        let l = layout(&g, &[v(&["E2", "E1"])]);
        assert_eq!(l.blocks.len(), 1);
        assert_eq!(l.blocks[0].events, v(&["E1", "E2"]));
        assert!(l.dropped.is_empty());
        assert_eq!(text(&block_graph(&g, &l, 0, false)), "Kim bought a car which broke .");
    }

    #[test]
    fn shared_entity_is_copied_and_boundary_orphan_dropped() {
        let g = car();
        let l = layout(&g, &[v(&["E2"]), v(&["E1"])]);
        assert_eq!(l.blocks[0].events, v(&["E1"]));
        assert_eq!(l.dropped, BTreeSet::from([4]));
        assert_eq!(l.blocks[1].copies.len(), 1);
        assert_eq!(l.blocks[1].copies[0].anchor, "X2");
        let first = block_graph(&g, &l, 0, false);
        let second = block_graph(&g, &l, 1, false);
        assert_eq!(text(&first), "Kim bought a car .");
        assert_eq!(text(&second), "a car broke .");
        assert_eq!(first.id, "car#1");
        first.check_coverage().unwrap();
        second.check_coverage().unwrap();
    }

    #[test]
    fn long_copies_become_pronouns_on_request() {
        let mut g = SemanticGraph::new(
            "p",
            &["Kim", "bought", "the", "big", "old", "red", "car", "which", "broke", "."],
        );
        g.add_node(Node::new("X1", NodeKind::Entity, vec![Predicate::lexical("kim", [0])]));
        g.add_node(Node::new("E1", NodeKind::Event, vec![Predicate::lexical("buy", [1])]));
        g.add_node(Node::new("X2", NodeKind::Entity, vec![Predicate::lexical("car", [2, 3, 4, 5, 6])]));
        g.add_node(Node::new("E2", NodeKind::Event, vec![Predicate::lexical("break", [8])]));
        g.add_edge(Edge::new("E1", "X1", "agent"));
        g.add_edge(Edge::new("E1", "X2", "patient"));
        g.add_edge(Edge::new("E2", "X2", "patient"));
        let g = preprocess(g);
        let l = layout(&g, &[v(&["E1"]), v(&["E2"])]);
        assert_eq!(text(&block_graph(&g, &l, 1, false)), "the big old red car broke .");
        assert_eq!(text(&block_graph(&g, &l, 1, true)), "It broke .");
    }
}
