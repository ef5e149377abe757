//! Line-delimited DRS-JSON ingestion.
//!
//! ```text
//! {"id": "s1", "tokens": ["Peter", "smiled", "."],
//!  "nodes": [{"var": "X1", "kind": "entity", "preds": [], "named": [["peter", 0]]},
//!            {"var": "X2", "kind": "event", "preds": [{"lemma": "smile", "pos": [1]}]}],
//!  "edges": [{"from": "X2", "to": "X1", "label": "agent"}]}
//! ```
//!
//! Edges may carry an optional `"pos"` list naming the tokens that realize the
//! relation (a preposition, say). Unknown fields are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use super::{Edge, Node, NodeKind, PredOrigin, Predicate, SemanticGraph, Token};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    tokens: Vec<String>,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Event,
    Entity,
}

#[derive(Deserialize)]
struct RawNode {
    var: String,
    kind: RawKind,
    #[serde(default)]
    preds: Vec<RawPred>,
    #[serde(default)]
    named: Vec<(String, usize)>,
    #[serde(default)]
    timex: Vec<(String, usize)>,
}

#[derive(Deserialize)]
struct RawPred {
    lemma: String,
    #[serde(default)]
    pos: Vec<usize>,
}

#[derive(Deserialize)]
struct RawEdge {
    from: String,
    to: String,
    label: String,
    #[serde(default)]
    pos: Vec<usize>,
}

fn record_error(line: usize, field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Record {
        line,
        field: field.into(),
        message: message.into(),
    }
}

/// Parses one DRS-JSON record. `line` is the 1-based line number used in errors.
pub fn parse_drs_line(text: &str, line: usize) -> Result<SemanticGraph> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawRecord = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.to_string();
        // serde reports a missing field against the enclosing object
        let field = match message.strip_prefix("missing field `") {
            Some(rest) => {
                let name = rest.split('`').next().unwrap_or_default();
                if path == "." {
                    name.to_string()
                } else {
                    format!("{path}.{name}")
                }
            }
            None => path,
        };
        record_error(line, field, message)
    })?;
    build_graph(raw, line)
}

fn build_graph(raw: RawRecord, line: usize) -> Result<SemanticGraph> {
    let n_tokens = raw.tokens.len();
    let tokens = raw
        .tokens
        .into_iter()
        .enumerate()
        .map(|(index, surface)| Token { index, surface })
        .collect();

    // position -> field path of the claim, for overlap reporting
    let mut claimed: BTreeMap<usize, String> = BTreeMap::new();
    let mut claim = |pos: usize, field: String| -> Result<()> {
        if pos >= n_tokens {
            return Err(record_error(
                line,
                field,
                format!("position {pos} outside sentence of {n_tokens} tokens"),
            ));
        }
        if let Some(prev) = claimed.get(&pos) {
            return Err(record_error(
                line,
                field,
                format!("position {pos} already covered by {prev}"),
            ));
        }
        claimed.insert(pos, field);
        Ok(())
    };

    let mut nodes = BTreeMap::new();
    for (i, rn) in raw.nodes.into_iter().enumerate() {
        if rn.var.is_empty() {
            return Err(record_error(line, format!("nodes[{i}].var"), "empty variable name"));
        }
        if nodes.contains_key(&rn.var) {
            return Err(Error::DuplicateVar { line, var: rn.var });
        }
        let kind = match rn.kind {
            RawKind::Event => NodeKind::Event,
            RawKind::Entity => NodeKind::Entity,
        };
        if kind == NodeKind::Event && rn.preds.is_empty() {
            return Err(record_error(
                line,
                format!("nodes[{i}].preds"),
                "event node needs at least one predicate",
            ));
        }
        let mut preds = Vec::with_capacity(rn.preds.len());
        for (j, rp) in rn.preds.into_iter().enumerate() {
            for &p in &rp.pos {
                claim(p, format!("nodes[{i}].preds[{j}].pos"))?;
            }
            preds.push(Predicate {
                lemma: rp.lemma,
                positions: rp.pos.into_iter().collect(),
                origin: PredOrigin::Lexical,
            });
        }
        for (j, (_, p)) in rn.named.iter().enumerate() {
            claim(*p, format!("nodes[{i}].named[{j}]"))?;
        }
        for (j, (_, p)) in rn.timex.iter().enumerate() {
            claim(*p, format!("nodes[{i}].timex[{j}]"))?;
        }
        nodes.insert(
            rn.var.clone(),
            Node {
                var: rn.var,
                kind,
                preds,
                named: rn.named,
                timex: rn.timex,
            },
        );
    }

    let mut edges = Vec::with_capacity(raw.edges.len());
    for (k, re) in raw.edges.into_iter().enumerate() {
        for (end, field) in [(&re.from, "from"), (&re.to, "to")] {
            if !nodes.contains_key(end) {
                return Err(record_error(
                    line,
                    format!("edges[{k}].{field}"),
                    format!("unknown variable `{end}`"),
                ));
            }
        }
        for &p in &re.pos {
            claim(p, format!("edges[{k}].pos"))?;
        }
        edges.push(Edge {
            from: re.from,
            to: re.to,
            label: re.label,
            positions: re.pos.into_iter().collect::<BTreeSet<_>>(),
        });
    }

    Ok(SemanticGraph {
        id: raw.id,
        tokens,
        nodes,
        edges,
    })
}

/// Parses a whole DRS-JSON document. Blank lines are skipped but still count
/// towards line numbers. On failure the first bad line (in file order) is
/// reported.
pub fn parse_drs_str(text: &str) -> Result<Vec<SemanticGraph>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    let parsed: Vec<Result<SemanticGraph>> = lines
        .par_iter()
        .map(|&(n, l)| parse_drs_line(l, n))
        .collect();
    parsed.into_iter().collect()
}

pub fn parse_drs_file(path: impl AsRef<Path>) -> Result<Vec<SemanticGraph>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_drs_str(&text)
}
