use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::drs::{labels, SemanticGraph};
use crate::error::{Error, Result};

/// Probability given to a relation never seen under a head.
pub const REL_FLOOR: f64 = 1e-6;

/// `P(r | h)` over the relations leaving each head lemma, and the relative
/// frequency `P(w)` of every surface word in the simple corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelProbTable {
    rel: BTreeMap<(String, String), f64>,
    word: BTreeMap<String, f64>,
    total_words: u64,
}

impl RelProbTable {
    /// Counts relations (orphan attachments excluded) by the head lemma of
    /// their source node. Words are lowercased whitespace tokens of
    /// `simple_text`.
    pub fn train(corpus: &[SemanticGraph], simple_text: &str) -> Result<Self> {
        let mut by_head: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        for g in corpus {
            for e in g.edges.iter().filter(|e| e.label != labels::ORPHAN) {
                let Some(head) = g.node(&e.from) else { continue };
                *by_head
                    .entry(head.head_lemma().to_string())
                    .or_default()
                    .entry(e.label.clone())
                    .or_insert(0) += 1;
            }
        }
        if by_head.is_empty() {
            return Err(Error::EmptyCorpus("relation probabilities (no relations)"));
        }
        let mut freq: BTreeMap<String, u64> = BTreeMap::new();
        let mut total_words = 0u64;
        for w in simple_text.split_whitespace() {
            *freq.entry(w.to_lowercase()).or_insert(0) += 1;
            total_words += 1;
        }
        if total_words == 0 {
            return Err(Error::EmptyCorpus("relation probabilities (no words)"));
        }

        let mut rel = BTreeMap::new();
        for (head, counts) in by_head {
            let total: u64 = counts.values().sum();
            for (r, c) in counts {
                rel.insert((r, head.clone()), c as f64 / total as f64);
            }
        }
        let word = freq
            .into_iter()
            .map(|(w, c)| (w, c as f64 / total_words as f64))
            .collect();
        Ok(RelProbTable { rel, word, total_words })
    }

    pub fn rel_prob(&self, relation: &str, head: &str) -> f64 {
        self.rel
            .get(&(relation.to_string(), head.to_string()))
            .copied()
            .unwrap_or(REL_FLOOR)
    }

    /// Lookup is case-insensitive.
    pub fn word_prob(&self, word: &str) -> f64 {
        self.word
            .get(&word.to_lowercase())
            .copied()
            .unwrap_or_else(|| 1.0 / (self.total_words as f64 + 1.0))
    }

    pub fn total_words(&self) -> u64 {
        self.total_words
    }

    /// Observed `(relation, head) -> P(r|h)` entries.
    pub fn relations(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.rel.iter().map(|((r, h), &p)| (r.as_str(), h.as_str(), p))
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, f64)> {
        self.word.iter().map(|(w, &p)| (w.as_str(), p))
    }

    /// `#total=N`, then `REL` lines sorted by relation and head, then `WORD`
    /// lines sorted by word. Probabilities carry 9 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("#total={}\n", self.total_words);
        for ((r, h), p) in &self.rel {
            let _ = writeln!(out, "REL {r}\t{h}\t{p:.8e}");
        }
        for (w, p) in &self.word {
            let _ = writeln!(out, "WORD {w}\t{p:.8e}");
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut table = RelProbTable::default();
        let mut saw_total = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let prob = |s: &str| -> Result<f64> {
                let p: f64 = s
                    .parse()
                    .map_err(|_| Error::model(origin, n, format!("bad probability `{s}`")))?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::model(origin, n, format!("probability {p} outside (0, 1]")));
                }
                Ok(p)
            };
            if let Some(total) = line.strip_prefix("#total=") {
                table.total_words = total
                    .parse()
                    .map_err(|_| Error::model(origin, n, format!("bad total `{total}`")))?;
                saw_total = true;
            } else if let Some(rest) = line.strip_prefix("REL ") {
                let fields: Vec<&str> = rest.split('\t').collect();
                let [r, h, p] = fields[..] else {
                    return Err(Error::model(origin, n, "expected `REL <relation>\\t<head>\\t<prob>`"));
                };
                table.rel.insert((r.to_string(), h.to_string()), prob(p)?);
            } else if let Some(rest) = line.strip_prefix("WORD ") {
                let (w, p) = rest
                    .split_once('\t')
                    .ok_or_else(|| Error::model(origin, n, "expected `WORD <word>\\t<prob>`"))?;
                table.word.insert(w.to_string(), prob(p)?);
            } else {
                return Err(Error::model(origin, n, "expected a REL or WORD line"));
            }
        }
        if !saw_total {
            return Err(Error::model(origin, 1, "missing `#total=` header"));
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drs::{Edge, Node, NodeKind, Predicate};

    fn write_graph(id: &str, labels: &[&str]) -> SemanticGraph {
        let mut words = vec!["wrote"];
        words.extend(labels.iter().map(|_| "x"));
        let mut g = SemanticGraph::new(id, &words);
        g.add_node(Node::new("E", NodeKind::Event, vec![Predicate::lexical("write", [0])]));
        for (i, l) in labels.iter().enumerate() {
            let v = format!("X{i}");
            g.add_node(Node::new(&v, NodeKind::Entity, vec![Predicate::lexical("x", [i + 1])]));
            g.add_edge(Edge::new("E", &v, *l));
        }
        g
    }

    #[test]
    fn hand_counted_conditionals() {
        let corpus = vec![
            write_graph("a", &["agent", "in"]),
            write_graph("b", &["agent"]),
            write_graph("c", &["agent"]),
        ];
        let t = RelProbTable::train(&corpus, "he wrote it").unwrap();
        assert_eq!(t.rel_prob("agent", "write"), 0.75);
        assert_eq!(t.rel_prob("in", "write"), 0.25);
        assert_eq!(t.rel_prob("for", "write"), REL_FLOOR);
    }

    #[test]
    fn single_edge_corpus() {
        let t = RelProbTable::train(&[write_graph("a", &["in"])], "a").unwrap();
        assert_eq!(t.rel_prob("in", "write"), 1.0);
    }

    #[test]
    fn word_floor_and_case() {
        let t = RelProbTable::train(&[write_graph("a", &["in"])], "The cat the").unwrap();
        assert!((t.word_prob("the") - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.word_prob("The"), t.word_prob("the"));
        assert_eq!(t.word_prob("dog"), 0.25);
    }

    #[test]
    fn orphans_are_not_relations() {
        let t = RelProbTable::train(&[write_graph("a", &["orphan", "in"])], "a").unwrap();
        assert_eq!(t.rel_prob("in", "write"), 1.0);
    }

    #[test]
    fn empty_inputs() {
        assert!(RelProbTable::train(&[], "a").is_err());
        assert!(RelProbTable::train(&[write_graph("a", &["in"])], " \n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = RelProbTable::train(&[write_graph("a", &["agent", "in", "in"])], "a b b").unwrap();
        let text = t.to_text();
        assert!(text.starts_with("#total=3\nREL agent\twrite\t3.33333333e-1\n"));
        let back = RelProbTable::from_text(&text, "m").unwrap();
        assert_eq!(back.to_text(), text);
        assert!(matches!(
            RelProbTable::from_text("#total=3\nREL a\tb\n", "m"),
            Err(Error::Model { line: 2, .. })
        ));
        assert!(RelProbTable::from_text("REL a\tb\t0.5\n", "m").is_err());
    }
}
