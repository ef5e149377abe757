use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::drs::{events_of, labels, SemanticGraph};
use crate::error::{Error, Result};

/// Probability floor for patterns the table has never seen.
pub const UNSEEN_FLOOR: f64 = 1e-9;
/// Scale applied to the role-set backoff estimate of an unseen pattern.
pub const BACKOFF_SCALE: f64 = 0.1;

/// Multiset of relation labels leaving one event, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleSet(Vec<String>);

impl RoleSet {
    pub fn new<I, S>(roles: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut roles: Vec<String> = roles.into_iter().map(Into::into).collect();
        roles.sort();
        RoleSet(roles)
    }

    pub fn roles(&self) -> &[String] {
        &self.0
    }
}

/// Roles joined by `+`; the empty set is written `_`.
impl fmt::Display for RoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("_")
        } else {
            f.write_str(&self.0.join("+"))
        }
    }
}

/// Position-ordered sequence of role sets, one per event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SemanticPattern(pub Vec<RoleSet>);

impl fmt::Display for SemanticPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, rs) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char('|')?;
            }
            write!(f, "{rs}")?;
        }
        Ok(())
    }
}

impl FromStr for SemanticPattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.is_empty() {
            return Err("empty pattern".into());
        }
        let sets = s
            .split('|')
            .map(|part| match part {
                "_" => Ok(RoleSet::new(Vec::<String>::new())),
                "" => Err(format!("empty role set in `{s}`")),
                p => Ok(RoleSet::new(p.split('+'))),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(SemanticPattern(sets))
    }
}

/// Role sets of `events` (already in position order). `orphan` and
/// `modifier` edges are not thematic roles and are skipped.
pub fn pattern_of(g: &SemanticGraph, events: &[String]) -> SemanticPattern {
    SemanticPattern(
        events
            .iter()
            .map(|ev| {
                RoleSet::new(
                    g.outgoing(ev)
                        .filter(|e| e.label != labels::ORPHAN && e.label != labels::MODIFIER)
                        .map(|e| e.label.clone()),
                )
            })
            .collect(),
    )
}

/// Relative frequencies of semantic patterns over a corpus of simple sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitFeatureTable {
    counts: BTreeMap<SemanticPattern, u64>,
    total: u64,
    roleset_counts: BTreeMap<RoleSet, u64>,
    roleset_total: u64,
}

impl SplitFeatureTable {
    pub fn from_counts(counts: BTreeMap<SemanticPattern, u64>) -> Result<Self> {
        let counts: BTreeMap<_, _> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::EmptyCorpus("split feature table"));
        }
        let mut roleset_counts = BTreeMap::new();
        for (pattern, &c) in &counts {
            for rs in &pattern.0 {
                *roleset_counts.entry(rs.clone()).or_insert(0) += c;
            }
        }
        let roleset_total = roleset_counts.values().sum();
        Ok(SplitFeatureTable {
            counts,
            total,
            roleset_counts,
            roleset_total,
        })
    }

    /// Counts the pattern of every sentence with at least one event. Graphs
    /// must be preprocessed and modifier-lifted. Sentences whose events
    /// cannot be ordered are skipped.
    pub fn build(corpus: &[SemanticGraph]) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for g in corpus {
            let Ok(events) = events_of(g) else { continue };
            if events.is_empty() {
                continue;
            }
            *counts.entry(pattern_of(g, &events)).or_insert(0) += 1;
        }
        Self::from_counts(counts)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, pattern: &SemanticPattern) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    pub fn patterns(&self) -> impl Iterator<Item = (&SemanticPattern, u64)> {
        self.counts.iter().map(|(p, &c)| (p, c))
    }

    /// Relative frequency for seen patterns. Unseen patterns get the product
    /// of their role sets' unigram frequencies, scaled by [`BACKOFF_SCALE`] and
    /// floored at [`UNSEEN_FLOOR`].
    pub fn probability(&self, pattern: &SemanticPattern) -> f64 {
        if let Some(&c) = self.counts.get(pattern) {
            return c as f64 / self.total as f64;
        }
        let backoff: f64 = pattern
            .0
            .iter()
            .map(|rs| self.roleset_counts.get(rs).copied().unwrap_or(0) as f64 / self.roleset_total as f64)
            .product();
        (BACKOFF_SCALE * backoff).max(UNSEEN_FLOOR)
    }

    /// `#total=<N>` followed by `<pattern>\t<count>` lines sorted by pattern text.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(String, u64)> = self.counts.iter().map(|(p, &c)| (p.to_string(), c)).collect();
        rows.sort();
        let mut out = format!("#total={}\n", self.total);
        for (p, c) in rows {
            let _ = writeln!(out, "{p}\t{c}");
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let declared: u64 = match lines.next() {
            Some((_, header)) => header
                .strip_prefix("#total=")
                .and_then(|n| n.trim().parse().ok())
                .ok_or_else(|| Error::model(origin, 1, "expected `#total=<N>` header"))?,
            None => return Err(Error::model(origin, 1, "empty file")),
        };
        let mut counts = BTreeMap::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (pattern, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::model(origin, i + 1, "expected `<pattern>\\t<count>`"))?;
            let pattern: SemanticPattern = pattern.parse().map_err(|e| Error::model(origin, i + 1, e))?;
            let count: u64 = count
                .parse()
                .map_err(|_| Error::model(origin, i + 1, format!("bad count `{count}`")))?;
            if counts.insert(pattern, count).is_some() {
                return Err(Error::model(origin, i + 1, "duplicate pattern"));
            }
        }
        let table = Self::from_counts(counts)?;
        if table.total != declared {
            return Err(Error::model(
                origin,
                1,
                format!("header total {declared} but counts sum to {}", table.total),
            ));
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

    fn pat(s: &str) -> SemanticPattern {
        s.parse().unwrap()
    }

    #[test]
    fn roleset_serialization_is_canonical() {
        let a = RoleSet::new(["patient", "in", "agent", "in"]);
        let b = RoleSet::new(["in", "agent", "in", "patient"]);
        assert_eq!(a.to_string(), "agent+in+in+patient");
        assert_eq!(a, b);
    }

    #[test]
    fn pattern_text_round_trip() {
        for s in ["agent+patient|agent+in+in+patient", "_", "theme|_|agent"] {
            assert_eq!(pat(s).to_string(), s);
        }
        assert!("agent||patient".parse::<SemanticPattern>().is_err());
    }

    #[test]
    fn single_pattern_has_probability_one() {
        let t = SplitFeatureTable::from_counts(BTreeMap::from([(pat("agent+patient"), 4)])).unwrap();
        assert_eq!(t.probability(&pat("agent+patient")), 1.0);
    }

    #[test]
    fn unseen_patterns_back_off() {
        let t = SplitFeatureTable::from_counts(BTreeMap::from([
            (pat("agent+patient"), 3),
            (pat("agent+patient|theme"), 1),
        ]))
        .unwrap();
        // role-set counts: agent+patient 4, theme 1
        let p = t.probability(&pat("theme|agent+patient"));
        assert!((p - 0.1 * (1.0 / 5.0) * (4.0 / 5.0)).abs() < 1e-15);
        assert_eq!(t.probability(&pat("eq")), UNSEEN_FLOOR);
    }

    #[test]
    fn empty_table_is_an_error() {
        assert!(matches!(
            SplitFeatureTable::from_counts(BTreeMap::new()),
            Err(Error::EmptyCorpus(_))
        ));
        assert!(matches!(SplitFeatureTable::build(&[]), Err(Error::EmptyCorpus(_))));
    }

    #[test]
    fn text_format() {
        let t = SplitFeatureTable::from_counts(BTreeMap::from([
            (pat("agent+patient|agent+in+in+patient"), 23),
            (pat("agent+patient"), 59),
        ]))
        .unwrap();
        let text = t.to_text();
        assert_eq!(
            text,
            "#total=82\nagent+patient\t59\nagent+patient|agent+in+in+patient\t23\n"
        );
        assert_eq!(SplitFeatureTable::from_text(&text, "m").unwrap(), t);
        assert!(SplitFeatureTable::from_text("#total=3\nagent\t2\n", "m").is_err());
        assert!(matches!(
            SplitFeatureTable::from_text("#total=2\nagent 2\n", "m"),
            Err(Error::Model { line: 2, .. })
        ));
    }
}
