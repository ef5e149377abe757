//! Context-aware lexical simplification.
//!
//! Rules `C -> S` pair a word from the complex corpus with a word from the
//! simple corpus when their context vectors (co-occurrence counts within a
//! ten-token window) are similar and `C` is the more complex of the two. At
//! application time each possible substitution is scored against the
//! sentence it would occur in, and a left-to-right dynamic program picks the
//! best compatible set.

mod apply;
mod rules;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::drs::is_punct;
use crate::error::{Error, Result};

pub use apply::{
    apply_to_graph, candidate_instances, conflicts, plan_substitutions, score_substitution, simplify_lexical,
    total_score, Instance, LexPlan, Substitution, DEFAULT_KAPPA,
};
pub use rules::{complexity, extract_rules, LexRule, LexRuleTable, DEFAULT_F_MIN, DEFAULT_THETA};

/// Context radius on each side of a word.
pub const WINDOW: usize = 10;

const ENGLISH_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// The 127-word English list shipped with the crate.
    pub fn english() -> Self {
        Self::from_text(ENGLISH_STOPWORDS)
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_text(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Content words are neither stopwords nor bare punctuation.
    pub fn is_content(&self, word: &str) -> bool {
        !word.is_empty() && !is_punct(word) && !self.contains(word)
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::english()
    }
}

/// Sparse co-occurrence counts.
pub type ContextVector = BTreeMap<String, u32>;

pub fn cosine(a: &ContextVector, b: &ContextVector) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(k, &x)| large.get(k).map(|&y| x as f64 * y as f64))
        .sum();
    if dot == 0.0 {
        return 0.0;
    }
    let norm = |v: &ContextVector| v.values().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    (dot / (norm(a) * norm(b))).min(1.0)
}

/// Context vectors and raw frequencies collected from one corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusVectors {
    /// Vectors for content words with frequency at least `f_min`.
    pub vectors: BTreeMap<String, ContextVector>,
    /// Frequency of every token, stopwords included.
    pub freq: BTreeMap<String, u64>,
}

impl CorpusVectors {
    pub fn frequency(&self, word: &str) -> u64 {
        self.freq.get(word).copied().unwrap_or(0)
    }
}

#[derive(Default)]
struct Partial {
    vectors: HashMap<String, HashMap<String, u32>>,
    freq: HashMap<String, u64>,
}

impl Partial {
    fn add_sentence(&mut self, line: &str, stop: &Stopwords) {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
        for (i, w) in tokens.iter().enumerate() {
            *self.freq.entry(w.clone()).or_insert(0) += 1;
            if !stop.is_content(w) {
                continue;
            }
            let lo = i.saturating_sub(WINDOW);
            let hi = (i + WINDOW).min(tokens.len() - 1);
            let vector = self.vectors.entry(w.clone()).or_default();
            for (j, c) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i && stop.is_content(c) {
                    *vector.entry(c.clone()).or_insert(0) += 1;
                }
            }
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (w, f) in other.freq {
            *self.freq.entry(w).or_insert(0) += f;
        }
        for (w, v) in other.vectors {
            let into = self.vectors.entry(w).or_default();
            for (c, n) in v {
                *into.entry(c).or_insert(0) += n;
            }
        }
        self
    }
}

/// Windowed co-occurrence vectors over a corpus with one tokenized sentence
/// per line. Tokens are lowercased.
pub fn build_context_vectors(text: &str, f_min: u64, stop: &Stopwords) -> Result<CorpusVectors> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Err(Error::EmptyCorpus("context vectors"));
    }
    let partial = lines
        .par_iter()
        .fold(Partial::default, |mut acc, line| {
            acc.add_sentence(line, stop);
            acc
        })
        .reduce(Partial::default, Partial::merge);

    let freq: BTreeMap<String, u64> = partial.freq.into_iter().collect();
    let vectors = partial
        .vectors
        .into_iter()
        .filter(|(w, v)| freq[w] >= f_min && !v.is_empty())
        .map(|(w, v)| (w, v.into_iter().collect()))
        .collect();
    Ok(CorpusVectors { vectors, freq })
}
