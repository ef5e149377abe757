//! Add-k smoothed n-gram language model.
//!
//! For a history `h` seen in training, `P(w | h) = (c(h w) + k) / (c(h) + k V)`
//! where `V` counts the vocabulary, the end marker and `<unk>`. Histories never
//! seen in training back off to the next shorter one; the unigram level is
//! always defined. Each level is normalized on its own, so every conditional
//! distribution sums to one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_K: f64 = 0.01;

/// Anything that can score a token sequence as a sentence.
pub trait LanguageModel: Sync {
    /// Natural-log probability of `tokens` as a complete sentence.
    fn sentence_logprob(&self, tokens: &[&str]) -> f64;
}

type Counts = HashMap<Vec<String>, u64>;

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    k: f64,
    /// `ngrams[j]` holds the (j+1)-gram counts.
    ngrams: Vec<BTreeMap<Vec<String>, u64>>,
    /// `histories[j]` holds counts of j-token histories (index 0 unused).
    histories: Vec<HashMap<Vec<String>, u64>>,
    vocab: BTreeSet<String>,
    unigram_total: u64,
}

fn sentence_counts(line: &str, order: usize, counts: &mut [Counts]) {
    let mut padded: Vec<String> = vec![BOS.to_string(); order - 1];
    padded.extend(line.split_whitespace().map(str::to_lowercase));
    padded.push(EOS.to_string());
    for end in (order - 1)..padded.len() {
        for n in 1..=order {
            let gram = padded[end + 1 - n..=end].to_vec();
            *counts[n - 1].entry(gram).or_insert(0) += 1;
        }
    }
}

fn merge(mut a: Vec<Counts>, b: Vec<Counts>) -> Vec<Counts> {
    for (into, from) in a.iter_mut().zip(b) {
        for (k, v) in from {
            *into.entry(k).or_insert(0) += v;
        }
    }
    a
}

impl NgramModel {
    /// Trains on one tokenized sentence per line. Blank lines are skipped.
    pub fn train(text: &str, order: usize) -> Result<Self> {
        Self::train_with_k(text, order, DEFAULT_K)
    }

    pub fn train_with_k(text: &str, order: usize, k: f64) -> Result<Self> {
        if !(1..=5).contains(&order) {
            return Err(Error::Config(format!("n-gram order {order} outside 1..=5")));
        }
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.is_empty() {
            return Err(Error::EmptyCorpus("language model"));
        }
        let empty = || vec![Counts::new(); order];
        let counts = lines
            .par_iter()
            .fold(empty, |mut acc, line| {
                sentence_counts(line, order, &mut acc);
                acc
            })
            .reduce(empty, merge);
        let ngrams = counts.into_iter().map(|c| c.into_iter().collect()).collect();
        Ok(Self::from_counts(order, k, ngrams))
    }

    fn from_counts(order: usize, k: f64, ngrams: Vec<BTreeMap<Vec<String>, u64>>) -> Self {
        let mut histories = vec![HashMap::new(); order];
        for (j, table) in ngrams.iter().enumerate().skip(1) {
            for (gram, &c) in table {
                *histories[j].entry(gram[..j].to_vec()).or_insert(0) += c;
            }
        }
        let vocab: BTreeSet<String> = ngrams[0].keys().map(|g| g[0].clone()).collect();
        let unigram_total = ngrams[0].values().sum();
        NgramModel {
            order,
            k,
            ngrams,
            histories,
            vocab,
            unigram_total,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Vocabulary including the end marker, excluding `<unk>`.
    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    /// Size of the outcome space: vocabulary plus `<unk>`.
    pub fn outcome_count(&self) -> usize {
        self.vocab.len() + 1
    }

    fn normalize<'a>(&self, token: &'a str) -> std::borrow::Cow<'a, str> {
        let lower = if token.chars().any(char::is_uppercase) {
            std::borrow::Cow::Owned(token.to_lowercase())
        } else {
            std::borrow::Cow::Borrowed(token)
        };
        if lower == BOS || self.vocab.contains(lower.as_ref()) {
            lower
        } else {
            std::borrow::Cow::Borrowed(UNK)
        }
    }

    /// `P(word | history)`. Only the last `order - 1` history tokens matter;
    /// pad with [`BOS`] for sentence-initial positions.
    pub fn prob(&self, word: &str, history: &[&str]) -> f64 {
        let word = self.normalize(word).into_owned();
        let history: Vec<String> = history.iter().map(|h| self.normalize(h).into_owned()).collect();
        self.prob_normalized(&word, &history)
    }

    fn prob_normalized(&self, word: &str, history: &[String]) -> f64 {
        let v = self.outcome_count() as f64;
        for n in (2..=self.order).rev() {
            if history.len() < n - 1 {
                continue;
            }
            let h = &history[history.len() - (n - 1)..];
            let Some(&hc) = self.histories[n - 1].get(h) else {
                continue;
            };
            let mut gram = h.to_vec();
            gram.push(word.to_string());
            let c = self.ngrams[n - 1].get(&gram).copied().unwrap_or(0);
            return (c as f64 + self.k) / (hc as f64 + self.k * v);
        }
        let c = self.ngrams[0].get(&[word.to_string()][..]).copied().unwrap_or(0);
        (c as f64 + self.k) / (self.unigram_total as f64 + self.k * v)
    }

    pub fn sentence_logprob(&self, tokens: &[&str]) -> f64 {
        let mut history: Vec<String> = vec![BOS.to_string(); self.order - 1];
        let mut total = 0.0;
        for t in tokens.iter().copied().chain(std::iter::once(EOS)) {
            let w = if t == EOS { EOS.to_string() } else { self.normalize(t).into_owned() };
            total += self.prob_normalized(&w, &history).ln();
            history.push(w);
        }
        total
    }

    /// Plain-text count format: one `ORDER n` section per order with
    /// `<ngram tokens>\t<count>` lines in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# ngram-lm k={}", self.k);
        for (j, table) in self.ngrams.iter().enumerate() {
            let _ = writeln!(out, "ORDER {}", j + 1);
            let mut rows: Vec<(String, u64)> = table.iter().map(|(g, &c)| (g.join(" "), c)).collect();
            rows.sort();
            for (gram, c) in rows {
                let _ = writeln!(out, "{gram}\t{c}");
            }
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut k = DEFAULT_K;
        let mut ngrams: Vec<BTreeMap<Vec<String>, u64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            // only the first line may be a header; `#` is a legal token elsewhere
            if let Some(comment) = line.strip_prefix('#').filter(|_| lineno == 1) {
                if let Some(v) = comment.split_whitespace().find_map(|f| f.strip_prefix("k=")) {
                    k = v
                        .parse()
                        .map_err(|_| Error::model(origin, lineno, format!("bad smoothing constant `{v}`")))?;
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if let Some(n) = line.strip_prefix("ORDER ") {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::model(origin, lineno, "bad ORDER header"))?;
                if n != ngrams.len() + 1 {
                    return Err(Error::model(origin, lineno, format!("expected ORDER {}", ngrams.len() + 1)));
                }
                ngrams.push(BTreeMap::new());
                continue;
            }
            if ngrams.is_empty() {
                return Err(Error::model(origin, lineno, "count before any ORDER header"));
            }
            let (gram, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::model(origin, lineno, "expected `<ngram>\\t<count>`"))?;
            let gram: Vec<String> = gram.split(' ').map(str::to_string).collect();
            if gram.len() != ngrams.len() {
                return Err(Error::model(origin, lineno, "n-gram length does not match its section"));
            }
            let count: u64 = count
                .parse()
                .map_err(|_| Error::model(origin, lineno, format!("bad count `{count}`")))?;
            ngrams.last_mut().expect("section open").insert(gram, count);
        }
        if ngrams.is_empty() || ngrams[0].is_empty() {
            return Err(Error::model(origin, 0, "no unigram counts"));
        }
        if ngrams.len() > 5 {
            return Err(Error::model(origin, 0, "order above 5"));
        }
        let order = ngrams.len();
        Ok(Self::from_counts(order, k, ngrams))
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

impl LanguageModel for NgramModel {
    fn sentence_logprob(&self, tokens: &[&str]) -> f64 {
        NgramModel::sentence_logprob(self, tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn unigram_mass() {
        let m = NgramModel::train("a a a", 1).unwrap();
        // outcomes: a, </s>, <unk>; N = 4
        let denom = 4.0 + 3.0 * DEFAULT_K;
        assert!((m.prob("a", &[]) - 3.01 / denom).abs() < EPS);
        assert!((m.prob("zzz", &[]) - 0.01 / denom).abs() < EPS);
        assert!(m.prob("a", &[]) > 0.7);
    }

    #[test]
    fn bigram_hand_counts() {
        // 6 tokens over two sentences: "a b c" / "a c a"
        let m = NgramModel::train("a b c\na c a\n", 2).unwrap();
        // vocab {a,b,c,</s>} + unk
        let v = 5.0;
        let k = DEFAULT_K;
        // c(a) as history = 3 (a b, a c, a </s>)
        assert!((m.prob("b", &["a"]) - (1.0 + k) / (3.0 + k * v)).abs() < EPS);
        assert!((m.prob("c", &["a"]) - (1.0 + k) / (3.0 + k * v)).abs() < EPS);
        assert!((m.prob("a", &["a"]) - k / (3.0 + k * v)).abs() < EPS);
        // <s> history seen twice, both followed by a
        assert!((m.prob("a", &[BOS]) - (2.0 + k) / (2.0 + k * v)).abs() < EPS);
        // unseen history backs off to unigrams: N = 8
        assert!((m.prob("a", &["q"]) - (3.0 + k) / (8.0 + k * v)).abs() < EPS);
    }

    #[test]
    fn conditionals_sum_to_one() {
        let m = NgramModel::train("the cat sat\nthe dog sat down\na cat ran\n", 3).unwrap();
        let mut outcomes: Vec<&str> = m.vocab().iter().map(String::as_str).collect();
        outcomes.push(UNK);
        for h in [[BOS, BOS], [BOS, "the"], ["the", "cat"], ["zz", "cat"], ["q", "r"]] {
            let s: f64 = outcomes.iter().map(|w| m.prob(w, &h)).sum();
            assert!((s - 1.0).abs() < 1e-9, "history {h:?} sums to {s}");
        }
    }

    #[test]
    fn case_folding_and_unknowns() {
        let m = NgramModel::train("The Cat", 2).unwrap();
        assert_eq!(m.prob("THE", &[BOS]), m.prob("the", &[BOS]));
        let lp = m.sentence_logprob(&["never", "seen"]);
        assert!(lp.is_finite());
    }

    #[test]
    fn empty_sentence_is_boundary_transition() {
        let m = NgramModel::train("a\n", 2).unwrap();
        assert!((m.sentence_logprob(&[]) - m.prob(EOS, &[BOS]).ln()).abs() < EPS);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(NgramModel::train("\n \n", 3), Err(Error::EmptyCorpus(_))));
        assert!(matches!(NgramModel::train("a", 6), Err(Error::Config(_))));
    }

    #[test]
    fn text_round_trip() {
        let m = NgramModel::train("a b c\na c a\n", 3).unwrap();
        let text = m.to_text();
        let back = NgramModel::from_text(&text, "mem").unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn loader_reports_line() {
        let err = NgramModel::from_text("ORDER 1\na\tx\n", "m.counts").unwrap_err();
        assert!(matches!(err, Error::Model { line: 2, .. }));
        let err = NgramModel::from_text("a\t1\n", "m.counts").unwrap_err();
        assert!(matches!(err, Error::Model { line: 1, .. }));
    }
}
