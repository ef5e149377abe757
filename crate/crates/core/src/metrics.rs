//! Automatic evaluation: edit distance, no-edit counts, corpus BLEU, split
//! counts and length statistics over aligned one-sentence-per-line corpora.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::drs::{is_punct, is_terminal};
use crate::error::{Error, Result};

/// Unit-cost edit distance between two sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub const BLEU_ORDER: usize = 4;

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Per-order clipped matches and candidate n-gram totals, plus the
/// candidate and reference lengths, for one sentence pair.
fn bleu_stats<S: AsRef<str>>(cand: &[S], reference: &[S]) -> [usize; 2 * BLEU_ORDER + 2] {
    let mut stats = [0; 2 * BLEU_ORDER + 2];
    for n in 1..=BLEU_ORDER {
        let c = ngram_counts(cand, n);
        let r = ngram_counts(reference, n);
        stats[2 * (n - 1)] = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
        stats[2 * (n - 1) + 1] = cand.len().saturating_sub(n - 1);
    }
    stats[2 * BLEU_ORDER] = cand.len();
    stats[2 * BLEU_ORDER + 1] = reference.len();
    stats
}

/// Corpus BLEU-4 as a percentage, following multi-bleu: clipped n-gram
/// precisions pooled over the corpus, geometric mean, brevity penalty
/// `exp(1 - r/c)` when the candidate side is shorter. Any order with zero
/// matches gives 0. Orders for which the candidate corpus has no n-grams at
/// all (every sentence shorter than `n`) are left out of the mean.
pub fn bleu<S: AsRef<str> + Sync>(candidates: &[Vec<S>], references: &[Vec<S>]) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::EmptyCorpus("bleu"));
    }
    if candidates.len() != references.len() {
        return Err(Error::Misaligned(format!(
            "{} candidates against {} references",
            candidates.len(),
            references.len()
        )));
    }
    let totals = candidates
        .par_iter()
        .zip(references)
        .map(|(c, r)| bleu_stats(c, r))
        .reduce(
            || [0; 2 * BLEU_ORDER + 2],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let (c, r) = (totals[2 * BLEU_ORDER], totals[2 * BLEU_ORDER + 1]);
    if c == 0 {
        return Ok(if r == 0 { 100.0 } else { 0.0 });
    }
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 0..BLEU_ORDER {
        let (matched, total) = (totals[2 * n], totals[2 * n + 1]);
        if total == 0 {
            continue;
        }
        if matched == 0 {
            return Ok(0.0);
        }
        log_sum += (matched as f64 / total as f64).ln();
        orders += 1;
    }
    let bp = if c < r { (1.0 - r as f64 / c as f64).exp() } else { 1.0 };
    Ok(100.0 * bp * (log_sum / orders as f64).exp())
}

/// Distance unit for the LD columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LdUnit {
    #[default]
    Token,
    Char,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub sentences: usize,
    pub ld_complex_system: f64,
    pub no_edit_complex_system: usize,
    pub ld_system_simple: f64,
    pub no_edit_system_simple: usize,
    pub bleu_simple: f64,
    pub bleu_complex: f64,
    /// Output lines holding two or more sentence terminators.
    pub splits: usize,
    /// Mean words per output line.
    pub avg_sentence_length: f64,
    /// Mean characters per output word.
    pub avg_token_length: f64,
}

impl EvalReport {
    fn pct(&self, count: usize) -> f64 {
        100.0 * count as f64 / self.sentences as f64
    }

    pub fn no_edit_complex_system_pct(&self) -> f64 {
        self.pct(self.no_edit_complex_system)
    }

    pub fn no_edit_system_simple_pct(&self) -> f64 {
        self.pct(self.no_edit_system_simple)
    }

    pub const HEADER: [&'static str; 11] = [
        "LD(C>Sys)",
        "NoEdit",
        "NoEdit%",
        "LD(Sys>S)",
        "NoEdit",
        "NoEdit%",
        "BLEU(S)",
        "BLEU(C)",
        "Splits",
        "AvgSentLen",
        "AvgTokLen",
    ];

    pub fn cells(&self) -> Vec<String> {
        vec![
            format!("{:.2}", self.ld_complex_system),
            self.no_edit_complex_system.to_string(),
            format!("{:.2}", self.no_edit_complex_system_pct()),
            format!("{:.2}", self.ld_system_simple),
            self.no_edit_system_simple.to_string(),
            format!("{:.2}", self.no_edit_system_simple_pct()),
            format!("{:.2}", self.bleu_simple),
            format!("{:.2}", self.bleu_complex),
            self.splits.to_string(),
            format!("{:.2}", self.avg_sentence_length),
            format!("{:.2}", self.avg_token_length),
        ]
    }

    /// Machine-readable `key=value` lines.
    pub fn to_kv(&self, prefix: &str) -> String {
        let mut out = String::new();
        let fields: [(&str, String); 12] = [
            ("sentences", self.sentences.to_string()),
            ("ld_complex_system", format!("{:.6}", self.ld_complex_system)),
            ("no_edit_complex_system", self.no_edit_complex_system.to_string()),
            ("no_edit_complex_system_pct", format!("{:.6}", self.no_edit_complex_system_pct())),
            ("ld_system_simple", format!("{:.6}", self.ld_system_simple)),
            ("no_edit_system_simple", self.no_edit_system_simple.to_string()),
            ("no_edit_system_simple_pct", format!("{:.6}", self.no_edit_system_simple_pct())),
            ("bleu_simple", format!("{:.6}", self.bleu_simple)),
            ("bleu_complex", format!("{:.6}", self.bleu_complex)),
            ("splits", self.splits.to_string()),
            ("avg_sentence_length", format!("{:.6}", self.avg_sentence_length)),
            ("avg_token_length", format!("{:.6}", self.avg_token_length)),
        ];
        for (k, v) in fields {
            let _ = writeln!(out, "{prefix}{k}={v}");
        }
        out
    }
}

/// Aligned plain-text table, one row per `(name, report)`.
pub fn render_table(rows: &[(String, EvalReport)]) -> String {
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("System".to_string())
        .chain(EvalReport::HEADER.iter().map(|h| h.to_string()))
        .collect()];
    for (name, r) in rows {
        grid.push(std::iter::once(name.clone()).chain(r.cells()).collect());
    }
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|c| grid.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &grid {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

fn distance(a: &[String], b: &[String], unit: LdUnit) -> usize {
    match unit {
        LdUnit::Token => levenshtein(a, b),
        LdUnit::Char => {
            let ca: Vec<char> = a.join(" ").chars().collect();
            let cb: Vec<char> = b.join(" ").chars().collect();
            levenshtein(&ca, &cb)
        }
    }
}

/// Evaluates system output against the complex input and the simple
/// reference. All three must have the same number of lines.
pub fn evaluate(system: &[String], complex: &[String], simple: &[String], unit: LdUnit) -> Result<EvalReport> {
    if system.len() != complex.len() || system.len() != simple.len() {
        return Err(Error::Misaligned(format!(
            "system has {} lines, complex {}, simple {}",
            system.len(),
            complex.len(),
            simple.len()
        )));
    }
    if system.is_empty() {
        return Err(Error::EmptyCorpus("evaluation"));
    }
    let sys: Vec<Vec<String>> = system.iter().map(|l| tokenize(l)).collect();
    let cpx: Vec<Vec<String>> = complex.iter().map(|l| tokenize(l)).collect();
    let smp: Vec<Vec<String>> = simple.iter().map(|l| tokenize(l)).collect();

    // per line: ld(c, sys), c == sys, ld(sys, s), sys == s, split, words, chars
    let per_line: Vec<(usize, bool, usize, bool, bool, usize, usize)> = (0..sys.len())
        .into_par_iter()
        .map(|i| {
            let words: Vec<&String> = sys[i].iter().filter(|t| !is_punct(t)).collect();
            (
                distance(&cpx[i], &sys[i], unit),
                cpx[i] == sys[i],
                distance(&sys[i], &smp[i], unit),
                sys[i] == smp[i],
                sys[i].iter().filter(|t| is_terminal(t)).count() >= 2,
                words.len(),
                words.iter().map(|w| w.chars().count()).sum(),
            )
        })
        .collect();

    let n = sys.len() as f64;
    let mut ld_cs = 0;
    let mut ld_ss = 0;
    let (mut ne_cs, mut ne_ss, mut splits, mut words, mut chars) = (0, 0, 0, 0, 0);
    for &(a, b, c, d, e, w, ch) in &per_line {
        ld_cs += a;
        ne_cs += usize::from(b);
        ld_ss += c;
        ne_ss += usize::from(d);
        splits += usize::from(e);
        words += w;
        chars += ch;
    }
    Ok(EvalReport {
        sentences: sys.len(),
        ld_complex_system: ld_cs as f64 / n,
        no_edit_complex_system: ne_cs,
        ld_system_simple: ld_ss as f64 / n,
        no_edit_system_simple: ne_ss,
        bleu_simple: bleu(&sys, &smp)?,
        bleu_complex: bleu(&sys, &cpx)?,
        splits,
        avg_sentence_length: words as f64 / n,
        avg_token_length: if words == 0 { 0.0 } else { chars as f64 / words as f64 },
    })
}
