//! Probabilistic sentence splitting over event partitions.
//!
//! Every set partition of a sentence's events is a candidate split. A
//! candidate with blocks `s_1..s_n` scores
//!
//! ```text
//! P_split = 1/n * sum_i  L_split / (L_split + |L_split - L_i|) * lm_i * SFT_i
//! ```
//!
//! with `L_split = L_S / n`, `L_i` the word count of block `i` once realized,
//! `lm_i` its language-model score and `SFT_i` the split feature table
//! probability of its semantic pattern.

mod layout;
mod partition;
mod sft;

use std::cmp::Ordering;
use std::str::FromStr;

use rayon::prelude::*;

use crate::drs::{events_of, realize, word_count, SemanticGraph};
use crate::error::{Error, Result};
use crate::lm::LanguageModel;

pub use layout::{block_closure, block_graph, layout, BlockLayout, SharedCopy, SplitLayout, MAX_COPY_TOKENS};
pub use partition::enumerate_partitions;
pub use sft::{pattern_of, RoleSet, SemanticPattern, SplitFeatureTable, BACKOFF_SCALE, UNSEEN_FLOOR};

pub const DEFAULT_MAX_EVENTS: usize = 8;

/// How a block's n-gram probability enters the split score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LmNormalize {
    /// Raw sentence probability.
    None,
    /// Sentence probability raised to `1 / word count`.
    #[default]
    PerWord,
}

impl FromStr for LmNormalize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(LmNormalize::None),
            "perword" => Ok(LmNormalize::PerWord),
            other => Err(Error::Config(format!("unknown lm normalization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitOptions {
    pub max_events: usize,
    pub lm_normalize: LmNormalize,
    /// Replace long shared copies with a pronoun.
    pub pronominalize: bool,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            max_events: DEFAULT_MAX_EVENTS,
            lm_normalize: LmNormalize::PerWord,
            pronominalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockScore {
    pub events: Vec<String>,
    pub tokens: Vec<String>,
    pub length: usize,
    pub lm: f64,
    pub sft: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    /// Blocks of event variables, ordered by earliest position.
    pub blocks: Vec<Vec<String>>,
    pub block_scores: Vec<BlockScore>,
    pub sentence_length: usize,
    pub score: f64,
}

/// The split score for a sentence of `sentence_length` words split into
/// blocks given as `(length, lm, sft)`. A zero-length block voids the split.
pub fn split_score(sentence_length: usize, blocks: &[(usize, f64, f64)]) -> f64 {
    if blocks.is_empty() || blocks.iter().any(|b| b.0 == 0) {
        return 0.0;
    }
    let n = blocks.len() as f64;
    let l_split = sentence_length as f64 / n;
    let sum: f64 = blocks
        .iter()
        .map(|&(len, lm, sft)| {
            let balance = l_split / (l_split + (l_split - len as f64).abs());
            balance * lm * sft
        })
        .sum();
    sum / n
}

fn lm_score<L: LanguageModel + ?Sized>(lm: &L, tokens: &[&str], mode: LmNormalize) -> f64 {
    let logprob = lm.sentence_logprob(tokens);
    match mode {
        LmNormalize::None => logprob.exp(),
        LmNormalize::PerWord => {
            let words = word_count(tokens).max(1) as f64;
            (logprob / words).exp()
        }
    }
}

/// Scores one partition of `g`'s events. `g` must be preprocessed and
/// modifier-lifted.
pub fn score_split<L: LanguageModel + ?Sized>(
    g: &SemanticGraph,
    partition: &[Vec<String>],
    lm: &L,
    sft: &SplitFeatureTable,
    opts: &SplitOptions,
) -> SplitCandidate {
    let plan = layout(g, partition);
    let sentence_length = word_count(&g.surfaces());
    let block_scores: Vec<BlockScore> = (0..plan.blocks.len())
        .map(|i| {
            let bg = block_graph(g, &plan, i, opts.pronominalize);
            let tokens = bg.surfaces();
            let events = plan.blocks[i].events.clone();
            BlockScore {
                length: word_count(&tokens),
                lm: lm_score(lm, &tokens, opts.lm_normalize),
                sft: sft.probability(&pattern_of(g, &events)),
                tokens: tokens.into_iter().map(str::to_string).collect(),
                events,
            }
        })
        .collect();
    let stats: Vec<(usize, f64, f64)> = block_scores.iter().map(|b| (b.length, b.lm, b.sft)).collect();
    SplitCandidate {
        blocks: plan.blocks.iter().map(|b| b.events.clone()).collect(),
        score: split_score(sentence_length, &stats),
        block_scores,
        sentence_length,
    }
}

/// Candidate preference: higher score, then fewer blocks, then the smaller
/// block signature.
fn better(a: &SplitCandidate, b: &SplitCandidate) -> Ordering {
    a.score
        .partial_cmp(&b.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.blocks.len().cmp(&a.blocks.len()))
        .then_with(|| b.blocks.cmp(&a.blocks))
}

/// Scores every partition and returns them all, best first.
pub fn rank_splits<L: LanguageModel + ?Sized>(
    g: &SemanticGraph,
    lm: &L,
    sft: &SplitFeatureTable,
    opts: &SplitOptions,
) -> Result<Vec<SplitCandidate>> {
    let events = events_of(g)?;
    let partitions = enumerate_partitions(&events, opts.max_events)?;
    let mut candidates: Vec<SplitCandidate> = partitions
        .par_iter()
        .map(|p| score_split(g, p, lm, sft, opts))
        .collect();
    candidates.sort_by(|a, b| better(b, a));
    Ok(candidates)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    /// `None` when the sentence was left whole without scoring (no events or
    /// too many of them).
    pub chosen: Option<SplitCandidate>,
    pub sentences: Vec<SemanticGraph>,
}

/// Picks the best split of `g` and builds one graph per output sentence.
/// Sentences without events, or with more than `max_events`, come back whole.
pub fn split_graph<L: LanguageModel + ?Sized>(
    g: &SemanticGraph,
    lm: &L,
    sft: &SplitFeatureTable,
    opts: &SplitOptions,
) -> Result<SplitOutcome> {
    let unsplit = || SplitOutcome {
        chosen: None,
        sentences: vec![g.clone()],
    };
    let events = events_of(g)?;
    if events.is_empty() || events.len() > opts.max_events {
        return Ok(unsplit());
    }
    let best = rank_splits(g, lm, sft, opts)?.into_iter().next().expect("at least one partition");
    let plan = layout(g, &best.blocks);
    let sentences = if best.blocks.len() == 1 {
        vec![g.clone()]
    } else {
        (0..plan.blocks.len())
            .map(|i| block_graph(g, &plan, i, opts.pronominalize))
            .collect()
    };
    Ok(SplitOutcome {
        chosen: Some(best),
        sentences,
    })
}

/// [`split_graph`] realized as strings, one per output sentence.
pub fn choose_and_realize<L: LanguageModel + ?Sized>(
    g: &SemanticGraph,
    lm: &L,
    sft: &SplitFeatureTable,
    opts: &SplitOptions,
) -> Result<Vec<String>> {
    let outcome = split_graph(g, lm, sft, opts)?;
    Ok(outcome.sentences.iter().map(|s| realize(s, &s.all_vars())).collect())
}
