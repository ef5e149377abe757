#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semsimp::compressor::{BinaryProgram, Constraint, RelProbTable};
use semsimp::drs::{parse_drs_file, SemanticGraph};
use semsimp::lexsimp::{LexRuleTable, Stopwords};
use semsimp::lm::NgramModel;
use semsimp::pipeline::{Pipeline, PipelineConfig};
use semsimp::splitter::SplitFeatureTable;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(rel)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn higgs_raw() -> SemanticGraph {
    parse_drs_file(data("higgs.jsonl")).unwrap().remove(0)
}

pub struct HiggsModels {
    pub sft: SplitFeatureTable,
    pub lm: NgramModel,
    pub rules: LexRuleTable,
    pub relprobs: RelProbTable,
}

/// Toy models chosen so the worked example's choices are the argmaxes.
pub fn higgs_models() -> HiggsModels {
    HiggsModels {
        sft: SplitFeatureTable::load(data("higgs/sft.tsv")).unwrap(),
        lm: NgramModel::train(&std::fs::read_to_string(data("higgs/simple.txt")).unwrap(), 3).unwrap(),
        rules: LexRuleTable::load(data("higgs/rules.tsv")).unwrap(),
        relprobs: RelProbTable::load(data("higgs/relprobs.tsv")).unwrap(),
    }
}

/// Full pipeline over the toy models, with the deletion knob the example
/// needs to drop two phrases per sentence.
pub fn higgs_pipeline() -> Pipeline {
    let mut cfg = PipelineConfig::in_dir(data("higgs"));
    cfg.compress.min_deleted_tokens = 5;
    Pipeline::load(&cfg).unwrap()
}

pub fn stopwords() -> Stopwords {
    Stopwords::english()
}

/// Bell numbers by the recursive set-partition count
/// `S(n, k) = k S(n-1, k) + S(n-1, k-1)`, summed over k.
pub fn bell_oracle(n: usize) -> u64 {
    fn stirling(n: usize, k: usize) -> u64 {
        match (n, k) {
            (0, 0) => 1,
            (0, _) | (_, 0) => 0,
            _ => k as u64 * stirling(n - 1, k) + stirling(n - 1, k - 1),
        }
    }
    (0..=n).map(|k| stirling(n, k)).sum()
}

/// Random deletion-shaped program: a forest of chain rows, a forced
/// deletion row, sometimes a weighted minimum-deletion row and pinned
/// variables.
pub fn random_program(r: &mut impl Rng, max_vars: usize) -> BinaryProgram {
    let n = r.random_range(1..=max_vars);
    let weights: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
    let mut constraints = Vec::new();
    for i in 1..n {
        if r.random_bool(0.5) {
            let p = r.random_range(0..i);
            constraints.push(Constraint::new(vec![(i, 1), (p, -1)], 0));
        }
    }
    constraints.push(Constraint::new((0..n).map(|i| (i, 1)).collect(), n as i64 - 1));
    if r.random_bool(0.4) {
        let tokens: Vec<i64> = (0..n).map(|_| r.random_range(1..5)).collect();
        let total: i64 = tokens.iter().sum();
        let k = r.random_range(1..=total);
        constraints.push(Constraint::new(
            tokens.iter().enumerate().map(|(i, &t)| (i, t)).collect(),
            total - k,
        ));
    }
    if r.random_bool(0.2) {
        let i = r.random_range(0..n);
        constraints.push(Constraint::new(vec![(i, -1)], -1));
    }
    BinaryProgram { weights, constraints }
}

/// Best objective over all 2^n assignments, `None` when none is feasible.
pub fn brute_force(p: &BinaryProgram) -> Option<f64> {
    let n = p.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if p.feasible(&x) {
            let v = p.objective(&x);
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    }
    best
}
