use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{cosine, ContextVector, CorpusVectors};
use crate::error::{Error, Result};

pub const DEFAULT_THETA: f64 = 0.1;
pub const DEFAULT_F_MIN: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct LexRule {
    /// Space-separated token sequence; more than one token for multiword rules.
    pub complex: String,
    pub simple: String,
    pub similarity: f64,
    pub gain: f64,
}

impl LexRule {
    pub fn complex_tokens(&self) -> Vec<&str> {
        self.complex.split(' ').collect()
    }

    pub fn simple_tokens(&self) -> Vec<&str> {
        self.simple.split(' ').collect()
    }
}

/// Word complexity: add-one smoothed frequency ratio (complex corpus over
/// simple corpus) times length in characters.
pub fn complexity(word: &str, complex: &CorpusVectors, simple: &CorpusVectors) -> f64 {
    let ratio = (complex.frequency(word) as f64 + 1.0) / (simple.frequency(word) as f64 + 1.0);
    ratio * word.chars().count() as f64
}

/// Rules indexed by their complex side, plus the simple-corpus context
/// vectors needed to score them in context.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LexRuleTable {
    rules: BTreeMap<String, Vec<LexRule>>,
    vectors: BTreeMap<String, ContextVector>,
}

/// `(C, S)` is a rule when `C != S`, `S` has a simple-corpus vector,
/// `cos(vec_C, vec_S) >= theta` and `C` is strictly more complex than `S`.
/// Both vector maps are expected to be built with the same `f_min`.
pub fn extract_rules(complex: &CorpusVectors, simple: &CorpusVectors, theta: f64) -> LexRuleTable {
    let simple_words: Vec<(&String, &ContextVector)> = simple.vectors.iter().collect();
    let found: Vec<LexRule> = complex
        .vectors
        .par_iter()
        .flat_map_iter(|(c, vc)| {
            let cc = complexity(c, complex, simple);
            simple_words.iter().filter_map(move |&(s, vs)| {
                if c == s {
                    return None;
                }
                let sim = cosine(vc, vs);
                if sim < theta {
                    return None;
                }
                let cs = complexity(s, complex, simple);
                (cc > cs).then(|| LexRule {
                    complex: c.clone(),
                    simple: s.clone(),
                    similarity: sim,
                    gain: cc / cs,
                })
            })
        })
        .collect();

    let mut table = LexRuleTable::default();
    for rule in found {
        table
            .vectors
            .entry(rule.simple.clone())
            .or_insert_with(|| simple.vectors[&rule.simple].clone());
        table.insert(rule);
    }
    table
}

fn sort_rules(rules: &mut [LexRule]) {
    rules.sort_by(|a, b| {
        b.similarity
            .partial_cmp(&a.similarity)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.simple.cmp(&b.simple))
    });
}

/// Path of the context-vector file stored next to a rule file.
pub fn vectors_path(rules_path: &Path) -> PathBuf {
    let mut name = rules_path.as_os_str().to_owned();
    name.push(".vectors");
    PathBuf::from(name)
}

impl LexRuleTable {
    pub fn insert(&mut self, rule: LexRule) {
        let bucket = self.rules.entry(rule.complex.clone()).or_default();
        bucket.push(rule);
        sort_rules(bucket);
    }

    pub fn set_vector(&mut self, word: impl Into<String>, vector: ContextVector) {
        self.vectors.insert(word.into(), vector);
    }

    /// Rules for a complex word or token sequence (space-joined), best first.
    pub fn lookup(&self, complex: &str) -> &[LexRule] {
        self.rules.get(complex).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn vector(&self, simple: &str) -> Option<&ContextVector> {
        self.vectors.get(simple)
    }

    pub fn len(&self) -> usize {
        self.rules.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> impl Iterator<Item = &LexRule> {
        self.rules.values().flatten()
    }

    /// Longest complex key, in tokens.
    pub fn max_key_len(&self) -> usize {
        self.rules.keys().map(|k| k.split(' ').count()).max().unwrap_or(0)
    }

    /// `<complex>\t<simple>\t<similarity>\t<gain>` with six decimals, sorted by
    /// complex side then descending similarity.
    pub fn rules_text(&self) -> String {
        let mut out = String::new();
        for rule in self.rules() {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.6}\t{:.6}",
                rule.complex, rule.simple, rule.similarity, rule.gain
            );
        }
        out
    }

    /// `<word>\t<context>:<count> ...` for every stored vector, sorted.
    pub fn vectors_text(&self) -> String {
        let mut out = String::new();
        for (word, v) in &self.vectors {
            let cells: Vec<String> = v.iter().map(|(c, n)| format!("{c}:{n}")).collect();
            let _ = writeln!(out, "{word}\t{}", cells.join(" "));
        }
        out
    }

    pub fn from_text(rules: &str, vectors: &str, origin: &str) -> Result<Self> {
        let mut table = LexRuleTable::default();
        for (i, line) in rules.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [complex, simple, sim, gain] = fields[..] else {
                return Err(Error::model(origin, i + 1, "expected 4 tab-separated fields"));
            };
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::model(origin, i + 1, format!("bad {what} `{s}`")))
            };
            table.insert(LexRule {
                complex: complex.to_string(),
                simple: simple.to_string(),
                similarity: parse(sim, "similarity")?,
                gain: parse(gain, "gain")?,
            });
        }
        let vorigin = format!("{origin}.vectors");
        for (i, line) in vectors.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (word, cells) = line
                .split_once('\t')
                .ok_or_else(|| Error::model(&vorigin, i + 1, "expected `<word>\\t<cells>`"))?;
            let mut v = ContextVector::new();
            for cell in cells.split(' ').filter(|c| !c.is_empty()) {
                let (ctx, n) = cell
                    .rsplit_once(':')
                    .ok_or_else(|| Error::model(&vorigin, i + 1, format!("bad cell `{cell}`")))?;
                let n: u32 = n
                    .parse()
                    .map_err(|_| Error::model(&vorigin, i + 1, format!("bad count in `{cell}`")))?;
                v.insert(ctx.to_string(), n);
            }
            table.vectors.insert(word.to_string(), v);
        }
        Ok(table)
    }

    /// Loads `path` and, when present, its `.vectors` companion. Without
    /// vectors every rule scores zero in context.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rules = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let vpath = vectors_path(path);
        let vectors = match fs::read_to_string(&vpath) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(Error::io(vpath, e)),
        };
        Self::from_text(&rules, &vectors, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.rules_text()).map_err(|e| Error::io(path, e))?;
        let vpath = vectors_path(path);
        fs::write(&vpath, self.vectors_text()).map_err(|e| Error::io(vpath, e))
    }
}
