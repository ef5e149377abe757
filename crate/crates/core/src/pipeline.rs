//! The simplification pipeline: lexical substitution, then splitting, then
//! deletion, over one DRS-JSON record per line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::compressor::{compress, CompressOptions, RelProbTable};
use crate::drs::{lift_modifiers, parse_drs_line, preprocess, realize, SemanticGraph};
use crate::error::{Error, Result};
use crate::lexsimp::{apply_to_graph, plan_substitutions, LexRuleTable, Stopwords, DEFAULT_KAPPA};
use crate::lm::NgramModel;
use crate::splitter::{split_graph, SplitFeatureTable, SplitOptions};

/// Environment variable naming the default model directory.
pub const MODELS_ENV: &str = "SEMSIMP_MODELS";

pub const SFT_FILE: &str = "sft.tsv";
pub const LM_FILE: &str = "lm.counts";
pub const RULES_FILE: &str = "rules.tsv";
pub const RELPROBS_FILE: &str = "relprobs.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub lex: bool,
    pub split: bool,
    pub delete: bool,
}

impl Stages {
    pub const ALL: Stages = Stages {
        lex: true,
        split: true,
        delete: true,
    };

    pub fn any(&self) -> bool {
        self.lex || self.split || self.delete
    }

    /// The seven non-empty stage combinations, single stages first.
    pub fn combinations() -> Vec<Stages> {
        let mut all: Vec<Stages> = (1u8..8)
            .map(|m| Stages {
                lex: m & 1 != 0,
                split: m & 2 != 0,
                delete: m & 4 != 0,
            })
            .collect();
        all.sort_by_key(|s| (s.lex as u8 + s.split as u8 + s.delete as u8, !s.lex, !s.split));
        all
    }

    /// Row label such as `LexSimpl-Split-Deletion`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.lex {
            parts.push("LexSimpl");
        }
        if self.split {
            parts.push("Split");
        }
        if self.delete {
            parts.push("Deletion");
        }
        parts.join("-")
    }
}

impl Default for Stages {
    fn default() -> Self {
        Stages::ALL
    }
}

impl FromStr for Stages {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut stages = Stages {
            lex: false,
            split: false,
            delete: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "lex" => stages.lex = true,
                "split" => stages.split = true,
                "delete" => stages.delete = true,
                other => return Err(Error::Config(format!("unknown stage `{other}`"))),
            }
        }
        if !stages.any() {
            return Err(Error::Config("at least one stage must be enabled".into()));
        }
        Ok(stages)
    }
}

impl fmt::Display for Stages {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.lex {
            parts.push("lex");
        }
        if self.split {
            parts.push("split");
        }
        if self.delete {
            parts.push("delete");
        }
        f.write_str(&parts.join(","))
    }
}

/// Parses a flat `key = value` file. `#` starts a comment line.
pub fn parse_config(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{origin}:{}: expected `key = value`", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Model locations and stage settings for [`Pipeline::load`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sft: PathBuf,
    pub lm: PathBuf,
    pub rules: PathBuf,
    pub relprobs: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub stages: Stages,
    pub split: SplitOptions,
    pub kappa: f64,
    pub compress: CompressOptions,
}

impl PipelineConfig {
    /// Default file names inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        PipelineConfig {
            sft: dir.join(SFT_FILE),
            lm: dir.join(LM_FILE),
            rules: dir.join(RULES_FILE),
            relprobs: dir.join(RELPROBS_FILE),
            stopwords: None,
            stages: Stages::ALL,
            split: SplitOptions::default(),
            kappa: DEFAULT_KAPPA,
            compress: CompressOptions::default(),
        }
    }
}

/// Everything the enabled stages need, loaded once and shared read-only.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub stages: Stages,
    pub split: SplitOptions,
    pub kappa: f64,
    pub compress: CompressOptions,
    pub stopwords: Stopwords,
    pub rules: Option<LexRuleTable>,
    pub lm: Option<NgramModel>,
    pub sft: Option<SplitFeatureTable>,
    pub relprobs: Option<RelProbTable>,
}

/// Intermediate and final realizations of one input record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub id: String,
    pub input: String,
    /// After lexical simplification.
    pub s1: String,
    /// After splitting, one entry per sentence.
    pub s2: Vec<String>,
    /// Final sentences.
    pub output: Vec<String>,
}

impl Trace {
    pub fn output_line(&self) -> String {
        self.output.join(" ")
    }
}

#[derive(Debug)]
pub struct LineOutcome {
    /// Line to emit: the simplification, or the input itself on failure.
    pub output: String,
    pub trace: Option<Trace>,
    pub error: Option<Error>,
}

fn need<T>(model: Option<T>, what: &str) -> Result<T> {
    model.ok_or_else(|| Error::Config(format!("stage needs a {what} model")))
}

impl Pipeline {
    /// Loads the models required by the enabled stages.
    pub fn load(cfg: &PipelineConfig) -> Result<Self> {
        if !cfg.stages.any() {
            return Err(Error::Config("at least one stage must be enabled".into()));
        }
        let stopwords = match &cfg.stopwords {
            Some(p) => Stopwords::load(p)?,
            None => Stopwords::english(),
        };
        let s = cfg.stages;
        Ok(Pipeline {
            stages: s,
            split: cfg.split,
            kappa: cfg.kappa,
            compress: cfg.compress,
            stopwords,
            rules: s.lex.then(|| LexRuleTable::load(&cfg.rules)).transpose()?,
            lm: s.split.then(|| NgramModel::load(&cfg.lm)).transpose()?,
            sft: s.split.then(|| SplitFeatureTable::load(&cfg.sft)).transpose()?,
            relprobs: s.delete.then(|| RelProbTable::load(&cfg.relprobs)).transpose()?,
        })
    }

    /// Builds a pipeline from models already in memory, checking that every
    /// enabled stage has what it needs.
    pub fn from_models(
        stages: Stages,
        rules: Option<LexRuleTable>,
        lm: Option<NgramModel>,
        sft: Option<SplitFeatureTable>,
        relprobs: Option<RelProbTable>,
    ) -> Result<Self> {
        if !stages.any() {
            return Err(Error::Config("at least one stage must be enabled".into()));
        }
        Ok(Pipeline {
            stages,
            split: SplitOptions::default(),
            kappa: DEFAULT_KAPPA,
            compress: CompressOptions::default(),
            stopwords: Stopwords::english(),
            rules: if stages.lex { Some(need(rules, "rules")?) } else { rules },
            lm: if stages.split { Some(need(lm, "language")?) } else { lm },
            sft: if stages.split { Some(need(sft, "split feature")?) } else { sft },
            relprobs: if stages.delete { Some(need(relprobs, "relation")?) } else { relprobs },
        })
    }

    /// Same models with a different stage selection.
    pub fn with_stages(&self, stages: Stages) -> Result<Self> {
        let mut p = Pipeline::from_models(
            stages,
            self.rules.clone(),
            self.lm.clone(),
            self.sft.clone(),
            self.relprobs.clone(),
        )?;
        p.split = self.split;
        p.kappa = self.kappa;
        p.compress = self.compress;
        p.stopwords = self.stopwords.clone();
        Ok(p)
    }

    /// Runs the enabled stages on a raw (unpreprocessed) graph.
    pub fn simplify_graph(&self, raw: &SemanticGraph) -> Result<Trace> {
        let input = raw.surfaces().join(" ");
        let mut g = preprocess(raw.clone());
        g.check_coverage()?;

        if let (true, Some(rules)) = (self.stages.lex, &self.rules) {
            let surfaces = g.surfaces();
            let plan = plan_substitutions(&surfaces, rules, &self.stopwords, self.kappa);
            let subs = plan.substitutions(&surfaces);
            g = apply_to_graph(&g, &subs);
        }
        let g = lift_modifiers(g);
        let s1 = realize(&g, &g.all_vars());

        let sentences = match (self.stages.split, &self.lm, &self.sft) {
            (true, Some(lm), Some(sft)) => split_graph(&g, lm, sft, &self.split)?.sentences,
            _ => vec![g],
        };
        let s2: Vec<String> = sentences.iter().map(|s| realize(s, &s.all_vars())).collect();

        let output = match (self.stages.delete, &self.relprobs) {
            (true, Some(probs)) => sentences
                .iter()
                .map(|s| {
                    let c = compress(s, probs, &self.compress);
                    realize(&c, &c.all_vars())
                })
                .collect(),
            _ => s2.clone(),
        };
        Ok(Trace {
            id: raw.id.clone(),
            input,
            s1,
            s2,
            output,
        })
    }

    /// Parses and simplifies one DRS-JSON line. `line` is 1-based.
    pub fn simplify_line(&self, text: &str, line: usize) -> Result<Trace> {
        self.simplify_graph(&parse_drs_line(text, line)?)
    }

    /// Simplifies a batch in parallel. Results keep input order; a failing
    /// record yields its own input back (its tokens when the record parsed,
    /// the raw line otherwise). Blank lines stay blank.
    pub fn run_batch(&self, lines: &[String]) -> Vec<LineOutcome> {
        lines
            .par_iter()
            .enumerate()
            .map(|(i, text)| {
                if text.trim().is_empty() {
                    return LineOutcome {
                        output: String::new(),
                        trace: None,
                        error: None,
                    };
                }
                match parse_drs_line(text, i + 1) {
                    Err(e) => LineOutcome {
                        output: text.clone(),
                        trace: None,
                        error: Some(e),
                    },
                    Ok(raw) => match self.simplify_graph(&raw) {
                        Ok(trace) => LineOutcome {
                            output: trace.output_line(),
                            trace: Some(trace),
                            error: None,
                        },
                        Err(e) => LineOutcome {
                            output: raw.surfaces().join(" "),
                            trace: None,
                            error: Some(e),
                        },
                    },
                }
            })
            .collect()
    }
}
