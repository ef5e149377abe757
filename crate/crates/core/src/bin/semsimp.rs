use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use semsimp::compressor::{CompressOptions, RelProbTable};
use semsimp::drs::{lift_modifiers, parse_drs_file, preprocess, SemanticGraph};
use semsimp::lexsimp::{build_context_vectors, extract_rules, Stopwords, DEFAULT_F_MIN, DEFAULT_KAPPA, DEFAULT_THETA};
use semsimp::lm::{NgramModel, DEFAULT_ORDER};
use semsimp::metrics::{evaluate, render_table, EvalReport, LdUnit};
use semsimp::pipeline::{parse_config, Pipeline, PipelineConfig, Stages, MODELS_ENV};
use semsimp::splitter::{LmNormalize, SplitFeatureTable, SplitOptions, DEFAULT_MAX_EVENTS};
use semsimp::Error;

#[derive(Parser)]
#[command(name = "semsimp", version, about = "Unsupervised sentence simplification over semantic graphs")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Flat `key = value` settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model file from corpora.
    #[command(subcommand)]
    Train(Train),
    /// Simplify DRS-JSON records, one output line per input line.
    Simplify(SimplifyArgs),
    /// Score system output against complex and simple references.
    Evaluate(EvaluateArgs),
}

#[derive(Subcommand)]
enum Train {
    /// Split feature table from a simple-side DRS-JSON corpus.
    Sft {
        #[arg(long)]
        drs: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// N-gram language model from tokenized text, one sentence per line.
    Lm {
        #[arg(long)]
        text: PathBuf,
        /// Model order, 1 to 5.
        #[arg(short = 'n', long)]
        order: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Lexical rules from a complex and a simple corpus.
    Rules {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        simple: PathBuf,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        fmin: Option<u64>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Relation and word probabilities for deletion.
    Relprobs {
        #[arg(long)]
        drs: PathBuf,
        #[arg(long)]
        text: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// Directory holding sft.tsv, lm.counts, rules.tsv and relprobs.tsv.
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long)]
    sft: Option<PathBuf>,
    #[arg(long)]
    lm: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    relprobs: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Comma-separated subset of lex,split,delete.
    #[arg(long)]
    stages: Option<String>,
    #[arg(long)]
    max_events: Option<usize>,
    /// none or perword.
    #[arg(long)]
    lm_normalize: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Replace long repeated noun phrases with a pronoun after a split.
    #[arg(long)]
    pronominalize: bool,
    /// Require compression to remove at least this many tokens.
    #[arg(long)]
    min_deleted_tokens: Option<usize>,
}

#[derive(Args)]
struct SimplifyArgs {
    /// DRS-JSON input (default: stdin).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output text (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print S1, S2 and S for every record to stderr.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    models: ModelArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// System output, one sentence per line. Not used with --ablation.
    #[arg(long, required_unless_present = "ablation")]
    system: Option<PathBuf>,
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    simple: PathBuf,
    /// Run every stage combination on --input and report one row each.
    #[arg(long, requires = "input")]
    ablation: bool,
    /// DRS-JSON input for --ablation.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Character-level instead of token-level edit distance.
    #[arg(long)]
    char_ld: bool,
    /// Write the report as key=value lines here.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    models: ModelArgs,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Settings from `--config`, looked up when a flag is absent.
struct Settings(BTreeMap<String, String>);

impl Settings {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Settings(BTreeMap::new()));
        };
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        Ok(Settings(parse_config(&text, &path.display().to_string())?))
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Failure::Usage(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }

    fn flag(&self, flag: bool, key: &str) -> CliResult<bool> {
        Ok(flag || self.get::<bool>(None, key)?.unwrap_or(false))
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn lines_of(path: &Path) -> CliResult<Vec<String>> {
    Ok(read(path)?.lines().map(str::to_string).collect())
}

fn prepared(path: &Path) -> CliResult<Vec<SemanticGraph>> {
    Ok(parse_drs_file(path)?
        .into_iter()
        .map(|g| lift_modifiers(preprocess(g)))
        .collect())
}

fn pipeline_config(m: &ModelArgs, s: &Settings) -> CliResult<PipelineConfig> {
    let dir = s
        .get(m.models.clone(), "models")?
        .or_else(|| std::env::var_os(MODELS_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut cfg = PipelineConfig::in_dir(dir);
    if let Some(p) = s.get(m.sft.clone(), "sft")? {
        cfg.sft = p;
    }
    if let Some(p) = s.get(m.lm.clone(), "lm")? {
        cfg.lm = p;
    }
    if let Some(p) = s.get(m.rules.clone(), "rules")? {
        cfg.rules = p;
    }
    if let Some(p) = s.get(m.relprobs.clone(), "relprobs")? {
        cfg.relprobs = p;
    }
    cfg.stopwords = s.get(m.stopwords.clone(), "stopwords")?;
    if let Some(st) = s.get::<String>(m.stages.clone(), "stages")? {
        cfg.stages = st.parse()?;
    }
    let lm_normalize = match s.get::<String>(m.lm_normalize.clone(), "lm_normalize")? {
        Some(v) => v.parse::<LmNormalize>()?,
        None => LmNormalize::default(),
    };
    cfg.split = SplitOptions {
        max_events: s.get(m.max_events, "max_events")?.unwrap_or(DEFAULT_MAX_EVENTS),
        lm_normalize,
        pronominalize: s.flag(m.pronominalize, "pronominalize")?,
    };
    cfg.kappa = s.get(m.kappa, "kappa")?.unwrap_or(DEFAULT_KAPPA);
    cfg.compress = CompressOptions {
        min_deleted_tokens: s.get(m.min_deleted_tokens, "min_deleted_tokens")?.unwrap_or(0),
    };
    Ok(cfg)
}

fn train(cmd: Train, s: &Settings) -> CliResult<()> {
    match cmd {
        Train::Sft { drs, output } => {
            let corpus = prepared(&drs)?;
            let table = SplitFeatureTable::build(&corpus)?;
            table.save(&output)?;
            println!(
                "sft: {} patterns over {} sentences -> {}",
                table.patterns().count(),
                table.total(),
                output.display()
            );
        }
        Train::Lm { text, order, output } => {
            let order = s.get(order, "order")?.unwrap_or(DEFAULT_ORDER);
            let model = NgramModel::train(&read(&text)?, order)?;
            model.save(&output)?;
            println!(
                "lm: order {} with {} word types -> {}",
                model.order(),
                model.vocab().len(),
                output.display()
            );
        }
        Train::Rules {
            complex,
            simple,
            theta,
            fmin,
            stopwords,
            output,
        } => {
            let theta = s.get(theta, "theta")?.unwrap_or(DEFAULT_THETA);
            let f_min = s.get(fmin, "fmin")?.unwrap_or(DEFAULT_F_MIN);
            let stop = match s.get(stopwords, "stopwords")? {
                Some(p) => Stopwords::load(p)?,
                None => Stopwords::english(),
            };
            let cv = build_context_vectors(&read(&complex)?, f_min, &stop)?;
            let sv = build_context_vectors(&read(&simple)?, f_min, &stop)?;
            let table = extract_rules(&cv, &sv, theta);
            table.save(&output)?;
            println!("rules: {} rules (theta {theta}, f_min {f_min}) -> {}", table.len(), output.display());
        }
        Train::Relprobs { drs, text, output } => {
            let corpus = prepared(&drs)?;
            let table = RelProbTable::train(&corpus, &read(&text)?)?;
            table.save(&output)?;
            println!(
                "relprobs: {} relation entries, {} words -> {}",
                table.relations().count(),
                table.words().count(),
                output.display()
            );
        }
    }
    Ok(())
}

fn simplify(args: SimplifyArgs, s: &Settings) -> CliResult<()> {
    let cfg = pipeline_config(&args.models, s)?;
    let pipeline = Pipeline::load(&cfg)?;
    let text = match &args.input {
        Some(p) => read(p)?,
        None => {
            let mut buf = String::new();
            io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Failure::Data(format!("stdin: {e}")))?;
            buf
        }
    };
    let lines: Vec<String> = text.lines().map(str::to_string).collect();
    let outcomes = pipeline.run_batch(&lines);

    let mut out = String::new();
    let mut failed = 0;
    let stderr = io::stderr();
    let mut err = stderr.lock();
    for (i, o) in outcomes.iter().enumerate() {
        out.push_str(&o.output);
        out.push('\n');
        if let Some(e) = &o.error {
            failed += 1;
            let _ = writeln!(err, "line {}: {e}; passed through", i + 1);
        }
        if let (true, Some(t)) = (args.trace, &o.trace) {
            let _ = writeln!(err, "[{}] S1: {}", t.id, t.s1);
            let _ = writeln!(err, "[{}] S2: {}", t.id, t.s2.join(" "));
            let _ = writeln!(err, "[{}] S: {}", t.id, t.output_line());
        }
    }
    match &args.output {
        Some(p) => write(p, &out)?,
        None => io::stdout()
            .write_all(out.as_bytes())
            .map_err(|e| Failure::Data(format!("stdout: {e}")))?,
    }
    let records = lines.iter().filter(|l| !l.trim().is_empty()).count();
    if failed > 0 {
        let _ = writeln!(err, "{failed} of {records} records failed");
        return Err(Failure::Data(format!("{failed} records could not be simplified")));
    }
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs, s: &Settings) -> CliResult<()> {
    let complex = lines_of(&args.complex)?;
    let simple = lines_of(&args.simple)?;
    let unit = if args.char_ld { LdUnit::Char } else { LdUnit::Token };

    let rows: Vec<(String, EvalReport)> = if args.ablation {
        let input = args.input.as_deref().expect("clap enforces --input");
        let mut cfg = pipeline_config(&args.models, s)?;
        cfg.stages = Stages::ALL;
        let full = Pipeline::load(&cfg)?;
        let lines = lines_of(input)?;
        let mut rows = Vec::new();
        for stages in Stages::combinations() {
            let system: Vec<String> = full
                .with_stages(stages)?
                .run_batch(&lines)
                .into_iter()
                .map(|o| o.output)
                .collect();
            rows.push((stages.label(), evaluate(&system, &complex, &simple, unit)?));
        }
        rows
    } else {
        let system = lines_of(args.system.as_deref().expect("clap enforces --system"))?;
        vec![("System".to_string(), evaluate(&system, &complex, &simple, unit)?)]
    };

    print!("{}", render_table(&rows));
    if let Some(path) = &args.output {
        let kv: String = if args.ablation {
            rows.iter().map(|(name, r)| r.to_kv(&format!("{name}."))).collect()
        } else {
            rows[0].1.to_kv("")
        };
        write(path, &kv)?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    if let Some(n) = settings.get(cli.threads, "threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Train(t) => train(t, &settings),
        Command::Simplify(a) => simplify(a, &settings),
        Command::Evaluate(a) => evaluate_cmd(a, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("semsimp: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("semsimp: {msg}");
            ExitCode::from(2)
        }
    }
}
