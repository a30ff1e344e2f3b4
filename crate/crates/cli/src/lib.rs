//! Command-line front end for the signature identification pipeline.
//!
//! Every verb is a plain function over parsed arguments that writes to the
//! supplied streams, so the binary and the integration tests share one path.
//! Exit codes: 0 success, 2 usage error, 3 data or format error, 4 internal
//! invariant violation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use wavesig::eval::evaluate_with_databases;
use wavesig::{
    generate, identify, load_pgm, preprocess, read_corpus, write_corpus, EvalConfig, FeatureDb, FeatureExtractor,
    FeatureMethod, SynthConfig, DEFAULT_LEVELS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl From<wavesig::Error> for CliError {
    fn from(e: wavesig::Error) -> Self {
        match e {
            wavesig::Error::Config(_) => CliError::Usage(e.to_string()),
            wavesig::Error::Invariant(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "wavesig", version, about = "Wavelet-feature signature identification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic signature corpus as PGM files.
    Synth(SynthArgs),
    /// Extract features from a corpus and write a feature database.
    Enroll(EnrollArgs),
    /// Rank enrolled signatures by distance to a query image.
    Identify(IdentifyArgs),
    /// Run train/test identification experiments on a corpus.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory, laid out as `<person>/<sample>.pgm`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub persons: usize,
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Maximum control-point displacement per sample, in pixels.
    #[arg(long, default_value_t = 18.0)]
    pub jitter: f64,
    /// Write into a non-empty directory, overwriting same-named files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EnrollArgs {
    pub corpus: PathBuf,
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long, default_value = "rcwf")]
    pub method: FeatureMethod,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: usize,
    /// Abort on the first unreadable image instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads for feature extraction (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    pub image: PathBuf,
    #[arg(long)]
    pub db: PathBuf,
    /// Expected method; must match the database.
    #[arg(long)]
    pub method: Option<FeatureMethod>,
    /// Expected depth; must match the database.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub corpus: PathBuf,
    /// Methods to compare; repeat the flag for several (default: all).
    #[arg(long = "method")]
    pub methods: Vec<FeatureMethod>,
    #[arg(long, default_value_t = 12)]
    pub train: usize,
    #[arg(long, default_value_t = 4)]
    pub test: usize,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Write the machine-readable `key=value` report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write each method's first-split training database here as `<method>.db`.
    #[arg(long)]
    pub db_dir: Option<PathBuf>,
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub jobs: Option<usize>,
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    match jobs {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Invariant(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn check_counts(levels: usize, jobs: Option<usize>) -> CliResult<()> {
    if levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(())
}

fn load_samples(corpus: &Path, strict: bool, err: &mut dyn Write) -> CliResult<Vec<wavesig::LabeledImage>> {
    let load = read_corpus(corpus, strict)?;
    for (path, e) in &load.skipped {
        let _ = writeln!(err, "warning: skipped {}: {e}", path.display());
    }
    Ok(load.samples)
}

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = SynthConfig {
        persons: args.persons,
        samples_per_person: args.samples,
        seed: args.seed,
        jitter: args.jitter,
        ..SynthConfig::default()
    };
    cfg.validate()?;
    if args.out.exists() && !args.force {
        let mut entries = fs::read_dir(&args.out).map_err(|e| io_error(&args.out, e))?;
        if entries.next().is_some() {
            return Err(CliError::Usage(format!(
                "{} is not empty; pass --force to write into it",
                args.out.display()
            )));
        }
    }
    let corpus = generate(&cfg)?;
    write_corpus(&args.out, &corpus)?;
    let _ = writeln!(
        out,
        "wrote {} images ({} persons x {} samples) to {}",
        corpus.len(),
        cfg.persons,
        cfg.samples_per_person,
        args.out.display()
    );
    Ok(())
}

pub fn cmd_enroll(args: &EnrollArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    check_counts(args.levels, args.jobs)?;
    let samples = load_samples(&args.corpus, args.strict, err)?;
    let extractor = FeatureExtractor::new(args.method, args.levels);
    let vectors = with_jobs(args.jobs, || {
        let pages = wavesig::eval::preprocess_all(&samples.iter().map(|s| &s.image).collect::<Vec<_>>())?;
        Ok(wavesig::eval::extract_all(&extractor, &pages)?)
    })?;
    let mut db = FeatureDb::new(args.method, args.levels);
    for (s, fv) in samples.iter().zip(&vectors) {
        db.enroll(&s.person_id, &s.sample_id, fv)?;
    }
    db.save(&args.db)?;
    let _ = writeln!(
        out,
        "enrolled {} samples ({}, {} levels, feature length {}) into {}",
        db.len(),
        db.method,
        db.levels,
        db.feature_length,
        args.db.display()
    );
    Ok(())
}

pub fn cmd_identify(args: &IdentifyArgs, out: &mut dyn Write) -> CliResult<()> {
    if args.top_k == 0 {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    let db = FeatureDb::load(&args.db).map_err(|e| CliError::Data(format!("{}: {e}", args.db.display())))?;
    if let Some(m) = args.method {
        if m != db.method {
            return Err(CliError::Usage(format!("--method {m} does not match database method {}", db.method)));
        }
    }
    if let Some(l) = args.levels {
        if l != db.levels {
            return Err(CliError::Usage(format!("--levels {l} does not match database levels {}", db.levels)));
        }
    }
    let bytes = fs::read(&args.image).map_err(|e| io_error(&args.image, e))?;
    let page = preprocess(&load_pgm(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", args.image.display())))?)?;
    let query = FeatureExtractor::new(db.method, db.levels).extract(&page)?;
    let result = identify(&query, &db)?;
    for (rank, r) in result.ranked.iter().take(args.top_k).enumerate() {
        let _ = writeln!(out, "{} {} {} {}", rank + 1, r.person_id, r.sample_id, r.distance);
    }
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    check_counts(args.levels, args.jobs)?;
    let mut methods: Vec<FeatureMethod> = Vec::new();
    for &m in if args.methods.is_empty() { &FeatureMethod::ALL[..] } else { &args.methods } {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let cfg = EvalConfig {
        methods,
        train_per_person: args.train,
        test_per_person: args.test,
        levels: args.levels,
        seed: args.seed,
        repeats: args.repeats,
    };
    let samples = load_samples(&args.corpus, args.strict, err)?;
    let (report, databases) = with_jobs(args.jobs, || Ok(evaluate_with_databases(&samples, &cfg)?))?;
    for r in &report.results {
        if r.correct > r.total || r.total != report.persons * cfg.test_per_person * cfg.repeats {
            return Err(CliError::Invariant(format!("inconsistent counts for {}", r.method)));
        }
    }
    let _ = write!(out, "{}", report.to_table());
    if let Some(path) = &args.report {
        fs::write(path, report.to_key_values()).map_err(|e| io_error(path, e))?;
        let _ = writeln!(out, "report written to {}", path.display());
    }
    if let Some(dir) = &args.db_dir {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        for db in &databases {
            db.save(&dir.join(format!("{}.db", db.method)))?;
        }
        let _ = writeln!(out, "training databases written to {}", dir.display());
    }
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a, out),
        Command::Enroll(a) => cmd_enroll(a, out, err),
        Command::Identify(a) => cmd_identify(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out, err),
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
