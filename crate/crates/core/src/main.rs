use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use searchvote::{
    build_index, classify, compare_schemes, evaluate, generate_corpus, label_stats, load_corpus,
    split_corpus, write_jsonl, Corpus, CorpusFormat, IndexBundle, MixingSpec, Scheme,
    SearchConfig, TokenizerConfig,
};

#[derive(Parser)]
#[command(name = "searchvote", version, about = "Classify text by voting over its nearest labeled neighbors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus from a JSON mixing spec
    Generate(GenerateArgs),
    /// Build an index file from a labeled corpus
    Index(IndexArgs),
    /// Predict labels for a query
    Classify(ClassifyArgs),
    /// Measure accuracy on a labeled test corpus
    Evaluate(EvaluateArgs),
    /// Print per-label document frequencies and priors
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Csv => CorpusFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Naive,
    Weighted,
    Boosted,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalSchemeArg {
    Naive,
    Weighted,
    Boosted,
    All,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Naive => Scheme::NaiveMajority,
            SchemeArg::Weighted => Scheme::WeightedQuorum,
            SchemeArg::Boosted => Scheme::BoostedQuorum,
        }
    }
}

#[derive(Args)]
struct VoteArgs {
    /// Strict distance cutoff for neighbors, in (0, 1]
    #[arg(long, default_value_t = 0.7)]
    cutoff: f64,
    /// Maximum number of neighbors retrieved per query
    #[arg(long, default_value_t = 50)]
    max_results: usize,
    /// Number of ranked labels to report
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Seed for tie-breaking
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl VoteArgs {
    fn search_config(&self) -> Result<SearchConfig> {
        let cfg = SearchConfig {
            cutoff: self.cutoff,
            max_results: self.max_results,
        };
        cfg.validate()?;
        if self.k == 0 {
            bail!("--k must be at least 1");
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON mixing spec
    #[arg(long)]
    spec: PathBuf,
    /// Number of documents to generate
    #[arg(short = 'n', long = "n-documents")]
    n_documents: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output corpus (jsonl); the training half when --test-out is given
    #[arg(long)]
    out: PathBuf,
    /// Also split off a test corpus and write it here
    #[arg(long, requires = "test_fraction")]
    test_out: Option<PathBuf>,
    /// Fraction of documents sent to --test-out
    #[arg(long, requires = "test_out")]
    test_fraction: Option<f64>,
    /// Seed for the train/test split (defaults to --seed)
    #[arg(long)]
    split_seed: Option<u64>,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    /// Output index file
    #[arg(long)]
    out: PathBuf,
    /// Keep token case
    #[arg(long)]
    no_lowercase: bool,
    #[arg(long, default_value_t = 2)]
    min_token_length: usize,
    /// File of stopwords, one per line
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    index: PathBuf,
    /// Query text, or `-` to read it from stdin
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    query: Option<String>,
    /// File of queries, one per line; prints one JSON prediction per line
    #[arg(long)]
    batch: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "weighted")]
    scheme: SchemeArg,
    #[command(flatten)]
    vote: VoteArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    index: PathBuf,
    /// Labeled test corpus
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    #[arg(long, value_enum, default_value = "weighted")]
    scheme: EvalSchemeArg,
    #[command(flatten)]
    vote: VoteArgs,
    /// Print JSON instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Index(args) => cmd_index(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Stats(args) => cmd_stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn read_corpus(path: &Path, format: FormatArg) -> Result<Corpus> {
    load_corpus(open(path)?, format.into()).with_context(|| format!("cannot load {}", path.display()))
}

fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write_jsonl(corpus, &mut out)?;
    out.flush()?;
    Ok(())
}

fn load_bundle(path: &Path) -> Result<IndexBundle> {
    IndexBundle::read_from(open(path)?).with_context(|| format!("cannot load index {}", path.display()))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let spec: MixingSpec = serde_json::from_reader(open(&args.spec)?)
        .with_context(|| format!("cannot parse mixing spec {}", args.spec.display()))?;
    let corpus = generate_corpus(&spec, args.n_documents, args.seed)?;
    match (&args.test_out, args.test_fraction) {
        (Some(test_out), Some(fraction)) => {
            let (train, test) = split_corpus(&corpus, fraction, args.split_seed.unwrap_or(args.seed))?;
            write_corpus(&train, &args.out)?;
            write_corpus(&test, test_out)?;
            println!(
                "{} documents generated: {} train -> {}, {} test -> {}",
                corpus.len(),
                train.len(),
                args.out.display(),
                test.len(),
                test_out.display()
            );
        }
        _ => {
            write_corpus(&corpus, &args.out)?;
            println!("{} documents generated -> {}", corpus.len(), args.out.display());
        }
    }
    Ok(())
}

fn cmd_index(args: IndexArgs) -> Result<()> {
    let corpus = read_corpus(&args.corpus, args.format)?;
    let stopwords = match &args.stopwords {
        Some(path) => open(path)?
            .lines()
            .map(|l| l.map(|s| s.trim().to_string()))
            .filter(|l| l.as_ref().map_or(true, |s| !s.is_empty()))
            .collect::<io::Result<_>>()?,
        None => Default::default(),
    };
    let tokenizer = TokenizerConfig {
        lowercase: !args.no_lowercase,
        min_token_length: args.min_token_length,
        stopwords,
    };
    let index = build_index(&corpus, &tokenizer)
        .with_context(|| format!("cannot index {}", args.corpus.display()))?;
    let terms = index.vocabulary_size();
    let bundle = IndexBundle::new(index)?;
    let file = File::create(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    bundle.write_to(BufWriter::new(file))?;
    println!("{} documents, {} terms -> {}", corpus.len(), terms, args.out.display());
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<()> {
    let search_config = args.vote.search_config()?;
    let bundle = load_bundle(&args.index)?;
    let scheme = Scheme::from(args.scheme);
    let run = |query: &str| {
        classify(
            &bundle.index,
            &bundle.stats,
            query,
            scheme,
            args.vote.k,
            &search_config,
            args.vote.seed,
        )
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    if let Some(batch) = &args.batch {
        for line in open(batch)?.lines() {
            let prediction = run(&line?)?;
            serde_json::to_writer(&mut out, &prediction)?;
            writeln!(out)?;
        }
    } else {
        let query = match args.query.as_deref() {
            Some("-") => {
                let mut text = String::new();
                io::stdin().read_to_string(&mut text)?;
                text
            }
            Some(q) => q.to_string(),
            None => unreachable!("clap requires a query or --batch"),
        };
        serde_json::to_writer(&mut out, &run(&query)?)?;
        writeln!(out)?;
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let search_config = args.vote.search_config()?;
    let bundle = load_bundle(&args.index)?;
    let test = read_corpus(&args.test, args.format)?;
    if test.is_empty() {
        bail!("test corpus {} is empty", args.test.display());
    }
    let (k, seed) = (args.vote.k, args.vote.seed);
    let reports = match args.scheme {
        EvalSchemeArg::All => compare_schemes(&bundle.index, &bundle.stats, &test, k, &search_config, seed)?,
        single => {
            let scheme = match single {
                EvalSchemeArg::Naive => Scheme::NaiveMajority,
                EvalSchemeArg::Weighted => Scheme::WeightedQuorum,
                _ => Scheme::BoostedQuorum,
            };
            vec![evaluate(&bundle.index, &bundle.stats, &test, scheme, k, &search_config, seed)?]
        }
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.json {
        if let [single] = reports.as_slice() {
            serde_json::to_writer_pretty(&mut out, single)?;
        } else {
            serde_json::to_writer_pretty(&mut out, &reports)?;
        }
        writeln!(out)?;
    } else {
        for (i, report) in reports.iter().enumerate() {
            if i > 0 {
                writeln!(out)?;
            }
            write!(out, "{report}")?;
        }
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let corpus = read_corpus(&args.corpus, args.format)?;
    let stats = label_stats(&corpus).with_context(|| format!("no statistics for {}", args.corpus.display()))?;
    let mut rows: Vec<_> = stats.frequencies().iter().collect();
    rows.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "documents: {}", stats.n_documents())?;
    for (label, &f) in rows {
        let p = stats.prior(label).unwrap_or_default();
        writeln!(out, "{label}:{f}:{p:.3}")?;
    }
    Ok(())
}
