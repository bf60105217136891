use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use defrel::config::RunConfig;
use defrel::evaluate::{evaluate_benchmark, oov_experiment, Pooling};
use defrel::ingest;
use defrel::persist::{load_model, save_model, Format};
use defrel::pipeline::{self, write_reports};
use defrel::query::{nearest_neighbors, traverse, Metric, Query};
use defrel::{Error, Result, Role};

#[derive(Parser)]
#[command(name = "defrel", version, about = "Multi-relational word embeddings from annotated definitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract triples from role-annotated definitions.
    Extract {
        #[arg(long)]
        definitions: PathBuf,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Train a model (config file plus flag overrides).
    Train(TrainArgs),
    /// Spearman evaluation of a model on word-similarity benchmarks.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "benchmark", required = true)]
        benchmarks: Vec<PathBuf>,
        /// Also write eval.tsv / eval.json into this directory.
        #[arg(long)]
        report_dir: Option<PathBuf>,
    },
    /// One-shot OOV approximation: prune benchmark words, retrain, compare
    /// mean pooling against multi-relational approximation.
    #[command(name = "oov-exp")]
    OovExp {
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        benchmark: PathBuf,
        /// Held-out word list (one per line); defaults to every benchmark word.
        #[arg(long)]
        heldout: Option<PathBuf>,
        #[arg(long, default_value = "tangent")]
        pooling: String,
    },
    /// Nearest neighbours of a word.
    Neighbors {
        #[command(flatten)]
        q: QueryArgs,
    },
    /// Neighbourhoods along the path between two words.
    Traverse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, short, default_value_t = 10)]
        k: usize,
    },
    /// Relation-adjusted neighbours of a word (biases excluded).
    Adjust {
        #[command(flatten)]
        q: QueryArgs,
        #[arg(long, default_value = "supertype")]
        role: String,
    },
    /// Convert a model file between binary and text layouts.
    Export {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value = "text")]
        format: String,
    },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    word: String,
    #[arg(long, short, default_value_t = 10)]
    k: usize,
    #[arg(long)]
    exclude_self: bool,
}

#[derive(Args, Default)]
struct TrainArgs {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    triples: Option<String>,
    #[arg(long)]
    definitions: Option<String>,
    #[arg(long)]
    stopwords: Option<String>,
    #[arg(long = "out")]
    output_dir: Option<String>,
    #[arg(long = "format")]
    model_format: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long = "lr")]
    learning_rate: Option<String>,
    #[arg(long = "euclidean-lr")]
    euclidean_learning_rate: Option<String>,
    #[arg(long)]
    negatives: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    curvature: Option<String>,
    #[arg(long)]
    checkpoint_every: Option<String>,
    #[arg(long = "eval")]
    eval_benchmarks: Vec<String>,
    #[arg(long = "dev")]
    dev_benchmark: Option<String>,
    #[arg(long)]
    deterministic: bool,
}

impl TrainArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("triples", &self.triples),
            ("definitions", &self.definitions),
            ("stopwords", &self.stopwords),
            ("output_dir", &self.output_dir),
            ("model_format", &self.model_format),
            ("epochs", &self.epochs),
            ("batch_size", &self.batch_size),
            ("learning_rate", &self.learning_rate),
            ("euclidean_learning_rate", &self.euclidean_learning_rate),
            ("negatives", &self.negatives),
            ("seed", &self.seed),
            ("geometry", &self.geometry),
            ("dim", &self.dim),
            ("curvature", &self.curvature),
            ("checkpoint_every", &self.checkpoint_every),
            ("dev_benchmark", &self.dev_benchmark),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                c.set(key, v)?;
            }
        }
        if !self.eval_benchmarks.is_empty() {
            c.set("eval_benchmarks", &self.eval_benchmarks.join(","))?;
        }
        if self.deterministic {
            c.train.deterministic = true;
        }
        Ok(c)
    }
}

fn print(s: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(s.as_bytes()).map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Extract { definitions, stopwords, output } => {
            let stop = match stopwords {
                Some(p) => ingest::load_stopwords(&p)?,
                None => ingest::default_stopwords(),
            };
            let ex = ingest::extract_triples(&ingest::load_definitions(&definitions)?, &stop)?;
            for r in &ex.rejected {
                eprintln!("defrel: rejected definition {:?}: {}", r.definiendum, r.reason);
            }
            ingest::write_triples_tsv(&ex.corpus, &output)?;
            eprintln!("defrel: {} triples over {} words", ex.corpus.len(), ex.corpus.vocab.len());
        }
        Command::Train(args) => {
            let config = args.resolve()?;
            let summary = pipeline::run(&config)?;
            for r in &summary.reports {
                print(&format!("{}\n", r.tsv_line()))?;
            }
            eprintln!("defrel: wrote {}", summary.model_path.display());
        }
        Command::Eval { model, benchmarks, report_dir } => {
            let state = load_model(&model)?;
            let mut reports = Vec::new();
            for path in &benchmarks {
                let pairs = ingest::load_benchmark(path)?;
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let r = evaluate_benchmark(&state, &name, &pairs)?;
                print(&format!("{}\n", r.tsv_line()))?;
                reports.push(r);
            }
            if let Some(dir) = report_dir {
                std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
                write_reports(&dir, &reports)?;
            }
        }
        Command::OovExp { train, benchmark, heldout, pooling } => {
            let config = train.resolve()?;
            config.validate()?;
            let pooling = match pooling.as_str() {
                "tangent" => Pooling::Tangent,
                "mobius" | "mobius_translation" => Pooling::MobiusTranslation,
                other => return Err(Error::Invalid(format!("unknown pooling {other:?}"))),
            };
            let (corpus, _) = pipeline::load_corpus(&config)?;
            let pairs = ingest::load_benchmark(&benchmark)?;
            let heldout: Option<HashSet<String>> = match heldout {
                Some(p) => Some(ingest::load_stopwords(&p)?),
                None => None,
            };
            let name = benchmark.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let rep = oov_experiment(&corpus, &name, &pairs, heldout.as_ref(), &config.train, pooling)?;
            print(&format!(
                "mean_pooling\t{}\nmulti_relational\t{}\ndelta\t{:+.6}\nheldout\t{}\tno_evidence\t{}\n",
                rep.mean_pooling.tsv_line(),
                rep.multi_relational.tsv_line(),
                rep.delta,
                rep.heldout_total,
                rep.no_evidence.len()
            ))?;
        }
        Command::Neighbors { q } => {
            let state = load_model(&q.model)?;
            let list = nearest_neighbors(&state, &Query::Word(q.word), q.k, Metric::Distance, q.exclude_self)?;
            print(&list.to_tsv())?;
        }
        Command::Adjust { q, role } => {
            let role: Role = role.parse()?;
            let state = load_model(&q.model)?;
            let list =
                nearest_neighbors(&state, &Query::Word(q.word), q.k, Metric::RelationAdjusted(role), q.exclude_self)?;
            print(&list.to_tsv())?;
        }
        Command::Traverse { model, from, to, points, k } => {
            let state = load_model(&model)?;
            for (t, list) in traverse(&state, &from, &to, points, k)? {
                print(&format!("# t={t:.4}\n{}", list.to_tsv()))?;
            }
        }
        Command::Export { model, output, format } => {
            let format: Format = format.parse()?;
            save_model(&load_model(&model)?, Path::new(&output), format)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("defrel: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
