//! End-to-end runs: corpus -> training -> model file -> evaluation reports.
//!
//! Files written to the output directory:
//!
//! | file               | contents                                           |
//! |--------------------|----------------------------------------------------|
//! | `config.resolved`  | the run configuration with every default filled in |
//! | `triples.tsv`      | extracted triples (only when starting from definitions) |
//! | `metrics.tsv`      | `epoch<TAB>mean_loss<TAB>dev_spearman`             |
//! | `model.bin` / `model.txt` | final parameters                            |
//! | `checkpoint-NNNN.*`| periodic parameter snapshots                       |
//! | `eval.tsv`, `eval.json` | one report per evaluation benchmark           |

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evaluate::{evaluate_benchmark, EvalReport};
use crate::ingest::{self, BenchmarkPair, Corpus};
use crate::model::ModelState;
use crate::persist::{save_model, write_atomic, Format};
use crate::trainer::fit_with;

#[derive(Debug)]
pub struct RunSummary {
    pub model_path: PathBuf,
    pub losses: Vec<f64>,
    pub reports: Vec<EvalReport>,
    pub state: ModelState,
}

fn model_file(format: Format, stem: &str) -> String {
    match format {
        Format::Binary => format!("{stem}.bin"),
        Format::Text => format!("{stem}.txt"),
    }
}

fn benchmark_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Loads the training corpus named by `config`, extracting triples from
/// annotated definitions when needed.
pub fn load_corpus(config: &RunConfig) -> Result<(Corpus, Vec<ingest::Rejection>)> {
    if let Some(path) = &config.triples {
        return Ok((ingest::load_triples_tsv(path)?, Vec::new()));
    }
    let path = config.definitions.as_ref().ok_or_else(|| Error::Config("no input corpus".into()))?;
    let stop: HashSet<String> = match &config.stopwords {
        Some(p) => ingest::load_stopwords(p)?,
        None => ingest::default_stopwords(),
    };
    let defs = ingest::load_definitions(path)?;
    let ex = ingest::extract_triples(&defs, &stop)?;
    Ok((ex.corpus, ex.rejected))
}

pub fn write_reports(dir: &Path, reports: &[EvalReport]) -> Result<()> {
    let tsv: String = reports.iter().map(|r| r.tsv_line() + "\n").collect();
    write_atomic(&dir.join("eval.tsv"), |w| w.write_all(tsv.as_bytes()))?;
    let json = serde_json::to_string_pretty(reports).expect("reports serialize");
    write_atomic(&dir.join("eval.json"), |w| w.write_all(json.as_bytes()))
}

/// Executes a full run. Errors are tagged with the failing stage.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e).in_stage("config"))?;
    let resolved = config.to_text();
    write_atomic(&out.join("config.resolved"), |w| w.write_all(resolved.as_bytes())).map_err(|e| e.in_stage("config"))?;

    let (corpus, rejected) = load_corpus(config).map_err(|e| e.in_stage("ingest"))?;
    for r in &rejected {
        log_line(&format!("rejected definition {:?}: {}", r.definiendum, r.reason));
    }
    if config.definitions.is_some() {
        ingest::write_triples_tsv(&corpus, &out.join("triples.tsv")).map_err(|e| e.in_stage("ingest"))?;
    }

    let benches: Vec<(String, Vec<BenchmarkPair>)> = config
        .eval_benchmarks
        .iter()
        .map(|p| Ok((benchmark_name(p), ingest::load_benchmark(p)?)))
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("ingest"))?;
    let dev = match &config.dev_benchmark {
        Some(p) => Some(ingest::load_benchmark(p).map_err(|e| e.in_stage("ingest"))?),
        None => None,
    };

    let mut metrics = String::new();
    let mut losses = Vec::new();
    let metrics_path = out.join("metrics.tsv");
    let mut hook = |epoch: usize, loss: f64, state: &ModelState| -> Result<()> {
        losses.push(loss);
        let dev_rho = match &dev {
            Some(pairs) => evaluate_benchmark(state, "dev", pairs).map(|r| format!("{:.6}", r.spearman)).unwrap_or_default(),
            None => String::new(),
        };
        metrics.push_str(&format!("{epoch}\t{loss:.9}\t{dev_rho}\n"));
        write_atomic(&metrics_path, |w| w.write_all(metrics.as_bytes()))?;
        if config.checkpoint_every > 0 && epoch.is_multiple_of(config.checkpoint_every) {
            let name = model_file(config.model_format, &format!("checkpoint-{epoch:04}"));
            save_model(state, &out.join(name), config.model_format)?;
        }
        Ok(())
    };
    let state = fit_with(&corpus, &config.train, &mut hook).map_err(|e| e.in_stage("train"))?;
    if config.train.epochs == 0 {
        write_atomic(&metrics_path, |w| w.write_all(b"")).map_err(|e| e.in_stage("train"))?;
    }

    let model_path = out.join(model_file(config.model_format, "model"));
    save_model(&state, &model_path, config.model_format).map_err(|e| e.in_stage("save"))?;

    let mut reports = Vec::new();
    for (name, pairs) in &benches {
        reports.push(evaluate_benchmark(&state, name, pairs).map_err(|e| e.in_stage("eval"))?);
    }
    if !reports.is_empty() {
        write_reports(out, &reports).map_err(|e| e.in_stage("eval"))?;
    }
    Ok(RunSummary { model_path, losses, reports, state })
}

fn log_line(msg: &str) {
    eprintln!("defrel: {msg}");
}
