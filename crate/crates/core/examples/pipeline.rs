//! End-to-end run driven by a key-value config: extraction, training with
//! checkpoints and a dev benchmark, then evaluation.

use defrel::config::RunConfig;
use defrel::pipeline;

fn main() -> defrel::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let out = std::env::temp_dir().join(format!("defrel-run-{}", std::process::id()));
    let config = RunConfig::from_text(&format!(
        "definitions = {dir}/toy_definitions.tsv
output_dir = {}
epochs = 40
dim = 10
checkpoint_every = 20
dev_benchmark = {dir}/toy_benchmark.tsv
eval_benchmarks = {dir}/toy_benchmark.tsv
deterministic = true
",
        out.display()
    ))?;
    let summary = pipeline::run(&config)?;
    println!("model written to {}", summary.model_path.display());
    println!("final loss {:.5}", summary.losses.last().copied().unwrap_or(f64::NAN));
    for r in &summary.reports {
        println!("{}", r.tsv_line());
    }
    let mut files: Vec<_> = std::fs::read_dir(&out)
        .map_err(|e| defrel::Error::io(&out, e))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    files.sort();
    println!("artifacts: {}", files.join(" "));
    Ok(())
}
