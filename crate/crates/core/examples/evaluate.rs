//! Scores a trained model against a word-similarity benchmark with Spearman's rho.

use defrel::evaluate::{evaluate_benchmark, spearman};
use defrel::ingest;
use defrel::trainer::{fit, TrainConfig};

fn main() -> defrel::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let corpus = ingest::load_triples_tsv(format!("{dir}/toy_tree.tsv").as_ref())?;
    let pairs = ingest::load_benchmark(format!("{dir}/toy_benchmark.tsv").as_ref())?;

    let untrained = fit(&corpus, &TrainConfig { epochs: 0, dim: 10, ..TrainConfig::default() })?;
    let trained = fit(&corpus, &TrainConfig { epochs: 100, dim: 10, ..TrainConfig::default() })?;
    for (label, m) in [("untrained", &untrained), ("trained", &trained)] {
        let r = evaluate_benchmark(m, "toy", &pairs)?;
        println!(
            "{label:>9}: rho {:+.4} over {} pairs ({} skipped as out of vocabulary)",
            r.spearman, r.pairs_scored, r.pairs_skipped_oov
        );
    }

    // Ties share their average rank.
    println!("rho([1,2,2,3], [1,2,3,4]) = {:.4}", spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0])?);
    Ok(())
}
