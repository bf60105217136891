//! Nearest neighbours by distance and by relation-adjusted score.

use defrel::ingest;
use defrel::query::{nearest_neighbors, Metric, Query};
use defrel::trainer::{fit, TrainConfig};
use defrel::Role;

fn main() -> defrel::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/toy_tree.tsv");
    let corpus = ingest::load_triples_tsv(path.as_ref())?;
    let model = fit(&corpus, &TrainConfig { epochs: 150, dim: 10, seed: 7, ..TrainConfig::default() })?;
    let word = std::env::args().nth(1).unwrap_or_else(|| "sparrow".into());
    let q = Query::Word(word.clone());

    println!("closest to {word}:");
    print!("{}", nearest_neighbors(&model, &q, 5, Metric::Distance, true)?.to_tsv());
    for role in [Role::Supertype, Role::DifferentiaQuality] {
        println!("{word} --{}--> ?", role.name());
        print!("{}", nearest_neighbors(&model, &q, 3, Metric::RelationAdjusted(role), true)?.to_tsv());
    }
    Ok(())
}
