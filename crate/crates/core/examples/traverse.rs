//! Walks the geodesic between two words and lists what lies along the way.

use defrel::ingest;
use defrel::query::traverse;
use defrel::trainer::{fit, TrainConfig};

fn main() -> defrel::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/toy_tree.tsv");
    let corpus = ingest::load_triples_tsv(path.as_ref())?;
    let model = fit(&corpus, &TrainConfig { epochs: 150, dim: 10, seed: 7, ..TrainConfig::default() })?;

    let mut args = std::env::args().skip(1);
    let from = args.next().unwrap_or_else(|| "dog".into());
    let to = args.next().unwrap_or_else(|| "violin".into());
    for (t, list) in traverse(&model, &from, &to, 7, 3)? {
        println!("t={t:.2}  {}", list.words().join(", "));
    }
    Ok(())
}
