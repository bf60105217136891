//! Trains a small hyperbolic model on the bundled toy taxonomy and reports
//! the loss curve and link-prediction rank.

use defrel::ingest;
use defrel::model::init_model;
use defrel::trainer::{fit_with, TrainConfig};
use defrel::{Corpus, Geometry, ModelState};

fn mean_rank(m: &ModelState, corpus: &Corpus) -> defrel::Result<f64> {
    let mut total = 0usize;
    for t in &corpus.triples {
        let s = m.score(t.s, t.r, t.o)?;
        let mut rank = 1;
        for o in 0..m.num_entities() {
            if m.score(t.s, t.r, o)? > s {
                rank += 1;
            }
        }
        total += rank;
    }
    Ok(total as f64 / corpus.len() as f64)
}

fn main() -> defrel::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/toy_tree.tsv");
    let corpus = ingest::load_triples_tsv(path.as_ref())?;
    let geometry = match std::env::args().nth(1).as_deref() {
        Some("euclidean") => Geometry::Euclidean,
        _ => Geometry::Hyperbolic,
    };
    let config = TrainConfig { epochs: 100, dim: 10, seed: 7, geometry, ..TrainConfig::default() };

    let init = init_model(corpus.vocab.clone(), config.dim, geometry, config.curvature, config.seed)?;
    println!("{geometry} model, {} triples, {} words", corpus.len(), corpus.vocab.len());
    println!("mean rank at init: {:.2}", mean_rank(&init, &corpus)?);

    let model = fit_with(&corpus, &config, &mut |epoch, loss, _| {
        if epoch % 10 == 0 {
            println!("epoch {epoch:>3}  loss {loss:.5}");
        }
        Ok(())
    })?;
    println!("mean rank after training: {:.2}", mean_rank(&model, &corpus)?);
    Ok(())
}
