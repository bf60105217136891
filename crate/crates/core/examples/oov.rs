//! One-shot embeddings for unseen words: hold words out of training, then
//! place each from its definition alone.

use std::collections::HashSet;

use defrel::evaluate::{approximate_oov, mean_pool, oov_evidence, Pooling};
use defrel::ingest;
use defrel::query::{nearest_neighbors, Metric, Query};
use defrel::trainer::{fit, prune_corpus, TrainConfig};

fn main() -> defrel::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/toy_tree.tsv");
    let corpus = ingest::load_triples_tsv(path.as_ref())?;
    let heldout: HashSet<String> = ["dog", "violin", "tokyo", "trout"].map(String::from).into();
    let pruned = prune_corpus(&corpus, &heldout);
    let model = fit(&pruned, &TrainConfig { epochs: 200, dim: 10, seed: 7, ..TrainConfig::default() })?;

    let mut words: Vec<_> = heldout.iter().collect();
    words.sort();
    for w in words {
        let spec = oov_evidence(&corpus, w, &model);
        let evidence: Vec<String> = spec.evidence.iter().map(|(e, r)| format!("{e}:{}", r.name())).collect();
        println!("{w}  <-  {}", evidence.join(" "));
        for (label, point) in [
            ("mean pooling", mean_pool(&model, &spec)?),
            ("multi-relational", approximate_oov(&model, &spec, Pooling::Tangent)?),
            ("mobius translation", approximate_oov(&model, &spec, Pooling::MobiusTranslation)?),
        ] {
            let nn = nearest_neighbors(&model, &Query::Point(point), 4, Metric::Distance, false)?;
            println!("  {label:>18}: {}", nn.words().join(", "));
        }
    }
    Ok(())
}
