//! Saves a model in both layouts and loads it back bit for bit.

use defrel::ingest;
use defrel::persist::{load_model, save_model, Format};
use defrel::trainer::{fit, TrainConfig};

fn main() -> defrel::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/toy_tree.tsv");
    let corpus = ingest::load_triples_tsv(path.as_ref())?;
    let model = fit(&corpus, &TrainConfig { epochs: 20, dim: 8, ..TrainConfig::default() })?;

    let dir = std::env::temp_dir().join(format!("defrel-persist-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| defrel::Error::io(&dir, e))?;
    for (format, name) in [(Format::Binary, "model.bin"), (Format::Text, "model.txt")] {
        let file = dir.join(name);
        save_model(&model, &file, format)?;
        let size = std::fs::metadata(&file).map_err(|e| defrel::Error::io(&file, e))?.len();
        let back = load_model(&file)?;
        println!("{name}: {size} bytes, identical after reload: {}", back == model);
    }
    std::fs::remove_dir_all(&dir).map_err(|e| defrel::Error::io(&dir, e))?;
    Ok(())
}
