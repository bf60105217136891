//! Turns role-annotated definitions into `(subject, role, object)` triples.

use defrel::ingest::{self, AnnotatedDefinition};

fn main() -> defrel::Result<()> {
    let text = "\
dog\ta|NONE domesticated|differentia_quality carnivorous|differentia_quality mammal|supertype .|NONE
kettle\ta|NONE metal|differentia_quality pot|supertype for|NONE boiling|purpose water|purpose
oddity\ta|NONE thing|mystery_role
";
    let defs: Vec<AnnotatedDefinition> = ingest::parse_definitions("inline.tsv".as_ref(), text)?;
    let ex = ingest::extract_triples(&defs, &ingest::default_stopwords())?;

    for (s, r, o) in ex.corpus.word_triples() {
        println!("{s}\t{}\t{o}", r.name());
    }
    for rej in &ex.rejected {
        println!("rejected {:?}: {}", rej.definiendum, rej.reason);
    }
    println!("{} triples over {} words", ex.corpus.len(), ex.corpus.vocab.len());
    Ok(())
}
