//! Corpus construction: annotated definitions, triple files, benchmark and
//! stop-word files.
//!
//! File formats (UTF-8, one record per line, blank lines ignored):
//!
//! ```text
//! definitions:  definiendum<TAB>token|ROLE token|ROLE ...   (ROLE may be NONE)
//! triples:      subject<TAB>role<TAB>object
//! benchmark:    word1<TAB>word2<TAB>score
//! stop-words:   word
//! ```

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Role, Triple, Vocabulary};
use crate::persist::write_atomic;

/// Stop-word list used when none is supplied.
pub const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

const NONE_LABEL: &str = "NONE";

/// A definition whose tokens carry raw role labels (`None` for `NONE`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDefinition {
    pub definiendum: String,
    pub tokens: Vec<(String, Option<String>)>,
}

/// Vocabulary plus the triples that index into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub vocab: Vocabulary,
    pub triples: Vec<Triple>,
}

/// A definition dropped during extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub definiendum: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub corpus: Corpus,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPair {
    pub w1: String,
    pub w2: String,
    pub gold: f64,
}

impl Corpus {
    /// Builds a corpus from word-level triples. Ids follow sorted word order
    /// and duplicates collapse; the vocabulary holds exactly the words that
    /// occur in some triple.
    pub fn from_word_triples<'a, I>(triples: I) -> Result<Corpus>
    where
        I: IntoIterator<Item = (&'a str, Role, &'a str)>,
    {
        let unique: BTreeSet<(&str, Role, &str)> = triples.into_iter().collect();
        if unique.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let vocab = Vocabulary::from_words(unique.iter().flat_map(|(s, _, o)| [*s, *o]));
        let mut triples: Vec<Triple> = unique
            .iter()
            .map(|(s, r, o)| Triple::new(vocab.id(s).unwrap(), *r, vocab.id(o).unwrap()))
            .collect();
        triples.sort();
        Ok(Corpus { vocab, triples })
    }

    pub fn word_triples(&self) -> impl Iterator<Item = (&str, Role, &str)> + '_ {
        self.triples
            .iter()
            .map(|t| (self.vocab.word(t.s).unwrap(), t.r, self.vocab.word(t.o).unwrap()))
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    Ok(parse_stopwords(&read(path)?))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

fn is_content(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// Parses an annotated-definition file. Role labels are kept raw so that
/// extraction can reject individual definitions with a diagnostic.
pub fn parse_definitions(path: &Path, text: &str) -> Result<Vec<AnnotatedDefinition>> {
    let mut defs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (head, body) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, lineno, "expected definiendum<TAB>tokens"))?;
        let definiendum = head.trim();
        if definiendum.is_empty() {
            return Err(parse_err(path, lineno, "empty definiendum"));
        }
        let mut tokens = Vec::new();
        for tok in body.split_whitespace() {
            let (surface, label) = tok
                .rsplit_once('|')
                .ok_or_else(|| parse_err(path, lineno, format!("token {tok:?} has no |ROLE suffix")))?;
            let label = (label != NONE_LABEL).then(|| label.to_string());
            tokens.push((surface.to_string(), label));
        }
        if tokens.is_empty() {
            return Err(parse_err(path, lineno, "definition has no tokens"));
        }
        defs.push(AnnotatedDefinition { definiendum: definiendum.to_string(), tokens });
    }
    Ok(defs)
}

pub fn load_definitions(path: &Path) -> Result<Vec<AnnotatedDefinition>> {
    parse_definitions(path, &read(path)?)
}

/// Turns annotated definitions into `(definiendum, role, token)` triples.
///
/// Words are lowercased. Tokens labelled `NONE`, stop-word objects,
/// punctuation-only tokens and self-loops are dropped. A definition carrying an
/// unknown role label is rejected as a whole and reported in
/// [`Extraction::rejected`].
pub fn extract_triples(defs: &[AnnotatedDefinition], stopwords: &HashSet<String>) -> Result<Extraction> {
    let mut words: Vec<(String, Role, String)> = Vec::new();
    let mut rejected = Vec::new();
    'defs: for def in defs {
        let subject = def.definiendum.trim().to_lowercase();
        let mut local = Vec::new();
        for (surface, label) in &def.tokens {
            let Some(label) = label else { continue };
            let role = match label.parse::<Role>() {
                Ok(r) => r,
                Err(_) => {
                    rejected.push(Rejection {
                        definiendum: def.definiendum.clone(),
                        reason: format!("unknown role {label:?}"),
                    });
                    continue 'defs;
                }
            };
            let object = surface.trim().to_lowercase();
            if !is_content(&object) || stopwords.contains(&object) || object == subject {
                continue;
            }
            local.push((subject.clone(), role, object));
        }
        words.extend(local);
    }
    let corpus = Corpus::from_word_triples(words.iter().map(|(s, r, o)| (s.as_str(), *r, o.as_str())))?;
    Ok(Extraction { corpus, rejected })
}

pub fn parse_triples(path: &Path, text: &str) -> Result<Corpus> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(path, lineno, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let (s, o) = (fields[0].trim(), fields[2].trim());
        if s.is_empty() || o.is_empty() {
            return Err(parse_err(path, lineno, "empty word"));
        }
        let role = fields[1].parse::<Role>().map_err(|e| parse_err(path, lineno, e.to_string()))?;
        rows.push((s, role, o));
    }
    Corpus::from_word_triples(rows)
}

pub fn load_triples_tsv(path: &Path) -> Result<Corpus> {
    parse_triples(path, &read(path)?)
}

pub fn triples_to_tsv(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (s, r, o) in corpus.word_triples() {
        out.push_str(&format!("{s}\t{r}\t{o}\n"));
    }
    out
}

pub fn write_triples_tsv(corpus: &Corpus, path: &Path) -> Result<()> {
    write_atomic(path, |w| w.write_all(triples_to_tsv(corpus).as_bytes()))
}

pub fn parse_benchmark(path: &Path, text: &str) -> Result<Vec<BenchmarkPair>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(path, lineno, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let gold: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("invalid score {:?}", fields[2])))?;
        if !gold.is_finite() {
            return Err(parse_err(path, lineno, "score is not finite"));
        }
        pairs.push(BenchmarkPair { w1: fields[0].trim().to_string(), w2: fields[1].trim().to_string(), gold });
    }
    if pairs.is_empty() {
        return Err(parse_err(path, 0, "empty benchmark"));
    }
    Ok(pairs)
}

pub fn load_benchmark(path: &Path) -> Result<Vec<BenchmarkPair>> {
    parse_benchmark(path, &read(path)?)
}

pub fn benchmark_to_tsv(pairs: &[BenchmarkPair]) -> String {
    pairs.iter().map(|p| format!("{}\t{}\t{}\n", p.w1, p.w2, p.gold)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn def(head: &str, toks: &[(&str, &str)]) -> AnnotatedDefinition {
        AnnotatedDefinition {
            definiendum: head.into(),
            tokens: toks
                .iter()
                .map(|(w, r)| (w.to_string(), (*r != "NONE").then(|| r.to_string())))
                .collect(),
        }
    }

    #[test]
    fn line_example() {
        let d = def("line", &[("figure", "supertype"), ("curvature", "differentia_quality"), ("no", "NONE")]);
        let ex = extract_triples(&[d], &HashSet::new()).unwrap();
        let got: Vec<_> = ex.corpus.word_triples().collect();
        assert_eq!(
            got,
            vec![("line", Role::Supertype, "figure"), ("line", Role::DifferentiaQuality, "curvature")]
        );
        assert!(ex.rejected.is_empty());
    }

    #[test]
    fn stopwords_none_roles_and_self_loops() {
        let stop = default_stopwords();
        assert!(stop.contains("the"));
        let defs = [
            def("cat", &[("the", "supertype"), ("Feline", "supertype"), ("cat", "purpose"), (",", "purpose")]),
            def("idle", &[("not", "NONE"), ("working", "NONE")]),
        ];
        let ex = extract_triples(&defs, &stop).unwrap();
        let got: Vec<_> = ex.corpus.word_triples().collect();
        assert_eq!(got, vec![("cat", Role::Supertype, "feline")]);
    }

    #[test]
    fn unknown_role_rejects_definition() {
        let defs = [def("dog", &[("animal", "hypernym")]), def("cat", &[("animal", "supertype")])];
        let ex = extract_triples(&defs, &HashSet::new()).unwrap();
        assert_eq!(ex.corpus.len(), 1);
        assert_eq!(ex.rejected.len(), 1);
        assert_eq!(ex.rejected[0].definiendum, "dog");
    }

    #[test]
    fn empty_output_is_an_error() {
        let defs = [def("idle", &[("not", "NONE")])];
        assert!(matches!(extract_triples(&defs, &HashSet::new()), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn senses_share_one_entity() {
        let defs = [def("bank", &[("institution", "supertype")]), def("bank", &[("slope", "supertype")])];
        let ex = extract_triples(&defs, &HashSet::new()).unwrap();
        assert_eq!(ex.corpus.vocab.len(), 3);
        assert_eq!(ex.corpus.len(), 2);
    }

    #[test]
    fn definition_file_parsing() {
        let p = Path::new("defs.tsv");
        let defs = parse_definitions(p, "line\tfigure|supertype no|NONE\n\n").unwrap();
        assert_eq!(defs.len(), 1);
        assert_eq!(defs[0].tokens[1], ("no".to_string(), None));
        let err = parse_definitions(p, "ok\ta|supertype\nbad\tnobar\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn triple_file_parsing() {
        let p = Path::new("t.tsv");
        let c = parse_triples(p, "line\tsupertype\tfigure\n").unwrap();
        assert_eq!(c.word_triples().next(), Some(("line", Role::Supertype, "figure")));
        assert!(matches!(parse_triples(p, ""), Err(Error::EmptyCorpus)));
        assert_eq!(Error::EmptyCorpus.to_string(), "empty corpus");
        let err = parse_triples(p, "a\tsupertype\tb\na\tkind_of\tb\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_triples(p, "a\tsupertype\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn benchmark_parsing() {
        let p = Path::new("b.tsv");
        let pairs = parse_benchmark(p, "tiger\tcat\t7.35\n").unwrap();
        assert_eq!(pairs, vec![BenchmarkPair { w1: "tiger".into(), w2: "cat".into(), gold: 7.35 }]);
        assert!(matches!(parse_benchmark(p, "a\tb\tx\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_benchmark(p, "a\tb\t1\na\tb\tnan\n"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(parse_benchmark(p, &benchmark_to_tsv(&pairs)).unwrap(), pairs);
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-z]{1,6}(_[a-z]{1,4})?"
    }

    proptest! {
        #[test]
        fn triple_tsv_is_idempotent(rows in prop::collection::vec((word(), 0usize..11, word()), 1..40)) {
            let rows: Vec<(String, Role, String)> =
                rows.into_iter().map(|(s, r, o)| (s, Role::from_id(r).unwrap(), o)).collect();
            let c = Corpus::from_word_triples(rows.iter().map(|(s, r, o)| (s.as_str(), *r, o.as_str()))).unwrap();
            let again = parse_triples(Path::new("x"), &triples_to_tsv(&c)).unwrap();
            prop_assert_eq!(&again, &c);
            let twice = parse_triples(Path::new("x"), &triples_to_tsv(&again)).unwrap();
            prop_assert_eq!(twice, again);
        }

        #[test]
        fn no_stopword_objects(objs in prop::collection::vec(prop_oneof![Just("the".to_string()), Just("of".to_string()), word()], 1..20)) {
            let stop = default_stopwords();
            let d = AnnotatedDefinition {
                definiendum: "head".into(),
                tokens: objs.iter().map(|o| (o.clone(), Some("supertype".to_string()))).collect(),
            };
            if let Ok(ex) = extract_triples(&[d], &stop) {
                for (_, _, o) in ex.corpus.word_triples() {
                    prop_assert!(!stop.contains(o));
                }
            }
        }
    }
}
