//! Word-similarity evaluation and one-shot out-of-vocabulary approximation.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::ingest::{BenchmarkPair, Corpus};
use crate::model::{Geometry, ModelState, Role};
use crate::trainer::{fit, prune_corpus, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub benchmark: String,
    pub spearman: f64,
    pub pairs_total: usize,
    pub pairs_scored: usize,
    pub pairs_skipped_oov: usize,
}

impl EvalReport {
    /// `benchmark<TAB>spearman<TAB>scored<TAB>skipped`
    pub fn tsv_line(&self) -> String {
        format!("{}\t{:.6}\t{}\t{}", self.benchmark, self.spearman, self.pairs_scored, self.pairs_skipped_oov)
    }
}

/// In-vocabulary definiens of an unseen word together with their roles.
#[derive(Debug, Clone, PartialEq)]
pub struct OovSpec {
    pub target: String,
    pub evidence: Vec<(String, Role)>,
}

/// How role translations are combined with pooled words in the hyperbolic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// `exp0(mean(log0 words) + mean(log0 roles))`
    #[default]
    Tangent,
    /// `exp0(mean(log0 words)) ⊕ exp0(mean(log0 roles))`
    MobiusTranslation,
}

/// Similarity of two points: negative Poincaré distance or cosine.
pub fn point_similarity(state: &ModelState, x: &[f64], y: &[f64]) -> f64 {
    match state.geometry {
        Geometry::Hyperbolic => -geometry::distance_unchecked(x, y, state.curvature),
        Geometry::Euclidean => {
            let den = geometry::norm(x) * geometry::norm(y);
            if den == 0.0 {
                0.0
            } else {
                geometry::dot(x, y) / den
            }
        }
    }
}

pub fn similarity(state: &ModelState, w1: &str, w2: &str) -> Result<f64> {
    Ok(point_similarity(state, state.embedding(w1)?, state.embedding(w2)?))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(pred: &[f64], gold: &[f64]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::Dimension { expected: pred.len(), got: gold.len() });
    }
    if pred.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations"));
    }
    if pred.iter().chain(gold).any(|v| !v.is_finite()) {
        return Err(Error::UndefinedCorrelation("non-finite input"));
    }
    let rp = average_ranks(pred);
    let rg = average_ranks(gold);
    let n = rp.len() as f64;
    let mp = rp.iter().sum::<f64>() / n;
    let mg = rg.iter().sum::<f64>() / n;
    let (mut cov, mut vp, mut vg) = (0.0, 0.0, 0.0);
    for (a, b) in rp.iter().zip(&rg) {
        cov += (a - mp) * (b - mg);
        vp += (a - mp) * (a - mp);
        vg += (b - mg) * (b - mg);
    }
    if vp == 0.0 || vg == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input vector"));
    }
    Ok((cov / (vp * vg).sqrt()).clamp(-1.0, 1.0))
}

/// Scores every pair whose words both resolve through `lookup`; the rest are
/// counted as skipped.
pub fn evaluate_with<'a, F>(state: &ModelState, name: &str, pairs: &[BenchmarkPair], lookup: F) -> Result<EvalReport>
where
    F: Fn(&str) -> Option<&'a [f64]>,
{
    if pairs.is_empty() {
        return Err(Error::Invalid(format!("benchmark {name} has no pairs")));
    }
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for p in pairs {
        match (lookup(&p.w1.to_lowercase()), lookup(&p.w2.to_lowercase())) {
            (Some(a), Some(b)) => {
                pred.push(point_similarity(state, a, b));
                gold.push(p.gold);
            }
            _ => continue,
        }
    }
    let scored = pred.len();
    let skipped = pairs.len() - scored;
    if scored < 2 {
        return Err(Error::TooFewPairs { scored, skipped, total: pairs.len() });
    }
    Ok(EvalReport {
        benchmark: name.to_string(),
        spearman: spearman(&pred, &gold)?,
        pairs_total: pairs.len(),
        pairs_scored: scored,
        pairs_skipped_oov: skipped,
    })
}

/// Standard evaluation: pairs with an out-of-vocabulary word are skipped.
pub fn evaluate_benchmark(state: &ModelState, name: &str, pairs: &[BenchmarkPair]) -> Result<EvalReport> {
    evaluate_with(state, name, pairs, |w| state.embedding(w).ok())
}

fn resolve_evidence<'a>(state: &'a ModelState, spec: &OovSpec) -> Result<Vec<(&'a [f64], Role)>> {
    if spec.evidence.is_empty() {
        return Err(Error::Invalid(format!("no evidence to approximate {:?}", spec.target)));
    }
    spec.evidence.iter().map(|(w, r)| Ok((state.embedding(w)?, *r))).collect()
}

fn mean<'a, I: Iterator<Item = &'a [f64]>>(dim: usize, xs: I) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    let mut n = 0usize;
    for x in xs {
        acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
        n += 1;
    }
    acc.iter_mut().for_each(|a| *a /= n as f64);
    acc
}

/// Pools word vectors only (the baseline without role information).
pub fn mean_pool(state: &ModelState, spec: &OovSpec) -> Result<Vec<f64>> {
    let ev = resolve_evidence(state, spec)?;
    Ok(match state.geometry {
        Geometry::Euclidean => mean(state.dim, ev.iter().map(|(w, _)| *w)),
        Geometry::Hyperbolic => {
            let c = state.curvature;
            let logs: Vec<Vec<f64>> = ev.iter().map(|(w, _)| geometry::log0(w, c)).collect();
            geometry::exp0(&mean(state.dim, logs.iter().map(Vec::as_slice)), c)
        }
    })
}

/// Pools word vectors and translates by the pooled role translations.
pub fn approximate_oov(state: &ModelState, spec: &OovSpec, pooling: Pooling) -> Result<Vec<f64>> {
    let ev = resolve_evidence(state, spec)?;
    let roles = || ev.iter().map(|(_, r)| state.relation(*r).translation.as_slice());
    Ok(match state.geometry {
        Geometry::Euclidean => {
            let w = mean(state.dim, ev.iter().map(|(w, _)| *w));
            let r = mean(state.dim, roles());
            w.iter().zip(&r).map(|(a, b)| a + b).collect()
        }
        Geometry::Hyperbolic => {
            let c = state.curvature;
            let wl: Vec<Vec<f64>> = ev.iter().map(|(w, _)| geometry::log0(w, c)).collect();
            let rl: Vec<Vec<f64>> = roles().map(|r| geometry::log0(r, c)).collect();
            let w = mean(state.dim, wl.iter().map(Vec::as_slice));
            let r = mean(state.dim, rl.iter().map(Vec::as_slice));
            match pooling {
                Pooling::Tangent => {
                    let t: Vec<f64> = w.iter().zip(&r).map(|(a, b)| a + b).collect();
                    geometry::exp0(&t, c)
                }
                Pooling::MobiusTranslation => {
                    geometry::mobius_add(&geometry::exp0(&w, c), &geometry::exp0(&r, c), c)?
                }
            }
        }
    })
}

/// Evidence for `target` from every triple in which it is the subject,
/// restricted to objects known to `state`.
pub fn oov_evidence(corpus: &Corpus, target: &str, state: &ModelState) -> OovSpec {
    let evidence = corpus
        .word_triples()
        .filter(|(s, _, o)| *s == target && state.vocab.id(o).is_some())
        .map(|(_, r, o)| (o.to_string(), r))
        .collect();
    OovSpec { target: target.to_string(), evidence }
}

#[derive(Debug, Clone)]
pub struct OovReport {
    pub mean_pooling: EvalReport,
    pub multi_relational: EvalReport,
    /// `multi_relational.spearman - mean_pooling.spearman`
    pub delta: f64,
    pub heldout_total: usize,
    /// Held-out words with no in-vocabulary evidence; pairs using them are skipped.
    pub no_evidence: Vec<String>,
    pub model: ModelState,
}

/// Removes `heldout` (default: every benchmark word) from the corpus, retrains,
/// approximates each held-out word from its definition both ways, and
/// evaluates both approximations on `pairs`.
pub fn oov_experiment(
    corpus: &Corpus,
    name: &str,
    pairs: &[BenchmarkPair],
    heldout: Option<&HashSet<String>>,
    config: &TrainConfig,
    pooling: Pooling,
) -> Result<OovReport> {
    let heldout: HashSet<String> = match heldout {
        Some(h) => h.clone(),
        None => pairs.iter().flat_map(|p| [p.w1.to_lowercase(), p.w2.to_lowercase()]).collect(),
    };
    let pruned = prune_corpus(corpus, &heldout);
    if pruned.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let model = fit(&pruned, config)?;

    let mut words: Vec<&String> = heldout.iter().collect();
    words.sort();
    let mut pooled = HashMap::new();
    let mut multi = HashMap::new();
    let mut no_evidence = Vec::new();
    for w in words {
        let spec = oov_evidence(corpus, w, &model);
        if spec.evidence.is_empty() {
            no_evidence.push(w.clone());
            continue;
        }
        pooled.insert(w.clone(), mean_pool(&model, &spec)?);
        multi.insert(w.clone(), approximate_oov(&model, &spec, pooling)?);
    }
    let mean_pooling = evaluate_with(&model, name, pairs, |w| {
        pooled.get(w).map(Vec::as_slice).or_else(|| model.embedding(w).ok())
    })?;
    let multi_relational = evaluate_with(&model, name, pairs, |w| {
        multi.get(w).map(Vec::as_slice).or_else(|| model.embedding(w).ok())
    })?;
    Ok(OovReport {
        delta: multi_relational.spearman - mean_pooling.spearman,
        mean_pooling,
        multi_relational,
        heldout_total: heldout.len(),
        no_evidence,
        model,
    })
}
