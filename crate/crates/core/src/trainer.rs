//! Link-prediction training with object-corrupting negative sampling and the
//! Bernoulli negative log-likelihood.
//!
//! Euclidean parameters (all of them in the Euclidean model; biases and the
//! relation diagonals in the hyperbolic one) take plain SGD steps. Ball
//! parameters (entity vectors and role translations in the hyperbolic model)
//! take a retraction step: the gradient is rescaled by the inverse metric and
//! applied with Möbius addition, then projected back into the ball.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, Curvature};
use crate::ingest::Corpus;
use crate::model::{init_model, Geometry, ModelState, Role, Triple, Vocabulary};

const P_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Step size for entity vectors and role translations.
    pub learning_rate: f64,
    /// Step size for biases and relation diagonals; `None` uses `learning_rate`.
    pub euclidean_learning_rate: Option<f64>,
    pub negatives: usize,
    pub seed: u64,
    pub geometry: Geometry,
    pub dim: usize,
    pub curvature: Curvature,
    /// Serial gradient evaluation on one thread.
    pub deterministic: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 128,
            learning_rate: 50.0,
            euclidean_learning_rate: None,
            negatives: 50,
            seed: 0,
            geometry: Geometry::Hyperbolic,
            dim: 300,
            curvature: Curvature::default(),
            deterministic: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.negatives == 0 {
            return bad("negatives must be positive");
        }
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning_rate must be finite and non-negative");
        }
        if let Some(lr) = self.euclidean_learning_rate {
            if !(lr.is_finite() && lr >= 0.0) {
                return bad("euclidean_learning_rate must be finite and non-negative");
            }
        }
        Ok(())
    }

    fn euclidean_lr(&self) -> f64 {
        self.euclidean_learning_rate.unwrap_or(self.learning_rate)
    }
}

/// Which slot of a positive triple was replaced to make a negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptedSlot {
    Object,
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub positives: Vec<Triple>,
    pub negatives: Vec<(Triple, CorruptedSlot)>,
}

impl Batch {
    fn examples(&self) -> Vec<(Triple, bool)> {
        self.positives
            .iter()
            .map(|t| (*t, true))
            .chain(self.negatives.iter().map(|(t, _)| (*t, false)))
            .collect()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean Bernoulli negative log-likelihood of logistic predictions.
pub fn bernoulli_nll(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Invalid("bernoulli_nll of an empty batch".into()));
    }
    if scores.len() != labels.len() {
        return Err(Error::Dimension { expected: scores.len(), got: labels.len() });
    }
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            let p = sigmoid(s).clamp(P_CLAMP, 1.0 - P_CLAMP);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / scores.len() as f64)
}

/// `k` corruptions of `positive` with the object replaced by a uniformly
/// drawn different entity.
pub fn sample_negatives<R: Rng>(positive: Triple, vocab_size: usize, k: usize, rng: &mut R) -> Result<Vec<Triple>> {
    if vocab_size < 2 {
        return Err(Error::Invalid(format!("negative sampling needs at least 2 entities, have {vocab_size}")));
    }
    Ok((0..k)
        .map(|_| {
            let mut o = rng.gen_range(0..vocab_size - 1);
            if o >= positive.o {
                o += 1;
            }
            Triple { o, ..positive }
        })
        .collect())
}

/// Accumulated loss gradients for one batch.
#[derive(Debug, Clone, Default)]
pub struct Gradients {
    pub entities: BTreeMap<usize, Vec<f64>>,
    pub subject_bias: BTreeMap<usize, f64>,
    pub object_bias: BTreeMap<usize, f64>,
    pub translation: BTreeMap<Role, Vec<f64>>,
    pub diag: BTreeMap<Role, Vec<f64>>,
}

fn axpy(acc: &mut Vec<f64>, k: f64, x: &[f64]) {
    if acc.is_empty() {
        acc.resize(x.len(), 0.0);
    }
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += k * b);
}

/// Mean loss over `examples` and its gradient with respect to every parameter.
/// Gradients are ambient (Euclidean) for every parameter class.
pub fn loss_and_gradients(state: &ModelState, examples: &[(Triple, bool)], parallel: bool) -> Result<(f64, Gradients)> {
    let grads: Vec<_> = if parallel {
        examples.par_iter().map(|(t, _)| state.score_grad(*t)).collect::<Result<_>>()?
    } else {
        examples.iter().map(|(t, _)| state.score_grad(*t)).collect::<Result<_>>()?
    };
    let scores: Vec<f64> = grads.iter().map(|g| g.score).collect();
    let labels: Vec<bool> = examples.iter().map(|(_, y)| *y).collect();
    let loss = bernoulli_nll(&scores, &labels)?;

    let n = examples.len() as f64;
    let mut out = Gradients::default();
    for ((t, y), g) in examples.iter().zip(&grads) {
        let dl = (sigmoid(g.score) - if *y { 1.0 } else { 0.0 }) / n;
        axpy(out.entities.entry(t.s).or_default(), dl, &g.subject);
        axpy(out.entities.entry(t.o).or_default(), dl, &g.object);
        *out.subject_bias.entry(t.s).or_default() += dl;
        *out.object_bias.entry(t.o).or_default() += dl;
        axpy(out.translation.entry(t.r).or_default(), dl, &g.translation);
        axpy(out.diag.entry(t.r).or_default(), dl, &g.diag);
    }
    Ok((loss, out))
}

fn ball_step(x: &mut [f64], g: &[f64], lr: f64, c: Curvature) {
    let rg = geometry::riemannian_rescale(g, x, c);
    let step: Vec<f64> = rg.iter().map(|v| -lr * v).collect();
    let step = geometry::project(&step, c);
    let mut next = geometry::mobius_add_unchecked(x, &step, c);
    geometry::project_in_place(&mut next, c);
    x.copy_from_slice(&next);
}

fn flat_step(x: &mut [f64], g: &[f64], lr: f64) {
    x.iter_mut().zip(g).for_each(|(p, d)| *p -= lr * d);
}

/// Applies one SGD step to `state`.
pub fn apply_gradients(state: &mut ModelState, grads: &Gradients, config: &TrainConfig) {
    let lr = config.learning_rate;
    let c = state.curvature;
    let hyperbolic = state.geometry == Geometry::Hyperbolic;
    // The separate rate only applies to the flat parameters of the hyperbolic model.
    let lr_e = if hyperbolic { config.euclidean_lr() } else { lr };
    for (&id, g) in &grads.entities {
        let row = state.entity_mut(id);
        if hyperbolic {
            ball_step(row, g, lr, c);
        } else {
            flat_step(row, g, lr);
        }
    }
    for (&id, g) in &grads.subject_bias {
        state.subject_bias[id] -= lr_e * g;
    }
    for (&id, g) in &grads.object_bias {
        state.object_bias[id] -= lr_e * g;
    }
    for (role, g) in &grads.translation {
        let r = &mut state.relations[role.id()].translation;
        if hyperbolic {
            ball_step(r, g, lr, c);
        } else {
            flat_step(r, g, lr);
        }
    }
    for (role, g) in &grads.diag {
        flat_step(&mut state.relations[role.id()].diag, g, lr_e);
    }
}

/// Builds the batches of one epoch: a fresh permutation of the corpus and
/// fresh negatives for every positive.
pub fn make_batches<R: Rng>(corpus: &Corpus, config: &TrainConfig, rng: &mut R) -> Result<Vec<Batch>> {
    let mut order = corpus.triples.clone();
    order.shuffle(rng);
    order
        .chunks(config.batch_size)
        .map(|chunk| {
            let mut negatives = Vec::with_capacity(chunk.len() * config.negatives);
            for t in chunk {
                for n in sample_negatives(*t, corpus.vocab.len(), config.negatives, rng)? {
                    negatives.push((n, CorruptedSlot::Object));
                }
            }
            Ok(Batch { positives: chunk.to_vec(), negatives })
        })
        .collect()
}

/// One shuffled pass over the corpus. Returns the mean batch loss.
pub fn train_epoch<R: Rng>(
    state: &mut ModelState,
    corpus: &Corpus,
    config: &TrainConfig,
    rng: &mut R,
    epoch: usize,
) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let batches = make_batches(corpus, config, rng)?;
    let mut total = 0.0;
    for (i, batch) in batches.iter().enumerate() {
        let (loss, grads) = loss_and_gradients(state, &batch.examples(), !config.deterministic)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: i });
        }
        apply_gradients(state, &grads, config);
        total += loss;
    }
    Ok(total / batches.len() as f64)
}

/// Per-epoch observer: `(epoch, mean_loss, state)`, 1-based epochs.
pub type EpochHook<'a> = dyn FnMut(usize, f64, &ModelState) -> Result<()> + 'a;

/// Trains a fresh model for `config.epochs` epochs.
pub fn fit(corpus: &Corpus, config: &TrainConfig) -> Result<ModelState> {
    fit_with(corpus, config, &mut |_, _, _| Ok(()))
}

pub fn fit_with(corpus: &Corpus, config: &TrainConfig, hook: &mut EpochHook<'_>) -> Result<ModelState> {
    config.validate()?;
    let mut state = init_model(corpus.vocab.clone(), config.dim, config.geometry, config.curvature, config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    for epoch in 1..=config.epochs {
        let loss = train_epoch(&mut state, corpus, config, &mut rng, epoch)?;
        hook(epoch, loss, &state)?;
    }
    Ok(state)
}

/// Drops every triple whose subject or object is in `heldout` and rebuilds the
/// vocabulary from what remains.
pub fn prune_corpus(corpus: &Corpus, heldout: &HashSet<String>) -> Corpus {
    let kept: Vec<_> = corpus
        .word_triples()
        .filter(|(s, _, o)| !heldout.contains(*s) && !heldout.contains(*o))
        .collect();
    if kept.len() == corpus.len() {
        return corpus.clone();
    }
    Corpus::from_word_triples(kept).unwrap_or(Corpus { vocab: Vocabulary::default(), triples: Vec::new() })
}
