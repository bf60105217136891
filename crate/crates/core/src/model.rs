//! Parameters and the translational scoring functions.
//!
//! Euclidean: `-|R ⊙ e_s - (e_o + r)|^2 + b_s + b_o`.
//! Hyperbolic: `-d(R ⊗ h_s, h_o ⊕ r)^2 + b_s + b_o`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Curvature};

/// Bidirectional word <-> entity id map. Ids are dense in `[0, len)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary with ids assigned in sorted order of the unique words.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut words: Vec<String> = words.into_iter().map(Into::into).collect();
        words.sort();
        words.dedup();
        Self::from_ordered(words).expect("deduplicated")
    }

    /// Keeps the given order; fails on duplicates.
    pub fn from_ordered(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(Vocabulary { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn lookup(&self, word: &str) -> Result<usize> {
        self.id(word).ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// The eleven definition semantic roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Supertype,
    DifferentiaQuality,
    DifferentiaEvent,
    EventLocation,
    EventTime,
    OriginLocation,
    QualityModifier,
    Purpose,
    AssociatedFact,
    AccessoryDeterminer,
    AccessoryQuality,
}

impl Role {
    pub const COUNT: usize = 11;

    pub const ALL: [Role; Role::COUNT] = [
        Role::Supertype,
        Role::DifferentiaQuality,
        Role::DifferentiaEvent,
        Role::EventLocation,
        Role::EventTime,
        Role::OriginLocation,
        Role::QualityModifier,
        Role::Purpose,
        Role::AssociatedFact,
        Role::AccessoryDeterminer,
        Role::AccessoryQuality,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Role> {
        Role::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Supertype => "supertype",
            Role::DifferentiaQuality => "differentia_quality",
            Role::DifferentiaEvent => "differentia_event",
            Role::EventLocation => "event_location",
            Role::EventTime => "event_time",
            Role::OriginLocation => "origin_location",
            Role::QualityModifier => "quality_modifier",
            Role::Purpose => "purpose",
            Role::AssociatedFact => "associated_fact",
            Role::AccessoryDeterminer => "accessory_determiner",
            Role::AccessoryQuality => "accessory_quality",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = Error;

    /// Accepts the canonical snake_case names, case-insensitively, with `-` as
    /// an alternative separator.
    fn from_str(s: &str) -> Result<Role> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Role::ALL
            .iter()
            .copied()
            .find(|r| r.name() == norm)
            .ok_or_else(|| Error::UnknownRole(s.to_string()))
    }
}

/// One link-prediction example: `(subject, role, object)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub s: usize,
    pub r: Role,
    pub o: usize,
}

impl Triple {
    pub fn new(s: usize, r: Role, o: usize) -> Self {
        Triple { s, r, o }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::Euclidean => "euclidean",
            Geometry::Hyperbolic => "hyperbolic",
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Geometry> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Geometry::Euclidean),
            "hyperbolic" | "poincare" => Ok(Geometry::Hyperbolic),
            other => Err(Error::Invalid(format!("unknown geometry {other:?}"))),
        }
    }
}

/// Per-role translation `r` and diagonal of the relation matrix `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationParams {
    pub translation: Vec<f64>,
    pub diag: Vec<f64>,
}

impl RelationParams {
    pub fn identity(dim: usize) -> Self {
        RelationParams { translation: vec![0.0; dim], diag: vec![1.0; dim] }
    }
}

/// Full trainable state. Subjects and objects share one entity table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub geometry: Geometry,
    pub curvature: Curvature,
    pub dim: usize,
    pub vocab: Vocabulary,
    /// Row-major `V x dim`.
    pub entities: Vec<f64>,
    pub subject_bias: Vec<f64>,
    pub object_bias: Vec<f64>,
    /// Indexed by [`Role::id`].
    pub relations: Vec<RelationParams>,
}

/// Score of one triple and its gradient with respect to every parameter it
/// touches. Bias gradients are always 1 and are not stored.
#[derive(Debug, Clone)]
pub struct ScoreGrad {
    pub score: f64,
    pub subject: Vec<f64>,
    pub object: Vec<f64>,
    pub translation: Vec<f64>,
    pub diag: Vec<f64>,
}

const INIT_RANGE: f64 = 1e-3;

/// Fresh parameters: entities uniform in `[-1e-3, 1e-3]^dim`, zero biases,
/// zero translations and identity relation matrices.
pub fn init_model(vocab: Vocabulary, dim: usize, geometry: Geometry, c: Curvature, seed: u64) -> Result<ModelState> {
    if dim == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = vocab.len();
    let entities = (0..v * dim).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect();
    Ok(ModelState {
        geometry,
        curvature: c,
        dim,
        vocab,
        entities,
        subject_bias: vec![0.0; v],
        object_bias: vec![0.0; v],
        relations: (0..Role::COUNT).map(|_| RelationParams::identity(dim)).collect(),
    })
}

impl ModelState {
    pub fn num_entities(&self) -> usize {
        self.vocab.len()
    }

    pub fn entity(&self, id: usize) -> &[f64] {
        &self.entities[id * self.dim..(id + 1) * self.dim]
    }

    pub fn entity_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.entities[id * self.dim..(id + 1) * self.dim]
    }

    pub fn relation(&self, role: Role) -> &RelationParams {
        &self.relations[role.id()]
    }

    /// Embedding of a word by name.
    pub fn embedding(&self, word: &str) -> Result<&[f64]> {
        Ok(self.entity(self.vocab.lookup(word)?))
    }

    fn check_ids(&self, s: usize, o: usize) -> Result<()> {
        for id in [s, o] {
            if id >= self.num_entities() {
                return Err(Error::IdOutOfRange { kind: "entity", id, size: self.num_entities() });
            }
        }
        Ok(())
    }

    fn require(&self, g: Geometry) -> Result<()> {
        if self.geometry != g {
            return Err(Error::GeometryMismatch { expected: g.name() });
        }
        Ok(())
    }

    /// Relation-transformed subject: `R ⊙ e` (Euclidean) or `R ⊗ h` (hyperbolic).
    pub fn transform_subject(&self, point: &[f64], role: Role) -> Vec<f64> {
        let rel = self.relation(role);
        match self.geometry {
            Geometry::Euclidean => point.iter().zip(&rel.diag).map(|(x, r)| x * r).collect(),
            Geometry::Hyperbolic => geometry::mobius_matvec_unchecked(&rel.diag, point, self.curvature),
        }
    }

    /// Relation-translated object: `e + r` (Euclidean) or `h ⊕ r` (hyperbolic).
    pub fn translate_object(&self, point: &[f64], role: Role) -> Vec<f64> {
        let rel = self.relation(role);
        match self.geometry {
            Geometry::Euclidean => point.iter().zip(&rel.translation).map(|(x, r)| x + r).collect(),
            Geometry::Hyperbolic => {
                let mut v = geometry::mobius_add_unchecked(point, &rel.translation, self.curvature);
                geometry::project_in_place(&mut v, self.curvature);
                v
            }
        }
    }

    /// Squared distance in the model geometry.
    pub fn distance_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.geometry {
            Geometry::Euclidean => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
            Geometry::Hyperbolic => geometry::distance_unchecked(x, y, self.curvature).powi(2),
        }
    }

    /// Bias-free score of an arbitrary subject point against an object point.
    pub fn adjusted_score_points(&self, subject: &[f64], role: Role, object: &[f64]) -> f64 {
        let u = self.transform_subject(subject, role);
        let v = self.translate_object(object, role);
        -self.distance_sq(&u, &v)
    }

    pub fn score_euclidean(&self, s: usize, r: Role, o: usize) -> Result<f64> {
        self.require(Geometry::Euclidean)?;
        self.score(s, r, o)
    }

    pub fn score_hyperbolic(&self, s: usize, r: Role, o: usize) -> Result<f64> {
        self.require(Geometry::Hyperbolic)?;
        self.score(s, r, o)
    }

    /// Geometry-appropriate score including both biases.
    pub fn score(&self, s: usize, r: Role, o: usize) -> Result<f64> {
        Ok(self.relation_adjusted_score(s, r, o)? + self.subject_bias[s] + self.object_bias[o])
    }

    /// Score with both bias terms omitted.
    pub fn relation_adjusted_score(&self, s: usize, r: Role, o: usize) -> Result<f64> {
        self.check_ids(s, o)?;
        Ok(self.adjusted_score_points(self.entity(s), r, self.entity(o)))
    }

    /// Score and its Euclidean (ambient) gradients.
    pub fn score_grad(&self, t: Triple) -> Result<ScoreGrad> {
        self.check_ids(t.s, t.o)?;
        let bias = self.subject_bias[t.s] + self.object_bias[t.o];
        let es = self.entity(t.s);
        let eo = self.entity(t.o);
        let rel = self.relation(t.r);
        let mut g = match self.geometry {
            Geometry::Euclidean => euclidean_grad(es, eo, rel),
            Geometry::Hyperbolic => hyperbolic_grad(es, eo, rel, self.curvature),
        };
        g.score += bias;
        Ok(g)
    }
}

fn euclidean_grad(es: &[f64], eo: &[f64], rel: &RelationParams) -> ScoreGrad {
    let diff: Vec<f64> = (0..es.len())
        .map(|i| rel.diag[i] * es[i] - eo[i] - rel.translation[i])
        .collect();
    let score = -geometry::norm_sq(&diff);
    ScoreGrad {
        score,
        subject: diff.iter().zip(&rel.diag).map(|(d, r)| -2.0 * r * d).collect(),
        object: diff.iter().map(|d| 2.0 * d).collect(),
        translation: diff.iter().map(|d| 2.0 * d).collect(),
        diag: diff.iter().zip(es).map(|(d, e)| -2.0 * d * e).collect(),
    }
}

fn hyperbolic_grad(hs: &[f64], ho: &[f64], rel: &RelationParams, c: Curvature) -> ScoreGrad {
    let z = geometry::log0(hs, c);
    let y: Vec<f64> = z.iter().zip(&rel.diag).map(|(a, b)| a * b).collect();
    let u = geometry::exp0(&y, c);
    let mut v = geometry::mobius_add_unchecked(ho, &rel.translation, c);
    geometry::project_in_place(&mut v, c);

    let (d2, gu, gv) = geometry::distance_sq_grad(&u, &v, c);
    // score = -d^2
    let gu = geometry::neg(&gu);
    let gv = geometry::neg(&gv);

    let gy = geometry::exp0_vjp(&y, c, &gu);
    let diag: Vec<f64> = gy.iter().zip(&z).map(|(a, b)| a * b).collect();
    let gz: Vec<f64> = gy.iter().zip(&rel.diag).map(|(a, b)| a * b).collect();
    let subject = geometry::log0_vjp(hs, c, &gz);
    let (object, translation) = geometry::mobius_add_vjp(ho, &rel.translation, c, &gv);
    ScoreGrad { score: -d2, subject, object, translation, diag }
}
