//! Exhaustive neighbourhood queries over the vocabulary.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry;
use crate::model::{Geometry, ModelState, Role};

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    Word(String),
    Point(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `-d(q, e)^2` in the model geometry.
    Distance,
    /// Bias-free relation-adjusted score with the query as subject.
    RelationAdjusted(Role),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub word: String,
    pub score: f64,
}

/// Neighbours in descending score order; ties go to the smaller vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query: String,
    pub entries: Vec<Neighbor>,
}

impl NeighborList {
    /// `rank<TAB>word<TAB>score` lines, ranks starting at 1.
    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, n)| format!("{}\t{}\t{:.6}\n", i + 1, n.word, n.score))
            .collect()
    }

    pub fn words(&self) -> Vec<&str> {
        self.entries.iter().map(|n| n.word.as_str()).collect()
    }
}

fn resolve(state: &ModelState, query: &Query) -> Result<(String, Vec<f64>, Option<usize>)> {
    match query {
        Query::Word(w) => {
            let id = state.vocab.lookup(w)?;
            Ok((w.clone(), state.entity(id).to_vec(), Some(id)))
        }
        Query::Point(p) => {
            if p.len() != state.dim {
                return Err(Error::Dimension { expected: state.dim, got: p.len() });
            }
            Ok(("<point>".to_string(), p.clone(), None))
        }
    }
}

/// Scores of every vocabulary entry against `point`, indexed by entity id.
pub fn score_all(state: &ModelState, point: &[f64], metric: Metric) -> Vec<f64> {
    let ids = 0..state.num_entities();
    match metric {
        Metric::Distance => ids.into_par_iter().map(|o| -state.distance_sq(point, state.entity(o))).collect(),
        Metric::RelationAdjusted(role) => {
            let u = state.transform_subject(point, role);
            ids.into_par_iter()
                .map(|o| -state.distance_sq(&u, &state.translate_object(state.entity(o), role)))
                .collect()
        }
    }
}

/// Ids sorted by descending score, ties by ascending id.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    ids.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    ids
}

pub fn nearest_neighbors(
    state: &ModelState,
    query: &Query,
    k: usize,
    metric: Metric,
    exclude_self: bool,
) -> Result<NeighborList> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let (label, point, self_id) = resolve(state, query)?;
    let scores = score_all(state, &point, metric);
    let entries = ranking(&scores)
        .into_iter()
        .filter(|id| !(exclude_self && Some(*id) == self_id))
        .take(k)
        .map(|id| Neighbor { id, word: state.vocab.word(id).unwrap().to_string(), score: scores[id] })
        .collect();
    Ok(NeighborList { query: label, entries })
}

/// `n_points` points evenly spaced in `t` on the path from `w1` to `w2`: the
/// geodesic in the hyperbolic model, the straight segment in the Euclidean one.
pub fn path_points(state: &ModelState, w1: &str, w2: &str, n_points: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    if n_points < 2 {
        return Err(Error::Invalid("traversal needs at least 2 points".into()));
    }
    let a = state.embedding(w1)?;
    let b = state.embedding(w2)?;
    (0..n_points)
        .map(|i| {
            let t = i as f64 / (n_points - 1) as f64;
            let p = match state.geometry {
                Geometry::Hyperbolic => geometry::geodesic_point(a, b, t, state.curvature)?,
                Geometry::Euclidean => a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect(),
            };
            Ok((t, p))
        })
        .collect()
}

/// Neighbourhoods of evenly spaced points along the path between two words.
pub fn traverse(state: &ModelState, w1: &str, w2: &str, n_points: usize, k: usize) -> Result<Vec<(f64, NeighborList)>> {
    path_points(state, w1, w2, n_points)?
        .into_iter()
        .map(|(t, p)| {
            let mut list = nearest_neighbors(state, &Query::Point(p), k, Metric::Distance, false)?;
            list.query = format!("{w1}->{w2}@{t:.3}");
            Ok((t, list))
        })
        .collect()
}
