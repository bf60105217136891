//! Multi-relational word embeddings learned from dictionary definitions whose
//! tokens are labelled with definition semantic roles (supertype,
//! differentia quality, ...).
//!
//! Every `(definiendum, role, definiens-word)` triple is a link-prediction
//! example. Words are embedded either in Euclidean space or in the Poincaré
//! ball; each role owns a translation vector and a diagonal relation matrix.
//!
//! ```no_run
//! use defrel::{ingest, trainer::{fit, TrainConfig}, model::Geometry, query};
//!
//! let corpus = ingest::load_triples_tsv("triples.tsv".as_ref())?;
//! let config = TrainConfig { geometry: Geometry::Hyperbolic, dim: 10, epochs: 50, ..Default::default() };
//! let model = fit(&corpus, &config)?;
//! let near = query::nearest_neighbors(&model, &query::Query::Word("dog".into()), 5, query::Metric::Distance, true)?;
//! print!("{}", near.to_tsv());
//! # Ok::<(), defrel::Error>(())
//! ```

pub mod config;
pub mod error;
pub mod evaluate;
pub mod geometry;
pub mod ingest;
pub mod model;
pub mod persist;
pub mod pipeline;
pub mod query;
pub mod trainer;

pub use error::{Error, Result};
pub use geometry::Curvature;
pub use ingest::Corpus;
pub use model::{Geometry, ModelState, Role, Triple, Vocabulary};
