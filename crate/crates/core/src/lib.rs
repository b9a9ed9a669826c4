//! Bayesian network classifiers and influence-driven explanations.
//!
//! A [`Classifier`] decides every classification with a naive Bayes model over its
//! children. The [`influence`] module reverses those dependencies into an influence
//! graph; an [`kits::ExplanationKit`] labels influences with relation types, and
//! [`idx::generate`] assembles them into an explanation rooted at one
//! classification.

pub mod attribution;
pub mod error;
pub mod evaluation;
pub mod fixtures;
pub mod idx;
pub mod influence;
pub mod kits;
pub mod learning;
pub mod model;

pub use error::{Error, Result};
pub use influence::{GraphKind, InfluenceGraph};
pub use model::{
    Assignment, Classifier, ClassifierBuilder, Domain, PosteriorDistribution, Role, VarId,
    Variable,
};
