//! Semi-supervised collective classification on attributed graphs.
//!
//! Nodes carry attribute vectors and links; a small subset has known labels.
//! Hybrid node classifiers (attribute LR combined with a relational LR or
//! naive Bayes model) are learned with EM-style self-training over iterative
//! classification, optionally with a label-regularization term that keeps
//! the predicted class distribution near the known-label prior.

pub mod classifiers;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod inference;
pub mod ssl;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{DataGraph, LabelState, Provenance};
pub use ssl::{ClassifierKind, ClassifierSpec, SslVariant};
