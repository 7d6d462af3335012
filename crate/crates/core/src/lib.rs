//! Argument structure prediction.
//!
//! Given the propositions of an argument, a pairwise classifier scores every
//! ordered pair `(child, parent)` for how strongly the child supports (or
//! attacks) the parent, and a decoder picks the tree or chain with the
//! highest total edge score.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`corpus`]: data model, JSON corpus format, training-pair frameworks, folds
//! - [`features`]: the pair feature groups and their artifacts
//! - [`classifiers`]: linear SVM and MLP scorers, calibration, score matrices
//! - [`decoder`]: exhaustive, arborescence and chain decoders, labeled variants
//! - [`evaluation`]: SimScore, baselines, cross-validation and ablation
//! - [`synthetic`]: planted corpora for tests and demos

pub mod classifiers;
pub mod corpus;
pub mod decoder;
pub mod evaluation;
pub mod features;
pub mod synthetic;
