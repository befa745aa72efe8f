//! Many-to-one school-choice matching with a student acquaintance graph.
//!
//! Students envy only the acquaintances they know about, so the toolkit
//! tracks local envy alongside the classic fairness, efficiency and
//! stability notions. It provides:
//!
//! * the market model and its text formats ([`model`], [`io`]),
//! * graph structure used by the mechanisms: trees, degeneracy orderings,
//!   tree decompositions and single-peakedness ([`graph`]),
//! * property checkers ([`properties`]),
//! * mechanisms: deferred acceptance, serial dictatorship, the locally-top
//!   family and degeneracy-ordered serial dictatorship ([`mechanisms`]),
//! * exhaustive oracles for desk-scale ground truth ([`oracle`]),
//! * seeded instance generators, structural analysis and a fixture corpus
//!   ([`generate`], [`analyze`], [`fixtures`]).

pub mod analyze;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod io;
pub mod mechanisms;
pub mod model;
pub mod oracle;
pub mod properties;

pub use model::{AcquaintanceGraph, MarketInstance, Matching, ModelError, SchoolId, StudentId};
