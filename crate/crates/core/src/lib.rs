//! Topic classification of searchable text databases without document retrieval.
//!
//! A database that is only reachable through a search box never exposes its
//! contents directly, but it does report how many documents match a query.
//! This crate turns an ordered rule-based document classifier into counting
//! probe queries, runs them against a match-count-only search interface, and
//! derives per-category coverage and specificity estimates from the counts
//! alone.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] — tokenize a labeled document collection, prune and select
//!    the vocabulary.
//! 2. [`rules`] — learn an ordered set of conjunctive rules (or load one from
//!    a rule file) and record per-rule accuracy and per-category recall.
//! 3. [`searchdb`] — an inverted index behind a [`searchdb::SearchInterface`]
//!    that answers boolean count queries and nothing else.
//! 4. [`prober`] — compile rules into probe queries, adapt them to interface
//!    capabilities (negation support, query-length limits) via
//!    inclusion–exclusion decomposition and zero-count truncation, and
//!    collect per-rule match counts.
//! 5. [`estimator`] — turn the counts into raw and adjusted coverage vectors,
//!    specificity values, threshold decisions, and a chi-squared significance
//!    verdict.
//!
//! The crate is `no_std` (alloc required). IO, file formats, and the CLI live
//! in the companion `dbprobe-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod corpus;
pub mod estimator;
pub mod prober;
pub mod rules;
pub mod searchdb;

pub use corpus::{preprocess, CategorySet, Corpus, Document, PreprocessOptions};
pub use estimator::{ClassificationReport, CoverageVector, Thresholds};
pub use prober::{compile_probes, probe_database, ProbeQuery, ProbeResult};
pub use rules::{train, Rule, RuleSet, TrainOptions, TrainingStats};
pub use searchdb::{BooleanQuery, InterfaceCapabilities, InvertedIndex, SearchInterface};
