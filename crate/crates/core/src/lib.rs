//! Core of the sketch-based SQL synthesizer.
//!
//! Everything here is pure and allocation-only: relational algebra terms and
//! their evaluator, query sketches, the catalog index, hint similarity, sketch
//! completion, repair, the utterance parser and the synthesis loop. File
//! formats and the command line live in the `sketchql` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod catalog;
pub mod completion;
pub mod config;
pub mod engine;
pub mod nlparser;
pub mod repair;
pub mod similarity;
pub mod sketch;

pub use algebra::{emit_sql, evaluate, type_of, QueryTerm, RecordType, Value};
pub use catalog::Catalog;
pub use config::Config;
pub use sketch::{parse_sketch, print_sketch, SketchRel};
