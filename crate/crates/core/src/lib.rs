//! Encyclopedia generation from web pages.
//!
//! Pages containing a term are ingested ([`corpus`]), fragments describing the
//! term are cut out by definitional patterns and HTML layout ([`extractor`]),
//! and the fragments are organized by technical domain ([`organizer`]) using a
//! lexicon-derived domain model ([`domainmodel`]) and a trigram description
//! model ([`langmodel`]). The resulting encyclopedia serves as the knowledge
//! base of a multiple-choice question answerer ([`qa`]).
//!
//! Runnable walkthroughs of each stage live in the crate's `examples/`
//! directory; the `encyclogen` binary wires the stages behind subcommands
//! ([`cli`]).

pub mod cli;
pub mod config;
pub mod corpus;
pub mod domainmodel;
pub mod error;
pub mod extractor;
pub mod html;
pub mod langmodel;
pub mod organizer;
pub mod pipeline;
pub mod qa;
pub mod store;
pub mod tokenizer;

pub use error::{Error, Result};
