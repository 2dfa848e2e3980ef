//! Metadata template model, schema compiler, RDF export and value recommender.
//!
//! Everything here is pure and allocation-only (`no_std` + `alloc`); storage,
//! networking and the command line live in the `metaforge` crate.

#![no_std]

extern crate alloc;

pub mod compiler;
pub mod decimal;
pub mod error;
pub mod id;
pub mod json;
pub mod model;
pub mod recommender;
pub mod tsv;

pub use error::{ModelError, ResolveError};
pub use id::{is_absolute_iri, ResourceId};
