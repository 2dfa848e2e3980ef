//! Metadata workbench: repository, terminology, submission and the HTTP API
//! around the `metaforge-core` model.

pub mod api;
pub mod config;
pub mod error;
pub mod mock;
pub mod render;
pub mod repository;
pub mod service;
pub mod submission;
pub mod terminology;

pub use error::{Code, Error, Result};
