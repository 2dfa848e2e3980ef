//! Template compilation: JSON Schema, instance validation and RDF export.

mod ntriples;
mod schema;
mod validate;

pub use ntriples::{export_ntriples, ExportError, RDF_TYPE};
pub use schema::{
    compile, multiple_of, schema_json, value_schema, ValidationSchema, DATE_PATTERN, DRAFT_07, IRI_PATTERN,
};
pub use validate::{validate, ErrorCode, TermMembership, ValidationError, ValidationReport};
