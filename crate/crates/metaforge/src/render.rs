//! Response bodies shared by the CLI and the HTTP API so both emit the same bytes.

use metaforge_core::compiler::{export_ntriples, ValidationReport};
use metaforge_core::model::{serialize_instance, MetadataInstance, ResolvedTemplate};
use metaforge_core::recommender::Suggestion;
use metaforge_core::tsv::tsv_document;
use serde_json::json;

use crate::error::{Code, Error, Result};

pub const JSON: &str = "application/json";
pub const NTRIPLES: &str = "application/n-triples";
pub const JSONLD: &str = "application/ld+json";
pub const TSV: &str = "text/tab-separated-values; charset=utf-8";

/// Compact report on one line.
pub fn report(r: &ValidationReport) -> String {
    let mut out = r.to_json().to_compact();
    out.push('\n');
    out
}

pub fn suggestions_value(list: &[Suggestion]) -> serde_json::Value {
    list.iter()
        .map(|s| {
            json!({
                "valueKey": s.value_key,
                "display": s.display,
                "score": s.score_f64(),
                "scoreRational": s.score.to_string(),
                "supportCount": s.support_count,
            })
        })
        .collect()
}

pub fn suggestions(list: &[Suggestion]) -> String {
    let mut out = suggestions_value(list).to_string();
    out.push('\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    JsonLd,
    NTriples,
    Tsv,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Result<ExportFormat> {
        match s {
            "jsonld" => Ok(ExportFormat::JsonLd),
            "ntriples" => Ok(ExportFormat::NTriples),
            "tsv" => Ok(ExportFormat::Tsv),
            other => Err(Error::new(
                Code::InvalidRequest,
                format!("unknown format `{other}`; expected jsonld, ntriples or tsv"),
            )),
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::JsonLd => JSONLD,
            ExportFormat::NTriples => NTRIPLES,
            ExportFormat::Tsv => TSV,
        }
    }
}

pub fn export(rt: &ResolvedTemplate, m: &MetadataInstance, format: ExportFormat) -> Result<String> {
    Ok(match format {
        ExportFormat::JsonLd => serialize_instance(m),
        ExportFormat::NTriples => export_ntriples(rt, m)?,
        ExportFormat::Tsv => tsv_document(rt, m)?,
    })
}

/// Pretty JSON with a trailing newline.
pub fn pretty(v: &impl serde::Serialize) -> String {
    let mut out = serde_json::to_string_pretty(v).expect("response bodies serialize");
    out.push('\n');
    out
}
