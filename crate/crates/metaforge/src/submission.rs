//! Target-specific serialization, external validation and posting to a
//! submission endpoint.

use std::path::Path;
use std::time::Duration;

use metaforge_core::model::{serialize_instance, MetadataInstance, ResolvedTemplate};
use metaforge_core::tsv::tsv_document;
use serde::{Deserialize, Serialize};

use crate::error::{Code, Error, Result};
use crate::terminology::http_client;

pub const VALIDATOR_TIMEOUT: Duration = Duration::from_secs(30);
pub const SUBMIT_TIMEOUT: Duration = Duration::from_secs(30);
pub const MAX_RAW_RESPONSE: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetFormat {
    Json,
    Tsv,
}

impl TargetFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            TargetFormat::Json => "application/ld+json",
            TargetFormat::Tsv => "text/tab-separated-values; charset=utf-8",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubmissionTarget {
    pub name: String,
    pub endpoint_url: String,
    pub format: TargetFormat,
    /// Name of the environment variable holding the API key.
    pub api_key_env_var: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_validator_url: Option<String>,
}

fn is_http_url(s: &str) -> bool {
    reqwest::Url::parse(s).is_ok_and(|u| matches!(u.scheme(), "http" | "https") && u.has_host())
}

impl SubmissionTarget {
    pub fn check(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::new(Code::InvalidRequest, "target name must not be empty"));
        }
        for url in std::iter::once(&self.endpoint_url).chain(&self.external_validator_url) {
            if !is_http_url(url) {
                return Err(Error::new(
                    Code::InvalidRequest,
                    format!("target `{}`: `{url}` is not an absolute HTTP(S) URL", self.name),
                ));
            }
        }
        Ok(())
    }
}

/// Reads the target list; a missing file means no targets.
pub fn load_targets(path: &Path) -> Result<Vec<SubmissionTarget>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let targets: Vec<SubmissionTarget> = serde_json::from_str(&text)
        .map_err(|e| Error::new(Code::InvalidRequest, format!("{}: {e}", path.display())))?;
    for t in &targets {
        t.check()?;
    }
    Ok(targets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationMessage {
    pub path: String,
    pub message: String,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalValidationResult {
    pub valid: bool,
    pub messages: Vec<ValidationMessage>,
}

pub fn serialize_for_target(rt: &ResolvedTemplate, m: &MetadataInstance, format: TargetFormat) -> Result<String> {
    Ok(match format {
        TargetFormat::Json => serialize_instance(m),
        TargetFormat::Tsv => tsv_document(rt, m)?,
    })
}

/// Posts the JSON-LD document to the validator and parses its verdict.
pub fn validate_external(url: &str, jsonld: &str) -> Result<ExternalValidationResult> {
    let unavailable = |d: String| Error::new(Code::ValidatorUnavailable, format!("external validator: {d}"));
    let resp = http_client(VALIDATOR_TIMEOUT)?
        .post(url)
        .header("Content-Type", TargetFormat::Json.content_type())
        .body(jsonld.to_owned())
        .send()
        .map_err(|e| unavailable(e.to_string()))?;
    let status = resp.status();
    if !status.is_success() {
        return Err(unavailable(format!("HTTP {}", status.as_u16())));
    }
    let text = resp.text().map_err(|e| unavailable(e.to_string()))?;
    let result: ExternalValidationResult = serde_json::from_str(&text)
        .map_err(|e| Error::new(Code::ValidatorMalformed, format!("unparseable validator response: {e}")))?;
    if result.valid && result.messages.iter().any(|m| m.severity == Severity::Error) {
        return Err(Error::new(
            Code::ValidatorMalformed,
            "validator reported valid=true alongside error messages",
        ));
    }
    Ok(result)
}

/// Answer of a submission endpoint that was reached.
#[derive(Debug, Clone)]
pub struct RemoteAnswer {
    pub http_status: u16,
    pub remote_id: Option<String>,
    pub raw_response: String,
}

pub fn truncate(mut s: String, max: usize) -> String {
    if s.len() > max {
        let mut cut = max;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        s.truncate(cut);
    }
    s
}

/// Posts the payload with the target's credential.
pub fn post_submission(target: &SubmissionTarget, payload: &str, api_key: &str) -> Result<RemoteAnswer> {
    let resp = http_client(SUBMIT_TIMEOUT)?
        .post(&target.endpoint_url)
        .header("Content-Type", target.format.content_type())
        .header("Authorization", format!("apikey token={api_key}"))
        .body(payload.to_owned())
        .send()
        .map_err(|e| Error::new(Code::SubmissionUnavailable, format!("submission endpoint: {e}")))?;
    let http_status = resp.status().as_u16();
    let raw = resp.text().unwrap_or_default();
    let remote_id = serde_json::from_str::<serde_json::Value>(&raw)
        .ok()
        .and_then(|v| v.get("id").and_then(|i| i.as_str()).map(String::from));
    Ok(RemoteAnswer {
        http_status,
        remote_id,
        raw_response: truncate(raw, MAX_RAW_RESPONSE),
    })
}
