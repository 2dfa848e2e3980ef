//! Flat tab-separated rendering of instances for submission targets.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::decimal::Decimal;
use crate::model::{LiteralData, MetadataInstance, Node, ResolvedTemplate};

/// Deepest field path (in segments) the flat format can hold.
pub const MAX_TSV_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TsvError {
    Unserializable { path: String },
}

impl fmt::Display for TsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TsvError::Unserializable { path } => {
                write!(f, "`{path}` is nested deeper than {MAX_TSV_DEPTH} levels")
            }
        }
    }
}

fn clean(s: &str) -> String {
    s.chars()
        .map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c })
        .collect()
}

fn render_leaf(node: &Node) -> Option<String> {
    match node {
        Node::Literal(lit) => Some(clean(&match &lit.value {
            LiteralData::Text(s) => s.clone(),
            LiteralData::Number(n) => Decimal::from_number(n).to_plain(),
        })),
        Node::Term(t) => Some(clean(&match &t.label {
            Some(label) => alloc::format!("{label} [{}]", t.iri),
            None => alloc::format!("[{}]", t.iri),
        })),
        _ => None,
    }
}

fn collect(node: &Node, path: &str, depth: usize, cells: &mut Vec<(String, String)>) -> Result<(), TsvError> {
    if depth > MAX_TSV_DEPTH {
        return Err(TsvError::Unserializable {
            path: String::from(path),
        });
    }
    match node {
        Node::List(items) => {
            for item in items {
                collect(item, path, depth, cells)?;
            }
        }
        Node::Element(entries) => {
            for (name, child) in entries {
                collect(child, &alloc::format!("{path}/{name}"), depth + 1, cells)?;
            }
        }
        leaf => {
            if let Some(text) = render_leaf(leaf) {
                cells.push((String::from(path), text));
            }
        }
    }
    Ok(())
}

/// Header line: leaf field paths in template document order.
pub fn tsv_header(rt: &ResolvedTemplate) -> String {
    rt.leaf_paths().join("\t")
}

/// One data line; repeated values are joined with `|`.
pub fn tsv_row(rt: &ResolvedTemplate, m: &MetadataInstance) -> Result<String, TsvError> {
    let mut cells = Vec::new();
    for (name, node) in &m.values {
        collect(node, name, 1, &mut cells)?;
    }
    let row: Vec<String> = rt
        .leaf_paths()
        .iter()
        .map(|path| {
            cells
                .iter()
                .filter(|(p, _)| p == path)
                .map(|(_, v)| v.as_str())
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect();
    Ok(row.join("\t"))
}

/// Header plus one row, LF terminated.
pub fn tsv_document(rt: &ResolvedTemplate, m: &MetadataInstance) -> Result<String, TsvError> {
    let row = tsv_row(rt, m)?;
    Ok(alloc::format!("{}\n{row}\n", tsv_header(rt)))
}
