use alloc::string::String;
use alloc::vec::Vec;

use super::instance::{LiteralData, LiteralValue, MetadataInstance, Node};
use crate::decimal::Decimal;

/// One leaf value with its field path and normalized match key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlatPair {
    /// Field names from the root joined by `/`; list indices are dropped.
    pub path: String,
    pub value_key: String,
    pub display: String,
}

/// Match key for a literal: trimmed lowercase text, or plain decimal for numbers.
pub fn literal_key(lit: &LiteralValue) -> String {
    match &lit.value {
        LiteralData::Text(s) => s.trim().to_lowercase(),
        LiteralData::Number(n) => Decimal::from_number(n).to_plain(),
    }
}

fn walk(node: &Node, path: &str, out: &mut Vec<FlatPair>) {
    match node {
        Node::Literal(lit) => out.push(FlatPair {
            path: String::from(path),
            value_key: literal_key(lit),
            display: lit.lexical(),
        }),
        Node::Term(t) => out.push(FlatPair {
            path: String::from(path),
            value_key: t.iri.clone(),
            display: t.label.clone().unwrap_or_else(|| t.iri.clone()),
        }),
        Node::List(items) => {
            for item in items {
                walk(item, path, out);
            }
        }
        Node::Element(entries) => {
            for (name, child) in entries {
                walk(child, &alloc::format!("{path}/{name}"), out);
            }
        }
    }
}

/// Depth-first, document-order leaf pairs.
pub fn flatten_instance(m: &MetadataInstance) -> Vec<FlatPair> {
    let mut out = Vec::new();
    for (name, node) in &m.values {
        walk(node, name, &mut out);
    }
    out
}
