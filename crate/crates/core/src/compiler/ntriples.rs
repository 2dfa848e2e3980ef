use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::decimal::Decimal;
use crate::json::escape_pointer_token;
use crate::model::{
    template_iri, LiteralData, LiteralValue, MetadataInstance, Node, ResolvedNode, ResolvedTemplate, RDFS_NS, XSD_NS,
};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExportError {
    /// A filled field or element has no property IRI to use as predicate.
    NoPropertyIri { path: String },
}

impl ExportError {
    pub fn code(&self) -> &'static str {
        "NO_PROPERTY_IRI"
    }

    pub fn path(&self) -> &str {
        match self {
            ExportError::NoPropertyIri { path } => path,
        }
    }
}

impl fmt::Display for ExportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExportError::NoPropertyIri { path } => write!(f, "field at `{path}` has no property IRI"),
        }
    }
}

fn iri(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('<');
    for c in s.chars() {
        if c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            out.push_str(&alloc::format!("\\u{:04X}", c as u32));
        } else {
            out.push(c);
        }
    }
    out.push('>');
    out
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn literal(lit: &LiteralValue) -> String {
    let lexical = match &lit.value {
        LiteralData::Text(s) => s.clone(),
        LiteralData::Number(n) => Decimal::from_number(n).to_plain(),
    };
    alloc::format!(
        "{}^^{}",
        quoted(&lexical),
        iri(&alloc::format!("{XSD_NS}{}", lit.datatype.xsd_local_name()))
    )
}

struct Emitter {
    lines: Vec<String>,
    blank_nodes: usize,
}

impl Emitter {
    fn triple(&mut self, s: &str, p: &str, o: &str) {
        self.lines.push(alloc::format!("{s} {p} {o} ."));
    }

    fn object(
        &mut self,
        subject: &str,
        children: &[ResolvedNode],
        entries: &[(String, Node)],
        path: &str,
    ) -> Result<(), ExportError> {
        for (key, node) in entries {
            let Some(child) = children.iter().find(|c| c.name() == key) else {
                continue;
            };
            let ptr = alloc::format!("{path}/{}", escape_pointer_token(key));
            match node {
                Node::List(items) => {
                    for (i, item) in items.iter().enumerate() {
                        self.value(subject, child, item, &alloc::format!("{ptr}/{i}"))?;
                    }
                }
                single => self.value(subject, child, single, &ptr)?,
            }
        }
        Ok(())
    }

    fn value(&mut self, subject: &str, child: &ResolvedNode, node: &Node, ptr: &str) -> Result<(), ExportError> {
        if node.leaf_count() == 0 {
            return Ok(());
        }
        let predicate = child
            .property_iri()
            .map(iri)
            .ok_or_else(|| ExportError::NoPropertyIri {
                path: String::from(ptr),
            })?;
        match (child, node) {
            (ResolvedNode::Element(e), Node::Element(entries)) => {
                self.blank_nodes += 1;
                let bnode = alloc::format!("_:e{}", self.blank_nodes);
                self.triple(subject, &predicate, &bnode);
                self.object(&bnode, &e.children, entries, ptr)?;
            }
            (_, Node::Literal(lit)) => self.triple(subject, &predicate, &literal(lit)),
            (_, Node::Term(t)) => {
                let term = iri(&t.iri);
                self.triple(subject, &predicate, &term);
                if let Some(label) = &t.label {
                    self.triple(&term, &iri(&alloc::format!("{RDFS_NS}label")), &quoted(label));
                }
            }
            // Shape mismatches are validation errors; export assumes a valid instance.
            _ => {}
        }
        Ok(())
    }
}

/// Sorted, de-duplicated N-Triples for an instance, one statement per line.
pub fn export_ntriples(rt: &ResolvedTemplate, m: &MetadataInstance) -> Result<String, ExportError> {
    let subject = iri(&m.instance_id);
    let mut emitter = Emitter {
        lines: Vec::new(),
        blank_nodes: 0,
    };
    emitter.triple(&subject, &iri(RDF_TYPE), &iri(&template_iri(&m.template_id)));
    emitter.object(&subject, &rt.children, &m.values, "")?;
    let mut lines = emitter.lines;
    lines.sort();
    lines.dedup();
    let mut out = String::new();
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
