//! Templates, elements, fields and filled-in instances.

mod flatten;
mod instance;
mod resolve;
mod template;

pub use flatten::{flatten_instance, literal_key, FlatPair};
pub use instance::{
    instance_to_json, parse_instance, serialize_instance, template_iri, Datatype, LiteralData, LiteralValue,
    MetadataInstance, Node, TermValue, RDFS_NS, TEMPLATE_IRI_PREFIX, XSD_NS,
};
pub use resolve::{resolve_composition, ResolvedElement, ResolvedNode, ResolvedTemplate, RESOLVE_NODE_LIMIT};
pub use template::{parse_template, serialize_template, template_to_json};

use alloc::string::String;
use alloc::vec::Vec;

use regex_automata::meta::Regex;
use serde_json::Number;

use crate::id::ResourceId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub property_iri: String,
    pub term_iri: String,
    pub term_label: String,
}

/// Allowed number of values. `max: None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cardinality {
    pub min: u32,
    pub max: Option<u32>,
}

impl Cardinality {
    pub const fn new(min: u32, max: Option<u32>) -> Self {
        Cardinality { min, max }
    }

    pub const fn default_for(required: bool) -> Self {
        Cardinality {
            min: if required { 1 } else { 0 },
            max: Some(1),
        }
    }

    /// Anything other than at-most-one is encoded as a JSON array.
    pub fn is_multi(&self) -> bool {
        self.max != Some(1)
    }

    pub fn admits(&self, count: usize) -> bool {
        count >= self.min as usize && self.max.is_none_or(|m| count <= m as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldType {
    Text,
    Paragraph,
    Number,
    Date,
    Term,
}

impl FieldType {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldType::Text => "text",
            FieldType::Paragraph => "paragraph",
            FieldType::Number => "number",
            FieldType::Date => "date",
            FieldType::Term => "term",
        }
    }

    pub fn parse(s: &str) -> Option<FieldType> {
        Some(match s {
            "text" => FieldType::Text,
            "paragraph" => FieldType::Paragraph,
            "number" => FieldType::Number,
            "date" => FieldType::Date,
            "term" => FieldType::Term,
            _ => return None,
        })
    }
}

/// Anchored regular expression with its source text.
#[derive(Debug, Clone)]
pub struct Pattern {
    source: String,
    regex: Regex,
}

impl Pattern {
    /// Requires `^…$` anchoring and a compilable expression.
    pub fn new(source: &str) -> Result<Pattern, String> {
        if !source.starts_with('^') || !source.ends_with('$') || source.ends_with("\\$") {
            return Err(String::from("pattern must be anchored with ^ and $"));
        }
        let regex = Regex::new(source).map_err(|e| alloc::format!("invalid pattern: {e}"))?;
        Ok(Pattern {
            source: String::from(source),
            regex,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Pattern) -> bool {
        self.source == other.source
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TextConstraints {
    pub min_length: Option<u64>,
    pub max_length: Option<u64>,
    pub pattern: Option<Pattern>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NumberConstraints {
    pub minimum: Option<Number>,
    pub maximum: Option<Number>,
    pub decimal_places: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralEntry {
    pub label: String,
    pub iri: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintSource {
    OntologyBranch {
        source: String,
        root_iri: String,
        include_root: bool,
    },
    ValueSet {
        value_set_id: ResourceId,
    },
    LiteralList {
        entries: Vec<LiteralEntry>,
    },
}

/// Union of places a term value may come from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValueConstraintSet {
    pub sources: Vec<ConstraintSource>,
}

impl ValueConstraintSet {
    /// Membership decided by `literalList` sources alone.
    pub fn literal_list_contains(&self, iri: &str) -> bool {
        self.sources.iter().any(|s| match s {
            ConstraintSource::LiteralList { entries } => entries.iter().any(|e| e.iri.as_deref() == Some(iri)),
            _ => false,
        })
    }
}

/// Field type together with the constraint record legal for it.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    Text(TextConstraints),
    /// Same constraints as text minus `pattern`.
    Paragraph(TextConstraints),
    Number(NumberConstraints),
    Date,
    Term(ValueConstraintSet),
}

impl FieldKind {
    pub fn field_type(&self) -> FieldType {
        match self {
            FieldKind::Text(_) => FieldType::Text,
            FieldKind::Paragraph(_) => FieldType::Paragraph,
            FieldKind::Number(_) => FieldType::Number,
            FieldKind::Date => FieldType::Date,
            FieldKind::Term(_) => FieldType::Term,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub name: String,
    pub kind: FieldKind,
    pub required: bool,
    pub cardinality: Cardinality,
    pub property_iri: Option<String>,
    pub description: Option<String>,
    pub annotations: Vec<Annotation>,
}

impl FieldSpec {
    pub fn new(name: impl Into<String>, kind: FieldKind) -> FieldSpec {
        FieldSpec {
            name: name.into(),
            kind,
            required: false,
            cardinality: Cardinality::default_for(false),
            property_iri: None,
            description: None,
            annotations: Vec::new(),
        }
    }

    pub fn field_type(&self) -> FieldType {
        self.kind.field_type()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateKind {
    Template,
    Element,
    Field,
}

impl TemplateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateKind::Template => "template",
            TemplateKind::Element => "element",
            TemplateKind::Field => "field",
        }
    }

    pub fn parse(s: &str) -> Option<TemplateKind> {
        Some(match s {
            "template" => TemplateKind::Template,
            "element" => TemplateKind::Element,
            "field" => TemplateKind::Field,
            _ => return None,
        })
    }
}

/// Use of a stored element or field by id, with its own multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    pub ref_id: ResourceId,
    pub cardinality: Cardinality,
    pub property_iri: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Child {
    Field(FieldSpec),
    Element(Template),
    Reference(Reference),
}

/// A template, a reusable element, or a standalone field resource.
///
/// `kind == Field` carries its payload in `field` and has no children.
/// `property_iri` and `cardinality` only apply to elements and are the
/// defaults used when the element is nested.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub id: ResourceId,
    pub kind: TemplateKind,
    pub name: String,
    pub description: Option<String>,
    pub property_iri: Option<String>,
    pub cardinality: Option<Cardinality>,
    pub annotations: Vec<Annotation>,
    pub children: Vec<Child>,
    pub field: Option<FieldSpec>,
    pub version: u64,
}

impl Template {
    pub fn new(id: ResourceId, kind: TemplateKind, name: impl Into<String>) -> Template {
        Template {
            id,
            kind,
            name: name.into(),
            description: None,
            property_iri: None,
            cardinality: None,
            annotations: Vec::new(),
            children: Vec::new(),
            field: None,
            version: 0,
        }
    }

    /// Ids of every resource referenced anywhere below this template.
    pub fn referenced_ids(&self) -> Vec<ResourceId> {
        let mut out = Vec::new();
        collect_refs(self, &mut out);
        out
    }
}

fn collect_refs(t: &Template, out: &mut Vec<ResourceId>) {
    for child in &t.children {
        match child {
            Child::Reference(r) => out.push(r.ref_id.clone()),
            Child::Element(e) => collect_refs(e, out),
            Child::Field(_) => {}
        }
    }
}

/// Names usable as instance keys and path segments.
pub fn is_valid_child_name(name: &str) -> bool {
    let mut chars = name.chars();
    let first_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    first_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
        && name != "rdfs"
        && name != "xsd"
}
