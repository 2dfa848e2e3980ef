use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use serde_json::Number;

use super::template::{as_object, lookup, sub, sub_index};
use crate::error::ModelError;
use crate::id::{is_absolute_iri, ResourceId};
use crate::json::{self, Json};

pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
pub const TEMPLATE_IRI_PREFIX: &str = "urn:metaforge:template:";

pub fn template_iri(id: &ResourceId) -> String {
    alloc::format!("{TEMPLATE_IRI_PREFIX}{id}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Datatype {
    String,
    Number,
    Date,
}

impl Datatype {
    pub fn xsd_local_name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Number => "decimal",
            Datatype::Date => "date",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LiteralData {
    Text(String),
    Number(Number),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiteralValue {
    pub value: LiteralData,
    pub datatype: Datatype,
}

impl LiteralValue {
    pub fn text(s: impl Into<String>) -> Self {
        LiteralValue {
            value: LiteralData::Text(s.into()),
            datatype: Datatype::String,
        }
    }

    pub fn number(n: impl Into<Number>) -> Self {
        LiteralValue {
            value: LiteralData::Number(n.into()),
            datatype: Datatype::Number,
        }
    }

    pub fn date(s: impl Into<String>) -> Self {
        LiteralValue {
            value: LiteralData::Text(s.into()),
            datatype: Datatype::Date,
        }
    }

    /// Lexical form: the text itself, or the number's JSON spelling.
    pub fn lexical(&self) -> String {
        match &self.value {
            LiteralData::Text(s) => s.clone(),
            LiteralData::Number(n) => alloc::format!("{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermValue {
    pub iri: String,
    pub label: Option<String>,
}

/// One value position in an instance tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Literal(LiteralValue),
    Term(TermValue),
    /// Multi-valued field or element; items are never lists.
    List(Vec<Node>),
    /// Nested element: its fields in document order.
    Element(Vec<(String, Node)>),
}

impl Node {
    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Literal(_) | Node::Term(_) => 1,
            Node::List(items) => items.iter().map(Node::leaf_count).sum(),
            Node::Element(entries) => entries.iter().map(|(_, n)| n.leaf_count()).sum(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Node::Literal(_) => "literal",
            Node::Term(_) => "term",
            Node::List(_) => "array",
            Node::Element(_) => "element",
        }
    }
}

/// A filled-in template in the JSON-LD instance profile.
#[derive(Debug, Clone, PartialEq)]
pub struct MetadataInstance {
    /// Field name to property IRI, without the fixed `rdfs`/`xsd` prefixes.
    pub context: Vec<(String, String)>,
    pub instance_id: String,
    pub template_id: ResourceId,
    pub values: Vec<(String, Node)>,
}

impl MetadataInstance {
    pub fn new(instance_id: impl Into<String>, template_id: ResourceId) -> Self {
        MetadataInstance {
            context: Vec::new(),
            instance_id: instance_id.into(),
            template_id,
            values: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Node> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn leaf_count(&self) -> usize {
        self.values.iter().map(|(_, n)| n.leaf_count()).sum()
    }
}

fn parse_literal(e: &[(String, Json)], path: &str) -> Result<LiteralValue, ModelError> {
    for (k, _) in e {
        if k != "@value" && k != "@type" {
            return Err(ModelError::violation(
                sub(path, k),
                alloc::format!("key `{k}` not allowed in a value object"),
            ));
        }
    }
    let raw = lookup(e, "@value").unwrap_or(&Json::Null);
    let value = match raw {
        Json::String(s) => LiteralData::Text(s.clone()),
        Json::Number(n) => LiteralData::Number(n.clone()),
        other => {
            return Err(ModelError::violation(
                sub(path, "@value"),
                alloc::format!("@value must be a string or number, found {}", other.kind_name()),
            ))
        }
    };
    let datatype = match lookup(e, "@type") {
        None => match value {
            LiteralData::Number(_) => Datatype::Number,
            LiteralData::Text(_) => Datatype::String,
        },
        Some(Json::String(t)) => match t.as_str() {
            "xsd:decimal" => Datatype::Number,
            "xsd:date" => Datatype::Date,
            "xsd:string" => Datatype::String,
            other => {
                return Err(ModelError::violation(
                    sub(path, "@type"),
                    alloc::format!("unsupported datatype `{other}`"),
                ))
            }
        },
        Some(_) => return Err(ModelError::violation(sub(path, "@type"), "@type must be a string")),
    };
    Ok(LiteralValue { value, datatype })
}

fn parse_term(e: &[(String, Json)], path: &str) -> Result<TermValue, ModelError> {
    for (k, _) in e {
        if k != "@id" && k != "rdfs:label" {
            return Err(ModelError::violation(
                sub(path, k),
                alloc::format!("key `{k}` not allowed in a term value"),
            ));
        }
    }
    let iri = match lookup(e, "@id") {
        Some(Json::String(s)) if is_absolute_iri(s) => s.clone(),
        Some(_) => return Err(ModelError::violation(sub(path, "@id"), "@id must be an absolute IRI")),
        None => return Err(ModelError::violation(path, "term value is missing @id")),
    };
    let label = match lookup(e, "rdfs:label") {
        None => None,
        Some(Json::String(s)) => Some(s.clone()),
        Some(_) => {
            return Err(ModelError::violation(
                sub(path, "rdfs:label"),
                "rdfs:label must be a string",
            ))
        }
    };
    Ok(TermValue { iri, label })
}

fn parse_node(value: &Json, path: &str, in_list: bool) -> Result<Node, ModelError> {
    match value {
        Json::String(s) => Ok(Node::Literal(LiteralValue::text(s.as_str()))),
        Json::Number(n) => Ok(Node::Literal(LiteralValue::number(n.clone()))),
        Json::Array(items) => {
            if in_list {
                return Err(ModelError::violation(path, "nested arrays are not allowed"));
            }
            items
                .iter()
                .enumerate()
                .map(|(i, item)| parse_node(item, &sub_index(path, i), true))
                .collect::<Result<Vec<_>, _>>()
                .map(Node::List)
        }
        Json::Object(e) => {
            if lookup(e, "@value").is_some() {
                parse_literal(e, path).map(Node::Literal)
            } else if lookup(e, "@id").is_some() || lookup(e, "rdfs:label").is_some() {
                parse_term(e, path).map(Node::Term)
            } else {
                parse_fields(e, path).map(Node::Element)
            }
        }
        other => Err(ModelError::violation(
            path,
            alloc::format!("{} is not a field value", other.kind_name()),
        )),
    }
}

fn parse_fields(e: &[(String, Json)], path: &str) -> Result<Vec<(String, Node)>, ModelError> {
    e.iter()
        .map(|(k, v)| {
            let p = sub(path, k);
            if k.starts_with('@') {
                return Err(ModelError::violation(
                    p,
                    alloc::format!("unsupported JSON-LD keyword `{k}`"),
                ));
            }
            Ok((k.clone(), parse_node(v, &p, false)?))
        })
        .collect()
}

/// Parses an instance document. Unknown field names are kept; validation
/// reports them.
pub fn parse_instance(doc: &str) -> Result<MetadataInstance, ModelError> {
    let value = json::parse(doc).map_err(|e| ModelError::MalformedJson { message: e.0 })?;
    let root = as_object(&value, "")?;
    let mut context = Vec::new();
    if let Some(ctx) = lookup(root, "@context") {
        for (k, v) in as_object(ctx, "/@context")? {
            let s = v
                .as_str()
                .ok_or_else(|| ModelError::violation(sub("/@context", k), "context entries must be IRI strings"))?;
            if k == "rdfs" || k == "xsd" {
                continue;
            }
            context.push((k.clone(), s.to_owned()));
        }
    }
    let instance_id = match lookup(root, "@id") {
        Some(Json::String(s)) if is_absolute_iri(s) => s.clone(),
        Some(_) => return Err(ModelError::violation("/@id", "@id must be an absolute IRI")),
        None => return Err(ModelError::violation("", "instance is missing @id")),
    };
    let type_text = match lookup(root, "@type") {
        Some(Json::String(s)) => s.as_str(),
        Some(_) => return Err(ModelError::violation("/@type", "@type must be a string")),
        None => return Err(ModelError::violation("", "instance is missing @type")),
    };
    let template_id = type_text
        .strip_prefix(TEMPLATE_IRI_PREFIX)
        .and_then(ResourceId::parse)
        .ok_or_else(|| ModelError::violation("/@type", alloc::format!("@type must be {TEMPLATE_IRI_PREFIX}<id>")))?;
    let mut values = Vec::new();
    for (k, v) in root {
        if matches!(k.as_str(), "@context" | "@id" | "@type") {
            continue;
        }
        let p = sub("", k);
        if k.starts_with('@') {
            return Err(ModelError::violation(
                p,
                alloc::format!("unsupported JSON-LD keyword `{k}`"),
            ));
        }
        values.push((k.clone(), parse_node(v, &p, false)?));
    }
    Ok(MetadataInstance {
        context,
        instance_id,
        template_id,
        values,
    })
}

fn node_json(node: &Node) -> Json {
    match node {
        Node::Literal(lit) => {
            let mut o = alloc::vec![(
                "@value".to_owned(),
                match &lit.value {
                    LiteralData::Text(s) => Json::str(s.as_str()),
                    LiteralData::Number(n) => Json::Number(n.clone()),
                }
            )];
            let marker = match (lit.datatype, &lit.value) {
                (Datatype::Number, _) => Some("xsd:decimal"),
                (Datatype::Date, _) => Some("xsd:date"),
                (Datatype::String, LiteralData::Number(_)) => Some("xsd:string"),
                (Datatype::String, LiteralData::Text(_)) => None,
            };
            if let Some(m) = marker {
                o.push(("@type".to_owned(), Json::str(m)));
            }
            Json::Object(o)
        }
        Node::Term(t) => {
            let mut o = alloc::vec![("@id".to_owned(), Json::str(t.iri.as_str()))];
            if let Some(label) = &t.label {
                o.push(("rdfs:label".to_owned(), Json::str(label.as_str())));
            }
            Json::Object(o)
        }
        Node::List(items) => Json::Array(items.iter().map(node_json).collect()),
        Node::Element(entries) => Json::Object(entries.iter().map(|(k, v)| (k.clone(), node_json(v))).collect()),
    }
}

pub fn instance_to_json(m: &MetadataInstance) -> Json {
    let mut ctx = alloc::vec![
        ("rdfs".to_owned(), Json::str(RDFS_NS)),
        ("xsd".to_owned(), Json::str(XSD_NS)),
    ];
    ctx.extend(m.context.iter().map(|(k, v)| (k.clone(), Json::str(v.as_str()))));
    let mut o = alloc::vec![
        ("@context".to_owned(), Json::Object(ctx)),
        ("@id".to_owned(), Json::str(m.instance_id.as_str())),
        ("@type".to_owned(), Json::String(template_iri(&m.template_id))),
    ];
    o.extend(m.values.iter().map(|(k, v)| (k.clone(), node_json(v))));
    Json::Object(o)
}

/// Canonical JSON-LD text of an instance.
pub fn serialize_instance(m: &MetadataInstance) -> String {
    instance_to_json(m).to_pretty()
}
