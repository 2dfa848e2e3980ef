use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde_json::Number;

use crate::json::{self, Json};
use crate::model::{
    template_iri, FieldKind, FieldSpec, ResolvedNode, ResolvedTemplate, TextConstraints, ValueConstraintSet,
};

pub const DRAFT_07: &str = "http://json-schema.org/draft-07/schema#";
pub const IRI_PATTERN: &str = "^[A-Za-z][A-Za-z0-9+.-]*:";
pub const DATE_PATTERN: &str = "^\\d{4}-\\d{2}-\\d{2}$";

/// Compiled form of a resolved template.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSchema {
    /// Draft-07 JSON Schema for the canonical instance document.
    pub schema_doc: String,
    /// Field name to property IRI; first occurrence wins for repeated names.
    pub context_map: Vec<(String, String)>,
    /// Slash path of every term field to its constraint set.
    pub term_fields: BTreeMap<String, ValueConstraintSet>,
}

/// A value must be present when the field is required or needs at least one item.
pub(crate) fn presence_required(node: &ResolvedNode) -> bool {
    node.required() || node.cardinality().min >= 1
}

/// `10^-places` as a JSON number (`2` gives `0.01`).
pub fn multiple_of(places: u32) -> Number {
    if places == 0 {
        return 1u64.into();
    }
    let mut text = String::from("0.");
    for _ in 1..places {
        text.push('0');
    }
    text.push('1');
    serde_json::from_str(&text).unwrap_or_else(|_| 1u64.into())
}

fn text_value_schema(c: &TextConstraints) -> Json {
    let mut o = alloc::vec![("type".to_owned(), Json::str("string"))];
    if let Some(v) = c.min_length {
        o.push(("minLength".to_owned(), Json::Number(v.into())));
    }
    if let Some(v) = c.max_length {
        o.push(("maxLength".to_owned(), Json::Number(v.into())));
    }
    if let Some(p) = &c.pattern {
        o.push(("pattern".to_owned(), Json::str(p.as_str())));
    }
    Json::Object(o)
}

fn literal_wrapper(value_schema: Json, markers: &[&str]) -> Json {
    json::object([
        ("type", Json::str("object")),
        (
            "properties",
            json::object([
                ("@value", value_schema),
                (
                    "@type",
                    json::object([("enum", Json::Array(markers.iter().map(|m| Json::str(*m)).collect()))]),
                ),
            ]),
        ),
        ("required", Json::Array(alloc::vec![Json::str("@value")])),
        ("additionalProperties", Json::Bool(false)),
    ])
}

/// Schema of the `@value` member for a literal field (`None` for term fields).
pub fn value_schema(field: &FieldSpec) -> Option<Json> {
    Some(match &field.kind {
        FieldKind::Text(c) | FieldKind::Paragraph(c) => text_value_schema(c),
        FieldKind::Number(c) => {
            let mut o = alloc::vec![("type".to_owned(), Json::str("number"))];
            if let Some(v) = &c.minimum {
                o.push(("minimum".to_owned(), Json::Number(v.clone())));
            }
            if let Some(v) = &c.maximum {
                o.push(("maximum".to_owned(), Json::Number(v.clone())));
            }
            if let Some(p) = c.decimal_places {
                o.push(("multipleOf".to_owned(), Json::Number(multiple_of(p))));
            }
            Json::Object(o)
        }
        FieldKind::Date => json::object([
            ("type", Json::str("string")),
            ("format", Json::str("date")),
            ("pattern", Json::str(DATE_PATTERN)),
        ]),
        FieldKind::Term(_) => return None,
    })
}

fn single_field_schema(field: &FieldSpec) -> Json {
    match &field.kind {
        FieldKind::Term(_) => json::object([
            ("type", Json::str("object")),
            (
                "properties",
                json::object([
                    (
                        "@id",
                        json::object([("type", Json::str("string")), ("pattern", Json::str(IRI_PATTERN))]),
                    ),
                    ("rdfs:label", json::object([("type", Json::str("string"))])),
                ]),
            ),
            (
                "required",
                Json::Array(alloc::vec![Json::str("@id"), Json::str("rdfs:label")]),
            ),
            ("additionalProperties", Json::Bool(false)),
        ]),
        kind => {
            let markers: &[&str] = match kind {
                FieldKind::Number(_) => &["xsd:decimal"],
                FieldKind::Date => &["xsd:date", "xsd:string"],
                _ => &["xsd:string"],
            };
            literal_wrapper(value_schema(field).unwrap_or(Json::Object(Vec::new())), markers)
        }
    }
}

fn node_schema(node: &ResolvedNode) -> Json {
    let single = match node {
        ResolvedNode::Field(f) => single_field_schema(f),
        ResolvedNode::Element(e) => object_schema(&e.children, Vec::new(), Vec::new()),
    };
    let card = node.cardinality();
    if !card.is_multi() {
        return single;
    }
    let mut o = alloc::vec![
        ("type".to_owned(), Json::str("array")),
        ("items".to_owned(), single),
        ("minItems".to_owned(), Json::Number(card.min.into())),
    ];
    if let Some(max) = card.max {
        o.push(("maxItems".to_owned(), Json::Number(max.into())));
    }
    Json::Object(o)
}

fn object_schema(children: &[ResolvedNode], mut properties: Vec<(String, Json)>, mut required: Vec<Json>) -> Json {
    for child in children {
        properties.push((child.name().to_owned(), node_schema(child)));
        if presence_required(child) {
            required.push(Json::str(child.name()));
        }
    }
    let mut o = alloc::vec![
        ("type".to_owned(), Json::str("object")),
        ("properties".to_owned(), Json::Object(properties)),
    ];
    if !required.is_empty() {
        o.push(("required".to_owned(), Json::Array(required)));
    }
    o.push(("additionalProperties".to_owned(), Json::Bool(false)));
    Json::Object(o)
}

/// Draft-07 schema tree for instances of `rt`.
pub fn schema_json(rt: &ResolvedTemplate) -> Json {
    let header = alloc::vec![
        ("@context".to_owned(), json::object([("type", Json::str("object"))])),
        (
            "@id".to_owned(),
            json::object([("type", Json::str("string")), ("pattern", Json::str(IRI_PATTERN))]),
        ),
        (
            "@type".to_owned(),
            json::object([("const", Json::String(template_iri(&rt.id)))])
        ),
    ];
    let body = object_schema(&rt.children, header, alloc::vec![Json::str("@id"), Json::str("@type")]);
    let mut o = alloc::vec![
        ("$schema".to_owned(), Json::str(DRAFT_07)),
        ("title".to_owned(), Json::str(rt.name.as_str())),
    ];
    if let Some(d) = &rt.description {
        o.push(("description".to_owned(), Json::str(d.as_str())));
    }
    if let Json::Object(entries) = body {
        o.extend(entries);
    }
    Json::Object(o)
}

fn collect(children: &[ResolvedNode], prefix: &str, out: &mut ValidationSchema) {
    for child in children {
        let path = if prefix.is_empty() {
            child.name().to_owned()
        } else {
            alloc::format!("{prefix}/{}", child.name())
        };
        if let Some(iri) = child.property_iri() {
            if !out.context_map.iter().any(|(k, _)| k == child.name()) {
                out.context_map.push((child.name().to_owned(), iri.to_owned()));
            }
        }
        match child {
            ResolvedNode::Field(f) => {
                if let FieldKind::Term(set) = &f.kind {
                    out.term_fields.insert(path, set.clone());
                }
            }
            ResolvedNode::Element(e) => collect(&e.children, &path, out),
        }
    }
}

/// Compiles a resolved template. Deterministic: equal inputs give
/// byte-identical `schema_doc`.
pub fn compile(rt: &ResolvedTemplate) -> ValidationSchema {
    let mut out = ValidationSchema {
        schema_doc: schema_json(rt).to_pretty(),
        context_map: Vec::new(),
        term_fields: BTreeMap::new(),
    };
    collect(&rt.children, "", &mut out);
    out
}
