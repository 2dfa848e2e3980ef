use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::*;
use crate::decimal::Decimal;
use crate::error::ModelError;
use crate::id::is_absolute_iri;
use crate::json::{self, escape_pointer_token, Json};

pub(crate) type Entries = [(String, Json)];

pub(crate) fn sub(path: &str, key: &str) -> String {
    alloc::format!("{path}/{}", escape_pointer_token(key))
}

pub(crate) fn sub_index(path: &str, index: usize) -> String {
    alloc::format!("{path}/{index}")
}

pub(crate) fn as_object<'a>(value: &'a Json, path: &str) -> Result<&'a Entries, ModelError> {
    value
        .as_object()
        .ok_or_else(|| ModelError::violation(path, alloc::format!("expected object, found {}", value.kind_name())))
}

fn as_array<'a>(value: &'a Json, path: &str) -> Result<&'a [Json], ModelError> {
    value
        .as_array()
        .ok_or_else(|| ModelError::violation(path, alloc::format!("expected array, found {}", value.kind_name())))
}

pub(crate) fn lookup<'a>(entries: &'a Entries, key: &str) -> Option<&'a Json> {
    entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

fn check_keys(entries: &Entries, allowed: &[&str], path: &str, what: &str) -> Result<(), ModelError> {
    for (key, _) in entries {
        if !allowed.contains(&key.as_str()) {
            return Err(ModelError::violation(
                sub(path, key),
                alloc::format!("key `{key}` is not allowed in {what}"),
            ));
        }
    }
    Ok(())
}

fn string_at(value: &Json, path: &str) -> Result<String, ModelError> {
    value
        .as_str()
        .map(ToOwned::to_owned)
        .ok_or_else(|| ModelError::violation(path, alloc::format!("expected string, found {}", value.kind_name())))
}

fn req_string(entries: &Entries, key: &str, path: &str) -> Result<String, ModelError> {
    let value = lookup(entries, key)
        .ok_or_else(|| ModelError::violation(path, alloc::format!("missing required key `{key}`")))?;
    string_at(value, &sub(path, key))
}

fn opt_string(entries: &Entries, key: &str, path: &str) -> Result<Option<String>, ModelError> {
    lookup(entries, key).map(|v| string_at(v, &sub(path, key))).transpose()
}

fn iri_at(value: &Json, path: &str) -> Result<String, ModelError> {
    let s = string_at(value, path)?;
    if !is_absolute_iri(&s) {
        return Err(ModelError::violation(
            path,
            alloc::format!("`{s}` is not an absolute IRI"),
        ));
    }
    Ok(s)
}

fn req_iri(entries: &Entries, key: &str, path: &str) -> Result<String, ModelError> {
    let value = lookup(entries, key)
        .ok_or_else(|| ModelError::violation(path, alloc::format!("missing required key `{key}`")))?;
    iri_at(value, &sub(path, key))
}

fn opt_iri(entries: &Entries, key: &str, path: &str) -> Result<Option<String>, ModelError> {
    lookup(entries, key).map(|v| iri_at(v, &sub(path, key))).transpose()
}

fn opt_bool(entries: &Entries, key: &str, path: &str) -> Result<Option<bool>, ModelError> {
    match lookup(entries, key) {
        None => Ok(None),
        Some(Json::Bool(b)) => Ok(Some(*b)),
        Some(other) => Err(ModelError::violation(
            sub(path, key),
            alloc::format!("expected boolean, found {}", other.kind_name()),
        )),
    }
}

fn opt_u64(entries: &Entries, key: &str, path: &str) -> Result<Option<u64>, ModelError> {
    match lookup(entries, key) {
        None => Ok(None),
        Some(Json::Number(n)) if n.as_u64().is_some() => Ok(n.as_u64()),
        Some(_) => Err(ModelError::violation(sub(path, key), "expected non-negative integer")),
    }
}

fn opt_number(entries: &Entries, key: &str, path: &str) -> Result<Option<Number>, ModelError> {
    match lookup(entries, key) {
        None => Ok(None),
        Some(Json::Number(n)) => Ok(Some(n.clone())),
        Some(other) => Err(ModelError::violation(
            sub(path, key),
            alloc::format!("expected number, found {}", other.kind_name()),
        )),
    }
}

fn parse_id(entries: &Entries, key: &str, path: &str) -> Result<ResourceId, ModelError> {
    let s = req_string(entries, key, path)?;
    ResourceId::parse(&s)
        .ok_or_else(|| ModelError::violation(sub(path, key), alloc::format!("`{s}` is not a lowercase UUID")))
}

fn parse_child_name(entries: &Entries, path: &str) -> Result<String, ModelError> {
    let name = req_string(entries, "name", path)?;
    if !is_valid_child_name(&name) {
        return Err(ModelError::violation(
            sub(path, "name"),
            alloc::format!("`{name}` is not a valid field name"),
        ));
    }
    Ok(name)
}

fn parse_annotations(entries: &Entries, path: &str) -> Result<Vec<Annotation>, ModelError> {
    let Some(value) = lookup(entries, "annotations") else {
        return Ok(Vec::new());
    };
    let path = sub(path, "annotations");
    as_array(value, &path)?
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let p = sub_index(&path, i);
            let e = as_object(item, &p)?;
            check_keys(e, &["propertyIri", "termIri", "termLabel"], &p, "an annotation")?;
            Ok(Annotation {
                property_iri: req_iri(e, "propertyIri", &p)?,
                term_iri: req_iri(e, "termIri", &p)?,
                term_label: req_string(e, "termLabel", &p)?,
            })
        })
        .collect()
}

fn parse_cardinality(value: &Json, path: &str) -> Result<Cardinality, ModelError> {
    let e = as_object(value, path)?;
    check_keys(e, &["min", "max"], path, "a cardinality")?;
    let min = opt_u64(e, "min", path)?.unwrap_or(0);
    let min = u32::try_from(min).map_err(|_| ModelError::violation(sub(path, "min"), "min too large"))?;
    let max = match lookup(e, "max") {
        None => Some(1),
        Some(Json::String(s)) if s == "*" => None,
        Some(Json::Number(n)) => {
            let m = n
                .as_u64()
                .filter(|m| *m >= 1)
                .and_then(|m| u32::try_from(m).ok())
                .ok_or_else(|| ModelError::violation(sub(path, "max"), "max must be a positive integer or \"*\""))?;
            Some(m)
        }
        Some(_) => {
            return Err(ModelError::violation(
                sub(path, "max"),
                "max must be a positive integer or \"*\"",
            ))
        }
    };
    if let Some(m) = max {
        if min > m {
            return Err(ModelError::violation(path, "min exceeds max"));
        }
    }
    Ok(Cardinality { min, max })
}

fn parse_sources(value: &Json, path: &str) -> Result<ValueConstraintSet, ModelError> {
    let items = as_array(value, path)?;
    let mut sources = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let p = sub_index(path, i);
        let e = as_object(item, &p)?;
        if e.len() != 1 {
            return Err(ModelError::violation(&p, "a constraint source has exactly one key"));
        }
        let (key, body) = &e[0];
        let bp = sub(&p, key);
        let b = as_object(body, &bp)?;
        let source = match key.as_str() {
            "ontologyBranch" => {
                check_keys(b, &["source", "rootIri", "includeRoot"], &bp, "an ontology branch")?;
                let source = req_string(b, "source", &bp)?;
                if source.is_empty() {
                    return Err(ModelError::violation(sub(&bp, "source"), "empty ontology acronym"));
                }
                ConstraintSource::OntologyBranch {
                    source,
                    root_iri: req_iri(b, "rootIri", &bp)?,
                    include_root: opt_bool(b, "includeRoot", &bp)?.unwrap_or(false),
                }
            }
            "valueSet" => {
                check_keys(b, &["valueSetId"], &bp, "a value set source")?;
                ConstraintSource::ValueSet {
                    value_set_id: parse_id(b, "valueSetId", &bp)?,
                }
            }
            "literalList" => {
                check_keys(b, &["entries"], &bp, "a literal list")?;
                let ep = sub(&bp, "entries");
                let raw =
                    lookup(b, "entries").ok_or_else(|| ModelError::violation(&bp, "missing required key `entries`"))?;
                let mut entries = Vec::new();
                let mut labels = BTreeSet::new();
                for (j, entry) in as_array(raw, &ep)?.iter().enumerate() {
                    let jp = sub_index(&ep, j);
                    let eo = as_object(entry, &jp)?;
                    check_keys(eo, &["label", "iri"], &jp, "a literal entry")?;
                    let label = req_string(eo, "label", &jp)?;
                    if !labels.insert(label.clone()) {
                        return Err(ModelError::violation(
                            sub(&jp, "label"),
                            alloc::format!("duplicate literal label `{label}`"),
                        ));
                    }
                    entries.push(LiteralEntry {
                        label,
                        iri: opt_iri(eo, "iri", &jp)?,
                    });
                }
                ConstraintSource::LiteralList { entries }
            }
            other => {
                return Err(ModelError::violation(
                    &bp,
                    alloc::format!("unknown constraint source `{other}`"),
                ))
            }
        };
        sources.push(source);
    }
    Ok(ValueConstraintSet { sources })
}

fn parse_text_constraints(e: &Entries, path: &str, allow_pattern: bool) -> Result<TextConstraints, ModelError> {
    let allowed: &[&str] = if allow_pattern {
        &["minLength", "maxLength", "pattern"]
    } else {
        &["minLength", "maxLength"]
    };
    check_keys(e, allowed, path, "these constraints")?;
    let min_length = opt_u64(e, "minLength", path)?;
    let max_length = opt_u64(e, "maxLength", path)?;
    if let (Some(lo), Some(hi)) = (min_length, max_length) {
        if lo > hi {
            return Err(ModelError::violation(path, "minLength exceeds maxLength"));
        }
    }
    let pattern = match opt_string(e, "pattern", path)? {
        Some(src) => Some(Pattern::new(&src).map_err(|m| ModelError::violation(sub(path, "pattern"), m))?),
        None => None,
    };
    Ok(TextConstraints {
        min_length,
        max_length,
        pattern,
    })
}

fn parse_field_kind(field_type: FieldType, value: Option<&Json>, path: &str) -> Result<FieldKind, ModelError> {
    let empty: &Entries = &[];
    let e = match value {
        Some(v) => as_object(v, path)?,
        None => empty,
    };
    Ok(match field_type {
        FieldType::Text => FieldKind::Text(parse_text_constraints(e, path, true)?),
        FieldType::Paragraph => FieldKind::Paragraph(parse_text_constraints(e, path, false)?),
        FieldType::Number => {
            check_keys(e, &["minimum", "maximum", "decimalPlaces"], path, "number constraints")?;
            let minimum = opt_number(e, "minimum", path)?;
            let maximum = opt_number(e, "maximum", path)?;
            if let (Some(lo), Some(hi)) = (&minimum, &maximum) {
                if Decimal::from_number(lo) > Decimal::from_number(hi) {
                    return Err(ModelError::violation(path, "minimum exceeds maximum"));
                }
            }
            let decimal_places = opt_u64(e, "decimalPlaces", path)?
                .map(|d| {
                    u32::try_from(d).ok().filter(|d| *d <= 30).ok_or_else(|| {
                        ModelError::violation(sub(path, "decimalPlaces"), "decimalPlaces must be at most 30")
                    })
                })
                .transpose()?;
            FieldKind::Number(NumberConstraints {
                minimum,
                maximum,
                decimal_places,
            })
        }
        FieldType::Date => {
            check_keys(e, &[], path, "date constraints")?;
            FieldKind::Date
        }
        FieldType::Term => {
            check_keys(e, &["sources"], path, "term constraints")?;
            let set = match lookup(e, "sources") {
                Some(v) => parse_sources(v, &sub(path, "sources"))?,
                None => ValueConstraintSet::default(),
            };
            if set.sources.is_empty() {
                return Err(ModelError::violation(
                    path,
                    "a term field needs at least one constraint source",
                ));
            }
            FieldKind::Term(set)
        }
    })
}

const FIELD_KEYS: &[&str] = &[
    "name",
    "fieldType",
    "required",
    "cardinality",
    "propertyIri",
    "constraints",
    "description",
    "annotations",
];

fn parse_field(e: &Entries, path: &str) -> Result<FieldSpec, ModelError> {
    check_keys(e, FIELD_KEYS, path, "a field")?;
    let name = parse_child_name(e, path)?;
    let ft_text = req_string(e, "fieldType", path)?;
    let field_type = FieldType::parse(&ft_text).ok_or_else(|| {
        ModelError::violation(sub(path, "fieldType"), alloc::format!("unknown field type `{ft_text}`"))
    })?;
    let required = opt_bool(e, "required", path)?.unwrap_or(false);
    let cardinality = match lookup(e, "cardinality") {
        Some(v) => parse_cardinality(v, &sub(path, "cardinality"))?,
        None => Cardinality::default_for(required),
    };
    Ok(FieldSpec {
        name,
        kind: parse_field_kind(field_type, lookup(e, "constraints"), &sub(path, "constraints"))?,
        required,
        cardinality,
        property_iri: opt_iri(e, "propertyIri", path)?,
        description: opt_string(e, "description", path)?,
        annotations: parse_annotations(e, path)?,
    })
}

const TEMPLATE_KEYS: &[&str] = &[
    "id",
    "kind",
    "name",
    "description",
    "propertyIri",
    "cardinality",
    "annotations",
    "children",
    "field",
    "version",
];

fn parse_template_value(value: &Json, path: &str, nested: bool) -> Result<Template, ModelError> {
    let e = as_object(value, path)?;
    check_keys(e, TEMPLATE_KEYS, path, "a template")?;
    let id = parse_id(e, "id", path)?;
    let kind_text = req_string(e, "kind", path)?;
    let kind = TemplateKind::parse(&kind_text)
        .ok_or_else(|| ModelError::violation(sub(path, "kind"), alloc::format!("unknown kind `{kind_text}`")))?;
    if nested && kind != TemplateKind::Element {
        return Err(ModelError::violation(
            sub(path, "kind"),
            "only elements can be embedded",
        ));
    }
    let name = match kind {
        TemplateKind::Template => {
            let name = req_string(e, "name", path)?;
            if name.trim().is_empty() {
                return Err(ModelError::violation(sub(path, "name"), "name must not be empty"));
            }
            name
        }
        _ => parse_child_name(e, path)?,
    };
    let mut t = Template::new(id, kind, name);
    t.description = opt_string(e, "description", path)?;
    t.annotations = parse_annotations(e, path)?;
    t.version = opt_u64(e, "version", path)?.unwrap_or(0);
    if kind == TemplateKind::Element {
        t.property_iri = opt_iri(e, "propertyIri", path)?;
        t.cardinality = lookup(e, "cardinality")
            .map(|v| parse_cardinality(v, &sub(path, "cardinality")))
            .transpose()?;
    } else {
        for key in ["propertyIri", "cardinality"] {
            if lookup(e, key).is_some() {
                return Err(ModelError::violation(
                    sub(path, key),
                    alloc::format!("`{key}` is only allowed on elements"),
                ));
            }
        }
    }
    if kind == TemplateKind::Field {
        let fp = sub(path, "field");
        let fv = lookup(e, "field")
            .ok_or_else(|| ModelError::violation(path, "a field resource needs a `field` payload"))?;
        match lookup(e, "children") {
            Some(Json::Array(items)) if items.is_empty() => {}
            None => {}
            Some(_) => {
                return Err(ModelError::violation(
                    sub(path, "children"),
                    "a field resource has no children",
                ))
            }
        }
        let spec = parse_field(as_object(fv, &fp)?, &fp)?;
        if spec.name != t.name {
            return Err(ModelError::violation(
                sub(&fp, "name"),
                "field name must equal the resource name",
            ));
        }
        t.field = Some(spec);
        return Ok(t);
    }
    if lookup(e, "field").is_some() {
        return Err(ModelError::violation(
            sub(path, "field"),
            "only field resources carry a `field` payload",
        ));
    }
    let cp = sub(path, "children");
    let items = match lookup(e, "children") {
        Some(v) => as_array(v, &cp)?,
        None => &[],
    };
    let mut seen = BTreeSet::new();
    for (i, item) in items.iter().enumerate() {
        let p = sub_index(&cp, i);
        let ce = as_object(item, &p)?;
        let child = if lookup(ce, "ref").is_some() {
            check_keys(ce, &["ref", "cardinality", "propertyIri"], &p, "a reference")?;
            Child::Reference(Reference {
                ref_id: parse_id(ce, "ref", &p)?,
                cardinality: match lookup(ce, "cardinality") {
                    Some(v) => parse_cardinality(v, &sub(&p, "cardinality"))?,
                    None => Cardinality::default_for(false),
                },
                property_iri: opt_iri(ce, "propertyIri", &p)?,
            })
        } else if lookup(ce, "kind").is_some() {
            Child::Element(parse_template_value(item, &p, true)?)
        } else {
            Child::Field(parse_field(ce, &p)?)
        };
        let name = match &child {
            Child::Field(f) => Some(&f.name),
            Child::Element(el) => Some(&el.name),
            Child::Reference(_) => None,
        };
        if let Some(name) = name {
            if !seen.insert(name.clone()) {
                return Err(ModelError::violation(
                    sub(&p, "name"),
                    alloc::format!("duplicate sibling name `{name}`"),
                ));
            }
        }
        t.children.push(child);
    }
    Ok(t)
}

/// Parses a template, element or field resource document.
pub fn parse_template(doc: &str) -> Result<Template, ModelError> {
    let value = json::parse(doc).map_err(|e| ModelError::MalformedJson { message: e.0 })?;
    parse_template_value(&value, "", false)
}

fn cardinality_json(c: &Cardinality) -> Json {
    json::object([
        ("min", Json::Number(c.min.into())),
        (
            "max",
            match c.max {
                Some(m) => Json::Number(m.into()),
                None => Json::str("*"),
            },
        ),
    ])
}

fn annotations_json(list: &[Annotation]) -> Json {
    Json::Array(
        list.iter()
            .map(|a| {
                json::object([
                    ("propertyIri", Json::str(a.property_iri.as_str())),
                    ("termIri", Json::str(a.term_iri.as_str())),
                    ("termLabel", Json::str(a.term_label.as_str())),
                ])
            })
            .collect(),
    )
}

fn sources_json(set: &ValueConstraintSet) -> Json {
    Json::Array(
        set.sources
            .iter()
            .map(|s| match s {
                ConstraintSource::OntologyBranch {
                    source,
                    root_iri,
                    include_root,
                } => json::object([(
                    "ontologyBranch",
                    json::object([
                        ("source", Json::str(source.as_str())),
                        ("rootIri", Json::str(root_iri.as_str())),
                        ("includeRoot", Json::Bool(*include_root)),
                    ]),
                )]),
                ConstraintSource::ValueSet { value_set_id } => json::object([(
                    "valueSet",
                    json::object([("valueSetId", Json::str(value_set_id.as_str()))]),
                )]),
                ConstraintSource::LiteralList { entries } => json::object([(
                    "literalList",
                    json::object([(
                        "entries",
                        Json::Array(
                            entries
                                .iter()
                                .map(|en| {
                                    let mut o = alloc::vec![("label".to_owned(), Json::str(en.label.as_str()))];
                                    if let Some(iri) = &en.iri {
                                        o.push(("iri".to_owned(), Json::str(iri.as_str())));
                                    }
                                    Json::Object(o)
                                })
                                .collect(),
                        ),
                    )]),
                )]),
            })
            .collect(),
    )
}

fn text_constraints_json(c: &TextConstraints) -> Vec<(String, Json)> {
    let mut o = Vec::new();
    if let Some(v) = c.min_length {
        o.push(("minLength".to_owned(), Json::Number(v.into())));
    }
    if let Some(v) = c.max_length {
        o.push(("maxLength".to_owned(), Json::Number(v.into())));
    }
    if let Some(p) = &c.pattern {
        o.push(("pattern".to_owned(), Json::str(p.as_str())));
    }
    o
}

fn constraints_json(kind: &FieldKind) -> Json {
    Json::Object(match kind {
        FieldKind::Text(c) | FieldKind::Paragraph(c) => text_constraints_json(c),
        FieldKind::Number(c) => {
            let mut o = Vec::new();
            if let Some(v) = &c.minimum {
                o.push(("minimum".to_owned(), Json::Number(v.clone())));
            }
            if let Some(v) = &c.maximum {
                o.push(("maximum".to_owned(), Json::Number(v.clone())));
            }
            if let Some(v) = c.decimal_places {
                o.push(("decimalPlaces".to_owned(), Json::Number(v.into())));
            }
            o
        }
        FieldKind::Date => Vec::new(),
        FieldKind::Term(set) => alloc::vec![("sources".to_owned(), sources_json(set))],
    })
}

pub(crate) fn field_json(f: &FieldSpec) -> Json {
    let mut o: Vec<(String, Json)> = alloc::vec![
        ("name".to_owned(), Json::str(f.name.as_str())),
        ("fieldType".to_owned(), Json::str(f.field_type().as_str())),
        ("required".to_owned(), Json::Bool(f.required)),
        ("cardinality".to_owned(), cardinality_json(&f.cardinality)),
    ];
    if let Some(iri) = &f.property_iri {
        o.push(("propertyIri".to_owned(), Json::str(iri.as_str())));
    }
    o.push(("constraints".to_owned(), constraints_json(&f.kind)));
    if let Some(d) = &f.description {
        o.push(("description".to_owned(), Json::str(d.as_str())));
    }
    o.push(("annotations".to_owned(), annotations_json(&f.annotations)));
    Json::Object(o)
}

/// Canonical JSON tree for a template.
pub fn template_to_json(t: &Template) -> Json {
    let mut o: Vec<(String, Json)> = alloc::vec![
        ("id".to_owned(), Json::str(t.id.as_str())),
        ("kind".to_owned(), Json::str(t.kind.as_str())),
        ("name".to_owned(), Json::str(t.name.as_str())),
    ];
    if let Some(d) = &t.description {
        o.push(("description".to_owned(), Json::str(d.as_str())));
    }
    if let Some(iri) = &t.property_iri {
        o.push(("propertyIri".to_owned(), Json::str(iri.as_str())));
    }
    if let Some(c) = &t.cardinality {
        o.push(("cardinality".to_owned(), cardinality_json(c)));
    }
    o.push(("annotations".to_owned(), annotations_json(&t.annotations)));
    match &t.field {
        Some(f) => o.push(("field".to_owned(), field_json(f))),
        None => {
            let children = t
                .children
                .iter()
                .map(|c| match c {
                    Child::Field(f) => field_json(f),
                    Child::Element(e) => template_to_json(e),
                    Child::Reference(r) => {
                        let mut ro = alloc::vec![
                            ("ref".to_owned(), Json::str(r.ref_id.as_str())),
                            ("cardinality".to_owned(), cardinality_json(&r.cardinality)),
                        ];
                        if let Some(iri) = &r.property_iri {
                            ro.push(("propertyIri".to_owned(), Json::str(iri.as_str())));
                        }
                        Json::Object(ro)
                    }
                })
                .collect();
            o.push(("children".to_owned(), Json::Array(children)));
        }
    }
    o.push(("version".to_owned(), Json::Number(t.version.into())));
    Json::Object(o)
}

/// Canonical text: fixed key order, two-space indent, LF endings.
pub fn serialize_template(t: &Template) -> String {
    template_to_json(t).to_pretty()
}
