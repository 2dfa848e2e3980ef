use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::schema::presence_required;
use crate::decimal::Decimal;
use crate::json::{self, escape_pointer_token, Json};
use crate::model::{
    Datatype, FieldKind, LiteralData, LiteralValue, MetadataInstance, Node, NumberConstraints, ResolvedNode,
    ResolvedTemplate, TextConstraints, ValueConstraintSet,
};

/// Decides whether a term IRI satisfies a constraint set.
pub trait TermMembership {
    fn is_member(&self, constraint: &ValueConstraintSet, iri: &str) -> bool;
}

impl<F> TermMembership for F
where
    F: Fn(&ValueConstraintSet, &str) -> bool,
{
    fn is_member(&self, constraint: &ValueConstraintSet, iri: &str) -> bool {
        self(constraint, iri)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorCode {
    MissingRequired,
    TypeMismatch,
    OutOfRange,
    PatternMismatch,
    Cardinality,
    UnknownField,
    TermNotInConstraint,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::MissingRequired => "MISSING_REQUIRED",
            ErrorCode::TypeMismatch => "TYPE_MISMATCH",
            ErrorCode::OutOfRange => "OUT_OF_RANGE",
            ErrorCode::PatternMismatch => "PATTERN_MISMATCH",
            ErrorCode::Cardinality => "CARDINALITY",
            ErrorCode::UnknownField => "UNKNOWN_FIELD",
            ErrorCode::TermNotInConstraint => "TERM_NOT_IN_CONSTRAINT",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    /// JSON Pointer into the canonical instance document.
    pub path: String,
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub errors: Vec<ValidationError>,
}

impl ValidationReport {
    pub fn to_json(&self) -> Json {
        json::object([
            ("valid", Json::Bool(self.valid)),
            (
                "errors",
                Json::Array(
                    self.errors
                        .iter()
                        .map(|e| {
                            json::object([
                                ("path", Json::str(e.path.as_str())),
                                ("code", Json::str(e.code.as_str())),
                                ("message", Json::str(e.message.as_str())),
                            ])
                        })
                        .collect(),
                ),
            ),
        ])
    }

    pub fn has(&self, code: ErrorCode) -> bool {
        self.errors.iter().any(|e| e.code == code)
    }
}

struct Checker<'a, M: ?Sized> {
    membership: &'a M,
    errors: Vec<ValidationError>,
}

fn child_ptr(path: &str, key: &str) -> String {
    alloc::format!("{path}/{}", escape_pointer_token(key))
}

/// `YYYY-MM-DD` shape check.
fn date_shape(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 10
        && b.iter().enumerate().all(|(i, c)| {
            if i == 4 || i == 7 {
                *c == b'-'
            } else {
                c.is_ascii_digit()
            }
        })
}

/// Proleptic Gregorian calendar check for a string that passed [`date_shape`].
fn calendar_valid(s: &str) -> bool {
    let year: u32 = s[0..4].parse().unwrap_or(0);
    let month: u32 = s[5..7].parse().unwrap_or(0);
    let day: u32 = s[8..10].parse().unwrap_or(0);
    let leap = (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400);
    let days = match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if leap => 29,
        2 => 28,
        _ => return false,
    };
    (1..=days).contains(&day)
}

impl<M: TermMembership + ?Sized> Checker<'_, M> {
    fn push(&mut self, path: &str, code: ErrorCode, message: String) {
        self.errors.push(ValidationError {
            path: String::from(path),
            code,
            message,
        });
    }

    fn object(&mut self, children: &[ResolvedNode], entries: &[(String, Node)], path: &str) {
        for child in children {
            if presence_required(child) && !entries.iter().any(|(k, _)| k == child.name()) {
                self.push(
                    path,
                    ErrorCode::MissingRequired,
                    alloc::format!("required field `{}` is missing", child.name()),
                );
            }
        }
        for (key, node) in entries {
            let ptr = child_ptr(path, key);
            match children.iter().find(|c| c.name() == key) {
                Some(child) => self.value(child, node, &ptr),
                None => self.push(
                    &ptr,
                    ErrorCode::UnknownField,
                    alloc::format!("`{key}` is not a field of this template"),
                ),
            }
        }
    }

    fn value(&mut self, child: &ResolvedNode, node: &Node, ptr: &str) {
        let card = child.cardinality();
        match (card.is_multi(), node) {
            (true, Node::List(items)) => {
                if !card.admits(items.len()) {
                    let max = match card.max {
                        Some(m) => alloc::format!("{m}"),
                        None => String::from("unbounded"),
                    };
                    self.push(
                        ptr,
                        ErrorCode::Cardinality,
                        alloc::format!("{} values given, expected between {} and {max}", items.len(), card.min),
                    );
                }
                for (i, item) in items.iter().enumerate() {
                    self.single(child, item, &alloc::format!("{ptr}/{i}"));
                }
            }
            (true, _) => self.push(ptr, ErrorCode::Cardinality, String::from("expected an array of values")),
            (false, Node::List(_)) => self.push(ptr, ErrorCode::Cardinality, String::from("expected a single value")),
            (false, _) => self.single(child, node, ptr),
        }
    }

    fn single(&mut self, child: &ResolvedNode, node: &Node, ptr: &str) {
        let field = match child {
            ResolvedNode::Element(e) => {
                match node {
                    Node::Element(entries) => self.object(&e.children, entries, ptr),
                    other => self.mismatch(ptr, "an element object", other),
                }
                return;
            }
            ResolvedNode::Field(f) => f,
        };
        match (&field.kind, node) {
            (FieldKind::Text(c) | FieldKind::Paragraph(c), Node::Literal(lit)) => {
                match text_of(lit, &[Datatype::String]) {
                    Some(s) => self.text(c, s, ptr),
                    None => self.mismatch(ptr, "a text value", node),
                }
            }
            (FieldKind::Number(c), Node::Literal(lit)) => match (&lit.value, lit.datatype) {
                (LiteralData::Number(n), Datatype::Number) => self.number(c, &Decimal::from_number(n), ptr),
                _ => self.mismatch(ptr, "a decimal number", node),
            },
            (FieldKind::Date, Node::Literal(lit)) => match text_of(lit, &[Datatype::Date, Datatype::String]) {
                Some(s) if !date_shape(s) => self.push(
                    ptr,
                    ErrorCode::PatternMismatch,
                    alloc::format!("`{s}` is not a YYYY-MM-DD date"),
                ),
                Some(s) if !calendar_valid(s) => self.push(
                    ptr,
                    ErrorCode::OutOfRange,
                    alloc::format!("`{s}` is not a calendar date"),
                ),
                Some(_) => {}
                None => self.mismatch(ptr, "a date", node),
            },
            (FieldKind::Term(set), Node::Term(term)) => {
                if term.label.is_none() {
                    self.push(
                        ptr,
                        ErrorCode::MissingRequired,
                        String::from("term value is missing rdfs:label"),
                    );
                }
                if !self.membership.is_member(set, &term.iri) {
                    self.push(
                        ptr,
                        ErrorCode::TermNotInConstraint,
                        alloc::format!("<{}> is not an allowed value for `{}`", term.iri, field.name),
                    );
                }
            }
            (FieldKind::Term(_), other) => self.mismatch(ptr, "an ontology term", other),
            (_, other) => self.mismatch(ptr, "a literal value", other),
        }
    }

    fn mismatch(&mut self, ptr: &str, expected: &str, found: &Node) {
        let found = match found {
            Node::Literal(lit) => match (&lit.value, lit.datatype) {
                (LiteralData::Number(_), _) => "a numeric literal",
                (_, Datatype::Number) => "a decimal-typed literal",
                (_, Datatype::Date) => "a date literal",
                _ => "a text literal",
            },
            Node::Term(_) => "an ontology term",
            Node::List(_) => "an array",
            Node::Element(_) => "an element object",
        };
        self.push(
            ptr,
            ErrorCode::TypeMismatch,
            alloc::format!("expected {expected}, found {found}"),
        );
    }

    fn text(&mut self, c: &TextConstraints, s: &str, ptr: &str) {
        let len = s.chars().count() as u64;
        if let Some(min) = c.min_length {
            if len < min {
                self.push(
                    ptr,
                    ErrorCode::OutOfRange,
                    alloc::format!("length {len} is below minLength {min}"),
                );
            }
        }
        if let Some(max) = c.max_length {
            if len > max {
                self.push(
                    ptr,
                    ErrorCode::OutOfRange,
                    alloc::format!("length {len} exceeds maxLength {max}"),
                );
            }
        }
        if let Some(p) = &c.pattern {
            if !p.is_match(s) {
                self.push(
                    ptr,
                    ErrorCode::PatternMismatch,
                    alloc::format!("`{s}` does not match {}", p.as_str()),
                );
            }
        }
    }

    fn number(&mut self, c: &NumberConstraints, d: &Decimal, ptr: &str) {
        if let Some(min) = &c.minimum {
            if *d < Decimal::from_number(min) {
                self.push(ptr, ErrorCode::OutOfRange, alloc::format!("{d} is below minimum {min}"));
            }
        }
        if let Some(max) = &c.maximum {
            if *d > Decimal::from_number(max) {
                self.push(ptr, ErrorCode::OutOfRange, alloc::format!("{d} exceeds maximum {max}"));
            }
        }
        if let Some(places) = c.decimal_places {
            if d.fraction_digits() > u64::from(places) {
                self.push(
                    ptr,
                    ErrorCode::OutOfRange,
                    alloc::format!("{d} has more than {places} decimal places"),
                );
            }
        }
    }
}

fn text_of<'a>(lit: &'a LiteralValue, datatypes: &[Datatype]) -> Option<&'a str> {
    match &lit.value {
        LiteralData::Text(s) if datatypes.contains(&lit.datatype) => Some(s),
        _ => None,
    }
}

/// Checks `m` against `rt`, collecting every violation in document order.
pub fn validate<M: TermMembership + ?Sized>(
    rt: &ResolvedTemplate,
    m: &MetadataInstance,
    membership: &M,
) -> ValidationReport {
    let mut checker = Checker {
        membership,
        errors: Vec::new(),
    };
    if m.template_id != rt.id {
        checker.push(
            "/@type",
            ErrorCode::TypeMismatch,
            alloc::format!("instance belongs to template {}, not {}", m.template_id, rt.id),
        );
    }
    checker.object(&rt.children, &m.values, "");
    ValidationReport {
        valid: checker.errors.is_empty(),
        errors: checker.errors,
    }
}
