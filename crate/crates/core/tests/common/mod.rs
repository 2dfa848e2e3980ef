#![allow(dead_code)]

pub mod graph;
pub mod recommend;
pub mod shapes;

use metaforge_core::json::Number;
use metaforge_core::model::*;
use metaforge_core::ResourceId;
use proptest::prelude::*;

pub const TID: &str = "3fa85f64-5717-4562-b3fc-2c963f66afa6";

pub fn tid() -> ResourceId {
    ResourceId::parse(TID).unwrap()
}

pub fn resource_id() -> impl Strategy<Value = ResourceId> {
    any::<[u8; 16]>().prop_map(ResourceId::from_random_bytes)
}

pub fn child_name() -> impl Strategy<Value = String> {
    "[a-zA-Z_][a-zA-Z0-9_.-]{0,6}".prop_filter("reserved", |s| s != "rdfs" && s != "xsd")
}

pub fn iri() -> impl Strategy<Value = String> {
    "[a-z0-9]{1,6}".prop_map(|s| format!("http://ex.org/{s}"))
}

pub fn free_text() -> impl Strategy<Value = String> {
    "\\PC{0,12}"
}

pub fn cardinality() -> impl Strategy<Value = Cardinality> {
    (0u32..3, prop::option::of(1u32..4)).prop_map(|(min, max)| match max {
        Some(m) => Cardinality::new(min.min(m), Some(m)),
        None => Cardinality::new(min, None),
    })
}

fn annotation() -> impl Strategy<Value = Annotation> {
    (iri(), iri(), free_text()).prop_map(|(property_iri, term_iri, term_label)| Annotation {
        property_iri,
        term_iri,
        term_label,
    })
}

fn text_constraints(allow_pattern: bool) -> impl Strategy<Value = TextConstraints> {
    let patterns = prop::sample::select(vec!["^[a-z]+$", "^.*$", "^[A-Z][a-z0-9 ]{0,9}$", "^(x|y)+$"]);
    (
        prop::option::of(0u64..5),
        prop::option::of(5u64..20),
        prop::option::of(patterns),
    )
        .prop_map(move |(min_length, max_length, p)| TextConstraints {
            min_length,
            max_length,
            pattern: p.filter(|_| allow_pattern).map(|p| Pattern::new(p).unwrap()),
        })
}

fn number() -> impl Strategy<Value = Number> {
    prop_oneof![
        (-1000i64..1000).prop_map(Number::from),
        (-4000i32..4000).prop_map(|q| Number::from_f64(f64::from(q) / 8.0).unwrap()),
    ]
}

fn number_constraints() -> impl Strategy<Value = NumberConstraints> {
    (
        prop::option::of(number()),
        prop::option::of(number()),
        prop::option::of(0u32..=30),
    )
        .prop_map(|(a, b, decimal_places)| {
            let (minimum, maximum) = match (a, b) {
                (Some(a), Some(b)) if a.as_f64().unwrap() > b.as_f64().unwrap() => (Some(b), Some(a)),
                other => other,
            };
            NumberConstraints {
                minimum,
                maximum,
                decimal_places,
            }
        })
}

fn constraint_source() -> impl Strategy<Value = ConstraintSource> {
    prop_oneof![
        ("[A-Z]{2,6}", iri(), any::<bool>()).prop_map(|(source, root_iri, include_root)| {
            ConstraintSource::OntologyBranch {
                source,
                root_iri,
                include_root,
            }
        }),
        resource_id().prop_map(|value_set_id| ConstraintSource::ValueSet { value_set_id }),
        prop::collection::vec(
            (free_text(), prop::option::of(iri())).prop_map(|(label, iri)| LiteralEntry { label, iri }),
            1..3
        )
        .prop_map(|entries| ConstraintSource::LiteralList { entries }),
    ]
}

pub fn field_kind() -> impl Strategy<Value = FieldKind> {
    prop_oneof![
        text_constraints(true).prop_map(FieldKind::Text),
        text_constraints(false).prop_map(FieldKind::Paragraph),
        number_constraints().prop_map(FieldKind::Number),
        Just(FieldKind::Date),
        prop::collection::vec(constraint_source(), 1..3)
            .prop_map(|sources| FieldKind::Term(ValueConstraintSet { sources })),
    ]
}

pub fn field_spec() -> impl Strategy<Value = FieldSpec> {
    (
        child_name(),
        field_kind(),
        any::<bool>(),
        cardinality(),
        prop::option::of(iri()),
        prop::option::of(free_text()),
        prop::collection::vec(annotation(), 0..2),
    )
        .prop_map(
            |(name, kind, required, cardinality, property_iri, description, annotations)| FieldSpec {
                name,
                kind,
                required,
                cardinality,
                property_iri,
                description,
                annotations,
            },
        )
}

fn reference() -> impl Strategy<Value = Child> {
    (resource_id(), cardinality(), prop::option::of(iri())).prop_map(|(ref_id, cardinality, property_iri)| {
        Child::Reference(Reference {
            ref_id,
            cardinality,
            property_iri,
        })
    })
}

fn element(depth: u32) -> BoxedStrategy<Template> {
    (
        resource_id(),
        child_name(),
        prop::option::of(free_text()),
        prop::option::of(iri()),
        prop::option::of(cardinality()),
        prop::collection::vec(annotation(), 0..2),
        children(depth),
        0u64..100,
    )
        .prop_map(
            |(id, name, description, property_iri, cardinality, annotations, children, version)| {
                let mut t = Template::new(id, TemplateKind::Element, name);
                t.description = description;
                t.property_iri = property_iri;
                t.cardinality = cardinality;
                t.annotations = annotations;
                t.children = children;
                t.version = version;
                t
            },
        )
        .boxed()
}

/// Children with distinct names (suffixing the position keeps them unique).
pub fn children(depth: u32) -> BoxedStrategy<Vec<Child>> {
    let child = if depth == 0 {
        prop_oneof![field_spec().prop_map(Child::Field), reference()].boxed()
    } else {
        prop_oneof![
            3 => field_spec().prop_map(Child::Field),
            1 => reference(),
            1 => element(depth - 1).prop_map(Child::Element),
        ]
        .boxed()
    };
    prop::collection::vec(child, 0..5)
        .prop_map(|mut items| {
            for (i, c) in items.iter_mut().enumerate() {
                match c {
                    Child::Field(f) => f.name = format!("{}_{i}", f.name),
                    Child::Element(e) => e.name = format!("{}_{i}", e.name),
                    Child::Reference(_) => {}
                }
            }
            items
        })
        .boxed()
}

/// Any of the three resource kinds.
pub fn template() -> impl Strategy<Value = Template> {
    let top = (
        resource_id(),
        "[A-Za-z][A-Za-z0-9 ]{0,10}",
        prop::option::of(free_text()),
        prop::collection::vec(annotation(), 0..2),
        children(2),
        0u64..100,
    )
        .prop_map(|(id, name, description, annotations, children, version)| {
            let mut t = Template::new(id, TemplateKind::Template, name);
            t.description = description;
            t.annotations = annotations;
            t.children = children;
            t.version = version;
            t
        });
    let field = (resource_id(), field_spec()).prop_map(|(id, spec)| {
        let mut t = Template::new(id, TemplateKind::Field, spec.name.clone());
        t.field = Some(spec);
        t
    });
    prop_oneof![3 => top, 1 => element(1), 1 => field]
}

fn literal() -> impl Strategy<Value = LiteralValue> {
    prop_oneof![
        free_text().prop_map(LiteralValue::text),
        number().prop_map(LiteralValue::number),
        "[0-9]{4}-[0-9]{2}-[0-9]{2}".prop_map(LiteralValue::date),
        number().prop_map(|n| LiteralValue {
            value: LiteralData::Number(n),
            datatype: Datatype::String,
        }),
        "[0-9.]{1,5}".prop_map(|s| LiteralValue {
            value: LiteralData::Text(s),
            datatype: Datatype::Number,
        }),
    ]
}

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        literal().prop_map(Node::Literal),
        (iri(), prop::option::of(free_text())).prop_map(|(iri, label)| Node::Term(TermValue { iri, label })),
    ]
}

fn entries(depth: u32) -> BoxedStrategy<Vec<(String, Node)>> {
    let item = if depth == 0 {
        leaf().boxed()
    } else {
        prop_oneof![3 => leaf(), 1 => entries(depth - 1).prop_map(Node::Element)].boxed()
    };
    let value = prop_oneof![3 => item.clone(), 1 => prop::collection::vec(item, 0..3).prop_map(Node::List)];
    prop::collection::vec((child_name(), value), 0..5)
        .prop_map(|items| {
            items
                .into_iter()
                .enumerate()
                .map(|(i, (name, node))| (format!("{name}_{i}"), node))
                .collect()
        })
        .boxed()
}

pub fn instance() -> impl Strategy<Value = MetadataInstance> {
    (
        iri(),
        resource_id(),
        prop::collection::vec((child_name(), iri()), 0..3),
        entries(2),
    )
        .prop_map(|(instance_id, template_id, context, values)| {
            let mut m = MetadataInstance::new(instance_id, template_id);
            m.context = context
                .into_iter()
                .enumerate()
                .map(|(i, (k, v))| (format!("{k}_{i}"), v))
                .collect();
            m.values = values;
            m
        })
}
