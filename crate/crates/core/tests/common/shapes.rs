//! Template shapes built together with a conforming instance and the
//! statement counts its export must produce.

use metaforge_core::json::Number;
use metaforge_core::model::*;
use metaforge_core::ResourceId;
use proptest::prelude::*;

#[derive(Debug, Clone)]
pub enum Shape {
    Field {
        kind: u8,
        multi: bool,
        count: usize,
    },
    /// One element item per `fill` entry; `false` items are left empty.
    Element {
        multi: bool,
        shape: Vec<Shape>,
        fill: Vec<bool>,
    },
}

pub fn shapes(depth: u32) -> BoxedStrategy<Vec<Shape>> {
    let field = (0u8..5, any::<bool>(), 0usize..4).prop_map(|(kind, multi, count)| Shape::Field {
        kind,
        multi,
        count: if multi { count } else { count.min(1) },
    });
    let shape = if depth == 0 {
        field.boxed()
    } else {
        prop_oneof![
            3 => field,
            1 => (any::<bool>(), shapes(depth - 1), prop::collection::vec(any::<bool>(), 0..3)).prop_map(
                |(multi, shape, mut fill)| {
                    if !multi {
                        fill.truncate(1);
                    }
                    Shape::Element { multi, shape, fill }
                }
            ),
        ]
        .boxed()
    };
    prop::collection::vec(shape, 0..5).boxed()
}

#[derive(Default)]
pub struct Expect {
    pub literals: usize,
    pub terms: usize,
    pub blank_nodes: usize,
    pub counter: u64,
}

fn card(multi: bool) -> Cardinality {
    if multi {
        Cardinality::new(0, None)
    } else {
        Cardinality::default_for(false)
    }
}

fn field_kind(kind: u8) -> FieldKind {
    match kind {
        0 => FieldKind::Text(TextConstraints::default()),
        1 => FieldKind::Paragraph(TextConstraints::default()),
        2 => FieldKind::Number(NumberConstraints::default()),
        3 => FieldKind::Date,
        _ => FieldKind::Term(ValueConstraintSet {
            sources: vec![ConstraintSource::LiteralList {
                entries: vec![LiteralEntry {
                    label: "x".into(),
                    iri: None,
                }],
            }],
        }),
    }
}

fn value(kind: u8, e: &mut Expect) -> Node {
    e.counter += 1;
    let n = e.counter;
    let lit = match kind {
        0 => LiteralValue::text(format!("text {n}")),
        1 => LiteralValue::text(format!("line one\nline \"{n}\"")),
        2 => LiteralValue::number(Number::from_f64(n as f64 + 0.25).unwrap()),
        3 => LiteralValue::date(format!("{:04}-02-28", 1000 + n)),
        _ => {
            e.terms += 1;
            return Node::Term(TermValue {
                iri: format!("http://ex.org/term/{n}"),
                label: Some(format!("term {n}")),
            });
        }
    };
    e.literals += 1;
    Node::Literal(lit)
}

/// Builds the template children and matching instance entries together.
pub fn build(shapes: &[Shape], prefix: &str, e: &mut Expect) -> (Vec<Child>, Vec<(String, Node)>) {
    let mut children = Vec::new();
    let mut entries = Vec::new();
    for (i, s) in shapes.iter().enumerate() {
        let name = format!("n{i}");
        let iri = format!("http://ex.org/p/{prefix}{name}");
        match s {
            Shape::Field { kind, multi, count } => {
                let mut f = FieldSpec::new(name.clone(), field_kind(*kind));
                f.cardinality = card(*multi);
                f.property_iri = Some(iri);
                children.push(Child::Field(f));
                let values: Vec<Node> = (0..*count).map(|_| value(*kind, e)).collect();
                if *multi {
                    entries.push((name, Node::List(values)));
                } else if let Some(v) = values.into_iter().next() {
                    entries.push((name, v));
                }
            }
            Shape::Element { multi, shape, fill } => {
                let mut el = Template::new(
                    ResourceId::from_random_bytes([i as u8; 16]),
                    TemplateKind::Element,
                    name.clone(),
                );
                el.cardinality = Some(card(*multi));
                el.property_iri = Some(iri);
                let child_prefix = format!("{prefix}{name}.");
                let mut scratch = Expect::default();
                el.children = build(shape, &child_prefix, &mut scratch).0;
                let mut nodes = Vec::new();
                for &filled in fill {
                    if !filled {
                        nodes.push(Node::Element(Vec::new()));
                        continue;
                    }
                    let (_, values) = build(shape, &child_prefix, e);
                    if values.iter().map(|(_, n)| n.leaf_count()).sum::<usize>() > 0 {
                        e.blank_nodes += 1;
                    }
                    nodes.push(Node::Element(values));
                }
                children.push(Child::Element(el));
                if *multi {
                    entries.push((name, Node::List(nodes)));
                } else if let Some(v) = nodes.into_iter().next() {
                    entries.push((name, v));
                }
            }
        }
    }
    (children, entries)
}

impl Expect {
    /// Type statement plus one per literal, two per term and one per non-empty element item.
    pub fn triples(&self) -> usize {
        1 + self.literals + 2 * self.terms + self.blank_nodes
    }
}

/// A template and instance for `shapes`, with the expected counts.
pub fn generate(shapes: &[Shape]) -> (ResolvedTemplate, MetadataInstance, Expect) {
    let mut e = Expect::default();
    let (children, values) = build(shapes, "", &mut e);
    let mut t = Template::new(super::tid(), TemplateKind::Template, "Generated");
    t.children = children;
    let rt = resolve_composition(&t, |_| None).unwrap();
    let mut m = MetadataInstance::new("http://ex.org/instance/1", super::tid());
    m.values = values;
    (rt, m, e)
}
