use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::template::{sub, sub_index};
use super::*;
use crate::error::ResolveError;

/// Upper bound on fields plus elements in one inlined tree.
pub const RESOLVE_NODE_LIMIT: usize = 200_000;

/// A template with every reference inlined.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedTemplate {
    pub id: ResourceId,
    pub name: String,
    pub description: Option<String>,
    pub annotations: Vec<Annotation>,
    pub children: Vec<ResolvedNode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedElement {
    pub id: ResourceId,
    pub name: String,
    pub description: Option<String>,
    pub property_iri: Option<String>,
    pub cardinality: Cardinality,
    pub annotations: Vec<Annotation>,
    pub children: Vec<ResolvedNode>,
}

impl ResolvedElement {
    pub fn required(&self) -> bool {
        self.cardinality.min >= 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedNode {
    Field(FieldSpec),
    Element(ResolvedElement),
}

impl ResolvedNode {
    pub fn name(&self) -> &str {
        match self {
            ResolvedNode::Field(f) => &f.name,
            ResolvedNode::Element(e) => &e.name,
        }
    }

    pub fn cardinality(&self) -> Cardinality {
        match self {
            ResolvedNode::Field(f) => f.cardinality,
            ResolvedNode::Element(e) => e.cardinality,
        }
    }

    pub fn required(&self) -> bool {
        match self {
            ResolvedNode::Field(f) => f.required,
            ResolvedNode::Element(e) => e.required(),
        }
    }

    pub fn property_iri(&self) -> Option<&str> {
        match self {
            ResolvedNode::Field(f) => f.property_iri.as_deref(),
            ResolvedNode::Element(e) => e.property_iri.as_deref(),
        }
    }
}

/// Finds a direct child by name.
pub(crate) fn find_child<'a>(children: &'a [ResolvedNode], name: &str) -> Option<&'a ResolvedNode> {
    children.iter().find(|c| c.name() == name)
}

impl ResolvedTemplate {
    /// Leaf field paths (`element/field`) in document order.
    pub fn leaf_paths(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_leaf_paths(&self.children, "", &mut out);
        out
    }

    /// Looks up the field at a slash-joined path.
    pub fn field_at(&self, path: &str) -> Option<&FieldSpec> {
        let mut children = &self.children;
        let mut segments = path.split('/').peekable();
        while let Some(seg) = segments.next() {
            match find_child(children, seg)? {
                ResolvedNode::Field(f) if segments.peek().is_none() => return Some(f),
                ResolvedNode::Element(e) => children = &e.children,
                ResolvedNode::Field(_) => return None,
            }
        }
        None
    }

    /// Back to a reference-free template document; resolving it again yields `self`.
    pub fn to_template(&self) -> Template {
        let mut t = Template::new(self.id.clone(), TemplateKind::Template, self.name.clone());
        t.description = self.description.clone();
        t.annotations = self.annotations.clone();
        t.children = nodes_to_children(&self.children);
        t
    }
}

fn collect_leaf_paths(children: &[ResolvedNode], prefix: &str, out: &mut Vec<String>) {
    for child in children {
        let path = if prefix.is_empty() {
            String::from(child.name())
        } else {
            alloc::format!("{prefix}/{}", child.name())
        };
        match child {
            ResolvedNode::Field(_) => out.push(path),
            ResolvedNode::Element(e) => collect_leaf_paths(&e.children, &path, out),
        }
    }
}

fn nodes_to_children(nodes: &[ResolvedNode]) -> Vec<Child> {
    nodes
        .iter()
        .map(|n| match n {
            ResolvedNode::Field(f) => Child::Field(f.clone()),
            ResolvedNode::Element(e) => {
                let mut t = Template::new(e.id.clone(), TemplateKind::Element, e.name.clone());
                t.description = e.description.clone();
                t.property_iri = e.property_iri.clone();
                t.cardinality = Some(e.cardinality);
                t.annotations = e.annotations.clone();
                t.children = nodes_to_children(&e.children);
                Child::Element(t)
            }
        })
        .collect()
}

struct Resolver<'a, F> {
    lookup: &'a F,
    stack: Vec<ResourceId>,
    budget: usize,
}

impl<F: Fn(&ResourceId) -> Option<Template>> Resolver<'_, F> {
    fn spend(&mut self) -> Result<(), ResolveError> {
        if self.budget == 0 {
            return Err(ResolveError::TooLarge {
                limit: RESOLVE_NODE_LIMIT,
            });
        }
        self.budget -= 1;
        Ok(())
    }

    fn children(&mut self, children: &[Child], path: &str) -> Result<Vec<ResolvedNode>, ResolveError> {
        let base = sub(path, "children");
        let mut out = Vec::with_capacity(children.len());
        let mut names = BTreeSet::new();
        for (i, child) in children.iter().enumerate() {
            let p = sub_index(&base, i);
            self.spend()?;
            let node = match child {
                Child::Field(f) => ResolvedNode::Field(f.clone()),
                Child::Element(e) => ResolvedNode::Element(self.element(
                    e,
                    e.cardinality.unwrap_or(Cardinality::default_for(false)),
                    e.property_iri.clone(),
                    &p,
                )?),
                Child::Reference(r) => self.reference(r, &p)?,
            };
            if !names.insert(String::from(node.name())) {
                return Err(ResolveError::DuplicateName {
                    path: p,
                    name: String::from(node.name()),
                });
            }
            out.push(node);
        }
        Ok(out)
    }

    fn reference(&mut self, r: &Reference, path: &str) -> Result<ResolvedNode, ResolveError> {
        if let Some(pos) = self.stack.iter().position(|id| *id == r.ref_id) {
            return Err(ResolveError::CycleDetected {
                cycle: self.stack[pos..].to_vec(),
            });
        }
        let target = (self.lookup)(&r.ref_id).ok_or_else(|| ResolveError::UnresolvedReference {
            path: String::from(path),
            id: r.ref_id.clone(),
        })?;
        match (target.kind, &target.field) {
            (TemplateKind::Field, Some(f)) => {
                let mut f = f.clone();
                f.cardinality = r.cardinality;
                f.required = r.cardinality.min >= 1;
                if r.property_iri.is_some() {
                    f.property_iri = r.property_iri.clone();
                }
                Ok(ResolvedNode::Field(f))
            }
            (TemplateKind::Element, _) => {
                self.stack.push(r.ref_id.clone());
                let iri = r.property_iri.clone().or_else(|| target.property_iri.clone());
                let resolved = self.element(&target, r.cardinality, iri, path);
                self.stack.pop();
                resolved.map(ResolvedNode::Element)
            }
            _ => Err(ResolveError::InvalidReference {
                path: String::from(path),
                id: r.ref_id.clone(),
            }),
        }
    }

    fn element(
        &mut self,
        t: &Template,
        cardinality: Cardinality,
        property_iri: Option<String>,
        path: &str,
    ) -> Result<ResolvedElement, ResolveError> {
        Ok(ResolvedElement {
            id: t.id.clone(),
            name: t.name.clone(),
            description: t.description.clone(),
            property_iri,
            cardinality,
            annotations: t.annotations.clone(),
            children: self.children(&t.children, path)?,
        })
    }
}

/// Inlines every reference depth-first, left to right. Each reference's
/// cardinality replaces the referenced resource's own.
pub fn resolve_composition<F>(t: &Template, lookup: F) -> Result<ResolvedTemplate, ResolveError>
where
    F: Fn(&ResourceId) -> Option<Template>,
{
    let mut resolver = Resolver {
        lookup: &lookup,
        stack: Vec::new(),
        budget: RESOLVE_NODE_LIMIT,
    };
    if t.kind == TemplateKind::Element {
        resolver.stack.push(t.id.clone());
    }
    Ok(ResolvedTemplate {
        id: t.id.clone(),
        name: t.name.clone(),
        description: t.description.clone(),
        annotations: t.annotations.clone(),
        children: resolver.children(&t.children, "")?,
    })
}
