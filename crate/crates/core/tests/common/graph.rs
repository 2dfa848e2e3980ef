//! Random element graphs with a separate reachability/size model.

use std::collections::{BTreeMap, BTreeSet};

use metaforge_core::model::*;
use metaforge_core::{ResolveError, ResourceId};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

#[derive(Debug, Clone)]
pub struct Graph {
    pub edges: Vec<Vec<usize>>,
    pub roots: Vec<usize>,
}

pub fn node_id(i: usize) -> ResourceId {
    let mut bytes = [0u8; 16];
    bytes[0] = 0xab;
    bytes[15] = i as u8;
    ResourceId::from_random_bytes(bytes)
}

/// Forward edges only, plus with probability `cycle_rate` one back edge
/// closing a cycle reachable from root 0.
pub fn graph(max_nodes: usize, cycle_rate: f64) -> impl Strategy<Value = Graph> {
    (1usize..=max_nodes)
        .prop_flat_map(move |n| {
            (
                Just(n),
                prop::collection::vec(prop::collection::vec(any::<u16>(), 0..=2), n),
                prop::bool::weighted(cycle_rate),
                any::<(u16, u16)>(),
                prop::collection::vec(any::<u16>(), 0..3),
            )
        })
        .prop_map(|(n, raw, cyclic, (a, b), extra_roots)| {
            let mut edges: Vec<Vec<usize>> = raw
                .iter()
                .enumerate()
                .map(|(i, targets)| {
                    let span = n - i - 1;
                    let mut out: Vec<usize> = if span == 0 {
                        Vec::new()
                    } else {
                        targets.iter().map(|t| i + 1 + usize::from(*t) % span).collect()
                    };
                    out.sort_unstable();
                    out.dedup();
                    out
                })
                .collect();
            if cyclic {
                // walk forward from root 0, then link a node on the walk back to an earlier one
                let mut path = vec![0];
                let mut cur = 0;
                while !edges[cur].is_empty() {
                    cur = edges[cur][(usize::from(a) + path.len()) % edges[cur].len()];
                    path.push(cur);
                }
                let from = usize::from(a) % path.len();
                let to = usize::from(b) % (from + 1);
                let (from, to) = (path[from], path[to]);
                if !edges[from].contains(&to) {
                    edges[from].push(to);
                }
            }
            let mut roots = vec![0];
            roots.extend(extra_roots.iter().map(|r| usize::from(*r) % n));
            roots.sort_unstable();
            roots.dedup();
            Graph { edges, roots }
        })
}

pub fn build(g: &Graph) -> (Template, BTreeMap<ResourceId, Template>) {
    let reference = |j: usize| {
        Child::Reference(Reference {
            ref_id: node_id(j),
            cardinality: Cardinality::default_for(false),
            property_iri: None,
        })
    };
    let mut store = BTreeMap::new();
    for (i, out) in g.edges.iter().enumerate() {
        let mut e = Template::new(node_id(i), TemplateKind::Element, format!("e{i}"));
        e.children.push(Child::Field(FieldSpec::new("f", FieldKind::Date)));
        e.children.extend(out.iter().map(|&j| reference(j)));
        store.insert(node_id(i), e);
    }
    let mut root = Template::new(
        ResourceId::from_random_bytes([0xcd; 16]),
        TemplateKind::Template,
        "Root",
    );
    root.children = g.roots.iter().map(|&r| reference(r)).collect();
    (root, store)
}

pub fn reachable_cycle(g: &Graph) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; g.edges.len()];
    fn visit(v: usize, g: &Graph, color: &mut [u8]) -> bool {
        color[v] = 1;
        for &w in &g.edges[v] {
            if color[w] == 1 || (color[w] == 0 && visit(w, g, color)) {
                return true;
            }
        }
        color[v] = 2;
        false
    }
    g.roots.iter().any(|&r| color[r] == 0 && visit(r, g, &mut color))
}

/// (nodes spent, leaves) of the unrolled tree below `v`, saturating.
pub fn unrolled(v: usize, g: &Graph, memo: &mut BTreeMap<usize, (u128, u128)>) -> (u128, u128) {
    if let Some(&r) = memo.get(&v) {
        return r;
    }
    let mut size: u128 = 1;
    let mut leaves: u128 = 1;
    for &w in &g.edges[v] {
        let (s, l) = unrolled(w, g, memo);
        size = size.saturating_add(1).saturating_add(s);
        leaves = leaves.saturating_add(l);
    }
    memo.insert(v, (size, leaves));
    (size, leaves)
}

/// Resolves the graph and compares the outcome with the model.
pub fn check(g: &Graph) -> Result<(), TestCaseError> {
    let (root, store) = build(g);
    let result = resolve_composition(&root, |id| store.get(id).cloned());
    if reachable_cycle(g) {
        match result {
            Err(ResolveError::CycleDetected { cycle }) => {
                let index: BTreeMap<&ResourceId, usize> = (0..g.edges.len())
                    .map(|i| (store.get_key_value(&node_id(i)).unwrap().0, i))
                    .collect();
                let nodes: Vec<usize> = cycle.iter().map(|id| index[id]).collect();
                prop_assert!(!nodes.is_empty());
                let distinct: BTreeSet<_> = nodes.iter().collect();
                prop_assert_eq!(distinct.len(), nodes.len());
                for k in 0..nodes.len() {
                    let next = nodes[(k + 1) % nodes.len()];
                    prop_assert!(g.edges[nodes[k]].contains(&next), "{:?} is not a cycle", nodes);
                }
            }
            Err(ResolveError::TooLarge { .. }) => {}
            other => prop_assert!(false, "expected a cycle, got {:?}", other.map(|_| ())),
        }
    } else {
        let mut memo = BTreeMap::new();
        let (spent, leaves) = g.roots.iter().fold((0u128, 0u128), |(s, l), &r| {
            let (rs, rl) = unrolled(r, g, &mut memo);
            (s.saturating_add(1).saturating_add(rs), l.saturating_add(rl))
        });
        if spent <= RESOLVE_NODE_LIMIT as u128 {
            let rt = result.unwrap();
            prop_assert_eq!(rt.leaf_paths().len() as u128, leaves);
            let again = resolve_composition(&rt.to_template(), |_| None).unwrap();
            prop_assert_eq!(again, rt);
        } else {
            prop_assert_eq!(
                result.unwrap_err(),
                ResolveError::TooLarge {
                    limit: RESOLVE_NODE_LIMIT
                }
            );
        }
    }
    Ok(())
}
