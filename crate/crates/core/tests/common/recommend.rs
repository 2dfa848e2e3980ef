//! Co-occurrence counts and scores recomputed directly from raw corpora.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use metaforge_core::model::*;
use metaforge_core::recommender::{index_corpus, ContextPair, Score};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// Instance as field -> values; one value means a single-valued field.
pub type Raw = BTreeMap<String, Vec<String>>;

type Pair = (String, String);

pub fn field_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

pub fn value_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

pub fn raw_instance(fields: usize, values: usize) -> impl Strategy<Value = Raw> {
    prop::collection::btree_map(
        prop::sample::select(field_names(fields)),
        prop::collection::vec(prop::sample::select(value_names(values)), 1..4),
        0..=fields.min(4),
    )
}

/// Context pairs, some naming fields or values that never occur.
pub fn context(fields: usize, values: usize) -> impl Strategy<Value = Vec<(String, String)>> {
    prop::collection::vec(
        (
            prop::sample::select(field_names(fields + 1)),
            prop::sample::select(value_names(values + 1)),
        ),
        0..4,
    )
}

pub fn to_instance(raw: &Raw) -> MetadataInstance {
    let mut m = MetadataInstance::new("urn:x:1", super::tid());
    for (field, values) in raw {
        let mut nodes: Vec<Node> = values
            .iter()
            .map(|v| Node::Literal(LiteralValue::text(v.as_str())))
            .collect();
        let node = if nodes.len() == 1 {
            nodes.remove(0)
        } else {
            Node::List(nodes)
        };
        m.values.push((field.clone(), node));
    }
    m
}

pub struct Oracle {
    pub n: u64,
    pub unary: BTreeMap<Pair, u64>,
    pub docs: BTreeMap<Pair, u64>,
    pub both: BTreeMap<(Pair, Pair), u64>,
}

pub fn oracle(corpus: &[Raw]) -> Oracle {
    let mut o = Oracle {
        n: corpus.len() as u64,
        unary: BTreeMap::new(),
        docs: BTreeMap::new(),
        both: BTreeMap::new(),
    };
    for raw in corpus {
        let mut present = BTreeSet::new();
        for (f, vs) in raw {
            for v in vs {
                *o.unary.entry((f.clone(), v.clone())).or_default() += 1;
                present.insert((f.clone(), v.clone()));
            }
        }
        for a in &present {
            *o.docs.entry(a.clone()).or_default() += 1;
            for b in &present {
                if a != b {
                    *o.both.entry((a.clone(), b.clone())).or_default() += 1;
                }
            }
        }
    }
    o
}

pub fn expected(
    o: &Oracle,
    target: &str,
    context: &[(String, String)],
    k: usize,
    min_support: u64,
) -> Vec<(String, Score, u64)> {
    let evidence: Vec<&(String, String)> = context
        .iter()
        .filter(|c| c.0 != target && o.unary.get(*c).copied().unwrap_or(0) > 0)
        .collect();
    let mut out: Vec<(String, Score, u64)> = o
        .unary
        .iter()
        .filter(|((f, _), &u)| f == target && u >= min_support)
        .map(|((f, v), &u)| {
            let score = if evidence.is_empty() {
                Score::new(u128::from(o.docs[&(f.clone(), v.clone())]), u128::from(o.n))
            } else {
                let mut total = Score::from_integer(0);
                for c in &evidence {
                    let joint = o
                        .both
                        .get(&((*c).clone(), (f.clone(), v.clone())))
                        .copied()
                        .unwrap_or(0);
                    total += Score::new(u128::from(joint), u128::from(o.unary[*c]));
                }
                total / Score::from_integer(evidence.len() as u128)
            };
            (v.clone(), score, u)
        })
        .collect();
    out.sort_by_key(|(v, s, u)| (Reverse(*s), Reverse(*u), v.clone()));
    out.truncate(k);
    out
}

pub fn pairs(ctx: &[(String, String)]) -> Vec<ContextPair> {
    ctx.iter()
        .map(|(p, v)| ContextPair::new(p.as_str(), v.as_str()))
        .collect()
}

/// Indexes the corpus and compares one suggestion list with the oracle.
pub fn check_suggest(
    corpus: &[Raw],
    target: &str,
    ctx: &[(String, String)],
    k: usize,
    min_support: u64,
) -> Result<(), TestCaseError> {
    let instances: Vec<MetadataInstance> = corpus.iter().map(to_instance).collect();
    let index = index_corpus(super::tid(), &instances).unwrap();
    let got: Vec<(String, Score, u64)> = index
        .suggest(target, &pairs(ctx), k, min_support)
        .into_iter()
        .map(|s| (s.value_key, s.score, s.support_count))
        .collect();
    prop_assert_eq!(got, expected(&oracle(corpus), target, ctx, k, min_support));
    Ok(())
}
