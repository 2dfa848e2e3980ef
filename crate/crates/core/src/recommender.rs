//! Field-value co-occurrence statistics and ranked value suggestions.
//!
//! For a target field, candidates are the values seen there. With context
//! pairs `C'` that occur in the corpus, a candidate `v` scores
//! `mean over c in C' of pairwise(c, v) / unary(c)`; without context it scores
//! the fraction of instances containing `v`. Scores are exact rationals.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use hashbrown::HashMap;
use num_rational::Ratio;

use crate::decimal::Decimal;
use crate::id::ResourceId;
use crate::json::Json;
use crate::model::{flatten_instance, FieldKind, MetadataInstance, ResolvedTemplate};

pub type Score = Ratio<u128>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecommendError {
    TemplateMismatch { expected: ResourceId, found: ResourceId },
}

impl RecommendError {
    pub fn code(&self) -> &'static str {
        "TEMPLATE_MISMATCH"
    }
}

impl fmt::Display for RecommendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecommendError::TemplateMismatch { expected, found } => {
                write!(f, "instance of template {found} cannot join the corpus of {expected}")
            }
        }
    }
}

/// A filled field used as evidence when ranking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextPair {
    pub path: String,
    pub value_key: String,
}

impl ContextPair {
    pub fn new(path: impl Into<String>, value_key: impl Into<String>) -> Self {
        ContextPair {
            path: path.into(),
            value_key: value_key.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suggestion {
    pub value_key: String,
    pub display: String,
    pub score: Score,
    pub support_count: u64,
}

impl Suggestion {
    pub fn score_f64(&self) -> f64 {
        *self.score.numer() as f64 / *self.score.denom() as f64
    }
}

/// Score descending, then support descending, then value key ascending.
pub fn suggestion_order(a: &Suggestion, b: &Suggestion) -> Ordering {
    b.score
        .cmp(&a.score)
        .then(b.support_count.cmp(&a.support_count))
        .then_with(|| a.value_key.cmp(&b.value_key))
}

/// Co-occurrence statistics over the instances of one template.
#[derive(Debug, Clone, Default)]
pub struct CorpusIndex {
    template_id: Option<ResourceId>,
    n: u64,
    keys: Vec<(String, String)>,
    ids: HashMap<(String, String), u32>,
    unary: Vec<u64>,
    instances_with: Vec<u64>,
    display: Vec<String>,
    by_path: HashMap<String, Vec<u32>>,
    pairwise: HashMap<(u32, u32), u64>,
}

/// A `(path, valueKey)` pair.
pub type Item = (String, String);

/// Plain-map view of an index, independent of interning order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusCounts {
    pub n: u64,
    pub unary: BTreeMap<Item, u64>,
    pub pairwise: BTreeMap<(Item, Item), u64>,
    pub display: BTreeMap<Item, String>,
}

impl CorpusIndex {
    pub fn new(template_id: ResourceId) -> Self {
        CorpusIndex {
            template_id: Some(template_id),
            ..CorpusIndex::default()
        }
    }

    pub fn template_id(&self) -> Option<&ResourceId> {
        self.template_id.as_ref()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn id_of(&self, path: &str, key: &str) -> Option<u32> {
        self.ids.get(&(String::from(path), String::from(key))).copied()
    }

    fn intern(&mut self, path: &str, key: &str) -> u32 {
        if let Some(id) = self.id_of(path, key) {
            return id;
        }
        let id = self.keys.len() as u32;
        let entry = (String::from(path), String::from(key));
        self.keys.push(entry.clone());
        self.ids.insert(entry, id);
        self.unary.push(0);
        self.instances_with.push(0);
        self.display.push(String::new());
        self.by_path.entry(String::from(path)).or_default().push(id);
        id
    }

    /// Occurrences of `(path, value_key)` across the corpus.
    pub fn unary(&self, path: &str, value_key: &str) -> u64 {
        self.id_of(path, value_key).map_or(0, |id| self.unary[id as usize])
    }

    /// Instances in which both pairs occur.
    pub fn pairwise(&self, a: (&str, &str), b: (&str, &str)) -> u64 {
        match (self.id_of(a.0, a.1), self.id_of(b.0, b.1)) {
            (Some(x), Some(y)) => self.pair_count(x, y),
            _ => 0,
        }
    }

    fn pair_count(&self, x: u32, y: u32) -> u64 {
        let key = if x < y { (x, y) } else { (y, x) };
        self.pairwise.get(&key).copied().unwrap_or(0)
    }

    pub fn display(&self, path: &str, value_key: &str) -> Option<&str> {
        self.id_of(path, value_key).map(|id| self.display[id as usize].as_str())
    }

    /// Adds one instance. Repeated identical pairs inside the instance each
    /// bump the unary count but count once toward co-occurrence.
    pub fn add(&mut self, m: &MetadataInstance) -> Result<(), RecommendError> {
        match &self.template_id {
            Some(t) if *t != m.template_id => {
                return Err(RecommendError::TemplateMismatch {
                    expected: t.clone(),
                    found: m.template_id.clone(),
                })
            }
            Some(_) => {}
            None => self.template_id = Some(m.template_id.clone()),
        }
        let mut present = Vec::new();
        for pair in flatten_instance(m) {
            let id = self.intern(&pair.path, &pair.value_key);
            self.unary[id as usize] += 1;
            self.display[id as usize] = pair.display;
            present.push(id);
        }
        present.sort_unstable();
        present.dedup();
        for (i, &a) in present.iter().enumerate() {
            self.instances_with[a as usize] += 1;
            for &b in &present[i + 1..] {
                *self.pairwise.entry((a, b)).or_insert(0) += 1;
            }
        }
        self.n += 1;
        Ok(())
    }

    pub fn counts(&self) -> CorpusCounts {
        let mut out = CorpusCounts {
            n: self.n,
            ..CorpusCounts::default()
        };
        for (id, key) in self.keys.iter().enumerate() {
            out.unary.insert(key.clone(), self.unary[id]);
            out.display.insert(key.clone(), self.display[id].clone());
        }
        for (&(a, b), &count) in &self.pairwise {
            let (ka, kb) = (self.keys[a as usize].clone(), self.keys[b as usize].clone());
            let key = if ka <= kb { (ka, kb) } else { (kb, ka) };
            out.pairwise.insert(key, count);
        }
        out
    }

    /// Top-`k` values for `target_path` given the filled `context`.
    ///
    /// Context pairs on the target path itself are ignored. Candidates seen
    /// fewer than `min_support` times are dropped.
    pub fn suggest(&self, target_path: &str, context: &[ContextPair], k: usize, min_support: u64) -> Vec<Suggestion> {
        let Some(candidates) = self.by_path.get(target_path) else {
            return Vec::new();
        };
        if self.n == 0 || k == 0 {
            return Vec::new();
        }
        let evidence: Vec<u32> = context
            .iter()
            .filter(|c| c.path != target_path)
            .filter_map(|c| self.id_of(&c.path, &c.value_key))
            .filter(|&id| self.unary[id as usize] > 0)
            .collect();
        let mut out: Vec<Suggestion> = candidates
            .iter()
            .filter(|&&v| self.unary[v as usize] >= min_support)
            .map(|&v| {
                let score = if evidence.is_empty() {
                    Score::new(u128::from(self.instances_with[v as usize]), u128::from(self.n))
                } else {
                    let sum = evidence.iter().fold(Score::from_integer(0), |acc, &c| {
                        acc + Score::new(u128::from(self.pair_count(c, v)), u128::from(self.unary[c as usize]))
                    });
                    sum / Score::from_integer(evidence.len() as u128)
                };
                let (_, key) = &self.keys[v as usize];
                Suggestion {
                    value_key: key.clone(),
                    display: self.display[v as usize].clone(),
                    score,
                    support_count: self.unary[v as usize],
                }
            })
            .collect();
        out.sort_by(suggestion_order);
        out.truncate(k);
        out
    }
}

/// Builds an index from a batch; equal to adding the instances one by one.
pub fn index_corpus<'a, I>(template_id: ResourceId, instances: I) -> Result<CorpusIndex, RecommendError>
where
    I: IntoIterator<Item = &'a MetadataInstance>,
{
    let mut index = CorpusIndex::new(template_id);
    for m in instances {
        index.add(m)?;
    }
    Ok(index)
}

/// Normalizes a raw context value the way the field at `path` stores it:
/// term IRIs verbatim, numbers as plain decimals, text trimmed and lowercased.
pub fn context_value_key(rt: &ResolvedTemplate, path: &str, value: &Json) -> Option<String> {
    let kind = rt.field_at(path).map(|f| &f.kind);
    match (kind, value) {
        (Some(FieldKind::Term(_)), Json::String(s)) => Some(s.clone()),
        (Some(FieldKind::Term(_)), Json::Object(_)) => value.get("@id").and_then(Json::as_str).map(String::from),
        (Some(FieldKind::Number(_)), Json::String(s)) => Decimal::parse(s.trim()).map(|d| d.to_plain()),
        (_, Json::Number(n)) => Some(Decimal::from_number(n).to_plain()),
        (_, Json::String(s)) => Some(s.trim().to_lowercase()),
        (_, Json::Object(_)) => match value.get("@value") {
            Some(inner) => context_value_key(rt, path, inner),
            None => value.get("@id").and_then(Json::as_str).map(String::from),
        },
        _ => None,
    }
}
