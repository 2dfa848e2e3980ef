//! Term search, branch expansion and membership against a BioPortal-style
//! remote, merged with locally minted provisional terms and value sets.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use metaforge_core::model::{ConstraintSource, ValueConstraintSet};
use metaforge_core::{is_absolute_iri, ResourceId};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Code, Error, Result};
use crate::repository::{AclEntry, Content, NewResource, Permission, Principal, Repository, ResourceType};

pub const PROVISIONAL_SOURCE: &str = "METAFORGE";
pub const PROVISIONAL_IRI_PREFIX: &str = "urn:metaforge:term:";
pub const DEFAULT_TTL: Duration = Duration::from_secs(600);
pub const MAX_BRANCH_TERMS: usize = 10_000;
const HTTP_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OntologyTerm {
    pub iri: String,
    pub label: String,
    pub source: String,
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SkosRelation {
    ExactMatch,
    CloseMatch,
    BroadMatch,
    NarrowMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Mapping {
    pub relation: SkosRelation,
    pub target_iri: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProvisionalTerm {
    pub id: ResourceId,
    pub label: String,
    pub iri: String,
    pub mappings: Vec<Mapping>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueSetMember {
    pub iri: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueSet {
    pub id: ResourceId,
    pub name: String,
    pub members: Vec<ValueSetMember>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub results: Vec<OntologyTerm>,
    /// The remote could not be reached; only local terms are included.
    pub degraded: bool,
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub base_url: String,
    pub api_key: Option<String>,
}

#[derive(Debug)]
struct CachedBranch {
    descendants: Arc<BTreeSet<String>>,
    fetched: Instant,
}

#[derive(Deserialize)]
struct RemoteClass {
    #[serde(rename = "@id")]
    id: String,
    #[serde(rename = "prefLabel", default)]
    pref_label: Option<String>,
    #[serde(default)]
    synonym: Vec<String>,
    #[serde(default)]
    ontology: Option<String>,
}

#[derive(Deserialize)]
struct Links {
    #[serde(rename = "nextPage")]
    next_page: Option<String>,
}

#[derive(Deserialize)]
struct Page {
    collection: Vec<RemoteClass>,
    #[serde(rename = "nextPage", default)]
    next_page: Option<String>,
    #[serde(default)]
    links: Option<Links>,
}

pub struct Terminology {
    repo: Arc<Repository>,
    remote: Option<RemoteConfig>,
    ttl: Duration,
    cache: RwLock<HashMap<(String, String), Arc<CachedBranch>>>,
}

fn unavailable(detail: impl std::fmt::Display) -> Error {
    Error::new(
        Code::TerminologyUnavailable,
        format!("terminology service unavailable: {detail}"),
    )
}

fn casefold(s: &str) -> String {
    s.to_lowercase()
}

/// 0 exact label, 1 prefix of label or synonym, 2 substring; `None` when unrelated.
fn tier(term: &OntologyTerm, q: &str) -> Option<u8> {
    let label = casefold(&term.label);
    if label == q {
        return Some(0);
    }
    let names = std::iter::once(label).chain(term.synonyms.iter().map(|s| casefold(s)));
    let mut best = None;
    for name in names {
        let t = if name.starts_with(q) {
            1
        } else if name.contains(q) {
            2
        } else {
            continue;
        };
        best = Some(best.map_or(t, |b: u8| b.min(t)));
    }
    best
}

/// Sorts hits by tier, then label, with remote terms before provisional ones.
pub fn rank_terms(terms: Vec<OntologyTerm>, query: &str, limit: usize) -> Vec<OntologyTerm> {
    let q = casefold(query.trim());
    let mut seen = BTreeSet::new();
    let mut hits: Vec<(u8, String, bool, OntologyTerm)> = terms
        .into_iter()
        .filter(|t| seen.insert(t.iri.clone()))
        .filter_map(|t| {
            let tier = tier(&t, &q)?;
            Some((tier, casefold(&t.label), t.source == PROVISIONAL_SOURCE, t))
        })
        .collect();
    hits.sort_by(|a, b| (a.0, &a.1, &a.3.label, a.2, &a.3.iri).cmp(&(b.0, &b.1, &b.3.label, b.2, &b.3.iri)));
    hits.into_iter().take(limit).map(|h| h.3).collect()
}

pub fn http_client(timeout: Duration) -> Result<reqwest::blocking::Client> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| Error::new(Code::Io, format!("http client: {e}")))
}

impl Terminology {
    pub fn new(repo: Arc<Repository>, remote: Option<RemoteConfig>) -> Terminology {
        Terminology {
            repo,
            remote,
            ttl: DEFAULT_TTL,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_ttl(mut self, ttl: Duration) -> Terminology {
        self.ttl = ttl;
        self
    }

    pub fn has_remote(&self) -> bool {
        self.remote.is_some()
    }

    fn get(&self, url: &str) -> Result<reqwest::blocking::Response> {
        let remote = self
            .remote
            .as_ref()
            .ok_or_else(|| unavailable("no terminology URL configured"))?;
        let mut req = http_client(HTTP_TIMEOUT)?.get(url);
        if let Some(key) = &remote.api_key {
            req = req.header("Authorization", format!("apikey token={key}"));
        }
        req.send().map_err(unavailable)
    }

    fn base(&self) -> Result<&str> {
        self.remote
            .as_ref()
            .map(|r| r.base_url.trim_end_matches('/'))
            .ok_or_else(|| unavailable("no terminology URL configured"))
    }

    fn remote_search(&self, query: &str, source: Option<&str>, limit: usize) -> Result<Vec<OntologyTerm>> {
        let mut url = format!(
            "{}/search?q={}&pagesize={limit}",
            self.base()?,
            urlencoding::encode(query)
        );
        if let Some(s) = source {
            url.push_str(&format!("&ontologies={}", urlencoding::encode(s)));
        }
        let resp = self.get(&url)?;
        if !resp.status().is_success() {
            return Err(unavailable(format!("search returned HTTP {}", resp.status().as_u16())));
        }
        let page: Page = resp.json().map_err(unavailable)?;
        Ok(page
            .collection
            .into_iter()
            .filter_map(|c| {
                Some(OntologyTerm {
                    label: c.pref_label.filter(|l| !l.is_empty())?,
                    source: c.ontology.or_else(|| source.map(String::from)).unwrap_or_default(),
                    iri: c.id,
                    synonyms: c.synonym,
                })
            })
            .collect())
    }

    /// Ranked matches from the remote and local provisional terms.
    pub fn search_terms(&self, query: &str, source: Option<&str>, limit: usize) -> Result<SearchOutcome> {
        let query = query.trim();
        if query.is_empty() {
            return Err(Error::new(Code::EmptyQuery, "query is empty"));
        }
        if limit == 0 {
            return Err(Error::new(Code::InvalidRequest, "limit must be positive"));
        }
        let mut terms = Vec::new();
        let mut degraded = false;
        if source != Some(PROVISIONAL_SOURCE) {
            match self.remote_search(query, source, limit) {
                Ok(found) => terms.extend(found),
                Err(e) => {
                    tracing::warn!("term search degraded: {e}");
                    degraded = true;
                }
            }
        }
        if source.is_none() || source == Some(PROVISIONAL_SOURCE) {
            terms.extend(self.provisional_terms().into_iter().map(|p| OntologyTerm {
                iri: p.iri,
                label: p.label,
                source: PROVISIONAL_SOURCE.into(),
                synonyms: Vec::new(),
            }));
        }
        Ok(SearchOutcome {
            results: rank_terms(terms, query, limit),
            degraded,
        })
    }

    fn fetch_descendants(&self, source: &str, root: &str) -> Result<BTreeSet<String>> {
        let mut url = Some(format!(
            "{}/ontologies/{}/classes/{}/descendants?pagesize=500",
            self.base()?,
            urlencoding::encode(source),
            urlencoding::encode(root)
        ));
        let mut out = BTreeSet::new();
        while let Some(u) = url.take() {
            let resp = self.get(&u)?;
            let status = resp.status().as_u16();
            if status == 404 {
                return Err(Error::new(
                    Code::UnknownTerm,
                    format!("<{root}> is not a term of {source}"),
                ));
            }
            if !resp.status().is_success() {
                return Err(unavailable(format!("descendants returned HTTP {status}")));
            }
            let page: Page = resp.json().map_err(unavailable)?;
            out.extend(page.collection.into_iter().map(|c| c.id));
            if out.len() > MAX_BRANCH_TERMS {
                return Err(Error::new(
                    Code::BranchTooLarge,
                    format!("branch under <{root}> exceeds {MAX_BRANCH_TERMS} terms"),
                ));
            }
            url = page.next_page.or(page.links.and_then(|l| l.next_page));
        }
        out.remove(root);
        Ok(out)
    }

    /// Descendants of `root`, from cache while fresh. A stale entry is still
    /// used when the remote cannot be reached.
    fn descendants(&self, source: &str, root: &str) -> Result<Arc<BTreeSet<String>>> {
        let key = (source.to_owned(), root.to_owned());
        let cached = self.cache.read().get(&key).cloned();
        if let Some(c) = &cached {
            if c.fetched.elapsed() < self.ttl {
                return Ok(c.descendants.clone());
            }
        }
        match self.fetch_descendants(source, root) {
            Ok(set) => {
                let entry = Arc::new(CachedBranch {
                    descendants: Arc::new(set),
                    fetched: Instant::now(),
                });
                self.cache.write().insert(key, entry.clone());
                Ok(entry.descendants.clone())
            }
            Err(e) if e.code == Code::TerminologyUnavailable => match cached {
                Some(c) => Ok(c.descendants.clone()),
                None => Err(e),
            },
            Err(e) => Err(e),
        }
    }

    pub fn expand_branch(&self, source: &str, root: &str, include_root: bool) -> Result<BTreeSet<String>> {
        let mut set = (*self.descendants(source, root)?).clone();
        if include_root {
            set.insert(root.to_owned());
        }
        Ok(set)
    }

    pub fn branch_cached(&self, source: &str, root: &str) -> bool {
        self.cache.read().contains_key(&(source.to_owned(), root.to_owned()))
    }

    /// Union membership over the constraint's sources. Branch expansion is
    /// only consulted when the cheaper sources do not already admit `iri`.
    pub fn is_member(&self, c: &ValueConstraintSet, iri: &str) -> Result<bool> {
        if self.is_member_local(c, iri) {
            return Ok(true);
        }
        for s in &c.sources {
            if let ConstraintSource::OntologyBranch {
                source,
                root_iri,
                include_root,
            } = s
            {
                if iri == root_iri {
                    if *include_root {
                        return Ok(true);
                    }
                    continue;
                }
                if self.descendants(source, root_iri)?.contains(iri) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Membership decided by literal lists and value sets alone.
    pub fn is_member_local(&self, c: &ValueConstraintSet, iri: &str) -> bool {
        c.literal_list_contains(iri)
            || c.sources.iter().any(|s| match s {
                ConstraintSource::ValueSet { value_set_id } => self
                    .value_set(value_set_id)
                    .is_some_and(|v| v.members.iter().any(|m| m.iri == iri)),
                _ => false,
            })
    }

    // ----- local terms -----

    pub fn provisional_terms(&self) -> Vec<ProvisionalTerm> {
        self.repo
            .records_where(|r| r.resource_type == ResourceType::ProvisionalTerm)
            .into_iter()
            .filter_map(|r| serde_json::from_str(&r.payload).ok())
            .collect()
    }

    pub fn value_set(&self, id: &ResourceId) -> Option<ValueSet> {
        let rec = self.repo.get_unchecked(id)?;
        if rec.resource_type != ResourceType::ValueSet {
            return None;
        }
        serde_json::from_str(&rec.payload).ok()
    }

    pub fn create_provisional_term(
        &self,
        label: &str,
        mappings: Vec<Mapping>,
        force: bool,
        folder: &ResourceId,
        actor: &ResourceId,
    ) -> Result<ProvisionalTerm> {
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::new(Code::InvalidRequest, "label must not be empty"));
        }
        if let Some(m) = mappings.iter().find(|m| !is_absolute_iri(&m.target_iri)) {
            return Err(Error::new(
                Code::InvalidRequest,
                format!("`{}` is not an absolute IRI", m.target_iri),
            ));
        }
        let folded = casefold(label);
        if !force {
            if let Some(dup) = self
                .provisional_terms()
                .into_iter()
                .find(|t| casefold(&t.label) == folded)
            {
                return Err(Error::new(
                    Code::DuplicateLabel,
                    format!(
                        "provisional term {} already has label `{}`; pass force to create anyway",
                        dup.iri, dup.label
                    ),
                ));
            }
        }
        let id = crate::repository::new_id();
        let term = ProvisionalTerm {
            iri: format!("{PROVISIONAL_IRI_PREFIX}{id}"),
            id: id.clone(),
            label: label.to_owned(),
            mappings,
        };
        self.repo.create(
            NewResource {
                id,
                resource_type: ResourceType::ProvisionalTerm,
                parent_folder: folder.clone(),
                content: Content {
                    name: term.label.clone(),
                    payload: serde_json::to_string(&term).expect("terms serialize"),
                    ..Content::default()
                },
                extra_acl: vec![everyone_read()],
            },
            actor,
        )?;
        Ok(term)
    }

    pub fn create_value_set(
        &self,
        name: &str,
        members: Vec<ValueSetMember>,
        folder: &ResourceId,
        actor: &ResourceId,
    ) -> Result<ValueSet> {
        let set = check_value_set(name, members)?;
        let id = crate::repository::new_id();
        let set = ValueSet { id: id.clone(), ..set };
        self.repo.create(
            NewResource {
                id,
                resource_type: ResourceType::ValueSet,
                parent_folder: folder.clone(),
                content: Content {
                    name: set.name.clone(),
                    payload: serde_json::to_string(&set).expect("value sets serialize"),
                    ..Content::default()
                },
                extra_acl: vec![everyone_read()],
            },
            actor,
        )?;
        Ok(set)
    }
}

fn everyone_read() -> AclEntry {
    AclEntry {
        principal: Principal::Everyone,
        level: Permission::Read,
    }
}

/// Shape rules for a value set; the returned id is a placeholder.
pub fn check_value_set(name: &str, members: Vec<ValueSetMember>) -> Result<ValueSet> {
    let name = name.trim();
    if name.is_empty() {
        return Err(Error::new(Code::InvalidRequest, "value set name must not be empty"));
    }
    if members.is_empty() {
        return Err(Error::new(Code::InvalidRequest, "value set needs at least one member"));
    }
    let mut seen = BTreeSet::new();
    for (i, m) in members.iter().enumerate() {
        if !is_absolute_iri(&m.iri) {
            return Err(
                Error::new(Code::InvalidRequest, format!("`{}` is not an absolute IRI", m.iri))
                    .at(format!("/members/{i}/iri")),
            );
        }
        if m.label.trim().is_empty() {
            return Err(
                Error::new(Code::InvalidRequest, "member label must not be empty").at(format!("/members/{i}/label"))
            );
        }
        if !seen.insert(m.iri.as_str()) {
            return Err(
                Error::new(Code::DuplicateMember, format!("<{}> appears more than once", m.iri))
                    .at(format!("/members/{i}/iri")),
            );
        }
    }
    Ok(ValueSet {
        id: crate::repository::root_folder(),
        name: name.to_owned(),
        members,
    })
}
