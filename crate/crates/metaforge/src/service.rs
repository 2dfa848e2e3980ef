//! Operations behind both the HTTP API and the CLI, with permission checks.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use metaforge_core::compiler::{compile, validate, TermMembership, ValidationReport};
use metaforge_core::json::{self, Json};
use metaforge_core::model::{
    instance_to_json, parse_instance, parse_template, resolve_composition, serialize_instance, template_to_json,
    Annotation, Child, ConstraintSource, MetadataInstance, ResolvedTemplate, Template, TemplateKind,
    ValueConstraintSet,
};
use metaforge_core::recommender::{context_value_key, CorpusIndex, Suggestion};
use metaforge_core::ResourceId;
use parking_lot::RwLock;
use serde::Deserialize;

use crate::error::{Code, Error, Result};
use crate::render::{self, ExportFormat};
use crate::repository::{
    new_id, now, root_folder, AclEntry, AnnotationRecord, Content, Group, NewResource, Permission, Receipt, Repository,
    ResourceRecord, ResourceType, SearchQuery,
};
use crate::submission::{self, ExternalValidationResult, SubmissionTarget};
use crate::terminology::{check_value_set, Mapping, ProvisionalTerm, Terminology, ValueSet, ValueSetMember};

pub const INSTANCE_IRI_PREFIX: &str = "urn:metaforge:instance:";

type Credentials = Box<dyn Fn(&str) -> Option<String> + Send + Sync>;

/// Term membership for validation. Remote failures are held back so the
/// caller can turn them into an error instead of a spurious violation.
pub struct Membership<'a> {
    terminology: &'a Terminology,
    offline: bool,
    failure: RefCell<Option<Error>>,
    skipped: RefCell<Vec<String>>,
}

impl<'a> Membership<'a> {
    pub fn new(terminology: &'a Terminology, offline: bool) -> Self {
        Membership {
            terminology,
            offline,
            failure: RefCell::new(None),
            skipped: RefCell::new(Vec::new()),
        }
    }

    /// The first remote failure, or the IRIs whose branch check was skipped offline.
    pub fn finish(self) -> Result<Vec<String>> {
        match self.failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(self.skipped.into_inner()),
        }
    }
}

impl TermMembership for Membership<'_> {
    fn is_member(&self, c: &ValueConstraintSet, iri: &str) -> bool {
        if self.offline {
            if self.terminology.is_member_local(c, iri) {
                return true;
            }
            let has_branch = c
                .sources
                .iter()
                .any(|s| matches!(s, ConstraintSource::OntologyBranch { .. }));
            if has_branch {
                self.skipped.borrow_mut().push(iri.to_owned());
            }
            return has_branch;
        }
        match self.terminology.is_member(c, iri) {
            Ok(b) => b,
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                true
            }
        }
    }
}

/// Validates with remote-aware membership; returns the report and any skipped IRIs.
pub fn check_instance(
    terminology: &Terminology,
    offline: bool,
    rt: &ResolvedTemplate,
    m: &MetadataInstance,
) -> Result<(ValidationReport, Vec<String>)> {
    let membership = Membership::new(terminology, offline);
    let report = validate(rt, m, &membership);
    let skipped = membership.finish()?;
    Ok((report, skipped))
}

#[derive(Debug, Clone, Deserialize)]
pub struct ContextEntry {
    pub path: String,
    pub value: serde_json::Value,
}

fn default_k() -> usize {
    10
}

fn default_min_support() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecommendRequest {
    pub template_id: ResourceId,
    pub target_path: String,
    #[serde(default)]
    pub context: Vec<ContextEntry>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_min_support")]
    pub min_support: u64,
}

/// Suggestions for `target_path` given raw context values.
pub fn recommend_from(
    rt: &ResolvedTemplate,
    index: &CorpusIndex,
    target_path: &str,
    context: &[ContextEntry],
    k: usize,
    min_support: u64,
) -> Result<Vec<Suggestion>> {
    if k == 0 {
        return Err(Error::new(Code::InvalidRequest, "k must be positive").at("/k"));
    }
    if rt.field_at(target_path).is_none() {
        return Err(Error::new(
            Code::InvalidRequest,
            format!("`{target_path}` is not a field path of the template"),
        )
        .at("/targetPath"));
    }
    let mut pairs = Vec::new();
    for (i, c) in context.iter().enumerate() {
        if rt.field_at(&c.path).is_none() {
            return Err(Error::new(
                Code::InvalidRequest,
                format!("`{}` is not a field path of the template", c.path),
            )
            .at(format!("/context/{i}/path")));
        }
        let value = json::parse(&c.value.to_string()).map_err(|e| Error::new(Code::InvalidRequest, e.0))?;
        let key = context_value_key(rt, &c.path, &value).ok_or_else(|| {
            Error::new(Code::InvalidRequest, "context value must be a string, number or term")
                .at(format!("/context/{i}/value"))
        })?;
        pairs.push(metaforge_core::recommender::ContextPair::new(c.path.clone(), key));
    }
    Ok(index.suggest(target_path, &pairs, k, min_support))
}

fn parse_ordered(body: &str) -> Result<Json> {
    json::parse(body).map_err(|e| Error::new(Code::MalformedJson, e.0))
}

/// Inserts `key: value` at the front when the object lacks `key`.
fn fill_key(doc: Json, key: &str, value: &str) -> Result<Json> {
    match doc {
        Json::Object(mut entries) => {
            if !entries.iter().any(|(k, _)| k == key) {
                entries.insert(0, (key.to_owned(), Json::str(value)));
            }
            Ok(Json::Object(entries))
        }
        other => Err(Error::new(
            Code::InvalidPayload,
            format!("expected a JSON object, found {}", other.kind_name()),
        )),
    }
}

fn annotation_records(list: &[Annotation], out: &mut Vec<AnnotationRecord>) {
    for a in list {
        let rec = AnnotationRecord {
            property_iri: a.property_iri.clone(),
            term_iri: a.term_iri.clone(),
            term_label: a.term_label.clone(),
        };
        if !out.contains(&rec) {
            out.push(rec);
        }
    }
}

/// Annotations on the template and every field and element nested in it.
fn all_annotations(t: &Template, out: &mut Vec<AnnotationRecord>) {
    annotation_records(&t.annotations, out);
    if let Some(f) = &t.field {
        annotation_records(&f.annotations, out);
    }
    for c in &t.children {
        match c {
            Child::Field(f) => annotation_records(&f.annotations, out),
            Child::Element(e) => all_annotations(e, out),
            Child::Reference(_) => {}
        }
    }
}

fn template_content(t: &Template) -> Content {
    let mut annotations = Vec::new();
    all_annotations(t, &mut annotations);
    let mut references = t.referenced_ids();
    references.sort();
    references.dedup();
    Content {
        name: t.name.clone(),
        description: t.description.clone().unwrap_or_default(),
        annotations,
        references,
        payload: template_to_json(t).to_compact(),
    }
}

fn resource_type_of(kind: TemplateKind) -> ResourceType {
    match kind {
        TemplateKind::Template => ResourceType::Template,
        TemplateKind::Element => ResourceType::Element,
        TemplateKind::Field => ResourceType::Field,
    }
}

#[derive(Debug, Deserialize)]
struct FolderDoc {
    name: String,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Deserialize)]
struct ValueSetDoc {
    name: String,
    members: Vec<ValueSetMember>,
}

#[derive(Debug, Deserialize)]
struct ProvisionalDoc {
    label: String,
    #[serde(default)]
    mappings: Vec<Mapping>,
}

fn from_body<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T> {
    serde_json::from_str(body).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            Error::new(Code::MalformedJson, e.to_string())
        } else {
            Error::new(Code::InvalidPayload, e.to_string())
        }
    })
}

pub struct Service {
    pub repo: Arc<Repository>,
    pub terminology: Arc<Terminology>,
    targets: Vec<SubmissionTarget>,
    credentials: Credentials,
    indexes: RwLock<HashMap<ResourceId, Arc<CorpusIndex>>>,
    /// Bumped on every instance change; an index built across a bump is discarded.
    corpus_generation: AtomicU64,
}

impl Service {
    pub fn new(repo: Arc<Repository>, terminology: Arc<Terminology>, targets: Vec<SubmissionTarget>) -> Service {
        Service {
            repo,
            terminology,
            targets,
            credentials: Box::new(|var| std::env::var(var).ok()),
            indexes: RwLock::new(HashMap::new()),
            corpus_generation: AtomicU64::new(0),
        }
    }

    /// Replaces the environment lookup used for target API keys.
    pub fn with_credentials(mut self, f: impl Fn(&str) -> Option<String> + Send + Sync + 'static) -> Service {
        self.credentials = Box::new(f);
        self
    }

    pub fn targets(&self) -> &[SubmissionTarget] {
        &self.targets
    }

    fn home_of(&self, actor: &ResourceId) -> ResourceId {
        self.repo.user(actor).map_or_else(root_folder, |u| u.home_folder)
    }

    fn folder_or_home(&self, folder: Option<ResourceId>, actor: &ResourceId) -> ResourceId {
        folder.unwrap_or_else(|| self.home_of(actor))
    }

    /// Stored template, element or field by id, ignoring ACLs.
    pub fn lookup(&self, id: &ResourceId) -> Option<Template> {
        let rec = self.repo.get_unchecked(id)?;
        match rec.resource_type {
            ResourceType::Template | ResourceType::Element | ResourceType::Field => parse_template(&rec.payload).ok(),
            _ => None,
        }
    }

    pub fn resolve(&self, t: &Template) -> Result<ResolvedTemplate> {
        Ok(resolve_composition(t, |id| {
            if *id == t.id {
                Some(t.clone())
            } else {
                self.lookup(id)
            }
        })?)
    }

    fn read_typed(&self, id: &ResourceId, ty: ResourceType, actor: &ResourceId) -> Result<ResourceRecord> {
        let rec = self.repo.get(id, actor)?;
        if rec.resource_type != ty {
            return Err(Error::new(
                Code::InvalidRequest,
                format!("{id} is a {}, not a {}", rec.resource_type.as_str(), ty.as_str()),
            ));
        }
        Ok(rec)
    }

    pub fn resolved_template(&self, id: &ResourceId, actor: &ResourceId) -> Result<ResolvedTemplate> {
        let rec = self.read_typed(id, ResourceType::Template, actor)?;
        self.resolve(&parse_template(&rec.payload)?)
    }

    // ----- templates, elements, fields -----

    fn parse_template_body(&self, body: &str, kind: TemplateKind, id: Option<&ResourceId>) -> Result<Template> {
        let fresh = new_id();
        let doc = fill_key(parse_ordered(body)?, "id", id.unwrap_or(&fresh).as_str())?;
        let t = parse_template(&doc.to_compact())?;
        if t.kind != kind {
            return Err(Error::new(
                Code::InvalidPayload,
                format!("document is a {}, expected a {}", t.kind.as_str(), kind.as_str()),
            )
            .at("/kind"));
        }
        if let Some(id) = id {
            if t.id != *id {
                return Err(Error::new(
                    Code::InvalidPayload,
                    format!("document id {} does not match {id}", t.id),
                )
                .at("/id"));
            }
        }
        if kind != TemplateKind::Field {
            self.resolve(&t)?;
        }
        Ok(t)
    }

    pub fn create_template(
        &self,
        kind: TemplateKind,
        body: &str,
        folder: Option<ResourceId>,
        actor: &ResourceId,
    ) -> Result<ResourceRecord> {
        let mut t = self.parse_template_body(body, kind, None)?;
        t.version = 0;
        self.repo.create(
            NewResource {
                id: t.id.clone(),
                resource_type: resource_type_of(kind),
                parent_folder: self.folder_or_home(folder, actor),
                content: template_content(&t),
                extra_acl: Vec::new(),
            },
            actor,
        )
    }

    pub fn schema(&self, id: &ResourceId, actor: &ResourceId) -> Result<String> {
        Ok(compile(&self.resolved_template(id, actor)?).schema_doc)
    }

    // ----- instances -----

    fn parse_instance_body(&self, body: &str, record_id: &ResourceId) -> Result<MetadataInstance> {
        let doc = fill_key(
            parse_ordered(body)?,
            "@id",
            &format!("{INSTANCE_IRI_PREFIX}{record_id}"),
        )?;
        Ok(parse_instance(&doc.to_compact())?)
    }

    fn checked(&self, m: &MetadataInstance, actor: &ResourceId) -> Result<()> {
        let rt = self.resolved_template(&m.template_id, actor)?;
        let (report, _) = check_instance(&self.terminology, false, &rt, m)?;
        if !report.valid {
            return Err(Error::invalid_instance(&report));
        }
        Ok(())
    }

    fn instance_content(m: &MetadataInstance) -> Content {
        Content {
            name: m.instance_id.clone(),
            description: String::new(),
            annotations: Vec::new(),
            references: vec![m.template_id.clone()],
            payload: instance_to_json(m).to_compact(),
        }
    }

    /// Stores an instance only when it validates against its template.
    pub fn create_instance(
        &self,
        body: &str,
        folder: Option<ResourceId>,
        actor: &ResourceId,
    ) -> Result<ResourceRecord> {
        let id = new_id();
        let m = self.parse_instance_body(body, &id)?;
        self.checked(&m, actor)?;
        let rec = self.repo.create(
            NewResource {
                id,
                resource_type: ResourceType::Instance,
                parent_folder: self.folder_or_home(folder, actor),
                content: Self::instance_content(&m),
                extra_acl: Vec::new(),
            },
            actor,
        )?;
        self.corpus_changed(&m.template_id);
        Ok(rec)
    }

    pub fn validate_document(
        &self,
        template_id: &ResourceId,
        body: &str,
        actor: &ResourceId,
    ) -> Result<ValidationReport> {
        let rt = self.resolved_template(template_id, actor)?;
        let m = parse_instance(body)?;
        Ok(check_instance(&self.terminology, false, &rt, &m)?.0)
    }

    fn stored_instance(
        &self,
        id: &ResourceId,
        actor: &ResourceId,
        level: Permission,
    ) -> Result<(ResourceRecord, MetadataInstance)> {
        let rec = self.read_typed(id, ResourceType::Instance, actor)?;
        if level == Permission::Write && self.repo.effective_permission(actor, id)? < Permission::Write {
            return Err(Error::denied());
        }
        let m = parse_instance(&rec.payload)?;
        Ok((rec, m))
    }

    fn template_of(&self, m: &MetadataInstance) -> Result<ResolvedTemplate> {
        let t = self
            .lookup(&m.template_id)
            .ok_or_else(|| Error::not_found(format!("template {}", m.template_id)))?;
        self.resolve(&t)
    }

    pub fn export_instance(&self, id: &ResourceId, format: ExportFormat, actor: &ResourceId) -> Result<String> {
        let (_, m) = self.stored_instance(id, actor, Permission::Read)?;
        let rt = self.template_of(&m)?;
        render::export(&rt, &m, format)
    }

    // ----- generic resource operations -----

    pub fn get(&self, id: &ResourceId, actor: &ResourceId) -> Result<ResourceRecord> {
        self.repo.get(id, actor)
    }

    /// Replaces a resource's document; the body shape depends on its type.
    pub fn update(
        &self,
        id: &ResourceId,
        expected_version: u64,
        body: &str,
        actor: &ResourceId,
    ) -> Result<ResourceRecord> {
        let current = self.repo.get(id, actor)?;
        let content = match current.resource_type {
            ResourceType::Template | ResourceType::Element | ResourceType::Field => {
                let kind = TemplateKind::parse(current.resource_type.as_str()).expect("template kinds");
                let mut t = self.parse_template_body(body, kind, Some(id))?;
                t.version = expected_version + 1;
                template_content(&t)
            }
            ResourceType::Instance => {
                let m = self.parse_instance_body(body, id)?;
                self.checked(&m, actor)?;
                Self::instance_content(&m)
            }
            ResourceType::Folder => {
                let doc: FolderDoc = from_body(body)?;
                folder_content(&doc.name, &doc.description)?
            }
            ResourceType::ValueSet => {
                let doc: ValueSetDoc = from_body(body)?;
                let set = ValueSet {
                    id: id.clone(),
                    ..check_value_set(&doc.name, doc.members)?
                };
                Content {
                    name: set.name.clone(),
                    payload: serde_json::to_string(&set).expect("value sets serialize"),
                    ..Content::default()
                }
            }
            ResourceType::ProvisionalTerm => {
                let doc: ProvisionalDoc = from_body(body)?;
                let old: ProvisionalTerm =
                    serde_json::from_str(&current.payload).map_err(|e| Error::new(Code::Io, e.to_string()))?;
                let label = doc.label.trim().to_owned();
                if label.is_empty() {
                    return Err(Error::new(Code::InvalidRequest, "label must not be empty"));
                }
                let term = ProvisionalTerm {
                    label,
                    mappings: doc.mappings,
                    ..old
                };
                Content {
                    name: term.label.clone(),
                    payload: serde_json::to_string(&term).expect("terms serialize"),
                    ..Content::default()
                }
            }
        };
        let rec = self.repo.update(id, expected_version, content, actor)?;
        match rec.resource_type {
            ResourceType::Instance => {
                if let Some(t) = current.references.first() {
                    self.corpus_changed(t);
                }
                if let Some(t) = rec.references.first() {
                    self.corpus_changed(t);
                }
            }
            ResourceType::Template => self.corpus_changed(id),
            _ => {}
        }
        Ok(rec)
    }

    pub fn delete(&self, id: &ResourceId, actor: &ResourceId) -> Result<ResourceRecord> {
        let rec = self.repo.delete(id, actor)?;
        if rec.resource_type == ResourceType::Instance {
            if let Some(t) = rec.references.first() {
                self.corpus_changed(t);
            }
        }
        Ok(rec)
    }

    pub fn create_folder(&self, body: &str, parent: Option<ResourceId>, actor: &ResourceId) -> Result<ResourceRecord> {
        let doc: FolderDoc = from_body(body)?;
        self.repo.create(
            NewResource {
                id: new_id(),
                resource_type: ResourceType::Folder,
                parent_folder: self.folder_or_home(parent, actor),
                content: folder_content(&doc.name, &doc.description)?,
                extra_acl: Vec::new(),
            },
            actor,
        )
    }

    pub fn move_resource(&self, id: &ResourceId, dest: &ResourceId, actor: &ResourceId) -> Result<ResourceRecord> {
        self.repo.move_resource(id, dest, actor)
    }

    pub fn list_children(&self, folder: &ResourceId, actor: &ResourceId) -> Result<Vec<ResourceRecord>> {
        self.repo.list_children(folder, actor)
    }

    pub fn search(&self, q: &SearchQuery, actor: &ResourceId) -> Result<Vec<ResourceRecord>> {
        self.repo.search(q, actor)
    }

    pub fn set_permissions(&self, id: &ResourceId, acl: Vec<AclEntry>, actor: &ResourceId) -> Result<ResourceRecord> {
        self.repo.set_permissions(id, acl, actor)
    }

    pub fn create_group(&self, name: &str, actor: &ResourceId) -> Result<Group> {
        self.repo.create_group(name, actor)
    }

    pub fn group(&self, id: &ResourceId, actor: &ResourceId) -> Result<Group> {
        let g = self.repo.group(id)?;
        if g.owner != *actor && !g.members.contains(actor) {
            return Err(Error::denied());
        }
        Ok(g)
    }

    pub fn change_members(
        &self,
        id: &ResourceId,
        add: &[ResourceId],
        remove: &[ResourceId],
        actor: &ResourceId,
    ) -> Result<Group> {
        self.repo.change_members(id, add, remove, actor)
    }

    // ----- terms -----

    pub fn create_value_set(
        &self,
        body: &str,
        folder: Option<ResourceId>,
        actor: &ResourceId,
    ) -> Result<ResourceRecord> {
        let doc: ValueSetDoc = from_body(body)?;
        let folder = self.folder_or_home(folder, actor);
        let set = self
            .terminology
            .create_value_set(&doc.name, doc.members, &folder, actor)?;
        self.repo.get(&set.id, actor)
    }

    pub fn create_provisional_term(
        &self,
        label: &str,
        mappings: Vec<Mapping>,
        force: bool,
        folder: Option<ResourceId>,
        actor: &ResourceId,
    ) -> Result<ProvisionalTerm> {
        let folder = self.folder_or_home(folder, actor);
        self.terminology
            .create_provisional_term(label, mappings, force, &folder, actor)
    }

    // ----- recommender -----

    fn corpus_changed(&self, template_id: &ResourceId) {
        self.corpus_generation.fetch_add(1, Ordering::SeqCst);
        self.indexes.write().remove(template_id);
    }

    /// Current index snapshot for a template, built from all stored instances on first use.
    pub fn index_for(&self, template_id: &ResourceId) -> Result<Arc<CorpusIndex>> {
        if let Some(idx) = self.indexes.read().get(template_id) {
            return Ok(idx.clone());
        }
        let generation = self.corpus_generation.load(Ordering::SeqCst);
        let mut index = CorpusIndex::new(template_id.clone());
        let records = self
            .repo
            .records_where(|r| r.resource_type == ResourceType::Instance && r.references.first() == Some(template_id));
        for rec in records {
            index.add(&parse_instance(&rec.payload)?)?;
        }
        let index = Arc::new(index);
        let mut map = self.indexes.write();
        if self.corpus_generation.load(Ordering::SeqCst) == generation {
            map.insert(template_id.clone(), index.clone());
        }
        Ok(index)
    }

    pub fn recommend(&self, req: &RecommendRequest, actor: &ResourceId) -> Result<Vec<Suggestion>> {
        let rt = self.resolved_template(&req.template_id, actor)?;
        let index = self.index_for(&req.template_id)?;
        recommend_from(&rt, &index, &req.target_path, &req.context, req.k, req.min_support)
    }

    // ----- submission -----

    pub fn receipts(&self, instance: &ResourceId, actor: &ResourceId) -> Result<Vec<Receipt>> {
        self.read_typed(instance, ResourceType::Instance, actor)?;
        Ok(self.repo.receipts(instance))
    }

    /// Runs local and external validation, then posts the payload. Every
    /// request that reaches the endpoint leaves a receipt, accepted or not.
    pub fn submit(&self, instance: &ResourceId, target_name: &str, force: bool, actor: &ResourceId) -> Result<Receipt> {
        let (_, m) = self.stored_instance(instance, actor, Permission::Write)?;
        let target = self.targets.iter().find(|t| t.name == target_name).ok_or_else(|| {
            Error::new(
                Code::UnknownTarget,
                format!("no submission target named `{target_name}`"),
            )
        })?;
        let rt = self.template_of(&m)?;
        let (report, _) = check_instance(&self.terminology, false, &rt, &m)?;
        if !report.valid && !force {
            return Err(Error::new(Code::SubmissionBlocked, "instance fails local validation")
                .with_detail("report", serde_json::to_value(report.to_json()).unwrap_or_default()));
        }
        let payload = submission::serialize_for_target(&rt, &m, target.format)?;
        let api_key = (self.credentials)(&target.api_key_env_var).ok_or_else(|| {
            Error::new(
                Code::MissingCredential,
                format!("environment variable {} is not set", target.api_key_env_var),
            )
        })?;
        let mut forced = !report.valid;
        if let Some(url) = &target.external_validator_url {
            match submission::validate_external(url, &serialize_instance(&m)) {
                Ok(ExternalValidationResult { valid: true, .. }) => {}
                Ok(result) if !force => {
                    return Err(
                        Error::new(Code::SubmissionBlocked, "external validator rejected the instance")
                            .with_detail("external", serde_json::to_value(result).unwrap_or_default()),
                    );
                }
                Err(e) if !force => return Err(e),
                _ => forced = true,
            }
        }
        let answer = submission::post_submission(target, &payload, &api_key)?;
        let receipt = Receipt {
            instance_id: instance.clone(),
            target_name: target.name.clone(),
            submitted_at: now(),
            http_status: answer.http_status,
            remote_id: answer.remote_id,
            raw_response: answer.raw_response,
            forced,
        };
        self.repo.add_receipt(receipt.clone())?;
        if !(200..300).contains(&receipt.http_status) {
            return Err(Error::new(
                Code::SubmissionRejected,
                format!("target `{}` answered HTTP {}", target.name, receipt.http_status),
            )
            .with_detail("receipt", serde_json::to_value(&receipt).unwrap_or_default()));
        }
        Ok(receipt)
    }
}

fn folder_content(name: &str, description: &str) -> Result<Content> {
    let name = name.trim();
    if name.is_empty() {
        return Err(Error::new(Code::InvalidRequest, "folder name must not be empty").at("/name"));
    }
    Ok(Content {
        name: name.to_owned(),
        description: description.to_owned(),
        payload: serde_json::json!({ "name": name, "description": description }).to_string(),
        ..Content::default()
    })
}
