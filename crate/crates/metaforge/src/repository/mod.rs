//! Folder tree of versioned resources with owners, ACLs, groups and API keys.

pub mod disk;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use metaforge_core::ResourceId;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use subtle::ConstantTimeEq;

use crate::error::{Code, Error, Result};
use disk::{Change, Disk};

/// The root folder is its own parent and carries an everyone-read entry.
pub const ROOT_FOLDER: &str = "00000000-0000-4000-8000-000000000000";
/// Owner of the root folder; holds no API keys.
pub const SYSTEM_USER: &str = "00000000-0000-4000-8000-000000000001";

pub fn root_folder() -> ResourceId {
    ResourceId::parse(ROOT_FOLDER).unwrap()
}

pub fn system_user() -> ResourceId {
    ResourceId::parse(SYSTEM_USER).unwrap()
}

pub fn new_id() -> ResourceId {
    ResourceId::from_random_bytes(*uuid::Uuid::new_v4().as_bytes())
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ResourceType {
    Template,
    Element,
    Field,
    Instance,
    ValueSet,
    ProvisionalTerm,
    Folder,
}

impl ResourceType {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceType::Template => "template",
            ResourceType::Element => "element",
            ResourceType::Field => "field",
            ResourceType::Instance => "instance",
            ResourceType::ValueSet => "valueSet",
            ResourceType::ProvisionalTerm => "provisionalTerm",
            ResourceType::Folder => "folder",
        }
    }

    pub fn parse(s: &str) -> Option<ResourceType> {
        Some(match s {
            "template" => ResourceType::Template,
            "element" => ResourceType::Element,
            "field" => ResourceType::Field,
            "instance" => ResourceType::Instance,
            "valueSet" => ResourceType::ValueSet,
            "provisionalTerm" => ResourceType::ProvisionalTerm,
            "folder" => ResourceType::Folder,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Permission {
    None,
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "camelCase")]
pub enum Principal {
    User(ResourceId),
    Group(ResourceId),
    Everyone,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AclEntry {
    pub principal: Principal,
    pub level: Permission,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnnotationRecord {
    pub property_iri: String,
    pub term_iri: String,
    pub term_label: String,
}

mod raw_json {
    use serde::de::Error as _;
    use serde::ser::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(text: &str, s: S) -> Result<S::Ok, S::Error> {
        RawValue::from_string(text.to_owned())
            .map_err(S::Error::custom)?
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
        let raw = Box::<RawValue>::deserialize(d).map_err(D::Error::custom)?;
        Ok(raw.get().to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResourceRecord {
    pub id: ResourceId,
    pub resource_type: ResourceType,
    pub parent_folder: ResourceId,
    pub owner: ResourceId,
    pub acl: Vec<AclEntry>,
    pub name: String,
    pub description: String,
    pub annotations: Vec<AnnotationRecord>,
    /// Resources this one depends on; they cannot be deleted while referenced.
    pub references: Vec<ResourceId>,
    pub version: u64,
    pub created_at: String,
    pub updated_at: String,
    /// Canonical document text, embedded verbatim as JSON.
    #[serde(with = "raw_json")]
    pub payload: String,
}

/// Everything about a resource that its author supplies.
#[derive(Debug, Clone, Default)]
pub struct Content {
    pub name: String,
    pub description: String,
    pub annotations: Vec<AnnotationRecord>,
    pub references: Vec<ResourceId>,
    pub payload: String,
}

#[derive(Debug, Clone)]
pub struct NewResource {
    pub id: ResourceId,
    pub resource_type: ResourceType,
    pub parent_folder: ResourceId,
    pub content: Content,
    /// Grants beyond the owner's own write entry.
    pub extra_acl: Vec<AclEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Group {
    pub id: ResourceId,
    pub name: String,
    pub owner: ResourceId,
    pub members: BTreeSet<ResourceId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct User {
    pub id: ResourceId,
    pub name: String,
    pub home_folder: ResourceId,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Receipt {
    pub instance_id: ResourceId,
    pub target_name: String,
    pub submitted_at: String,
    pub http_status: u16,
    pub remote_id: Option<String>,
    pub raw_response: String,
    /// Submitted despite failed validation.
    pub forced: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SearchQuery {
    pub text: Option<String>,
    pub resource_type: Option<ResourceType>,
    pub annotated_with: Option<String>,
    pub folder: Option<ResourceId>,
}

/// Full in-memory state, comparable across restarts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Snapshot {
    pub records: BTreeMap<ResourceId, ResourceRecord>,
    pub groups: BTreeMap<ResourceId, Group>,
    pub users: BTreeMap<ResourceId, User>,
    pub receipts: BTreeMap<ResourceId, Vec<Receipt>>,
}

#[derive(Default)]
struct State {
    records: HashMap<ResourceId, ResourceRecord>,
    groups: HashMap<ResourceId, Group>,
    users: HashMap<ResourceId, User>,
    receipts: HashMap<ResourceId, Vec<Receipt>>,
}

fn to_file<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("records serialize");
    text.push('\n');
    text
}

fn put<T: Serialize>(dir: &str, id: &ResourceId, value: &T) -> Change {
    Change::Put {
        file: format!("{dir}/{id}.json"),
        content: to_file(value),
    }
}

fn folder_payload(name: &str) -> String {
    serde_json::json!({ "name": name, "description": "" }).to_string()
}

fn casefold(s: &str) -> String {
    s.to_lowercase()
}

impl State {
    fn record(&self, id: &ResourceId) -> Result<&ResourceRecord> {
        self.records
            .get(id)
            .ok_or_else(|| Error::not_found(format!("resource {id}")))
    }

    fn groups_of(&self, user: &ResourceId) -> BTreeSet<&ResourceId> {
        self.groups
            .values()
            .filter(|g| g.members.contains(user))
            .map(|g| &g.id)
            .collect()
    }

    /// Owner, direct entries and entries on every ancestor folder, maximized.
    /// The root's own grants only cover the root, so it can be listed without
    /// exposing every home folder.
    fn permission(&self, actor: &ResourceId, id: &ResourceId) -> Result<Permission> {
        let mut current = self.record(id)?;
        if current.owner == *actor {
            return Ok(Permission::Write);
        }
        let groups = self.groups_of(actor);
        let mut best = Permission::None;
        let mut seen = BTreeSet::new();
        loop {
            let acl: &[AclEntry] = if current.id == root_folder() && current.id != *id {
                &[]
            } else {
                &current.acl
            };
            for entry in acl {
                let applies = match &entry.principal {
                    Principal::User(u) => u == actor,
                    Principal::Group(g) => groups.contains(g),
                    Principal::Everyone => true,
                };
                if applies {
                    best = best.max(entry.level);
                }
            }
            if current.parent_folder == current.id || !seen.insert(current.id.clone()) {
                break;
            }
            current = self.record(&current.parent_folder)?;
        }
        Ok(best)
    }

    fn require(&self, actor: &ResourceId, id: &ResourceId, level: Permission) -> Result<&ResourceRecord> {
        let record = self.record(id)?;
        if self.permission(actor, id)? < level {
            return Err(Error::denied());
        }
        Ok(record)
    }

    fn is_ancestor(&self, ancestor: &ResourceId, id: &ResourceId) -> bool {
        let mut current = id;
        let mut steps = 0;
        while let Some(rec) = self.records.get(current) {
            if rec.parent_folder == rec.id || steps > self.records.len() {
                return false;
            }
            if rec.parent_folder == *ancestor {
                return true;
            }
            current = &rec.parent_folder;
            steps += 1;
        }
        false
    }
}

pub struct Repository {
    disk: Option<Disk>,
    state: RwLock<State>,
}

impl Repository {
    /// Volatile repository for tests and one-shot CLI runs.
    pub fn in_memory() -> Repository {
        let repo = Repository {
            disk: None,
            state: RwLock::new(State::default()),
        };
        repo.ensure_root().expect("in-memory writes cannot fail");
        repo
    }

    pub fn open(dir: &Path) -> Result<Repository> {
        let disk = Disk::open(dir)?;
        let mut state = State::default();
        let corrupt = |file: &str, e: serde_json::Error| Error::new(Code::Io, format!("{file}: {e}"));
        for (file, text) in disk.read_dir("resources")? {
            let rec: ResourceRecord = serde_json::from_str(&text).map_err(|e| corrupt(&file, e))?;
            state.records.insert(rec.id.clone(), rec);
        }
        for (file, text) in disk.read_dir("groups")? {
            let g: Group = serde_json::from_str(&text).map_err(|e| corrupt(&file, e))?;
            state.groups.insert(g.id.clone(), g);
        }
        for (file, text) in disk.read_dir("users")? {
            let u: User = serde_json::from_str(&text).map_err(|e| corrupt(&file, e))?;
            state.users.insert(u.id.clone(), u);
        }
        for (file, text) in disk.read_dir("receipts")? {
            let list: Vec<Receipt> = serde_json::from_str(&text).map_err(|e| corrupt(&file, e))?;
            if let Some(first) = list.first() {
                state.receipts.insert(first.instance_id.clone(), list);
            }
        }
        let repo = Repository {
            disk: Some(disk),
            state: RwLock::new(state),
        };
        repo.ensure_root()?;
        Ok(repo)
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.disk.as_ref().map(Disk::root)
    }

    fn commit(&self, changes: Vec<Change>) -> Result<()> {
        match &self.disk {
            Some(d) => d.commit(changes),
            None => Ok(()),
        }
    }

    fn ensure_root(&self) -> Result<()> {
        let mut st = self.state.write();
        if st.records.contains_key(&root_folder()) {
            return Ok(());
        }
        let ts = now();
        let root = ResourceRecord {
            id: root_folder(),
            resource_type: ResourceType::Folder,
            parent_folder: root_folder(),
            owner: system_user(),
            acl: vec![AclEntry {
                principal: Principal::Everyone,
                level: Permission::Read,
            }],
            name: "/".into(),
            description: String::new(),
            annotations: Vec::new(),
            references: Vec::new(),
            version: 0,
            created_at: ts.clone(),
            updated_at: ts,
            payload: folder_payload("/"),
        };
        self.commit(vec![put("resources", &root.id, &root)])?;
        st.records.insert(root.id.clone(), root);
        Ok(())
    }

    // ----- users and keys -----

    /// New user with a private home folder under the root and one API key.
    pub fn create_user(&self, name: &str) -> Result<(User, String)> {
        if name.trim().is_empty() {
            return Err(Error::new(Code::InvalidRequest, "user name must not be empty"));
        }
        let mut st = self.state.write();
        let id = new_id();
        let token = format!("{}{}", uuid::Uuid::new_v4().simple(), uuid::Uuid::new_v4().simple());
        let ts = now();
        let home = ResourceRecord {
            id: new_id(),
            resource_type: ResourceType::Folder,
            parent_folder: root_folder(),
            owner: id.clone(),
            acl: vec![AclEntry {
                principal: Principal::User(id.clone()),
                level: Permission::Write,
            }],
            name: name.to_owned(),
            description: String::new(),
            annotations: Vec::new(),
            references: Vec::new(),
            version: 0,
            created_at: ts.clone(),
            updated_at: ts,
            payload: folder_payload(name),
        };
        let user = User {
            id: id.clone(),
            name: name.to_owned(),
            home_folder: home.id.clone(),
            tokens: vec![token.clone()],
        };
        self.commit(vec![put("resources", &home.id, &home), put("users", &id, &user)])?;
        st.records.insert(home.id.clone(), home);
        st.users.insert(id, user.clone());
        Ok((user, token))
    }

    /// Resolves a token to its user. Every stored token is compared in
    /// constant time so unknown and known-prefix tokens take the same path.
    pub fn authenticate(&self, token: &str) -> Option<ResourceId> {
        let st = self.state.read();
        let mut found = None;
        for user in st.users.values() {
            for t in &user.tokens {
                if bool::from(t.as_bytes().ct_eq(token.as_bytes())) {
                    found = Some(user.id.clone());
                }
            }
        }
        found
    }

    pub fn user(&self, id: &ResourceId) -> Option<User> {
        self.state.read().users.get(id).cloned()
    }

    pub fn users(&self) -> Vec<User> {
        let mut out: Vec<User> = self.state.read().users.values().cloned().collect();
        out.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.id.cmp(&b.id)));
        out
    }

    // ----- records -----

    pub fn effective_permission(&self, actor: &ResourceId, id: &ResourceId) -> Result<Permission> {
        self.state.read().permission(actor, id)
    }

    pub fn get(&self, id: &ResourceId, actor: &ResourceId) -> Result<ResourceRecord> {
        self.state.read().require(actor, id, Permission::Read).cloned()
    }

    /// Reads without a permission check, for composition lookups and indexing.
    pub fn get_unchecked(&self, id: &ResourceId) -> Option<ResourceRecord> {
        self.state.read().records.get(id).cloned()
    }

    pub fn records_where(&self, pred: impl Fn(&ResourceRecord) -> bool) -> Vec<ResourceRecord> {
        let st = self.state.read();
        let mut out: Vec<ResourceRecord> = st.records.values().filter(|r| pred(r)).cloned().collect();
        out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.id.cmp(&b.id)));
        out
    }

    pub fn create(&self, new: NewResource, actor: &ResourceId) -> Result<ResourceRecord> {
        let mut st = self.state.write();
        if st.records.contains_key(&new.id) {
            return Err(Error::new(
                Code::AlreadyExists,
                format!("resource {} already exists", new.id),
            ));
        }
        match st.records.get(&new.parent_folder) {
            Some(p) if p.resource_type == ResourceType::Folder => {}
            _ => {
                return Err(Error::new(
                    Code::MissingParent,
                    format!("folder {} does not exist", new.parent_folder),
                ))
            }
        }
        st.require(actor, &new.parent_folder, Permission::Write)?;
        let ts = now();
        let mut acl = vec![AclEntry {
            principal: Principal::User(actor.clone()),
            level: Permission::Write,
        }];
        acl.extend(new.extra_acl);
        let rec = ResourceRecord {
            id: new.id,
            resource_type: new.resource_type,
            parent_folder: new.parent_folder,
            owner: actor.clone(),
            acl: normalize_acl(acl),
            name: new.content.name,
            description: new.content.description,
            annotations: new.content.annotations,
            references: new.content.references,
            version: 0,
            created_at: ts.clone(),
            updated_at: ts,
            payload: new.content.payload,
        };
        self.commit(vec![put("resources", &rec.id, &rec)])?;
        st.records.insert(rec.id.clone(), rec.clone());
        Ok(rec)
    }

    /// Replaces the content when `expected_version` matches the stored version.
    pub fn update(
        &self,
        id: &ResourceId,
        expected_version: u64,
        content: Content,
        actor: &ResourceId,
    ) -> Result<ResourceRecord> {
        let mut st = self.state.write();
        let current = st.require(actor, id, Permission::Write)?;
        if current.version != expected_version {
            return Err(Error::new(
                Code::VersionConflict,
                format!(
                    "expected version {expected_version}, stored version is {}",
                    current.version
                ),
            ));
        }
        let mut rec = current.clone();
        rec.name = content.name;
        rec.description = content.description;
        rec.annotations = content.annotations;
        rec.references = content.references;
        rec.payload = content.payload;
        bump(&mut rec);
        self.commit(vec![put("resources", &rec.id, &rec)])?;
        st.records.insert(rec.id.clone(), rec.clone());
        Ok(rec)
    }

    pub fn delete(&self, id: &ResourceId, actor: &ResourceId) -> Result<ResourceRecord> {
        let mut st = self.state.write();
        if *id == root_folder() {
            return Err(Error::new(Code::InvalidRequest, "the root folder cannot be deleted"));
        }
        let rec = st.require(actor, id, Permission::Write)?.clone();
        if let Some(user) = st.users.values().find(|u| u.home_folder == *id) {
            return Err(Error::new(
                Code::InvalidRequest,
                format!("{id} is the home folder of {}", user.name),
            ));
        }
        if let Some(by) = st.records.values().find(|r| r.id != *id && r.references.contains(id)) {
            return Err(Error::new(
                Code::Referenced,
                format!("{id} is referenced by {} {}", by.resource_type.as_str(), by.id),
            ));
        }
        if st.records.values().any(|r| r.parent_folder == *id && r.id != *id) {
            return Err(Error::new(Code::FolderNotEmpty, format!("folder {id} is not empty")));
        }
        let mut changes = vec![Change::Delete {
            file: format!("resources/{id}.json"),
        }];
        if st.receipts.contains_key(id) {
            changes.push(Change::Delete {
                file: format!("receipts/{id}.json"),
            });
        }
        self.commit(changes)?;
        st.records.remove(id);
        st.receipts.remove(id);
        Ok(rec)
    }

    pub fn move_resource(
        &self,
        id: &ResourceId,
        destination: &ResourceId,
        actor: &ResourceId,
    ) -> Result<ResourceRecord> {
        let mut st = self.state.write();
        if *id == root_folder() {
            return Err(Error::new(Code::InvalidRequest, "the root folder cannot be moved"));
        }
        let rec = st.require(actor, id, Permission::Write)?.clone();
        let dest = st.require(actor, destination, Permission::Write)?;
        if dest.resource_type != ResourceType::Folder {
            return Err(Error::new(
                Code::InvalidRequest,
                format!("{destination} is not a folder"),
            ));
        }
        if destination == id || st.is_ancestor(id, destination) {
            return Err(Error::new(
                Code::CyclicMove,
                format!("cannot move {id} into its own subtree"),
            ));
        }
        let mut rec = rec;
        rec.parent_folder = destination.clone();
        bump(&mut rec);
        self.commit(vec![put("resources", &rec.id, &rec)])?;
        st.records.insert(rec.id.clone(), rec.clone());
        Ok(rec)
    }

    /// Replaces the ACL. The owner's write entry must be kept as is.
    pub fn set_permissions(&self, id: &ResourceId, acl: Vec<AclEntry>, actor: &ResourceId) -> Result<ResourceRecord> {
        let mut st = self.state.write();
        let mut rec = st.require(actor, id, Permission::Write)?.clone();
        for entry in &acl {
            if entry.level == Permission::None {
                return Err(Error::new(Code::InvalidRequest, "ACL levels are read or write"));
            }
            match &entry.principal {
                Principal::User(u) if !st.users.contains_key(u) && *u != system_user() => {
                    return Err(Error::not_found(format!("user {u}")))
                }
                Principal::Group(g) if !st.groups.contains_key(g) => {
                    return Err(Error::not_found(format!("group {g}")))
                }
                _ => {}
            }
        }
        let acl = normalize_acl(acl);
        let owner = Principal::User(rec.owner.clone());
        if !acl.iter().any(|e| e.principal == owner && e.level == Permission::Write) {
            return Err(Error::new(
                Code::OwnerImmutable,
                "the owner's write entry cannot be removed or demoted",
            ));
        }
        rec.acl = acl;
        bump(&mut rec);
        self.commit(vec![put("resources", &rec.id, &rec)])?;
        st.records.insert(rec.id.clone(), rec.clone());
        Ok(rec)
    }

    /// Readable children, folders first, then by casefolded name.
    pub fn list_children(&self, folder: &ResourceId, actor: &ResourceId) -> Result<Vec<ResourceRecord>> {
        let st = self.state.read();
        let f = st.require(actor, folder, Permission::Read)?;
        if f.resource_type != ResourceType::Folder {
            return Err(Error::new(Code::InvalidRequest, format!("{folder} is not a folder")));
        }
        let mut out: Vec<ResourceRecord> = st
            .records
            .values()
            .filter(|r| r.parent_folder == *folder && r.id != *folder)
            .filter(|r| st.permission(actor, &r.id).is_ok_and(|p| p >= Permission::Read))
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            (a.resource_type != ResourceType::Folder)
                .cmp(&(b.resource_type != ResourceType::Folder))
                .then_with(|| casefold(&a.name).cmp(&casefold(&b.name)))
                .then_with(|| a.name.cmp(&b.name))
                .then_with(|| a.id.cmp(&b.id))
        });
        Ok(out)
    }

    /// Keyword and facet search over readable records.
    pub fn search(&self, q: &SearchQuery, actor: &ResourceId) -> Result<Vec<ResourceRecord>> {
        if q.text.is_none() && q.resource_type.is_none() && q.annotated_with.is_none() && q.folder.is_none() {
            return Err(Error::new(
                Code::InvalidQuery,
                "set at least one of q, type, annotatedWith, folder",
            ));
        }
        let tokens: Vec<String> = q
            .text
            .as_deref()
            .map(|t| t.split_whitespace().map(casefold).collect())
            .unwrap_or_default();
        let st = self.state.read();
        let mut hits: Vec<(usize, bool, &ResourceRecord)> = Vec::new();
        for rec in st.records.values() {
            if q.resource_type.is_some_and(|t| t != rec.resource_type) {
                continue;
            }
            if let Some(iri) = &q.annotated_with {
                if !rec.annotations.iter().any(|a| a.term_iri == *iri) {
                    continue;
                }
            }
            if let Some(folder) = &q.folder {
                if !st.is_ancestor(folder, &rec.id) {
                    continue;
                }
            }
            let name = casefold(&rec.name);
            let description = casefold(&rec.description);
            let in_name = tokens.iter().filter(|t| name.contains(t.as_str())).count();
            let matched = tokens
                .iter()
                .filter(|t| name.contains(t.as_str()) || description.contains(t.as_str()))
                .count();
            if !tokens.is_empty() && matched == 0 {
                continue;
            }
            if st.permission(actor, &rec.id)? < Permission::Read {
                continue;
            }
            hits.push((matched, in_name > 0, rec));
        }
        hits.sort_by(|a, b| {
            b.0.cmp(&a.0)
                .then(b.1.cmp(&a.1))
                .then_with(|| casefold(&a.2.name).cmp(&casefold(&b.2.name)))
                .then_with(|| a.2.name.cmp(&b.2.name))
                .then_with(|| a.2.id.cmp(&b.2.id))
        });
        Ok(hits.into_iter().map(|(_, _, r)| r.clone()).collect())
    }

    // ----- groups -----

    pub fn create_group(&self, name: &str, actor: &ResourceId) -> Result<Group> {
        if name.trim().is_empty() {
            return Err(Error::new(Code::InvalidRequest, "group name must not be empty"));
        }
        let mut st = self.state.write();
        let group = Group {
            id: new_id(),
            name: name.to_owned(),
            owner: actor.clone(),
            members: BTreeSet::from([actor.clone()]),
        };
        self.commit(vec![put("groups", &group.id, &group)])?;
        st.groups.insert(group.id.clone(), group.clone());
        Ok(group)
    }

    pub fn group(&self, id: &ResourceId) -> Result<Group> {
        self.state
            .read()
            .groups
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found(format!("group {id}")))
    }

    /// Applies additions then removals; only the group owner may do this.
    pub fn change_members(
        &self,
        id: &ResourceId,
        add: &[ResourceId],
        remove: &[ResourceId],
        actor: &ResourceId,
    ) -> Result<Group> {
        let mut st = self.state.write();
        let mut group = st
            .groups
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found(format!("group {id}")))?;
        if group.owner != *actor {
            return Err(Error::denied());
        }
        for u in add {
            if !st.users.contains_key(u) {
                return Err(Error::not_found(format!("user {u}")));
            }
            if !group.members.insert(u.clone()) {
                return Err(Error::new(Code::DuplicateMember, format!("{u} is already a member")));
            }
        }
        for u in remove {
            if *u == group.owner {
                return Err(Error::new(Code::OwnerImmutable, "the group owner cannot be removed"));
            }
            if !group.members.remove(u) {
                return Err(Error::not_found(format!("member {u}")));
            }
        }
        self.commit(vec![put("groups", &group.id, &group)])?;
        st.groups.insert(group.id.clone(), group.clone());
        Ok(group)
    }

    // ----- receipts -----

    pub fn add_receipt(&self, receipt: Receipt) -> Result<()> {
        let mut st = self.state.write();
        let id = receipt.instance_id.clone();
        if !st.records.contains_key(&id) {
            return Err(Error::not_found(format!("resource {id}")));
        }
        let mut list = st.receipts.get(&id).cloned().unwrap_or_default();
        list.push(receipt);
        self.commit(vec![put("receipts", &id, &list)])?;
        st.receipts.insert(id, list);
        Ok(())
    }

    pub fn receipts(&self, instance: &ResourceId) -> Vec<Receipt> {
        self.state.read().receipts.get(instance).cloned().unwrap_or_default()
    }

    // ----- checks -----

    pub fn snapshot(&self) -> Snapshot {
        let st = self.state.read();
        Snapshot {
            records: st.records.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            groups: st.groups.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            users: st.users.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            receipts: st.receipts.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// Every record hangs off an existing folder and reaches the root.
    pub fn check_tree(&self) -> Result<(), String> {
        let st = self.state.read();
        for rec in st.records.values() {
            let mut current = rec;
            let mut steps = 0;
            while current.id != root_folder() {
                let parent = st
                    .records
                    .get(&current.parent_folder)
                    .ok_or_else(|| format!("{} has missing parent {}", current.id, current.parent_folder))?;
                if parent.resource_type != ResourceType::Folder {
                    return Err(format!("{} has non-folder parent {}", current.id, parent.id));
                }
                steps += 1;
                if steps > st.records.len() {
                    return Err(format!("{} is on a parent cycle", rec.id));
                }
                current = parent;
            }
        }
        Ok(())
    }
}

fn bump(rec: &mut ResourceRecord) {
    rec.version += 1;
    rec.updated_at = now();
}

/// One entry per principal, keeping the highest level, in first-seen order.
fn normalize_acl(acl: Vec<AclEntry>) -> Vec<AclEntry> {
    let mut out: Vec<AclEntry> = Vec::new();
    for entry in acl {
        match out.iter_mut().find(|e| e.principal == entry.principal) {
            Some(existing) => existing.level = existing.level.max(entry.level),
            None => out.push(entry),
        }
    }
    out
}
